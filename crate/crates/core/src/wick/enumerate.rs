//! Contraction patterns. Factors are numbered globally in input order, so
//! factor `j` of monomial `i` has index `Σ_{i′<i} len(i′) + j`. A pattern is
//! canonical when each pair is `(a, b)` with `a < b` and pairs are sorted;
//! the enumeration emits exactly the canonical patterns, in lexicographic
//! order of their pair lists.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FieldMonomial, Species};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContractionPattern {
    pub pairs: Vec<(usize, usize)>,
    /// Uncontracted factors, kept as inert operator symbols.
    pub remainder: Vec<usize>,
}

impl ContractionPattern {
    /// `a-b` pairs joined by spaces; `-` for the empty pattern.
    pub fn encode(&self) -> String {
        if self.pairs.is_empty() {
            return "-".into();
        }
        self.pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(" ")
    }
}

/// Global index to `(monomial, factor)`.
pub fn factor_locations(monomials: &[FieldMonomial]) -> Vec<(usize, usize)> {
    monomials.iter().enumerate().flat_map(|(i, m)| (0..m.factors.len()).map(move |j| (i, j))).collect()
}

/// Whether two factors may be contracted; supplied by the propagator table.
pub trait Pairing {
    fn pairs(&self, a: &Species, b: &Species) -> bool;
}

impl<F: Fn(&Species, &Species) -> bool> Pairing for F {
    fn pairs(&self, a: &Species, b: &Species) -> bool {
        self(a, b)
    }
}

/// Pairs `(a, b)`, `a < b`, across distinct monomials with a propagator.
pub fn admissible_pairs(monomials: &[FieldMonomial], table: &dyn Pairing) -> Vec<(usize, usize)> {
    let loc = factor_locations(monomials);
    let species = |k: usize| &monomials[loc[k].0].factors[loc[k].1].species;
    let mut out = Vec::new();
    for a in 0..loc.len() {
        for b in a + 1..loc.len() {
            if loc[a].0 != loc[b].0 && table.pairs(species(a), species(b)) {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn enumerate_contractions(monomials: &[FieldMonomial], n_pairs: usize, table: &dyn Pairing) -> Vec<ContractionPattern> {
    let n = factor_locations(monomials).len();
    let candidates = admissible_pairs(monomials, table);
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut chosen = Vec::with_capacity(n_pairs);
    // candidates are sorted, so choosing them in increasing order yields each
    // pair set once, already canonical
    fn go(
        start: usize,
        left: usize,
        cands: &[(usize, usize)],
        used: &mut [bool],
        chosen: &mut Vec<(usize, usize)>,
        out: &mut Vec<ContractionPattern>,
    ) {
        if left == 0 {
            let remainder = (0..used.len()).filter(|k| !used[*k]).collect();
            out.push(ContractionPattern { pairs: chosen.clone(), remainder });
            return;
        }
        for (i, &(a, b)) in cands.iter().enumerate().skip(start) {
            if used[a] || used[b] {
                continue;
            }
            used[a] = true;
            used[b] = true;
            chosen.push((a, b));
            go(i + 1, left - 1, cands, used, chosen, out);
            chosen.pop();
            used[a] = false;
            used[b] = false;
        }
    }
    if 2 * n_pairs <= n {
        go(0, n_pairs, &candidates, &mut used, &mut chosen, &mut out);
    }
    out
}

/// Every pattern of every size, the full Wick expansion.
pub fn enumerate_all(monomials: &[FieldMonomial], table: &dyn Pairing) -> Vec<ContractionPattern> {
    let n = factor_locations(monomials).len();
    (0..=n / 2).flat_map(|k| enumerate_contractions(monomials, k, table)).collect()
}

/// Reference count by subset enumeration over the admissible pairs: a
/// `k`-subset counts when no factor repeats. Subsets are walked as bit masks
/// of fixed popcount.
pub fn brute_force_count(monomials: &[FieldMonomial], n_pairs: usize, table: &dyn Pairing) -> usize {
    let cands = admissible_pairs(monomials, table);
    let m = cands.len();
    assert!(m < 64, "brute force is limited to 63 candidate pairs, got {m}");
    if n_pairs > m {
        return 0;
    }
    if n_pairs == 0 {
        return 1;
    }
    let disjoint = |mask: u64| {
        let mut seen = BTreeSet::new();
        (0..m).filter(|i| mask >> i & 1 == 1).all(|i| seen.insert(cands[i].0) && seen.insert(cands[i].1))
    };
    let mut mask: u64 = (1 << n_pairs) - 1;
    let mut count = 0;
    while mask < 1 << m {
        count += usize::from(disjoint(mask));
        // next mask with the same popcount
        let low = mask & mask.wrapping_neg();
        let ripple = mask + low;
        mask = (((ripple ^ mask) >> 2) / low) | ripple;
    }
    count
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// `Σ Π_s C(a_s, k_s) C(b_s, k_s) k_s!` over splittings `Σ k_s = k`, for two
/// monomials with species counts `a_s`, `b_s` and a table that only pairs
/// equal species.
pub fn two_vertex_count(a: &[usize], b: &[usize], k: usize) -> u128 {
    assert_eq!(a.len(), b.len());
    fn go(a: &[usize], b: &[usize], k: usize) -> u128 {
        match a.split_first() {
            None => u128::from(k == 0),
            Some((&a0, rest)) => (0..=k.min(a0).min(b[0]))
                .map(|j| binom(a0, j) * binom(b[0], j) * factorial(j) * go(rest, &b[1..], k - j))
                .sum(),
        }
    }
    go(a, b, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::wick::FieldFactor;
    use proptest::prelude::*;

    fn same_species(a: &Species, b: &Species) -> bool {
        a == b
    }

    fn phis(point: &str, n: usize) -> FieldMonomial {
        FieldMonomial::new(point, vec![FieldFactor::scalar(int(0)); n])
    }

    #[test]
    fn phi_four_squared_has_seventy_two_double_contractions() {
        let m = [phis("x", 4), phis("y", 4)];
        let pats = enumerate_contractions(&m, 2, &same_species);
        assert_eq!(pats.len(), 72);
        assert_eq!(brute_force_count(&m, 2, &same_species), 72);
        assert_eq!(two_vertex_count(&[4], &[4], 2), 72);
        let distinct: BTreeSet<_> = pats.iter().collect();
        assert_eq!(distinct.len(), 72);
        for p in &pats {
            assert_eq!(p.remainder.len(), 4);
            assert!(p.pairs.iter().all(|(a, b)| *a < 4 && *b >= 4));
        }
        let full: Vec<usize> = (0..=4).map(|k| enumerate_contractions(&m, k, &same_species).len()).collect();
        assert_eq!(full, [1, 16, 72, 96, 24]);
    }

    #[test]
    fn no_pairs_leaves_everything_uncontracted() {
        let m = [phis("x", 3), phis("y", 2)];
        let pats = enumerate_contractions(&m, 0, &same_species);
        assert_eq!(pats, vec![ContractionPattern { pairs: vec![], remainder: vec![0, 1, 2, 3, 4] }]);
        assert_eq!(pats[0].encode(), "-");
        assert!(enumerate_contractions(&m, 3, &same_species).is_empty());
    }

    #[test]
    fn potentials_pair_only_with_potentials() {
        let v = |p: &str, e: &str| FieldMonomial::new(p, vec![FieldFactor::potential(1, int(0), e), FieldFactor::scalar(int(0))]);
        let m = [v("x", "e1"), v("y", "e2")];
        let pats = enumerate_contractions(&m, 2, &same_species);
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].pairs, vec![(0, 2), (1, 3)]);
        assert!(pats[0].remainder.is_empty());
        assert_eq!(brute_force_count(&m, 2, &same_species), 1);
        // with the cross entries present the crossed pairing appears as well
        assert_eq!(enumerate_contractions(&m, 2, &|_: &Species, _: &Species| true).len(), 2);
    }

    #[test]
    fn same_point_factors_never_contract() {
        let m = [phis("x", 4)];
        assert!(enumerate_contractions(&m, 1, &same_species).is_empty());
        assert_eq!(enumerate_contractions(&m, 0, &same_species).len(), 1);
    }

    #[test]
    fn three_vertices_match_brute_force() {
        let m = [phis("x", 3), phis("y", 3), phis("z", 2)];
        for k in 0..=4 {
            assert_eq!(enumerate_contractions(&m, k, &same_species).len(), brute_force_count(&m, k, &same_species), "k={k}");
        }
        // three propagators around the triangle plus the chain variants
        let tri = [phis("x", 2), phis("y", 2), phis("z", 2)];
        assert_eq!(enumerate_contractions(&tri, 3, &same_species).len(), 8);
    }

    fn species_strategy() -> impl Strategy<Value = Species> {
        prop_oneof![
            Just(Species::Scalar { mass: int(0) }),
            Just(Species::Scalar { mass: int(1) }),
            Just(Species::FieldStrength { spin: 1, mass: int(0) }),
        ]
    }

    fn product_strategy() -> impl Strategy<Value = Vec<FieldMonomial>> {
        prop::collection::vec(prop::collection::vec(species_strategy(), 0..=4), 1..=3)
            .prop_filter("at most eight factors", |ms| ms.iter().map(Vec::len).sum::<usize>() <= 8)
            .prop_map(|ms| {
                ms.into_iter()
                    .enumerate()
                    .map(|(i, fs)| {
                        let factors = fs.into_iter().map(|species| FieldFactor { species, derivs: vec![], string: None }).collect();
                        FieldMonomial::new(&format!("x{i}"), factors)
                    })
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn counts_match_the_oracles(m in product_strategy(), k in 0usize..=4) {
            let pats = enumerate_contractions(&m, k, &same_species);
            prop_assert_eq!(pats.len(), brute_force_count(&m, k, &same_species));
            let distinct: BTreeSet<_> = pats.iter().collect();
            prop_assert_eq!(distinct.len(), pats.len());
            prop_assert!(pats.windows(2).all(|w| w[0].pairs < w[1].pairs));
            if m.len() == 2 {
                let kinds = species_strategy_values();
                let count = |mono: &FieldMonomial| -> Vec<usize> {
                    kinds.iter().map(|s| mono.factors.iter().filter(|f| &f.species == s).count()).collect()
                };
                prop_assert_eq!(pats.len() as u128, two_vertex_count(&count(&m[0]), &count(&m[1]), k));
            }
            for p in &pats {
                let mut all: Vec<usize> = p.pairs.iter().flat_map(|(a, b)| [*a, *b]).chain(p.remainder.iter().copied()).collect();
                all.sort();
                prop_assert_eq!(all, (0..factor_locations(&m).len()).collect::<Vec<_>>());
            }
        }
    }

    fn species_strategy_values() -> Vec<Species> {
        vec![
            Species::Scalar { mass: int(0) },
            Species::Scalar { mass: int(1) },
            Species::FieldStrength { spin: 1, mass: int(0) },
        ]
    }
}
