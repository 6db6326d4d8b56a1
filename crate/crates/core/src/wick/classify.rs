//! Propagators for contracted pairs, the products they form in the relative
//! position `x`, and the wavefront classification of those products.
//!
//! A propagator depends on the difference of its two points only, so a term
//! whose contractions all join the same two vertices lives in one copy of
//! `x`. Terms joining more vertices are classified pair of vertices by pair
//! of vertices and flagged best-effort: each factor is tested on its own
//! relative variable and the verdicts are combined, which is what iterated
//! tensor and product rules give when the groups never share a variable.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{factor_locations, ContractionPattern, FieldMonomial, Pairing, Species, WickError};
use crate::expr::{feynman_position_massless, local_degree, DistExpr, TestFnDescriptor};
use crate::poly::{SlotName, Var};
use crate::rules::{wf_bound, ExistenceKind, WfFailure};
use crate::scalar::{int, Rational};
use crate::slf::{kinematic_position, PropagatorSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingChoice {
    /// Kinematic time ordering, no delta terms.
    Kinematic,
    /// Kinematic plus admissible shifts at the origin.
    Shifted,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagatorEntry {
    pub expr: DistExpr,
    /// Scaling degree at `x = 0`, shared by the massless and massive cases.
    pub degree: i64,
    pub description: String,
}

/// Propagators keyed by an unordered species pair and an ordering choice.
#[derive(Clone, Debug, Default)]
pub struct PropagatorTable {
    pub ordering: Option<OrderingChoice>,
    entries: BTreeMap<(Species, Species, OrderingChoice), PropagatorEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub species: (String, String),
    pub ordering: OrderingChoice,
    pub degree: i64,
    pub description: String,
}

fn key(a: &Species, b: &Species, o: OrderingChoice) -> (Species, Species, OrderingChoice) {
    if a <= b {
        (a.clone(), b.clone(), o)
    } else {
        (b.clone(), a.clone(), o)
    }
}

fn to_int(q: &Rational) -> Option<i64> {
    q.is_integer().then(|| q.to_integer().try_into().ok()).flatten()
}

/// `∂_0 ∂_1 ∂_2 ∂_3 ∂_0 …`, `n` derivatives in `x`.
fn cycling_derivs(n: u32) -> Vec<Var> {
    (0..n).map(|i| Var::new(SlotName::X, (i % 4) as u8)).collect()
}

pub fn scalar_propagator(mass: &Rational) -> Result<DistExpr, WickError> {
    if mass.is_zero() {
        Ok(feynman_position_massless())
    } else {
        Ok(DistExpr::fourier_pair(DistExpr::feynman_kernel(mass.clone()), SlotName::P)?)
    }
}

impl PropagatorTable {
    pub fn new(ordering: OrderingChoice) -> Self {
        PropagatorTable { ordering: Some(ordering), entries: BTreeMap::new() }
    }

    fn choice(&self) -> OrderingChoice {
        self.ordering.unwrap_or(OrderingChoice::Kinematic)
    }

    pub fn insert(&mut self, a: &Species, b: &Species, entry: PropagatorEntry) {
        let k = key(a, b, self.choice());
        self.entries.insert(k, entry);
    }

    pub fn get(&self, a: &Species, b: &Species) -> Option<&PropagatorEntry> {
        self.entries.get(&key(a, b, self.choice()))
    }

    /// The entries in key order, for reports.
    pub fn rows(&self) -> Vec<TableRow> {
        self.entries
            .iter()
            .map(|((a, b, o), e)| TableRow {
                species: (a.to_string(), b.to_string()),
                ordering: *o,
                degree: e.degree,
                description: e.description.clone(),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Kinematic diagonal entries for every species of the product, all
    /// potentials smeared with the same test function. Field strengths and
    /// potentials are never paired with each other.
    pub fn default_for(monomials: &[FieldMonomial], smear: &TestFnDescriptor) -> Result<Self, WickError> {
        let mut t = PropagatorTable::new(OrderingChoice::Kinematic);
        let species: std::collections::BTreeSet<&Species> = monomials.iter().flat_map(|m| m.factors.iter().map(|f| &f.species)).collect();
        for s in species {
            let entry = default_entry(s, smear)?;
            t.insert(s, s, entry);
        }
        Ok(t)
    }
}

impl Pairing for PropagatorTable {
    fn pairs(&self, a: &Species, b: &Species) -> bool {
        self.get(a, b).is_some()
    }
}

fn default_entry(s: &Species, smear: &TestFnDescriptor) -> Result<PropagatorEntry, WickError> {
    let massless_degree = |e: &DistExpr| -> Result<i64, WickError> {
        local_degree(e, SlotName::X)
            .as_ref()
            .and_then(to_int)
            .ok_or_else(|| WickError::Unsupported(format!("no scaling degree for the {s} propagator")))
    };
    match s {
        Species::Scalar { mass } => Ok(PropagatorEntry {
            expr: scalar_propagator(mass)?,
            degree: massless_degree(&feynman_position_massless())?,
            description: format!("Feynman propagator of mass {mass}"),
        }),
        Species::Potential { spin, mass } => {
            let spec = |m: Rational| PropagatorSpec { smear: smear.clone(), ..PropagatorSpec::new(*spin, m) };
            let expr = kinematic_position(&spec(mass.clone()))?;
            let degree = if mass.is_zero() { massless_degree(&expr)? } else { massless_degree(&kinematic_position(&spec(int(0)))?)? };
            Ok(PropagatorEntry { expr, degree, description: format!("smeared kinematic string propagator, spin {spin}, mass {mass}") })
        }
        Species::FieldStrength { spin, mass } => {
            let vars = cycling_derivs(2 * spin);
            let expr = DistExpr::derivative(vars.clone(), scalar_propagator(mass)?)?;
            let degree = massless_degree(&DistExpr::derivative(vars, feynman_position_massless())?)?;
            Ok(PropagatorEntry { expr, degree, description: format!("{} derivatives of the Feynman propagator of mass {mass}", 2 * spin) })
        }
    }
}

/// The contractions of one pair of vertices in their relative variable.
#[derive(Clone, Debug, Serialize)]
pub struct VertexPairTerm {
    pub points: (String, String),
    pub pairs: Vec<(usize, usize)>,
    pub expr: DistExpr,
    /// Sum of the table degrees less the derivative count.
    pub degree: i64,
}

/// Groups the contractions by the vertices they join, in pattern order.
pub fn vertex_pair_terms(
    monomials: &[FieldMonomial],
    pattern: &ContractionPattern,
    table: &PropagatorTable,
) -> Result<Vec<VertexPairTerm>, WickError> {
    let loc = factor_locations(monomials);
    let mut groups: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for &(a, b) in &pattern.pairs {
        let (&la, &lb) = (loc.get(a).ok_or(WickError::BadIndex(a))?, loc.get(b).ok_or(WickError::BadIndex(b))?);
        if la.0 == lb.0 {
            return Err(WickError::Unsupported(format!("factors {a} and {b} sit at the same point")));
        }
        // orient each pair from the earlier vertex to the later one
        let (a, b, la, lb) = if la.0 < lb.0 { (a, b, la, lb) } else { (b, a, lb, la) };
        groups.entry((la.0, lb.0)).or_default().push((a, b));
    }
    let mut out = Vec::new();
    for ((va, vb), pairs) in groups {
        let mut factors = Vec::new();
        let mut degree = 0;
        for &(a, b) in &pairs {
            let (fa, fb) = (&monomials[loc[a].0].factors[loc[a].1], &monomials[loc[b].0].factors[loc[b].1]);
            let entry = table.get(&fa.species, &fb.species).ok_or_else(|| WickError::MissingPropagator(fa.species.clone(), fb.species.clone()))?;
            // x = x_a − x_b: derivatives at the second point flip sign
            let vars: Vec<Var> = fa.derivs.iter().chain(&fb.derivs).map(|c| Var::new(SlotName::X, *c)).collect();
            degree += entry.degree - vars.len() as i64;
            let mut e = entry.expr.clone();
            if !vars.is_empty() {
                e = DistExpr::derivative(vars, e)?;
            }
            if fb.derivs.len() % 2 == 1 {
                e = DistExpr::scale(int(-1), None, e)?;
            }
            factors.push(e);
        }
        let expr = if factors.len() == 1 { factors.pop().unwrap() } else { DistExpr::product(factors)? };
        out.push(VertexPairTerm { points: (monomials[va].point.clone(), monomials[vb].point.clone()), pairs, expr, degree });
    }
    Ok(out)
}

/// The propagator product of a pattern joining exactly two vertices.
pub fn term_expr(monomials: &[FieldMonomial], pattern: &ContractionPattern, table: &PropagatorTable) -> Result<DistExpr, WickError> {
    let mut groups = vertex_pair_terms(monomials, pattern, table)?;
    match groups.len() {
        0 => Err(WickError::Unsupported("the pattern has no contractions, hence no propagator".into())),
        1 => Ok(groups.pop().unwrap().expr),
        n => Err(WickError::Unsupported(format!("the pattern joins {n} pairs of vertices; use classify_pattern"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Existence {
    Everywhere,
    OffThinDiagonal,
    /// The product fails even away from coinciding points.
    Undefined,
    IllDefinedIr,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermClassification {
    pub existence: Existence,
    /// Power-counting degree at coinciding points.
    pub degree: Option<i64>,
    /// Highest delta derivative order of the extension, `−d − 4`, when an
    /// extension is needed and the order is nonnegative.
    pub freedom_bound: Option<u32>,
    pub detail: String,
    pub best_effort: bool,
}

fn freedom(existence: Existence, degree: Option<i64>) -> Option<u32> {
    match (existence, degree) {
        (Existence::OffThinDiagonal, Some(d)) if -d - 4 >= 0 => Some((-d - 4) as u32),
        _ => None,
    }
}

fn infrared(f: &WfFailure) -> bool {
    matches!(f, WfFailure::Existence { kind: ExistenceKind::Infrared, .. })
}

fn existence_of(expr: &DistExpr) -> Result<(Existence, String), WickError> {
    let full = wf_bound(expr).result;
    let first = match full {
        Ok(_) => return Ok((Existence::Everywhere, "the rules give a bound on all of x".into())),
        Err(f) if infrared(&f) => return Ok((Existence::IllDefinedIr, f.to_string())),
        Err(f) => f,
    };
    let off = DistExpr::off_origin(&[SlotName::X], expr.clone())?;
    Ok(match wf_bound(&off).result {
        Ok(_) => (Existence::OffThinDiagonal, format!("exists for x != 0; at x = 0: {first}")),
        Err(f) if infrared(&f) => (Existence::IllDefinedIr, f.to_string()),
        Err(f) => (Existence::Undefined, f.to_string()),
    })
}

/// Classification from the expression alone; the degree comes from the
/// homogeneity metadata and is absent for massive propagators.
pub fn classify_term(expr: &DistExpr) -> Result<TermClassification, WickError> {
    let (existence, detail) = existence_of(expr)?;
    let degree = local_degree(expr, SlotName::X).as_ref().and_then(to_int);
    Ok(TermClassification { existence, degree, freedom_bound: freedom(existence, degree), detail, best_effort: false })
}

fn classify_group(g: &VertexPairTerm) -> Result<TermClassification, WickError> {
    let mut c = classify_term(&g.expr)?;
    match c.degree {
        Some(d) if d != g.degree => {
            return Err(WickError::Unsupported(format!(
                "degree {d} from the expression disagrees with {} from the propagators",
                g.degree
            )))
        }
        _ => c.degree = Some(g.degree),
    }
    c.freedom_bound = freedom(c.existence, c.degree);
    Ok(c)
}

/// Classification of a whole pattern. With several vertex pairs the worst
/// existence wins, degrees add, and the result is flagged best-effort.
pub fn classify_pattern(
    monomials: &[FieldMonomial],
    pattern: &ContractionPattern,
    table: &PropagatorTable,
) -> Result<TermClassification, WickError> {
    let groups = vertex_pair_terms(monomials, pattern, table)?;
    if groups.is_empty() {
        return Ok(TermClassification {
            existence: Existence::Everywhere,
            degree: Some(0),
            freedom_bound: None,
            detail: "no contractions".into(),
            best_effort: false,
        });
    }
    let parts = groups.iter().map(classify_group).collect::<Result<Vec<_>, _>>()?;
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().unwrap());
    }
    let existence = parts.iter().map(|c| c.existence).max().unwrap();
    let degree = parts.iter().map(|c| c.degree).sum::<Option<i64>>();
    let detail = groups
        .iter()
        .zip(&parts)
        .map(|(g, c)| format!("{}-{}: {:?}", g.points.0, g.points.1, c.existence))
        .collect::<Vec<_>>()
        .join("; ");
    // the overall degree counts every propagator, but each vertex pair is
    // extended on its own
    let freedom_bound = parts.iter().filter_map(|c| c.freedom_bound).max();
    Ok(TermClassification { existence, degree, freedom_bound, detail, best_effort: true })
}

#[cfg(test)]
mod tests;
