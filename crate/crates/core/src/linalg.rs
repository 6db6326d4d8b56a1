//! Dense Gaussian elimination over any [`Scalar`]; exact on rationals.

use crate::scalar::Scalar;

/// Reduced row echelon form with the pivot column of every nonzero row.
pub fn rref<S: Scalar>(m: &[Vec<S>]) -> (Vec<Vec<S>>, Vec<usize>) {
    let mut a: Vec<Vec<S>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // partial pivoting matters for floats and is harmless for rationals
        let best = (r..rows)
            .filter(|&i| !a[i][c].approx_zero())
            .max_by(|&i, &j| a[i][c].to_f64().abs().partial_cmp(&a[j][c].to_f64().abs()).unwrap());
        let Some(p) = best else { continue };
        a.swap(r, p);
        let inv = S::one() / a[r][c].clone();
        for v in a[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].approx_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let t = a[r][k].clone() * f.clone();
                    a[i][k] = a[i][k].clone() - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r.max(0));
    (a, pivots)
}

pub fn rank<S: Scalar>(m: &[Vec<S>]) -> usize {
    rref(m).1.len()
}

/// Basis of `{v : m v = 0}`; `cols` fixes the width when `m` has no rows.
pub fn nullspace<S: Scalar>(m: &[Vec<S>], cols: usize) -> Vec<Vec<S>> {
    let (r, pivots) = rref(m);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![S::zero(); cols];
        v[free] = S::one();
        for (row, &pc) in r.iter().zip(pivots.iter()) {
            v[pc] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solution<S> {
    Unique(Vec<S>),
    Inconsistent,
    /// Consistent with a nontrivial solution space; one particular solution.
    Underdetermined(Vec<S>),
}

/// Solves `a x = b` where `a` is given column by column.
pub fn solve_columns<S: Scalar>(columns: &[Vec<S>], b: &[S]) -> Solution<S> {
    let n = columns.len();
    let rows = b.len();
    let aug: Vec<Vec<S>> = (0..rows)
        .map(|i| {
            let mut row: Vec<S> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.contains(&n) {
        return Solution::Inconsistent;
    }
    let mut x = vec![S::zero(); n];
    for (row, &pc) in r.iter().zip(pivots.iter()) {
        x[pc] = row[n].clone();
    }
    if pivots.len() == n {
        Solution::Unique(x)
    } else {
        Solution::Underdetermined(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&a), 2);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        for row in &a {
            let dot: Rational = row.iter().zip(&ns[0]).map(|(x, y)| x * y).sum();
            assert_eq!(dot, int(0));
        }
    }

    #[test]
    fn solve_unique_and_inconsistent() {
        let cols = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        assert_eq!(solve_columns(&cols, &[int(3), int(1)]), Solution::Unique(vec![int(2), int(1)]));
        let dep = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert_eq!(solve_columns(&dep, &[int(1), int(0)]), Solution::Inconsistent);
        assert!(matches!(solve_columns(&dep, &[int(3), int(3)]), Solution::Underdetermined(_)));
    }

    #[test]
    fn float_elimination_agrees() {
        let cols = vec![vec![1.0f64, 1.0], vec![1.0, -1.0]];
        match solve_columns(&cols, &[3.0, 1.0]) {
            Solution::Unique(x) => assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
