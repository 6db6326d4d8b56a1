//! Causal disjointness of strings `x + ℝ₊e` and `x′ + ℝ₊e′`: the separation
//! `q(s, s′) = (x + se − x′ − s′e′)²` must be negative on the closed
//! quadrant `s, s′ ≥ 0`.
//!
//! `q` is a quadratic, so its supremum on the quadrant is either attained at
//! the corner, at a stationary point of an edge, at an interior stationary
//! point (only when `q` is concave), or approached along a ray. Every
//! candidate is rational and checked exactly.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::scalar::{int, Rational};

pub type Vec4 = [Rational; 4];

fn dot(a: &Vec4, b: &Vec4) -> Rational {
    &a[0] * &b[0] - &a[1] * &b[1] - &a[2] * &b[2] - &a[3] * &b[3]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityVerdict {
    pub disjoint: bool,
    /// Parameters `(s, s′)` with `q(s, s′) ≥ 0` when not disjoint.
    pub witness: Option<(String, String)>,
    pub reason: String,
}

/// Coefficients of `q(s, s′) = c + 2 b₁ s − 2 b₂ s′ + a₁₁ s² − 2 a₁₂ s s′ + a₂₂ s′²`.
struct Quad {
    c: Rational,
    b1: Rational,
    b2: Rational,
    a11: Rational,
    a12: Rational,
    a22: Rational,
}

impl Quad {
    fn eval(&self, s: &Rational, t: &Rational) -> Rational {
        let two = int(2);
        &self.c + &two * &self.b1 * s - &two * &self.b2 * t + &self.a11 * s * s - &two * &self.a12 * s * t
            + &self.a22 * t * t
    }

    /// Quadratic part along the direction `(a, 1 − a)`.
    fn radial(&self, a: &Rational) -> Rational {
        let b = int(1) - a;
        &self.a11 * a * a - int(2) * &self.a12 * a * &b + &self.a22 * &b * &b
    }

    fn linear(&self, a: &Rational) -> Rational {
        let b = int(1) - a;
        int(2) * (&self.b1 * a - &self.b2 * &b)
    }
}

fn fail(s: Rational, t: Rational, reason: &str) -> LocalityVerdict {
    LocalityVerdict { disjoint: false, witness: Some((s.to_string(), t.to_string())), reason: reason.into() }
}

pub fn is_spacelike(e: &Vec4) -> bool {
    dot(e, e).is_negative()
}

/// `None` when a string direction is not spacelike.
pub fn causally_disjoint(x: &Vec4, e: &Vec4, xp: &Vec4, ep: &Vec4) -> Option<LocalityVerdict> {
    if !is_spacelike(e) || !is_spacelike(ep) {
        return None;
    }
    let d: Vec4 = std::array::from_fn(|i| &x[i] - &xp[i]);
    let q = Quad { c: dot(&d, &d), b1: dot(&d, e), b2: dot(&d, ep), a11: dot(e, e), a12: dot(e, ep), a22: dot(ep, ep) };
    let zero = Rational::zero();
    if !q.c.is_negative() {
        return Some(fail(zero.clone(), zero, "string endpoints are not spacelike separated"));
    }
    // edges: concave in one variable since both directions are spacelike
    let s_star = -&q.b1 / &q.a11;
    if s_star.is_positive() && !q.eval(&s_star, &zero).is_negative() {
        return Some(fail(s_star, zero, "first string reaches the causal future or past of the second endpoint"));
    }
    let t_star = &q.b2 / &q.a22;
    if t_star.is_positive() && !q.eval(&zero, &t_star).is_negative() {
        return Some(fail(zero, t_star, "second string reaches the causal future or past of the first endpoint"));
    }
    // rays: the quadratic part on the simplex a + b = 1 is largest at a vertex
    // of a concave parabola or at an endpoint
    let curv = &q.a11 + int(2) * &q.a12 + &q.a22;
    let mut dirs = vec![int(0), int(1)];
    if curv.is_negative() {
        let a = (&q.a22 + &q.a12) / &curv;
        if a.is_positive() && a < int(1) {
            dirs.push(a);
        }
    }
    for a in &dirs {
        let r = q.radial(a);
        let l = q.linear(a);
        if r.is_positive() || (r.is_zero() && l.is_positive()) {
            let (da, db) = (a.clone(), int(1) - a);
            let mut t = int(1);
            while q.eval(&(&da * &t), &(&db * &t)).is_negative() {
                t *= int(2);
            }
            return Some(fail(&da * &t, &db * &t, "the strings become causally connected far out"));
        }
    }
    // interior maximum of a concave form
    let det = &q.a11 * &q.a22 - &q.a12 * &q.a12;
    if q.a11.is_negative() && det.is_positive() {
        // ∂_s: b1 + a11 s − a12 t = 0, ∂_t: −b2 − a12 s + a22 t = 0
        let s = (-&q.b1 * &q.a22 + &q.a12 * &q.b2) / &det;
        let t = (&q.a11 * &q.b2 - &q.a12 * &q.b1) / &det;
        if s.is_positive() && t.is_positive() && !q.eval(&s, &t).is_negative() {
            return Some(fail(s, t, "interior points of the strings are causally connected"));
        }
    }
    Some(LocalityVerdict { disjoint: true, witness: None, reason: "separation negative on the whole quadrant".into() })
}

/// Largest `q` over a grid `s, s′ ∈ {0, h, …, n h}`.
pub fn sampled_max(x: &Vec4, e: &Vec4, xp: &Vec4, ep: &Vec4, h: f64, n: usize) -> f64 {
    let f = |v: &Vec4| v.clone().map(|c| crate::scalar::Scalar::to_f64(&c));
    let (x, e, xp, ep) = (f(x), f(e), f(xp), f(ep));
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=n {
            let (s, t) = (i as f64 * h, j as f64 * h);
            let v: Vec<f64> = (0..4).map(|k| x[k] + s * e[k] - xp[k] - t * ep[k]).collect();
            best = best.max(v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3]);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(a: [i64; 4]) -> Vec4 {
        a.map(int)
    }

    fn q_at(x: &Vec4, e: &Vec4, xp: &Vec4, ep: &Vec4, s: &Rational, t: &Rational) -> Rational {
        let d: Vec4 = std::array::from_fn(|i| &x[i] + s * &e[i] - &xp[i] - t * &ep[i]);
        dot(&d, &d)
    }

    #[test]
    fn parallel_strings_side_by_side_are_disjoint() {
        let r = causally_disjoint(&v([0, 0, 0, 0]), &v([0, 1, 0, 0]), &v([0, 0, 3, 0]), &v([0, 1, 0, 0])).unwrap();
        assert!(r.disjoint, "{r:?}");
    }

    #[test]
    fn opposite_strings_into_each_other_are_not() {
        let (x, e, xp, ep) = (v([0, 0, 0, 0]), v([0, 1, 0, 0]), v([0, 2, 0, 0]), v([0, -1, 0, 0]));
        let r = causally_disjoint(&x, &e, &xp, &ep).unwrap();
        assert!(!r.disjoint);
        let (s, t) = r.witness.unwrap();
        assert!(!q_at(&x, &e, &xp, &ep, &s.parse().unwrap(), &t.parse().unwrap()).is_negative());
    }

    #[test]
    fn strings_drifting_into_the_timelike_region_are_caught_at_infinity() {
        let (x, e, xp, ep) = (v([0, 0, 0, 0]), v([1, 2, 0, 0]), v([0, 0, 1, 0]), v([-1, 2, 0, 0]));
        let r = causally_disjoint(&x, &e, &xp, &ep).unwrap();
        assert!(!r.disjoint);
        assert!(causally_disjoint(&x, &v([1, 0, 0, 0]), &xp, &ep).is_none());
    }

    #[test]
    fn agrees_with_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut r4 = |lo: i64, hi: i64| -> Vec4 { std::array::from_fn(|_| rat(rng.gen_range(lo..hi), 2)) };
        let (mut disjoint, mut connected) = (0, 0);
        for _ in 0..400 {
            let (x, xp) = (r4(-6, 7), r4(-6, 7));
            let (e, ep) = (r4(-4, 5), r4(-4, 5));
            let Some(r) = causally_disjoint(&x, &e, &xp, &ep) else { continue };
            if r.disjoint {
                disjoint += 1;
                assert!(sampled_max(&x, &e, &xp, &ep, 0.05, 200) < 0.0, "{x:?} {e:?} {xp:?} {ep:?}");
            } else {
                connected += 1;
                let (s, t) = r.witness.unwrap();
                assert!(!q_at(&x, &e, &xp, &ep, &s.parse().unwrap(), &t.parse().unwrap()).is_negative());
            }
        }
        assert!(disjoint > 10 && connected > 10, "{disjoint} {connected}");
    }
}
