//! Pointwise checks: scaling degrees, the divergence identity behind
//! differential renormalization, and the Fourier form of string
//! integration.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::decay::fit_slope;
use super::quad::{graded_breaks, Rule};

fn msq(x: &[f64; 4]) -> f64 {
    x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3]
}

/// Massless Feynman propagator off the lightcone, `−1/(4π² x²)`.
pub fn feynman_massless(x: &[f64; 4]) -> Complex64 {
    Complex64::new(-1.0 / (4.0 * PI * PI * msq(x)), 0.0)
}

/// `K₁(z) = ∫₀^∞ e^{−z cosh t} cosh t dt`.
pub fn bessel_k1(z: f64) -> f64 {
    assert!(z > 0.0);
    // the integrand is below e^{-z cosh t} < 1e-300 past this point
    let t_max = (700.0 / z).acosh().max(1.0);
    let rule = Rule::composite(&graded_breaks(0.0, t_max, 0.25, &[], 1.0), 16);
    rule.integrate(|t| (-z * t.cosh()).exp() * t.cosh())
}

/// Massive Feynman propagator at spacelike `x`: `m K₁(m r) / (4π² r)` with
/// `r = √(−x²)`. Timelike and lightlike points are outside its domain here.
pub fn feynman_massive_spacelike(m: f64, x: &[f64; 4]) -> Option<Complex64> {
    let s = msq(x);
    if s >= 0.0 {
        return None;
    }
    let r = (-s).sqrt();
    Some(Complex64::new(m * bessel_k1(m * r) / (4.0 * PI * PI * r), 0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub degree: f64,
    pub max_rel_error: f64,
    pub checked: usize,
    /// Samples skipped as singular, with the reason.
    pub skipped: Vec<String>,
}

/// `max |u(tx) − t^d u(x)| / |t^d u(x)|` over samples and scales.
pub fn homogeneity_check(
    u: &dyn Fn(&[f64; 4]) -> Option<Complex64>,
    degree: f64,
    samples: &[[f64; 4]],
    scales: &[f64],
) -> HomogeneityReport {
    let mut rep = HomogeneityReport { degree, max_rel_error: 0.0, checked: 0, skipped: Vec::new() };
    for x in samples {
        let Some(base) = u(x).filter(|v| v.norm().is_finite() && v.norm() > 0.0) else {
            rep.skipped.push(format!("{x:?}: no finite nonzero value"));
            continue;
        };
        for t in scales {
            let tx = x.map(|c| c * t);
            let Some(v) = u(&tx).filter(|v| v.norm().is_finite()) else {
                rep.skipped.push(format!("{x:?} at scale {t}: no finite value"));
                continue;
            };
            let want = base * t.powf(degree);
            rep.max_rel_error = rep.max_rel_error.max((v - want).norm() / want.norm());
            rep.checked += 1;
        }
    }
    rep
}

/// Forward-mode dual numbers over `ℂ`: exact first derivatives of closed
/// forms built from the operations below.
#[derive(Clone, Copy, Debug)]
struct Dual {
    v: Complex64,
    d: Complex64,
}

impl Dual {
    fn constant(v: Complex64) -> Self {
        Dual { v, d: Complex64::new(0.0, 0.0) }
    }
    fn var(v: f64) -> Self {
        Dual { v: Complex64::new(v, 0.0), d: Complex64::new(1.0, 0.0) }
    }
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
    fn div(self, o: Dual) -> Dual {
        Dual { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
    fn ln(self) -> Dual {
        Dual { v: self.v.ln(), d: self.d / self.v }
    }
}

/// `x² − i0` as the limit of `x² − iε`: off the cone the imaginary part only
/// picks the branch of the logarithm, `ln(x² − i0) = ln|x²| − iπ` for
/// spacelike `x`.
fn sq_minus_i0(x: &[Dual; 4]) -> Dual {
    let s = x[0].mul(x[0]).sub(x[1].mul(x[1])).sub(x[2].mul(x[2])).sub(x[3].mul(x[3]));
    Dual { v: Complex64::new(s.v.re, -0.0), d: s.d }
}

/// `v^μ = x^μ ln(x² − i0) / (2 (x² − i0)²)` with `x^μ` seeded in direction `k`.
fn v_component(x: &[f64; 4], mu: usize, k: usize) -> Dual {
    let xs: [Dual; 4] = std::array::from_fn(|i| if i == k { Dual::var(x[i]) } else { Dual::constant(Complex64::new(x[i], 0.0)) });
    let s = sq_minus_i0(&xs);
    let two = Dual::constant(Complex64::new(2.0, 0.0));
    xs[mu].mul(s.ln()).div(two.mul(s).mul(s))
}

/// `∂_μ v^μ` at `x`.
pub fn divergence_v(x: &[f64; 4]) -> Complex64 {
    (0..4).map(|mu| v_component(x, mu, mu).d).sum()
}

/// `ln(x² − iε)` on the principal branch, to compare with the `−i0` limit.
pub fn log_sq_eps(x: &[f64; 4], eps: f64) -> Complex64 {
    Complex64::new(msq(x), -eps).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceSample {
    pub x: [String; 4],
    pub x_sq: String,
    pub divergence: [f64; 2],
    pub d_squared: [f64; 2],
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub omega: f64,
    /// Slope of `log |λ^{4+ω} w(λx)|` against `log λ` as `λ ↓ 0`.
    pub slope: f64,
    pub band: f64,
    pub first: f64,
    pub last: f64,
    /// Positive slope and decreasing values: the product tends to zero.
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffRenReport {
    pub samples: Vec<DivergenceSample>,
    pub skipped: Vec<String>,
    pub max_rel_error: f64,
    /// `ln(x² − iε)` at the spacelike samples approaches `ln|x²| − iπ`.
    pub branch_error: f64,
    pub scaling: Vec<ScalingFit>,
}

/// `w(x) = ln(x² − i0) / (x² − i0)²`, the logarithmic part of `∂_μ v^μ`
/// before cancellation; it scales like `λ^{-4} ln λ²`.
fn log_part(x: &[f64; 4]) -> Complex64 {
    let s = Complex64::new(msq(x), -0.0);
    s.ln() / (s * s)
}

pub fn scaling_fit(x: &[f64; 4], omega: f64) -> ScalingFit {
    let lambdas: Vec<f64> = (0..16).map(|j| 10f64.powf(-2.0 - 0.5 * j as f64)).collect();
    let vals: Vec<f64> = lambdas.iter().map(|l| l.powf(4.0 + omega) * log_part(&x.map(|c| c * l)).norm()).collect();
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let (slope, band) = fit_slope(&xs, &ys);
    let (first, last) = (vals[0], *vals.last().expect("scales"));
    ScalingFit { omega, slope, band, first, last, vanishes: slope > 0.0 && last < first }
}

/// Checks `∂_μ v^μ = D²` with `D = 1/(x² − i0)` at the rational samples, the
/// branch of the logarithm at spacelike samples, and the scaling limit for
/// each `ω`.
pub fn diffren_check(samples: &[[crate::scalar::Rational; 4]], omegas: &[f64]) -> DiffRenReport {
    use crate::scalar::Scalar;
    let mut rep = DiffRenReport { samples: Vec::new(), skipped: Vec::new(), max_rel_error: 0.0, branch_error: 0.0, scaling: Vec::new() };
    for q in samples {
        let sq = &q[0] * &q[0] - &q[1] * &q[1] - &q[2] * &q[2] - &q[3] * &q[3];
        let strs: [String; 4] = std::array::from_fn(|i| q[i].to_string());
        if num_traits::Zero::is_zero(&sq) {
            rep.skipped.push(format!("({}) lies on the lightcone", strs.join(", ")));
            continue;
        }
        let x = q.clone().map(|c| c.to_f64());
        let div = divergence_v(&x);
        let s = sq.to_f64();
        let d2 = Complex64::new(1.0 / (s * s), 0.0);
        let rel = (div - d2).norm() / d2.norm();
        rep.max_rel_error = rep.max_rel_error.max(rel);
        if s < 0.0 {
            let limit = Complex64::new(s.abs().ln(), -PI);
            rep.branch_error = rep.branch_error.max((log_sq_eps(&x, 1e-12) - limit).norm());
        }
        rep.samples.push(DivergenceSample { x: strs, x_sq: sq.to_string(), divergence: [div.re, div.im], d_squared: [d2.re, d2.im], rel_error: rel });
    }
    if let Some(x) = rep.samples.first().map(|s| s.x.clone().map(|c| c.parse::<crate::scalar::Rational>().map(|q| q.to_f64()).unwrap_or(0.0))) {
        rep.scaling = omegas.iter().map(|w| scaling_fit(&x, *w)).collect();
    }
    rep
}

/// Twenty off-cone rational points: ten timelike, ten spacelike.
pub fn default_diffren_samples() -> Vec<[crate::scalar::Rational; 4]> {
    use crate::scalar::{int, rat};
    let mut out = vec![[int(2), int(1), int(1), int(1)], [int(0), int(1), int(0), int(0)]];
    for k in 1..=9i64 {
        out.push([rat(3 * k + 1, 2), rat(k, 3), rat(-1, 2), rat(k % 4, 5)]);
        out.push([rat(k, 7), rat(2 * k + 1, 3), rat(1, k + 1), rat(-k, 4)]);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StringFtReport {
    pub eps: f64,
    pub points: usize,
    /// `sup |direct − closed form|` over the grid.
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
}

/// `f̂(p) = ∫ e^{i(px)} f(x) d⁴x` of `f(x) = e^{−|x|²/2}` (Euclidean norm):
/// `(2π)² e^{−|p|²/2}` since `(px)` only flips signs of components.
pub fn gaussian_ft(p: &[f64; 4]) -> Complex64 {
    Complex64::new(4.0 * PI * PI * (-0.5 * p.iter().map(|c| c * c).sum::<f64>()).exp(), 0.0)
}

/// `(I_e^ε f)^(p)` for `f = amp · gaussian`, computed as
/// `∫₀^S e^{−εs} [∫ e^{i(px)} f(x + se) d⁴x] ds`: the inner transform by
/// Gauss–Legendre in each coordinate around the shifted center, the outer
/// integral on panels resolving `e^{−is(pe)}`, cut where `e^{−εS}` is
/// negligible.
pub fn string_ft_direct(e: &[f64; 4], p: &[f64; 4], eps: f64, amp: f64) -> Complex64 {
    let inner_rule = Rule::composite(&graded_breaks(-9.0, 9.0, 3.0, &[], 1.0), 12);
    let signs = [1.0, -1.0, -1.0, -1.0];
    let factor = |mu: usize, s: f64| -> Complex64 {
        // substitute x = y − s e: the Gaussian is centered on the nodes
        let k = signs[mu] * p[mu];
        inner_rule
            .nodes
            .iter()
            .zip(&inner_rule.weights)
            .map(|(y, w)| Complex64::from_polar(w * (-0.5 * y * y).exp(), k * (y - s * e[mu])))
            .sum()
    };
    // coordinates the string does not move are the same for every s
    let fixed: Complex64 = (0..4).filter(|mu| e[*mu] == 0.0).map(|mu| factor(mu, 0.0)).product();
    let moving: Vec<usize> = (0..4).filter(|mu| e[*mu] != 0.0).collect();
    let inner = |s: f64| -> Complex64 { moving.iter().map(|mu| factor(*mu, s)).product::<Complex64>() * fixed * amp };
    let pe = p[0] * e[0] - p[1] * e[1] - p[2] * e[2] - p[3] * e[3];
    let s_max = 40.0 / eps;
    let width = if pe.abs() > 0.0 { (2.0 * PI / pe.abs()).min(s_max / 64.0) } else { s_max / 64.0 };
    let outer = Rule::composite(&graded_breaks(0.0, s_max, width, &[], 1.0), 12);
    outer.nodes.iter().zip(&outer.weights).map(|(s, w)| inner(*s) * (w * (-eps * s).exp())).sum()
}

/// `−i f̂(p) / ((pe) − iε)`.
pub fn string_ft_closed(e: &[f64; 4], p: &[f64; 4], eps: f64, amp: f64) -> Complex64 {
    let pe = p[0] * e[0] - p[1] * e[1] - p[2] * e[2] - p[3] * e[3];
    Complex64::new(0.0, -1.0) * gaussian_ft(p) * amp / Complex64::new(pe, -eps)
}

pub fn string_ft_identity_check(e: &[f64; 4], amp: f64, grid: &[[f64; 4]], eps: f64) -> StringFtReport {
    let mut rep = StringFtReport { eps, points: grid.len(), max_abs_deviation: 0.0, max_rel_deviation: 0.0 };
    for p in grid {
        let (a, b) = (string_ft_direct(e, p, eps, amp), string_ft_closed(e, p, eps, amp));
        let dev = (a - b).norm();
        rep.max_abs_deviation = rep.max_abs_deviation.max(dev);
        if b.norm() > 0.0 {
            rep.max_rel_deviation = rep.max_rel_deviation.max(dev / b.norm());
        }
    }
    rep
}

/// Sixteen momenta off the plane `(pe) = 0` for `e = (0, 1, 0, 0)`.
pub fn default_string_ft_grid() -> Vec<[f64; 4]> {
    let mut out = Vec::new();
    for a in [-1.0, -0.5, 0.5, 1.0] {
        for b in [0.25, 1.0] {
            for c in [-0.5, 0.5] {
                out.push([0.3 * b, a, c, 0.5 * b]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn bessel_k1_matches_reference_values() {
        // K₁(1) and K₁(2) from tables
        assert!((bessel_k1(1.0) - 0.601_907_230_197_234_6).abs() < 1e-13);
        assert!((bessel_k1(2.0) - 0.139_865_881_816_522_4).abs() < 1e-13);
    }

    #[test]
    fn massless_propagator_scales_with_degree_minus_two() {
        let u = |x: &[f64; 4]| Some(feynman_massless(x));
        let rep = homogeneity_check(&u, -2.0, &[[2.0, 1.0, 0.0, 0.0]], &[3.0]);
        assert_eq!(rep.checked, 1);
        assert!(rep.max_rel_error < 1e-10);
    }

    #[test]
    fn mass_breaks_scaling() {
        let u = |x: &[f64; 4]| feynman_massive_spacelike(1.0, x);
        let rep = homogeneity_check(&u, -2.0, &[[0.0, 1.0, 0.5, 0.0], [1.0, 0.0, 0.0, 0.0]], &[3.0]);
        assert_eq!(rep.skipped.len(), 1);
        assert!(rep.max_rel_error > 0.5, "{rep:?}");
        // small masses approach the massless propagator
        let x = [0.2, 1.0, 0.5, 0.0];
        let near = feynman_massive_spacelike(1e-4, &x).unwrap();
        assert!((near - feynman_massless(&x)).norm() < 1e-6 * near.norm());
    }

    #[test]
    fn divergence_of_v_is_d_squared() {
        let rep = diffren_check(&default_diffren_samples(), &[0.5, 1.0]);
        assert_eq!(rep.samples.len(), 20);
        assert!(rep.max_rel_error < 1e-8, "{}", rep.max_rel_error);
        assert_eq!(rep.samples[0].x_sq, "1");
        assert!((rep.samples[0].divergence[0] - 1.0).abs() < 1e-12);
        assert_eq!(rep.samples[1].x_sq, "-1");
        assert!((rep.samples[1].divergence[0] - 1.0).abs() < 1e-12);
        assert!(rep.branch_error < 1e-9);
        for fit in &rep.scaling {
            assert!(fit.vanishes && (fit.slope - fit.omega).abs() < 0.15, "{fit:?}");
        }
    }

    #[test]
    fn spacelike_logarithm_takes_the_lower_branch() {
        let x = [0.0, 1.0, 0.0, 0.0];
        let s = v_component(&x, 1, 0);
        // v¹ at x = (0,1,0,0): ln(−1 − i0) / 2 = −iπ/2
        assert!((s.v - Complex64::new(0.0, -PI / 2.0)).norm() < 1e-12);
        assert!((log_sq_eps(&x, 1e-9) - Complex64::new(0.0, -PI)).norm() < 1e-8);
    }

    #[test]
    fn lightcone_samples_are_skipped() {
        let rep = diffren_check(&[[int(1), int(1), int(0), int(0)]], &[]);
        assert_eq!(rep.skipped.len(), 1);
        assert!(rep.samples.is_empty());
    }

    #[test]
    fn string_integration_is_division_by_pe() {
        let e = [0.0, 1.0, 0.0, 0.0];
        let rep = string_ft_identity_check(&e, 1.0, &default_string_ft_grid()[..4], 1e-3);
        assert!(rep.max_abs_deviation < 1e-6, "{rep:?}");
        let zero = string_ft_identity_check(&e, 0.0, &default_string_ft_grid()[..2], 1e-3);
        assert_eq!(zero.max_abs_deviation, 0.0);
        // on the plane (pe) = 0 the two sides agree at fixed ε
        let on = string_ft_identity_check(&e, 1.0, &[[0.5, 0.0, 0.3, 0.0]], 1e-1);
        assert!(on.max_rel_deviation < 1e-8, "{on:?}");
    }
}
