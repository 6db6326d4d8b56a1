//! `q_{c,±}(p) = (±i)^s ∫ c(e) (ef)^s [(pe) ± i0]^{-s} de` by quadrature.
//!
//! Write `e = e_c + y₁ n + y_⊥` with `n = ηp/|ηp|`, so `(pe) = a + b y₁`
//! depends on `y₁` only. The transverse integral `G(y₁)` is smooth; it is a
//! radial integral times an exact sphere average of a polynomial. The
//! boundary value sits in the remaining one-dimensional integral, which is
//! regularized by `ε` on a mesh graded toward the zero of `a + b y₁`.

use num_complex::Complex64;
use serde::Serialize;

use super::quad::{gauss_legendre, graded_breaks, Rule};
use super::richardson::{extrapolate, EpsSchedule};
use crate::expr::{BumpProfile, TestFnDescriptor};
use crate::scalar::Scalar;

fn mdot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

fn edot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn profile(c: &TestFnDescriptor, rho: f64) -> f64 {
    if rho >= 1.0 {
        return 0.0;
    }
    match c.profile {
        BumpProfile::Smooth => (-1.0 / (1.0 - rho * rho)).exp(),
        BumpProfile::Polynomial { power } => (1.0 - rho * rho).powi(power as i32),
    }
}

/// `∫ c` over the 4-ball: `2π² R⁴ ∫₀¹ profile(ρ) ρ³ dρ`.
fn mass(c: &TestFnDescriptor) -> f64 {
    let r = c.radius.to_f64();
    let rule = Rule::composite(&graded_breaks(0.0, 1.0, 0.125, &[], 1.0), 16);
    2.0 * std::f64::consts::PI.powi(2) * r.powi(4) * rule.integrate(|x| profile(c, x) * x.powi(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QValue {
    pub re: f64,
    pub im: f64,
    /// Extrapolation error in `ε`.
    pub eps_error: f64,
    /// Change against the run at half the mesh width.
    pub quad_error: f64,
}

impl QValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn error(&self) -> f64 {
        self.eps_error + self.quad_error
    }
}

struct Setup<'a> {
    c: &'a TestFnDescriptor,
    s: u32,
    center: [f64; 4],
    radius: f64,
    n: [f64; 4],
    b: f64,
    a: f64,
    f: [f64; 4],
    /// `ηf` projected onto `n^⊥`, its Euclidean length.
    h: f64,
    norm: f64,
}

impl<'a> Setup<'a> {
    fn new(c: &'a TestFnDescriptor, s: u32, f: &[f64; 4], p: &[f64; 4]) -> Result<Self, String> {
        c.validate().map_err(|e| e.to_string())?;
        if s == 0 {
            return Err("string power must be at least 1".into());
        }
        let eta_p = [p[0], -p[1], -p[2], -p[3]];
        let b = edot(&eta_p, &eta_p).sqrt();
        if b == 0.0 {
            return Err("p = 0 carries the whole fiber; there is no pointwise value".into());
        }
        let n = eta_p.map(|x| x / b);
        let center = c.center_f64();
        let eta_f = [f[0], -f[1], -f[2], -f[3]];
        let along = edot(&eta_f, &n);
        let perp: Vec<f64> = (0..4).map(|i| eta_f[i] - along * n[i]).collect();
        let h = perp.iter().map(|x| x * x).sum::<f64>().sqrt();
        let norm = if c.normalized { mass(c) } else { 1.0 };
        Ok(Setup { c, s, radius: c.radius.to_f64(), a: mdot(p, &center), center, n, b, f: *f, h, norm })
    }

    /// `G(y₁) = ∫ c (ef)^s dy_⊥` with the sphere average done exactly.
    fn transverse(&self, y1: f64, power: u32, radial: &Rule, sphere: &(Vec<f64>, Vec<f64>)) -> f64 {
        let r = self.radius;
        let rho_max = (r * r - y1 * y1).max(0.0).sqrt();
        if rho_max == 0.0 {
            return 0.0;
        }
        let base: [f64; 4] = std::array::from_fn(|i| self.center[i] + y1 * self.n[i]);
        let a = mdot(&base, &self.f);
        let mut acc = 0.0;
        for (x, w) in radial.nodes.iter().zip(&radial.weights) {
            let rho = rho_max * x;
            let c = profile(self.c, (y1 * y1 + rho * rho).sqrt() / r);
            if c == 0.0 {
                continue;
            }
            let avg: f64 = sphere.0.iter().zip(&sphere.1).map(|(t, u)| u * (a + rho * self.h * t).powi(power as i32)).sum();
            acc += w * rho_max * rho * rho * c * avg;
        }
        2.0 * std::f64::consts::PI * acc / self.norm
    }

    fn root(&self) -> f64 {
        -self.a / self.b
    }
}

fn radial_rule(refine: usize) -> Rule {
    Rule::composite(&graded_breaks(0.0, 1.0, 0.25 / refine as f64, &[], 1.0), 16)
}

fn phase(plus: bool, s: u32) -> Complex64 {
    let i = Complex64::new(0.0, if plus { 1.0 } else { -1.0 });
    i.powu(s)
}

fn q_at_resolution(set: &Setup, plus: bool, eps: &[f64], refine: usize) -> Vec<Complex64> {
    let r = set.radius;
    let sphere = gauss_legendre(set.s as usize / 2 + 1);
    let radial = radial_rule(refine);
    let h_min = eps.last().copied().unwrap_or(1e-6) / (8.0 * set.b);
    let rule = Rule::composite(&graded_breaks(-r, r, r / (8.0 * refine as f64), &[set.root()], h_min), 16);
    let g: Vec<f64> = rule.nodes.iter().map(|y| set.transverse(*y, set.s, &radial, &sphere)).collect();
    let ph = phase(plus, set.s);
    eps.iter()
        .map(|e| {
            let shift = if plus { *e } else { -*e };
            let sum: Complex64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&g)
                .map(|((y, w), g)| Complex64::new(set.a + set.b * y, shift).powu(set.s).inv() * (w * g))
                .sum();
            ph * sum
        })
        .collect()
}

/// Defaults for the schedule: `ε₀` a tenth of the spread of `(pe)` over the
/// support.
pub fn default_schedule(c: &TestFnDescriptor, p: &[f64; 4]) -> EpsSchedule {
    let b = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt();
    EpsSchedule::new(0.1 * b * c.radius.to_f64(), 6)
}

pub fn smeared_q_eval(
    c: &TestFnDescriptor,
    plus: bool,
    s: u32,
    f: &[f64; 4],
    p: &[f64; 4],
    schedule: &EpsSchedule,
) -> Result<QValue, String> {
    let set = Setup::new(c, s, f, p)?;
    let eps = schedule.values();
    let coarse = extrapolate(&q_at_resolution(&set, plus, &eps, 1));
    let fine = extrapolate(&q_at_resolution(&set, plus, &eps, 2));
    Ok(QValue { re: fine.re, im: fine.im, eps_error: fine.error, quad_error: (fine.value() - coarse.value()).norm() })
}

/// `s = 1` through `1/(x ± i0) = PV(1/x) ∓ iπ δ(x)`: a subtracted principal
/// value plus the residue term, no regularization involved.
pub fn smeared_q_contour(c: &TestFnDescriptor, plus: bool, f: &[f64; 4], p: &[f64; 4]) -> Result<Complex64, String> {
    let set = Setup::new(c, 1, f, p)?;
    let r = set.radius;
    let sphere = gauss_legendre(1);
    let radial = radial_rule(2);
    let y0 = set.root();
    let rule = Rule::composite(&graded_breaks(-r, r, r / 16.0, &[], 1.0), 16);
    let g0 = set.transverse(y0, 1, &radial, &sphere);
    let pv_smooth = rule.integrate(|y| (set.transverse(y, 1, &radial, &sphere) - g0) / (y - y0));
    let log = if y0.abs() < r { ((r - y0) / (r + y0)).ln() } else { ((y0 - r) / (y0 + r)).abs().ln() };
    let pv = (pv_smooth + g0 * log) / set.b;
    let residue = if y0.abs() < r { std::f64::consts::PI * g0 / set.b } else { 0.0 };
    let boundary = Complex64::new(pv, if plus { -residue } else { residue });
    Ok(phase(plus, 1) * boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};

    fn ball(center: [i64; 4], r: Rational) -> TestFnDescriptor {
        TestFnDescriptor::new(center.iter().map(|x| int(*x)).collect(), r).unwrap()
    }

    const F: [f64; 4] = [3.0, 1.0, 2.0, 1.0];

    #[test]
    fn normalized_test_functions_integrate_to_one() {
        let c = ball([0, 1, 0, 0], rat(1, 3));
        let set = Setup::new(&c, 1, &F, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let rule = Rule::composite(&graded_breaks(-set.radius, set.radius, 0.02, &[], 1.0), 16);
        let (radial, sphere) = (radial_rule(2), gauss_legendre(1));
        let total = rule.integrate(|y| set.transverse(y, 0, &radial, &sphere));
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        // (ef) at the center of the support
        let first = rule.integrate(|y| set.transverse(y, 1, &radial, &sphere));
        assert!((first - mdot(&set.center, &F)).abs() < 1e-10, "{first}");
    }

    #[test]
    fn bounded_denominators_need_no_extrapolation() {
        // (pe) = -e¹ ≈ -1 on the support
        let c = ball([0, 1, 0, 0], rat(1, 4));
        let p = [0.0, 1.0, 0.0, 0.0];
        let q = smeared_q_eval(&c, false, 1, &F, &p, &default_schedule(&c, &p)).unwrap();
        assert!(q.error() < 1e-9, "{q:?}");
        let oracle = smeared_q_contour(&c, false, &F, &p).unwrap();
        assert!((q.value() - oracle).norm() < 1e-9);
    }

    #[test]
    fn vanishing_denominators_match_principal_value_plus_residue() {
        // (pe) = -e² vanishes at the center of the support
        let c = ball([0, 1, 0, 0], rat(1, 4));
        for p in [[0.0, 0.0, 1.0, 0.0], [0.3, 0.0, 1.0, 0.2]] {
            for plus in [false, true] {
                let q = smeared_q_eval(&c, plus, 1, &F, &p, &default_schedule(&c, &p)).unwrap();
                let oracle = smeared_q_contour(&c, plus, &F, &p).unwrap();
                let scale = oracle.norm();
                assert!((q.value() - oracle).norm() < 1e-6 * scale, "{q:?} vs {oracle}");
                assert!(q.error() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn homogeneous_of_degree_minus_s() {
        let c = ball([0, 0, 0, 2], rat(1, 2));
        for s in 1..=3u32 {
            let p = [1.0, 0.0, 0.3, 0.0];
            let p2 = p.map(|x| 2.0 * x);
            let q1 = smeared_q_eval(&c, false, s, &F, &p, &default_schedule(&c, &p)).unwrap();
            let q2 = smeared_q_eval(&c, false, s, &F, &p2, &default_schedule(&c, &p2)).unwrap();
            let want = q1.value() * 2f64.powi(-(s as i32));
            let tol = 10.0 * (q1.error() + q2.error()) + 1e-9 * want.norm();
            assert!((q2.value() - want).norm() < tol, "s={s}: {:?} vs {want}", q2);
        }
    }

    #[test]
    fn refining_the_mesh_agrees_for_higher_powers() {
        let c = ball([0, 0, 0, 2], rat(1, 2));
        let p = [1.0, 0.0, 0.0, 0.0];
        let set = Setup::new(&c, 2, &F, &p).unwrap();
        let eps = default_schedule(&c, &p).values();
        let a = extrapolate(&q_at_resolution(&set, true, &eps, 2)).value();
        let b = extrapolate(&q_at_resolution(&set, true, &eps, 4)).value();
        assert!((a - b).norm() < 1e-8 * a.norm(), "{a} vs {b}");
    }

    #[test]
    fn zero_momentum_is_rejected() {
        let c = ball([0, 0, 0, 2], rat(1, 2));
        assert!(smeared_q_eval(&c, true, 1, &F, &[0.0; 4], &EpsSchedule::new(0.1, 4)).is_err());
    }
}
