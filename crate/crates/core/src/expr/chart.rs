//! Chart maps `(p, angles) ↦ (p, e)` with transcendental components, used to
//! restrict string variables to closed submanifolds.
//!
//! Numeric evaluation runs in `f64`; exact work uses rational half-angle
//! parameters `t` with `cos = (1-t²)/(1+t²)`, `sin = 2t/(1+t²)` and
//! `cosh = (1+t²)/(1-t²)`, `sinh = 2t/(1-t²)` for `|t| < 1`.

use serde::{Deserialize, Serialize};

use crate::poly::SlotName;
use crate::scalar::{int, Rational};
use crate::space::Space;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// `e = (1, sinϑ cosφ, sinϑ sinφ, cosϑ)`.
    Lightlike,
    /// `e = (sinhτ, coshτ sinϑ cosφ, coshτ sinϑ sinφ, coshτ cosϑ)`, `e² = -1`.
    HMinus1,
    /// `e = (0, sinϑ cosφ, sinϑ sinφ, cosϑ)`.
    PurelySpacelike,
}

impl Chart {
    pub const ALL: [Chart; 3] = [Chart::Lightlike, Chart::HMinus1, Chart::PurelySpacelike];

    pub fn name(self) -> &'static str {
        match self {
            Chart::Lightlike => "lightlike",
            Chart::HMinus1 => "h-minus-1",
            Chart::PurelySpacelike => "purely-spacelike",
        }
    }

    pub fn parse(s: &str) -> Option<Chart> {
        Chart::ALL.into_iter().find(|c| c.name() == s || c.name().replace('-', "_") == s)
    }

    pub fn angle_slots(self) -> Vec<SlotName> {
        match self {
            Chart::HMinus1 => vec![SlotName::Tau, SlotName::Phi, SlotName::Theta],
            _ => vec![SlotName::Phi, SlotName::Theta],
        }
    }

    /// Open box of chart angles: `(lo, hi)` per angle, `None` for unbounded.
    pub fn angle_box(self) -> Vec<(Option<f64>, Option<f64>)> {
        use std::f64::consts::PI;
        let sphere = vec![(Some(0.0), Some(2.0 * PI)), (Some(0.0), Some(PI))];
        match self {
            Chart::HMinus1 => std::iter::once((None, None)).chain(sphere).collect(),
            _ => sphere,
        }
    }

    fn time_component(self) -> f64 {
        match self {
            Chart::Lightlike => 1.0,
            _ => 0.0,
        }
    }

    /// String direction at chart angles.
    pub fn direction(self, angles: &[f64]) -> [f64; 4] {
        let (ch, sh, rest) = match self {
            Chart::HMinus1 => (angles[0].cosh(), angles[0].sinh(), &angles[1..]),
            _ => (1.0, self.time_component(), angles),
        };
        let (phi, th) = (rest[0], rest[1]);
        [sh, ch * th.sin() * phi.cos(), ch * th.sin() * phi.sin(), ch * th.cos()]
    }

    /// `∂e/∂angle` for every chart angle.
    pub fn direction_derivatives(self, angles: &[f64]) -> Vec<[f64; 4]> {
        let (ch, sh, rest) = match self {
            Chart::HMinus1 => (angles[0].cosh(), angles[0].sinh(), &angles[1..]),
            _ => (1.0, 0.0, angles),
        };
        let (phi, th) = (rest[0], rest[1]);
        let d_phi = [0.0, -ch * th.sin() * phi.sin(), ch * th.sin() * phi.cos(), 0.0];
        let d_th = [0.0, ch * th.cos() * phi.cos(), ch * th.cos() * phi.sin(), -ch * th.sin()];
        match self {
            Chart::HMinus1 => {
                let d_tau = [ch, sh * th.sin() * phi.cos(), sh * th.sin() * phi.sin(), sh * th.cos()];
                vec![d_tau, d_phi, d_th]
            }
            _ => vec![d_phi, d_th],
        }
    }

    /// Closed-form `ᵗι'(ξ, η)`: `ξ` followed by `⟨η, ∂e/∂angle⟩` in the
    /// Minkowski pairing.
    pub fn transpose_jacobian(self, angles: &[f64], xi: [f64; 4], eta: [f64; 4]) -> Vec<f64> {
        let mut out = xi.to_vec();
        let (ch, sh, rest) = match self {
            Chart::HMinus1 => (angles[0].cosh(), angles[0].sinh(), &angles[1..]),
            _ => (1.0, 0.0, angles),
        };
        let (phi, th) = (rest[0], rest[1]);
        let (sp, cp, st, ct) = (phi.sin(), phi.cos(), th.sin(), th.cos());
        if self == Chart::HMinus1 {
            out.push(eta[0] * ch - sh * (eta[1] * st * cp + eta[2] * st * sp + eta[3] * ct));
        }
        out.push(ch * st * (eta[1] * sp - eta[2] * cp));
        out.push(ch * (eta[3] * st - ct * (eta[1] * cp + eta[2] * sp)));
        out
    }

    /// Rational trigonometric values for half-angle parameters.
    fn trig_exact(self, params: &[Rational]) -> Option<(Rational, Rational, [Rational; 4])> {
        let one = int(1);
        let two = int(2);
        let circ = |t: &Rational| {
            let d = &one + t * t;
            ((&one - t * t) / &d, &two * t / &d)
        };
        let (ch, sh, rest) = match self {
            Chart::HMinus1 => {
                let t = &params[0];
                let d = &one - t * t;
                if d <= int(0) {
                    return None;
                }
                ((&one + t * t) / &d, &two * t / &d, &params[1..])
            }
            _ => (one.clone(), int(0), params),
        };
        let (cp, sp) = circ(&rest[0]);
        let (ct, st) = circ(&rest[1]);
        Some((ch, sh, [cp, sp, ct, st]))
    }

    /// Exact string direction and its angle derivatives at rational
    /// half-angle parameters.
    pub fn direction_exact(self, params: &[Rational]) -> Option<([Rational; 4], Vec<[Rational; 4]>)> {
        let (ch, sh, [cp, sp, ct, st]) = self.trig_exact(params)?;
        let time = match self {
            Chart::Lightlike => int(1),
            Chart::HMinus1 => sh.clone(),
            Chart::PurelySpacelike => int(0),
        };
        let e = [time, &ch * &st * &cp, &ch * &st * &sp, &ch * &ct];
        let d_phi = [int(0), -(&ch * &st * &sp), &ch * &st * &cp, int(0)];
        let d_th = [int(0), &ch * &ct * &cp, &ch * &ct * &sp, -(&ch * &st)];
        let mut ds = Vec::new();
        if self == Chart::HMinus1 {
            ds.push([ch.clone(), &sh * &st * &cp, &sh * &st * &sp, &sh * &ct]);
        }
        ds.push(d_phi);
        ds.push(d_th);
        Some((e, ds))
    }

    /// Largest deviation between the closed-form transpose Jacobian and
    /// central differences of the direction map over the given samples.
    pub fn transpose_jacobian_fd_error(self, samples: &[(Vec<f64>, [f64; 4])], h: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (angles, eta) in samples {
            let closed = self.transpose_jacobian(angles, [0.0; 4], *eta);
            for (a, c) in closed[4..].iter().enumerate() {
                let mut up = angles.clone();
                let mut dn = angles.clone();
                up[a] += h;
                dn[a] -= h;
                let (eu, ed) = (self.direction(&up), self.direction(&dn));
                let de: Vec<f64> = (0..4).map(|i| (eu[i] - ed[i]) / (2.0 * h)).collect();
                let fd = eta[0] * de[0] - eta[1] * de[1] - eta[2] * de[2] - eta[3] * de[3];
                worst = worst.max((fd - c).abs() / (1.0 + c.abs()));
            }
        }
        worst
    }
}

/// A chart map as a node of an expression: `(p, angles) ↦ (p, e)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChartMap {
    pub chart: Chart,
    pub p: SlotName,
    pub e: SlotName,
}

impl ChartMap {
    pub fn new(chart: Chart) -> Self {
        ChartMap { chart, p: SlotName::P, e: SlotName::E }
    }

    pub fn domain(&self) -> Space {
        Space::new(std::iter::once(self.p).chain(self.chart.angle_slots()))
    }

    pub fn codomain(&self) -> Space {
        Space::new([self.p, self.e])
    }

    /// `(p, angles) ↦ (p, e)` as eight numbers.
    pub fn eval(&self, point: &[f64]) -> [f64; 8] {
        let e = self.chart.direction(&point[4..]);
        [point[0], point[1], point[2], point[3], e[0], e[1], e[2], e[3]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Scalar};

    fn samples(chart: Chart) -> Vec<(Vec<f64>, [f64; 4])> {
        let n = chart.angle_slots().len();
        (0..12)
            .map(|k| {
                let k = k as f64;
                let angles: Vec<f64> = (0..n).map(|i| 0.3 + 0.41 * k + 0.17 * i as f64).collect();
                (angles, [1.0 + 0.1 * k, -0.7, 0.3 * k, 2.0])
            })
            .collect()
    }

    #[test]
    fn transpose_jacobians_match_finite_differences() {
        for chart in Chart::ALL {
            let err = chart.transpose_jacobian_fd_error(&samples(chart), 1e-5);
            assert!(err < 1e-8, "{chart:?}: {err}");
        }
    }

    #[test]
    fn exact_directions_agree_with_floats() {
        for chart in Chart::ALL {
            let params: Vec<Rational> = (0..chart.angle_slots().len()).map(|i| rat(1 + i as i64, 3)).collect();
            let angles: Vec<f64> = params
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let t = t.to_f64();
                    if chart == Chart::HMinus1 && i == 0 {
                        2.0 * t.atanh()
                    } else {
                        2.0 * t.atan()
                    }
                })
                .collect();
            let (e, ds) = chart.direction_exact(&params).unwrap();
            let ef = chart.direction(&angles);
            let dsf = chart.direction_derivatives(&angles);
            for i in 0..4 {
                assert!((e[i].to_f64() - ef[i]).abs() < 1e-12);
                for (d, df) in ds.iter().zip(&dsf) {
                    assert!((d[i].to_f64() - df[i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn directions_have_the_advertised_square() {
        for (chart, sq) in [(Chart::Lightlike, 0.0), (Chart::HMinus1, -1.0), (Chart::PurelySpacelike, -1.0)] {
            let n = chart.angle_slots().len();
            let e = chart.direction(&vec![0.7; n]);
            let s = e[0] * e[0] - e[1] * e[1] - e[2] * e[2] - e[3] * e[3];
            assert!((s - sq).abs() < 1e-12);
        }
    }
}
