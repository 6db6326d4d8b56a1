//! Restricting the string to a closed submanifold by a chart and asking
//! where the pulled-back string family gains covectors that vanish in every
//! angle direction. Those are the elements that survive smearing over the
//! submanifold away from `p = 0`.
//!
//! The string family is `(p, e; λe, λp)` over `(pe) = 0`. Its pullback along
//! `(p, angles) ↦ (p, e(angles))` is `(λe, λ⟨p, ∂e⟩)`, so the angle part
//! vanishes exactly when `p` is Minkowski-orthogonal to `e` and to every
//! `∂e/∂angle`: a linear condition on `p` for fixed angles, solved exactly.

use serde::Serialize;

use crate::expr::Chart;
use crate::linalg::nullspace;
use crate::scalar::{int, rat, Rational, Scalar};

/// Shape of the set of momenta with critical elements at fixed angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalShape {
    /// No critical element for `p ≠ 0`.
    Empty,
    /// `p ∝ e`.
    AlongString,
    /// `p̄ = 0` with `p⁰` arbitrary.
    TimeAxis,
    /// Anything else; reported with its dimension.
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartSample {
    /// Rational half-angle parameters.
    pub params: Vec<String>,
    pub direction: [String; 4],
    /// Basis of the momenta `p` with critical elements at these angles.
    pub critical_basis: Vec<[String; 4]>,
    pub shape: CriticalShape,
    /// Angle derivatives are independent here; polar points are not.
    pub regular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartReport {
    pub chart: Chart,
    pub samples: Vec<ChartSample>,
    /// Common shape over all samples, `Other` if they disagree.
    pub shape: CriticalShape,
    pub description: String,
    /// The transpose Jacobian in closed form agrees with finite differences.
    pub jacobian_fd_error: f64,
    /// Homogeneity shortcut on `e² = -1`: the radial direction `e` pairs to
    /// zero with the `e`-part `λp` by `(pe) = 0`, so only the tangent
    /// directions matter. Present for the hyperboloid chart only.
    pub radial_shortcut_empty: Option<bool>,
}

fn lower(v: &[Rational; 4]) -> Vec<Rational> {
    vec![v[0].clone(), -v[1].clone(), -v[2].clone(), -v[3].clone()]
}

fn strs(v: &[Rational; 4]) -> [String; 4] {
    [v[0].to_string(), v[1].to_string(), v[2].to_string(), v[3].to_string()]
}

/// Momenta `p` with `(pe) = 0` and `⟨p, ∂e⟩ = 0` for every chart angle.
pub fn critical_momenta(chart: Chart, params: &[Rational]) -> Option<([Rational; 4], Vec<[Rational; 4]>)> {
    let (e, ds) = chart.direction_exact(params)?;
    let mut rows = vec![lower(&e)];
    rows.extend(ds.iter().map(lower));
    let basis = nullspace(&rows, 4)
        .into_iter()
        .map(|v| [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()])
        .collect();
    Some((e, basis))
}

fn proportional(a: &[Rational; 4], b: &[Rational; 4]) -> bool {
    (0..4).all(|i| (0..4).all(|j| &a[i] * &b[j] == &a[j] * &b[i]))
}

fn classify(e: &[Rational; 4], basis: &[[Rational; 4]]) -> CriticalShape {
    let zero = int(0);
    match basis {
        [] => CriticalShape::Empty,
        [v] if proportional(v, e) => CriticalShape::AlongString,
        [v] if v[1] == zero && v[2] == zero && v[3] == zero => CriticalShape::TimeAxis,
        _ => CriticalShape::Other,
    }
}

/// Whether `p` has a critical element at these angles: `p ≠ 0` lies in the
/// critical space.
pub fn is_critical(chart: Chart, params: &[Rational], p: &[Rational; 4]) -> Option<bool> {
    let (_, basis) = critical_momenta(chart, params)?;
    if p.iter().all(|c| *c == int(0)) {
        return Some(false);
    }
    let cols: Vec<Vec<Rational>> = basis.iter().map(|b| b.to_vec()).collect();
    Some(!matches!(crate::linalg::solve_columns(&cols, p), crate::linalg::Solution::Inconsistent))
}

fn parameter_grid(chart: Chart) -> Vec<Vec<Rational>> {
    let ts = [rat(0, 1), rat(1, 3), rat(-1, 2), rat(2, 1), rat(-5, 7), rat(3, 4)];
    let mut out = Vec::new();
    for a in &ts {
        for b in &ts {
            match chart {
                Chart::HMinus1 => {
                    for t in [rat(0, 1), rat(1, 2), rat(-1, 3)] {
                        out.push(vec![t, a.clone(), b.clone()]);
                    }
                }
                _ => out.push(vec![a.clone(), b.clone()]),
            }
        }
    }
    out
}

/// `p = c e` with `(pe) = c e² = 0` forces `c = 0` unless `e` is lightlike.
fn radial_shortcut(e: &[Rational; 4]) -> bool {
    let e2 = &e[0] * &e[0] - &e[1] * &e[1] - &e[2] * &e[2] - &e[3] * &e[3];
    e2 != int(0)
}

pub fn appendix_chart_analysis(chart: Chart) -> ChartReport {
    let mut samples = Vec::new();
    let mut shapes = Vec::new();
    let mut shortcut = true;
    for params in parameter_grid(chart) {
        let Some((e, basis)) = critical_momenta(chart, &params) else { continue };
        let (_, ds) = chart.direction_exact(&params).expect("chart point");
        let regular = crate::linalg::rank(&ds.iter().map(|d| d.to_vec()).collect::<Vec<_>>()) == ds.len();
        let shape = classify(&e, &basis);
        shortcut &= radial_shortcut(&e);
        if regular {
            shapes.push(shape);
        }
        samples.push(ChartSample {
            params: params.iter().map(|q| q.to_string()).collect(),
            direction: strs(&e),
            critical_basis: basis.iter().map(strs).collect(),
            shape,
            regular,
        });
    }
    let shape = match shapes.first() {
        Some(s) if shapes.iter().all(|x| x == s) => *s,
        _ => CriticalShape::Other,
    };
    let description = match shape {
        CriticalShape::Empty => "no critical elements for p != 0".to_string(),
        CriticalShape::AlongString => "critical elements (p, angles; λe, 0) exactly when p is proportional to e".to_string(),
        CriticalShape::TimeAxis => "critical elements exactly when the spatial part of p vanishes, for any p0".to_string(),
        CriticalShape::Other => "critical set of varying shape".to_string(),
    };
    let fd_samples: Vec<(Vec<f64>, [f64; 4])> = samples
        .iter()
        .filter(|s| s.regular)
        .take(8)
        .map(|s| {
            let angles = half_angles_to_angles(chart, &s.params);
            (angles, [0.7, -1.3, 0.4, 2.1])
        })
        .collect();
    ChartReport {
        chart,
        jacobian_fd_error: chart.transpose_jacobian_fd_error(&fd_samples, 1e-5),
        samples,
        shape,
        description,
        radial_shortcut_empty: (chart == Chart::HMinus1).then_some(shortcut),
    }
}

/// Half-angle parameters back to angles: `2 atan t` on circles and
/// `2 atanh t` for the boost.
fn half_angles_to_angles(chart: Chart, params: &[String]) -> Vec<f64> {
    params
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = s.parse::<Rational>().map(|q| q.to_f64()).unwrap_or(0.0);
            if chart == Chart::HMinus1 && i == 0 {
                2.0 * t.atanh()
            } else {
                2.0 * t.atan()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lightlike_strings_are_critical_along_themselves() {
        let r = appendix_chart_analysis(Chart::Lightlike);
        assert_eq!(r.shape, CriticalShape::AlongString);
        // e = (1, 0, 0, 1) at ϑ = 0, p = 2e
        let params = [int(0), int(0)];
        let (e, _) = critical_momenta(Chart::Lightlike, &params).unwrap();
        assert_eq!(e, [int(1), int(0), int(0), int(1)]);
        let p = e.clone().map(|c| c * int(2));
        assert_eq!(is_critical(Chart::Lightlike, &params, &p), Some(true));
        assert_eq!(is_critical(Chart::Lightlike, &params, &[int(1), int(0), int(0), int(0)]), Some(false));
    }

    #[test]
    fn hyperboloid_has_no_critical_momenta() {
        let r = appendix_chart_analysis(Chart::HMinus1);
        assert_eq!(r.shape, CriticalShape::Empty);
        assert_eq!(r.radial_shortcut_empty, Some(true));
        assert!(r.jacobian_fd_error < 1e-6);
        let p = [int(1), int(2), int(0), int(0)];
        for params in parameter_grid(Chart::HMinus1) {
            assert_eq!(is_critical(Chart::HMinus1, &params, &p), Some(false));
        }
    }

    #[test]
    fn purely_spacelike_strings_are_critical_on_the_time_axis() {
        let r = appendix_chart_analysis(Chart::PurelySpacelike);
        assert_eq!(r.shape, CriticalShape::TimeAxis);
        let p = [int(5), int(0), int(0), int(0)];
        for params in parameter_grid(Chart::PurelySpacelike) {
            assert_eq!(is_critical(Chart::PurelySpacelike, &params, &p), Some(true));
            assert_eq!(is_critical(Chart::PurelySpacelike, &params, &[int(5), int(1), int(0), int(0)]), Some(false));
        }
    }
}
