//! Localized Fourier decay scans. A direction is in the wavefront set at a
//! point when no conic neighbourhood of it shows rapid decay of the
//! transform of `χ u` for cutoffs `χ` around the point; numerically we fix one
//! cutoff, compute `|(χu)^(rξ)|` along each grid direction for geometric
//! radii, and read off the decay exponent from a log-log fit.
//!
//! The window is a product of bumps along the axes of an affine frame, so
//! the singular locus can be put on a frame axis and the mesh graded toward
//! it. The grid values for every `ε` are folded into two Richardson
//! combinations first; each transform is then two bilinear forms.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::quad::{graded_breaks, Rule};
use super::richardson::{weights, EpsSchedule};
use crate::cone::{Assignment, ParamSign, WavefrontBound};
use crate::poly::Var;
use crate::space::display_factor;

/// A function on `ℝ^d` given through its `ε`-regularizations.
pub trait Regularized: Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], eps: f64) -> Complex64;
    /// `false` for smooth functions, which skip the extrapolation.
    fn regularized(&self) -> bool {
        true
    }
    /// Points where even the regularized family degenerates; windows must
    /// stay clear of them.
    fn excluded_points(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

/// `[t ± i0]^{-1}` as `1 / (t ± iε)`.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryValue {
    pub plus: bool,
}

impl Regularized for BoundaryValue {
    fn name(&self) -> String {
        format!("[t {} i0]^-1", if self.plus { "+" } else { "-" })
    }
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64], eps: f64) -> Complex64 {
        let s = if self.plus { eps } else { -eps };
        Complex64::new(x[0], s).inv()
    }
}

/// `[x⁰ ± i0]^{-1}` on `ℝ^{1+1}`, constant in `x¹`.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryValueTime {
    pub plus: bool,
}

impl Regularized for BoundaryValueTime {
    fn name(&self) -> String {
        format!("[x0 {} i0]^-1 on 1+1", if self.plus { "+" } else { "-" })
    }
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64], eps: f64) -> Complex64 {
        BoundaryValue { plus: self.plus }.eval(&x[..1], eps)
    }
}

/// `1 / (x² − iε)` on `ℝ^{1+1}`: the massless Feynman propagator up to its
/// constant.
#[derive(Clone, Copy, Debug)]
pub struct Feynman2;

impl Regularized for Feynman2 {
    fn name(&self) -> String {
        "1/(x^2 - i0) on 1+1".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64], eps: f64) -> Complex64 {
        Complex64::new(x[0] * x[0] - x[1] * x[1], -eps).inv()
    }
    fn excluded_points(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0]]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Gaussian {
    pub dim: usize,
}

impl Regularized for Gaussian {
    fn name(&self) -> String {
        format!("gaussian in {} dimensions", self.dim)
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], _eps: f64) -> Complex64 {
        Complex64::new((-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    }
    fn regularized(&self) -> bool {
        false
    }
}

/// `exp(−1/(1 − t²))` on `|t| < 1`.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowAxis {
    pub dir: Vec<f64>,
    pub half_width: f64,
    /// Offsets along the axis where the mesh is graded.
    #[serde(default)]
    pub focus: Vec<f64>,
}

/// `χ(center + Σ t_a dir_a) = Π_a bump(t_a / half_width_a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: Vec<f64>,
    pub axes: Vec<WindowAxis>,
}

impl Window {
    /// Round window with axes along the coordinates.
    pub fn ball(center: Vec<f64>, radius: f64, focus: Vec<Vec<f64>>) -> Self {
        let d = center.len();
        let axes = (0..d)
            .map(|a| WindowAxis {
                dir: (0..d).map(|b| if a == b { 1.0 } else { 0.0 }).collect(),
                half_width: radius,
                focus: focus.get(a).cloned().unwrap_or_default(),
            })
            .collect();
        Window { center, axes }
    }

    fn frame_det(&self) -> f64 {
        match self.axes.as_slice() {
            [a] => a.dir[0],
            [a, b] => a.dir[0] * b.dir[1] - a.dir[1] * b.dir[0],
            _ => f64::NAN,
        }
    }

    /// Frame coordinates of `x`.
    fn coords(&self, x: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        match self.axes.as_slice() {
            [a] => vec![y[0] / a.dir[0]],
            [a, b] => {
                let det = self.frame_det();
                vec![(y[0] * b.dir[1] - y[1] * b.dir[0]) / det, (a.dir[0] * y[1] - a.dir[1] * y[0]) / det]
            }
            _ => Vec::new(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.coords(x).iter().zip(&self.axes).all(|(t, a)| t.abs() < a.half_width)
    }

    pub fn validate(&self) -> Result<(), String> {
        let d = self.center.len();
        if !(1..=2).contains(&d) || self.axes.len() != d || self.axes.iter().any(|a| a.dir.len() != d) {
            return Err("windows live in one or two dimensions with one axis per dimension".into());
        }
        if self.frame_det().abs() < 1e-12 {
            return Err("window axes are degenerate".into());
        }
        if self.axes.iter().any(|a| a.half_width <= 0.0) {
            return Err("window half widths must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Rapid means a fitted exponent at most `-rapid`.
    pub rapid: f64,
    /// Slow means a fitted exponent at least `-slow`.
    pub slow: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { rapid: 4.0, slow: 1.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayScanConfig {
    pub window: Window,
    /// Grid directions in two dimensions; one-dimensional scans use `±1`.
    pub directions: usize,
    pub r0: f64,
    pub ratio: f64,
    pub radii: usize,
    pub nodes_per_panel: usize,
    /// Oscillation periods per panel at the largest radius.
    pub periods_per_panel: f64,
    pub eps: EpsSchedule,
    pub thresholds: Thresholds,
    /// Relative tolerance for the extrapolation error.
    pub rel_tol: f64,
    /// Magnitudes below `floor` times the largest one are treated as zero,
    /// on top of the rounding floor estimated from the grid.
    pub floor: f64,
    pub seed: u64,
}

impl DecayScanConfig {
    /// Defaults around a window; `ε₀` is tied to the largest radius so that
    /// the schedule resolves the transform there.
    pub fn new(window: Window, directions: usize, r0: f64, ratio: f64, radii: usize) -> Self {
        let r_max = r0 * ratio.powi(radii as i32 - 1);
        DecayScanConfig {
            window,
            directions,
            r0,
            ratio,
            radii,
            nodes_per_panel: 16,
            periods_per_panel: 2.0,
            eps: EpsSchedule::new(0.5 / r_max, 6),
            thresholds: Thresholds::default(),
            rel_tol: 1e-3,
            floor: 1e-13,
            seed: 0,
        }
    }

    pub fn radius_values(&self) -> Vec<f64> {
        (0..self.radii).map(|j| self.r0 * self.ratio.powi(j as i32)).collect()
    }

    pub fn direction_vectors(&self) -> Vec<Vec<f64>> {
        if self.window.center.len() == 1 {
            return vec![vec![1.0], vec![-1.0]];
        }
        (0..self.directions)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / self.directions as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    }

    pub fn validate(&self, u: &dyn Regularized) -> Result<(), String> {
        self.window.validate()?;
        if u.dim() != self.window.center.len() {
            return Err(format!("{} lives in {} dimensions, the window in {}", u.name(), u.dim(), self.window.center.len()));
        }
        if self.window.center.len() == 2 && self.directions < 4 {
            return Err("two-dimensional scans need at least four directions".into());
        }
        if !(self.r0 > 0.0 && self.ratio > 1.0 && self.radii >= 6) {
            return Err("radii must increase strictly from a positive start, at least six of them".into());
        }
        if self.nodes_per_panel < 2 || self.periods_per_panel <= 0.0 {
            return Err("quadrature needs at least two nodes and a positive panel size".into());
        }
        for p in u.excluded_points() {
            let t = self.window.coords(&p);
            if t.iter().zip(&self.window.axes).all(|(t, a)| t.abs() <= a.half_width) {
                return Err(format!("window support contains the excluded point {p:?}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    Rapid,
    Slow,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionResult {
    pub index: usize,
    pub direction: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Extrapolation error estimates, one per radius.
    pub errors: Vec<f64>,
    /// Fitted slope of `log |FT|` against `log r` over the top half of radii.
    pub exponent: f64,
    /// Half width of the 95% confidence band of the slope.
    pub band: f64,
    pub class: DecayClass,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayScanResult {
    pub evaluator: String,
    pub config: DecayScanConfig,
    pub radii: Vec<f64>,
    pub nodes: Vec<usize>,
    /// Absolute magnitude below which values count as noise.
    pub floor: f64,
    pub directions: Vec<DirectionResult>,
}

impl DecayScanResult {
    pub fn classes(&self) -> Vec<DecayClass> {
        self.directions.iter().map(|d| d.class).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "d0", "d1", "exponent", "band", "class"]).expect("in-memory writer");
        for d in &self.directions {
            let class = serde_json::to_value(d.class).expect("class").as_str().unwrap_or_default().to_string();
            w.write_record([
                d.index.to_string(),
                d.direction[0].to_string(),
                d.direction.get(1).map(|v| v.to_string()).unwrap_or_default(),
                format!("{:.4}", d.exponent),
                format!("{:.4}", d.band),
                class,
            ])
            .expect("in-memory writer");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

fn axis_rule(axis: &WindowAxis, cfg: &DecayScanConfig, r_max: f64, h_min: f64) -> Rule {
    let norm = axis.dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let freq = (r_max * norm).max(1.0);
    let width = (cfg.periods_per_panel * 2.0 * PI / freq).min(axis.half_width / 2.0);
    let h = axis.half_width;
    Rule::composite(&graded_breaks(-h, h, width, &axis.focus, h_min), cfg.nodes_per_panel)
}

/// Least-squares slope and the half width of its 95% band.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    if xs.len() < 3 {
        return (slope, f64::INFINITY);
    }
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::INFINITY);
    (slope, t * se)
}

/// Fits over the top half of the radii resolved above `floor`. Radii
/// past the first one under the floor only carry rounding noise.
fn classify(mags: &[f64], errs: &[f64], radii: &[f64], floor: f64, cfg: &DecayScanConfig) -> (f64, f64, DecayClass, String) {
    let resolved = mags.iter().take_while(|m| **m > floor).count();
    if resolved < 3 {
        return (f64::NAN, f64::NAN, DecayClass::Inconclusive, "fewer than three radii above the rounding floor".into());
    }
    let top = (resolved / 2).min(resolved - 3);
    for j in top..resolved {
        if errs[j] > cfg.rel_tol * mags[j] + floor {
            return (f64::NAN, f64::NAN, DecayClass::Inconclusive, format!("extrapolation not converged at r = {:.3}", radii[j]));
        }
    }
    let xs: Vec<f64> = radii[top..resolved].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = mags[top..resolved].iter().map(|m| m.ln()).collect();
    let (slope, band) = fit_slope(&xs, &ys);
    let class = if slope <= -cfg.thresholds.rapid {
        DecayClass::Rapid
    } else if slope >= -cfg.thresholds.slow {
        DecayClass::Slow
    } else {
        DecayClass::Inconclusive
    };
    let note = if resolved < radii.len() {
        format!("below the rounding floor from r = {:.3}; fitted up to r = {:.3}", radii[resolved], radii[resolved - 1])
    } else {
        String::new()
    };
    (slope, band, class, note)
}

pub fn decay_scan(u: &dyn Regularized, cfg: &DecayScanConfig) -> Result<DecayScanResult, String> {
    cfg.validate(u)?;
    let radii = cfg.radius_values();
    let r_max = *radii.last().expect("radii");
    let eps = cfg.eps.values();
    let eps_min = *eps.last().expect("levels");
    let w = &cfg.window;
    let d = w.center.len();
    let mut rules: Vec<Rule> = w.axes.iter().map(|a| axis_rule(a, cfg, r_max, eps_min / 8.0)).collect();
    let mut dirs: Vec<Vec<f64>> = w.axes.iter().map(|a| a.dir.clone()).collect();
    if d == 1 {
        rules.push(Rule { nodes: vec![0.0], weights: vec![1.0] });
        dirs.push(vec![0.0]);
    }
    let (n1, n2) = (rules[0].len(), rules[1].len());
    let jac = w.frame_det().abs();
    let hw: Vec<f64> = w.axes.iter().map(|a| a.half_width).chain(std::iter::once(f64::INFINITY)).collect();

    // grid values folded into the two extrapolants
    let (cb, cp) = if u.regularized() { weights(eps.len()) } else { (vec![1.0], vec![1.0]) };
    let levels = if u.regularized() { eps.clone() } else { vec![0.0] };
    let mut m = [Array2::<f64>::zeros((n1, n2)), Array2::<f64>::zeros((n1, n2)), Array2::<f64>::zeros((n1, n2)), Array2::<f64>::zeros((n1, n2))];
    let mut x = vec![0.0; d];
    for i in 0..n1 {
        let (t1, w1) = (rules[0].nodes[i], rules[0].weights[i]);
        for j in 0..n2 {
            let (t2, w2) = (rules[1].nodes[j], rules[1].weights[j]);
            let weight = w1 * w2 * jac * bump(t1 / hw[0]) * if d == 2 { bump(t2 / hw[1]) } else { 1.0 };
            if weight == 0.0 {
                continue;
            }
            for k in 0..d {
                x[k] = w.center[k] + t1 * dirs[0][k] + t2 * dirs[1].get(k).copied().unwrap_or(0.0);
            }
            let (mut b, mut p) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (l, e) in levels.iter().enumerate() {
                let v = u.eval(&x, *e);
                b += v * cb[l];
                p += v * cp[l];
            }
            m[0][[i, j]] = weight * b.re;
            m[1][[i, j]] = weight * b.im;
            m[2][[i, j]] = weight * p.re;
            m[3][[i, j]] = weight * p.im;
        }
    }

    let unit_dirs = cfg.direction_vectors();
    let xis: Vec<Vec<f64>> = unit_dirs.iter().flat_map(|u| radii.iter().map(move |r| u.iter().map(|c| c * r).collect())).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // phases along the second axis, one column per frequency
    let nx = xis.len();
    let (mut pr, mut pi) = (Array2::<f64>::zeros((n2, nx)), Array2::<f64>::zeros((n2, nx)));
    for (c, xi) in xis.iter().enumerate() {
        let f = dot(xi, &dirs[1]);
        for j in 0..n2 {
            let (s, co) = (-f * rules[1].nodes[j]).sin_cos();
            pr[[j, c]] = co;
            pi[[j, c]] = s;
        }
    }
    let mut values = [vec![Complex64::new(0.0, 0.0); nx], vec![Complex64::new(0.0, 0.0); nx]];
    for (k, out) in values.iter_mut().enumerate() {
        let (mr, mi) = (&m[2 * k], &m[2 * k + 1]);
        let tr = mr.dot(&pr) - mi.dot(&pi);
        let ti = mr.dot(&pi) + mi.dot(&pr);
        for (c, xi) in xis.iter().enumerate() {
            let f = dot(xi, &dirs[0]);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n1 {
                let ph = Complex64::from_polar(1.0, -f * rules[0].nodes[i]);
                acc += ph * Complex64::new(tr[[i, c]], ti[[i, c]]);
            }
            out[c] = acc * Complex64::from_polar(1.0, -dot(xi, &w.center));
        }
    }

    let nr = radii.len();
    let scale = (0..unit_dirs.len()).map(|k| values[0][k * nr].norm()).fold(0.0, f64::max);
    // rounding in the bilinear forms is bounded by the mass of the grid values
    let mass: f64 = m[0].iter().zip(m[1].iter()).map(|(a, b)| a.hypot(*b)).sum();
    let noise = 64.0 * f64::EPSILON * mass;
    let floor = (cfg.floor * scale).max(10.0 * noise);
    let directions = unit_dirs
        .iter()
        .enumerate()
        .map(|(k, dir)| {
            let mags: Vec<f64> = (0..nr).map(|j| values[0][k * nr + j].norm()).collect();
            let errs: Vec<f64> = (0..nr).map(|j| (values[0][k * nr + j] - values[1][k * nr + j]).norm()).collect();
            let (exponent, band, class, note) = classify(&mags, &errs, &radii, floor, cfg);
            DirectionResult { index: k, direction: dir.clone(), magnitudes: mags, errors: errs, exponent, band, class, note }
        })
        .collect();
    Ok(DecayScanResult { evaluator: u.name(), config: cfg.clone(), radii, nodes: vec![n1, n2], floor, directions })
}

/// Preset for `[t ∓ i0]^{-1}` with a unit window at the origin.
pub fn boundary_value_config() -> DecayScanConfig {
    DecayScanConfig::new(Window::ball(vec![0.0], 1.0, vec![vec![0.0]]), 2, 8.0, 2f64.sqrt(), 11)
}

/// Preset for a two-dimensional scan around a point of the future lightcone.
/// The frame uses null coordinates `x⁰ ∓ x¹`; the window reaches further
/// along the cone than across it.
pub fn lightcone_config(directions: usize) -> DecayScanConfig {
    let window = Window {
        center: vec![2.0, 2.0],
        axes: vec![
            WindowAxis { dir: vec![0.5, -0.5], half_width: 1.5, focus: vec![0.0] },
            WindowAxis { dir: vec![0.5, 0.5], half_width: 3.0, focus: vec![] },
        ],
    };
    DecayScanConfig::new(window, directions, 16.0, 2f64.sqrt(), 11)
}

/// Preset for `[x⁰ ∓ i0]^{-1}` on `ℝ^{1+1}` around `(0, 1)`.
pub fn time_boundary_config(directions: usize) -> DecayScanConfig {
    let window = Window {
        center: vec![0.0, 1.0],
        axes: vec![
            WindowAxis { dir: vec![1.0, 0.0], half_width: 1.0, focus: vec![0.0] },
            WindowAxis { dir: vec![0.0, 1.0], half_width: 2.0, focus: vec![] },
        ],
    };
    DecayScanConfig::new(window, directions, 8.0, 2f64.sqrt(), 11)
}

/// A section of a bound through its slot coordinates `coords`, probed at
/// points of the singular support inside the window.
pub struct Section<'a> {
    pub bound: &'a WavefrontBound,
    pub coords: Vec<Var>,
    pub probes: Vec<Assignment>,
}

/// Directions whose grid cell of half angle `half_angle` meets the
/// restriction of the bound's fibers over the probes. Covectors are
/// converted from displayed to Euclidean components first.
pub fn engine_singular_directions(section: &Section, dirs: &[Vec<f64>], half_angle: f64) -> Result<Vec<bool>, String> {
    use crate::scalar::Scalar;
    let mut out = vec![false; dirs.len()];
    for probe in &section.probes {
        for fam in &section.bound.families {
            let mut sys = fam.system(&section.bound.space);
            sys.balls.clear();
            if !fam.hidden.is_empty() {
                return Err("fibers with hidden coordinates are not evaluated pointwise".into());
            }
            if !sys.holds_at(probe) {
                continue;
            }
            if fam.full_fiber {
                out.iter_mut().for_each(|o| *o = true);
                continue;
            }
            let rays: Vec<(Vec<f64>, ParamSign)> = fam
                .generators
                .iter()
                .filter_map(|g| g.eval(probe).map(|c| (c, g.sign)))
                .filter(|(c, _)| !c.is_empty())
                .map(|(c, s)| {
                    let v = section
                        .coords
                        .iter()
                        .map(|var| c.get(var).map(|q| q.to_f64()).unwrap_or(0.0) * display_factor(*var) as f64)
                        .collect();
                    (v, s)
                })
                .collect();
            if rays.len() > 1 {
                return Err("fibers spanned by several generators are not supported".into());
            }
            for (v, sign) in rays {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err("a fiber restricts to zero on the section".into());
                }
                let signs: &[f64] = match sign {
                    ParamSign::Pos => &[1.0],
                    ParamSign::Neg => &[-1.0],
                    ParamSign::Nonzero | ParamSign::Free => &[1.0, -1.0],
                };
                for s in signs {
                    for (k, d) in dirs.iter().enumerate() {
                        let c = s * d.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / norm;
                        if c >= half_angle.cos() - 1e-12 {
                            out[k] = true;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{DistExpr, MapRef, PolyMap};
    use crate::poly::{RatPoly, SlotName};
    use crate::rules::wf_bound;
    use crate::scalar::int;
    use crate::space::Space;

    fn small(mut cfg: DecayScanConfig, radii: usize) -> DecayScanConfig {
        cfg.radii = radii;
        let r_max = cfg.r0 * cfg.ratio.powi(radii as i32 - 1);
        cfg.eps = EpsSchedule::new(0.5 / r_max, 6);
        cfg
    }

    #[test]
    fn transform_of_a_gaussian_matches_the_closed_form_inside_the_window() {
        // window wide enough that the cutoff is invisible at this accuracy
        let mut cfg = DecayScanConfig::new(Window::ball(vec![0.0], 12.0, vec![]), 2, 0.5, 1.3, 6);
        cfg.floor = 0.0;
        let r = decay_scan(&Gaussian { dim: 1 }, &cfg).unwrap();
        for (j, rad) in r.radii.iter().enumerate() {
            let want = (2.0 * PI).sqrt() * (-rad * rad / 2.0).exp();
            // the cutoff bump is e^{-1} at the center
            let got = r.directions[0].magnitudes[j];
            assert!((got / want - (-1.0f64).exp()).abs() < 2e-2, "r={rad}: {got} vs {want}");
        }
    }

    #[test]
    fn boundary_value_decays_on_one_side_only() {
        let r = decay_scan(&BoundaryValue { plus: false }, &boundary_value_config()).unwrap();
        // [t - i0]^{-1} transforms to 2πi θ(-k)
        assert_eq!(r.classes(), vec![DecayClass::Rapid, DecayClass::Slow], "{:#?}", r.directions);
        let slow = &r.directions[1];
        assert!(slow.exponent.abs() < 0.1);
        let plus = decay_scan(&BoundaryValue { plus: true }, &boundary_value_config()).unwrap();
        assert_eq!(plus.classes(), vec![DecayClass::Slow, DecayClass::Rapid]);
    }

    #[test]
    fn smooth_functions_decay_everywhere() {
        let r = decay_scan(&Gaussian { dim: 2 }, &small(time_boundary_config(8), 8)).unwrap();
        assert!(r.classes().iter().all(|c| *c == DecayClass::Rapid), "{:#?}", r.directions);
    }

    #[test]
    fn windows_must_avoid_excluded_points() {
        let mut cfg = lightcone_config(8);
        cfg.window.axes[1].half_width = 5.0;
        assert!(decay_scan(&Feynman2, &cfg).is_err());
    }

    #[test]
    fn csv_has_one_row_per_direction() {
        let r = decay_scan(&BoundaryValue { plus: false }, &small(boundary_value_config(), 6)).unwrap();
        assert_eq!(r.to_csv().lines().count(), 3);
    }

    fn x_probe(x: [i64; 2]) -> Assignment {
        (0..4u8).map(|i| (Var::new(SlotName::X, i), int(if i < 2 { x[i as usize] } else { 0 }))).collect()
    }

    fn x_section(b: &WavefrontBound, probe: [i64; 2]) -> Section<'_> {
        Section { bound: b, coords: vec![Var::new(SlotName::X, 0), Var::new(SlotName::X, 1)], probes: vec![x_probe(probe)] }
    }

    #[test]
    fn lightcone_scan_agrees_with_the_engine() {
        let cfg = lightcone_config(32);
        let r = decay_scan(&Feynman2, &cfg).unwrap();
        let bound = crate::cone::catalog::feynman_massless(SlotName::X);
        let sing = engine_singular_directions(&x_section(&bound, [2, 2]), &cfg.direction_vectors(), PI / 32.0).unwrap();
        assert_eq!(sing.iter().filter(|s| **s).count(), 1);
        assert!(sing[12], "the cone direction at (2, 2) is (-1, 1) in Euclidean components");
        for (d, singular) in r.directions.iter().zip(&sing) {
            let want = if *singular { DecayClass::Slow } else { DecayClass::Rapid };
            assert_eq!(d.class, want, "{d:?}");
        }
    }

    #[test]
    fn time_boundary_scan_agrees_with_the_pulled_back_bound() {
        let cfg = time_boundary_config(32);
        let r = decay_scan(&BoundaryValueTime { plus: false }, &cfg).unwrap();
        let map = PolyMap::scalar(Space::minkowski(SlotName::X), RatPoly::var(Var::new(SlotName::X, 0))).unwrap();
        let e = DistExpr::pullback(MapRef::Poly(map), DistExpr::bpow(false, 1)).unwrap();
        let bound = wf_bound(&e).result.unwrap();
        let sing = engine_singular_directions(&x_section(&bound, [0, 1]), &cfg.direction_vectors(), PI / 32.0).unwrap();
        assert_eq!(sing.iter().enumerate().filter(|(_, s)| **s).map(|(k, _)| k).collect::<Vec<_>>(), vec![16]);
        for (d, singular) in r.directions.iter().zip(&sing) {
            assert_eq!(d.class, if *singular { DecayClass::Slow } else { DecayClass::Rapid }, "{d:?}");
        }
    }

    #[test]
    fn doubling_the_nodes_reproduces_the_lightcone_transform() {
        let mut cfg = small(lightcone_config(8), 7);
        let coarse = decay_scan(&Feynman2, &cfg).unwrap();
        cfg.periods_per_panel /= 2.0;
        let fine = decay_scan(&Feynman2, &cfg).unwrap();
        assert!(fine.nodes[0] > coarse.nodes[0]);
        for (a, b) in coarse.directions.iter().zip(&fine.directions) {
            for (x, y) in a.magnitudes.iter().zip(&b.magnitudes) {
                assert!((x - y).abs() <= 1e-6 * x.max(*y) + 10.0 * coarse.floor, "{x} vs {y}");
            }
            assert_eq!(a.class, b.class);
        }
    }

    #[test]
    fn slope_fit_recovers_a_power_law() {
        let xs: Vec<f64> = (0..6).map(|i| (i as f64).exp()).map(f64::ln).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -3.0 * x + 1.0).collect();
        let (s, band) = fit_slope(&xs, &ys);
        assert!((s + 3.0).abs() < 1e-12 && band < 1e-10);
    }
}
