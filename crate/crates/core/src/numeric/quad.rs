//! Gauss–Legendre rules and composite meshes on intervals.

use std::f64::consts::PI;

/// Nodes and weights on `[-1, 1]`, by Newton iteration on `P_n` from the
/// Chebyshev guesses. Exact for polynomials of degree `< 2n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // P_n' from the recurrence
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// A quadrature rule on an interval.
#[derive(Clone, Debug, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `n`-point Gauss–Legendre on each panel between consecutive breakpoints.
    pub fn composite(breaks: &[f64], n: usize) -> Rule {
        let (x, w) = gauss_legendre(n);
        let mut r = Rule::default();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (h, m) = ((b - a) / 2.0, (a + b) / 2.0);
            for (xi, wi) in x.iter().zip(&w) {
                r.nodes.push(m + h * xi);
                r.weights.push(h * wi);
            }
        }
        r
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Breakpoints on `[a, b]` with panels no wider than `width`, refined
/// geometrically toward each focus point down to panels of size `h_min`.
pub fn graded_breaks(a: f64, b: f64, width: f64, focus: &[f64], h_min: f64) -> Vec<f64> {
    assert!(b > a && width > 0.0);
    let mut pts: Vec<f64> = vec![a, b];
    for &c in focus {
        if c <= a || c >= b {
            continue;
        }
        pts.push(c);
        let mut h = h_min;
        while h < b - a {
            for p in [c - h, c + h] {
                if p > a && p < b {
                    pts.push(p);
                }
            }
            h *= 2.0;
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let mut out = vec![pts[0]];
    for pair in pts.windows(2) {
        let pieces = ((pair[1] - pair[0]) / width).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            out.push(pair[0] + (pair[1] - pair[0]) * k as f64 / pieces as f64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_are_exact_on_polynomials() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let want = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n={n} d={d}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn graded_mesh_resolves_a_log_singularity() {
        let breaks = graded_breaks(-1.0, 1.0, 0.25, &[0.0], 1e-12);
        assert!(breaks.windows(2).all(|p| p[1] > p[0]));
        let r = Rule::composite(&breaks, 12);
        // ∫_{-1}^{1} ln|x| dx = -2
        assert!((r.integrate(|x| x.abs().ln()) + 2.0).abs() < 1e-10);
    }

    #[test]
    fn composite_rules_converge_on_oscillations() {
        let exact = (50.0f64).sin() / 25.0; // ∫_{-1}^{1} cos(50x) dx
        let r = Rule::composite(&graded_breaks(-1.0, 1.0, 2.0 * PI / 50.0, &[], 1.0), 12);
        assert!((r.integrate(|x| (50.0 * x).cos()) - exact).abs() < 1e-12);
    }
}
