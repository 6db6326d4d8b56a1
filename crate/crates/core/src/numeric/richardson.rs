//! Extrapolation `ε → 0` over the schedule `ε_j = ε₀ / 2^j`, assuming an
//! expansion of the regularized value in integer powers of `ε`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub levels: usize,
}

impl EpsSchedule {
    pub fn new(eps0: f64, levels: usize) -> Self {
        assert!(eps0 > 0.0 && levels >= 2, "need a positive ε₀ and two levels");
        EpsSchedule { eps0, levels }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.levels).map(|j| self.eps0 / f64::powi(2.0, j as i32)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extrapolated {
    pub re: f64,
    pub im: f64,
    /// Distance to the extrapolant that omits the coarsest level.
    pub error: f64,
}

impl Extrapolated {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Weights `(best, previous)` with `best · I` the full extrapolant and
/// `previous · I` the one built from all levels but the coarsest. Both are
/// linear in the data, so they can be applied to whole arrays of values.
pub fn weights(levels: usize) -> (Vec<f64>, Vec<f64>) {
    let table = |first: usize| -> Vec<f64> {
        let n = levels - first;
        // row j holds the coefficient vector of the current diagonal entry
        let mut col: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; levels];
                e[first + j] = 1.0;
                e
            })
            .collect();
        for m in 1..n {
            let f = f64::powi(2.0, m as i32);
            col = (1..col.len()).map(|j| col[j].iter().zip(&col[j - 1]).map(|(a, b)| (f * a - b) / (f - 1.0)).collect()).collect();
        }
        col.pop().expect("at least one level")
    };
    (table(0), table(1))
}

pub fn extrapolate(values: &[Complex64]) -> Extrapolated {
    let (best, prev) = weights(values.len());
    let apply = |w: &[f64]| -> Complex64 { w.iter().zip(values).map(|(w, v)| v * *w).sum() };
    let (b, p) = (apply(&best), apply(&prev));
    Extrapolated { re: b.re, im: b.im, error: (b - p).norm() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_kill_low_powers() {
        for levels in 2..7 {
            let (best, prev) = weights(levels);
            let eps = EpsSchedule::new(0.3, levels).values();
            for (w, order) in [(&best, levels), (&prev, levels - 1)] {
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for k in 1..order {
                    let m: f64 = w.iter().zip(&eps).map(|(w, e)| w * e.powi(k as i32)).sum();
                    assert!(m.abs() < 1e-12, "levels={levels} k={k}: {m}");
                }
            }
        }
    }

    #[test]
    fn recovers_the_limit_of_an_analytic_family() {
        // ∫_{-1}^{1} dt / (t - iε) = 2i atan(1/ε)
        let eps = EpsSchedule::new(0.2, 6).values();
        let vals: Vec<Complex64> = eps.iter().map(|e| Complex64::new(0.0, 2.0 * (1.0 / e).atan())).collect();
        let r = extrapolate(&vals);
        assert!((r.value() - Complex64::new(0.0, std::f64::consts::PI)).norm() < 1e-7, "{r:?}");
        assert!(r.error < 1e-5);
    }
}
