//! Empirical upper-tail probabilities against sub-Gaussian bounds.

use std::io::Write;

use crate::error::Result;
use crate::stats::mean;

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub n: usize,
    /// Bounded-difference scale `B` (1 for rate-constant bounds).
    pub b: f64,
    pub t_grid: Vec<f64>,
    /// Fraction of replicates with `value − mean ≥ t`.
    pub empirical_exceed_prob: Vec<f64>,
    pub bound: Vec<f64>,
}

/// `t_k = 2 k scale / (points √n)` for `k = 1..=points`.
pub fn t_grid(n: usize, scale: f64, points: usize) -> Vec<f64> {
    let unit = 2.0 * scale / (points as f64 * (n as f64).sqrt());
    (1..=points).map(|k| k as f64 * unit).collect()
}

/// Fraction of `values` at least `t` above their mean, for each `t`.
pub fn exceedance(values: &[f64], t_grid: &[f64]) -> Vec<f64> {
    let m = mean(values);
    t_grid
        .iter()
        .map(|t| values.iter().filter(|v| **v - m >= *t).count() as f64 / values.len() as f64)
        .collect()
}

impl TailReport {
    /// Bounded-differences tail `exp(−2 n t² / B²)`.
    pub fn mcdiarmid(values: &[f64], n: usize, b: f64, t_grid: Vec<f64>) -> Self {
        let bound = t_grid
            .iter()
            .map(|t| {
                if b > 0.0 {
                    (-2.0 * n as f64 * t * t / (b * b)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            n,
            b,
            empirical_exceed_prob: exceedance(values, &t_grid),
            t_grid,
            bound,
        }
    }

    /// Rate-constant tail `exp(−k₂ n t²)`.
    pub fn with_rate(values: &[f64], n: usize, k2: f64, t_grid: Vec<f64>) -> Self {
        let bound = t_grid.iter().map(|t| (-k2 * n as f64 * t * t).exp()).collect();
        Self {
            n,
            b: 1.0,
            empirical_exceed_prob: exceedance(values, &t_grid),
            t_grid,
            bound,
        }
    }

    /// Every empirical exceedance is at most its bound.
    pub fn holds(&self) -> bool {
        self.empirical_exceed_prob
            .iter()
            .zip(&self.bound)
            .all(|(p, b)| *p <= *b)
    }

    pub const CSV_HEADER: &'static str = "n,t,empirical,bound";

    pub fn write_csv_rows<W: Write>(&self, mut out: W) -> Result<()> {
        for ((t, p), b) in self.t_grid.iter().zip(&self.empirical_exceed_prob).zip(&self.bound) {
            writeln!(out, "{},{:.16e},{:.16e},{:.16e}", self.n, t, p, b)?;
        }
        Ok(())
    }
}

/// Largest `k₂` with `P̂(dev ≥ t) ≤ exp(−k₂ n t²)` at every observed `(n, t)`;
/// infinite when no replicate ever exceeds its mean by a grid step.
pub fn fit_k2(series: &[(usize, Vec<f64>)], t_grid_of: impl Fn(usize) -> Vec<f64>) -> f64 {
    let mut k2 = f64::INFINITY;
    for (n, values) in series {
        let grid = t_grid_of(*n);
        for (t, p) in grid.iter().zip(exceedance(values, &grid)) {
            if p > 0.0 {
                // Shrink by a few ulps so the bound recomputed from k₂ still covers p.
                k2 = k2.min(-p.ln() / (*n as f64 * t * t) * (1.0 - 1e-12));
            }
        }
    }
    k2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceedance_is_monotone_and_bounded() {
        let v = [0.1, 0.4, 0.2, 0.9, 0.5, 0.3];
        let grid: Vec<f64> = (0..20).map(|k| k as f64 * 0.05).collect();
        let p = exceedance(&v, &grid);
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
        assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
        assert_eq!(*p.last().unwrap(), 0.0);
    }

    #[test]
    fn bound_matches_formula() {
        let r = TailReport::mcdiarmid(&[1.0, 2.0], 10, 2.0, vec![0.1, 0.3]);
        for (t, b) in r.t_grid.iter().zip(&r.bound) {
            assert!((b - (-2.0 * 10.0 * t * t / 4.0f64).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn fitted_k2_is_tight() {
        let series = vec![(16, vec![0.0, 0.0, 0.0, 1.0]), (64, vec![0.0, 0.1, 0.2, 0.3])];
        let k2 = fit_k2(&series, |n| t_grid(n, 1.0, 5));
        assert!(k2.is_finite() && k2 > 0.0);
        let holds = |k: f64| {
            series
                .iter()
                .all(|(n, v)| TailReport::with_rate(v, *n, k, t_grid(*n, 1.0, 5)).holds())
        };
        assert!(holds(k2));
        assert!(!holds(k2 * 1.01));
    }
}
