//! Least-squares line fits used for every rate claim.

use crate::error::{Error, Result};

/// Ordinary least-squares fit `y ≈ intercept + slope · x`.
///
/// `xs`/`ys` hold the regression inputs as fitted (for [`fit_rate`] these
/// are already log-transformed).
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

impl RateFit {
    pub fn residuals(&self) -> Vec<f64> {
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(x, y)| y - (self.intercept + self.slope * x))
            .collect()
    }

    /// Sum of squared residuals.
    pub fn ssr(&self) -> f64 {
        self.residuals().iter().map(|r| r * r).sum()
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Fit a straight line through `(xs, ys)`. Needs at least two distinct xs.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "fit_line: {} xs vs {} ys",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit_line input".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut fit = RateFit {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        slope,
        intercept,
        stderr: 0.0,
    };
    fit.stderr = if xs.len() > 2 {
        (fit.ssr() / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(fit)
}

/// Log–log rate fit: regress `ln y` on `ln n`.
///
/// Requires at least four points and strictly positive `ys`.
pub fn fit_rate(ns: &[f64], ys: &[f64]) -> Result<RateFit> {
    if ns.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "fit_rate needs at least 4 points, got {}",
            ns.len()
        )));
    }
    if let Some(bad) = ys.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::InvalidArgument(format!("fit_rate needs positive ys, got {bad}")));
    }
    if let Some(bad) = ns.iter().find(|n| !(**n > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "fit_rate needs positive abscissae, got {bad}"
        )));
    }
    let lx: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median of a slice (average of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn grid() -> Vec<f64> {
        (6..=12).map(|k| 2f64.powi(k)).collect()
    }

    #[test]
    fn exact_power_law() {
        let ns = grid();
        let ys: Vec<f64> = ns.iter().map(|n| 3.0 * n.powf(-0.5)).collect();
        let fit = fit_rate(&ns, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let ns = grid();
        let fit = fit_rate(&ns, &vec![0.2; ns.len()]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_inverse_law() {
        // 1% multiplicative noise on 8 points.
        let ns: Vec<f64> = (5..=12).map(|k| 2f64.powi(k)).collect();
        let mut rng = rng_from_seed(11);
        let ys: Vec<f64> = ns
            .iter()
            .map(|n| (1.0 / n) * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0)))
            .collect();
        let fit = fit_rate(&ns, &ys).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn residuals_are_orthogonal_to_design() {
        let xs = [0.0, 1.0, 2.5, 4.0, 7.0];
        let ys = [1.0, -0.5, 2.0, 0.3, 5.0];
        let fit = fit_line(&xs, &ys).unwrap();
        let r = fit.residuals();
        assert!(r.iter().sum::<f64>().abs() < 1e-9);
        assert!(r.iter().zip(&xs).map(|(r, x)| r * x).sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_and_short_input() {
        assert!(fit_rate(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(fit_rate(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(matches!(
            fit_line(&[1.0, 1.0], &[0.0, 2.0]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
