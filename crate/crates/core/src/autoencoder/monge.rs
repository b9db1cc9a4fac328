//! Optimal transport maps on the line.

use crate::error::{Error, Result};
use crate::measures::DensityModel;

/// `T = F_target⁻¹ ∘ F_source`, the monotone map pushing `source` onto `target`.
#[derive(Debug, Clone)]
pub struct MongeMap1d {
    source: DensityModel,
    target: DensityModel,
}

impl MongeMap1d {
    pub fn apply(&self, x: f64) -> Result<f64> {
        let p = self.source.cdf(x)?;
        self.target.quantile(p)
    }

    /// The map in the opposite direction, `F_source⁻¹ ∘ F_target`.
    pub fn inverse(&self) -> MongeMap1d {
        MongeMap1d {
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }

    pub fn source(&self) -> &DensityModel {
        &self.source
    }

    pub fn target(&self) -> &DensityModel {
        &self.target
    }
}

pub fn monge_map_1d(source: &DensityModel, target: &DensityModel) -> Result<MongeMap1d> {
    for m in [source, target] {
        if m.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: m.dim(),
            });
        }
        if m.is_point_mass() {
            return Err(Error::Unsupported(
                "a point mass has no invertible distribution function".into(),
            ));
        }
    }
    Ok(MongeMap1d {
        source: source.clone(),
        target: target.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{pushforward_1d, sample};
    use crate::stats::fit_rate;
    use crate::transport::w1_sorted_1d;

    #[test]
    fn identity_and_affine_cases() {
        let g = DensityModel::gaussian_1d(0.0, 1.0).unwrap();
        let t = monge_map_1d(&g, &g).unwrap();
        for k in 1..100 {
            let x = g.quantile(k as f64 / 100.0).unwrap();
            assert!((t.apply(x).unwrap() - x).abs() < 1e-8);
        }
        let u1 = DensityModel::uniform_1d(0.0, 1.0).unwrap();
        let u2 = DensityModel::uniform_1d(0.0, 2.0).unwrap();
        let t = monge_map_1d(&u1, &u2).unwrap();
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            assert!((t.apply(x).unwrap() - 2.0 * x).abs() < 1e-8);
        }
        let t = monge_map_1d(&g, &DensityModel::gaussian_1d(1.0, 1.0).unwrap()).unwrap();
        for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            assert!((t.apply(x).unwrap() - (x + 1.0)).abs() < 1e-3);
        }
    }

    #[test]
    fn inverse_undoes_the_map() {
        let b = DensityModel::bump_benchmark();
        let g = DensityModel::gaussian_1d(0.0, 1.0).unwrap();
        let t = monge_map_1d(&g, &b).unwrap();
        let ti = t.inverse();
        for x in [-2.0, -0.3, 0.0, 1.1, 2.5] {
            assert!((ti.apply(t.apply(x).unwrap()).unwrap() - x).abs() < 1e-8);
        }
    }

    #[test]
    fn pushforward_approaches_target() {
        let src = DensityModel::gaussian_1d(0.0, 1.0).unwrap();
        let dst = DensityModel::bump_benchmark();
        let t = monge_map_1d(&src, &dst).unwrap();
        let ns: Vec<f64> = (6..=12).map(|k| (1usize << k) as f64).collect();
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let n = n as usize;
                let reps = 8;
                (0..reps)
                    .map(|r| {
                        let x = sample(&src, n, 100 + r).unwrap();
                        let y = pushforward_1d(&x, |v| t.apply(v).unwrap()).unwrap();
                        let z = sample(&dst, n, 900 + r).unwrap();
                        w1_sorted_1d(y.values_1d(), z.values_1d()).unwrap()
                    })
                    .sum::<f64>()
                    / reps as f64
            })
            .collect();
        let fit = fit_rate(&ns, &errs).unwrap();
        assert!(fit.slope < 0.0, "{fit:?}");
    }
}
