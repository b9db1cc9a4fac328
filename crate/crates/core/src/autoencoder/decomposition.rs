//! Splitting the reconstruction error of an encoder/decoder pair into encoder,
//! decoder and sampling contributions on the line.

use std::io::Write;

use super::MongeMap1d;
use crate::error::{Error, Result};
use crate::measures::{sample, DensityModel, DiscreteMeasure};
use crate::rng::{derive_seed, tag};
use crate::transport::w1_exact_1d;

/// Multiplier from the sample size to the reference sample size.
pub const REFERENCE_FACTOR: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorDecomposition {
    /// `W1((D∘E)#μ̂_n, D#ρ̂_N)`, the encoder approximation error.
    pub e1: f64,
    /// `W1(D#ρ̂_N, T#ρ̂_N)`, the decoder approximation error.
    pub e2: f64,
    /// `W1(μ̂_n, μ̃_N)`, the statistical estimation error.
    pub e3: f64,
    /// `W1((D∘E)#μ̂_n, μ̃_N)`.
    pub total: f64,
    /// `e1 + e2 + 2 e3 − total`.
    pub slack: f64,
    /// `W1(μ̃_N, μ̃_2N)`, the size of the reference substitution, when computed.
    pub reference_diagnostic: Option<f64>,
}

impl ErrorDecomposition {
    pub const CSV_HEADER: &'static str = "e1,e2,e3,total,slack,reference_diagnostic";

    pub fn write_csv_row<W: Write>(&self, mut out: W) -> Result<()> {
        let diag = self
            .reference_diagnostic
            .map_or_else(|| "nan".to_string(), |v| format!("{v:.16e}"));
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.e1, self.e2, self.e3, self.total, self.slack, diag
        )?;
        Ok(())
    }
}

fn map_measure(m: &DiscreteMeasure, f: &dyn Fn(f64) -> Result<f64>) -> Result<DiscreteMeasure> {
    let mut out = Vec::with_capacity(m.len());
    for (index, &x) in m.values_1d().iter().enumerate() {
        let y = f(x)?;
        if !y.is_finite() {
            return Err(Error::NonFiniteMap { index });
        }
        out.push(y);
    }
    DiscreteMeasure::new(1, out, m.weights().to_vec(), m.seed())
}

fn require_line(m: &DensityModel) -> Result<()> {
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: m.dim(),
        });
    }
    Ok(())
}

/// Decomposition from explicit samples: `mu_hat` is the data sample,
/// `rho_hat` a latent sample and `t` the Monge map from the latent target
/// to the input law. The reference measure is `μ̃ = T#ρ̂`.
pub fn decompose_error_with_samples(
    enc: &dyn Fn(f64) -> Result<f64>,
    dec: &dyn Fn(f64) -> Result<f64>,
    mu_hat: &DiscreteMeasure,
    rho_hat: &DiscreteMeasure,
    t: &MongeMap1d,
) -> Result<ErrorDecomposition> {
    for m in [mu_hat, rho_hat] {
        if m.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: m.dim(),
            });
        }
    }
    let reconstructed = map_measure(mu_hat, &|x| dec(enc(x)?))?;
    let decoded_latent = map_measure(rho_hat, dec)?;
    let reference = map_measure(rho_hat, &|z| t.apply(z))?;
    let e1 = w1_exact_1d(&reconstructed, &decoded_latent)?;
    let e2 = w1_exact_1d(&decoded_latent, &reference)?;
    let e3 = w1_exact_1d(mu_hat, &reference)?;
    let total = w1_exact_1d(&reconstructed, &reference)?;
    Ok(ErrorDecomposition {
        e1,
        e2,
        e3,
        total,
        slack: e1 + e2 + 2.0 * e3 - total,
        reference_diagnostic: None,
    })
}

/// Decompose the error of `(enc, dec)` on `n` draws from `input` with a
/// latent sample of size `N = 20 n` from `latent`; also reports
/// `W1(μ̃_N, μ̃_2N)` from an independent latent sample of size `2N`.
pub fn decompose_error(
    enc: &dyn Fn(f64) -> Result<f64>,
    dec: &dyn Fn(f64) -> Result<f64>,
    input: &DensityModel,
    latent: &DensityModel,
    n: usize,
    seed: u64,
) -> Result<ErrorDecomposition> {
    require_line(input)?;
    require_line(latent)?;
    if n == 0 {
        return crate::error::invalid("decomposition needs n ≥ 1");
    }
    let big = REFERENCE_FACTOR * n;
    let t = super::monge_map_1d(latent, input)?;
    let mu_hat = sample(input, n, derive_seed(seed, &[tag("decomp-data"), n as u64]))?;
    let rho_hat = sample(latent, big, derive_seed(seed, &[tag("decomp-latent"), n as u64]))?;
    let mut out = decompose_error_with_samples(enc, dec, &mu_hat, &rho_hat, &t)?;
    let rho_double = sample(latent, 2 * big, derive_seed(seed, &[tag("decomp-latent-2"), n as u64]))?;
    let reference = map_measure(&rho_hat, &|z| t.apply(z))?;
    let reference_double = map_measure(&rho_double, &|z| t.apply(z))?;
    out.reference_diagnostic = Some(w1_exact_1d(&reference, &reference_double)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{monge_map_1d, Activation, Mlp};

    fn latent() -> DensityModel {
        DensityModel::gaussian_1d(0.0, 1.0).unwrap()
    }

    #[test]
    fn oracle_maps_have_no_decoder_error() {
        let input = DensityModel::bump_benchmark();
        let t = monge_map_1d(&latent(), &input).unwrap();
        let t_inv = t.inverse();
        let d = decompose_error(&|x| t_inv.apply(x), &|z| t.apply(z), &input, &latent(), 128, 3).unwrap();
        assert!(d.e2 < 1e-12, "{d:?}");
        assert!((d.total - d.e1).abs() < 1e-6, "{d:?}");
        assert!(d.slack >= -1e-6);
        assert!(d.reference_diagnostic.unwrap() > 0.0);
    }

    #[test]
    fn identical_data_and_reference_give_zero_e3() {
        let input = DensityModel::uniform_1d(0.0, 2.0).unwrap();
        let t = monge_map_1d(&latent(), &input).unwrap();
        let rho_hat = sample(&latent(), 200, 5).unwrap();
        let mu_hat = map_measure(&rho_hat, &|z| t.apply(z)).unwrap();
        let enc = Mlp::new(&[1, 3, 1], Activation::Tanh, 1).unwrap();
        let dec = Mlp::new(&[1, 3, 1], Activation::Tanh, 2).unwrap();
        let d = decompose_error_with_samples(
            &|x| Ok(enc.forward_1d(x)),
            &|z| Ok(dec.forward_1d(z)),
            &mu_hat,
            &rho_hat,
            &t,
        )
        .unwrap();
        assert_eq!(d.e3, 0.0);
        assert!(d.slack >= -1e-6, "{d:?}");
    }

    #[test]
    fn rejects_multivariate_input() {
        let id = |x: f64| Ok(x);
        let err = decompose_error(&id, &id, &DensityModel::unit_cube(2), &latent(), 8, 1);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn csv_row_has_six_fields() {
        let d = ErrorDecomposition {
            e1: 0.1,
            e2: 0.2,
            e3: 0.3,
            total: 0.4,
            slack: 0.8,
            reference_diagnostic: None,
        };
        let mut buf = Vec::new();
        d.write_csv_row(&mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(
            line.trim().split(',').count(),
            ErrorDecomposition::CSV_HEADER.split(',').count()
        );
    }
}
