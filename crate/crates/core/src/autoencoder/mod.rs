//! Toy autoencoders trained on the f-WAE objective: W1 reconstruction plus
//! `λ` times a total-variation penalty between the encoded sample and the
//! latent target.
//!
//! Training differentiates a Sinkhorn divergence (reconstruction) and a
//! smooth TV surrogate (latent penalty). All reported latent discrepancies
//! are computed with the Yatracos estimator from [`crate::variation`].

mod decomposition;
mod fidelity;
mod mlp;
mod monge;
mod objective;
mod train;

pub use decomposition::{decompose_error, decompose_error_with_samples, ErrorDecomposition, REFERENCE_FACTOR};
pub use fidelity::{simulate_encoder_fidelity, FidelityReport};
pub use mlp::{Activation, ForwardCache, Mlp};
pub use monge::{monge_map_1d, MongeMap1d};
pub use objective::{fwae_objective, fwae_objective_grad, gradient_check, GradCheck, Objective, ObjectiveGrad};
pub use train::{train, train_from, TrainResult};

use crate::error::{invalid, Result};
use crate::measures::DensityModel;
use crate::transport::MetricTag;
use crate::variation::CandidateClass;

/// Differentiable stand-in for the latent TV term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvSurrogate {
    /// `½ Σ_g |kde(z_g) − p_ρ(z_g)| Δz` on a grid over the latent support.
    KdeGridTV,
    /// Energy distance to a same-size sample of the latent target.
    EnergySurrogate,
}

impl TvSurrogate {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kde" | "kdegridtv" | "kde-grid-tv" => Ok(TvSurrogate::KdeGridTV),
            "energy" | "energysurrogate" => Ok(TvSurrogate::EnergySurrogate),
            other => Err(crate::Error::Config(format!("unknown TV surrogate `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WaeConfig {
    /// Penalty multiplier `λ ≥ 0`.
    pub lambda: f64,
    /// Constraint level `t ≥ 0` of the budgeted form (reported, not enforced).
    pub t_budget: f64,
    pub latent_target: DensityModel,
    pub cost_metric: MetricTag,
    pub tv_surrogate: TvSurrogate,
    /// Encoder-fidelity knobs `(k ≥ 0, r ≥ 1)`.
    pub encoder_fidelity: (f64, f64),
    pub epochs: usize,
    pub batch: usize,
    pub step_size: f64,
    pub seed: u64,
    /// Hidden widths of encoder and decoder.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub sinkhorn_epsilon: f64,
    pub sinkhorn_max_iter: usize,
    pub sinkhorn_tol: f64,
    /// Grid points for the KDE surrogate.
    pub kde_grid: usize,
    /// Standard deviation of the optional Gaussian encoder head (0 = deterministic).
    pub encoder_noise_sd: f64,
    /// Class used for the reported latent Yatracos norm; derived from the
    /// latent target when absent.
    pub eval_class: Option<CandidateClass>,
}

impl WaeConfig {
    /// Defaults for one-dimensional data with a standard Gaussian latent.
    pub fn default_1d() -> Self {
        Self {
            lambda: 1.0,
            t_budget: 0.0,
            latent_target: DensityModel::gaussian_1d(0.0, 1.0).expect("standard gaussian"),
            cost_metric: MetricTag::Euclidean,
            tv_surrogate: TvSurrogate::KdeGridTV,
            encoder_fidelity: (1.0, 1.0),
            epochs: 4,
            batch: 64,
            step_size: 0.05,
            seed: 0,
            hidden: vec![16],
            activation: Activation::Tanh,
            sinkhorn_epsilon: 0.1,
            sinkhorn_max_iter: 2000,
            sinkhorn_tol: 1e-6,
            kde_grid: 256,
            encoder_noise_sd: 0.0,
            eval_class: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.t_budget >= 0.0) {
            return invalid("lambda and t_budget must be nonnegative");
        }
        let (k, r) = self.encoder_fidelity;
        if !(k >= 0.0) || !(r >= 1.0) {
            return invalid("encoder fidelity needs k ≥ 0 and r ≥ 1");
        }
        if self.batch == 0 || self.epochs == 0 {
            return invalid("batch and epochs must be positive");
        }
        if !(self.step_size > 0.0) || !(self.sinkhorn_epsilon > 0.0) {
            return invalid("step size and sinkhorn epsilon must be positive");
        }
        if self.kde_grid < 8 {
            return invalid("KDE grid needs at least 8 points");
        }
        if self.hidden.len() > 3 || self.hidden.iter().any(|w| *w == 0 || *w > 32) {
            return invalid("networks are limited to at most 3 hidden layers of width ≤ 32");
        }
        if !(self.encoder_noise_sd >= 0.0) {
            return invalid("encoder noise must be nonnegative");
        }
        Ok(())
    }

    /// Evaluation class: the configured one, or for a one-dimensional
    /// Gaussian latent `N(m, s²)` the class `{N(m, s²), N(m + s/2, s²), N(m, (1.5 s)²)}`.
    pub fn evaluation_class(&self) -> Result<CandidateClass> {
        if let Some(c) = &self.eval_class {
            return Ok(c.clone());
        }
        match self.latent_target.family() {
            crate::measures::ModelFamily::Gaussian { mean, cov } if mean.len() == 1 => {
                let (m, s) = (mean[0], cov[0].sqrt());
                CandidateClass::new(
                    vec![
                        self.latent_target.clone(),
                        DensityModel::gaussian_1d(m + 0.5 * s, s)?,
                        DensityModel::gaussian_1d(m, 1.5 * s)?,
                    ],
                    3,
                )
            }
            _ => Err(crate::Error::Config(
                "an evaluation class is required for non-Gaussian latent targets".into(),
            )),
        }
    }

    fn widths(&self, input: usize, output: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend(&self.hidden);
        w.push(output);
        w
    }

    /// Freshly initialized encoder and decoder for the given data and latent dimensions.
    pub fn init_networks(&self, data_dim: usize, latent_dim: usize) -> Result<(Mlp, Mlp)> {
        let enc = Mlp::new(
            &self.widths(data_dim, latent_dim),
            self.activation,
            crate::rng::derive_seed(self.seed, &[1]),
        )?;
        let dec = Mlp::new(
            &self.widths(latent_dim, data_dim),
            self.activation,
            crate::rng::derive_seed(self.seed, &[2]),
        )?;
        Ok((enc, dec))
    }
}
