//! Minibatch SGD on the f-WAE objective.

use rand::seq::SliceRandom;

use super::{fwae_objective, fwae_objective_grad, Mlp, Objective, WaeConfig};
use crate::error::{Error, Result};
use crate::measures::{pushforward, sample, DensityModel, DiscreteMeasure};
use crate::rng::{derive_seed, rng_from_seed, tag};
use crate::variation::yatracos_norm;

/// Steps averaged into one point of the smoothed trace.
pub const SMOOTHING_WINDOW: usize = 10;
/// Consecutive smoothed increases (each above 1%) that count as divergence.
pub const DIVERGENCE_WINDOWS: usize = 5;
/// Size of the fixed batch on which initial and final objectives are evaluated.
const EVAL_BATCH: usize = 256;

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub enc: Mlp,
    pub dec: Mlp,
    /// Minibatch objective before each step.
    pub trace: Vec<Objective>,
    /// Means of `trace` totals over consecutive windows of 10 steps.
    pub smoothed: Vec<f64>,
    /// Objective on the fixed evaluation batch before and after training.
    pub initial: Objective,
    pub final_objective: Objective,
    /// Yatracos norm between the encoded training sample and the latent target.
    pub latent_yatracos: f64,
    /// Training sample drawn from the input model.
    pub data: DiscreteMeasure,
}

/// Train freshly initialized networks on `n` draws from `input`.
pub fn train(cfg: &WaeConfig, input: &DensityModel, n: usize) -> Result<TrainResult> {
    let (enc, dec) = cfg.init_networks(input.dim(), cfg.latent_target.dim())?;
    train_from(cfg, input, n, enc, dec)
}

fn smooth(trace: &[Objective]) -> Vec<f64> {
    trace
        .chunks_exact(SMOOTHING_WINDOW)
        .map(|w| w.iter().map(|o| o.total).sum::<f64>() / SMOOTHING_WINDOW as f64)
        .collect()
}

fn diverging(smoothed: &[f64]) -> bool {
    if smoothed.len() <= DIVERGENCE_WINDOWS {
        return false;
    }
    smoothed[smoothed.len() - DIVERGENCE_WINDOWS - 1..]
        .windows(2)
        .all(|w| w[1] > w[0] * 1.01)
}

/// Train the given networks by SGD with step `step_size / (1 + λ)`; divergence or a non-finite loss aborts with
/// [`Error::Diverged`] carrying the trace of totals.
pub fn train_from(cfg: &WaeConfig, input: &DensityModel, n: usize, mut enc: Mlp, mut dec: Mlp) -> Result<TrainResult> {
    cfg.validate()?;
    if n == 0 {
        return crate::error::invalid("training needs n ≥ 1");
    }
    let data = sample(input, n, derive_seed(cfg.seed, &[tag("train-data"), n as u64]))?;
    let eval = sample(
        input,
        EVAL_BATCH.min(n),
        derive_seed(cfg.seed, &[tag("eval-data"), n as u64]),
    )?;
    let initial = fwae_objective(&enc, &dec, &eval, cfg)?;
    let batch = cfg.batch.min(n);
    // Dividing the objective by 1 + λ keeps its minimizers and keeps the
    // penalty's effective step bounded as λ grows.
    let step = cfg.step_size / (1.0 + cfg.lambda);
    let d = data.dim();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[tag("shuffle")]));
    let mut trace = Vec::new();
    let abort = |trace: &[Objective]| Error::Diverged {
        steps: trace.len(),
        trace: trace.iter().map(|o| o.total).collect(),
    };
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for (b, idx) in order.chunks_exact(batch).enumerate() {
            let pts: Vec<f64> = idx.iter().flat_map(|&i| data.point(i).iter().copied()).collect();
            let mb = DiscreteMeasure::uniform(d, pts, derive_seed(cfg.seed, &[epoch as u64, b as u64]))?;
            let g = match fwae_objective_grad(&enc, &dec, &mb, cfg) {
                Ok(g) => g,
                Err(Error::NonFinite(_)) => return Err(abort(&trace)),
                Err(e) => return Err(e),
            };
            trace.push(g.objective);
            if trace.len() % SMOOTHING_WINDOW == 0 && diverging(&smooth(&trace)) {
                return Err(abort(&trace));
            }
            if enc.sgd_step(&g.enc, step).is_err() || dec.sgd_step(&g.dec, step).is_err() {
                return Err(abort(&trace));
            }
        }
    }
    let final_objective = match fwae_objective(&enc, &dec, &eval, cfg) {
        Ok(o) => o,
        Err(Error::NonFinite(_)) => return Err(abort(&trace)),
        Err(e) => return Err(e),
    };
    let class = cfg.evaluation_class()?;
    let encoded = pushforward(&data, |x| enc.forward(x))?;
    let latent_yatracos = yatracos_norm(&encoded, &cfg.latent_target, &class)?;
    Ok(TrainResult {
        smoothed: smooth(&trace),
        enc,
        dec,
        trace,
        initial,
        final_objective,
        latent_yatracos,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::Activation;

    #[test]
    fn divergence_rule() {
        assert!(!diverging(&[1.0, 1.1, 1.2, 1.3, 1.4]));
        assert!(diverging(&[1.0, 1.1, 1.2, 1.3, 1.4, 1.5]));
        assert!(!diverging(&[1.0, 1.1, 1.2, 1.3, 1.305, 1.5]));
    }

    #[test]
    fn near_identity_start_descends_on_latent_input() {
        let mut cfg = WaeConfig::default_1d();
        cfg.epochs = 3;
        cfg.batch = 32;
        cfg.seed = 4;
        cfg.step_size = 0.002;
        let input = cfg.latent_target.clone();
        let enc = Mlp::near_identity(4, Activation::Relu, 1).unwrap();
        let dec = Mlp::near_identity(4, Activation::Relu, 2).unwrap();
        let r = train_from(&cfg, &input, 256, enc, dec).unwrap();
        assert!(
            r.final_objective.total < r.initial.total,
            "{:?} vs {:?}",
            r.final_objective,
            r.initial
        );
        assert!(r.latent_yatracos >= 0.0 && r.latent_yatracos <= 1.0);
    }

    #[test]
    fn huge_step_is_reported_as_divergence() {
        // Linear networks have no saturation, so an oversized step grows geometrically.
        let mut cfg = WaeConfig::default_1d();
        cfg.step_size = 50.0;
        cfg.epochs = 50;
        cfg.batch = 16;
        let enc = Mlp::new(&[1, 1], Activation::Tanh, 1).unwrap();
        let dec = Mlp::new(&[1, 1], Activation::Tanh, 2).unwrap();
        match train_from(&cfg, &DensityModel::bump_benchmark(), 64, enc, dec) {
            Err(Error::Diverged { steps, trace }) => assert_eq!(steps, trace.len()),
            Err(e) => panic!("unexpected error {e}"),
            Ok(r) => panic!("expected divergence, final {:?}", r.final_objective),
        }
    }
}
