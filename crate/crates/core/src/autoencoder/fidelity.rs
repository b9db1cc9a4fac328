//! Idealized encoder channel for probing the encoder-fidelity condition.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::measures::DiscreteMeasure;
use crate::rng::{derive_seed, rng_from_seed};
use crate::variation::tv_between_discrete;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    /// Fraction of trials with `‖E#μ̂_n − (E#μ)̂_n‖_TV ≤ ε`.
    pub frequency: f64,
    /// The assumed lower bound `1 − k exp(−n^r ε²)`, clamped to `[0, 1]`.
    pub bound: f64,
    /// Per-atom replacement probability `min(1, k n^{−r})`.
    pub replace_prob: f64,
}

/// Simulate an encoder whose output on the sample differs from a fresh
/// encoded sample by replacing each atom independently with probability
/// `min(1, k n^{−r})`; the TV between the two atomic measures is measured
/// exactly and compared with `epsilon`.
pub fn simulate_encoder_fidelity(
    n: usize,
    epsilon: f64,
    k: f64,
    r: f64,
    trials: usize,
    seed: u64,
) -> Result<FidelityReport> {
    if n == 0 || trials == 0 {
        return invalid("fidelity simulation needs n ≥ 1 and trials ≥ 1");
    }
    if !(k >= 0.0) || !(r >= 1.0) {
        return invalid("fidelity knobs need k ≥ 0 and r ≥ 1");
    }
    let q = (k * (n as f64).powf(-r)).min(1.0);
    let reference = DiscreteMeasure::uniform(1, (0..n).map(|i| i as f64).collect(), seed)?;
    let mut hits = 0usize;
    for t in 0..trials {
        let mut rng = rng_from_seed(derive_seed(seed, &[n as u64, t as u64]));
        let pts: Vec<f64> = (0..n)
            .map(|i| {
                if rng.random::<f64>() < q {
                    (n + i) as f64
                } else {
                    i as f64
                }
            })
            .collect();
        let encoded = DiscreteMeasure::uniform(1, pts, seed)?;
        if tv_between_discrete(&encoded, &reference) <= epsilon {
            hits += 1;
        }
    }
    let bound = (1.0 - k * (-(n as f64).powf(r) * epsilon * epsilon).exp()).clamp(0.0, 1.0);
    Ok(FidelityReport {
        frequency: hits as f64 / trials as f64,
        bound,
        replace_prob: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::median;

    #[test]
    fn examples() {
        assert_eq!(
            simulate_encoder_fidelity(50, 1.0, 5.0, 1.0, 100, 1).unwrap().frequency,
            1.0
        );
        let r = simulate_encoder_fidelity(50, 0.01, 0.0, 1.0, 100, 1).unwrap();
        assert!(r.frequency <= 1.0 && r.bound == 1.0);
        assert!(simulate_encoder_fidelity(50, 0.1, 1.0, 0.5, 10, 1).is_err());
    }

    #[test]
    fn frequency_rises_with_n() {
        let freq = |n: usize| {
            let v: Vec<f64> = (0..5)
                .map(|s| simulate_encoder_fidelity(n, 0.05, 4.0, 1.0, 200, s).unwrap().frequency)
                .collect();
            median(&v)
        };
        let f: Vec<f64> = [8, 32, 128, 512].iter().map(|&n| freq(n)).collect();
        assert!(f.windows(2).all(|w| w[0] <= w[1]), "{f:?}");
        assert!(f[3] > 0.95);
    }
}
