//! End-to-end checks of the f-WAE objective and training loop.

use statrs::distribution::{ContinuousCDF, Normal};
use waelab::autoencoder::{fwae_objective, train, Activation, Mlp, WaeConfig};
use waelab::measures::{sample, DensityModel};
use waelab::stats::median;

/// `1 → 4 → 1` tanh network evaluated from its flat parameter vector.
fn forward_141(p: &[f64], x: f64) -> f64 {
    let (w1, b1, w2, b2) = (&p[0..4], &p[4..8], &p[8..12], p[12]);
    b2 + (0..4).map(|k| w2[k] * (w1[k] * x + b1[k]).tanh()).sum::<f64>()
}

/// Regularized entropic cost `⟨a, f⟩ + ⟨b, g⟩` for `|x − y|`, uniform weights.
fn entropic_cost(x: &[f64], y: &[f64], eps: f64) -> f64 {
    let (n, m) = (x.len(), y.len());
    let (la, lb) = (-(n as f64).ln(), -(m as f64).ln());
    let (mut f, mut g) = (vec![0.0; n], vec![0.0; m]);
    let lse = |v: Vec<f64>| {
        let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        mx + v.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
    };
    for _ in 0..200_000 {
        for i in 0..n {
            f[i] = -eps * lse((0..m).map(|j| lb + (g[j] - (x[i] - y[j]).abs()) / eps).collect());
        }
        for j in 0..m {
            g[j] = -eps * lse((0..n).map(|i| la + (f[i] - (x[i] - y[j]).abs()) / eps).collect());
        }
        let violation: f64 = (0..n)
            .map(|i| {
                let row: f64 = (0..m)
                    .map(|j| (la + lb + (f[i] + g[j] - (x[i] - y[j]).abs()) / eps).exp())
                    .sum();
                (row - 1.0 / n as f64).abs()
            })
            .sum();
        if violation < 1e-14 {
            break;
        }
    }
    f.iter().sum::<f64>() / n as f64 + g.iter().sum::<f64>() / m as f64
}

/// Grid TV between a Gaussian KDE of `z` and the target density, plus half
/// the kernel mass falling outside the grid.
fn kde_tv(z: &[f64], target: &DensityModel, grid: usize) -> f64 {
    let phi = Normal::new(0.0, 1.0).unwrap();
    let m = z.len() as f64;
    let (lo0, hi0) = (target.support().lo[0], target.support().hi[0]);
    let (lo, hi) = (lo0 - 0.25 * (hi0 - lo0), hi0 + 0.25 * (hi0 - lo0));
    let mean = z.iter().sum::<f64>() / m;
    let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let h = (1.06 * sd * m.powf(-0.2)).max(1e-3);
    let step = (hi - lo) / (grid - 1) as f64;
    let inside: f64 = (0..grid)
        .map(|k| {
            let t = lo + step * k as f64;
            let kde = z.iter().map(|v| (-0.5 * ((t - v) / h).powi(2)).exp()).sum::<f64>()
                / (m * h * (2.0 * std::f64::consts::PI).sqrt());
            (kde - target.pdf_1d(t)).abs()
        })
        .sum::<f64>();
    let outside: f64 = z
        .iter()
        .map(|v| phi.cdf((lo - v) / h) + phi.sf((hi - v) / h))
        .sum::<f64>()
        / m;
    0.5 * inside * step + 0.5 * outside
}

#[test]
fn objective_matches_straight_line_reimplementation() {
    let mut cfg = WaeConfig::default_1d();
    cfg.lambda = 0.7;
    cfg.sinkhorn_tol = 1e-14;
    cfg.sinkhorn_max_iter = 200_000;
    let batch = sample(&DensityModel::bump_benchmark(), 32, 17).unwrap();
    let enc = Mlp::new(&[1, 4, 1], Activation::Tanh, 3).unwrap();
    let dec = Mlp::new(&[1, 4, 1], Activation::Tanh, 4).unwrap();
    let got = fwae_objective(&enc, &dec, &batch, &cfg).unwrap();

    let (pe, pd) = (enc.params(), dec.params());
    let x = batch.values_1d();
    let z: Vec<f64> = x.iter().map(|v| forward_141(&pe, *v)).collect();
    let y: Vec<f64> = z.iter().map(|v| forward_141(&pd, *v)).collect();
    let eps = cfg.sinkhorn_epsilon;
    let recon = entropic_cost(x, &y, eps) - 0.5 * entropic_cost(x, x, eps) - 0.5 * entropic_cost(&y, &y, eps);
    let penalty = kde_tv(&z, &cfg.latent_target, cfg.kde_grid);
    let total = recon + cfg.lambda * penalty;

    assert!((got.recon_w1 - recon).abs() <= 1e-10, "{} vs {recon}", got.recon_w1);
    assert!(
        (got.latent_penalty - penalty).abs() <= 1e-10,
        "{} vs {penalty}",
        got.latent_penalty
    );
    assert!((got.total - total).abs() <= 1e-10, "{} vs {total}", got.total);
}

#[test]
fn training_on_the_bump_benchmark_improves_reconstruction() {
    let input = DensityModel::bump_benchmark();
    for seed in 0..5 {
        let cfg = WaeConfig {
            seed,
            ..WaeConfig::default_1d()
        };
        let r = train(&cfg, &input, 2048).unwrap();
        assert!(
            r.final_objective.recon_w1 < r.initial.recon_w1,
            "seed {seed}: {} ≥ {}",
            r.final_objective.recon_w1,
            r.initial.recon_w1
        );
    }
}

#[test]
fn latent_penalty_falls_as_lambda_grows() {
    let input = DensityModel::bump_benchmark();
    let medians: Vec<f64> = [0.0, 1.0, 10.0]
        .iter()
        .map(|&lambda| {
            let finals: Vec<f64> = (0..5)
                .map(|seed| {
                    let cfg = WaeConfig {
                        seed,
                        lambda,
                        epochs: 8,
                        ..WaeConfig::default_1d()
                    };
                    train(&cfg, &input, 1024).unwrap().final_objective.latent_penalty
                })
                .collect();
            median(&finals)
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}

#[test]
fn smoothed_loss_descends_on_the_benchmark() {
    let cfg = WaeConfig::default_1d();
    let r = train(&cfg, &DensityModel::bump_benchmark(), 2048).unwrap();
    assert!(r.smoothed.len() >= 10);
    assert!(r.smoothed.windows(2).all(|w| w[1] <= w[0]), "{:?}", r.smoothed);
    assert!(r.latent_yatracos.is_finite() && (0.0..=1.0).contains(&r.latent_yatracos));
}
