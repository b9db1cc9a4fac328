//! The f-WAE objective, its parameter gradient and a finite-difference check.

use rand_distr::{Distribution, StandardNormal};

use super::{Mlp, TvSurrogate, WaeConfig};
use crate::error::{invalid, Error, Result};
use crate::measures::{sample, std_normal_cdf, std_normal_pdf, DensityModel, DiscreteMeasure};
use crate::rng::{derive_seed, rng_from_seed, tag};
use crate::transport::sinkhorn::sinkhorn_divergence_grad;
use crate::transport::SinkhornOptions;

/// Smallest KDE bandwidth, used when the encoded batch collapses.
const MIN_BANDWIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub total: f64,
    pub recon_w1: f64,
    pub latent_penalty: f64,
}

/// Objective value with parameter gradients, split by component.
#[derive(Debug, Clone)]
pub struct ObjectiveGrad {
    pub objective: Objective,
    /// Gradient of `total` with respect to encoder and decoder parameters.
    pub enc: Vec<f64>,
    pub dec: Vec<f64>,
    pub recon_enc: Vec<f64>,
    pub recon_dec: Vec<f64>,
    /// The penalty does not depend on the decoder.
    pub penalty_enc: Vec<f64>,
}

/// Codes of the batch: `E(x_j) + σ ξ_j` with `ξ_j` fixed by the batch seed.
fn encode(enc: &Mlp, batch: &DiscreteMeasure, cfg: &WaeConfig) -> (Vec<super::ForwardCache>, Vec<f64>) {
    let dz = enc.output_dim();
    let caches: Vec<_> = (0..batch.len()).map(|j| enc.forward_cached(batch.point(j))).collect();
    let mut z: Vec<f64> = caches.iter().flat_map(|c| c.output.iter().copied()).collect();
    if cfg.encoder_noise_sd > 0.0 {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, &[batch.seed(), tag("encoder-noise")]));
        for v in z.iter_mut() {
            let xi: f64 = StandardNormal.sample(&mut rng);
            *v += cfg.encoder_noise_sd * xi;
        }
    }
    debug_assert_eq!(z.len(), dz * batch.len());
    (caches, z)
}

fn check_inputs(enc: &Mlp, dec: &Mlp, batch: &DiscreteMeasure, cfg: &WaeConfig) -> Result<()> {
    if batch.is_empty() {
        return invalid("objective needs a nonempty batch");
    }
    if !batch.has_uniform_weights() {
        return invalid("objective expects a uniformly weighted batch");
    }
    if enc.input_dim() != batch.dim() || dec.output_dim() != batch.dim() {
        return Err(Error::DimensionMismatch {
            expected: batch.dim(),
            got: if enc.input_dim() != batch.dim() {
                enc.input_dim()
            } else {
                dec.output_dim()
            },
        });
    }
    if enc.output_dim() != dec.input_dim() || enc.output_dim() != cfg.latent_target.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.latent_target.dim(),
            got: enc.output_dim(),
        });
    }
    Ok(())
}

fn sinkhorn_opts(cfg: &WaeConfig) -> SinkhornOptions {
    SinkhornOptions::new(cfg.sinkhorn_epsilon, cfg.sinkhorn_max_iter).with_tol(cfg.sinkhorn_tol)
}

/// Total, reconstruction and latent-penalty values of the f-WAE objective.
///
/// The reconstruction term is the debiased Sinkhorn divergence between the
/// batch and its reconstruction, which vanishes when `D∘E` is the identity.
pub fn fwae_objective(enc: &Mlp, dec: &Mlp, batch: &DiscreteMeasure, cfg: &WaeConfig) -> Result<Objective> {
    Ok(evaluate(enc, dec, batch, cfg, false)?.objective)
}

/// Objective together with its gradient with respect to all parameters.
pub fn fwae_objective_grad(enc: &Mlp, dec: &Mlp, batch: &DiscreteMeasure, cfg: &WaeConfig) -> Result<ObjectiveGrad> {
    evaluate(enc, dec, batch, cfg, true)
}

fn evaluate(enc: &Mlp, dec: &Mlp, batch: &DiscreteMeasure, cfg: &WaeConfig, want_grad: bool) -> Result<ObjectiveGrad> {
    check_inputs(enc, dec, batch, cfg)?;
    let (m, dx, dz) = (batch.len(), batch.dim(), enc.output_dim());
    let (enc_caches, z) = encode(enc, batch, cfg);
    let dec_caches: Vec<_> = (0..m).map(|j| dec.forward_cached(&z[j * dz..(j + 1) * dz])).collect();
    let recon_pts: Vec<f64> = dec_caches.iter().flat_map(|c| c.output.iter().copied()).collect();
    if recon_pts.iter().chain(&z).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("network output".into()));
    }
    let recon = DiscreteMeasure::uniform(dx, recon_pts, batch.seed())?;
    let (recon_w1, d_recon) = sinkhorn_divergence_grad(batch, &recon, cfg.cost_metric, sinkhorn_opts(cfg), want_grad)?;
    let (latent_penalty, d_pen_z) = latent_penalty(&z, dz, batch.seed(), cfg, want_grad)?;
    let total = recon_w1 + cfg.lambda * latent_penalty;
    if !total.is_finite() || !recon_w1.is_finite() || !latent_penalty.is_finite() {
        return Err(Error::NonFinite(format!(
            "objective (recon {recon_w1}, penalty {latent_penalty})"
        )));
    }
    let objective = Objective {
        total,
        recon_w1,
        latent_penalty,
    };
    if !want_grad {
        return Ok(ObjectiveGrad {
            objective,
            enc: Vec::new(),
            dec: Vec::new(),
            recon_enc: Vec::new(),
            recon_dec: Vec::new(),
            penalty_enc: Vec::new(),
        });
    }
    let mut recon_dec = vec![0.0; dec.n_params()];
    let mut recon_enc = vec![0.0; enc.n_params()];
    let mut penalty_enc = vec![0.0; enc.n_params()];
    for j in 0..m {
        let dz_recon = dec.backward(&dec_caches[j], &d_recon[j * dx..(j + 1) * dx], &mut recon_dec);
        enc.backward(&enc_caches[j], &dz_recon, &mut recon_enc);
        enc.backward(&enc_caches[j], &d_pen_z[j * dz..(j + 1) * dz], &mut penalty_enc);
    }
    let enc_total = recon_enc
        .iter()
        .zip(&penalty_enc)
        .map(|(r, p)| r + cfg.lambda * p)
        .collect();
    Ok(ObjectiveGrad {
        objective,
        enc: enc_total,
        dec: recon_dec.clone(),
        recon_enc,
        recon_dec,
        penalty_enc,
    })
}

/// Surrogate TV between the codes and the latent target, with its gradient
/// with respect to the codes.
fn latent_penalty(z: &[f64], dz: usize, batch_seed: u64, cfg: &WaeConfig, want_grad: bool) -> Result<(f64, Vec<f64>)> {
    match cfg.tv_surrogate {
        TvSurrogate::KdeGridTV => {
            if dz != 1 {
                return Err(Error::Unsupported(
                    "the KDE surrogate needs a one-dimensional latent".into(),
                ));
            }
            Ok(kde_grid_tv(z, &cfg.latent_target, cfg.kde_grid, want_grad))
        }
        TvSurrogate::EnergySurrogate => {
            let seed = derive_seed(cfg.seed, &[batch_seed, tag("latent-reference")]);
            let reference = sample(&cfg.latent_target, z.len() / dz, seed)?;
            Ok(energy_distance(z, reference.points(), dz, want_grad))
        }
    }
}

/// `½ Σ_g |kde(t_g) − p(t_g)| Δ + ½ (kde mass outside the grid)` with a
/// Gaussian kernel of bandwidth `1.06 σ̂ m^{−1/5}`. The grid covers the
/// target support widened by a quarter of its width on each side.
struct KdeGrid {
    lo: f64,
    hi: f64,
    step: f64,
    mean: f64,
    sd: f64,
    h: f64,
    floored: bool,
}

impl KdeGrid {
    fn new(z: &[f64], target: &DensityModel, grid: usize) -> Self {
        let mf = z.len() as f64;
        let (lo0, hi0) = (target.support().lo[0], target.support().hi[0]);
        let margin = 0.25 * (hi0 - lo0);
        let (lo, hi) = (lo0 - margin, hi0 + margin);
        let mean = z.iter().sum::<f64>() / mf;
        let sd = if z.len() > 1 {
            (z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (mf - 1.0)).sqrt()
        } else {
            0.0
        };
        let raw_h = 1.06 * sd * mf.powf(-0.2);
        let floored = raw_h < MIN_BANDWIDTH;
        Self {
            lo,
            hi,
            step: (hi - lo) / (grid - 1) as f64,
            mean,
            sd,
            h: if floored { MIN_BANDWIDTH } else { raw_h },
            floored,
        }
    }

    fn kde(&self, z: &[f64], t: f64) -> f64 {
        z.iter().map(|zj| std_normal_pdf((t - zj) / self.h)).sum::<f64>() / (z.len() as f64 * self.h)
    }
}

pub(crate) fn kde_grid_tv(z: &[f64], target: &DensityModel, grid: usize, want_grad: bool) -> (f64, Vec<f64>) {
    let m = z.len();
    let mf = m as f64;
    let KdeGrid {
        lo,
        hi,
        step,
        mean,
        sd,
        h,
        floored,
    } = KdeGrid::new(z, target, grid);

    let mut value = 0.0;
    let mut dz = vec![0.0; if want_grad { m } else { 0 }];
    let mut dh = 0.0;
    for g in 0..grid {
        let t = lo + step * g as f64;
        let mut kde = 0.0;
        for &zj in z {
            kde += std_normal_pdf((t - zj) / h);
        }
        kde /= mf * h;
        let diff = kde - target.pdf_1d(t);
        value += 0.5 * diff.abs() * step;
        if want_grad && diff != 0.0 {
            let s = 0.5 * step * diff.signum();
            for (j, &zj) in z.iter().enumerate() {
                let u = (t - zj) / h;
                let phi = std_normal_pdf(u);
                dz[j] += s * u * phi / (mf * h * h);
                dh += s * phi * (u * u - 1.0) / (mf * h * h);
            }
        }
    }
    // Mass the kernel estimate places outside the grid has no target mass there.
    for (j, &zj) in z.iter().enumerate() {
        let (ul, uh) = ((lo - zj) / h, (hi - zj) / h);
        value += 0.5 * (std_normal_cdf(ul) + 1.0 - std_normal_cdf(uh)) / mf;
        if want_grad {
            let (pl, ph) = (std_normal_pdf(ul), std_normal_pdf(uh));
            dz[j] += 0.5 * (-pl + ph) / (mf * h);
            dh += 0.5 * (-pl * ul + ph * uh) / (mf * h);
        }
    }
    if want_grad && !floored && sd > 0.0 {
        // h depends on every code through σ̂.
        let dh_dsd = 1.06 * mf.powf(-0.2);
        for (j, &zj) in z.iter().enumerate() {
            dz[j] += dh * dh_dsd * (zj - mean) / ((mf - 1.0) * sd);
        }
    }
    (value, dz)
}

/// V-statistic energy distance `2E‖Z−Y‖ − E‖Z−Z'‖ − E‖Y−Y'‖` between the
/// codes and a reference sample, with the gradient with respect to the codes.
pub(crate) fn energy_distance(z: &[f64], y: &[f64], d: usize, want_grad: bool) -> (f64, Vec<f64>) {
    let (m, k) = (z.len() / d, y.len() / d);
    let (mf, kf) = (m as f64, k as f64);
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let mut grad = vec![0.0; if want_grad { z.len() } else { 0 }];
    let mut cross = 0.0;
    let mut within_z = 0.0;
    let mut within_y = 0.0;
    for j in 0..m {
        let zj = &z[j * d..(j + 1) * d];
        for l in 0..k {
            let yl = &y[l * d..(l + 1) * d];
            let r = dist(zj, yl);
            cross += r;
            if want_grad && r > 0.0 {
                for c in 0..d {
                    grad[j * d + c] += 2.0 * (zj[c] - yl[c]) / (r * mf * kf);
                }
            }
        }
        for l in 0..m {
            let zl = &z[l * d..(l + 1) * d];
            let r = dist(zj, zl);
            within_z += r;
            if want_grad && r > 0.0 {
                // Each unordered pair appears twice in the double sum.
                for c in 0..d {
                    grad[j * d + c] -= 2.0 * (zj[c] - zl[c]) / (r * mf * mf);
                }
            }
        }
    }
    for j in 0..k {
        for l in 0..k {
            within_y += dist(&y[j * d..(j + 1) * d], &y[l * d..(l + 1) * d]);
        }
    }
    let value = 2.0 * cross / (mf * kf) - within_z / (mf * mf) - within_y / (kf * kf);
    (value, grad)
}

/// Sign pattern of every difference that enters the loss through an absolute
/// value: data against reconstructions, reconstructions and codes among
/// themselves, codes against the energy reference, and the KDE residual at
/// each grid point. The loss is smooth wherever this pattern is locally constant.
fn kink_signature(enc: &Mlp, dec: &Mlp, batch: &DiscreteMeasure, cfg: &WaeConfig) -> Result<Vec<bool>> {
    let (m, dx, dz) = (batch.len(), batch.dim(), enc.output_dim());
    let (_, z) = encode(enc, batch, cfg);
    let recon: Vec<f64> = (0..m).flat_map(|j| dec.forward(&z[j * dz..(j + 1) * dz])).collect();
    let mut sig = Vec::new();
    let mut push_pairs = |a: &[f64], b: &[f64], d: usize, skip_diagonal: bool| {
        for i in 0..a.len() / d {
            for j in 0..b.len() / d {
                if skip_diagonal && j <= i {
                    continue;
                }
                sig.extend((0..d).map(|c| a[i * d + c] > b[j * d + c]));
            }
        }
    };
    push_pairs(batch.points(), &recon, dx, false);
    push_pairs(&recon, &recon, dx, true);
    match cfg.tv_surrogate {
        TvSurrogate::KdeGridTV => {
            let kg = KdeGrid::new(&z, &cfg.latent_target, cfg.kde_grid);
            sig.push(kg.floored);
            for g in 0..cfg.kde_grid {
                let t = kg.lo + kg.step * g as f64;
                sig.push(kg.kde(&z, t) > cfg.latent_target.pdf_1d(t));
            }
        }
        TvSurrogate::EnergySurrogate => {
            let seed = derive_seed(cfg.seed, &[batch.seed(), tag("latent-reference")]);
            let reference = sample(&cfg.latent_target, m, seed)?;
            push_pairs(&z, &z, dz, true);
            push_pairs(&z, reference.points(), dz, false);
        }
    }
    Ok(sig)
}

/// Worst relative gradient error per component over the checked points.
#[derive(Debug, Clone)]
pub struct GradCheck {
    /// `max_p ‖g_analytic − g_fd‖ / max(‖g_analytic‖, ‖g_fd‖, floor)` for the reconstruction term.
    pub recon_rel_err: Vec<f64>,
    /// Same for the latent penalty.
    pub penalty_rel_err: Vec<f64>,
    pub tolerance: f64,
    /// Points discarded because a central difference straddled a kink.
    pub redraws: usize,
}

impl GradCheck {
    pub fn worst(&self) -> f64 {
        self.recon_rel_err
            .iter()
            .chain(&self.penalty_rel_err)
            .fold(0.0, |a: f64, b| a.max(*b))
    }

    pub fn passed(&self) -> bool {
        self.worst() <= self.tolerance
    }
}

fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(floor)
}

/// Compare analytic and central-difference gradients of the reconstruction
/// and penalty terms at `points` random parameter vectors around the given
/// networks (each parameter jittered by `N(0, 0.25²)`).
///
/// A draw whose ± step crosses a kink of the loss (two atoms swapping order,
/// a KDE residual changing sign) has no derivative for the difference quotient
/// to estimate; it is discarded and redrawn, and the count is reported.
pub fn gradient_check(
    enc: &Mlp,
    dec: &Mlp,
    batch: &DiscreteMeasure,
    cfg: &WaeConfig,
    points: usize,
    seed: u64,
) -> Result<GradCheck> {
    const STEP: f64 = 1e-5;
    const FLOOR: f64 = 1e-6;
    const MAX_REDRAWS_PER_POINT: usize = 5;
    let mut rng = rng_from_seed(seed);
    let (e0, d0) = (enc.params(), dec.params());
    let mut recon_rel_err = Vec::with_capacity(points);
    let mut penalty_rel_err = Vec::with_capacity(points);
    let mut redraws = 0;
    'draw: while recon_rel_err.len() < points {
        if redraws > MAX_REDRAWS_PER_POINT * points {
            return invalid(format!("{redraws} gradient-check draws straddled a kink"));
        }
        let mut e = enc.clone();
        let mut d = dec.clone();
        let mut jitter = |p: &[f64]| -> Vec<f64> {
            p.iter()
                .map(|v| {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    v + 0.25 * xi
                })
                .collect()
        };
        e.set_params(&jitter(&e0))?;
        d.set_params(&jitter(&d0))?;
        let g = fwae_objective_grad(&e, &d, batch, cfg)?;
        let mut fd_recon = Vec::with_capacity(e.n_params() + d.n_params());
        let mut fd_pen = Vec::with_capacity(e.n_params());
        let ep = e.params();
        for i in 0..ep.len() {
            let mut plus = ep.clone();
            let mut minus = ep.clone();
            plus[i] += STEP;
            minus[i] -= STEP;
            let mut ee = e.clone();
            let mut em = e.clone();
            ee.set_params(&plus)?;
            em.set_params(&minus)?;
            if kink_signature(&ee, &d, batch, cfg)? != kink_signature(&em, &d, batch, cfg)? {
                redraws += 1;
                continue 'draw;
            }
            let hi = fwae_objective(&ee, &d, batch, cfg)?;
            let lo = fwae_objective(&em, &d, batch, cfg)?;
            fd_recon.push((hi.recon_w1 - lo.recon_w1) / (2.0 * STEP));
            fd_pen.push((hi.latent_penalty - lo.latent_penalty) / (2.0 * STEP));
        }
        let dp = d.params();
        for i in 0..dp.len() {
            let mut plus = dp.clone();
            let mut minus = dp.clone();
            plus[i] += STEP;
            minus[i] -= STEP;
            let mut dd = d.clone();
            let mut dm = d.clone();
            dd.set_params(&plus)?;
            dm.set_params(&minus)?;
            if kink_signature(&e, &dd, batch, cfg)? != kink_signature(&e, &dm, batch, cfg)? {
                redraws += 1;
                continue 'draw;
            }
            let hi = fwae_objective(&e, &dd, batch, cfg)?.recon_w1;
            let lo = fwae_objective(&e, &dm, batch, cfg)?.recon_w1;
            fd_recon.push((hi - lo) / (2.0 * STEP));
        }
        let analytic_recon: Vec<f64> = g.recon_enc.iter().chain(&g.recon_dec).copied().collect();
        recon_rel_err.push(rel_err(&analytic_recon, &fd_recon, FLOOR));
        penalty_rel_err.push(rel_err(&g.penalty_enc, &fd_pen, FLOOR));
    }
    Ok(GradCheck {
        recon_rel_err,
        penalty_rel_err,
        tolerance: 1e-4,
        redraws,
    })
}
