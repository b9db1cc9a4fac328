//! One driver per experiment kind.

use super::tail::{fit_k2, t_grid, TailReport};
use super::{config::parse_class, run_cells, Check, ExperimentOutput, ExperimentSpec};
use crate::autoencoder::{decompose_error, monge_map_1d, train, Activation, TvSurrogate, WaeConfig, REFERENCE_FACTOR};
use crate::error::{Error, Result};
use crate::geometry::{default_epsilon_grid, quasi_isometry_check, wasserstein_dim_upper, CoverRule};
use crate::measures::{sample, DensityModel, DiscreteMeasure};
use crate::rng::{derive_seed, tag};
use crate::stats::{mean, median};
use crate::transport::{w1, w1_exact_1d, MetricTag};
use crate::variation::{tv_analytic, yatracos_minimizer, CandidateClass, YatracosFamily};

const DEFAULT_TAIL_POINTS: usize = 10;
/// Smallest slack accepted from a triangle-inequality decomposition.
const SLACK_TOL: f64 = 1e-6;

/// Exact W1 under the Euclidean cost, by sorting on the line.
fn w1_any(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    if a.dim() == 1 {
        w1_exact_1d(a, b)
    } else {
        w1(a, b, MetricTag::Euclidean)
    }
}

fn class_from(spec: &ExperimentSpec, default: &str, default_vc: usize) -> Result<CandidateClass> {
    let members = parse_class(spec.params.raw("class").unwrap_or(default))?;
    CandidateClass::new(members, spec.params.usize("vc_dim", default_vc)?)
}

fn push_per_n(out: &mut ExperimentOutput, metric: &str) {
    for (n, v) in out.series(metric) {
        out.summary.push((n, format!("mean_{metric}"), mean(&v)));
        out.summary.push((n, format!("median_{metric}"), median(&v)));
    }
}

fn map_1d(m: &DiscreteMeasure, f: impl Fn(f64) -> Result<f64>) -> Result<DiscreteMeasure> {
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

/// `W1(μ̂_n, μ̃_{20n})` per cell, its mean-rate fit and a bounded-differences
/// tail report per sample size with `B` the support diameter.
pub fn run_rate_w1(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let input = spec.params.model("input", "uniform")?;
    let b = input.support().diameter();
    let points = spec.params.usize("tail_points", DEFAULT_TAIL_POINTS)?;
    let rows = run_cells(spec, |n, _, seed| {
        let data = sample(&input, n, derive_seed(seed, &[1]))?;
        let reference = sample(&input, REFERENCE_FACTOR * n, derive_seed(seed, &[2]))?;
        Ok(vec![("w1", w1_any(&data, &reference)?)])
    })?;
    let mut out = ExperimentOutput::new(spec.kind, rows);
    out.push_mean_fit("w1", "w1");
    push_per_n(&mut out, "w1");
    let scale = if b > 0.0 { b } else { 1.0 };
    for (n, v) in out.series("w1") {
        out.tails
            .push(TailReport::mcdiarmid(&v, n, b, t_grid(n, scale, points)));
    }
    out.summary.push((0, "diameter".into(), b));
    let failing: Vec<usize> = out.tails.iter().filter(|t| !t.holds()).map(|t| t.n).collect();
    out.checks.push(Check::new(
        "tail",
        failing.is_empty(),
        format!("violations at n = {failing:?}"),
    ));
    out.push_slope_check(spec, "w1")?;
    Ok(out)
}

/// Minimum-distance estimation: Yatracos minimizer TV error, the deviation
/// `Δ = sup_A |γ̂_n(A) − γ(A)|` and the bound `3 min_f TV(f, γ) + 4Δ`.
pub fn run_rate_tv(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let gamma = spec.params.model("input", "gaussian:0,1")?;
    let class = class_from(spec, "gaussian:0,1; gaussian:1,1", 2)?;
    let family = YatracosFamily::new(&class)?;
    let gamma_masses = family.masses(&gamma)?;
    let best = class
        .members()
        .iter()
        .map(|f| tv_analytic(f, &gamma))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let rows = run_cells(spec, |n, _, seed| {
        let s = sample(&gamma, n, seed)?;
        let (idx, chosen, _) = yatracos_minimizer(&s, &class)?;
        let delta = family.norm_against(&s, &gamma_masses)?;
        let tv = tv_analytic(&chosen, &gamma)?;
        Ok(vec![
            ("bound", 3.0 * best + 4.0 * delta),
            ("selected", idx as f64),
            ("tv_error", tv),
            ("yatracos_norm", delta),
        ])
    })?;
    let mut out = ExperimentOutput::new(spec.kind, rows);
    out.push_mean_fit("yatracos_norm", "yatracos_norm");
    out.push_mean_fit("tv_error", "tv_error");
    push_per_n(&mut out, "tv_error");
    out.summary.push((0, "best_in_class_tv".into(), best));
    let (tv, bound) = (out.series("tv_error"), out.series("bound"));
    let violations = tv
        .values()
        .flatten()
        .zip(bound.values().flatten())
        .filter(|(t, b)| **t > **b + 1e-9)
        .count();
    out.checks.push(Check::new(
        "minimum_distance_bound",
        violations == 0,
        format!("{violations} violations"),
    ));
    out.push_slope_check(spec, "yatracos_norm")?;
    Ok(out)
}

/// Yatracos-norm concentration: mean-rate fit, `k₁ = max_n mean·√(n/v)` and
/// the fitted tail constant `k₂` checked against a floor.
pub fn run_conc_yatracos(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let gamma = spec.params.model("input", "gaussian:0,1")?;
    let class = class_from(spec, "gaussian:0,1; gaussian:1,1", 2)?;
    let family = YatracosFamily::new(&class)?;
    let gamma_masses = family.masses(&gamma)?;
    let points = spec.params.usize("tail_points", DEFAULT_TAIL_POINTS)?;
    let floor = spec.params.f64("k2_floor", 2.0)?;
    let rows = run_cells(spec, |n, _, seed| {
        let s = sample(&gamma, n, seed)?;
        Ok(vec![("yatracos_norm", family.norm_against(&s, &gamma_masses)?)])
    })?;
    let mut out = ExperimentOutput::new(spec.kind, rows);
    out.push_mean_fit("yatracos_norm", "yatracos_norm");
    push_per_n(&mut out, "yatracos_norm");
    let v = class.vc_dim_hint().max(1) as f64;
    let series: Vec<(usize, Vec<f64>)> = out.series("yatracos_norm").into_iter().collect();
    let k1 = series
        .iter()
        .map(|(n, vals)| mean(vals) / (v / *n as f64).sqrt())
        .fold(0.0, f64::max);
    let k2 = fit_k2(&series, |n| t_grid(n, 1.0, points));
    let k2_bound = if k2.is_finite() { k2 } else { floor };
    for (n, vals) in &series {
        out.tails
            .push(TailReport::with_rate(vals, *n, k2_bound, t_grid(*n, 1.0, points)));
    }
    out.summary.push((0, "k1".into(), k1));
    out.summary.push((0, "k2".into(), k2));
    let all_hold = out.tails.iter().all(TailReport::holds);
    out.checks
        .push(Check::new("tail", all_hold && k2_bound > 0.0, format!("k2 = {k2:.4}")));
    out.checks.push(Check::new(
        "k2_floor",
        k2 >= floor,
        format!("k2 = {k2:.4} vs floor {floor}"),
    ));
    out.push_slope_check(spec, "yatracos_norm")?;
    Ok(out)
}

/// Latent Yatracos norm of an encoded sample against the latent target, for
/// the exact monotone encoder or one whose outputs are contaminated by a
/// fixed fraction of draws from another law.
pub fn run_corollary1(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let input = spec.params.model("input", "bump")?;
    let latent = spec.params.model("latent", "gaussian:0,1")?;
    let class = class_from(spec, "gaussian:0,1; gaussian:1,1; uniform:4,5", 3)?;
    let family = YatracosFamily::new(&class)?;
    let latent_masses = family.masses(&latent)?;
    let encoder = monge_map_1d(&input, &latent)?;
    let contaminated = match spec.params.string("encoder", "exact").as_str() {
        "exact" => false,
        "contaminated" => true,
        other => return Err(Error::Config(format!("unknown encoder `{other}`"))),
    };
    let fraction = spec.params.f64("contamination", 0.1)?;
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Config("contamination must lie in [0, 1]".into()));
    }
    let contaminant = spec.params.model("contaminant", "uniform:4,5")?;
    // TV(ρ, (1−c)ρ + cν) = c·TV(ρ, ν).
    let lambda_star = if contaminated {
        fraction * tv_analytic(&latent, &contaminant)?
    } else {
        0.0
    };
    let rows = run_cells(spec, |n, _, seed| {
        let x = sample(&input, n, derive_seed(seed, &[1]))?;
        let mut z = map_1d(&x, |v| encoder.apply(v))?.values_1d().to_vec();
        if contaminated {
            let k = (fraction * n as f64).round() as usize;
            let extra = sample(&contaminant, k.max(1), derive_seed(seed, &[2]))?;
            z[..k].copy_from_slice(&extra.values_1d()[..k]);
        }
        let encoded = DiscreteMeasure::uniform(1, z, seed)?;
        let norm = family.norm_against(&encoded, &latent_masses)?;
        Ok(vec![("excess", norm - lambda_star), ("latent_norm", norm)])
    })?;
    let mut out = ExperimentOutput::new(spec.kind, rows);
    out.push_mean_fit("excess", "excess");
    push_per_n(&mut out, "latent_norm");
    out.summary.push((0, "lambda_star".into(), lambda_star));
    if contaminated {
        let tol = spec.params.f64("offset_tol", 0.02)?;
        let n_max = *spec.n_grid.last().unwrap();
        let med = median(&out.series("latent_norm")[&n_max]);
        out.checks.push(Check::new(
            "offset",
            (med - lambda_star).abs() <= tol,
            format!("median {med:.5} at n = {n_max} vs {lambda_star:.5} ± {tol}"),
        ));
    }
    out.push_slope_check(spec, "excess")?;
    Ok(out)
}

fn wae_config(spec: &ExperimentSpec, latent: &DensityModel) -> Result<WaeConfig> {
    let p = &spec.params;
    let mut cfg = WaeConfig::default_1d();
    cfg.latent_target = latent.clone();
    cfg.epochs = p.usize("epochs", cfg.epochs)?;
    cfg.batch = p.usize("batch", cfg.batch)?;
    cfg.step_size = p.f64("step", cfg.step_size)?;
    cfg.lambda = p.f64("lambda", cfg.lambda)?;
    cfg.sinkhorn_epsilon = p.f64("sinkhorn_epsilon", cfg.sinkhorn_epsilon)?;
    if let Some(h) = p.floats("hidden")? {
        cfg.hidden = h.iter().map(|w| *w as usize).collect();
    }
    if let Some(a) = p.raw("activation") {
        cfg.activation = Activation::parse(a)?;
    }
    if let Some(s) = p.raw("surrogate") {
        cfg.tv_surrogate = TvSurrogate::parse(s)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// End-to-end error decomposition for oracle, perturbed or trained maps.
pub fn run_wae_end_to_end(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let input = spec.params.model("input", "bump")?;
    let latent = spec.params.model("latent", "gaussian:0,1")?;
    let t = monge_map_1d(&latent, &input)?;
    let t_inv = t.inverse();
    let mode = spec.params.string("mode", "oracle");
    let eps = spec.params.f64("perturbation", 0.05)?;
    let qi_pairs = spec.params.usize("qi_pairs", 200)?;
    let b = input.support().diameter();
    let cfg = if mode == "trained" {
        Some(wae_config(spec, &latent)?)
    } else {
        None
    };
    if !matches!(mode.as_str(), "oracle" | "perturbed" | "trained") {
        return Err(Error::Config(format!("unknown mode `{mode}`")));
    }
    let rows = run_cells(spec, |n, _, seed| {
        let (d, lambda_hat, a_hat) = match &cfg {
            None => {
                let shift = if mode == "perturbed" { eps } else { 0.0 };
                let d = decompose_error(
                    &|x| t_inv.apply(x),
                    &|z| Ok(t.apply(z)? + shift),
                    &input,
                    &latent,
                    n,
                    seed,
                )?;
                (d, 0.0, 1.0)
            }
            Some(cfg) => {
                let cfg = WaeConfig { seed, ..cfg.clone() };
                let r = train(&cfg, &input, n)?;
                let d = decompose_error(
                    &|x| Ok(r.enc.forward_1d(x)),
                    &|z| Ok(r.dec.forward_1d(z)),
                    &input,
                    &latent,
                    n,
                    seed,
                )?;
                let qi = quasi_isometry_check(
                    |z| r.dec.forward(z),
                    &latent,
                    MetricTag::Euclidean,
                    MetricTag::Euclidean,
                    qi_pairs,
                    f64::MAX,
                    derive_seed(seed, &[tag("qi")]),
                )?;
                (d, r.latent_yatracos, qi.tightest_a)
            }
        };
        let zeta = lambda_hat * a_hat * b;
        Ok(vec![
            ("a_hat", a_hat),
            ("e1", d.e1),
            ("e2", d.e2),
            ("e3", d.e3),
            ("excess", d.total - zeta),
            ("latent_norm", lambda_hat),
            ("reference_diagnostic", d.reference_diagnostic.unwrap_or(f64::NAN)),
            ("slack", d.slack),
            ("total", d.total),
            ("zeta", zeta),
        ])
    })?;
    let mut out = ExperimentOutput::new(spec.kind, rows);
    let fit = out.push_mean_fit("excess", "excess");
    out.push_mean_fit("total", "total");
    push_per_n(&mut out, "total");
    push_per_n(&mut out, "e2");
    let worst_slack = out
        .series("slack")
        .values()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    out.checks.push(Check::new(
        "slack",
        worst_slack >= -SLACK_TOL,
        format!("min slack {worst_slack:.3e}"),
    ));
    if mode == "perturbed" {
        let worst = out.series("e2").values().flatten().copied().fold(0.0, f64::max);
        out.checks.push(Check::new(
            "e2",
            worst <= eps + 1e-3,
            format!("max e2 {worst:.6} vs {eps} + 1e-3"),
        ));
    }
    let dim_sample = sample(&input, 4096, derive_seed(spec.seed, &[tag("dimension")]))?;
    if let Ok(est) = wasserstein_dim_upper(&dim_sample, &default_epsilon_grid(), CoverRule::Lattice) {
        let target = est.predicted_rate().max(-0.5) + 0.1;
        out.summary.push((0, "s_hat".into(), est.s_hat));
        out.summary.push((0, "rate_threshold".into(), target));
        if let Some(f) = fit {
            out.summary
                .push((0, "rate_ok".into(), if f.slope <= target { 1.0 } else { 0.0 }));
        }
    }
    out.push_slope_check(spec, "excess")?;
    Ok(out)
}

/// Reconstruction cost `d*_c = (1/n) Σ |x_i − D(E(x_i))|` for strictly
/// monotone `D = T + δ tanh` and `E = T⁻¹`, against the two-W1 bound.
pub fn run_corollary2(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let input = spec.params.model("input", "bump")?;
    let latent = spec.params.model("latent", "gaussian:0,1")?;
    let delta = spec.params.f64("perturbation", 0.05)?;
    let tol = spec.params.f64("tolerance", 1e-9)?;
    if !(delta >= 0.0) {
        return Err(Error::Config("perturbation must be nonnegative".into()));
    }
    let t = monge_map_1d(&latent, &input)?;
    let t_inv = t.inverse();
    let dec = |z: f64| -> Result<f64> { Ok(t.apply(z)? + delta * z.tanh()) };
    let enc = |x: f64| t_inv.apply(x);
    check_increasing("decoder", &latent, &dec)?;
    check_increasing("reconstruction map", &input, &|x| dec(enc(x)?))?;
    let rows = run_cells(spec, |n, _, seed| {
        let x = sample(&input, n, derive_seed(seed, &[1]))?;
        let rec = map_1d(&x, |v| dec(enc(v)?))?;
        let dstar = x
            .values_1d()
            .iter()
            .zip(rec.values_1d())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / n as f64;
        let rho_hat = sample(&latent, REFERENCE_FACTOR * n, derive_seed(seed, &[2]))?;
        let reference = map_1d(&rho_hat, |z| t.apply(z))?;
        let w_rec = w1_exact_1d(&rec, &reference)?;
        let w_data = w1_exact_1d(&x, &reference)?;
        Ok(vec![
            ("dstar", dstar),
            ("gap", w_rec + w_data - dstar),
            ("w1_data", w_data),
            ("w1_recon", w_rec),
            ("w1_sum", w_rec + w_data),
        ])
    })?;
    let mut out = ExperimentOutput::new(spec.kind, rows);
    out.push_mean_fit("dstar", "dstar");
    push_per_n(&mut out, "dstar");
    let gaps = out.series("gap");
    let runs = gaps.values().map(Vec::len).sum::<usize>();
    let held = gaps.values().flatten().filter(|g| **g >= -tol).count();
    out.summary.push((0, "runs".into(), runs as f64));
    out.summary.push((0, "inequality_held".into(), held as f64));
    out.checks.push(Check::new(
        "inequality",
        held == runs,
        format!("{held}/{runs} runs within {tol:e}"),
    ));
    out.push_slope_check(spec, "dstar")?;
    Ok(out)
}

/// Reject maps that are not strictly increasing on a 1001-point grid over
/// `domain`'s support.
fn check_increasing(what: &str, domain: &DensityModel, f: &dyn Fn(f64) -> Result<f64>) -> Result<()> {
    let (lo, hi) = (domain.support().lo[0], domain.support().hi[0]);
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=1000 {
        let x = lo + (hi - lo) * k as f64 / 1000.0;
        let y = f(x)?;
        if !(y > prev) {
            return Err(Error::NonMonotone(format!("{what} at x = {x}")));
        }
        prev = y;
    }
    Ok(())
}

/// Upper Wasserstein dimension estimate of an empirical sample.
pub fn run_dim(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let input = spec.params.model("input", "cube:4")?;
    let rule = match spec.params.string("rule", "lattice").as_str() {
        "lattice" => CoverRule::Lattice,
        "greedy" => CoverRule::Greedy,
        other => return Err(Error::Config(format!("unknown cover rule `{other}`"))),
    };
    let rows = run_cells(spec, |n, _, seed| {
        let m = sample(&input, n, seed)?;
        let est = wasserstein_dim_upper(&m, &default_epsilon_grid(), rule)?;
        Ok(vec![
            ("fit_slope", est.fit.slope),
            ("predicted_rate", est.predicted_rate()),
            ("s_hat", est.s_hat),
        ])
    })?;
    let mut out = ExperimentOutput::new(spec.kind, rows);
    push_per_n(&mut out, "s_hat");
    if let (Some(lo), Some(hi)) = (
        spec.params.opt_f64("expected_low")?,
        spec.params.opt_f64("expected_high")?,
    ) {
        let s: Vec<f64> = out.series("s_hat").values().flatten().copied().collect();
        let ok = s.iter().all(|v| (lo..=hi).contains(v));
        out.checks
            .push(Check::new("s_hat_range", ok, format!("{s:?} vs [{lo}, {hi}]")));
    }
    Ok(out)
}
