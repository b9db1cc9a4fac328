//! Metric-geometry estimators: covering numbers, the (ε, τ)-covering, the
//! upper Wasserstein dimension, quasi-isometry checks and Hölder norms.
//!
//! Covering counts are always upper bounds (every count comes from an actual
//! cover). Exact covering numbers are only computed in tests, at tiny sizes.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::measures::{sample, DensityModel, DiscreteMeasure};
use crate::rng::rng_from_seed;
use crate::stats::{fit_line, RateFit};
use crate::transport::MetricTag;

/// Candidate exponents for the upper Wasserstein dimension.
pub const S_GRID: [f64; 7] = [2.1, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0];

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Centers of a greedy cover by closed balls of diameter `eps`.
///
/// On the line the cover is built by a left-to-right sweep and is optimal.
/// In higher dimensions points are visited in order and every uncovered
/// point opens a new ball; the centers are then `eps/2`-separated, so the
/// count never exceeds the `eps/2`-packing number.
fn greedy_centers(pts: &[f64], dim: usize, eps: f64, keep: &[bool]) -> Vec<usize> {
    let n = pts.len() / dim;
    if dim == 1 {
        let mut idx: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
        idx.sort_by(|&a, &b| pts[a].total_cmp(&pts[b]));
        let mut centers = Vec::new();
        let mut reach = f64::NEG_INFINITY;
        for i in idx {
            if pts[i] > reach {
                centers.push(i);
                reach = pts[i] + eps;
            }
        }
        return centers;
    }
    let r = 0.5 * eps;
    let mut centers: Vec<usize> = Vec::new();
    for i in (0..n).filter(|&i| keep[i]) {
        let p = &pts[i * dim..(i + 1) * dim];
        if !centers.iter().any(|&c| dist(&pts[c * dim..(c + 1) * dim], p) <= r) {
            centers.push(i);
        }
    }
    centers
}

/// Greedy upper bound on the `eps`-covering number of a point set
/// (`pts` row-major with `dim` columns).
pub fn covering_number(pts: &[f64], dim: usize, eps: f64) -> Result<usize> {
    if dim == 0 || pts.is_empty() || pts.len() % dim != 0 {
        return invalid("covering needs a nonempty n×d point array");
    }
    if !(eps > 0.0) {
        return invalid("covering diameter must be positive");
    }
    let keep = vec![true; pts.len() / dim];
    Ok(greedy_centers(pts, dim, eps, &keep).len())
}

/// Upper bound on the (ε, τ)-covering number: atoms are discarded in
/// decreasing distance from the weighted mean while the discarded mass stays
/// at most `tau`, and the rest is covered greedily. Never exceeds the
/// plain covering bound.
pub fn covering_number_tau(m: &DiscreteMeasure, eps: f64, tau: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&tau) {
        return invalid("tau must lie in [0, 1)");
    }
    let d = m.dim();
    let full = covering_number(m.points(), d, eps)?;
    if tau == 0.0 {
        return Ok(full);
    }
    let mut centre = vec![0.0; d];
    for (p, w) in m.iter() {
        for k in 0..d {
            centre[k] += w * p[k];
        }
    }
    let mut order: Vec<usize> = (0..m.len()).collect();
    let far: Vec<f64> = (0..m.len()).map(|i| dist(m.point(i), &centre)).collect();
    order.sort_by(|&a, &b| far[b].total_cmp(&far[a]).then(a.cmp(&b)));
    let mut keep = vec![true; m.len()];
    let mut dropped = 0.0;
    let mut kept = m.len();
    for i in order {
        let w = m.weights()[i];
        if kept == 1 || dropped + w > tau {
            break;
        }
        dropped += w;
        keep[i] = false;
        kept -= 1;
    }
    Ok(greedy_centers(m.points(), d, eps, &keep).len().min(full))
}

/// Counts on a grid of scales at a fixed `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringReport {
    pub epsilon_grid: Vec<f64>,
    pub counts: Vec<usize>,
    pub tau: f64,
}

impl CoveringReport {
    /// Greedy (ε, τ)-counts; a cover at a finer scale also covers at a coarser
    /// one, so counts are made nonincreasing in ε by a running minimum.
    pub fn compute(m: &DiscreteMeasure, epsilon_grid: &[f64], tau: f64) -> Result<Self> {
        let mut order: Vec<usize> = (0..epsilon_grid.len()).collect();
        order.sort_by(|&a, &b| epsilon_grid[a].total_cmp(&epsilon_grid[b]));
        let mut counts = vec![0; epsilon_grid.len()];
        let mut best = usize::MAX;
        for k in order {
            best = best.min(covering_number_tau(m, epsilon_grid[k], tau)?);
            counts[k] = best;
        }
        Ok(Self {
            epsilon_grid: epsilon_grid.to_vec(),
            counts,
            tau,
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "epsilon,count,tau")?;
        for (e, c) in self.epsilon_grid.iter().zip(&self.counts) {
            writeln!(out, "{e:.16e},{c},{:.16e}", self.tau)?;
        }
        Ok(())
    }
}

/// How covering counts are produced inside the dimension estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverRule {
    /// Data-centred greedy balls with farthest-point discard.
    Greedy,
    /// Occupied cells of a lattice of diameter-ε cubes; the lightest cells are
    /// discarded first. Scales to thousands of points in four dimensions.
    Lattice,
}

/// Fitted upper Wasserstein dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionEstimate {
    pub s_hat: f64,
    /// Fit of `ln N(ε, ε^{s/(s−2)})` against `−ln ε` at `s = s_hat`.
    pub fit: RateFit,
    /// `(s, proxy(s))` for each candidate on the grid.
    pub proxies: Vec<(f64, f64)>,
    /// Residual sum of squares of `fit`.
    pub residual: f64,
}

impl DimensionEstimate {
    /// Predicted W1 rate exponent `−1/s_hat`.
    pub fn predicted_rate(&self) -> f64 {
        -1.0 / self.s_hat
    }
}

/// Default scale grid: 24 geometric steps over 1.5 decades of the unit-diameter cloud.
pub fn default_epsilon_grid() -> Vec<f64> {
    (0..24).map(|k| 10f64.powf(-1.5 * k as f64 / 23.0)).collect()
}

/// Points rescaled to unit diameter (the scale-free form of the cloud).
fn normalized(m: &DiscreteMeasure) -> Result<Vec<f64>> {
    let d = m.dim();
    let n = m.len();
    let mut lo = vec![f64::INFINITY; d];
    for p in m.points().chunks_exact(d) {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
        }
    }
    let diam = if n <= 6000 {
        m.diameter()
    } else {
        // Two-sweep lower bound is enough for a scale normalization.
        let far = |from: &[f64]| {
            (0..n)
                .map(|i| (dist(from, m.point(i)), i))
                .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
        };
        let (_, i) = far(m.point(0));
        far(m.point(i)).0
    };
    if diam == 0.0 {
        return Err(Error::DegenerateFit(
            "all atoms coincide; covering counts are constant".into(),
        ));
    }
    Ok(m.points()
        .chunks_exact(d)
        .flat_map(|p| p.iter().zip(&lo).map(|(v, l)| (v - l) / diam).collect::<Vec<_>>())
        .collect())
}

fn lattice_count(pts: &[f64], weights: &[f64], dim: usize, eps: f64, tau: f64) -> usize {
    let mut width = vec![0.0f64; dim];
    for p in pts.chunks_exact(dim) {
        for k in 0..dim {
            width[k] = width[k].max(p[k]);
        }
    }
    let mut cells: HashMap<Vec<i64>, f64> = HashMap::new();
    let per_axis: Vec<f64> = width
        .iter()
        .map(|w| ((dim as f64).sqrt() * w / eps).ceil().max(1.0))
        .collect();
    for (p, w) in pts.chunks_exact(dim).zip(weights) {
        let key: Vec<i64> = (0..dim)
            .map(|k| {
                if width[k] == 0.0 {
                    0
                } else {
                    ((p[k] / width[k] * per_axis[k]).floor() as i64).min(per_axis[k] as i64 - 1)
                }
            })
            .collect();
        *cells.entry(key).or_insert(0.0) += w;
    }
    let mut masses: Vec<f64> = cells.into_values().collect();
    masses.sort_by(f64::total_cmp);
    let mut dropped = 0.0;
    let mut count = masses.len();
    for w in masses {
        if count == 1 || dropped + w > tau {
            break;
        }
        dropped += w;
        count -= 1;
    }
    count
}

fn proxy_fit(
    pts: &[f64],
    m: &DiscreteMeasure,
    dim: usize,
    grid: &[f64],
    s: f64,
    rule: CoverRule,
) -> Result<Option<RateFit>> {
    let n = m.len();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let scaled = match rule {
        CoverRule::Greedy => Some(DiscreteMeasure::new(dim, pts.to_vec(), m.weights().to_vec(), m.seed())?),
        CoverRule::Lattice => None,
    };
    for &eps in grid {
        let tau = eps.powf(s / (s - 2.0));
        if tau >= 1.0 {
            continue;
        }
        let count = match rule {
            CoverRule::Lattice => lattice_count(pts, m.weights(), dim, eps, tau),
            CoverRule::Greedy => covering_number_tau(scaled.as_ref().expect("scaled cloud"), eps, tau)?,
        };
        // Saturated counts (a ball per few atoms) carry no scale information.
        if count < 2 || count > n / 4 {
            continue;
        }
        xs.push(-eps.ln());
        ys.push((count as f64).ln());
    }
    if xs.len() < 3 {
        return Ok(None);
    }
    Ok(Some(fit_line(&xs, &ys)?))
}

/// Grid proxy for the upper Wasserstein dimension.
///
/// For each candidate `s`, counts `N(ε, ε^{s/(s−2)})` are fitted against
/// `−ln ε`; the slope stands in for the limsup. The estimate is the smallest
/// candidate whose slope does not exceed it, refined by bisection against the
/// previous candidate. Values never leave the open interval `(2, ∞)`.
pub fn wasserstein_dim_upper(m: &DiscreteMeasure, epsilon_grid: &[f64], rule: CoverRule) -> Result<DimensionEstimate> {
    if epsilon_grid.len() < 3 || epsilon_grid.iter().any(|e| !(*e > 0.0)) {
        return invalid("epsilon grid needs at least three positive scales");
    }
    let emax = epsilon_grid.iter().copied().fold(0.0, f64::max);
    let emin = epsilon_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if emax / emin < 10.0 * (1.0 - 1e-12) {
        return invalid("epsilon grid must span at least one decade");
    }
    let d = m.dim();
    let pts = normalized(m)?;
    let proxy = |s: f64| -> Result<Option<RateFit>> { proxy_fit(&pts, m, d, epsilon_grid, s, rule) };

    let mut proxies = Vec::new();
    let mut chosen: Option<(f64, RateFit)> = None;
    let mut prev: Option<f64> = None;
    let mut last_fit: Option<RateFit> = None;
    for &s in S_GRID.iter() {
        let Some(fit) = proxy(s)? else {
            proxies.push((s, f64::NAN));
            continue;
        };
        proxies.push((s, fit.slope));
        if fit.slope <= s {
            chosen = Some(match prev {
                None => (s, fit),
                Some(p) => {
                    // proxy(s) − s changes sign on (p, s]; bisect it.
                    let (mut lo, mut hi, mut best) = (p, s, fit);
                    for _ in 0..20 {
                        let mid = 0.5 * (lo + hi);
                        match proxy(mid)? {
                            Some(f) if f.slope <= mid => {
                                hi = mid;
                                best = f;
                            }
                            _ => lo = mid,
                        }
                    }
                    (hi, best)
                }
            });
            break;
        }
        prev = Some(s);
        last_fit = Some(fit);
    }
    let (s_hat, fit) = match (chosen, last_fit) {
        (Some(c), _) => c,
        // No candidate passes: report the largest candidate with its fit.
        (None, Some(f)) => (*S_GRID.last().unwrap(), f),
        (None, None) => {
            return Err(Error::DegenerateFit(
                "no scale in the grid yields informative covering counts".into(),
            ))
        }
    };
    if fit.ys.iter().all(|y| *y == fit.ys[0]) {
        return Err(Error::DegenerateFit(
            "covering counts are constant over the grid".into(),
        ));
    }
    let residual = fit.ssr();
    Ok(DimensionEstimate {
        s_hat,
        fit,
        proxies,
        residual,
    })
}

/// Which side of the quasi-isometry bound failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QiBound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QiViolation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `d₂(f(x), f(y)) / d₁(x, y)`.
    pub ratio: f64,
    pub bound: QiBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QiReport {
    pub passed: bool,
    /// First violating pair in sampling order.
    pub violation: Option<QiViolation>,
    /// Pair with the most extreme distortion.
    pub worst: Option<QiViolation>,
    /// Smallest `A` that passes on this pair sample.
    pub tightest_a: f64,
    pub pairs_checked: usize,
}

/// Check `(1/A) d₁(x,y) ≤ d₂(f(x), f(y)) ≤ A d₁(x,y)` on explicit pairs.
/// Sampled pairs give a necessary condition only.
pub fn quasi_isometry_check_pairs<F>(
    map: F,
    pairs: &[(Vec<f64>, Vec<f64>)],
    domain_metric: MetricTag,
    codomain_metric: MetricTag,
    a: f64,
) -> Result<QiReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(a >= 1.0) {
        return invalid("quasi-isometry constant must be at least 1");
    }
    let mut report = QiReport {
        passed: true,
        violation: None,
        worst: None,
        tightest_a: 1.0,
        pairs_checked: 0,
    };
    for (x, y) in pairs {
        let d1 = domain_metric.cost(x, y);
        if d1 == 0.0 {
            continue;
        }
        let d2 = codomain_metric.cost(&map(x), &map(y));
        let ratio = d2 / d1;
        report.pairs_checked += 1;
        let distortion = if ratio > 0.0 {
            ratio.max(1.0 / ratio)
        } else {
            f64::INFINITY
        };
        let bound = if ratio < 1.0 { QiBound::Lower } else { QiBound::Upper };
        if distortion > report.tightest_a || report.worst.is_none() {
            report.tightest_a = report.tightest_a.max(distortion);
            report.worst = Some(QiViolation {
                x: x.clone(),
                y: y.clone(),
                ratio,
                bound,
            });
        }
        if report.violation.is_none() && (d2 * a < d1 || d2 > a * d1) {
            report.passed = false;
            report.violation = Some(QiViolation {
                x: x.clone(),
                y: y.clone(),
                ratio,
                bound,
            });
        }
    }
    Ok(report)
}

/// Draw `sample_pairs` pairs from `domain` and check the bound on them.
pub fn quasi_isometry_check<F>(
    map: F,
    domain: &DensityModel,
    domain_metric: MetricTag,
    codomain_metric: MetricTag,
    sample_pairs: usize,
    a: f64,
    seed: u64,
) -> Result<QiReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let s = sample(domain, 2 * sample_pairs.max(1), seed)?;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..sample_pairs)
        .map(|k| (s.point(2 * k).to_vec(), s.point(2 * k + 1).to_vec()))
        .collect();
    quasi_isometry_check_pairs(map, &pairs, domain_metric, codomain_metric, a)
}

/// Random pairs `(t, 2t)` with `t` log-uniform in `[lo, hi]`, for probing a
/// map's behaviour near the origin.
pub fn pairs_near_origin(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| {
            let t = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
            (vec![t], vec![2.0 * t])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderEstimate {
    /// `max_{i≤k} sup|f^{(i)}| + seminorm`.
    pub norm: f64,
    /// `sup|f^{(i)}|` for `i = 0..=k`.
    pub sup_norms: Vec<f64>,
    /// Hölder seminorm of exponent `α − k` of the k-th derivative.
    pub seminorm: f64,
    /// Derivative order `k = ⌈α⌉ − 1`.
    pub order: usize,
    pub grid_step: f64,
}

/// Derivative of grid values: central differences inside, second-order
/// one-sided differences at the ends.
fn grid_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let m = v.len();
    let mut d = vec![0.0; m];
    if m < 3 {
        return d;
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[m - 1] = (3.0 * v[m - 1] - 4.0 * v[m - 2] + v[m - 3]) / (2.0 * h);
    for i in 1..m - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d
}

/// Grid estimate of the Hölder-α norm of a function on `[lo, hi]`.
///
/// With `k = ⌈α⌉ − 1` and `β = α − k ∈ (0, 1]`, returns the largest sup
/// norm of `f, f', …, f^{(k)}` plus the β-Hölder seminorm of `f^{(k)}`, all
/// evaluated on `grid` equispaced points.
pub fn holder_norm_estimate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    alpha: f64,
    grid: usize,
) -> Result<HolderEstimate> {
    if !(alpha > 0.0) || !(hi > lo) || grid < 5 {
        return invalid("Hölder estimate needs alpha > 0, a nonempty interval and at least 5 grid points");
    }
    let order = (alpha.ceil() as usize).saturating_sub(1);
    let beta = alpha - order as f64;
    let h = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|i| lo + i as f64 * h).collect();
    let mut vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut sup_norms = Vec::with_capacity(order + 1);
    for k in 0..=order {
        if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("derivative {k} at x = {}", xs[i])));
        }
        sup_norms.push(vals.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        if k < order {
            vals = grid_derivative(&vals, h);
        }
    }
    let mut seminorm = 0.0f64;
    for i in 0..grid {
        for j in i + 1..grid {
            let r = (vals[i] - vals[j]).abs() / (xs[j] - xs[i]).powf(beta);
            seminorm = seminorm.max(r);
        }
    }
    let norm = sup_norms.iter().copied().fold(0.0, f64::max) + seminorm;
    Ok(HolderEstimate {
        norm,
        sup_norms,
        seminorm,
        order,
        grid_step: h,
    })
}

/// Hölder estimate for a one-dimensional density over its support.
pub fn holder_norm_of_density(model: &DensityModel, alpha: f64, grid: usize) -> Result<HolderEstimate> {
    if model.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: model.dim(),
        });
    }
    let s = model.support();
    holder_norm_estimate(|x| model.pdf_1d(x), s.lo[0], s.hi[0], alpha, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    /// Minimum number of length-eps intervals covering points on the line.
    fn exact_cover_1d(pts: &[f64], eps: f64) -> usize {
        let mut v = pts.to_vec();
        v.sort_by(f64::total_cmp);
        let mut count = 0;
        let mut reach = f64::NEG_INFINITY;
        for x in v {
            if x > reach {
                count += 1;
                reach = x + eps;
            }
        }
        count
    }

    /// Exhaustive search for the fewest data-centred balls of diameter `eps`
    /// covering the points; an upper bound on the exact covering number that
    /// is at most one packing factor above it.
    fn exhaustive_cover(pts: &[f64], dim: usize, eps: f64) -> usize {
        let n = pts.len() / dim;
        let covers: Vec<u32> = (0..n)
            .map(|c| {
                (0..n)
                    .filter(|&i| dist(&pts[c * dim..(c + 1) * dim], &pts[i * dim..(i + 1) * dim]) <= eps / 2.0)
                    .fold(0u32, |m, i| m | (1 << i))
            })
            .collect();
        let full = (1u32 << n) - 1;
        (1..=n)
            .find(|&k| subsets(n, k).any(|s| s.iter().fold(0, |m, &c| m | covers[c]) == full))
            .unwrap()
    }

    fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
        (0u32..(1 << n))
            .filter(move |m| m.count_ones() as usize == k)
            .map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
    }

    #[test]
    fn covering_examples() {
        let line: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let c = covering_number(&line, 1, 0.5).unwrap();
        assert!((2..=3).contains(&c));
        assert_eq!(c, exact_cover_1d(&line, 0.5));
        assert_eq!(covering_number(&[0.3, 0.7], 2, 1e-3).unwrap(), 1);
        assert_eq!(covering_number(&[0.0, 0.0, 10.0, 0.0], 2, 1.0).unwrap(), 2);
    }

    #[test]
    fn greedy_within_packing_factor_in_the_plane() {
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let pts: Vec<f64> = (0..24).map(|_| rng.random::<f64>()).collect();
            let g = covering_number(&pts, 2, 0.5).unwrap();
            let e = exhaustive_cover(&pts, 2, 0.5);
            assert!(g >= e.div_ceil(2) && g <= 2 * e + 2, "greedy {g} exhaustive {e}");
        }
    }

    #[test]
    fn tau_cover_examples() {
        let mut pts: Vec<f64> = (0..99).map(|i| i as f64 * 1e-3).collect();
        pts.push(50.0);
        let m = DiscreteMeasure::from_1d(pts.clone()).unwrap();
        assert_eq!(
            covering_number_tau(&m, 0.2, 0.0).unwrap(),
            covering_number(&pts, 1, 0.2).unwrap()
        );
        assert_eq!(covering_number(&pts, 1, 0.2).unwrap(), 2);
        // Exhaustive discard oracle: dropping any set of ≤ 2 atoms, the best
        // cover of the rest needs one ball, attained only when 50.0 is dropped.
        assert_eq!(covering_number_tau(&m, 0.2, 0.02).unwrap(), 1);
        assert_eq!(covering_number_tau(&m, 1e-6, 0.999).unwrap(), 1);
    }

    #[test]
    fn report_counts_are_monotone_and_serialize() {
        let u = sample(&DensityModel::unit_cube(2), 300, 4).unwrap();
        let grid = [0.05, 0.1, 0.2, 0.4, 0.8];
        let r = CoveringReport::compute(&u, &grid, 0.0).unwrap();
        assert!(r.counts.windows(2).all(|w| w[0] >= w[1]));
        assert!(r.counts.iter().all(|c| *c >= 1));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("epsilon,count,tau\n5.0000000000000003e-2,"));
    }

    #[test]
    fn dimension_examples() {
        let grid = default_epsilon_grid();
        let one = sample(&DensityModel::unit_cube(1), 4096, 1).unwrap();
        let e1 = wasserstein_dim_upper(&one, &grid, CoverRule::Lattice).unwrap();
        assert!(e1.s_hat > 2.0 && e1.s_hat <= 2.1 + 1e-12, "{}", e1.s_hat);
        let pm = DiscreteMeasure::uniform(1, vec![0.5; 50], 0).unwrap();
        assert!(matches!(
            wasserstein_dim_upper(&pm, &grid, CoverRule::Lattice),
            Err(Error::DegenerateFit(_))
        ));
        assert!(wasserstein_dim_upper(&one, &[0.5, 0.4, 0.3], CoverRule::Lattice).is_err());
    }

    #[test]
    fn dimension_grows_with_ambient_dimension() {
        let grid = default_epsilon_grid();
        let est: Vec<f64> = (2..=4)
            .map(|d| {
                let m = sample(&DensityModel::unit_cube(d), 4096, 7).unwrap();
                wasserstein_dim_upper(&m, &grid, CoverRule::Lattice).unwrap().s_hat
            })
            .collect();
        assert!(est[0] <= est[1] && est[1] < est[2], "{est:?}");
        assert!((3.5..=4.5).contains(&est[2]), "{est:?}");
    }

    #[test]
    fn quasi_isometry_examples() {
        let id = |x: &[f64]| x.to_vec();
        let u = DensityModel::uniform_1d(0.0, 1.0).unwrap();
        let r = quasi_isometry_check(id, &u, MetricTag::Euclidean, MetricTag::Euclidean, 100, 1.0, 1).unwrap();
        assert!(r.passed);
        let r = quasi_isometry_check(
            |x: &[f64]| vec![3.0 * x[0]],
            &u,
            MetricTag::Euclidean,
            MetricTag::Euclidean,
            100,
            2.0,
            1,
        )
        .unwrap();
        assert!(!r.passed);
        let v = r.violation.unwrap();
        assert_eq!(v.bound, QiBound::Upper);
        assert!((v.ratio - 3.0).abs() < 1e-12);
        assert!((r.tightest_a - 3.0).abs() < 1e-12);

        // x ↦ x² on pairs (t, 2t): ratio 3t → 0.
        let pairs = pairs_near_origin(200, 1e-9, 1e-3, 5);
        let r = quasi_isometry_check_pairs(
            |x: &[f64]| vec![x[0] * x[0]],
            &pairs,
            MetricTag::Euclidean,
            MetricTag::Euclidean,
            1e6,
        )
        .unwrap();
        assert!(!r.passed);
        assert_eq!(r.violation.unwrap().bound, QiBound::Lower);
    }

    #[test]
    fn holder_examples() {
        let u = DensityModel::uniform_1d(0.0, 1.0).unwrap();
        let e = holder_norm_of_density(&u, 1.0, 201).unwrap();
        assert_eq!(e.sup_norms, vec![1.0]);
        assert_eq!(e.seminorm, 0.0);
        assert_eq!(e.norm, 1.0);

        let e = holder_norm_estimate(|x: f64| x.abs(), -1.0, 1.0, 0.5, 401).unwrap();
        // Oracle scan of ||x|−|y||/|x−y|^½ over the same grid.
        let xs: Vec<f64> = (0..401).map(|i| -1.0 + i as f64 * 2.0 / 400.0).collect();
        let mut oracle = 0.0f64;
        for &x in &xs {
            for &y in &xs {
                if x < y {
                    oracle = oracle.max((x.abs() - y.abs()).abs() / (y - x).sqrt());
                }
            }
        }
        assert!(e.seminorm >= 1.0 - 1e-12);
        assert!((e.seminorm - oracle).abs() < 1e-12);

        let b = DensityModel::bump_benchmark();
        let coarse = holder_norm_of_density(&b, 2.0, 401).unwrap().norm;
        let fine = holder_norm_of_density(&b, 2.0, 801).unwrap().norm;
        assert!(
            coarse.is_finite() && ((fine - coarse) / fine).abs() < 0.05,
            "{coarse} {fine}"
        );
        assert!(holder_norm_estimate(|x: f64| 1.0 / x, 0.0, 1.0, 1.0, 11).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn line_cover_is_exact_and_monotone(pts in prop::collection::vec(0.0f64..5.0, 1..12), e1 in 0.01f64..2.0, e2 in 0.01f64..2.0) {
            let (lo, hi) = (e1.min(e2), e1.max(e2));
            let c_lo = covering_number(&pts, 1, lo).unwrap();
            let c_hi = covering_number(&pts, 1, hi).unwrap();
            prop_assert!(c_hi <= c_lo);
            let exact = exact_cover_1d(&pts, lo);
            prop_assert!(c_lo >= exact && c_lo <= 2 * exact);
        }

        #[test]
        fn tau_never_increases_count(seed in 0u64..500, tau in 0.0f64..0.99, eps in 0.05f64..1.0) {
            let m = sample(&DensityModel::unit_cube(2), 40, seed).unwrap();
            prop_assert!(covering_number_tau(&m, eps, tau).unwrap() <= covering_number(m.points(), 2, eps).unwrap());
        }

        #[test]
        fn qi_pass_is_monotone_in_a(seed in 0u64..500, a in 1.0f64..4.0, bump in 0.0f64..3.0) {
            let u = DensityModel::uniform_1d(0.0, 1.0).unwrap();
            let f = |x: &[f64]| vec![2.5 * x[0] + 0.3 * x[0].sin()];
            let r1 = quasi_isometry_check(f, &u, MetricTag::Euclidean, MetricTag::Euclidean, 50, a, seed).unwrap();
            let r2 = quasi_isometry_check(f, &u, MetricTag::Euclidean, MetricTag::Euclidean, 50, a + bump, seed).unwrap();
            prop_assert!(!r1.passed || r2.passed);
        }
    }
}
