//! Total variation, Scheffé sets and the Yatracos minimum-distance estimator.
//!
//! For a finite class of densities the Scheffé sets `{f ≥ g}` (one per
//! unordered pair) form the Yatracos family. The Yatracos norm between two
//! measures is the largest discrepancy they assign to any set of that family;
//! the minimizer picks the class member closest to a sample in that norm.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::measures::{DensityModel, DiscreteMeasure, ModelFamily};
use crate::quadrature::{integrate, integrate_nested, integrate_pieces};

/// Maximum number of disjoint intervals in a one-dimensional Scheffé set.
pub const MAX_INTERVALS: usize = 4;

/// Grid cells per smooth piece when scanning for density crossings.
const SCAN_CELLS: usize = 2048;

/// `distance ≤ eps`, the closeness predicate used throughout.
pub fn is_close(distance: f64, eps: f64) -> bool {
    distance <= eps
}

/// A finite candidate class together with a VC-dimension hint for its
/// Yatracos family.
#[derive(Debug, Clone)]
pub struct CandidateClass {
    members: Vec<DensityModel>,
    vc_dim_hint: usize,
}

impl CandidateClass {
    pub fn new(members: Vec<DensityModel>, vc_dim_hint: usize) -> Result<Self> {
        if members.is_empty() {
            return invalid("candidate class is empty");
        }
        if vc_dim_hint == 0 {
            return invalid("VC-dimension hint must be at least 1");
        }
        let d = members[0].dim();
        if members.iter().any(|m| m.dim() != d) {
            return invalid("candidate class members must share a dimension");
        }
        Ok(Self { members, vc_dim_hint })
    }

    pub fn members(&self) -> &[DensityModel] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn vc_dim_hint(&self) -> usize {
        self.vc_dim_hint
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }
}

/// The region where `f` dominates `g`, restricted to the union of their supports.
#[derive(Debug, Clone)]
pub enum ScheffeSet {
    /// Disjoint closed intervals in increasing order.
    Intervals {
        intervals: Vec<(f64, f64)>,
        source_pair: Box<(DensityModel, DensityModel)>,
    },
    /// Membership decided pointwise by comparing the two densities.
    Region {
        source_pair: Box<(DensityModel, DensityModel)>,
    },
}

impl ScheffeSet {
    pub fn source_pair(&self) -> (&DensityModel, &DensityModel) {
        match self {
            ScheffeSet::Intervals { source_pair, .. } | ScheffeSet::Region { source_pair } => {
                (&source_pair.0, &source_pair.1)
            }
        }
    }

    pub fn intervals(&self) -> Option<&[(f64, f64)]> {
        match self {
            ScheffeSet::Intervals { intervals, .. } => Some(intervals),
            ScheffeSet::Region { .. } => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ScheffeSet::Intervals { intervals, .. } => intervals.iter().any(|&(a, b)| x[0] >= a && x[0] <= b),
            ScheffeSet::Region { source_pair } => {
                let (f, g) = (&source_pair.0, &source_pair.1);
                (f.support().contains(x) || g.support().contains(x)) && f.pdf(x) >= g.pdf(x)
            }
        }
    }
}

/// Anything that can assign probability to a Scheffé set.
pub trait SetMass {
    fn dim(&self) -> usize;
    fn mass(&self, set: &ScheffeSet) -> Result<f64>;
}

impl SetMass for DensityModel {
    fn dim(&self) -> usize {
        DensityModel::dim(self)
    }

    fn mass(&self, set: &ScheffeSet) -> Result<f64> {
        match set {
            ScheffeSet::Intervals { intervals, .. } => {
                let mut s = 0.0;
                for &(a, b) in intervals {
                    s += self.interval_mass(a, b)?;
                }
                Ok(s.min(1.0))
            }
            ScheffeSet::Region { .. } => {
                if self.is_point_mass() {
                    return Ok(if set.contains(&self.support().lo) { 1.0 } else { 0.0 });
                }
                if self.dim() != 2 {
                    return Err(Error::Unsupported(
                        "region masses are computed only in two dimensions".into(),
                    ));
                }
                let sup = self.support();
                let (lo, hi) = (sup.lo.clone(), sup.hi.clone());
                let mut failed = None;
                let v = integrate_nested(
                    |y| {
                        integrate(
                            |x| if set.contains(&[x, y]) { self.pdf(&[x, y]) } else { 0.0 },
                            lo[0],
                            hi[0],
                            1e-9,
                        )
                        .unwrap_or_else(|e| {
                            failed = Some(e);
                            0.0
                        })
                    },
                    lo[1],
                    hi[1],
                    1e-8,
                )?;
                if let Some(e) = failed {
                    return Err(e);
                }
                Ok(v.clamp(0.0, 1.0))
            }
        }
    }
}

impl SetMass for DiscreteMeasure {
    fn dim(&self) -> usize {
        DiscreteMeasure::dim(self)
    }

    fn mass(&self, set: &ScheffeSet) -> Result<f64> {
        Ok(self.mass_where(|p| set.contains(p)).min(1.0))
    }
}

/// Crossing points of `f − g` strictly inside `(a, b)`.
fn crossings(f: &DensityModel, g: &DensityModel, a: f64, b: f64) -> Result<Vec<f64>> {
    if let (ModelFamily::Gaussian { mean: mf, cov: cf }, ModelFamily::Gaussian { mean: mg, cov: cg }) =
        (f.family(), g.family())
    {
        return Ok(gaussian_crossings(f, g, (mf[0], cf[0]), (mg[0], cg[0]), a, b));
    }
    let h = |x: f64| f.pdf_1d(x) - g.pdf_1d(x);
    let mut roots = Vec::new();
    let step = (b - a) / SCAN_CELLS as f64;
    let mut x0 = a + 0.5 * step * 1e-9;
    let mut h0 = h(x0);
    for k in 1..=SCAN_CELLS {
        let x1 = if k == SCAN_CELLS {
            b - 0.5 * step * 1e-9
        } else {
            a + k as f64 * step
        };
        let h1 = h(x1);
        if h0 == 0.0 && k > 1 {
            roots.push(x0);
        } else if h0 * h1 < 0.0 {
            roots.push(bisect(&h, x0, x1)?);
        }
        x0 = x1;
        h0 = h1;
    }
    Ok(roots)
}

fn bisect(h: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let hlo = h(lo);
    if !hlo.is_finite() || !h(hi).is_finite() {
        return Err(Error::RootFinding(format!(
            "non-finite density difference on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (h(mid) < 0.0) == (hlo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Real roots of `log f − log g`, a quadratic for two Gaussians.
fn gaussian_crossings(
    f: &DensityModel,
    g: &DensityModel,
    (mf, vf): (f64, f64),
    (mg, vg): (f64, f64),
    a: f64,
    b: f64,
) -> Vec<f64> {
    // log f(x) = log f(μ_f) − (x − μ_f)² / (2 v_f) on the support.
    let lf = f.pdf_1d(mf).ln();
    let lg = g.pdf_1d(mg).ln();
    let qa = -0.5 / vf + 0.5 / vg;
    let qb = mf / vf - mg / vg;
    let qc = lf - lg - 0.5 * mf * mf / vf + 0.5 * mg * mg / vg;
    let mut roots = Vec::new();
    if qa.abs() < 1e-300 {
        if qb != 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let s = disc.sqrt();
            // Numerically stable pair.
            let q = -0.5 * (qb + qb.signum() * s);
            let (r1, r2) = if q != 0.0 { (q / qa, qc / q) } else { (0.0, 0.0) };
            roots.push(r1.min(r2));
            roots.push(r1.max(r2));
        }
    }
    roots.retain(|r| *r > a && *r < b);
    roots
}

/// Sorted breakpoints splitting the union of supports into pieces on which
/// `f − g` has constant sign.
fn breakpoints_1d(f: &DensityModel, g: &DensityModel) -> Result<Vec<f64>> {
    let (sf, sg) = (f.support(), g.support());
    let mut edges = vec![sf.lo[0], sf.hi[0], sg.lo[0], sg.hi[0]];
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut pts = edges.clone();
    for w in edges.windows(2) {
        if w[1] > w[0] {
            pts.extend(crossings(f, g, w[0], w[1])?);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// The Scheffé set `{x : f(x) ≥ g(x)}` within the union of the supports.
pub fn scheffe_set(f: &DensityModel, g: &DensityModel) -> Result<ScheffeSet> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    let source_pair = Box::new((f.clone(), g.clone()));
    if f.dim() != 1 || f.is_point_mass() || g.is_point_mass() {
        return Ok(ScheffeSet::Region { source_pair });
    }
    let pts = breakpoints_1d(f, g)?;
    let (sf, sg) = (f.support(), g.support());
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let in_union = (mid >= sf.lo[0] && mid <= sf.hi[0]) || (mid >= sg.lo[0] && mid <= sg.hi[0]);
        if !in_union || f.pdf_1d(mid) < g.pdf_1d(mid) {
            continue;
        }
        match intervals.last_mut() {
            Some(last) if last.1 == lo => last.1 = hi,
            _ => intervals.push((lo, hi)),
        }
    }
    if intervals.len() > MAX_INTERVALS {
        return Err(Error::RootFinding(format!(
            "Scheffé set of `{}` over `{}` needs {} intervals (limit {MAX_INTERVALS})",
            f.label(),
            g.label(),
            intervals.len()
        )));
    }
    Ok(ScheffeSet::Intervals { intervals, source_pair })
}

/// `½ ∫ |f − g|` by adaptive quadrature (dimension ≤ 2).
pub fn tv_analytic(f: &DensityModel, g: &DensityModel) -> Result<f64> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    if f.is_point_mass() || g.is_point_mass() {
        return Err(Error::Unsupported(
            "total variation of a point mass against a density".into(),
        ));
    }
    let v = match f.dim() {
        1 => {
            let pts = breakpoints_1d(f, g)?;
            integrate_pieces(|x| (f.pdf_1d(x) - g.pdf_1d(x)).abs(), &pts, 1e-10)?
        }
        2 => {
            let (sf, sg) = (f.support(), g.support());
            let lo = [sf.lo[0].min(sg.lo[0]), sf.lo[1].min(sg.lo[1])];
            let hi = [sf.hi[0].max(sg.hi[0]), sf.hi[1].max(sg.hi[1])];
            let xbreaks = {
                let mut b = vec![lo[0], sf.lo[0], sf.hi[0], sg.lo[0], sg.hi[0], hi[0]];
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            };
            let mut failed = None;
            let v = integrate_nested(
                |y| {
                    integrate_pieces(|x| (f.pdf(&[x, y]) - g.pdf(&[x, y])).abs(), &xbreaks, 1e-9).unwrap_or_else(|e| {
                        failed = Some(e);
                        0.0
                    })
                },
                lo[1],
                hi[1],
                1e-8,
            )?;
            if let Some(e) = failed {
                return Err(e);
            }
            v
        }
        d => return Err(Error::Unsupported(format!("analytic total variation in dimension {d}"))),
    };
    Ok((0.5 * v).clamp(0.0, 1.0))
}

/// The Yatracos family of a class, one set per unordered pair `i < j`.
#[derive(Debug, Clone)]
pub struct YatracosFamily {
    sets: Vec<ScheffeSet>,
}

impl YatracosFamily {
    pub fn new(class: &CandidateClass) -> Result<Self> {
        if class.len() < 2 {
            return invalid("the Yatracos family needs at least two class members");
        }
        let k = class.len();
        let mut sets = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                sets.push(scheffe_set(&class.members[i], &class.members[j])?);
            }
        }
        Ok(Self { sets })
    }

    pub fn sets(&self) -> &[ScheffeSet] {
        &self.sets
    }

    /// `max_A |p(A) − q(A)|` over the family.
    pub fn norm<P: SetMass + ?Sized, Q: SetMass + ?Sized>(&self, p: &P, q: &Q) -> Result<f64> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: q.dim(),
            });
        }
        let mut best = 0.0f64;
        for s in &self.sets {
            best = best.max((p.mass(s)? - q.mass(s)?).abs());
        }
        Ok(best)
    }

    /// Class masses of every set, for reuse against many samples.
    pub fn masses<P: SetMass + ?Sized>(&self, p: &P) -> Result<Vec<f64>> {
        self.sets.iter().map(|s| p.mass(s)).collect()
    }

    /// Yatracos norm of a sample against precomputed masses.
    pub fn norm_against(&self, sample: &DiscreteMeasure, masses: &[f64]) -> Result<f64> {
        let mut best = 0.0f64;
        for (s, m) in self.sets.iter().zip(masses) {
            best = best.max((sample.mass(s)? - m).abs());
        }
        Ok(best)
    }
}

/// Yatracos norm of `p − q` relative to `class`.
pub fn yatracos_norm<P: SetMass + ?Sized, Q: SetMass + ?Sized>(p: &P, q: &Q, class: &CandidateClass) -> Result<f64> {
    YatracosFamily::new(class)?.norm(p, q)
}

/// The class member closest to `samples` in Yatracos norm (lowest index on
/// ties), with its index and distance.
pub fn yatracos_minimizer(samples: &DiscreteMeasure, class: &CandidateClass) -> Result<(usize, DensityModel, f64)> {
    if class.is_empty() {
        return invalid("candidate class is empty");
    }
    if class.len() == 1 {
        let d = 0.0;
        return Ok((0, class.members[0].clone(), d));
    }
    let fam = YatracosFamily::new(class)?;
    let mut best = (0usize, f64::INFINITY);
    for (k, m) in class.members.iter().enumerate() {
        let v = fam.norm(m, samples)?;
        if v < best.1 {
            best = (k, v);
        }
    }
    Ok((best.0, class.members[best.0].clone(), best.1))
}

fn atom_key(p: &[f64]) -> Vec<u64> {
    // +0.0 and −0.0 are the same atom.
    p.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() }).collect()
}

/// Exact total variation between two atomic measures.
pub fn tv_between_discrete(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    // Masses are accumulated separately so the result is exactly symmetric.
    let mut mass: BTreeMap<Vec<u64>, (f64, f64)> = BTreeMap::new();
    for (p, w) in a.iter() {
        mass.entry(atom_key(p)).or_insert((0.0, 0.0)).0 += w;
    }
    for (p, w) in b.iter() {
        mass.entry(atom_key(p)).or_insert((0.0, 0.0)).1 += w;
    }
    (0.5 * mass.values().map(|(x, y)| (x - y).abs()).sum::<f64>()).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample, std_normal_cdf, BoxSupport};
    use proptest::prelude::*;

    fn gauss(m: f64, s: f64) -> DensityModel {
        DensityModel::gaussian_1d(m, s).unwrap()
    }

    #[test]
    fn tv_examples() {
        let f = gauss(0.0, 1.0);
        assert!(tv_analytic(&f, &f).unwrap() < 1e-12);
        let u1 = DensityModel::uniform_1d(0.0, 1.0).unwrap();
        let u2 = DensityModel::uniform_1d(2.0, 3.0).unwrap();
        assert!((tv_analytic(&u1, &u2).unwrap() - 1.0).abs() < 1e-9);
        // 2Φ(Δ/2σ) − 1 for equal variances; truncation at 5σ moves it by < 1e-6.
        let oracle = 2.0 * std_normal_cdf(0.5) - 1.0;
        assert!((oracle - 0.382_924_922_548_026).abs() < 1e-12);
        assert!((tv_analytic(&f, &gauss(1.0, 1.0)).unwrap() - oracle).abs() < 1e-6);
    }

    #[test]
    fn tv_in_two_dimensions() {
        let a = DensityModel::uniform(BoxSupport::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()).unwrap();
        let b = DensityModel::uniform(BoxSupport::new(vec![0.5, 0.0], vec![1.5, 1.0]).unwrap()).unwrap();
        assert!((tv_analytic(&a, &b).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn scheffe_examples() {
        let s = scheffe_set(&gauss(0.0, 1.0), &gauss(1.0, 1.0)).unwrap();
        let iv = s.intervals().unwrap();
        assert_eq!(iv.len(), 1);
        assert_eq!(iv[0].0, -5.0);
        assert!((iv[0].1 - 0.5).abs() < 1e-12);

        let f = gauss(0.0, 1.0);
        let whole = scheffe_set(&f, &f).unwrap();
        assert_eq!(whole.intervals().unwrap(), &[(-5.0, 5.0)]);

        // N(0,1) ≥ N(0,4) on |x| ≤ r with r² = (8/3) ln 2 (ignoring the tiny
        // truncation constants); the wide density wins beyond.
        let s = scheffe_set(&gauss(0.0, 1.0), &gauss(0.0, 2.0)).unwrap();
        let r = (8.0 / 3.0 * 2f64.ln()).sqrt();
        let iv = s.intervals().unwrap();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 + r).abs() < 1e-5 && (iv[0].1 - r).abs() < 1e-5, "{iv:?}");
    }

    #[test]
    fn scheffe_set_satisfies_inequality_at_random_points() {
        use rand::Rng;
        let pairs = [
            (gauss(0.0, 1.0), gauss(0.7, 1.5)),
            (
                DensityModel::bump_benchmark(),
                DensityModel::uniform_1d(0.0, 1.0).unwrap(),
            ),
            (gauss(0.5, 0.3), DensityModel::bump_benchmark()),
        ];
        let mut rng = crate::rng::rng_from_seed(3);
        for (f, g) in &pairs {
            let s = scheffe_set(f, g).unwrap();
            let lo = f.support().lo[0].min(g.support().lo[0]);
            let hi = f.support().hi[0].max(g.support().hi[0]);
            for _ in 0..1000 {
                let x = lo + rng.random::<f64>() * (hi - lo);
                let (fx, gx) = (f.pdf_1d(x), g.pdf_1d(x));
                if (fx - gx).abs() < 1e-9 || (fx == 0.0 && gx == 0.0) {
                    continue;
                }
                assert_eq!(s.contains(&[x]), fx >= gx, "x={x}");
            }
        }
    }

    #[test]
    fn yatracos_examples() {
        let class = CandidateClass::new(vec![gauss(0.0, 1.0), gauss(1.0, 1.0)], 2).unwrap();
        let e = sample(&gauss(0.0, 1.0), 50, 1).unwrap();
        assert_eq!(yatracos_norm(&e, &e, &class).unwrap(), 0.0);
        let v = yatracos_norm(&class.members()[0], &class.members()[1], &class).unwrap();
        let tv = tv_analytic(&class.members()[0], &class.members()[1]).unwrap();
        assert!((v - tv).abs() < 1e-4);
    }

    #[test]
    fn empirical_norm_matches_pointwise_brute_force() {
        let f = gauss(0.0, 1.0);
        let g = gauss(1.0, 1.0);
        let class = CandidateClass::new(vec![f.clone(), g.clone()], 2).unwrap();
        let e = sample(&f, 10, 42).unwrap();
        // Brute force: classify each sample by comparing densities directly;
        // Gaussian mass of {f ≥ g} from an independent grid search for the crossing.
        let frac = e.values_1d().iter().filter(|x| f.pdf_1d(**x) >= g.pdf_1d(**x)).count() as f64 / 10.0;
        let mut cross = -5.0;
        while f.pdf_1d(cross + 1e-6) >= g.pdf_1d(cross + 1e-6) {
            cross += 1e-6;
        }
        let mass = f.cdf(cross).unwrap();
        let v = yatracos_norm(&e, &f, &class).unwrap();
        assert!((v - (frac - mass).abs()).abs() < 1e-5, "{v} vs {}", (frac - mass).abs());
    }

    #[test]
    fn minimizer_examples() {
        let single = CandidateClass::new(vec![gauss(0.0, 1.0)], 1).unwrap();
        let e = sample(&gauss(3.0, 1.0), 20, 1).unwrap();
        assert_eq!(yatracos_minimizer(&e, &single).unwrap().0, 0);

        let class = CandidateClass::new(vec![gauss(0.0, 1.0), gauss(1.0, 1.0)], 2).unwrap();
        let hits = (0..200)
            .filter(|&s| {
                yatracos_minimizer(&sample(&gauss(0.0, 1.0), 500, s).unwrap(), &class)
                    .unwrap()
                    .0
                    == 0
            })
            .count();
        assert!(hits as f64 / 200.0 >= 0.99, "{hits}");

        let mid = sample(&gauss(0.5, 1.0), 500, 8).unwrap();
        let (_, _, d) = yatracos_minimizer(&mid, &class).unwrap();
        let all: Vec<f64> = class
            .members()
            .iter()
            .map(|m| yatracos_norm(m, &mid, &class).unwrap())
            .collect();
        assert!(d <= all.iter().copied().fold(f64::INFINITY, f64::min) + 1e-12);
        assert!(CandidateClass::new(vec![], 1).is_err());
    }

    #[test]
    fn yatracos_norm_bounded_by_tv_outside_class() {
        let class = CandidateClass::new(vec![gauss(0.0, 1.0), gauss(1.0, 1.0), gauss(0.0, 2.0)], 3).unwrap();
        let outside = DensityModel::bump_mixture(
            vec![vec![0.0]],
            vec![2.0],
            vec![1.0],
            0.2,
            BoxSupport::new(vec![-3.0], vec![3.0]).unwrap(),
        )
        .unwrap();
        for f in class.members() {
            let y = yatracos_norm(f, &outside, &class).unwrap();
            assert!(y <= tv_analytic(f, &outside).unwrap() + 1e-9);
        }
    }

    #[test]
    fn discrete_tv_examples() {
        let a = DiscreteMeasure::from_1d(vec![0.0, 1.0]).unwrap();
        let b = DiscreteMeasure::from_1d(vec![0.0, 2.0]).unwrap();
        let c = DiscreteMeasure::from_1d(vec![5.0, 6.0]).unwrap();
        assert_eq!(tv_between_discrete(&a, &a), 0.0);
        assert_eq!(tv_between_discrete(&a, &c), 1.0);
        assert_eq!(tv_between_discrete(&a, &b), 0.5);
        assert!(is_close(0.5, 0.5) && !is_close(0.5000001, 0.5));
    }

    fn atoms(vals: &[u8]) -> DiscreteMeasure {
        DiscreteMeasure::uniform(1, vals.iter().map(|v| *v as f64).collect(), 0).unwrap()
    }

    proptest! {
        #[test]
        fn discrete_tv_is_a_metric(
            a in prop::collection::vec(0u8..6, 1..8),
            b in prop::collection::vec(0u8..6, 1..8),
            c in prop::collection::vec(0u8..6, 1..8),
        ) {
            let (a, b, c) = (atoms(&a), atoms(&b), atoms(&c));
            let ab = tv_between_discrete(&a, &b);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(ab, tv_between_discrete(&b, &a));
            prop_assert!(tv_between_discrete(&a, &c) <= ab + tv_between_discrete(&b, &c) + 1e-15);
        }

        #[test]
        fn yatracos_norm_is_a_pseudometric(s1 in 0u64..1000, s2 in 0u64..1000, s3 in 0u64..1000) {
            let class = CandidateClass::new(vec![gauss(0.0, 1.0), gauss(1.0, 1.0), gauss(0.0, 2.0)], 3).unwrap();
            let fam = YatracosFamily::new(&class).unwrap();
            let g = gauss(0.3, 1.2);
            let (p, q, r) = (sample(&g, 40, s1).unwrap(), sample(&g, 30, s2).unwrap(), sample(&g, 20, s3).unwrap());
            let pq = fam.norm(&p, &q).unwrap();
            prop_assert_eq!(pq, fam.norm(&q, &p).unwrap());
            prop_assert!(fam.norm(&p, &r).unwrap() <= pq + fam.norm(&q, &r).unwrap() + 1e-12);
        }

        #[test]
        fn yatracos_norm_equals_tv_inside_class(m1 in -1.0f64..1.0, m2 in -1.0f64..1.0, s1 in 0.5f64..2.0, s2 in 0.5f64..2.0) {
            let class = CandidateClass::new(vec![gauss(m1, s1), gauss(m2, s2)], 2).unwrap();
            let (f, g) = (&class.members()[0], &class.members()[1]);
            let y = yatracos_norm(f, g, &class).unwrap();
            prop_assert!((y - tv_analytic(f, g).unwrap()).abs() <= 1e-4);
        }
    }
}
