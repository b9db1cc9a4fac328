//! Wasserstein-1 distance between discrete measures.
//!
//! * [`w1_exact`] solves the transportation problem by network simplex and
//!   returns the optimal coupling with dual potentials.
//! * [`w1_dual_value`] and [`certify_duality`] evaluate the Kantorovich dual
//!   and the primal–dual gap.
//! * [`sinkhorn`] holds the entropic approximation used inside training.
//! * [`one_d`] has the sorted-matching and cdf-integral formulas on the line.
//!
//! Large problems are solved on a sparse candidate graph (nearest
//! neighbours) and then priced against every pair until no pair has negative
//! reduced cost, so the answer is exact either way.

mod network_simplex;
pub mod one_d;
pub mod sinkhorn;

use std::io::Write;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use network_simplex::NetworkSimplex;

pub use one_d::{w1_1d_closed_form, w1_exact_1d, w1_sorted_1d};
pub use sinkhorn::{sinkhorn_divergence, w1_sinkhorn, SinkhornOptions, SinkhornResult};

/// Ground metric `c(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricTag {
    Euclidean,
    L1,
    /// `c(x, y) = 1{x ≠ y}`; W1 under this cost is the total variation distance.
    Trivial,
}

impl MetricTag {
    pub fn cost(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            MetricTag::Euclidean => {
                if x.len() == 1 {
                    (x[0] - y[0]).abs()
                } else {
                    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                }
            }
            MetricTag::L1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            MetricTag::Trivial => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Gradient of `c(x, y)` with respect to `y`, written into `out`.
    /// Zero at `x = y`; errors for the trivial metric.
    pub fn grad_y(self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            MetricTag::Euclidean => {
                let r = self.cost(x, y);
                for k in 0..y.len() {
                    out[k] = if r > 0.0 { (y[k] - x[k]) / r } else { 0.0 };
                }
            }
            MetricTag::L1 => {
                for k in 0..y.len() {
                    let d = y[k] - x[k];
                    out[k] = if d > 0.0 {
                        1.0
                    } else if d < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                }
            }
            MetricTag::Trivial => return Err(Error::Unsupported("the trivial metric has no gradient".into())),
        }
        Ok(())
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricTag::Euclidean => "euclidean",
            MetricTag::L1 => "l1",
            MetricTag::Trivial => "trivial",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(MetricTag::Euclidean),
            "l1" | "manhattan" => Ok(MetricTag::L1),
            "trivial" | "discrete" => Ok(MetricTag::Trivial),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

/// Dense `n × m` cost matrix between the atoms of two measures.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    tag: MetricTag,
}

impl CostMatrix {
    pub fn between(a: &DiscreteMeasure, b: &DiscreteMeasure, tag: MetricTag) -> Result<Self> {
        check_dims(a, b)?;
        let (n, m) = (a.len(), b.len());
        let mut entries = Vec::with_capacity(n * m);
        for i in 0..n {
            let x = a.point(i);
            for j in 0..m {
                entries.push(tag.cost(x, b.point(j)));
            }
        }
        Ok(Self {
            rows: n,
            cols: m,
            entries,
            tag,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tag(&self) -> MetricTag {
        self.tag
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// A coupling between two discrete measures, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// `(i, j, mass)` with positive mass, sorted by `(i, j)`.
    pub coupling: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// `(φ, ψ)` with `φ_i − ψ_j ≤ c(x_i, y_j)`; present for exact solves.
    pub dual_potentials: Option<(Vec<f64>, Vec<f64>)>,
    /// Primal minus dual objective, when potentials are present.
    pub gap: Option<f64>,
}

impl TransportPlan {
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for &(i, j, w) in &self.coupling {
            out[i * self.cols + j] += w;
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.rows];
        for &(i, _, w) in &self.coupling {
            r[i] += w;
        }
        r
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.cols];
        for &(_, j, w) in &self.coupling {
            c[j] += w;
        }
        c
    }

    /// Largest absolute deviation of the marginals from the given weights.
    pub fn marginal_error(&self, a: &[f64], b: &[f64]) -> f64 {
        let r = self.row_sums();
        let c = self.col_sums();
        r.iter()
            .zip(a)
            .chain(c.iter().zip(b))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// `Σ γ_ij c_ij` recomputed from the atoms.
    pub fn recompute_cost(&self, a: &DiscreteMeasure, b: &DiscreteMeasure, tag: MetricTag) -> f64 {
        self.coupling
            .iter()
            .map(|&(i, j, w)| w * tag.cost(a.point(i), b.point(j)))
            .sum()
    }

    /// CSV: a `# cost=… gap=…` line, then `i,j,mass` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match self.gap {
            Some(g) => writeln!(out, "# cost={:.16e} gap={:.16e}", self.cost, g)?,
            None => writeln!(out, "# cost={:.16e} gap=NA", self.cost)?,
        }
        writeln!(out, "i,j,mass")?;
        for &(i, j, w) in &self.coupling {
            writeln!(out, "{i},{j},{w:.16e}")?;
        }
        Ok(())
    }
}

fn check_dims(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

fn check_weights(m: &DiscreteMeasure) -> Result<()> {
    let s: f64 = m.weights().iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("weights sum to {s}, not 1")));
    }
    Ok(())
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Problems with at most this many pairs are solved on the complete graph.
const DENSE_PAIR_LIMIT: usize = 1 << 21;
/// Nearest sources attached to each sink in sparse mode.
const CANDIDATE_NEIGHBOURS: usize = 6;

/// Node supplies; exact integers when both measures have uniform weights.
fn supplies(a: &DiscreteMeasure, b: &DiscreteMeasure) -> (Vec<f64>, f64) {
    let (n, m) = (a.len() as u64, b.len() as u64);
    if a.has_uniform_weights() && b.has_uniform_weights() {
        let l = n / gcd(n, m) * m;
        if l < (1u64 << 52) {
            let mut s = vec![(l / n) as f64; n as usize];
            s.extend(std::iter::repeat_n(-((l / m) as f64), m as usize));
            return (s, l as f64);
        }
    }
    let sa: f64 = a.weights().iter().sum();
    let sb: f64 = b.weights().iter().sum();
    let mut s: Vec<f64> = a.weights().to_vec();
    s.extend(b.weights().iter().map(|w| -w * sa / sb));
    // Put any rounding residue on the heaviest sink.
    let residue: f64 = s.iter().sum();
    let heaviest = (a.len()..s.len())
        .min_by(|&x, &y| s[x].total_cmp(&s[y]))
        .expect("nonempty");
    s[heaviest] -= residue;
    (s, 1.0)
}

/// Exact W1 under `tag`, with optimal coupling, dual potentials and gap.
pub fn w1_exact(a: &DiscreteMeasure, b: &DiscreteMeasure, tag: MetricTag) -> Result<TransportPlan> {
    check_dims(a, b)?;
    check_weights(a)?;
    check_weights(b)?;
    let (n, m) = (a.len(), b.len());
    let (supply, scale) = supplies(a, b);
    let cost = |i: usize, j: usize| tag.cost(a.point(i), b.point(j));

    let dense = n * m <= DENSE_PAIR_LIMIT || n.min(m) <= CANDIDATE_NEIGHBOURS;
    let cost_bound = match tag {
        MetricTag::Trivial => 1.0,
        _ => bounding_diameter(a, b, tag),
    };
    let mut ns = NetworkSimplex::new(supply, cost_bound);
    if dense {
        for i in 0..n {
            for j in 0..m {
                ns.add_arc(i, n + j, cost(i, j));
            }
        }
    } else {
        add_candidate_arcs(&mut ns, n, m, &cost);
    }

    let pivot_budget = 50 * (n + m) * (n + m).max(64);
    let mut rounds = 0;
    loop {
        if !ns.run(pivot_budget) {
            return Err(Error::Solver(format!(
                "network simplex stopped after {} pivots",
                ns.pivots
            )));
        }
        ns.refresh_potentials();
        if dense {
            // Clean up any drift-induced violations on the refreshed potentials.
            if !ns.run(pivot_budget) {
                return Err(Error::Solver("network simplex failed to settle".into()));
            }
            break;
        }
        rounds += 1;
        let added = price_all_pairs(&mut ns, n, m, &cost);
        if added == 0 {
            break;
        }
        if rounds > 10_000 {
            return Err(Error::Solver("pricing rounds did not terminate".into()));
        }
    }
    if ns.artificial_flow() > 1e-9 * scale {
        return Err(Error::Solver(format!(
            "infeasible transport: {} units left on artificial arcs",
            ns.artificial_flow() / scale
        )));
    }
    ns.refresh_potentials();

    let mut coupling: Vec<(usize, usize, f64)> = ns
        .flows()
        .filter(|f| f.2 > 0.0)
        .map(|(u, v, f)| (u, v - n, f / scale))
        .collect();
    coupling.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let primal: f64 = coupling.iter().map(|&(i, j, w)| w * cost(i, j)).sum();

    let pi = ns.potentials();
    let shift = -pi[0];
    let phi: Vec<f64> = (0..n).map(|i| -pi[i] - shift).collect();
    let psi: Vec<f64> = (0..m).map(|j| -pi[n + j] - shift).collect();
    let dual = dual_objective(a, b, &phi, &psi);

    Ok(TransportPlan {
        rows: n,
        cols: m,
        coupling,
        cost: primal,
        gap: Some(primal - dual),
        dual_potentials: Some((phi, psi)),
    })
}

/// Convenience: the optimal cost only.
pub fn w1(a: &DiscreteMeasure, b: &DiscreteMeasure, tag: MetricTag) -> Result<f64> {
    Ok(w1_exact(a, b, tag)?.cost)
}

fn bounding_diameter(a: &DiscreteMeasure, b: &DiscreteMeasure, tag: MetricTag) -> f64 {
    let d = a.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in a.points().chunks_exact(d).chain(b.points().chunks_exact(d)) {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    tag.cost(&lo, &hi)
}

fn add_candidate_arcs(ns: &mut NetworkSimplex, n: usize, m: usize, cost: &impl Fn(usize, usize) -> f64) {
    let k = CANDIDATE_NEIGHBOURS.min(n);
    let mut row: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut seen = std::collections::HashSet::new();
    for j in 0..m {
        row.clear();
        row.extend((0..n).map(|i| (cost(i, j), i)));
        row.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut best: Vec<(f64, usize)> = row[..k].to_vec();
        best.sort_by(|x, y| x.1.cmp(&y.1));
        for (c, i) in best {
            if seen.insert((i, j)) {
                ns.add_arc(i, n + j, c);
            }
        }
    }
    // Each source also reaches its nearest sinks, enough to ship its supply.
    let k_src = (m / n + CANDIDATE_NEIGHBOURS).min(m);
    let mut col: Vec<(f64, usize)> = Vec::with_capacity(m);
    for i in 0..n {
        col.clear();
        col.extend((0..m).map(|j| (cost(i, j), j)));
        col.select_nth_unstable_by(k_src - 1, |x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut best: Vec<(f64, usize)> = col[..k_src].to_vec();
        best.sort_by(|x, y| x.1.cmp(&y.1));
        for (c, j) in best {
            if seen.insert((i, j)) {
                ns.add_arc(i, n + j, c);
            }
        }
    }
}

/// Add the most violated pair for every sink; returns how many arcs were added.
fn price_all_pairs(ns: &mut NetworkSimplex, n: usize, m: usize, cost: &impl Fn(usize, usize) -> f64) -> usize {
    let tol = ns.entering_tolerance();
    let mut new_arcs = Vec::new();
    for j in 0..m {
        let mut best = -tol;
        let mut arg = usize::MAX;
        let mut best_c = 0.0;
        for i in 0..n {
            let c = cost(i, j);
            let rc = ns.reduced_cost_of(i, n + j, c);
            if rc < best {
                best = rc;
                arg = i;
                best_c = c;
            }
        }
        if arg != usize::MAX {
            new_arcs.push((arg, j, best_c));
        }
    }
    for &(i, j, c) in &new_arcs {
        ns.add_arc(i, n + j, c);
    }
    new_arcs.len()
}

fn dual_objective(a: &DiscreteMeasure, b: &DiscreteMeasure, phi: &[f64], psi: &[f64]) -> f64 {
    let pa: f64 = a.weights().iter().zip(phi).map(|(w, p)| w * p).sum();
    let pb: f64 = b.weights().iter().zip(psi).map(|(w, p)| w * p).sum();
    pa - pb
}

/// Slack allowed in the discrete Lipschitz constraint.
pub const LIPSCHITZ_TOL: f64 = 1e-9;

/// Dual objective `Σ a_i φ_i − Σ b_j ψ_j` for potentials obeying
/// `φ_i − ψ_j ≤ c(x_i, y_j)`; by weak duality it never exceeds W1.
pub fn w1_dual_value(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    tag: MetricTag,
    potentials: (&[f64], &[f64]),
) -> Result<f64> {
    check_dims(a, b)?;
    let (phi, psi) = potentials;
    if phi.len() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: phi.len(),
        });
    }
    if psi.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: psi.len(),
        });
    }
    let mut worst = (0, 0, f64::NEG_INFINITY);
    for i in 0..a.len() {
        for j in 0..b.len() {
            let excess = phi[i] - psi[j] - tag.cost(a.point(i), b.point(j));
            if excess > worst.2 {
                worst = (i, j, excess);
            }
        }
    }
    if worst.2 > LIPSCHITZ_TOL {
        return Err(Error::LipschitzViolation {
            i: worst.0,
            j: worst.1,
            excess: worst.2,
        });
    }
    Ok(dual_objective(a, b, phi, psi))
}

/// Dual value for a single critic `f` applied to both supports.
pub fn critic_dual_value(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    tag: MetricTag,
    critic: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    let phi: Vec<f64> = (0..a.len()).map(|i| critic(a.point(i))).collect();
    let psi: Vec<f64> = (0..b.len()).map(|j| critic(b.point(j))).collect();
    w1_dual_value(a, b, tag, (&phi, &psi))
}

/// Certified primal–dual gap of an exact plan: checks the coupling
/// marginals, recomputes the cost, checks dual feasibility and returns
/// `|primal − dual|`.
pub fn certify_duality(a: &DiscreteMeasure, b: &DiscreteMeasure, tag: MetricTag, plan: &TransportPlan) -> Result<f64> {
    let (phi, psi) = plan
        .dual_potentials
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("plan carries no dual potentials".into()))?;
    let marg = plan.marginal_error(a.weights(), b.weights());
    if marg > 1e-9 {
        return Err(Error::Solver(format!("coupling marginals off by {marg:e}")));
    }
    let primal = plan.recompute_cost(a, b, tag);
    let dual = w1_dual_value(a, b, tag, (phi, psi))?;
    Ok((primal - dual).abs())
}
