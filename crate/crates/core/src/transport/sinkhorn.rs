//! Entropic optimal transport in the log domain.

use super::{check_dims, CostMatrix, MetricTag};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Stop when the L1 row-marginal violation drops below this.
    pub tol: f64,
}

impl SinkhornOptions {
    pub fn new(epsilon: f64, max_iter: usize) -> Self {
        Self {
            epsilon,
            max_iter,
            tol: 1e-6,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornResult {
    /// Transport cost `⟨P, C⟩` of the entropic plan.
    pub cost: f64,
    /// Regularized objective `⟨P, C⟩ + ε KL(P ‖ a⊗b)`, evaluated in dual form.
    pub regularized: f64,
    pub row_violation: f64,
    pub col_violation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// Dense plan, row-major.
    pub plan: Vec<f64>,
}

fn log_sum_exp(vals: impl Iterator<Item = f64> + Clone) -> f64 {
    let mx = vals.clone().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return mx;
    }
    mx + vals.map(|v| (v - mx).exp()).sum::<f64>().ln()
}

/// Log-domain Sinkhorn on a precomputed cost matrix.
pub fn sinkhorn_log(cost: &CostMatrix, a: &[f64], b: &[f64], opts: SinkhornOptions) -> Result<SinkhornResult> {
    let (n, m) = (cost.rows(), cost.cols());
    if !(opts.epsilon > 0.0) {
        return Err(Error::InvalidArgument("sinkhorn epsilon must be positive".into()));
    }
    if a.len() != n || b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.len(),
        });
    }
    let eps = opts.epsilon;
    let la: Vec<f64> = a.iter().map(|w| w.ln()).collect();
    let lb: Vec<f64> = b.iter().map(|w| w.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut converged = false;
    let mut iterations = 0;
    let mut row_violation = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        for i in 0..n {
            let row = cost.row(i);
            f[i] = -eps * log_sum_exp((0..m).map(|j| lb[j] + (g[j] - row[j]) / eps));
        }
        for j in 0..m {
            g[j] = -eps * log_sum_exp((0..n).map(|i| la[i] + (f[i] - cost.get(i, j)) / eps));
        }
        if f.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(Error::Underflow(format!(
                "sinkhorn potentials left the representable range at epsilon {eps}"
            )));
        }
        // Columns are exact after the g update; measure the rows.
        row_violation = (0..n)
            .map(|i| {
                let row = cost.row(i);
                let s: f64 = (0..m)
                    .map(|j| (la[i] + lb[j] + (f[i] + g[j] - row[j]) / eps).exp())
                    .sum();
                (s - a[i]).abs()
            })
            .sum();
        if row_violation <= opts.tol {
            converged = true;
            break;
        }
    }
    let mut plan = vec![0.0; n * m];
    let mut tc = 0.0;
    let mut col = vec![0.0; m];
    for i in 0..n {
        let row = cost.row(i);
        for j in 0..m {
            let p = (la[i] + lb[j] + (f[i] + g[j] - row[j]) / eps).exp();
            plan[i * m + j] = p;
            tc += p * row[j];
            col[j] += p;
        }
    }
    let col_violation = col.iter().zip(b).map(|(c, w)| (c - w).abs()).sum();
    let regularized =
        a.iter().zip(&f).map(|(w, v)| w * v).sum::<f64>() + b.iter().zip(&g).map(|(w, v)| w * v).sum::<f64>();
    Ok(SinkhornResult {
        cost: tc,
        regularized,
        row_violation,
        col_violation,
        iterations,
        converged,
        f,
        g,
        plan,
    })
}

/// Entropic approximation of W1 between two discrete measures.
pub fn w1_sinkhorn(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    tag: MetricTag,
    epsilon: f64,
    max_iter: usize,
) -> Result<SinkhornResult> {
    w1_sinkhorn_with(a, b, tag, SinkhornOptions::new(epsilon, max_iter))
}

pub fn w1_sinkhorn_with(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    tag: MetricTag,
    opts: SinkhornOptions,
) -> Result<SinkhornResult> {
    check_dims(a, b)?;
    let c = CostMatrix::between(a, b, tag)?;
    sinkhorn_log(&c, a.weights(), b.weights(), opts)
}

/// Debiased divergence `OT_ε(a,b) − ½OT_ε(a,a) − ½OT_ε(b,b)`; zero when `a = b`.
pub fn sinkhorn_divergence(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    tag: MetricTag,
    opts: SinkhornOptions,
) -> Result<f64> {
    Ok(sinkhorn_divergence_grad(a, b, tag, opts, false)?.0)
}

/// Debiased divergence and, if requested, its gradient with respect to the
/// atoms of `b` (row-major, same layout as `b.points()`), by the envelope theorem.
pub fn sinkhorn_divergence_grad(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    tag: MetricTag,
    opts: SinkhornOptions,
    want_grad: bool,
) -> Result<(f64, Vec<f64>)> {
    check_dims(a, b)?;
    let d = b.dim();
    let cab = CostMatrix::between(a, b, tag)?;
    let caa = CostMatrix::between(a, a, tag)?;
    let cbb = CostMatrix::between(b, b, tag)?;
    let ab = sinkhorn_log(&cab, a.weights(), b.weights(), opts)?;
    let aa = sinkhorn_log(&caa, a.weights(), a.weights(), opts)?;
    let bb = sinkhorn_log(&cbb, b.weights(), b.weights(), opts)?;
    let value = ab.regularized - 0.5 * aa.regularized - 0.5 * bb.regularized;
    if !want_grad {
        return Ok((value, Vec::new()));
    }
    let (n, m) = (a.len(), b.len());
    let mut grad = vec![0.0; m * d];
    let mut tmp = vec![0.0; d];
    for i in 0..n {
        for j in 0..m {
            let p = ab.plan[i * m + j];
            if p == 0.0 {
                continue;
            }
            tag.grad_y(a.point(i), b.point(j), &mut tmp)?;
            for k in 0..d {
                grad[j * d + k] += p * tmp[k];
            }
        }
    }
    // Self term: y_j appears in both slots; for a symmetric plan and a
    // symmetric cost both contributions coincide.
    for j in 0..m {
        for l in 0..m {
            let p = 0.5 * (bb.plan[j * m + l] + bb.plan[l * m + j]);
            if p == 0.0 || j == l {
                continue;
            }
            tag.grad_y(b.point(l), b.point(j), &mut tmp)?;
            for k in 0..d {
                grad[j * d + k] -= p * tmp[k];
            }
        }
    }
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample, DensityModel};
    use crate::transport::w1_exact;

    fn m(v: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::from_1d(v.to_vec()).unwrap()
    }

    #[test]
    fn dirac_pair_near_one() {
        let r = w1_sinkhorn(&m(&[0.0]), &m(&[1.0]), MetricTag::Euclidean, 0.01, 100).unwrap();
        assert!((r.cost - 1.0).abs() < 0.05);
        assert!(r.converged);
    }

    #[test]
    fn identical_measures_tend_to_zero() {
        let a = m(&[0.0, 0.3, 0.9, 1.4]);
        let mut prev = f64::INFINITY;
        for eps in [0.5, 0.1, 0.02, 0.005] {
            let r = w1_sinkhorn(&a, &a, MetricTag::Euclidean, eps, 100_000).unwrap();
            assert!(r.cost <= prev + 1e-12);
            prev = r.cost;
        }
        assert!(prev < 1e-6, "{prev}");
        let s = sinkhorn_divergence(&a, &a, MetricTag::Euclidean, SinkhornOptions::new(0.1, 1000)).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn costs_decrease_toward_exact() {
        let u = DensityModel::unit_cube(2);
        let a = sample(&u, 30, 1).unwrap();
        let b = sample(&u, 30, 2).unwrap();
        let exact = w1_exact(&a, &b, MetricTag::Euclidean).unwrap().cost;
        let costs: Vec<f64> = [0.5, 0.1, 0.02]
            .iter()
            .map(|&e| w1_sinkhorn(&a, &b, MetricTag::Euclidean, e, 100_000).unwrap().cost)
            .collect();
        assert!(costs[0] > costs[1] && costs[1] > costs[2], "{costs:?}");
        assert!(costs[2] >= exact - 1e-6);
        assert!(costs[2] - exact < costs[0] - exact);
    }

    #[test]
    fn marginals_within_tolerance_when_converged() {
        let a = m(&[0.0, 0.5, 2.0]);
        let b = m(&[0.1, 1.0]);
        let r = w1_sinkhorn(&a, &b, MetricTag::Euclidean, 0.05, 10_000).unwrap();
        assert!(r.converged && r.row_violation <= 1e-6 && r.col_violation <= 1e-12);
        let budget = w1_sinkhorn(&a, &b, MetricTag::Euclidean, 0.001, 1).unwrap();
        assert!(!budget.converged);
    }

    #[test]
    fn divergence_gradient_matches_finite_differences() {
        let a = m(&[0.0, 0.35, 0.8, 1.2]);
        let ys = vec![0.1, 0.5, 0.55, 1.6, 0.9];
        let opts = SinkhornOptions::new(0.1, 100_000).with_tol(1e-14);
        let b = m(&ys);
        let (_, g) = sinkhorn_divergence_grad(&a, &b, MetricTag::Euclidean, opts, true).unwrap();
        for j in 0..ys.len() {
            let h = 1e-6;
            let mut yp = ys.clone();
            yp[j] += h;
            let mut ym = ys.clone();
            ym[j] -= h;
            let fp = sinkhorn_divergence(&a, &m(&yp), MetricTag::Euclidean, opts).unwrap();
            let fm = sinkhorn_divergence(&a, &m(&ym), MetricTag::Euclidean, opts).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (fd - g[j]).abs() <= 1e-4 * fd.abs().max(g[j].abs()).max(1e-3),
                "j={j} fd={fd} an={}",
                g[j]
            );
        }
    }
}
