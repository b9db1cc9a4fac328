//! The standard C^∞ bump `exp(-1/(1-t²))` on `(-1, 1)`, normalized to a
//! probability density, with a tabulated distribution function.

use once_cell::sync::Lazy;

use crate::quadrature::integrate_estimate;

const CELLS: usize = 1024;

fn raw(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

struct Table {
    /// cumulative raw mass at the left edge of each cell, plus the total
    cum: Vec<f64>,
    total: f64,
}

static TABLE: Lazy<Table> = Lazy::new(|| {
    let h = 2.0 / CELLS as f64;
    let mut cum = Vec::with_capacity(CELLS + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for k in 0..CELLS {
        let a = -1.0 + k as f64 * h;
        acc += integrate_estimate(raw, a, a + h, 1e-17).value;
        cum.push(acc);
    }
    Table { total: acc, cum }
});

/// ∫ exp(-1/(1-t²)) dt over (-1, 1).
#[cfg(test)]
pub fn normalizer() -> f64 {
    TABLE.total
}

pub fn pdf(t: f64) -> f64 {
    raw(t) / TABLE.total
}

pub fn cdf(t: f64) -> f64 {
    if t <= -1.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let h = 2.0 / CELLS as f64;
    let k = (((t + 1.0) / h) as usize).min(CELLS - 1);
    let a = -1.0 + k as f64 * h;
    let part = integrate_estimate(raw, a, t, 1e-17).value;
    ((TABLE.cum[k] + part) / TABLE.total).clamp(0.0, 1.0)
}
