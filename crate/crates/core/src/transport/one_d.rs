//! W1 on the real line.

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

fn require_line(m: &DiscreteMeasure) -> Result<()> {
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: m.dim(),
        });
    }
    Ok(())
}

/// Sorted-matching cost `(1/n) Σ |x_(i) − y_(i)|` for two uniform-weight
/// measures with the same number of atoms.
pub fn w1_1d_closed_form(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    require_line(a)?;
    require_line(b)?;
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "sorted matching needs equal atom counts, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if !a.has_uniform_weights() || !b.has_uniform_weights() {
        return Err(Error::InvalidArgument("sorted matching needs uniform weights".into()));
    }
    let mut x = a.values_1d().to_vec();
    let mut y = b.values_1d().to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    Ok(x.iter().zip(&y).map(|(u, v)| (u - v).abs()).sum::<f64>() / x.len() as f64)
}

/// Exact W1 between arbitrary weighted measures on the line, as `∫ |F − G|`.
pub fn w1_exact_1d(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    require_line(a)?;
    require_line(b)?;
    let mut ev: Vec<(f64, f64)> = a
        .values_1d()
        .iter()
        .zip(a.weights())
        .map(|(x, w)| (*x, *w))
        .chain(b.values_1d().iter().zip(b.weights()).map(|(x, w)| (*x, -*w)))
        .collect();
    ev.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut diff = 0.0;
    let mut total = 0.0;
    for k in 0..ev.len() {
        diff += ev[k].1;
        if k + 1 < ev.len() {
            total += diff.abs() * (ev[k + 1].0 - ev[k].0);
        }
    }
    Ok(total)
}

/// Exact W1 between two uniform-weight samples given as raw values
/// (sorted copies are made). Avoids building measures in hot loops.
pub fn w1_sorted_1d(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (wa, wb) = (1.0 / xs.len() as f64, 1.0 / ys.len() as f64);
    // Merge walk over the two sorted samples.
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut total = 0.0;
    let mut prev = xs[0].min(ys[0]);
    while i < xs.len() || j < ys.len() {
        let next = if j >= ys.len() || (i < xs.len() && xs[i] <= ys[j]) {
            xs[i]
        } else {
            ys[j]
        };
        total += (fa - fb).abs() * (next - prev);
        while i < xs.len() && xs[i] == next {
            fa += wa;
            i += 1;
        }
        while j < ys.len() && ys[j] == next {
            fb += wb;
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}
