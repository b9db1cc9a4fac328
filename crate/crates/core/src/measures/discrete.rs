//! Weighted point clouds.

use std::io::{BufRead, Write};

use crate::error::{invalid, Error, Result};

/// Weighted atoms in `R^d`, stored row-major (`points[i*d..(i+1)*d]` is atom `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    seed: u64,
}

/// Neumaier-compensated sum, accurate to a few ulps for long weight vectors.
fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + c
}

impl DiscreteMeasure {
    /// Build a measure from flat points and weights. Weights must be
    /// nonnegative and sum to 1 within 1e-12.
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>, seed: u64) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        if points.len() % dim != 0 {
            return invalid(format!("{} coordinates do not split into rows of {dim}", points.len()));
        }
        let n = points.len() / dim;
        if n == 0 {
            return invalid("a discrete measure needs at least one atom");
        }
        if weights.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        if let Some(i) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {i} of atom {}", i / dim)));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return invalid("weights must be finite and nonnegative");
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        Ok(Self {
            dim,
            points,
            weights,
            seed,
        })
    }

    /// Equal weights `1/n`.
    pub fn uniform(dim: usize, points: Vec<f64>, seed: u64) -> Result<Self> {
        if dim == 0 || points.is_empty() || points.len() % dim != 0 {
            return invalid("points must form a nonempty n×d array");
        }
        let n = points.len() / dim;
        Self::new(dim, points, vec![1.0 / n as f64; n], seed)
    }

    /// Weights are rescaled to sum to one.
    pub fn from_unnormalized(dim: usize, points: Vec<f64>, weights: Vec<f64>, seed: u64) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return invalid("weights must have a positive finite sum");
        }
        Self::new(dim, points, weights.iter().map(|w| w / total).collect(), seed)
    }

    pub fn from_1d(values: Vec<f64>) -> Result<Self> {
        Self::uniform(1, values, 0)
    }

    pub fn dirac(at: Vec<f64>) -> Result<Self> {
        let d = at.len();
        Self::new(d, at, vec![1.0], 0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Coordinates of a one-dimensional measure.
    pub fn values_1d(&self) -> &[f64] {
        debug_assert_eq!(self.dim, 1);
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    pub fn has_uniform_weights(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|x| (x - w).abs() <= 1e-15)
    }

    /// Mass of the atoms satisfying `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&[f64]) -> bool) -> f64 {
        self.iter().filter(|(p, _)| pred(p)).map(|(_, w)| w).sum()
    }

    /// Largest pairwise Euclidean distance between atoms (O(n²)).
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(euclid(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// Concatenate two measures with mixing weight `t` on `other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return invalid("mixing weight must lie in [0, 1]");
        }
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        let w: Vec<f64> = self
            .weights
            .iter()
            .map(|w| w * (1.0 - t))
            .chain(other.weights.iter().map(|w| w * t))
            .collect();
        Self::from_unnormalized(self.dim, pts, w, self.seed)
    }

    /// Write as CSV: header `x0,...,x{d-1},w`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.dim).map(|k| format!("x{k}")).collect();
        writeln!(out, "{},w", header.join(","))?;
        for (p, w) in self.iter() {
            for v in p {
                write!(out, "{v:.16e},")?;
            }
            writeln!(out, "{w:.16e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty measure csv".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols.last() != Some(&"w") {
            return Err(Error::Config(format!("bad measure csv header `{header}`")));
        }
        let d = cols.len() - 1;
        let (mut pts, mut w) = (Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("row {}: {e}", lineno + 2)))?;
            if vals.len() != d + 1 {
                return Err(Error::Config(format!("row {} has {} fields", lineno + 2, vals.len())));
            }
            pts.extend_from_slice(&vals[..d]);
            w.push(vals[d]);
        }
        Self::from_unnormalized(d, pts, w, 0)
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `T_#m`: apply `map` to every atom, keeping weights.
pub fn pushforward<F>(m: &DiscreteMeasure, mut map: F) -> Result<DiscreteMeasure>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut pts = Vec::with_capacity(m.points.len());
    let mut out_dim = None;
    for i in 0..m.len() {
        let y = map(m.point(i));
        match out_dim {
            None => out_dim = Some(y.len()),
            Some(d) if d != y.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: y.len(),
                })
            }
            _ => {}
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteMap { index: i });
        }
        pts.extend(y);
    }
    let dim = out_dim.unwrap_or(m.dim);
    if dim == 0 {
        return invalid("map returned an empty point");
    }
    Ok(DiscreteMeasure {
        dim,
        points: pts,
        weights: m.weights.clone(),
        seed: m.seed,
    })
}

/// Pushforward by a scalar map of a one-dimensional measure.
pub fn pushforward_1d<F>(m: &DiscreteMeasure, mut map: F) -> Result<DiscreteMeasure>
where
    F: FnMut(f64) -> f64,
{
    if m.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: m.dim,
        });
    }
    pushforward(m, |p| vec![map(p[0])])
}
