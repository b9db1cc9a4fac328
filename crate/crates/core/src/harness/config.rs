//! Flat `key = value` experiment configs and model identifiers.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measures::DensityModel;

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// Parse `key = value` lines; `#` starts a comment, blank lines are skipped,
/// repeated keys are errors.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return config_err(format!("line {}: expected `key = value`", lineno + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return config_err(format!("line {}: empty key", lineno + 1));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return config_err(format!("line {}: duplicate key `{k}`", lineno + 1));
        }
    }
    Ok(out)
}

/// Parse a sample-size grid: a comma list (`64, 128, 256`) or a range of
/// powers of two (`2^6..2^12`).
pub fn parse_n_grid(s: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let exp = |t: &str| -> Result<u32> {
            let t = t.trim();
            let Some(e) = t.strip_prefix("2^") else {
                return config_err(format!("range bound `{t}` must look like 2^k"));
            };
            e.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad exponent in `{t}`")))
        };
        let (lo, hi) = (exp(a)?, exp(b)?);
        if lo > hi || hi > 40 {
            return config_err(format!("bad power-of-two range `{s}`"));
        }
        return Ok((lo..=hi).map(|k| 1usize << k).collect());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad sample size `{}`", t.trim())))
        })
        .collect()
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{}`", t.trim())))
        })
        .collect()
}

/// Build a model from an identifier:
///
/// | id | model |
/// |----|-------|
/// | `uniform` | U[0, 1] |
/// | `uniform:a,b` | U[a, b] |
/// | `cube:d` | U([0, 1]^d) |
/// | `gaussian:m,s` | N(m, s²) truncated to m ± 5s |
/// | `bump` | the two-bump benchmark on [0, 1] |
/// | `point:x1,…,xd` | point mass |
pub fn parse_model(id: &str) -> Result<DensityModel> {
    let id = id.trim();
    let (name, args) = match id.split_once(':') {
        Some((n, a)) => (n.trim(), parse_floats(a)?),
        None => (id, Vec::new()),
    };
    let model = match (name, args.as_slice()) {
        ("uniform", []) => DensityModel::uniform_1d(0.0, 1.0)?,
        ("uniform", [a, b]) => DensityModel::uniform_1d(*a, *b)?,
        ("cube", [d]) if *d >= 1.0 && d.fract() == 0.0 => DensityModel::unit_cube(*d as usize),
        ("gaussian", [m, s]) => DensityModel::gaussian_1d(*m, *s)?,
        ("bump", []) => DensityModel::bump_benchmark(),
        ("point", at) if !at.is_empty() => DensityModel::point_mass(at.to_vec())?,
        _ => return config_err(format!("unknown model `{id}`")),
    };
    Ok(model.with_label(id))
}

/// Parse a `;`-separated list of model identifiers.
pub fn parse_class(s: &str) -> Result<Vec<DensityModel>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_model).collect()
}

/// Typed access to the pairs of one config, tracking which keys were read.
#[derive(Debug, Clone)]
pub struct Params {
    pairs: BTreeMap<String, String>,
}

impl Params {
    pub fn new(pairs: BTreeMap<String, String>, allowed: &[&str]) -> Result<Self> {
        if let Some(bad) = pairs.keys().find(|k| !allowed.contains(&k.as_str())) {
            return config_err(format!("unknown key `{bad}` (allowed: {})", allowed.join(", ")));
        }
        Ok(Self { pairs })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.pairs.get(key).map(String::as_str)
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("`{key}` must be a number, got `{v}`"))),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|_| self.f64(key, 0.0)).transpose()
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("`{key}` must be a count, got `{v}`"))),
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("`{key}` must be an unsigned integer, got `{v}`"))),
        }
    }

    pub fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key).map(parse_floats).transpose()
    }

    pub fn model(&self, key: &str, default: &str) -> Result<DensityModel> {
        parse_model(self.raw(key).unwrap_or(default))
    }

    pub fn pairs(&self) -> &BTreeMap<String, String> {
        &self.pairs
    }
}
