//! Monte Carlo experiment drivers with CSV output.
//!
//! An experiment is a [`ExperimentSpec`] (kind, sample-size grid, replicate
//! count, seed and kind-specific parameters parsed from a flat config). Each
//! `(n, replicate)` cell draws from its own stream seeded by
//! `hash(seed, n, replicate)`, cells run in parallel, and rows are sorted
//! before they are written, so outputs are byte-identical across reruns.

pub mod config;
mod experiments;
pub mod tail;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

pub use config::{parse_class, parse_model, parse_n_grid, parse_pairs, Params};
pub use experiments::{
    run_conc_yatracos, run_corollary1, run_corollary2, run_dim, run_rate_tv, run_rate_w1, run_wae_end_to_end,
};
pub use tail::TailReport;

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::{fit_rate, RateFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    RateW1,
    RateTV,
    ConcYatracos,
    ConcW1,
    WaeEndToEnd,
    Corollary1,
    Corollary2,
    Dim,
}

const COMMON_KEYS: &[&str] = &["n_grid", "replicates", "seed", "input", "expected_slope", "slope_tol"];

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::RateW1,
        ExperimentKind::RateTV,
        ExperimentKind::ConcYatracos,
        ExperimentKind::ConcW1,
        ExperimentKind::WaeEndToEnd,
        ExperimentKind::Corollary1,
        ExperimentKind::Corollary2,
        ExperimentKind::Dim,
    ];

    /// Subcommand and experiment-column name.
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RateW1 => "rate-w1",
            ExperimentKind::RateTV => "rate-tv",
            ExperimentKind::ConcYatracos => "conc-yatracos",
            ExperimentKind::ConcW1 => "conc-w1",
            ExperimentKind::WaeEndToEnd => "wae",
            ExperimentKind::Corollary1 => "corollary1",
            ExperimentKind::Corollary2 => "corollary2",
            ExperimentKind::Dim => "dim",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }

    /// Keys accepted in this kind's config.
    pub fn allowed_keys(self) -> Vec<&'static str> {
        let extra: &[&str] = match self {
            ExperimentKind::RateW1 | ExperimentKind::ConcW1 => &["tail_points"],
            ExperimentKind::RateTV => &["class", "vc_dim"],
            ExperimentKind::ConcYatracos => &["class", "vc_dim", "k2_floor", "tail_points"],
            ExperimentKind::Corollary1 => &[
                "latent",
                "class",
                "vc_dim",
                "encoder",
                "contamination",
                "contaminant",
                "offset_tol",
            ],
            ExperimentKind::WaeEndToEnd => &[
                "latent",
                "mode",
                "perturbation",
                "epochs",
                "batch",
                "step",
                "lambda",
                "hidden",
                "activation",
                "sinkhorn_epsilon",
                "surrogate",
                "qi_pairs",
            ],
            ExperimentKind::Corollary2 => &["latent", "perturbation", "tolerance"],
            ExperimentKind::Dim => {
                return vec![
                    "input",
                    "n",
                    "seed",
                    "rule",
                    "expected_low",
                    "expected_high",
                    "replicates",
                ]
            }
        };
        COMMON_KEYS.iter().chain(extra).copied().collect()
    }

    /// Kinds whose verdicts include empirical tail probabilities.
    pub fn needs_tail_replicates(self) -> bool {
        matches!(
            self,
            ExperimentKind::RateW1 | ExperimentKind::ConcW1 | ExperimentKind::ConcYatracos
        )
    }
}

/// Minimum replicates for kinds that estimate tail probabilities.
pub const MIN_TAIL_REPLICATES: usize = 20;

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub params: Params,
}

impl ExperimentSpec {
    /// Parse a config for `kind`; `seed` overrides the config's seed.
    pub fn from_config(kind: ExperimentKind, text: &str, seed: Option<u64>) -> Result<Self> {
        let params = Params::new(parse_pairs(text)?, &kind.allowed_keys())?;
        let seed = match seed {
            Some(s) => s,
            None => params.u64("seed", 0)?,
        };
        let (n_grid, replicates) = if kind == ExperimentKind::Dim {
            (vec![params.usize("n", 4096)?], params.usize("replicates", 1)?)
        } else {
            let grid = params
                .raw("n_grid")
                .ok_or_else(|| Error::Config("missing `n_grid`".into()))?;
            (parse_n_grid(grid)?, params.usize("replicates", MIN_TAIL_REPLICATES)?)
        };
        let spec = Self {
            kind,
            n_grid,
            replicates,
            seed,
            params,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        if self.n_grid.iter().any(|n| *n == 0) {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        if self.kind == ExperimentKind::Dim {
            return Ok(());
        }
        if self.n_grid.len() < 4 {
            return Err(Error::Config(format!(
                "grid too short: {} sizes, need at least 4",
                self.n_grid.len()
            )));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        let span = (*self.n_grid.last().unwrap() as f64 / self.n_grid[0] as f64).log10();
        if span < 1.5 - 1e-9 {
            return Err(Error::Config(format!(
                "n_grid spans {span:.2} decades, need at least 1.5"
            )));
        }
        if self.kind.needs_tail_replicates() && self.replicates < MIN_TAIL_REPLICATES {
            return Err(Error::Config(format!(
                "insufficient replicates: {} < {MIN_TAIL_REPLICATES} for tail estimates",
                self.replicates
            )));
        }
        Ok(())
    }

    /// Seed of cell `(n, replicate)`.
    pub fn cell_seed(&self, n: usize, replicate: usize) -> u64 {
        derive_seed(self.seed, &[n as u64, replicate as u64])
    }

    pub fn expected_slope(&self) -> Result<Option<(f64, f64)>> {
        Ok(match self.params.opt_f64("expected_slope")? {
            Some(s) => Some((s, self.params.f64("slope_tol", 0.1)?)),
            None => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub replicate: usize,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub label: String,
    /// `None` when the series is degenerate (e.g. identically zero).
    pub fit: Option<RateFit>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    /// Raw per-cell values, sorted by `(n, replicate, metric)`.
    pub rows: Vec<ResultRow>,
    pub fits: Vec<FitRow>,
    pub tails: Vec<TailReport>,
    /// Per-n statistics and derived constants: `(n, statistic, value)`, with `n = 0` for global ones.
    pub summary: Vec<(usize, String, f64)>,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    fn new(kind: ExperimentKind, rows: Vec<ResultRow>) -> Self {
        Self {
            kind,
            rows,
            fits: Vec::new(),
            tails: Vec::new(),
            summary: Vec::new(),
            checks: Vec::new(),
        }
    }

    /// All acceptance checks passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn fit(&self, label: &str) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.label == label).and_then(|f| f.fit.as_ref())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary_value(&self, n: usize, statistic: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|(m, s, _)| *m == n && s == statistic)
            .map(|(_, _, v)| *v)
    }

    /// Values of `metric` grouped by `n`, in replicate order.
    pub fn series(&self, metric: &str) -> BTreeMap<usize, Vec<f64>> {
        series(&self.rows, metric)
    }

    /// Fit `ln mean(metric)` against `ln n` and record it under `label`.
    fn push_mean_fit(&mut self, label: &str, metric: &str) -> Option<RateFit> {
        let s = self.series(metric);
        let ns: Vec<f64> = s.keys().map(|n| *n as f64).collect();
        let ys: Vec<f64> = s.values().map(|v| crate::stats::mean(v)).collect();
        let (fit, note) = match fit_rate(&ns, &ys) {
            Ok(f) => (Some(f), String::new()),
            Err(e) => (None, format!("degenerate series: {e}")),
        };
        self.fits.push(FitRow {
            label: label.to_string(),
            fit: fit.clone(),
            note,
        });
        fit
    }

    /// Add a slope check against `spec`'s `expected_slope ± slope_tol`, if configured.
    fn push_slope_check(&mut self, spec: &ExperimentSpec, label: &str) -> Result<()> {
        if let Some((expected, tol)) = spec.expected_slope()? {
            let (passed, detail) = match self.fit(label) {
                Some(f) => (
                    (f.slope - expected).abs() <= tol,
                    format!("slope {:.4} vs {expected} ± {tol}", f.slope),
                ),
                None => (false, "no fit".to_string()),
            };
            self.checks.push(Check::new(format!("slope:{label}"), passed, detail));
        }
        Ok(())
    }

    pub fn write_results_csv<W: Write>(&self, out: W) -> Result<()> {
        write_results_csv(&self.rows, out)
    }

    pub fn write_fit_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "label,slope,stderr,intercept,points,note")?;
        for f in &self.fits {
            match &f.fit {
                Some(r) => writeln!(
                    out,
                    "{},{:.16e},{:.16e},{:.16e},{},{}",
                    f.label,
                    r.slope,
                    r.stderr,
                    r.intercept,
                    r.xs.len(),
                    f.note
                )?,
                None => writeln!(out, "{},nan,nan,nan,0,{}", f.label, f.note.replace(',', ";"))?,
            }
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "experiment,n,statistic,value")?;
        for (n, s, v) in &self.summary {
            writeln!(out, "{},{n},{s},{v:.16e}", self.kind.name())?;
        }
        Ok(())
    }

    pub fn write_tail_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", TailReport::CSV_HEADER)?;
        for t in &self.tails {
            t.write_csv_rows(&mut out)?;
        }
        Ok(())
    }

    /// Write `results.csv`, `fit.csv`, `summary.csv`, `tail.csv` and `meta.txt` into `dir`.
    pub fn write_all(&self, dir: &Path, spec: &ExperimentSpec, config_text: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_results_csv(fs::File::create(dir.join("results.csv"))?)?;
        self.write_fit_csv(fs::File::create(dir.join("fit.csv"))?)?;
        self.write_summary_csv(fs::File::create(dir.join("summary.csv"))?)?;
        self.write_tail_csv(fs::File::create(dir.join("tail.csv"))?)?;
        let mut meta = fs::File::create(dir.join("meta.txt"))?;
        writeln!(meta, "experiment = {}", self.kind.name())?;
        writeln!(meta, "seed = {}", spec.seed)?;
        writeln!(meta, "waelab = {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(meta, "n_grid = {:?}", spec.n_grid)?;
        writeln!(meta, "replicates = {}", spec.replicates)?;
        for c in &self.checks {
            writeln!(
                meta,
                "check {} = {} ({})",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.detail
            )?;
        }
        writeln!(meta, "# config")?;
        for line in config_text.lines() {
            writeln!(meta, "# {line}")?;
        }
        Ok(())
    }
}

pub fn write_results_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    writeln!(out, "experiment,n,replicate,metric,value")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.16e}",
            r.experiment, r.n, r.replicate, r.metric, r.value
        )?;
    }
    Ok(())
}

pub fn read_results_csv<R: BufRead>(input: R) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if k == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Config(format!("results.csv line {}: malformed row", k + 1));
        if f.len() != 5 {
            return Err(bad());
        }
        rows.push(ResultRow {
            experiment: f[0].to_string(),
            n: f[1].parse().map_err(|_| bad())?,
            replicate: f[2].parse().map_err(|_| bad())?,
            metric: f[3].to_string(),
            value: f[4].parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}

fn series(rows: &[ResultRow], metric: &str) -> BTreeMap<usize, Vec<f64>> {
    let mut out: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == metric) {
        out.entry(r.n).or_default().push(r.value);
    }
    out
}

/// Evaluate `cell(n, replicate, seed)` on every cell in parallel and return
/// its named values as rows sorted by `(n, replicate, metric)`.
fn run_cells<F>(spec: &ExperimentSpec, cell: F) -> Result<Vec<ResultRow>>
where
    F: Fn(usize, usize, u64) -> Result<Vec<(&'static str, f64)>> + Sync,
{
    let cells: Vec<(usize, usize)> = spec
        .n_grid
        .iter()
        .flat_map(|&n| (0..spec.replicates).map(move |r| (n, r)))
        .collect();
    let per_cell: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(n, r)| {
            let values = cell(n, r, spec.cell_seed(n, r))?;
            Ok(values
                .into_iter()
                .map(|(metric, value)| ResultRow {
                    experiment: spec.kind.name().to_string(),
                    n,
                    replicate: r,
                    metric: metric.to_string(),
                    value,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = per_cell.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.n, a.replicate, &a.metric).cmp(&(b.n, b.replicate, &b.metric)));
    Ok(rows)
}

/// Run the experiment described by `spec`.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    match spec.kind {
        ExperimentKind::RateW1 | ExperimentKind::ConcW1 => run_rate_w1(spec),
        ExperimentKind::RateTV => run_rate_tv(spec),
        ExperimentKind::ConcYatracos => run_conc_yatracos(spec),
        ExperimentKind::WaeEndToEnd => run_wae_end_to_end(spec),
        ExperimentKind::Corollary1 => run_corollary1(spec),
        ExperimentKind::Corollary2 => run_corollary2(spec),
        ExperimentKind::Dim => run_dim(spec),
    }
}

/// Recompute per-metric mean-rate fits from a `results.csv` file alone.
pub fn report(results: &Path) -> Result<Vec<FitRow>> {
    let rows = read_results_csv(BufReader::new(fs::File::open(results)?))?;
    let mut keys: Vec<(String, String)> = rows.iter().map(|r| (r.experiment.clone(), r.metric.clone())).collect();
    keys.sort();
    keys.dedup();
    let mut fits = Vec::new();
    for (experiment, metric) in keys {
        let subset: Vec<ResultRow> = rows.iter().filter(|r| r.experiment == experiment).cloned().collect();
        let s = series(&subset, &metric);
        let ns: Vec<f64> = s.keys().map(|n| *n as f64).collect();
        let ys: Vec<f64> = s.values().map(|v| crate::stats::mean(v)).collect();
        let (fit, note) = match fit_rate(&ns, &ys) {
            Ok(f) => (Some(f), String::new()),
            Err(e) => (None, format!("degenerate series: {e}")),
        };
        fits.push(FitRow {
            label: format!("{experiment}:{metric}"),
            fit,
            note,
        });
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let ok =
            ExperimentSpec::from_config(ExperimentKind::RateW1, "n_grid = 2^6..2^12\nreplicates = 20", None).unwrap();
        assert_eq!(ok.n_grid.len(), 7);
        let short = ExperimentSpec::from_config(ExperimentKind::Corollary1, "n_grid = 64", None);
        assert!(matches!(short, Err(Error::Config(m)) if m.contains("grid too short")));
        let narrow = ExperimentSpec::from_config(ExperimentKind::RateTV, "n_grid = 64,128,256,512", None);
        assert!(narrow.is_err());
        let few = ExperimentSpec::from_config(ExperimentKind::RateW1, "n_grid = 2^6..2^12\nreplicates = 5", None);
        assert!(matches!(few, Err(Error::Config(m)) if m.contains("insufficient replicates")));
        let unknown = ExperimentSpec::from_config(ExperimentKind::RateW1, "n_grid = 2^6..2^12\nclass = bump", None);
        assert!(unknown.is_err());
        let seeded = ExperimentSpec::from_config(ExperimentKind::Dim, "seed = 3", Some(9)).unwrap();
        assert_eq!(seeded.seed, 9);
    }

    #[test]
    fn cell_seeds_differ() {
        let spec = ExperimentSpec::from_config(ExperimentKind::RateW1, "n_grid = 2^6..2^12", None).unwrap();
        assert_ne!(spec.cell_seed(64, 0), spec.cell_seed(64, 1));
        assert_ne!(spec.cell_seed(64, 0), spec.cell_seed(128, 0));
    }

    #[test]
    fn results_round_trip() {
        let rows = vec![ResultRow {
            experiment: "rate-w1".into(),
            n: 64,
            replicate: 3,
            metric: "w1".into(),
            value: 0.125,
        }];
        let mut buf = Vec::new();
        write_results_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_results_csv(buf.as_slice()).unwrap(), rows);
    }
}
