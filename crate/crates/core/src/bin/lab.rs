//! `lab`: run one experiment from a flat config and write its CSV outputs.
//!
//! Exit codes: 0 on success, 2 when an acceptance check fails, 1 on error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use waelab::harness::{self, parse_pairs, ExperimentKind, ExperimentSpec, FitRow};

#[derive(Parser)]
#[command(
    name = "lab",
    version,
    about = "Monte Carlo checks for Wasserstein autoencoder rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out/<subcommand>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical W1 rate with a bounded-differences tail report.
    RateW1(Common),
    /// Minimum-distance (Yatracos) estimator error.
    RateTv(Common),
    /// Yatracos-norm concentration.
    ConcYatracos(Common),
    /// Empirical W1 concentration (same driver as rate-w1).
    ConcW1(Common),
    /// Latent norm of exact or contaminated encoders.
    Corollary1(Common),
    /// End-to-end error decomposition.
    Wae(Common),
    /// Reconstruction cost of monotone decoders against the two-W1 bound.
    Corollary2(Common),
    /// Upper Wasserstein dimension estimate.
    Dim(Common),
    /// Recompute rate fits from an existing `results.csv`.
    Report(Common),
}

fn run_experiment(kind: ExperimentKind, args: &Common) -> anyhow::Result<bool> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let spec = ExperimentSpec::from_config(kind, &text, args.seed)?;
    let out = harness::run(&spec)?;
    let dir = args.out.clone().unwrap_or_else(|| Path::new("out").join(kind.name()));
    out.write_all(&dir, &spec, &text)?;
    for f in &out.fits {
        match &f.fit {
            Some(r) => println!("fit {}: slope {:.4} ± {:.4}", f.label, r.slope, r.stderr),
            None => println!("fit {}: {}", f.label, f.note),
        }
    }
    for c in &out.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {}", dir.display());
    Ok(out.passed())
}

fn run_report(args: &Common) -> anyhow::Result<bool> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let pairs = parse_pairs(&text)?;
    if let Some(bad) = pairs.keys().find(|k| k.as_str() != "results") {
        bail!("unknown key `{bad}` (allowed: results)");
    }
    let Some(results) = pairs.get("results") else {
        bail!("missing `results`");
    };
    let fits: Vec<FitRow> = harness::report(Path::new(results))?;
    let dir = args.out.clone().unwrap_or_else(|| Path::new("out").join("report"));
    fs::create_dir_all(&dir)?;
    let mut csv = String::from("label,slope,stderr,intercept,points,note\n");
    for f in &fits {
        match &f.fit {
            Some(r) => csv.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{},\n",
                f.label,
                r.slope,
                r.stderr,
                r.intercept,
                r.xs.len()
            )),
            None => csv.push_str(&format!("{},nan,nan,nan,0,{}\n", f.label, f.note.replace(',', ";"))),
        }
    }
    fs::write(dir.join("fit.csv"), csv)?;
    for f in &fits {
        if let Some(r) = &f.fit {
            println!("{}: slope {:.4} ± {:.4}", f.label, r.slope, r.stderr);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RateW1(a) => run_experiment(ExperimentKind::RateW1, a),
        Command::RateTv(a) => run_experiment(ExperimentKind::RateTV, a),
        Command::ConcYatracos(a) => run_experiment(ExperimentKind::ConcYatracos, a),
        Command::ConcW1(a) => run_experiment(ExperimentKind::ConcW1, a),
        Command::Corollary1(a) => run_experiment(ExperimentKind::Corollary1, a),
        Command::Wae(a) => run_experiment(ExperimentKind::WaeEndToEnd, a),
        Command::Corollary2(a) => run_experiment(ExperimentKind::Corollary2, a),
        Command::Dim(a) => run_experiment(ExperimentKind::Dim, a),
        Command::Report(a) => run_report(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
