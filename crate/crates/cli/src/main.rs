//! `qmono`: sample states, bound entanglement measures and audit monogamy
//! relations from the command line. Every subcommand writes JSON.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmono_core::antisym::{chain_sequence, pigeonhole_index};
use qmono_core::audit::{audit, nonmonogamy_scan_with, summarize, ConstraintFunction, FunctionId};
use qmono_core::experiments::{records_to_csv, records_to_jsonl, run_experiment, ExperimentConfig};
use qmono_core::measures::{Estimator, Measure};
use qmono_core::random::{haar_pure_on, induced_bipartite, random_subspace, random_tripartite_induced};
use qmono_core::state::{load_state, PureRecord, StateRecord};
use qmono_core::{CutSpec, SeededSampler};

#[derive(Parser)]
#[command(name = "qmono", version, about = "Entanglement bounds and monogamy audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleKind {
    /// Haar-random pure state on C^d ⊗ C^d, written as a density matrix.
    Haar,
    /// Induced state μ_{d², s} on C^d ⊗ C^d.
    Induced,
    /// Induced state on C^d ⊗ C^d ⊗ C^d with environment s.
    Tripartite,
    /// Orthonormal basis of a random s-dimensional subspace of C^d ⊗ C^d.
    Subspace,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random state.
    Sample {
        #[arg(long, value_enum)]
        kind: SampleKind,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound an entanglement measure across a bipartite cut.
    Measure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "0|1")]
        cut: String,
        #[arg(long, default_value = "ef")]
        measure: Measure,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the exhaustive qubit grid for a certified overlap lower bound.
        #[arg(long)]
        certify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check E(A:BC) ≥ f(E(A:B), E(A:C)) on a tripartite state.
    Audit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "0|1|2")]
        cut: String,
        #[arg(long, default_value = "ef")]
        measure: Measure,
        #[arg(long, default_value = "sum")]
        f: FunctionId,
        /// Constant of the dimension-dependent functions.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        certify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit many random tripartite induced states; writes one report per line.
    Scan {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value = "ef")]
        measure: Measure,
        #[arg(long, default_value = "sum")]
        f: FunctionId,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate g_k on antisymmetric states over 2^k + 1 parties and apply the pigeonhole rule.
    AntisymChain {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        max_k: usize,
        #[arg(long, default_value = "ef-roof")]
        estimator: Measure,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-trial records as line-delimited JSON.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Per-trial records as a flat CSV table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())),
        None => print_stdout(&(text + "\n")),
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn print_stdout(text: &str) -> Result<()> {
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn estimator(measure: Measure, seed: u64, restarts: Option<usize>, certify: bool) -> Estimator {
    let est = Estimator::new(measure, seed).certified(certify);
    match restarts {
        Some(r) => est.with_restarts(r),
        None => est,
    }
}

fn constraint(id: FunctionId, c: f64) -> Result<ConstraintFunction> {
    if id == FunctionId::Custom {
        bail!("custom constraint functions are only available from the library");
    }
    let f = ConstraintFunction::new(id);
    Ok(match id {
        FunctionId::DimensionDependentEf | FunctionId::DimensionDependentEr => {
            eprintln!("note: c = {c} is a free constant; no reference value exists for it");
            f.with_param("c", c)
        }
        _ => f,
    })
}

#[derive(Serialize)]
struct ChainOutput {
    d: usize,
    max_k: usize,
    estimator: Measure,
    records: Vec<qmono_core::antisym::ChainRecord>,
    pigeonhole: Option<qmono_core::antisym::PigeonholeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<String>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { kind, d, s, seed, out } => {
            let sampler = SeededSampler::new(seed);
            match kind {
                SampleKind::Haar => {
                    let psi = haar_pure_on::<f64>(vec![d, d], &sampler)?;
                    emit(&StateRecord::from(psi.density().with_label("haar")), out.as_deref())
                }
                SampleKind::Induced => {
                    let rho = induced_bipartite::<f64>(d, s, &sampler)?.with_label(format!("induced d={d} s={s}"));
                    emit(&StateRecord::from(rho), out.as_deref())
                }
                SampleKind::Tripartite => {
                    let rho =
                        random_tripartite_induced::<f64>(d, s, &sampler)?.with_label(format!("tripartite d={d} s={s}"));
                    emit(&StateRecord::from(rho), out.as_deref())
                }
                SampleKind::Subspace => {
                    let basis: Vec<PureRecord> =
                        random_subspace::<f64>(d * d, s, &sampler)?.into_iter().map(PureRecord::from).collect();
                    emit(&basis, out.as_deref())
                }
            }
        }
        Command::Measure { input, cut, measure, restarts, seed, certify, out } => {
            let rho = load_state::<f64>(&input).with_context(|| format!("reading {}", input.display()))?;
            let cut = CutSpec::parse(&cut)?;
            let bracket = estimator(measure, seed, restarts, certify).bracket(&rho, &cut)?;
            emit(&bracket, out.as_deref())
        }
        Command::Audit { input, cut, measure, f, c, restarts, seed, certify, out } => {
            let rho = load_state::<f64>(&input).with_context(|| format!("reading {}", input.display()))?;
            let cut = CutSpec::parse(&cut)?;
            let report = audit(&rho, &cut, &estimator(measure, seed, restarts, certify), &constraint(f, c)?)?;
            emit(&report, out.as_deref())
        }
        Command::Scan { d, s, trials, measure, f, c, restarts, seed, out } => {
            let est = estimator(measure, seed, restarts, false);
            let reports = nonmonogamy_scan_with(d, s, trials, &est, &constraint(f, c)?, &SeededSampler::new(seed))?;
            let mut lines = String::new();
            for r in &reports {
                lines.push_str(&serde_json::to_string(r)?);
                lines.push('\n');
            }
            match out {
                Some(path) => write_text(&path, &lines)?,
                None => print_stdout(&lines)?,
            }
            eprintln!("{}", serde_json::to_string(&summarize(&reports))?);
            Ok(())
        }
        Command::AntisymChain { d, max_k, estimator: measure, c, t, restarts, seed, out } => {
            let records = chain_sequence(d, max_k, &estimator(measure, seed, restarts, false))?;
            let (pigeonhole, diagnostic) = if records.len() < 2 {
                (None, Some("a single record has no ratio".to_string()))
            } else {
                match pigeonhole_index(&records, c, t) {
                    Ok(p) => (Some(p), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            };
            emit(&ChainOutput { d, max_k, estimator: measure, records, pigeonhole, diagnostic }, out.as_deref())
        }
        Command::Experiment { config, out, records, csv } => {
            let cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            let output = run_experiment(&cfg)?;
            if let Some(path) = records {
                write_text(&path, &records_to_jsonl(&output.records)?)?;
            }
            if let Some(path) = csv {
                write_text(&path, &records_to_csv(&output.records))?;
            }
            emit(&output, out.as_deref())
        }
    }
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
