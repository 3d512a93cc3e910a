//! Command line front end.
//!
//! Exit codes: 0 on success, 2 when the input is invalid (bad flags, files
//! that do not parse or violate a schema), 1 when something fails at run
//! time. Diagnostics go to standard error; data goes to standard output or
//! to `--out`. JSON numbers use the shortest representation that round-trips
//! (at most 17 significant digits); CSV numbers are rounded to 12.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bounds::{confidence_radius, ConfidenceSpec};
use crate::contamination::{generate, ContaminationSpec};
use crate::corpus::{ingest, CorpusProfile, TokenizationRules, DEFAULT_K};
use crate::error::{Error, Result};
use crate::montecarlo::{
    fit_rate, format_significant, read_csv, run_experiment_with_threads, write_csv, ExperimentPlan,
    SweepAxis,
};
use crate::simplex::{distance, sample_mean, DistanceKind, ProbVector, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "simplex-robust",
    version,
    about = "Robust mean estimation on the probability simplex"
)]
pub struct Cli {
    /// Root seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent or `-`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for experiments (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a contaminated sample from a spec file.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Sample mean of a sample file, and its distances to a truth vector.
    Estimate {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Confidence radii for the sample mean.
    Confidence {
        #[arg(long)]
        n: usize,
        /// Sparsity of the reference. Without it, the support size of the
        /// mean of `--sample` is used (a heuristic, not a guarantee).
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        /// `tv`, `hellinger`, `l2` or `all`.
        #[arg(long, default_value = "all")]
        kind: String,
        #[arg(long)]
        sample: Option<PathBuf>,
    },
    /// Run an experiment plan and emit one row per sweep point and distance.
    Experiment {
        #[arg(long)]
        plan: PathBuf,
        /// Override the plan's trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Build a sentence-length profile from text files.
    Ingest {
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long)]
        name: Option<String>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Fit a log-log rate to an experiment CSV.
    Rates {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        distance: String,
        #[arg(long)]
        axis: String,
    },
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|e| match Error::from(e) {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match out {
        Some(p) if p.as_os_str() != "-" => Ok(Box::new(BufWriter::new(File::create(p)?))),
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn write_table(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn json_only(format: Option<Format>, command: &str) -> Result<()> {
    if format == Some(Format::Csv) {
        return Err(Error::field(
            "format",
            format!("`{command}` only writes JSON"),
        ));
    }
    Ok(())
}

fn radius_kinds(kind: &str) -> Result<Vec<DistanceKind>> {
    if kind == "all" {
        return Ok(DistanceKind::PRIMARY.to_vec());
    }
    let k: DistanceKind = kind.parse()?;
    if !DistanceKind::PRIMARY.contains(&k) {
        return Err(Error::field(
            "kind",
            format!("no confidence region for `{kind}`"),
        ));
    }
    Ok(vec![k])
}

/// Distances reported by `estimate`.
const REPORTED: [DistanceKind; 6] = [
    DistanceKind::TotalVariation,
    DistanceKind::Hellinger,
    DistanceKind::L2,
    DistanceKind::LInf,
    DistanceKind::Wasserstein(1.0),
    DistanceKind::Wasserstein(2.0),
];

pub fn run(cli: Cli) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Simulate { spec, n } => {
            json_only(format, "simulate")?;
            let spec: ContaminationSpec = read_json(&spec)?;
            let sample = generate(&spec, n, cli.seed)?;
            write_json(&mut *output(&cli.out)?, &sample)
        }
        Command::Estimate { sample, truth } => {
            let sample: Sample = read_json(&sample)?;
            let mean = sample_mean(&sample)?;
            let distances = match truth {
                Some(t) => {
                    let truth: ProbVector = read_json(&t)?;
                    Some(
                        REPORTED
                            .iter()
                            .map(|&kind| Ok((kind.to_string(), distance(&mean, &truth, kind)?)))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                None => None,
            };
            let mut out = output(&cli.out)?;
            if format == Some(Format::Csv) {
                let mut rows: Vec<Vec<String>> = vec![
                    vec!["k".into(), sample.k().to_string()],
                    vec!["n".into(), sample.n().to_string()],
                    vec!["support_size".into(), mean.sparsity().to_string()],
                ];
                for (j, x) in mean.entries().iter().enumerate() {
                    rows.push(vec![format!("mean[{j}]"), format_significant(*x, 12)]);
                }
                for (name, d) in distances.iter().flatten() {
                    rows.push(vec![name.clone(), format_significant(*d, 12)]);
                }
                write_table(&mut *out, &["quantity", "value"], &rows)
            } else {
                let mut report = Map::new();
                report.insert("k".into(), json!(sample.k()));
                report.insert("n".into(), json!(sample.n()));
                report.insert("support_size".into(), json!(mean.sparsity()));
                report.insert("mean".into(), serde_json::to_value(&mean)?);
                if let Some(ds) = distances {
                    let map: Map<String, Value> =
                        ds.into_iter().map(|(k, v)| (k, json!(v))).collect();
                    report.insert("distances".into(), Value::Object(map));
                }
                write_json(&mut *out, &Value::Object(report))
            }
        }
        Command::Confidence {
            n,
            s,
            epsilon,
            delta,
            kind,
            sample,
        } => {
            let kinds = radius_kinds(&kind)?;
            let (s, s_source) = match (s, sample) {
                (Some(s), _) => (s, "given"),
                (None, Some(path)) => {
                    let sample: Sample = read_json(&path)?;
                    (sample_mean(&sample)?.sparsity(), "sample_support")
                }
                (None, None) => return Err(Error::field("s", "pass --s or --sample")),
            };
            let c = ConfidenceSpec::new(n, s, epsilon, delta)?;
            let reports = kinds
                .iter()
                .map(|&k| Ok((k, confidence_radius(&c, k)?)))
                .collect::<Result<Vec<_>>>()?;
            if s_source != "given" {
                eprintln!("note: s = {s} taken from the support of the sample mean");
            }
            let mut out = output(&cli.out)?;
            if format == Some(Format::Csv) {
                let rows: Vec<Vec<String>> = reports
                    .iter()
                    .map(|(k, r)| {
                        vec![
                            k.to_string(),
                            format_significant(*r, 12),
                            n.to_string(),
                            s.to_string(),
                            format_significant(epsilon, 12),
                            format_significant(delta, 12),
                        ]
                    })
                    .collect();
                write_table(
                    &mut *out,
                    &["kind", "radius", "n", "s", "epsilon", "delta"],
                    &rows,
                )
            } else {
                let values: Vec<Value> = reports
                    .iter()
                    .map(|(k, r)| json!({"kind": k, "radius": r, "n": n, "s": s, "epsilon": epsilon, "delta": delta}))
                    .collect();
                match values.as_slice() {
                    [one] => write_json(&mut *out, one),
                    _ => write_json(&mut *out, &values),
                }
            }
        }
        Command::Experiment { plan, trials } => {
            let mut plan: ExperimentPlan = read_json(&plan)?;
            if let Some(t) = trials {
                plan.trials = t;
            }
            let threads = match cli.threads {
                Some(0) => return Err(Error::field("threads", "must be at least 1")),
                Some(t) => t,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            let result = run_experiment_with_threads(&plan, threads)?;
            let mut out = output(&cli.out)?;
            match format {
                Some(Format::Json) => write_json(&mut *out, &result),
                _ => write_csv(&result, &mut *out),
            }
        }
        Command::Ingest { k, name, files } => {
            json_only(format, "ingest")?;
            let rules = TokenizationRules::default();
            let parts = files
                .par_iter()
                .map(|path| {
                    let label = path.file_stem().map_or_else(
                        || path.display().to_string(),
                        |s| s.to_string_lossy().into_owned(),
                    );
                    ingest(open(path)?, &label, k, &rules).map_err(|e| match e {
                        Error::EmptyCorpus => {
                            Error::Parse(format!("{}: no sentences found", path.display()))
                        }
                        other => other,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let label = name.unwrap_or_else(|| {
                parts
                    .iter()
                    .map(|p| p.profile.name.as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            });
            let mut profile = CorpusProfile::empty(label, k)?;
            for (path, part) in files.iter().zip(&parts) {
                if part.invalid_bytes > 0 {
                    eprintln!(
                        "warning: {}: {} invalid UTF-8 bytes replaced",
                        path.display(),
                        part.invalid_bytes
                    );
                }
                profile.merge(&part.profile)?;
            }
            write_json(&mut *output(&cli.out)?, &profile)
        }
        Command::Rates {
            csv,
            distance: d,
            axis,
        } => {
            let kind: DistanceKind = d.parse()?;
            let axis: SweepAxis = axis.parse()?;
            let result = read_csv(open(&csv)?)?;
            let fit = fit_rate(&result, kind, axis)?;
            let mut out = output(&cli.out)?;
            if format == Some(Format::Csv) {
                write_table(
                    &mut *out,
                    &["distance", "axis", "slope", "intercept", "r2"],
                    &[vec![
                        kind.to_string(),
                        axis.to_string(),
                        format_significant(fit.slope, 12),
                        format_significant(fit.intercept, 12),
                        format_significant(fit.r2, 12),
                    ]],
                )
            } else {
                write_json(
                    &mut *out,
                    &json!({"distance": kind, "axis": axis, "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}),
                )
            }
        }
    }
}

/// Parse the process arguments, run, and map the outcome to an exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}
