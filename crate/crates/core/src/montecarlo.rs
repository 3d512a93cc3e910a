//! Monte Carlo harness: repeated-trial risk estimation over a sweep of
//! `n`, `k` or `epsilon`, quantile bands, empirical coverage and log-log
//! rate fitting.
//!
//! Trial `t` of sweep point `i` uses the seed `derive_seed(root, [i, t])`
//! and results are collected in trial order, so the output does not depend
//! on how many threads run the trials.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{confidence_radius, ConfidenceSpec};
use crate::contamination::{generate, ContaminationSpec};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::simplex::{distance_entries, sample_mean, DistanceKind};

/// Default number of trials per sweep point.
pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    N,
    K,
    Epsilon,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::N => "n",
            SweepAxis::K => "k",
            SweepAxis::Epsilon => "epsilon",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepAxis::N),
            "k" => Ok(SweepAxis::K),
            "epsilon" => Ok(SweepAxis::Epsilon),
            other => Err(Error::field(
                "sweep_axis",
                format!("unknown axis `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Values of the two parameters that are not swept. Missing `k` and
/// `epsilon` fall back to the spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixed {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub spec: ContaminationSpec,
    pub sweep: Sweep,
    #[serde(default)]
    pub fixed: Fixed,
    pub trials: usize,
    pub distances: Vec<DistanceKind>,
    #[serde(default)]
    pub root_seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::field("trials", "must be at least 1"));
        }
        if self.distances.is_empty() {
            return Err(Error::field(
                "distances",
                "at least one distance is required",
            ));
        }
        let values = &self.sweep.values;
        if values.is_empty() {
            return Err(Error::field("sweep.values", "empty sweep"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::field(
                "sweep.values",
                "values must be sorted ascending",
            ));
        }
        for &v in values {
            let ok = match self.sweep.axis {
                SweepAxis::N | SweepAxis::K => v >= 1.0 && v.fract() == 0.0,
                SweepAxis::Epsilon => (0.0..0.5).contains(&v),
            };
            if !ok {
                return Err(Error::field(
                    "sweep.values",
                    format!("{v} is not a valid {} value", self.sweep.axis),
                ));
            }
        }
        if self.sweep.axis != SweepAxis::N && self.fixed.n.is_none() {
            return Err(Error::field("fixed.n", "required unless sweeping n"));
        }
        for i in 0..values.len() {
            self.point(i)?;
        }
        Ok(())
    }

    /// The generation spec and sample size of sweep point `index`.
    pub fn point(&self, index: usize) -> Result<(ContaminationSpec, usize)> {
        let value = self.sweep.values[index];
        let (n, k, eps) = match self.sweep.axis {
            SweepAxis::N => (Some(value as usize), self.fixed.k, self.fixed.epsilon),
            SweepAxis::K => (self.fixed.n, Some(value as usize), self.fixed.epsilon),
            SweepAxis::Epsilon => (self.fixed.n, self.fixed.k, Some(value)),
        };
        let n = n
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::field("fixed.n", "must be at least 1"))?;
        let mut spec = self.spec.clone();
        if let Some(eps) = eps {
            spec = spec.with_epsilon(eps)?;
        }
        if let Some(k) = k {
            spec = spec.rebinned(k)?;
        }
        Ok((spec, n))
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("plan serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Mean, nearest-rank 5% / 95% quantiles and Monte Carlo standard error of a
/// set of per-trial errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Nearest-rank quantile of sorted data: element `ceil(p * len)` (1-based).
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl ErrorSummary {
    pub fn from_errors(errors: &[f64]) -> Self {
        assert!(!errors.is_empty(), "at least one trial");
        let t = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / t;
        let stderr = if errors.len() > 1 {
            let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (t - 1.0);
            (var / t).sqrt()
        } else {
            0.0
        };
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            mean,
            q05: nearest_rank(&sorted, 0.05),
            q95: nearest_rank(&sorted, 0.95),
            stderr,
            trials: errors.len(),
        }
    }
}

/// Per-trial errors of the sample mean, one vector per requested distance.
pub fn trial_errors(
    spec: &ContaminationSpec,
    n: usize,
    kinds: &[DistanceKind],
    trials: usize,
    root_seed: u64,
    sweep_index: u64,
) -> Result<Vec<Vec<f64>>> {
    let reference = spec.reference().entries();
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let sample = generate(spec, n, derive_seed(root_seed, &[sweep_index, t]))?;
            let mean = sample_mean(&sample)?;
            Ok(kinds
                .iter()
                .map(|&kind| distance_entries(mean.entries(), reference, kind))
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..kinds.len())
        .map(|d| per_trial.iter().map(|row| row[d]).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub distance: DistanceKind,
    pub mean_error: f64,
    pub q05: f64,
    pub q95: f64,
    pub trials: usize,
    pub mc_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub sweep_axis: SweepAxis,
    #[serde(default)]
    pub plan_digest: String,
    pub rows: Vec<ResultRow>,
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let mut rows = Vec::with_capacity(plan.sweep.values.len() * plan.distances.len());
    for (i, &value) in plan.sweep.values.iter().enumerate() {
        let (spec, n) = plan.point(i)?;
        let errors = trial_errors(
            &spec,
            n,
            &plan.distances,
            plan.trials,
            plan.root_seed,
            i as u64,
        )?;
        for (&kind, errs) in plan.distances.iter().zip(&errors) {
            let s = ErrorSummary::from_errors(errs);
            rows.push(ResultRow {
                sweep_axis: plan.sweep.axis,
                sweep_value: value,
                distance: kind,
                mean_error: s.mean,
                q05: s.q05,
                q95: s.q95,
                trials: s.trials,
                mc_stderr: s.stderr,
            });
        }
    }
    Ok(ExperimentResult {
        sweep_axis: plan.sweep.axis,
        plan_digest: plan.digest(),
        rows,
    })
}

/// [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    plan: &ExperimentPlan,
    threads: usize,
) -> Result<ExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::field("threads", e.to_string()))?;
    pool.install(|| run_experiment(plan))
}

/// Column order of the experiment CSV.
pub const CSV_HEADER: [&str; 8] = [
    "sweep_axis",
    "sweep_value",
    "distance",
    "mean_error",
    "q05",
    "q95",
    "trials",
    "mc_stderr",
];

/// Shortest decimal form of `x` rounded to `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("reparse of formatted float");
    format!("{rounded}")
}

pub fn write_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.sweep_axis.to_string(),
            format_significant(r.sweep_value, 12),
            r.distance.to_string(),
            format_significant(r.mean_error, 12),
            format_significant(r.q05, 12),
            format_significant(r.q95, 12),
            r.trials.to_string(),
            format_significant(r.mc_stderr, 12),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<ExperimentResult> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str, col: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Parse(format!("column {col}: `{s}` is not a number")))
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(ResultRow {
            sweep_axis: rec[0].parse()?,
            sweep_value: num(&rec[1], "sweep_value")?,
            distance: rec[2].parse()?,
            mean_error: num(&rec[3], "mean_error")?,
            q05: num(&rec[4], "q05")?,
            q95: num(&rec[5], "q95")?,
            trials: rec[6].parse().map_err(|_| {
                Error::Parse(format!("column trials: `{}` is not an integer", &rec[6]))
            })?,
            mc_stderr: num(&rec[7], "mc_stderr")?,
        });
    }
    let sweep_axis = match rows.first() {
        Some(r) => r.sweep_axis,
        None => return Err(Error::Parse("CSV has no rows".into())),
    };
    if rows.iter().any(|r| r.sweep_axis != sweep_axis) {
        return Err(Error::Parse("rows mix several sweep axes".into()));
    }
    Ok(ExperimentResult {
        sweep_axis,
        plan_digest: String::new(),
        rows,
    })
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `log y` on `log x`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    for &(x, y) in points {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::field("sweep_value", format!("{x} has no logarithm")));
        }
        if y.is_nan() || y <= 0.0 {
            return Err(Error::NonpositiveError { at: x, value: y });
        }
    }
    let m = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::field("sweep_value", "all sweep values are equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RateFit {
        slope,
        intercept,
        r2,
    })
}

/// Fit `mean_error ~ sweep_value^slope` for one distance.
pub fn fit_rate(result: &ExperimentResult, kind: DistanceKind, axis: SweepAxis) -> Result<RateFit> {
    if axis == SweepAxis::K {
        return Err(Error::field(
            "axis",
            "rates are fitted against n or epsilon",
        ));
    }
    if result.sweep_axis != axis {
        return Err(Error::field(
            "axis",
            format!(
                "result sweeps {} but a fit against {axis} was requested",
                result.sweep_axis
            ),
        ));
    }
    let points: Vec<(f64, f64)> = result
        .rows
        .iter()
        .filter(|r| r.distance == kind)
        .map(|r| (r.sweep_value, r.mean_error))
        .collect();
    fit_log_log(&points)
}

/// Fraction of trials whose sample mean lies within `radius` of the
/// reference.
pub fn coverage_at_radius(
    spec: &ContaminationSpec,
    n: usize,
    radius: f64,
    kind: DistanceKind,
    trials: usize,
    root_seed: u64,
) -> Result<f64> {
    if trials < 100 {
        return Err(Error::field(
            "trials",
            format!("{trials} is below the minimum of 100"),
        ));
    }
    let errors = trial_errors(spec, n, &[kind], trials, root_seed, 0)?;
    let hits = errors[0].iter().filter(|&&d| d <= radius).count();
    Ok(hits as f64 / trials as f64)
}

/// Empirical probability that the confidence region of `c` contains the
/// reference.
pub fn empirical_coverage(
    spec: &ContaminationSpec,
    c: &ConfidenceSpec,
    kind: DistanceKind,
    trials: usize,
    root_seed: u64,
) -> Result<f64> {
    let radius = confidence_radius(c, kind)?;
    coverage_at_radius(spec, c.n, radius, kind, trials, root_seed)
}
