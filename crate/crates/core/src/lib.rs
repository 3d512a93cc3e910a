//! Outlier-robust mean estimation on the probability simplex.
//!
//! The crate covers the whole pipeline for studying the sample mean of
//! simplex-valued data under contamination:
//!
//! * [`simplex`]: probability vectors, TV / Hellinger / L2 / Linf /
//!   Wasserstein distances, the sample mean and rebinning;
//! * [`contamination`]: Huber, deterministic Huber, oblivious, parameter and
//!   adversarial contamination, all reproducible from a seed;
//! * [`bounds`]: worst-case risk envelopes, minimax rate shapes, the
//!   two-point modulus construction and confidence radii;
//! * [`montecarlo`]: sweeps over `n`, `k` or `epsilon` with quantile bands,
//!   empirical coverage and log-log rate fits;
//! * [`corpus`]: sentence-length profiles of text corpora, used as
//!   realistic reference and contaminant laws;
//! * [`cli`]: the `simplex-robust` command line tool.

pub mod bounds;
pub mod cli;
pub mod contamination;
pub mod corpus;
pub mod error;
pub mod montecarlo;
pub mod seed;
pub mod simplex;

pub use bounds::{
    confidence_radius, modulus_of_continuity, rate_lower_shape, region_contains, risk_upper_bound,
    ConfidenceSpec, RiskEnvelope,
};
pub use contamination::{
    generate, hc_vs_hdc_risk_check, AdversaryStrategy, Contamination, ContaminationSpec,
};
pub use error::{Error, Result};
pub use montecarlo::{
    empirical_coverage, fit_rate, run_experiment, ExperimentPlan, ExperimentResult,
};
pub use simplex::{
    distance, rebin, sample_mean, DistanceKind, Observation, Policy, ProbVector, Sample,
};
