//! Points of the probability simplex, the distances between them, and the
//! sample-mean estimator.
//!
//! A [`ProbVector`] is a dense point of the simplex. It doubles as a
//! categorical law over the canonical basis vectors `e_1, ..., e_k`, which is
//! the interpretation under which the Wasserstein distance is evaluated.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on the sum of entries of a simplex point.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// What to do with raw entries that do not sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Reject,
    Normalize,
}

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    pub fn new(raw: Vec<f64>, policy: Policy) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry { index, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = raw.iter().sum();
        match policy {
            Policy::Reject => {
                if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                    return Err(Error::SumOutOfTolerance {
                        sum,
                        tolerance: SIMPLEX_TOLERANCE,
                    });
                }
                Ok(Self { entries: raw })
            }
            Policy::Normalize => {
                if sum <= 0.0 {
                    return Err(Error::ZeroSum);
                }
                Ok(Self {
                    entries: raw.into_iter().map(|x| x / sum).collect(),
                })
            }
        }
    }

    /// The canonical basis vector `e_j` (zero-based `j`).
    pub fn basis(k: usize, j: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyVector);
        }
        if j >= k {
            return Err(Error::field("index", format!("{j} is not below k = {k}")));
        }
        let mut entries = vec![0.0; k];
        entries[j] = 1.0;
        Ok(Self { entries })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self {
            entries: vec![1.0 / k as f64; k],
        })
    }

    pub(crate) fn from_entries_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    /// Indices of the strictly positive entries.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0)
            .map(|(j, _)| j)
    }

    /// Number of nonzero entries.
    pub fn sparsity(&self) -> usize {
        self.support().count()
    }

    /// Convex combination `(1 - t) * self + t * other`.
    pub fn mix(&self, other: &ProbVector, t: f64) -> Result<ProbVector> {
        check_dims(self.k(), other.k())?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::field(
                "t",
                format!("mixing weight {t} outside [0, 1]"),
            ));
        }
        Ok(Self::from_entries_unchecked(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct ProbVectorRepr {
    k: usize,
    entries: Vec<f64>,
}

impl Serialize for ProbVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ProbVectorRepr {
            k: self.k(),
            entries: self.entries.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProbVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ProbVectorRepr::deserialize(deserializer)?;
        if repr.k != repr.entries.len() {
            return Err(serde::de::Error::custom(Error::DeclaredDimension {
                declared: repr.k,
                actual: repr.entries.len(),
            }));
        }
        ProbVector::new(repr.entries, Policy::Reject).map_err(serde::de::Error::custom)
    }
}

/// The distance used to measure estimation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceKind {
    TotalVariation,
    Hellinger,
    L2,
    LInf,
    /// Order-`q` Wasserstein distance between categorical laws on the
    /// canonical basis, with Euclidean ground cost.
    Wasserstein(f64),
}

impl DistanceKind {
    /// The three distances the risk theory is stated for.
    pub const PRIMARY: [DistanceKind; 3] = [
        DistanceKind::TotalVariation,
        DistanceKind::Hellinger,
        DistanceKind::L2,
    ];

    pub fn wasserstein(q: f64) -> Result<Self> {
        if !q.is_finite() || q < 1.0 {
            return Err(Error::BadWassersteinOrder(q));
        }
        Ok(DistanceKind::Wasserstein(q))
    }

    /// Largest distance between two points of the simplex.
    pub fn diameter(self) -> f64 {
        match self {
            DistanceKind::TotalVariation | DistanceKind::LInf => 1.0,
            DistanceKind::Hellinger | DistanceKind::L2 => std::f64::consts::SQRT_2,
            DistanceKind::Wasserstein(_) => std::f64::consts::SQRT_2,
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceKind::TotalVariation => f.write_str("tv"),
            DistanceKind::Hellinger => f.write_str("hellinger"),
            DistanceKind::L2 => f.write_str("l2"),
            DistanceKind::LInf => f.write_str("linf"),
            DistanceKind::Wasserstein(q) => write!(f, "wasserstein:{q}"),
        }
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "tv" | "total_variation" => Ok(DistanceKind::TotalVariation),
            "h" | "hellinger" => Ok(DistanceKind::Hellinger),
            "l2" => Ok(DistanceKind::L2),
            "linf" => Ok(DistanceKind::LInf),
            other => match other.strip_prefix("wasserstein:") {
                Some(q) => {
                    let q: f64 = q
                        .parse()
                        .map_err(|_| Error::UnknownDistance(s.to_string()))?;
                    DistanceKind::wasserstein(q)
                }
                None => Err(Error::UnknownDistance(s.to_string())),
            },
        }
    }
}

impl Serialize for DistanceKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistanceKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn hellinger(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.sqrt() - y.sqrt();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `W_q` between categorical laws on `{e_1, ..., e_k}`. Distinct basis
/// vectors sit at Euclidean distance `sqrt(2)`, so the optimal coupling only
/// pays for the mass it moves: `W_q^q = 2^(q/2) * d_TV`.
pub fn wasserstein(a: &[f64], b: &[f64], q: f64) -> f64 {
    (2f64.powf(q / 2.0) * total_variation(a, b)).powf(1.0 / q)
}

/// Raw-slice distance; callers guarantee equal lengths.
pub(crate) fn distance_entries(a: &[f64], b: &[f64], kind: DistanceKind) -> f64 {
    match kind {
        DistanceKind::TotalVariation => total_variation(a, b),
        DistanceKind::Hellinger => hellinger(a, b),
        DistanceKind::L2 => l2(a, b),
        DistanceKind::LInf => linf(a, b),
        DistanceKind::Wasserstein(q) => wasserstein(a, b, q),
    }
}

pub fn distance(a: &ProbVector, b: &ProbVector, kind: DistanceKind) -> Result<f64> {
    check_dims(a.k(), b.k())?;
    if let DistanceKind::Wasserstein(q) = kind {
        DistanceKind::wasserstein(q)?;
    }
    Ok(distance_entries(a.entries(), b.entries(), kind))
}

/// One observation: either a basis vector (stored by index) or a general
/// point of the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observation {
    Vertex(usize),
    Point(ProbVector),
}

impl Observation {
    fn dim_ok(&self, k: usize) -> bool {
        match self {
            Observation::Vertex(j) => *j < k,
            Observation::Point(p) => p.k() == k,
        }
    }

    /// `<self, weights>`.
    pub(crate) fn dot(&self, weights: &[f64]) -> f64 {
        match self {
            Observation::Vertex(j) => weights[*j],
            Observation::Point(p) => p.entries().iter().zip(weights).map(|(a, b)| a * b).sum(),
        }
    }

    pub(crate) fn add_scaled_to(&self, acc: &mut [f64], scale: f64) {
        match self {
            Observation::Vertex(j) => acc[*j] += scale,
            Observation::Point(p) => {
                for (a, x) in acc.iter_mut().zip(p.entries()) {
                    *a += scale * x;
                }
            }
        }
    }
}

/// An ordered list of observations plus generation provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleRepr", into = "SampleRepr")]
pub struct Sample {
    k: usize,
    observations: Vec<Observation>,
    outlier_indices: Option<Vec<usize>>,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct SampleRepr {
    k: usize,
    n: usize,
    observations: Vec<Observation>,
    #[serde(default)]
    outlier_indices: Option<Vec<usize>>,
    #[serde(default)]
    seed: Option<u64>,
}

impl TryFrom<SampleRepr> for Sample {
    type Error = Error;

    fn try_from(r: SampleRepr) -> Result<Self> {
        if r.n != r.observations.len() {
            return Err(Error::field(
                "n",
                format!(
                    "declared {} but {} observations given",
                    r.n,
                    r.observations.len()
                ),
            ));
        }
        let mut s = Sample::new(r.k, r.observations)?.with_seed(r.seed);
        if let Some(idx) = r.outlier_indices {
            s = s.with_outliers(idx)?;
        }
        Ok(s)
    }
}

impl From<Sample> for SampleRepr {
    fn from(s: Sample) -> Self {
        SampleRepr {
            k: s.k,
            n: s.observations.len(),
            observations: s.observations,
            outlier_indices: s.outlier_indices,
            seed: s.seed,
        }
    }
}

impl Sample {
    pub fn new(k: usize, observations: Vec<Observation>) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyVector);
        }
        for obs in &observations {
            if !obs.dim_ok(k) {
                let actual = match obs {
                    Observation::Vertex(j) => j + 1,
                    Observation::Point(p) => p.k(),
                };
                return Err(Error::DimensionMismatch {
                    left: k,
                    right: actual,
                });
            }
        }
        Ok(Self {
            k,
            observations,
            outlier_indices: None,
            seed: None,
        })
    }

    /// Attach the set of outlier positions; duplicates are removed.
    pub fn with_outliers(mut self, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= self.observations.len() {
                return Err(Error::field(
                    "outlier_indices",
                    format!(
                        "index {last} out of range for n = {}",
                        self.observations.len()
                    ),
                ));
            }
        }
        self.outlier_indices = Some(indices);
        Ok(self)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn outlier_indices(&self) -> Option<&[usize]> {
        self.outlier_indices.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

pub(crate) fn mean_of(k: usize, observations: &[Observation]) -> Vec<f64> {
    let mut acc = vec![0.0; k];
    let mut counts = vec![0u64; k];
    let mut has_points = false;
    for obs in observations {
        match obs {
            Observation::Vertex(j) => counts[*j] += 1,
            Observation::Point(_) => {
                has_points = true;
                obs.add_scaled_to(&mut acc, 1.0);
            }
        }
    }
    let n = observations.len() as f64;
    if !has_points {
        return counts.into_iter().map(|c| c as f64 / n).collect();
    }
    acc.iter()
        .zip(&counts)
        .map(|(a, &c)| (a + c as f64) / n)
        .collect()
}

/// The sample mean `(1/n) * sum_i X_i`.
pub fn sample_mean(sample: &Sample) -> Result<ProbVector> {
    if sample.n() == 0 {
        return Err(Error::EmptySample);
    }
    Ok(ProbVector::from_entries_unchecked(mean_of(
        sample.k(),
        sample.observations(),
    )))
}

/// Half-open index ranges of the `new_k` contiguous groups used by [`rebin`].
/// Group `j` covers `floor(j*k/new_k) .. floor((j+1)*k/new_k)`.
pub fn rebin_groups(k: usize, new_k: usize) -> Result<Vec<std::ops::Range<usize>>> {
    if new_k == 0 || new_k > k {
        return Err(Error::BadTargetDimension { target: new_k, k });
    }
    Ok((0..new_k)
        .map(|j| (j * k / new_k)..((j + 1) * k / new_k))
        .collect())
}

/// Merge adjacent buckets into `new_k` contiguous groups of near-equal width.
pub fn rebin(v: &ProbVector, new_k: usize) -> Result<ProbVector> {
    let groups = rebin_groups(v.k(), new_k)?;
    Ok(ProbVector::from_entries_unchecked(
        groups
            .into_iter()
            .map(|r| v.entries()[r].iter().sum())
            .collect(),
    ))
}
