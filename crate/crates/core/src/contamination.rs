//! Contaminated data generation.
//!
//! Five mechanisms are supported, ordered from the most benign to the most
//! general:
//!
//! * Huber (`hc`): every observation is an outlier independently with
//!   probability `epsilon`, outliers are iid from `Q`.
//! * Huber deterministic (`hdc`): exactly `floor(n * epsilon)` positions,
//!   chosen uniformly, hold iid draws from `Q`.
//! * Oblivious (`oc`): the outlier positions and the joint law of the outlier
//!   block are fixed before the inliers are drawn; the block need not be iid.
//! * Parameter (`pc`): outlier number `t` is drawn from its own categorical
//!   law `theta_t`.
//! * Adversarial (`ac`): a clean iid sample is drawn first, then an adversary
//!   that sees it rewrites at most `floor(n * epsilon)` positions.
//!
//! All randomness comes from three streams derived from the call seed (see
//! [`crate::seed`]): clean draws, outlier positions and outlier values. The
//! clean draw at position `i` and the outlier value at position `i` depend
//! only on the seed, so changing `epsilon` does not reshuffle the inliers.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::ErrorSummary;
use crate::seed::{self, derive_seed, Stream};
use crate::simplex::{
    distance_entries, mean_of, sample_mean, DistanceKind, Observation, ProbVector, Sample,
};

/// Number of outliers allowed for `n` observations at rate `epsilon`.
pub fn outlier_budget(n: usize, epsilon: f64) -> usize {
    // The small offset keeps products such as 100 * 0.29 from flooring one
    // below the intended count.
    ((n as f64) * epsilon + 1e-9).floor().min(n as f64) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Hc,
    Hdc,
    Oc,
    Pc,
    Ac,
}

/// Law of the clean observations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum InlierLaw {
    /// Basis vectors `e_j` drawn with probabilities `reference`.
    #[default]
    Categorical,
    /// Dense simplex points from a Dirichlet law with mean `reference` and
    /// parameters `alpha * k * reference_j` on the support.
    Dirichlet {
        #[serde(default = "unit_alpha")]
        alpha: f64,
    },
}

fn unit_alpha() -> f64 {
    1.0
}

/// Outlier block generator for the oblivious model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum OutlierBlock {
    /// Independent draws from `q`.
    Iid { q: ProbVector },
    /// Every outlier equals `e_target`.
    PointMass { target: usize },
    /// One draw from `q`, repeated at every outlier position.
    SharedDraw { q: ProbVector },
}

/// Concrete adversaries for the adversarial model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum AdversaryStrategy {
    /// Rewrite the first `budget` observations that are not `e_target` into
    /// `e_target`.
    #[serde(rename = "replace_point_mass")]
    ReplaceWithPointMass { target: usize },
    /// Rewrite up to `budget` observations equal to `e_from` into `e_to`.
    ExtremeSwap { from: usize, to: usize },
    /// Spend the whole budget on the single basis vector that pushes the
    /// sample mean furthest from the reference in `distance`.
    GreedyWorstCase { distance: DistanceKind },
}

/// Model-specific outlier mechanism.
#[derive(Debug, Clone, PartialEq)]
pub enum Contamination {
    Huber(ProbVector),
    HuberDeterministic(ProbVector),
    Oblivious(OutlierBlock),
    Parameter(Vec<ProbVector>),
    Adversarial(AdversaryStrategy),
}

impl Contamination {
    pub fn model(&self) -> Model {
        match self {
            Contamination::Huber(_) => Model::Hc,
            Contamination::HuberDeterministic(_) => Model::Hdc,
            Contamination::Oblivious(_) => Model::Oc,
            Contamination::Parameter(_) => Model::Pc,
            Contamination::Adversarial(_) => Model::Ac,
        }
    }
}

/// A complete description of how a contaminated sample is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct ContaminationSpec {
    epsilon: f64,
    reference: ProbVector,
    contamination: Contamination,
    inliers: InlierLaw,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    model: Model,
    epsilon: f64,
    reference: ProbVector,
    contaminant: serde_json::Value,
    #[serde(default)]
    inliers: InlierLaw,
}

impl TryFrom<SpecRepr> for ContaminationSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::field("contaminant", e.to_string());
        let contamination = match r.model {
            Model::Hc => Contamination::Huber(serde_json::from_value(r.contaminant).map_err(bad)?),
            Model::Hdc => Contamination::HuberDeterministic(
                serde_json::from_value(r.contaminant).map_err(bad)?,
            ),
            Model::Oc => {
                Contamination::Oblivious(serde_json::from_value(r.contaminant).map_err(bad)?)
            }
            Model::Pc => {
                Contamination::Parameter(serde_json::from_value(r.contaminant).map_err(bad)?)
            }
            Model::Ac => {
                Contamination::Adversarial(serde_json::from_value(r.contaminant).map_err(bad)?)
            }
        };
        ContaminationSpec::new(r.epsilon, r.reference, contamination)?.with_inliers(r.inliers)
    }
}

impl From<ContaminationSpec> for SpecRepr {
    fn from(s: ContaminationSpec) -> Self {
        let model = s.contamination.model();
        let contaminant = match s.contamination {
            Contamination::Huber(q) | Contamination::HuberDeterministic(q) => {
                serde_json::to_value(q)
            }
            Contamination::Oblivious(b) => serde_json::to_value(b),
            Contamination::Parameter(list) => serde_json::to_value(list),
            Contamination::Adversarial(a) => serde_json::to_value(a),
        }
        .expect("contaminant serializes");
        SpecRepr {
            model,
            epsilon: s.epsilon,
            reference: s.reference,
            contaminant,
            inliers: s.inliers,
        }
    }
}

fn check_index(field: &str, j: usize, k: usize) -> Result<()> {
    if j >= k {
        return Err(Error::field(
            field,
            format!("index {j} is not below k = {k}"),
        ));
    }
    Ok(())
}

fn check_dim(field: &str, v: &ProbVector, k: usize) -> Result<()> {
    if v.k() != k {
        return Err(Error::field(
            field,
            format!("dimension {} differs from reference dimension {k}", v.k()),
        ));
    }
    Ok(())
}

impl ContaminationSpec {
    pub fn new(epsilon: f64, reference: ProbVector, contamination: Contamination) -> Result<Self> {
        if !(0.0..0.5).contains(&epsilon) {
            return Err(Error::field(
                "epsilon",
                format!("{epsilon} is outside [0, 1/2)"),
            ));
        }
        let k = reference.k();
        match &contamination {
            Contamination::Huber(q) | Contamination::HuberDeterministic(q) => {
                check_dim("contaminant", q, k)?
            }
            Contamination::Oblivious(OutlierBlock::Iid { q } | OutlierBlock::SharedDraw { q }) => {
                check_dim("contaminant.q", q, k)?
            }
            Contamination::Oblivious(OutlierBlock::PointMass { target }) => {
                check_index("contaminant.target", *target, k)?
            }
            Contamination::Parameter(list) => {
                for theta in list {
                    check_dim("contaminant", theta, k)?;
                }
            }
            Contamination::Adversarial(a) => match a {
                AdversaryStrategy::ReplaceWithPointMass { target } => {
                    check_index("contaminant.target", *target, k)?
                }
                AdversaryStrategy::ExtremeSwap { from, to } => {
                    check_index("contaminant.from", *from, k)?;
                    check_index("contaminant.to", *to, k)?;
                }
                AdversaryStrategy::GreedyWorstCase { distance } => {
                    if let DistanceKind::Wasserstein(q) = distance {
                        DistanceKind::wasserstein(*q)?;
                    }
                }
            },
        }
        Ok(Self {
            epsilon,
            reference,
            contamination,
            inliers: InlierLaw::Categorical,
        })
    }

    pub fn huber(epsilon: f64, reference: ProbVector, q: ProbVector) -> Result<Self> {
        Self::new(epsilon, reference, Contamination::Huber(q))
    }

    pub fn huber_deterministic(epsilon: f64, reference: ProbVector, q: ProbVector) -> Result<Self> {
        Self::new(epsilon, reference, Contamination::HuberDeterministic(q))
    }

    pub fn adversarial(
        epsilon: f64,
        reference: ProbVector,
        strategy: AdversaryStrategy,
    ) -> Result<Self> {
        Self::new(epsilon, reference, Contamination::Adversarial(strategy))
    }

    pub fn with_inliers(mut self, inliers: InlierLaw) -> Result<Self> {
        if let InlierLaw::Dirichlet { alpha } = inliers {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::field(
                    "inliers.alpha",
                    format!("{alpha} must be positive"),
                ));
            }
        }
        self.inliers = inliers;
        Ok(self)
    }

    /// The same spec at a different contamination rate.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.reference.clone(), self.contamination.clone())?
            .with_inliers(self.inliers)
    }

    /// The same spec with every law rebinned to dimension `new_k`.
    pub fn rebinned(&self, new_k: usize) -> Result<Self> {
        use crate::simplex::rebin;
        if new_k == self.k() {
            return Ok(self.clone());
        }
        let contamination = match &self.contamination {
            Contamination::Huber(q) => Contamination::Huber(rebin(q, new_k)?),
            Contamination::HuberDeterministic(q) => {
                Contamination::HuberDeterministic(rebin(q, new_k)?)
            }
            Contamination::Oblivious(OutlierBlock::Iid { q }) => {
                Contamination::Oblivious(OutlierBlock::Iid {
                    q: rebin(q, new_k)?,
                })
            }
            Contamination::Oblivious(OutlierBlock::SharedDraw { q }) => {
                Contamination::Oblivious(OutlierBlock::SharedDraw {
                    q: rebin(q, new_k)?,
                })
            }
            Contamination::Parameter(list) => Contamination::Parameter(
                list.iter()
                    .map(|t| rebin(t, new_k))
                    .collect::<Result<_>>()?,
            ),
            other @ (Contamination::Oblivious(OutlierBlock::PointMass { .. })
            | Contamination::Adversarial(_)) => other.clone(),
        };
        Self::new(self.epsilon, rebin(&self.reference, new_k)?, contamination)?
            .with_inliers(self.inliers)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn reference(&self) -> &ProbVector {
        &self.reference
    }

    pub fn contamination(&self) -> &Contamination {
        &self.contamination
    }

    pub fn inliers(&self) -> InlierLaw {
        self.inliers
    }

    pub fn model(&self) -> Model {
        self.contamination.model()
    }

    pub fn k(&self) -> usize {
        self.reference.k()
    }
}

/// An adversary sees the clean sample and returns a rewritten one. The
/// generator enforces the budget; implementations are not trusted to.
pub trait Adversary {
    fn corrupt(
        &self,
        clean: &[Observation],
        reference: &ProbVector,
        budget: usize,
    ) -> Vec<Observation>;
}

impl Adversary for AdversaryStrategy {
    fn corrupt(
        &self,
        clean: &[Observation],
        reference: &ProbVector,
        budget: usize,
    ) -> Vec<Observation> {
        let mut out = clean.to_vec();
        match *self {
            AdversaryStrategy::ReplaceWithPointMass { target } => {
                let positions =
                    (0..clean.len()).filter(|&i| clean[i] != Observation::Vertex(target));
                for i in positions.take(budget) {
                    out[i] = Observation::Vertex(target);
                }
            }
            AdversaryStrategy::ExtremeSwap { from, to } => {
                let positions = (0..clean.len()).filter(|&i| clean[i] == Observation::Vertex(from));
                for i in positions.take(budget) {
                    out[i] = Observation::Vertex(to);
                }
            }
            AdversaryStrategy::GreedyWorstCase { distance } => {
                if let Some((target, positions)) = greedy_target(clean, reference, budget, distance)
                {
                    for i in positions {
                        out[i] = Observation::Vertex(target);
                    }
                }
            }
        }
        out
    }
}

/// Exhaustive search over the basis vector to inject. The replaced positions
/// are those whose observation is most aligned with the currently
/// under-represented coordinates (lowest `<x, mean - reference>`), since
/// removing them moves the mean away from the reference.
fn greedy_target(
    clean: &[Observation],
    reference: &ProbVector,
    budget: usize,
    kind: DistanceKind,
) -> Option<(usize, Vec<usize>)> {
    let n = clean.len();
    if budget == 0 || n == 0 {
        return None;
    }
    let k = reference.k();
    let mean = mean_of(k, clean);
    let deviation: Vec<f64> = mean
        .iter()
        .zip(reference.entries())
        .map(|(m, r)| m - r)
        .collect();
    let mut order: Vec<(f64, usize)> = clean
        .iter()
        .enumerate()
        .map(|(i, x)| (x.dot(&deviation), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let step = 1.0 / n as f64;
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for target in 0..k {
        let chosen: Vec<usize> = order
            .iter()
            .map(|&(_, i)| i)
            .filter(|&i| clean[i] != Observation::Vertex(target))
            .take(budget)
            .collect();
        let mut moved = mean.clone();
        for &i in &chosen {
            clean[i].add_scaled_to(&mut moved, -step);
            moved[target] += step;
        }
        let d = distance_entries(&moved, reference.entries(), kind);
        if best.as_ref().is_none_or(|(bd, _, _)| d > *bd) {
            best = Some((d, target, chosen));
        }
    }
    best.map(|(_, t, c)| (t, c))
}

fn categorical(v: &ProbVector) -> WeightedIndex<f64> {
    WeightedIndex::new(v.entries()).expect("simplex points have positive mass")
}

fn draw_vertices(law: &ProbVector, n: usize, rng: &mut ChaCha8Rng) -> Vec<Observation> {
    let dist = categorical(law);
    (0..n)
        .map(|_| Observation::Vertex(dist.sample(rng)))
        .collect()
}

fn draw_clean_inner(
    reference: &ProbVector,
    law: InlierLaw,
    n: usize,
    seed: u64,
) -> Vec<Observation> {
    let mut rng = seed::rng(seed, Stream::Inliers);
    match law {
        InlierLaw::Categorical => draw_vertices(reference, n, &mut rng),
        InlierLaw::Dirichlet { alpha } => {
            let k = reference.k();
            let scale = alpha * k as f64;
            let gammas: Vec<Option<Gamma<f64>>> = reference
                .entries()
                .iter()
                .map(|&r| (r > 0.0).then(|| Gamma::new(scale * r, 1.0).expect("positive shape")))
                .collect();
            let fallback = categorical(reference);
            (0..n)
                .map(|_| {
                    let raw: Vec<f64> = gammas
                        .iter()
                        .map(|g| g.as_ref().map_or(0.0, |g| g.sample(&mut rng)))
                        .collect();
                    let total: f64 = raw.iter().sum();
                    if total > 0.0 && total.is_finite() {
                        Observation::Point(ProbVector::from_entries_unchecked(
                            raw.into_iter().map(|x| x / total).collect(),
                        ))
                    } else {
                        // Every gamma underflowed: fall back to a vertex.
                        Observation::Vertex(fallback.sample(&mut rng))
                    }
                })
                .collect()
        }
    }
}

/// The clean sample `Y_1, ..., Y_n` that [`generate`] starts from for `seed`.
pub fn clean_draw(spec: &ContaminationSpec, n: usize, seed: u64) -> Vec<Observation> {
    draw_clean_inner(spec.reference(), spec.inliers(), n, seed)
}

/// `o` positions out of `n`: the prefix of a seeded permutation, so the sets
/// for increasing `o` are nested.
fn outlier_positions(n: usize, o: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed, Stream::OutlierSet);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm.truncate(o);
    perm.sort_unstable();
    perm
}

fn assemble(
    k: usize,
    mut obs: Vec<Observation>,
    positions: &[usize],
    values: impl IntoIterator<Item = Observation>,
    seed: u64,
) -> Result<Sample> {
    for (&i, v) in positions.iter().zip(values) {
        obs[i] = v;
    }
    Ok(Sample::new(k, obs)?
        .with_outliers(positions.to_vec())?
        .with_seed(Some(seed)))
}

/// Generation at an arbitrary rate in `[0, 1]`; the public entry points
/// restrict the rate to `[0, 1/2)`.
pub(crate) fn generate_at(
    spec: &ContaminationSpec,
    epsilon: f64,
    n: usize,
    seed: u64,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::field("n", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let k = spec.k();
    let clean = clean_draw(spec, n, seed);
    let budget = outlier_budget(n, epsilon);
    match spec.contamination() {
        Contamination::Huber(q) => {
            let mut flags = seed::rng(seed, Stream::OutlierSet);
            let positions: Vec<usize> =
                (0..n).filter(|_| flags.random::<f64>() < epsilon).collect();
            let values = per_position_draws(q, n, seed);
            let picked = positions
                .iter()
                .map(|&i| values[i].clone())
                .collect::<Vec<_>>();
            assemble(k, clean, &positions, picked, seed)
        }
        Contamination::HuberDeterministic(q)
        | Contamination::Oblivious(OutlierBlock::Iid { q }) => {
            let positions = outlier_positions(n, budget, seed);
            let values = per_position_draws(q, n, seed);
            let picked = positions
                .iter()
                .map(|&i| values[i].clone())
                .collect::<Vec<_>>();
            assemble(k, clean, &positions, picked, seed)
        }
        Contamination::Oblivious(OutlierBlock::PointMass { target }) => {
            let positions = outlier_positions(n, budget, seed);
            let values = std::iter::repeat_n(Observation::Vertex(*target), positions.len());
            assemble(k, clean, &positions, values, seed)
        }
        Contamination::Oblivious(OutlierBlock::SharedDraw { q }) => {
            let positions = outlier_positions(n, budget, seed);
            let mut rng = seed::rng(seed, Stream::OutlierDraws);
            let shared = Observation::Vertex(categorical(q).sample(&mut rng));
            let values = std::iter::repeat_n(shared, positions.len());
            assemble(k, clean, &positions, values, seed)
        }
        Contamination::Parameter(thetas) => {
            if thetas.len() != budget {
                return Err(Error::field(
                    "contaminant",
                    format!(
                        "{} parameter vectors given but the outlier budget is {budget}",
                        thetas.len()
                    ),
                ));
            }
            let positions = outlier_positions(n, budget, seed);
            let mut rng = seed::rng(seed, Stream::OutlierDraws);
            let values: Vec<Observation> = thetas
                .iter()
                .map(|t| Observation::Vertex(categorical(t).sample(&mut rng)))
                .collect();
            assemble(k, clean, &positions, values, seed)
        }
        Contamination::Adversarial(strategy) => {
            corrupt_checked(k, clean, spec.reference(), budget, strategy, seed)
        }
    }
}

fn per_position_draws(q: &ProbVector, n: usize, seed: u64) -> Vec<Observation> {
    let mut rng = seed::rng(seed, Stream::OutlierDraws);
    draw_vertices(q, n, &mut rng)
}

fn corrupt_checked(
    k: usize,
    clean: Vec<Observation>,
    reference: &ProbVector,
    budget: usize,
    adversary: &dyn Adversary,
    seed: u64,
) -> Result<Sample> {
    let corrupted = adversary.corrupt(&clean, reference, budget);
    if corrupted.len() != clean.len() {
        return Err(Error::field(
            "adversary",
            format!(
                "returned {} observations for a sample of {}",
                corrupted.len(),
                clean.len()
            ),
        ));
    }
    let changed: Vec<usize> = (0..clean.len())
        .filter(|&i| clean[i] != corrupted[i])
        .collect();
    if changed.len() > budget {
        return Err(Error::BudgetViolation {
            changed: changed.len(),
            budget,
        });
    }
    Ok(Sample::new(k, corrupted)?
        .with_outliers(changed)?
        .with_seed(Some(seed)))
}

/// Draw a contaminated sample of size `n`. Bit-identical for equal inputs.
pub fn generate(spec: &ContaminationSpec, n: usize, seed: u64) -> Result<Sample> {
    generate_at(spec, spec.epsilon(), n, seed)
}

/// Adversarial generation with a caller-supplied adversary. The clean sample
/// is drawn from `spec`'s reference and inlier law; the contaminant of
/// `spec` is ignored.
pub fn generate_adversarial(
    spec: &ContaminationSpec,
    adversary: &dyn Adversary,
    n: usize,
    seed: u64,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::field("n", "must be at least 1"));
    }
    let clean = clean_draw(spec, n, seed);
    let budget = outlier_budget(n, spec.epsilon());
    corrupt_checked(spec.k(), clean, spec.reference(), budget, adversary, seed)
}

/// Monte Carlo estimates of both sides of
/// `R_HC(eps) <= R_HDC(2 eps) + exp(-n eps / 3) * R_HDC(1)` for the sample mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskComparison {
    pub hc_risk: f64,
    pub hc_stderr: f64,
    pub hdc_risk_2eps: f64,
    pub hdc_2eps_stderr: f64,
    /// Risk when every observation is an outlier.
    pub hdc_risk_full: f64,
    pub hdc_full_stderr: f64,
    /// `exp(-n eps / 3)`.
    pub tail_factor: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Standard error of `slack`, treating the three estimates as independent.
    pub combined_stderr: f64,
}

pub fn hc_vs_hdc_risk_check(
    reference: &ProbVector,
    q: &ProbVector,
    epsilon: f64,
    n: usize,
    trials: usize,
    kind: DistanceKind,
    seed: u64,
) -> Result<RiskComparison> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::field(
            "epsilon",
            format!("{epsilon} must satisfy 0 <= 2 epsilon < 1"),
        ));
    }
    if trials < 100 {
        return Err(Error::field(
            "trials",
            format!("{trials} is below the minimum of 100"),
        ));
    }
    let hc = ContaminationSpec::huber(epsilon, reference.clone(), q.clone())?;
    let hdc = ContaminationSpec::huber_deterministic(0.0, reference.clone(), q.clone())?;
    let risk = |spec: &ContaminationSpec, eps: f64| -> Result<ErrorSummary> {
        let errors = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let s = generate_at(spec, eps, n, derive_seed(seed, &[t]))?;
                Ok(distance_entries(
                    sample_mean(&s)?.entries(),
                    reference.entries(),
                    kind,
                ))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(ErrorSummary::from_errors(&errors))
    };
    let hc_s = risk(&hc, epsilon)?;
    let hdc2 = risk(&hdc, 2.0 * epsilon)?;
    let full = risk(&hdc, 1.0)?;
    let tail_factor = (-(n as f64) * epsilon / 3.0).exp();
    let rhs = hdc2.mean + tail_factor * full.mean;
    Ok(RiskComparison {
        hc_risk: hc_s.mean,
        hc_stderr: hc_s.stderr,
        hdc_risk_2eps: hdc2.mean,
        hdc_2eps_stderr: hdc2.stderr,
        hdc_risk_full: full.mean,
        hdc_full_stderr: full.stderr,
        tail_factor,
        rhs,
        slack: rhs - hc_s.mean,
        combined_stderr: (hc_s.stderr.powi(2)
            + hdc2.stderr.powi(2)
            + (tail_factor * full.stderr).powi(2))
        .sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::Policy;

    fn pv(raw: &[f64]) -> ProbVector {
        ProbVector::new(raw.to_vec(), Policy::Normalize).unwrap()
    }

    fn hdc(eps: f64) -> ContaminationSpec {
        ContaminationSpec::huber_deterministic(eps, pv(&[0.5, 0.3, 0.2]), pv(&[0.0, 0.0, 1.0]))
            .unwrap()
    }

    #[test]
    fn budget_uses_floor() {
        assert_eq!(outlier_budget(10, 0.2), 2);
        assert_eq!(outlier_budget(100, 0.29), 29);
        assert_eq!(outlier_budget(7, 0.49), 3);
        assert_eq!(outlier_budget(5, 0.0), 0);
        assert_eq!(outlier_budget(5, 1.0), 5);
    }

    #[test]
    fn zero_budget_is_clean_iid() {
        let spec = hdc(0.0);
        let s = generate(&spec, 10, 3).unwrap();
        assert_eq!(s.n(), 10);
        assert_eq!(s.outlier_indices(), Some(&[][..]));
        assert_eq!(s.observations(), clean_draw(&spec, 10, 3).as_slice());
    }

    #[test]
    fn hdc_has_exact_outlier_count() {
        for seed in 0..20 {
            let s = generate(&hdc(0.2), 10, seed).unwrap();
            assert_eq!(s.outlier_indices().unwrap().len(), 2);
        }
    }

    #[test]
    fn replace_point_mass_changes_exactly_the_budget() {
        // The target has no mass under the reference, so every replacement
        // is visible.
        let reference = pv(&[0.5, 0.5, 0.0]);
        let spec = ContaminationSpec::adversarial(
            0.1,
            reference,
            AdversaryStrategy::ReplaceWithPointMass { target: 2 },
        )
        .unwrap();
        let s = generate(&spec, 100, 11).unwrap();
        let clean = clean_draw(&spec, 100, 11);
        let diff: Vec<usize> = (0..100)
            .filter(|&i| clean[i] != s.observations()[i])
            .collect();
        assert_eq!(diff.len(), 10);
        assert!(diff
            .iter()
            .all(|&i| s.observations()[i] == Observation::Vertex(2)));
        assert_eq!(s.outlier_indices().unwrap(), diff.as_slice());
    }

    struct Overspender;
    impl Adversary for Overspender {
        fn corrupt(
            &self,
            clean: &[Observation],
            _: &ProbVector,
            budget: usize,
        ) -> Vec<Observation> {
            clean
                .iter()
                .enumerate()
                .map(|(i, _)| Observation::Vertex(if i <= budget { 1 } else { 0 }))
                .collect()
        }
    }

    #[test]
    fn budget_is_enforced_by_generator() {
        let spec = ContaminationSpec::adversarial(
            0.1,
            pv(&[1.0, 0.0]),
            AdversaryStrategy::ReplaceWithPointMass { target: 1 },
        )
        .unwrap();
        let err = generate_adversarial(&spec, &Overspender, 50, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::BudgetViolation {
                changed: 6,
                budget: 5
            }
        ));
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let spec =
            ContaminationSpec::huber(0.3, pv(&[0.2, 0.3, 0.5]), pv(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(
            generate(&spec, 200, 5).unwrap(),
            generate(&spec, 200, 5).unwrap()
        );
        assert_ne!(
            generate(&spec, 200, 5).unwrap(),
            generate(&spec, 200, 6).unwrap()
        );
    }

    #[test]
    fn changing_epsilon_keeps_inliers() {
        let a = generate(&hdc(0.1), 100, 9).unwrap();
        let b = generate(&hdc(0.3), 100, 9).unwrap();
        let oa = a.outlier_indices().unwrap();
        let ob = b.outlier_indices().unwrap();
        assert!(oa.iter().all(|i| ob.contains(i)), "outlier sets are nested");
        for i in 0..100 {
            if !ob.contains(&i) {
                assert_eq!(a.observations()[i], b.observations()[i]);
            }
        }
    }

    #[test]
    fn epsilon_validation_names_the_field() {
        let err = ContaminationSpec::huber(0.5, pv(&[1.0]), pv(&[1.0])).unwrap_err();
        assert!(err.to_string().contains("epsilon"));
        assert!(ContaminationSpec::huber(0.1, pv(&[1.0, 1.0]), pv(&[1.0])).is_err());
        assert!(ContaminationSpec::adversarial(
            0.1,
            pv(&[1.0, 1.0]),
            AdversaryStrategy::ExtremeSwap { from: 0, to: 2 }
        )
        .is_err());
        assert!(generate(&hdc(0.1), 0, 0).is_err());
    }

    #[test]
    fn parameter_contamination_length_must_match_budget() {
        let r = pv(&[0.5, 0.5]);
        let spec = ContaminationSpec::new(
            0.2,
            r.clone(),
            Contamination::Parameter(vec![pv(&[1.0, 0.0]); 2]),
        )
        .unwrap();
        assert!(generate(&spec, 10, 0).is_ok());
        assert!(generate(&spec, 20, 0).is_err());
        let spec =
            ContaminationSpec::new(0.2, r, Contamination::Parameter(vec![pv(&[0.0, 1.0]); 2]))
                .unwrap();
        let s = generate(&spec, 10, 0).unwrap();
        for &i in s.outlier_indices().unwrap() {
            assert_eq!(s.observations()[i], Observation::Vertex(1));
        }
    }

    #[test]
    fn oblivious_blocks() {
        let r = pv(&[0.6, 0.3, 0.1]);
        let shared = ContaminationSpec::new(
            0.3,
            r.clone(),
            Contamination::Oblivious(OutlierBlock::SharedDraw {
                q: pv(&[1.0, 1.0, 1.0]),
            }),
        )
        .unwrap();
        let s = generate(&shared, 50, 4).unwrap();
        let out = s.outlier_indices().unwrap();
        assert_eq!(out.len(), 15);
        assert!(out
            .iter()
            .all(|&i| s.observations()[i] == s.observations()[out[0]]));
        let point = ContaminationSpec::new(
            0.3,
            r,
            Contamination::Oblivious(OutlierBlock::PointMass { target: 1 }),
        )
        .unwrap();
        let s = generate(&point, 50, 4).unwrap();
        assert!(s
            .outlier_indices()
            .unwrap()
            .iter()
            .all(|&i| s.observations()[i] == Observation::Vertex(1)));
    }

    #[test]
    fn extreme_swap_only_touches_source_vertex() {
        let spec = ContaminationSpec::adversarial(
            0.2,
            pv(&[0.5, 0.5]),
            AdversaryStrategy::ExtremeSwap { from: 0, to: 1 },
        )
        .unwrap();
        let s = generate(&spec, 100, 1).unwrap();
        let clean = clean_draw(&spec, 100, 1);
        for &i in s.outlier_indices().unwrap() {
            assert_eq!(clean[i], Observation::Vertex(0));
            assert_eq!(s.observations()[i], Observation::Vertex(1));
        }
        assert_eq!(s.outlier_indices().unwrap().len(), 20);
    }

    #[test]
    fn greedy_beats_every_single_vertex_replacement() {
        let reference = pv(&[0.4, 0.3, 0.2, 0.1]);
        for kind in DistanceKind::PRIMARY {
            let spec = ContaminationSpec::adversarial(
                0.1,
                reference.clone(),
                AdversaryStrategy::GreedyWorstCase { distance: kind },
            )
            .unwrap();
            for seed in 0..5 {
                let greedy = sample_mean(&generate(&spec, 200, seed).unwrap()).unwrap();
                let g = distance_entries(greedy.entries(), reference.entries(), kind);
                for target in 0..4 {
                    let other = ContaminationSpec::adversarial(
                        0.1,
                        reference.clone(),
                        AdversaryStrategy::ReplaceWithPointMass { target },
                    )
                    .unwrap();
                    let m = sample_mean(&generate(&other, 200, seed).unwrap()).unwrap();
                    assert!(g + 1e-12 >= distance_entries(m.entries(), reference.entries(), kind));
                }
            }
        }
    }

    #[test]
    fn dirichlet_inliers_are_dense_points_with_reference_mean() {
        let r = pv(&[0.5, 0.3, 0.2]);
        let spec = ContaminationSpec::huber(0.0, r.clone(), r.clone())
            .unwrap()
            .with_inliers(InlierLaw::Dirichlet { alpha: 1.0 })
            .unwrap();
        let s = generate(&spec, 20_000, 2).unwrap();
        assert!(matches!(s.observations()[0], Observation::Point(_)));
        let m = sample_mean(&s).unwrap();
        for (a, b) in m.entries().iter().zip(r.entries()) {
            assert!((a - b).abs() < 0.01, "{a} vs {b}");
        }
        let law: InlierLaw = serde_json::from_str(r#"{"law":"dirichlet"}"#).unwrap();
        assert_eq!(law, InlierLaw::Dirichlet { alpha: 1.0 });
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"model":"ac","epsilon":0.1,"reference":{"k":2,"entries":[0.5,0.5]},"contaminant":{"strategy":"greedy_worst_case","distance":"hellinger"}}"#;
        let spec: ContaminationSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.model(), Model::Ac);
        let back: ContaminationSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        for name in ["replace_point_mass", "extreme_swap", "greedy_worst_case"] {
            let s = serde_json::to_string(&match name {
                "replace_point_mass" => AdversaryStrategy::ReplaceWithPointMass { target: 0 },
                "extreme_swap" => AdversaryStrategy::ExtremeSwap { from: 0, to: 1 },
                _ => AdversaryStrategy::GreedyWorstCase {
                    distance: DistanceKind::L2,
                },
            })
            .unwrap();
            assert!(s.contains(name), "{s}");
        }
        let bad = r#"{"model":"hdc","epsilon":0.7,"reference":{"k":1,"entries":[1]},"contaminant":{"k":1,"entries":[1]}}"#;
        let err = serde_json::from_str::<ContaminationSpec>(bad)
            .unwrap_err()
            .to_string();
        assert!(err.contains("epsilon"), "{err}");
    }

    #[test]
    fn prop1_components_at_small_n() {
        let r = pv(&[0.5, 0.5]);
        let q = pv(&[1.0, 0.0]);
        let c =
            hc_vs_hdc_risk_check(&r, &q, 0.1, 10, 200, DistanceKind::TotalVariation, 0).unwrap();
        assert!((c.tail_factor - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((c.rhs - (c.hdc_risk_2eps + c.tail_factor * c.hdc_risk_full)).abs() < 1e-15);
        assert!(
            hc_vs_hdc_risk_check(&r, &q, 0.1, 10, 99, DistanceKind::TotalVariation, 0).is_err()
        );
    }

    #[test]
    fn prop1_at_zero_epsilon_models_coincide() {
        let r = pv(&[0.2, 0.8]);
        let q = pv(&[1.0, 0.0]);
        let c =
            hc_vs_hdc_risk_check(&r, &q, 0.0, 50, 300, DistanceKind::TotalVariation, 1).unwrap();
        assert_eq!(c.hc_risk, c.hdc_risk_2eps);
    }
}
