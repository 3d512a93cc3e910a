//! Closed-form risk envelopes and confidence radii for the sample mean.
//!
//! Upper bounds hold for the worst adversary with `floor(n * epsilon)`
//! rewritten points over `s`-sparse references. The lower-bound shapes are
//! the same rates without their (unknown) universal constant, so the only
//! checkable statement about them is that the upper bound stays within a
//! fixed multiple of the shape.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex::{distance, DistanceKind, ProbVector, SIMPLEX_TOLERANCE};

/// Parameters of a risk envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEnvelope {
    pub kind: DistanceKind,
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub epsilon: f64,
}

impl RiskEnvelope {
    pub fn new(kind: DistanceKind, n: usize, s: usize, k: usize, epsilon: f64) -> Result<Self> {
        let e = Self {
            kind,
            n,
            s,
            k,
            epsilon,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.s == 0 || self.k == 0 {
            return Err(Error::field("n/s/k", "must all be positive"));
        }
        if self.s > self.k {
            return Err(Error::field(
                "s",
                format!("sparsity {} exceeds k = {}", self.s, self.k),
            ));
        }
        if self.s > self.n {
            return Err(Error::field(
                "s",
                format!("sparsity {} exceeds n = {}", self.s, self.n),
            ));
        }
        check_unit("epsilon", self.epsilon)?;
        if let DistanceKind::Wasserstein(q) = self.kind {
            DistanceKind::wasserstein(q)?;
        }
        Ok(())
    }
}

fn check_unit(field: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::field(field, format!("{x} is outside [0, 1]")));
    }
    Ok(())
}

/// Worst-case expected error of the sample mean.
///
/// | distance | bound |
/// |---|---|
/// | TV | `sqrt(s/n) + 2 eps` |
/// | Hellinger | `sqrt(s/n) + 2 sqrt(eps)` |
/// | L2, Linf | `sqrt(1/n) + sqrt(2) eps` |
/// | `W_q` | `sqrt(2) (sqrt(s/n) + 2 eps)^(1/q)` |
pub fn risk_upper_bound(e: &RiskEnvelope) -> Result<f64> {
    e.validate()?;
    let stat = (e.s as f64 / e.n as f64).sqrt();
    let root_n = (1.0 / e.n as f64).sqrt();
    Ok(match e.kind {
        DistanceKind::TotalVariation => stat + 2.0 * e.epsilon,
        DistanceKind::Hellinger => stat + 2.0 * e.epsilon.sqrt(),
        DistanceKind::L2 | DistanceKind::LInf => root_n + SQRT_2 * e.epsilon,
        DistanceKind::Wasserstein(q) => SQRT_2 * (stat + 2.0 * e.epsilon).powf(1.0 / q),
    })
}

/// The minimax rate without its universal constant.
pub fn rate_lower_shape(e: &RiskEnvelope) -> Result<f64> {
    e.validate()?;
    let stat = (e.s as f64 / e.n as f64).sqrt();
    match e.kind {
        DistanceKind::TotalVariation => Ok(stat + e.epsilon),
        DistanceKind::Hellinger => Ok(stat + e.epsilon.sqrt()),
        DistanceKind::L2 => Ok((1.0 / e.n as f64).sqrt() + e.epsilon),
        // Inherited from TV through W_q^q = 2^(q/2) d_TV.
        DistanceKind::Wasserstein(q) => Ok((stat + e.epsilon).powf(1.0 / q)),
        DistanceKind::LInf => Err(Error::UnsupportedDistance {
            operation: "rate_lower_shape",
            kind: e.kind.to_string(),
        }),
    }
}

/// A lower bound on the modulus of continuity together with the pair of
/// parameters that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusWitness {
    pub bound: f64,
    pub theta: ProbVector,
    pub theta_prime: ProbVector,
    /// `distance(theta, theta_prime)`, at least `bound`.
    pub witness_distance: f64,
}

/// Two-point construction: `theta = e_1` and
/// `theta' = (1 - a) e_1 + a e_2` with `a = eps / (1 - eps)`, so that
/// `d_TV(theta, theta') = a`. Returns `w_TV >= eps`, `w_L2 >= sqrt(2) eps`
/// and `w_H >= sqrt(eps / 2)`.
pub fn modulus_of_continuity(kind: DistanceKind, epsilon: f64, k: usize) -> Result<ModulusWitness> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if k < 2 {
        return Err(Error::BadTargetDimension { target: k, k: 2 });
    }
    let bound = match kind {
        DistanceKind::TotalVariation => epsilon,
        DistanceKind::L2 => SQRT_2 * epsilon,
        DistanceKind::Hellinger => (epsilon / 2.0).sqrt(),
        other => {
            return Err(Error::UnsupportedDistance {
                operation: "modulus_of_continuity",
                kind: other.to_string(),
            })
        }
    };
    let a = epsilon / (1.0 - epsilon);
    let theta = ProbVector::basis(k, 0)?;
    let mut entries = vec![0.0; k];
    entries[0] = 1.0 - a;
    entries[1] = a;
    let theta_prime = ProbVector::from_entries_unchecked(entries);
    let witness_distance = distance(&theta, &theta_prime, kind)?;
    Ok(ModulusWitness {
        bound,
        theta,
        theta_prime,
        witness_distance,
    })
}

/// Inputs of a confidence region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceSpec {
    pub n: usize,
    pub s: usize,
    pub epsilon: f64,
    pub delta: f64,
}

impl ConfidenceSpec {
    pub fn new(n: usize, s: usize, epsilon: f64, delta: f64) -> Result<Self> {
        let c = Self {
            n,
            s,
            epsilon,
            delta,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::field("n", "must be at least 1"));
        }
        if self.s == 0 {
            return Err(Error::field("s", "must be at least 1"));
        }
        check_unit("epsilon", self.epsilon)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::field(
                "delta",
                format!("{} is outside (0, 1)", self.delta),
            ));
        }
        Ok(())
    }
}

/// Radius `r` such that `{theta : d(mean, theta) <= r}` contains the
/// reference with probability at least `1 - delta`, under any contamination
/// model.
pub fn confidence_radius(c: &ConfidenceSpec, kind: DistanceKind) -> Result<f64> {
    c.validate()?;
    let n = c.n as f64;
    let s = c.s as f64;
    let eps = c.epsilon;
    let delta = c.delta;
    match kind {
        DistanceKind::L2 => Ok((1.0 / n).sqrt() + SQRT_2 * eps + ((1.0 / delta).ln() / n).sqrt()),
        DistanceKind::TotalVariation => {
            Ok((s / n).sqrt() + 2.0 * eps + (2.0 * (1.0 / delta).ln() / n).sqrt())
        }
        DistanceKind::Hellinger => Ok(3.2 * ((s / n) * (2.0 * s / delta).ln()).sqrt()
            + (2.0 * eps).sqrt()
            + ((2.0 / delta).ln() / n).sqrt()),
        other => Err(Error::UnsupportedDistance {
            operation: "confidence_radius",
            kind: other.to_string(),
        }),
    }
}

/// Membership in the confidence region centred at `center`.
pub fn region_contains(
    center: &ProbVector,
    candidate: &ProbVector,
    c: &ConfidenceSpec,
    kind: DistanceKind,
) -> Result<bool> {
    let radius = confidence_radius(c, kind)?;
    Ok(distance(center, candidate, kind)? <= radius)
}

/// [`region_contains`] for an unvalidated candidate.
pub fn region_contains_raw(
    center: &ProbVector,
    candidate: &[f64],
    c: &ConfidenceSpec,
    kind: DistanceKind,
) -> Result<bool> {
    if candidate.len() != center.k() {
        return Err(Error::DimensionMismatch {
            left: center.k(),
            right: candidate.len(),
        });
    }
    if candidate.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::NotOnSimplex("negative or non-finite entry".into()));
    }
    let sum: f64 = candidate.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::NotOnSimplex(format!("entries sum to {sum}")));
    }
    region_contains(
        center,
        &ProbVector::from_entries_unchecked(candidate.to_vec()),
        c,
        kind,
    )
}
