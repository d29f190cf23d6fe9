//! Probability vectors and finite second-order distributions over them.
//!
//! A [`Categorical`] is a point on the probability simplex over K classes.
//! A [`SecondOrderEnsemble`] is a finite weighted set of categoricals, the
//! representation used for posterior samples or ensemble member predictions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default tolerance for simplex validation and renormalization.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// A first-order distribution over K >= 2 classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Categorical {
    probs: Vec<f64>,
}

/// Checks `probs` against the simplex within `tol` and renormalizes.
///
/// Entries in `[-tol, 0)` are clamped to zero; a total mass deviating from 1
/// by more than `tol` or an entry below `-tol` is rejected.
pub fn validate_simplex(probs: Vec<f64>, tol: f64) -> Result<Categorical> {
    if probs.len() < 2 {
        return Err(Error::InvalidDistribution(format!(
            "need at least 2 classes, got {}",
            probs.len()
        )));
    }
    let mut probs = probs;
    for (i, p) in probs.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is not finite"
            )));
        }
        if *p < 0.0 {
            if *p < -tol {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} is negative ({p})"
                )));
            }
            *p = 0.0;
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {sum}, not 1"
        )));
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
    Ok(Categorical { probs })
}

impl Categorical {
    /// Validates with the default tolerance [`SIMPLEX_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_simplex(probs, SIMPLEX_TOL)
    }

    pub fn uniform(classes: usize) -> Result<Self> {
        Self::new(vec![1.0 / classes as f64; classes])
    }

    pub fn point_mass(class: usize, classes: usize) -> Result<Self> {
        if class >= classes {
            return Err(Error::LabelOutOfRange { label: class, classes });
        }
        let mut probs = vec![0.0; classes];
        probs[class] = 1.0;
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn classes(&self) -> usize {
        self.probs.len()
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }

    pub fn max_prob(&self) -> f64 {
        self.probs[self.argmax()]
    }
}

impl TryFrom<Vec<f64>> for Categorical {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Categorical::new(probs)
    }
}

impl From<Categorical> for Vec<f64> {
    fn from(c: Categorical) -> Vec<f64> {
        c.probs
    }
}

/// A finite second-order distribution: M >= 1 weighted categoricals over a
/// shared class count.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderEnsemble {
    members: Vec<Categorical>,
    weights: Vec<f64>,
}

impl SecondOrderEnsemble {
    /// Builds an ensemble with uniform weights 1/M.
    pub fn uniform(members: Vec<Categorical>) -> Result<Self> {
        let m = members.len();
        Self::weighted(members, vec![1.0 / m as f64; m.max(1)])
    }

    /// Builds an ensemble with explicit nonnegative weights summing to 1
    /// within [`SIMPLEX_TOL`] (renormalized on construction).
    pub fn weighted(members: Vec<Categorical>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidDistribution(
                "ensemble needs at least one member".into(),
            ));
        }
        if weights.len() != members.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} members but {} weights",
                members.len(),
                weights.len()
            )));
        }
        let classes = members[0].classes();
        for (i, member) in members.iter().enumerate() {
            if member.classes() != classes {
                return Err(Error::DimensionMismatch(format!(
                    "member {i} has {} classes, expected {classes}",
                    member.classes()
                )));
            }
        }
        let mut weights = weights;
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "weight {i} is not finite"
                )));
            }
            if *w < 0.0 {
                if *w < -SIMPLEX_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "weight {i} is negative ({w})"
                    )));
                }
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        for w in weights.iter_mut() {
            *w /= sum;
        }
        Ok(SecondOrderEnsemble { members, weights })
    }

    pub fn members(&self) -> &[Categorical] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of members M.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // M >= 1 by construction
    }

    pub fn classes(&self) -> usize {
        self.members[0].classes()
    }

    /// The model average: the weighted mean of the members, which is the
    /// ensemble's actual prediction.
    pub fn model_average(&self) -> Categorical {
        let mut avg = vec![0.0; self.classes()];
        for (member, w) in self.members.iter().zip(&self.weights) {
            for (a, p) in avg.iter_mut().zip(member.probs()) {
                *a += w * p;
            }
        }
        validate_simplex(avg, SIMPLEX_TOL)
            .expect("weighted average of simplex points stays on the simplex")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(probs: &[f64]) -> Categorical {
        Categorical::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn accepts_exact_simplex_unchanged() {
        let c = cat(&[0.5, 0.5]);
        assert_eq!(c.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let c = Categorical::new(vec![0.5, 0.5 + 1e-12]).unwrap();
        let sum: f64 = c.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sum() {
        assert!(matches!(
            Categorical::new(vec![0.7, 0.7]),
            Err(Error::InvalidDistribution(_))
        ));
    }

    #[test]
    fn rejects_negative_beyond_tolerance() {
        assert!(Categorical::new(vec![-1e-3, 1.001]).is_err());
    }

    #[test]
    fn clamps_negative_within_tolerance() {
        let c = Categorical::new(vec![-1e-12, 1.0]).unwrap();
        assert_eq!(c.probs()[0], 0.0);
    }

    #[test]
    fn rejects_single_class() {
        assert!(Categorical::new(vec![1.0]).is_err());
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(cat(&[0.4, 0.4, 0.2]).argmax(), 0);
        assert_eq!(cat(&[0.2, 0.4, 0.4]).argmax(), 1);
    }

    #[test]
    fn model_average_uniform_point_masses() {
        let q = SecondOrderEnsemble::uniform(vec![cat(&[1.0, 0.0]), cat(&[0.0, 1.0])]).unwrap();
        let avg = q.model_average();
        assert!((avg.probs()[0] - 0.5).abs() < 1e-15);
        assert!((avg.probs()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn model_average_single_member_is_identity() {
        let q = SecondOrderEnsemble::uniform(vec![cat(&[0.7, 0.3])]).unwrap();
        let avg = q.model_average();
        assert!((avg.probs()[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn model_average_weighted() {
        // 0.25*(0.6,0.4) + 0.75*(0.2,0.8) = (0.3, 0.7)
        let q = SecondOrderEnsemble::weighted(
            vec![cat(&[0.6, 0.4]), cat(&[0.2, 0.8])],
            vec![0.25, 0.75],
        )
        .unwrap();
        let avg = q.model_average();
        assert!((avg.probs()[0] - 0.3).abs() < 1e-12);
        assert!((avg.probs()[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn model_average_is_linear_in_mixtures() {
        let a = SecondOrderEnsemble::uniform(vec![cat(&[0.9, 0.1]), cat(&[0.5, 0.5])]).unwrap();
        let b = SecondOrderEnsemble::uniform(vec![cat(&[0.1, 0.9])]).unwrap();
        let lambda = 0.3;

        // Mixture ensemble: members of a with weights lambda*w, members of b
        // with weights (1-lambda)*w.
        let mut members = a.members().to_vec();
        members.extend(b.members().to_vec());
        let mut weights: Vec<f64> = a.weights().iter().map(|w| lambda * w).collect();
        weights.extend(b.weights().iter().map(|w| (1.0 - lambda) * w));
        let mixed = SecondOrderEnsemble::weighted(members, weights).unwrap();

        let avg_mixed = mixed.model_average();
        let avg_a = a.model_average();
        let avg_b = b.model_average();
        for k in 0..2 {
            let expected = lambda * avg_a.probs()[k] + (1.0 - lambda) * avg_b.probs()[k];
            assert!((avg_mixed.probs()[k] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_rejects_mixed_class_counts() {
        let err = SecondOrderEnsemble::uniform(vec![cat(&[0.5, 0.5]), cat(&[0.3, 0.3, 0.4])]);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn ensemble_rejects_bad_weights() {
        let members = vec![cat(&[0.5, 0.5]), cat(&[0.4, 0.6])];
        assert!(SecondOrderEnsemble::weighted(members.clone(), vec![0.9, 0.9]).is_err());
        assert!(SecondOrderEnsemble::weighted(members, vec![1.0]).is_err());
    }
}
