//! Shared fixtures for the benchmark targets: deterministic random
//! ensembles and score vectors sized like the desk-scale experiments.

use punc::{Categorical, SecondOrderEnsemble, Seed};
use rand::Rng;

/// Interior simplex points via normalized exponentials.
fn random_member(classes: usize, rng: &mut impl Rng) -> Categorical {
    let raw: Vec<f64> = (0..classes)
        .map(|_| (-(1.0 - rng.random::<f64>()).ln()).max(1e-12))
        .collect();
    let sum: f64 = raw.iter().sum();
    Categorical::new(raw.into_iter().map(|x| x / sum).collect()).expect("valid simplex")
}

/// `count` uniform-weight ensembles with `members` categoricals over
/// `classes` classes each.
pub fn random_ensembles(
    count: usize,
    classes: usize,
    members: usize,
    seed: u64,
) -> Vec<SecondOrderEnsemble> {
    let mut rng = Seed::new(seed).rng();
    (0..count)
        .map(|_| {
            let members = (0..members)
                .map(|_| random_member(classes, &mut rng))
                .collect();
            SecondOrderEnsemble::uniform(members).expect("valid ensemble")
        })
        .collect()
}

/// Uniform scores in [0, 1).
pub fn random_scores(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = Seed::new(seed).rng();
    (0..count).map(|_| rng.random::<f64>()).collect()
}
