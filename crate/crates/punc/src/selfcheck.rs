//! Built-in oracle suites: exhaustive and independently computed references
//! that the fast production paths must match.
//!
//! These run both from `cargo test` and from the CLI's `check` subcommand.
//! Every suite draws its inputs from a fixed seed, so a reported failure is
//! reproducible bit for bit.

use crate::error::Result;
use crate::measures::{decompose, jensen_gap, DecomposeMode};
use crate::scoring::{rule_by_name, ScoringRule, BUILTIN_RULE_NAMES};
use crate::seed::Seed;
use crate::selective::{
    aulc_weights, brute_force_aulc, loss_rejection_curve, optimal_order, rejection_order,
    weighted_order_sum,
};
use crate::simplex::{Categorical, SecondOrderEnsemble};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Tolerance for identities that hold up to floating-point accumulation.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Epistemic components may round a hair below zero.
pub const EU_FLOOR: f64 = -1e-12;
/// Central finite differences with step 1e-6 are good to about 1e-7.
pub const GRADIENT_TOL: f64 = 1e-7;
const GRADIENT_STEP: f64 = 1e-6;

/// Result of one oracle suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest deviation observed across all checked identities.
    pub max_abs_error: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn track(max_err: &mut f64, err: f64) {
    if err > *max_err {
        *max_err = err;
    }
}

/// Uniform Dirichlet sample via normalized exponentials.
fn sample_simplex<R: Rng>(rng: &mut R, classes: usize) -> Vec<f64> {
    let mut draws: Vec<f64> = (0..classes)
        .map(|_| (-(1.0 - rng.random::<f64>()).ln()).max(1e-12))
        .collect();
    let sum: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= sum;
    }
    draws
}

/// Interior point: halfway between a Dirichlet sample and the uniform
/// distribution, so every entry is at least 1/(2K).
fn sample_interior<R: Rng>(rng: &mut R, classes: usize) -> Categorical {
    let probs: Vec<f64> = sample_simplex(rng, classes)
        .into_iter()
        .map(|p| 0.5 * p + 0.5 / classes as f64)
        .collect();
    Categorical::new(probs).expect("interior mixture is a simplex point")
}

const ENSEMBLE_SIZES: [(usize, usize); 12] = [
    (2, 1),
    (2, 2),
    (2, 20),
    (3, 1),
    (3, 2),
    (3, 20),
    (5, 1),
    (5, 2),
    (5, 20),
    (10, 1),
    (10, 2),
    (10, 20),
];

/// `count` random ensembles cycling K in {2,3,5,10} and M in {1,2,20};
/// every other ensemble gets nonuniform weights.
pub fn sample_ensembles(count: usize, seed: Seed) -> Vec<SecondOrderEnsemble> {
    let mut rng = seed.rng();
    (0..count)
        .map(|i| {
            let (classes, members_n) = ENSEMBLE_SIZES[i % ENSEMBLE_SIZES.len()];
            let members: Vec<Categorical> = (0..members_n)
                .map(|_| {
                    Categorical::new(sample_simplex(&mut rng, classes))
                        .expect("sample is a simplex point")
                })
                .collect();
            if i % 2 == 0 {
                SecondOrderEnsemble::uniform(members).expect("nonempty members")
            } else {
                // Truncating a Dirichlet draw and renormalizing keeps the
                // weights Dirichlet but never exactly uniform.
                let mut weights = sample_simplex(&mut rng, members_n + 1)[..members_n].to_vec();
                let sum: f64 = weights.iter().sum();
                for w in &mut weights {
                    *w /= sum;
                }
                SecondOrderEnsemble::weighted(members, weights).expect("normalized weights")
            }
        })
        .collect()
}

fn builtin_rules() -> Vec<Arc<dyn ScoringRule>> {
    BUILTIN_RULE_NAMES
        .iter()
        .map(|name| rule_by_name(name).expect("builtin rule"))
        .collect()
}

/// TU = AU + EU and EU >= 0 (up to rounding) for every rule on random
/// ensembles.
pub fn check_decomposition_identity(count: usize, seed: Seed) -> Result<SuiteOutcome> {
    let ensembles = sample_ensembles(count, seed);
    let rules = builtin_rules();
    let mut failures = 0;
    let mut cases = 0;
    let mut max_err = 0.0f64;
    for q in &ensembles {
        for rule in &rules {
            cases += 1;
            let t = decompose(rule.as_ref(), q, DecomposeMode::Auto)?;
            let gap = (t.tu - (t.au + t.eu)).abs();
            track(&mut max_err, gap);
            if gap >= IDENTITY_TOL || t.eu < EU_FLOOR {
                failures += 1;
            }
        }
    }
    Ok(SuiteOutcome {
        name: "decomposition_identity".into(),
        cases,
        failures,
        max_abs_error: max_err,
    })
}

/// The closed-form decomposition agrees with the generic sum-over-members
/// path componentwise.
pub fn check_closed_vs_generic(count: usize, seed: Seed) -> Result<SuiteOutcome> {
    let ensembles = sample_ensembles(count, seed);
    let rules = builtin_rules();
    let mut failures = 0;
    let mut cases = 0;
    let mut max_err = 0.0f64;
    for q in &ensembles {
        for rule in &rules {
            cases += 1;
            let closed = decompose(rule.as_ref(), q, DecomposeMode::ClosedForm)?;
            let generic = decompose(rule.as_ref(), q, DecomposeMode::Generic)?;
            let gap = (closed.tu - generic.tu)
                .abs()
                .max((closed.au - generic.au).abs())
                .max((closed.eu - generic.eu).abs());
            track(&mut max_err, gap);
            if gap >= IDENTITY_TOL {
                failures += 1;
            }
        }
    }
    Ok(SuiteOutcome {
        name: "closed_vs_generic".into(),
        cases,
        failures,
        max_abs_error: max_err,
    })
}

/// For strictly proper rules: the Jensen gap of the potential equals EU on
/// random ensembles, the analytic potential gradient matches central finite
/// differences, and the divergence equals its Bregman form.
pub fn check_jensen_bregman(
    ensemble_count: usize,
    point_count: usize,
    seed: Seed,
) -> Result<SuiteOutcome> {
    let rules: Vec<Arc<dyn ScoringRule>> = vec![rule_by_name("log")?, rule_by_name("brier")?];
    let mut failures = 0;
    let mut cases = 0;
    let mut max_err = 0.0f64;

    let ensembles = sample_ensembles(ensemble_count, seed);
    for q in &ensembles {
        for rule in &rules {
            cases += 1;
            let eu = decompose(rule.as_ref(), q, DecomposeMode::Auto)?.eu;
            let gap = (jensen_gap(rule.as_ref(), q)? - eu).abs();
            track(&mut max_err, gap);
            if gap >= IDENTITY_TOL {
                failures += 1;
            }
        }
    }

    let mut rng = seed.derive(0x9d).rng();
    for p in 0..point_count {
        let classes = [2usize, 3, 5, 10][p % 4];
        let theta_hat = sample_interior(&mut rng, classes);
        let theta = sample_interior(&mut rng, classes);
        for rule in &rules {
            cases += 1;
            let mut ok = true;

            // Analytic gradient vs central differences along tangent
            // directions e_i - 1/K (these stay on the simplex).
            let grad = rule.potential_gradient(&theta_hat)?;
            for i in 0..classes {
                let mut plus = theta_hat.probs().to_vec();
                let mut minus = theta_hat.probs().to_vec();
                for k in 0..classes {
                    let step = if k == i {
                        GRADIENT_STEP * (1.0 - 1.0 / classes as f64)
                    } else {
                        -GRADIENT_STEP / classes as f64
                    };
                    plus[k] += step;
                    minus[k] -= step;
                }
                let g_plus = rule.potential(&Categorical::new(plus)?)?;
                let g_minus = rule.potential(&Categorical::new(minus)?)?;
                let fd = (g_plus - g_minus) / (2.0 * GRADIENT_STEP);
                let analytic: f64 = grad
                    .iter()
                    .enumerate()
                    .map(|(k, g)| {
                        let d = if k == i {
                            1.0 - 1.0 / classes as f64
                        } else {
                            -1.0 / classes as f64
                        };
                        g * d
                    })
                    .sum();
                let err = (fd - analytic).abs();
                track(&mut max_err, err);
                if err >= GRADIENT_TOL {
                    ok = false;
                }
            }

            // Divergence vs Bregman form of the potential.
            let bregman = rule.potential(&theta)? - rule.potential(&theta_hat)?
                - grad
                    .iter()
                    .zip(theta.probs().iter().zip(theta_hat.probs()))
                    .map(|(g, (t, th))| g * (t - th))
                    .sum::<f64>();
            let err = (rule.divergence(&theta_hat, &theta)? - bregman).abs();
            track(&mut max_err, err);
            if err >= IDENTITY_TOL {
                ok = false;
            }

            if !ok {
                failures += 1;
            }
        }
    }

    Ok(SuiteOutcome {
        name: "jensen_bregman".into(),
        cases,
        failures,
        max_abs_error: max_err,
    })
}

/// The stable ascending sort reaches the exhaustive minimum of
/// S(pi) = sum_j w_j c_{pi(j)}, and AULC * n equals S of the curve's order.
pub fn check_ordering_oracle(count: usize, seed: Seed) -> Result<SuiteOutcome> {
    let mut rng = seed.rng();
    let mut failures = 0;
    let mut max_err = 0.0f64;
    for case in 0..count {
        let n = 2 + case % 6;
        let costs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
        let mut ok = true;

        let weights = aulc_weights(n)?;
        let optimal = optimal_order(&costs)?;
        let (_, brute_min) = brute_force_aulc(&costs)?;
        let s_optimal = weighted_order_sum(&costs, &optimal, &weights);
        // Identical multiset of addends, so the fast path must hit the
        // minimum exactly, not just within tolerance.
        if s_optimal != brute_min {
            ok = false;
            track(&mut max_err, (s_optimal - brute_min).abs());
        }

        // AULC * n == S(pi) for an arbitrary (not just optimal) ordering.
        let uncertainties: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let curve = loss_rejection_curve(&costs, &uncertainties)?;
        let order = rejection_order(&uncertainties)?;
        let gap = (curve.aulc * n as f64 - weighted_order_sum(&costs, &order, &weights)).abs();
        track(&mut max_err, gap);
        if gap >= IDENTITY_TOL {
            ok = false;
        }

        if !ok {
            failures += 1;
        }
    }
    Ok(SuiteOutcome {
        name: "ordering_oracle".into(),
        cases: count,
        failures,
        max_abs_error: max_err,
    })
}

/// Runs every suite at its standard size with a fixed seed.
pub fn run_all_suites() -> Result<Vec<SuiteOutcome>> {
    let seed = Seed::new(0x5e1f);
    Ok(vec![
        check_decomposition_identity(1000, seed.derive(1))?,
        check_closed_vs_generic(1000, seed.derive(2))?,
        check_jensen_bregman(1000, 100, seed.derive(3))?,
        check_ordering_oracle(200, seed.derive(4))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensembles_cycle_sizes_and_are_deterministic() {
        let qs = sample_ensembles(24, Seed::new(1));
        assert_eq!(qs.len(), 24);
        assert_eq!(qs[0].classes(), 2);
        assert_eq!(qs[0].len(), 1);
        assert_eq!(qs[2].len(), 20);
        assert_eq!(qs[11].classes(), 10);
        let again = sample_ensembles(24, Seed::new(1));
        for (a, b) in qs.iter().zip(&again) {
            assert_eq!(a.weights(), b.weights());
            for (ma, mb) in a.members().iter().zip(b.members()) {
                assert_eq!(ma.probs(), mb.probs());
            }
        }
        // Odd indices carry nonuniform weights (index 1 has two members).
        let w = qs[1].weights();
        assert_eq!(w.len(), 2);
        assert!((w[0] - w[1]).abs() > 1e-6, "{w:?}");
        // Members spread over the simplex rather than clustering at uniform.
        assert!(qs[2]
            .members()
            .iter()
            .any(|c| (c.probs()[0] - 0.5).abs() > 0.2));
    }

    #[test]
    fn all_suites_pass() {
        for outcome in run_all_suites().unwrap() {
            assert!(
                outcome.passed(),
                "{}: {}/{} failed, max error {:.3e}",
                outcome.name,
                outcome.failures,
                outcome.cases,
                outcome.max_abs_error
            );
            assert!(outcome.cases > 0);
        }
    }

    #[test]
    fn suites_report_case_counts() {
        let seed = Seed::new(7);
        assert_eq!(check_decomposition_identity(10, seed).unwrap().cases, 30);
        assert_eq!(check_closed_vs_generic(10, seed).unwrap().cases, 30);
        // 10 ensembles x 2 rules + 5 points x 2 rules.
        assert_eq!(check_jensen_bregman(10, 5, seed).unwrap().cases, 30);
        assert_eq!(check_ordering_oracle(12, seed).unwrap().cases, 12);
    }
}
