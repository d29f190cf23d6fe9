//! Pool-based active learning with uncertainty-driven query strategies.
//!
//! The loop trains a bagged-trees model on a small seeded initial set, then
//! repeatedly scores the unlabeled pool with the strategy's epistemic
//! uncertainty (or uniformly at random), moves the top-scoring batch into
//! the labeled set, refits, and records the zero-one test loss.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::forest::{fit_bagged_trees, BaggedTreesModel, ForestConfig};
use crate::measures::{decompose, DecomposeMode, UncertaintyComponent};
use crate::scoring::rule_by_name;
use crate::seed::Seed;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Salt for the initial labeled-set draw.
const INIT_SALT: u64 = 0x11;
/// Salt for per-round model fits (further derived by round number).
const FIT_SALT: u64 = 0x12;
/// Salt for the random strategy's per-round draws.
const RANDOM_SALT: u64 = 0x13;

/// How to pick the next batch of pool instances to label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    EuLog,
    EuBrier,
    EuZeroOne,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::EuLog,
        Strategy::EuBrier,
        Strategy::EuZeroOne,
        Strategy::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::EuLog => "eu_log",
            Strategy::EuBrier => "eu_brier",
            Strategy::EuZeroOne => "eu_zero_one",
            Strategy::Random => "random",
        }
    }

    pub fn parse(name: &str) -> Result<Strategy> {
        match name {
            "eu_log" => Ok(Strategy::EuLog),
            "eu_brier" => Ok(Strategy::EuBrier),
            "eu_zero_one" => Ok(Strategy::EuZeroOne),
            "random" => Ok(Strategy::Random),
            other => Err(Error::invalid(format!(
                "unknown strategy `{other}` (expected eu_log, eu_brier, eu_zero_one, or random)"
            ))),
        }
    }

    /// The scoring rule whose epistemic component drives this strategy, or
    /// None for the random baseline.
    pub fn rule_name(self) -> Option<&'static str> {
        match self {
            Strategy::EuLog => Some("log"),
            Strategy::EuBrier => Some("brier"),
            Strategy::EuZeroOne => Some("zero_one"),
            Strategy::Random => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveLearningConfig {
    pub initial_labeled: usize,
    pub query_budget: usize,
    /// Number of query rounds after the initial fit; 0 gives a single-point curve.
    pub rounds: usize,
    pub strategy: Strategy,
    pub seed: Seed,
}

/// Zero-one test loss after the initial fit and after each query round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub labeled_counts: Vec<usize>,
    pub task_losses: Vec<f64>,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.labeled_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labeled_counts.is_empty()
    }

    pub fn final_loss(&self) -> f64 {
        *self.task_losses.last().expect("curve has at least one point")
    }
}

/// Indices of the `budget` largest scores, ties broken toward the lowest
/// index, returned in ascending order.
pub fn query_batch(scores: &[f64], budget: usize) -> Result<Vec<usize>> {
    if budget > scores.len() {
        return Err(Error::invalid(format!(
            "query budget {budget} exceeds pool size {}",
            scores.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::invalid(format!("score at index {i} is not finite")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("finite scores")
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = order[..budget].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Mean zero-one loss of the model-average prediction over `test`.
pub fn zero_one_test_loss(model: &BaggedTreesModel, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::data("cannot evaluate on an empty test set"));
    }
    let errors: usize = (0..test.len())
        .into_par_iter()
        .map(|i| {
            let ens = model.predict_second_order(test.row(i))?;
            Ok(usize::from(ens.model_average().argmax() != test.label(i)))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(errors as f64 / test.len() as f64)
}

/// Runs the loop and additionally reports, per round, which pool rows were
/// queried (ascending pool indices, `budget` per round).
pub fn run_active_learning_traced(
    pool: &Dataset,
    test: &Dataset,
    forest: &ForestConfig,
    config: &ActiveLearningConfig,
) -> Result<(LearningCurve, Vec<Vec<usize>>)> {
    if pool.n_features() != test.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "pool has {} features but test has {}",
            pool.n_features(),
            test.n_features()
        )));
    }
    if pool.classes() != test.classes() {
        return Err(Error::DimensionMismatch(format!(
            "pool has {} classes but test has {}",
            pool.classes(),
            test.classes()
        )));
    }
    if config.initial_labeled == 0 || config.query_budget == 0 {
        return Err(Error::invalid(
            "initial_labeled and query_budget must be at least 1",
        ));
    }
    let needed = config.initial_labeled + config.rounds * config.query_budget;
    if needed > pool.len() {
        return Err(Error::invalid(format!(
            "pool exhausted: schedule needs {needed} labeled instances but the pool has {}",
            pool.len()
        )));
    }

    let rule = match config.strategy.rule_name() {
        Some(name) => Some(rule_by_name(name)?),
        None => None,
    };

    let mut labeled: Vec<usize> = index::sample(
        &mut config.seed.derive(INIT_SALT).rng(),
        pool.len(),
        config.initial_labeled,
    )
    .into_vec();
    labeled.sort_unstable();
    let mut is_labeled = vec![false; pool.len()];
    for &i in &labeled {
        is_labeled[i] = true;
    }
    let mut unlabeled: Vec<usize> = (0..pool.len()).filter(|&i| !is_labeled[i]).collect();

    let fit_round = |round: usize, rows: &[usize]| -> Result<BaggedTreesModel> {
        let train = pool.select(rows)?;
        fit_bagged_trees(&train, forest, config.seed.derive(FIT_SALT).derive(round as u64))
    };

    let mut labeled_counts = Vec::with_capacity(config.rounds + 1);
    let mut task_losses = Vec::with_capacity(config.rounds + 1);
    let mut queried = Vec::with_capacity(config.rounds);

    let mut model = fit_round(0, &labeled)?;
    labeled_counts.push(labeled.len());
    task_losses.push(zero_one_test_loss(&model, test)?);

    for round in 1..=config.rounds {
        let batch: Vec<usize> = match rule {
            Some(ref rule) => {
                let scores: Vec<f64> = unlabeled
                    .par_iter()
                    .map(|&i| {
                        let ens = model.predict_second_order(pool.row(i))?;
                        Ok(decompose(rule.as_ref(), &ens, DecomposeMode::Auto)?
                            .component(UncertaintyComponent::Eu))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                query_batch(&scores, config.query_budget)?
                    .into_iter()
                    .map(|pos| unlabeled[pos])
                    .collect()
            }
            None => {
                let mut rng = config.seed.derive(RANDOM_SALT).derive(round as u64).rng();
                let mut picks: Vec<usize> =
                    index::sample(&mut rng, unlabeled.len(), config.query_budget)
                        .into_iter()
                        .map(|pos| unlabeled[pos])
                        .collect();
                picks.sort_unstable();
                picks
            }
        };

        for &i in &batch {
            is_labeled[i] = true;
        }
        unlabeled.retain(|&i| !is_labeled[i]);
        labeled.extend_from_slice(&batch);
        labeled.sort_unstable();

        model = fit_round(round, &labeled)?;
        labeled_counts.push(labeled.len());
        task_losses.push(zero_one_test_loss(&model, test)?);
        queried.push(batch);
    }

    Ok((
        LearningCurve {
            labeled_counts,
            task_losses,
        },
        queried,
    ))
}

/// Runs the pool-based loop and returns the learning curve: `rounds + 1`
/// points, the first from the initial seeded fit.
pub fn run_active_learning(
    pool: &Dataset,
    test: &Dataset,
    forest: &ForestConfig,
    config: &ActiveLearningConfig,
) -> Result<LearningCurve> {
    run_active_learning_traced(pool, test, forest, config).map(|(curve, _)| curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_mixture, separated_spec, MixtureSpec};
    use crate::simplex::{Categorical, SecondOrderEnsemble};

    fn pure_noise_spec() -> MixtureSpec {
        // Identical class-conditionals: features carry no label information,
        // so labels are uniform coin flips and no strategy can beat chance.
        MixtureSpec {
            means: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            scales: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            class_priors: Categorical::uniform(2).unwrap(),
            label_flip: 0.0,
        }
    }

    fn small_forest() -> ForestConfig {
        ForestConfig {
            trees: 10,
            max_depth: 3,
        }
    }

    #[test]
    fn query_batch_examples() {
        assert_eq!(query_batch(&[0.1, 0.9, 0.5], 1).unwrap(), vec![1]);
        assert_eq!(query_batch(&[0.1, 0.9, 0.5], 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(query_batch(&[0.4, 0.4, 0.4], 2).unwrap(), vec![0, 1]);
        assert_eq!(query_batch(&[0.1, 0.9, 0.5], 0).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn query_batch_rejects_bad_input() {
        assert!(query_batch(&[0.1, 0.2], 3).is_err());
        assert!(query_batch(&[0.1, f64::NAN], 1).is_err());
    }

    #[test]
    fn consensus_blind_scores_select_lowest_indices() {
        // Every member of each ensemble shares the model average's argmax, so
        // the zero-one epistemic score is exactly 0 for the whole pool and
        // the tie rule picks the lowest indices.
        let rule = rule_by_name("zero_one").unwrap();
        let pool: Vec<SecondOrderEnsemble> = (0..5)
            .map(|i| {
                let p = 0.6 + 0.05 * i as f64;
                SecondOrderEnsemble::uniform(vec![
                    Categorical::new(vec![p, 1.0 - p]).unwrap(),
                    Categorical::new(vec![0.9, 0.1]).unwrap(),
                ])
                .unwrap()
            })
            .collect();
        let scores: Vec<f64> = pool
            .iter()
            .map(|e| {
                decompose(rule.as_ref(), e, DecomposeMode::Auto)
                    .unwrap()
                    .component(UncertaintyComponent::Eu)
            })
            .collect();
        assert!(scores.iter().all(|&s| s == 0.0), "{scores:?}");
        assert_eq!(query_batch(&scores, 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(Strategy::parse(s.as_str()).unwrap(), s);
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!(Strategy::parse("entropy").is_err());
    }

    #[test]
    fn rounds_zero_gives_single_point() {
        let pool = gen_mixture(&separated_spec(0.0), 100, Seed::new(1)).unwrap();
        let test = gen_mixture(&separated_spec(0.0), 200, Seed::new(2)).unwrap();
        let config = ActiveLearningConfig {
            initial_labeled: 20,
            query_budget: 10,
            rounds: 0,
            strategy: Strategy::EuLog,
            seed: Seed::new(3),
        };
        let curve = run_active_learning(&pool, &test, &small_forest(), &config).unwrap();
        assert_eq!(curve.labeled_counts, vec![20]);
        assert_eq!(curve.task_losses.len(), 1);
    }

    #[test]
    fn curve_shape_and_determinism() {
        let pool = gen_mixture(&separated_spec(0.1), 150, Seed::new(1)).unwrap();
        let test = gen_mixture(&separated_spec(0.1), 100, Seed::new(2)).unwrap();
        for strategy in Strategy::ALL {
            let config = ActiveLearningConfig {
                initial_labeled: 10,
                query_budget: 15,
                rounds: 4,
                strategy,
                seed: Seed::new(7),
            };
            let (curve, trace) =
                run_active_learning_traced(&pool, &test, &small_forest(), &config).unwrap();
            assert_eq!(curve.labeled_counts, vec![10, 25, 40, 55, 70]);
            assert_eq!(curve.task_losses.len(), 5);
            assert!(curve.task_losses.iter().all(|l| (0.0..=1.0).contains(l)));

            // Queried batches are disjoint, sized to budget, sorted, in range.
            let mut seen = std::collections::HashSet::new();
            assert_eq!(trace.len(), 4);
            for batch in &trace {
                assert_eq!(batch.len(), 15);
                assert!(batch.windows(2).all(|w| w[0] < w[1]));
                for &i in batch {
                    assert!(i < pool.len());
                    assert!(seen.insert(i), "index {i} queried twice");
                }
            }

            let again = run_active_learning(&pool, &test, &small_forest(), &config).unwrap();
            assert_eq!(curve, again);
        }
    }

    #[test]
    fn pool_exhaustion_is_rejected() {
        let pool = gen_mixture(&separated_spec(0.0), 50, Seed::new(1)).unwrap();
        let test = gen_mixture(&separated_spec(0.0), 50, Seed::new(2)).unwrap();
        let config = ActiveLearningConfig {
            initial_labeled: 20,
            query_budget: 20,
            rounds: 2,
            strategy: Strategy::Random,
            seed: Seed::new(0),
        };
        let err = run_active_learning(&pool, &test, &small_forest(), &config).unwrap_err();
        assert!(err.to_string().contains("pool exhausted"), "{err}");
    }

    #[test]
    fn zero_counts_are_rejected() {
        let pool = gen_mixture(&separated_spec(0.0), 50, Seed::new(1)).unwrap();
        let test = gen_mixture(&separated_spec(0.0), 50, Seed::new(2)).unwrap();
        let mut config = ActiveLearningConfig {
            initial_labeled: 0,
            query_budget: 10,
            rounds: 1,
            strategy: Strategy::Random,
            seed: Seed::new(0),
        };
        assert!(run_active_learning(&pool, &test, &small_forest(), &config).is_err());
        config.initial_labeled = 10;
        config.query_budget = 0;
        assert!(run_active_learning(&pool, &test, &small_forest(), &config).is_err());
    }

    #[test]
    fn mismatched_datasets_are_rejected() {
        let pool = gen_mixture(&separated_spec(0.0), 50, Seed::new(1)).unwrap();
        let other = Dataset::new(vec![1.0, 2.0, 3.0], 3, vec![0], 2, "x").unwrap();
        let config = ActiveLearningConfig {
            initial_labeled: 5,
            query_budget: 5,
            rounds: 1,
            strategy: Strategy::Random,
            seed: Seed::new(0),
        };
        assert!(run_active_learning(&pool, &other, &small_forest(), &config).is_err());
    }

    #[test]
    fn learning_improves_on_separable_task() {
        let pool = gen_mixture(&separated_spec(0.0), 400, Seed::new(21)).unwrap();
        let test = gen_mixture(&separated_spec(0.0), 400, Seed::new(22)).unwrap();
        let config = ActiveLearningConfig {
            initial_labeled: 5,
            query_budget: 40,
            rounds: 5,
            strategy: Strategy::EuLog,
            seed: Seed::new(23),
        };
        let curve = run_active_learning(&pool, &test, &small_forest(), &config).unwrap();
        assert!(
            curve.final_loss() <= curve.task_losses[0] + 0.01,
            "{:?}",
            curve.task_losses
        );
        assert!(curve.final_loss() < 0.1, "{:?}", curve.task_losses);
    }

    #[test]
    fn pure_noise_converges_to_chance() {
        // Uninformative features, uniform labels: final zero-one loss must sit
        // at (K-1)/K = 0.5 regardless of strategy.
        let mut finals = Vec::new();
        for seed in 0..10u64 {
            let pool = gen_mixture(&pure_noise_spec(), 200, Seed::new(100 + seed)).unwrap();
            let test = gen_mixture(&pure_noise_spec(), 400, Seed::new(200 + seed)).unwrap();
            let config = ActiveLearningConfig {
                initial_labeled: 20,
                query_budget: 20,
                rounds: 3,
                strategy: Strategy::EuBrier,
                seed: Seed::new(seed),
            };
            let curve = run_active_learning(&pool, &test, &small_forest(), &config).unwrap();
            finals.push(curve.final_loss());
        }
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        assert!((mean - 0.5).abs() < 0.05, "mean final loss {mean}");
    }
}
