//! Multi-seed experiment orchestration shared by the CLI and the acceptance
//! suite.
//!
//! Each experiment derives its train/test/fit RNG streams from the per-run
//! seed with fixed salts, so a seed value fully determines every dataset and
//! model in the run, and the same seed sees identical data across strategies
//! and rule pairings.

use crate::active::{run_active_learning, ActiveLearningConfig, LearningCurve, Strategy};
use crate::data::{gen_mixture, gen_ood_shift, separated_spec, MixtureSpec};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::forest::{fit_bagged_trees, BaggedTreesModel, ForestConfig};
use crate::measures::{decompose, DecomposeMode, UncertaintyComponent};
use crate::ood::ood_experiment;
use crate::scoring::{rule_by_name, BUILTIN_RULE_NAMES};
use crate::seed::Seed;
use crate::selective::selective_experiment;
use crate::simplex::SecondOrderEnsemble;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Salt for the training-set stream of a run seed.
pub const TRAIN_SALT: u64 = 1;
/// Salt for the test-set stream.
pub const TEST_SALT: u64 = 2;
/// Salt for the shifted out-of-distribution stream.
pub const OOD_SALT: u64 = 3;
/// Salt for the model-fit stream.
pub const FIT_SALT: u64 = 4;

/// Desk-scale experiment defaults: large enough for the orderings under
/// study to be stable across seeds, small enough for minutes-scale runs.
pub const DESK_TRAIN_N: usize = 2000;
pub const DESK_TEST_N: usize = 2000;
pub const DESK_OOD_N: usize = 1000;
pub const DESK_SHIFT: f64 = 10.0;
pub const DESK_POOL_N: usize = 5000;
pub const DESK_INITIAL_LABELED: usize = 50;
pub const DESK_QUERY_BUDGET: usize = 50;
pub const DESK_ROUNDS: usize = 20;

/// Mean and sample standard deviation (n - 1 denominator; 0 for a single
/// value, NaN mean for empty input).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn train_model(
    spec: &MixtureSpec,
    train_n: usize,
    forest: &ForestConfig,
    seed: Seed,
) -> Result<(BaggedTreesModel, Dataset)> {
    let train = gen_mixture(spec, train_n, seed.derive(TRAIN_SALT))?;
    let model = fit_bagged_trees(&train, forest, seed.derive(FIT_SALT))?;
    Ok((model, train))
}

/// One AULC measurement: `task_rule` scores the kept instances, the
/// `component` of the `unc_rule` decomposition orders them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectiveCell {
    pub task_rule: String,
    pub unc_rule: String,
    pub component: UncertaintyComponent,
    pub seed: u64,
    pub aulc: f64,
}

/// Test-set predictions and labels for one run seed, with the same derived
/// train/fit/test streams `selective_matrix` uses.
pub fn seed_predictions(
    spec: &MixtureSpec,
    train_n: usize,
    test_n: usize,
    forest: &ForestConfig,
    seed_value: u64,
) -> Result<(Vec<SecondOrderEnsemble>, Vec<usize>)> {
    let seed = Seed::new(seed_value);
    let (model, _) = train_model(spec, train_n, forest, seed)?;
    let test = gen_mixture(spec, test_n, seed.derive(TEST_SALT))?;
    let predictions = model.predict_dataset(&test)?;
    Ok((predictions, test.labels().to_vec()))
}

/// AULC for every (task rule x uncertainty rule x component) triple, per
/// seed. Each seed fits one model and reuses its test predictions across all
/// pairings.
pub fn selective_matrix(
    spec: &MixtureSpec,
    train_n: usize,
    test_n: usize,
    forest: &ForestConfig,
    components: &[UncertaintyComponent],
    seeds: &[u64],
) -> Result<Vec<SelectiveCell>> {
    let per_seed: Vec<Vec<SelectiveCell>> = seeds
        .par_iter()
        .map(|&seed_value| {
            let (predictions, labels) = seed_predictions(spec, train_n, test_n, forest, seed_value)?;

            let mut cells = Vec::new();
            for task_name in BUILTIN_RULE_NAMES {
                let task = rule_by_name(task_name)?;
                for unc_name in BUILTIN_RULE_NAMES {
                    let unc = rule_by_name(unc_name)?;
                    for &component in components {
                        let curve = selective_experiment(
                            &predictions,
                            &labels,
                            unc.as_ref(),
                            component,
                            task.as_ref(),
                        )?;
                        cells.push(SelectiveCell {
                            task_rule: task_name.to_string(),
                            unc_rule: unc_name.to_string(),
                            component,
                            seed: seed_value,
                            aulc: curve.aulc,
                        });
                    }
                }
            }
            Ok(cells)
        })
        .collect::<Result<_>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// One AUROC measurement for OoD-vs-iD separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodCell {
    pub rule: String,
    pub component: UncertaintyComponent,
    pub seed: u64,
    pub auroc: f64,
}

/// AUROC for every (rule x component) pair, per seed, against a test set
/// shifted by `shift` mean scales along the first feature axis.
pub fn ood_matrix(
    spec: &MixtureSpec,
    train_n: usize,
    id_n: usize,
    ood_n: usize,
    shift: f64,
    forest: &ForestConfig,
    components: &[UncertaintyComponent],
    seeds: &[u64],
) -> Result<Vec<OodCell>> {
    let per_seed: Vec<Vec<OodCell>> = seeds
        .par_iter()
        .map(|&seed_value| {
            let seed = Seed::new(seed_value);
            let (model, _) = train_model(spec, train_n, forest, seed)?;
            let id_test = gen_mixture(spec, id_n, seed.derive(TEST_SALT))?;
            let ood_test = gen_ood_shift(spec, shift, ood_n, seed.derive(OOD_SALT))?;

            let mut cells = Vec::new();
            for rule_name in BUILTIN_RULE_NAMES {
                let rule = rule_by_name(rule_name)?;
                for &component in components {
                    let report = ood_experiment(
                        |x| model.predict_second_order(x),
                        &id_test,
                        &ood_test,
                        rule.as_ref(),
                        component,
                    )?;
                    cells.push(OodCell {
                        rule: rule_name.to_string(),
                        component,
                        seed: seed_value,
                        auroc: report.auroc,
                    });
                }
            }
            Ok(cells)
        })
        .collect::<Result<_>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// One full active-learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveCell {
    pub strategy: Strategy,
    pub seed: u64,
    pub curve: LearningCurve,
}

/// Learning curves for every (strategy x seed) pair. Pool and test sets
/// depend only on the seed, so strategies compete on identical data.
#[allow(clippy::too_many_arguments)]
pub fn active_curves(
    spec: &MixtureSpec,
    pool_n: usize,
    test_n: usize,
    forest: &ForestConfig,
    strategies: &[Strategy],
    initial_labeled: usize,
    query_budget: usize,
    rounds: usize,
    seeds: &[u64],
) -> Result<Vec<ActiveCell>> {
    let jobs: Vec<(Strategy, u64)> = strategies
        .iter()
        .flat_map(|&strategy| seeds.iter().map(move |&s| (strategy, s)))
        .collect();
    jobs.par_iter()
        .map(|&(strategy, seed_value)| {
            let seed = Seed::new(seed_value);
            let pool = gen_mixture(spec, pool_n, seed.derive(TRAIN_SALT))?;
            let test = gen_mixture(spec, test_n, seed.derive(TEST_SALT))?;
            let config = ActiveLearningConfig {
                initial_labeled,
                query_budget,
                rounds,
                strategy,
                seed,
            };
            let curve = run_active_learning(&pool, &test, forest, &config)?;
            Ok(ActiveCell {
                strategy,
                seed: seed_value,
                curve,
            })
        })
        .collect()
}

/// Model behavior at one label-flip level: mean zero-one aleatoric
/// uncertainty over the test set, and the zero-one test loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialCell {
    pub label_flip: f64,
    pub seed: u64,
    pub mean_au_zero_one: f64,
    pub zero_one_loss: f64,
}

/// Sweeps the label-flip level on the separated two-cluster task. Because
/// feature draws are paired across flip levels for a fixed seed, the sweep
/// isolates the effect of label noise.
pub fn aleatoric_dial(
    flips: &[f64],
    train_n: usize,
    test_n: usize,
    forest: &ForestConfig,
    seeds: &[u64],
) -> Result<Vec<DialCell>> {
    let rule = rule_by_name("zero_one")?;
    let jobs: Vec<(f64, u64)> = flips
        .iter()
        .flat_map(|&flip| seeds.iter().map(move |&s| (flip, s)))
        .collect();
    jobs.par_iter()
        .map(|&(label_flip, seed_value)| {
            let spec = separated_spec(label_flip);
            let seed = Seed::new(seed_value);
            let (model, _) = train_model(&spec, train_n, forest, seed)?;
            let test = gen_mixture(&spec, test_n, seed.derive(TEST_SALT))?;

            let mut au_sum = 0.0;
            let mut errors = 0usize;
            for i in 0..test.len() {
                let q = model.predict_second_order(test.row(i))?;
                au_sum += decompose(rule.as_ref(), &q, DecomposeMode::Auto)?
                    .component(UncertaintyComponent::Au);
                if q.model_average().argmax() != test.label(i) {
                    errors += 1;
                }
            }
            Ok(DialCell {
                label_flip,
                seed: seed_value,
                mean_au_zero_one: au_sum / test.len() as f64,
                zero_one_loss: errors as f64 / test.len() as f64,
            })
        })
        .collect()
}
