//! punc: proper-scoring-rule uncertainty decomposition and downstream tasks.
//!
//! The library decomposes the predictive uncertainty of second-order
//! distributions (finite weighted ensembles of categorical predictions) into
//! total, aleatoric, and epistemic components, parameterized by a scoring
//! rule (log, Brier, or zero-one), and evaluates how each component drives
//! three downstream tasks: selective prediction via loss-rejection curves,
//! out-of-distribution detection via AUROC, and pool-based active learning.
//!
//! Everything is deterministic given a [`Seed`]: data generation, model
//! fitting, and experiment orchestration derive independent named RNG
//! streams from it, so parallel and serial runs agree bit for bit.

pub mod active;
pub mod data;
pub mod dataset;
pub mod error;
pub mod forest;
pub mod harness;
pub mod measures;
pub mod ood;
pub mod scoring;
pub mod seed;
pub mod selective;
pub mod selfcheck;
pub mod simplex;

pub use active::{
    query_batch, run_active_learning, run_active_learning_traced, zero_one_test_loss,
    ActiveLearningConfig, LearningCurve, Strategy,
};
pub use data::{
    default_spec, gen_mixture, gen_ood_shift, load_csv, rare_region_spec, separated_spec, split,
    MixtureSpec,
};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use forest::{fit_bagged_trees, BaggedTreesModel, ForestConfig};
pub use harness::{
    active_curves, aleatoric_dial, mean_std, ood_matrix, seed_predictions, selective_matrix,
    ActiveCell, DialCell, OodCell, SelectiveCell,
};
pub use measures::{
    batch_decompose, decompose, jensen_gap, DecomposeMode, UncertaintyComponent, UncertaintyTriple,
};
pub use ood::{auroc, ood_experiment, OodReport};
pub use scoring::{
    rule_by_name, BrierLoss, LogLoss, RuleRegistry, ScoringRule, ZeroOneLoss, BUILTIN_RULE_NAMES,
    DEFAULT_LOG_CLAMP,
};
pub use seed::Seed;
pub use selective::{
    aulc_weights, brute_force_aulc, loss_rejection_curve, optimal_order, rejection_order,
    selective_experiment, weighted_order_sum, RejectionCurve,
};
pub use selfcheck::{run_all_suites, SuiteOutcome};
pub use simplex::{argmax, validate_simplex, Categorical, SecondOrderEnsemble, SIMPLEX_TOL};
