//! Bagged depth-limited decision trees as a second-order predictor.
//!
//! Each tree is fit on an independent bootstrap resample of the training
//! set; at prediction time the per-tree leaf distributions form the members
//! of a uniformly weighted ensemble. Trees split on axis-aligned thresholds
//! chosen by Gini gain and smooth their leaf counts with add-one Laplace, so
//! every member is a strictly interior categorical.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::simplex::{Categorical, SecondOrderEnsemble};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Children as indices into the tree's node arena.
        left: usize,
        right: usize,
    },
    Leaf {
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    fn leaf_probs(&self, x: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { probs } => return probs,
            }
        }
    }
}

/// Hyperparameters for `fit_bagged_trees`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 20,
            max_depth: 5,
        }
    }
}

/// An ensemble of bootstrap-trained trees over a fixed class set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedTreesModel {
    trees: Vec<DecisionTree>,
    n_features: usize,
    classes: usize,
}

impl BaggedTreesModel {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Uniformly weighted ensemble of per-tree leaf distributions at `x`.
    pub fn predict_second_order(&self, x: &[f64]) -> Result<SecondOrderEnsemble> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("prediction input must be finite"));
        }
        let members = self
            .trees
            .iter()
            .map(|t| Categorical::new(t.leaf_probs(x).to_vec()))
            .collect::<Result<Vec<_>>>()?;
        SecondOrderEnsemble::uniform(members)
    }

    /// Second-order predictions for every row of `data`.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<SecondOrderEnsemble>> {
        (0..data.len())
            .map(|i| self.predict_second_order(data.row(i)))
            .collect()
    }
}

struct TreeBuilder<'a> {
    data: &'a Dataset,
    max_depth: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn class_counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.data.classes()];
        for &r in rows {
            counts[self.data.label(r)] += 1;
        }
        counts
    }

    fn gini(counts: &[usize], total: usize) -> f64 {
        let total = total as f64;
        1.0 - counts
            .iter()
            .map(|&c| {
                let p = c as f64 / total;
                p * p
            })
            .sum::<f64>()
    }

    /// Best (feature, threshold, gain) over midpoints of consecutive sorted
    /// unique values, or None when no split has positive gain.
    fn best_split(&self, rows: &[usize], counts: &[usize]) -> Option<(usize, f64, f64)> {
        let n = rows.len();
        let parent = Self::gini(counts, n);
        let mut best: Option<(usize, f64, f64)> = None;

        let mut values: Vec<(f64, usize)> = Vec::with_capacity(n);
        for feature in 0..self.data.n_features() {
            values.clear();
            values.extend(rows.iter().map(|&r| (self.data.row(r)[feature], self.data.label(r))));
            values.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

            let mut left_counts = vec![0usize; counts.len()];
            let mut left_n = 0usize;
            for w in 0..n - 1 {
                let (value, label) = values[w];
                left_counts[label] += 1;
                left_n += 1;
                let next = values[w + 1].0;
                if next == value {
                    continue;
                }
                let right_n = n - left_n;
                let mut right_counts = counts.to_vec();
                for (rc, lc) in right_counts.iter_mut().zip(&left_counts) {
                    *rc -= lc;
                }
                let weighted = (left_n as f64 * Self::gini(&left_counts, left_n)
                    + right_n as f64 * Self::gini(&right_counts, right_n))
                    / n as f64;
                let gain = parent - weighted;
                if gain > 0.0 && best.map_or(true, |(_, _, g)| gain > g) {
                    best = Some((feature, 0.5 * (value + next), gain));
                }
            }
        }
        best
    }

    fn leaf(&mut self, counts: &[usize], n: usize) -> usize {
        let k = counts.len();
        let probs: Vec<f64> = counts
            .iter()
            .map(|&c| (c as f64 + 1.0) / (n as f64 + k as f64))
            .collect();
        self.nodes.push(Node::Leaf { probs });
        self.nodes.len() - 1
    }

    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let counts = self.class_counts(rows);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.max_depth || pure || rows.len() < 2 {
            return self.leaf(&counts, rows.len());
        }
        let Some((feature, threshold, _)) = self.best_split(rows, &counts) else {
            return self.leaf(&counts, rows.len());
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.data.row(r)[feature] <= threshold);
        // Reserve the split slot before recursing so child indices are known.
        self.nodes.push(Node::Leaf { probs: Vec::new() });
        let at = self.nodes.len() - 1;
        let left = self.build(&left_rows, depth + 1);
        let right = self.build(&right_rows, depth + 1);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

fn fit_tree(data: &Dataset, max_depth: usize, seed: Seed) -> DecisionTree {
    let mut rng = seed.rng();
    let n = data.len();
    let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut builder = TreeBuilder {
        data,
        max_depth,
        nodes: Vec::new(),
    };
    let root = builder.build(&rows, 0);
    debug_assert_eq!(root, 0);
    DecisionTree {
        nodes: builder.nodes,
    }
}

/// Fits `config.trees` trees, each on its own bootstrap resample of `train`.
/// Tree t uses the RNG stream `seed.derive(t)`, so the result is independent
/// of the parallel schedule.
pub fn fit_bagged_trees(train: &Dataset, config: &ForestConfig, seed: Seed) -> Result<BaggedTreesModel> {
    if train.is_empty() {
        return Err(Error::data("cannot fit on an empty dataset"));
    }
    if config.trees == 0 {
        return Err(Error::invalid("forest needs at least one tree"));
    }
    if train.classes() < 2 {
        return Err(Error::data(format!(
            "need at least 2 classes to fit, got {}",
            train.classes()
        )));
    }
    let trees: Vec<DecisionTree> = (0..config.trees)
        .into_par_iter()
        .map(|t| fit_tree(train, config.max_depth, seed.derive(t as u64)))
        .collect();
    Ok(BaggedTreesModel {
        trees,
        n_features: train.n_features(),
        classes: train.classes(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_mixture, separated_spec};

    fn toy_dataset() -> Dataset {
        // One feature, threshold at 0: negative -> class 0, positive -> 1.
        let features = vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
        let labels = vec![0, 0, 0, 1, 1, 1];
        Dataset::new(features, 1, labels, 2, "toy").unwrap()
    }

    #[test]
    fn fit_is_deterministic_across_schedules() {
        let data = gen_mixture(&separated_spec(0.1), 300, Seed::new(1)).unwrap();
        let config = ForestConfig::default();
        let a = fit_bagged_trees(&data, &config, Seed::new(42)).unwrap();
        let b = fit_bagged_trees(&data, &config, Seed::new(42)).unwrap();
        assert_eq!(a, b);

        // Serial fit of each tree individually must agree with the parallel run.
        let serial: Vec<DecisionTree> = (0..config.trees)
            .map(|t| fit_tree(&data, config.max_depth, Seed::new(42).derive(t as u64)))
            .collect();
        assert_eq!(a.trees, serial);
    }

    #[test]
    fn different_seeds_differ() {
        let data = gen_mixture(&separated_spec(0.1), 300, Seed::new(1)).unwrap();
        let a = fit_bagged_trees(&data, &ForestConfig::default(), Seed::new(1)).unwrap();
        let b = fit_bagged_trees(&data, &ForestConfig::default(), Seed::new(2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn separable_data_is_learned() {
        let data = toy_dataset();
        let model = fit_bagged_trees(&data, &ForestConfig::default(), Seed::new(0)).unwrap();
        let neg = model.predict_second_order(&[-2.5]).unwrap();
        let pos = model.predict_second_order(&[2.5]).unwrap();
        assert_eq!(neg.model_average().argmax(), 0);
        assert_eq!(pos.model_average().argmax(), 1);
        assert!(neg.model_average().probs()[0] > 0.7);
    }

    #[test]
    fn leaves_are_interior() {
        let data = toy_dataset();
        let model = fit_bagged_trees(&data, &ForestConfig::default(), Seed::new(0)).unwrap();
        for x in [-5.0, -0.5, 0.5, 5.0] {
            let ens = model.predict_second_order(&[x]).unwrap();
            for member in ens.members() {
                for &p in member.probs() {
                    assert!(p > 0.0 && p < 1.0, "leaf probability {p} not interior");
                }
            }
        }
    }

    #[test]
    fn laplace_smoothing_on_pure_leaf() {
        // All 6 rows of one class in a bootstrap leaf would give (n+1)/(n+2)
        // at most; with the toy set a far-left query hits leaves trained on
        // only class 0, so p0 <= 7/8 = (6+1)/(6+2).
        let data = toy_dataset();
        let model = fit_bagged_trees(&data, &ForestConfig::default(), Seed::new(3)).unwrap();
        let ens = model.predict_second_order(&[-100.0]).unwrap();
        for member in ens.members() {
            assert!(member.probs()[0] <= 7.0 / 8.0 + 1e-12);
        }
    }

    #[test]
    fn depth_zero_gives_prior_leaves() {
        let data = toy_dataset();
        let config = ForestConfig {
            trees: 5,
            max_depth: 0,
        };
        let model = fit_bagged_trees(&data, &config, Seed::new(0)).unwrap();
        let ens = model.predict_second_order(&[0.0]).unwrap();
        // Each tree is a single leaf over its bootstrap counts.
        assert_eq!(ens.len(), 5);
        for member in ens.members() {
            let p = member.probs();
            // Bootstrap of 6 rows: leaf is (c0+1)/8, c0 in 0..=6.
            assert!(p[0] >= 1.0 / 8.0 - 1e-12 && p[0] <= 7.0 / 8.0 + 1e-12);
        }
    }

    #[test]
    fn bootstrap_produces_disagreeing_members() {
        let data = gen_mixture(&separated_spec(0.3), 200, Seed::new(5)).unwrap();
        let model = fit_bagged_trees(&data, &ForestConfig::default(), Seed::new(9)).unwrap();
        // Near the decision boundary the trees should not all agree.
        let ens = model.predict_second_order(&[0.0, 0.0]).unwrap();
        let first = ens.members()[0].probs().to_vec();
        assert!(ens
            .members()
            .iter()
            .any(|m| m.probs() != first.as_slice()));
    }

    #[test]
    fn predict_checks_input() {
        let data = toy_dataset();
        let model = fit_bagged_trees(&data, &ForestConfig::default(), Seed::new(0)).unwrap();
        assert!(model.predict_second_order(&[1.0, 2.0]).is_err());
        assert!(model.predict_second_order(&[f64::NAN]).is_err());
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        let data = toy_dataset();
        let config = ForestConfig {
            trees: 0,
            max_depth: 5,
        };
        assert!(fit_bagged_trees(&data, &config, Seed::new(0)).is_err());
        let one_class = Dataset::new(vec![1.0, 2.0], 1, vec![0, 0], 1, "x").unwrap();
        assert!(fit_bagged_trees(&one_class, &ForestConfig::default(), Seed::new(0)).is_err());
    }

    #[test]
    fn predict_dataset_matches_rowwise() {
        let data = gen_mixture(&separated_spec(0.1), 50, Seed::new(2)).unwrap();
        let model = fit_bagged_trees(&data, &ForestConfig::default(), Seed::new(0)).unwrap();
        let all = model.predict_dataset(&data).unwrap();
        assert_eq!(all.len(), data.len());
        for i in [0, 17, 49] {
            let single = model.predict_second_order(data.row(i)).unwrap();
            assert_eq!(all[i].model_average().probs(), single.model_average().probs());
        }
    }
}
