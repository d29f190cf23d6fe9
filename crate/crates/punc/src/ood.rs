//! Out-of-distribution detection: AUROC of an uncertainty score separating
//! in-distribution from OoD instances, with OoD as the positive class.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::measures::{decompose, DecomposeMode, UncertaintyComponent};
use crate::scoring::ScoringRule;
use crate::simplex::SecondOrderEnsemble;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct OodReport {
    pub auroc: f64,
    pub n_id: usize,
    pub n_ood: usize,
    pub rule_name: String,
    pub component: UncertaintyComponent,
}

/// Probability that a random OoD score exceeds a random iD score, ties
/// counted half (Mann-Whitney). Computed from midranks in O(n log n);
/// equal to direct pair counting because rank sums of half-integers are
/// exact in double precision.
pub fn auroc(id_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    if id_scores.is_empty() || ood_scores.is_empty() {
        return Err(Error::invalid("auroc needs nonempty score sets"));
    }
    for (name, scores) in [("id_scores", id_scores), ("ood_scores", ood_scores)] {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("{name}[{i}] is not finite")));
        }
    }

    let n_id = id_scores.len();
    let n_ood = ood_scores.len();
    let mut pooled: Vec<(f64, bool)> = id_scores
        .iter()
        .map(|&s| (s, false))
        .chain(ood_scores.iter().map(|&s| (s, true)))
        .collect();
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores"));

    // Midranks over tie runs; sum the OoD ranks.
    let mut ood_rank_sum = 0.0;
    let mut start = 0;
    while start < pooled.len() {
        let mut end = start;
        while end < pooled.len() && pooled[end].0 == pooled[start].0 {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0; // ranks are 1-based
        for item in &pooled[start..end] {
            if item.1 {
                ood_rank_sum += midrank;
            }
        }
        start = end;
    }

    let u = ood_rank_sum - (n_ood * (n_ood + 1)) as f64 / 2.0;
    Ok(u / (n_id as f64 * n_ood as f64))
}

/// Scores both datasets with the chosen uncertainty component of the
/// predictor's ensembles and reports the AUROC of OoD-vs-iD separation.
pub fn ood_experiment<P>(
    mut model_predict: P,
    id_data: &Dataset,
    ood_data: &Dataset,
    rule: &dyn ScoringRule,
    component: UncertaintyComponent,
) -> Result<OodReport>
where
    P: FnMut(&[f64]) -> Result<SecondOrderEnsemble>,
{
    if id_data.n_features() != ood_data.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "id data has {} features, ood data has {}",
            id_data.n_features(),
            ood_data.n_features()
        )));
    }
    let mut score_set = |data: &Dataset| -> Result<Vec<f64>> {
        (0..data.len())
            .map(|i| {
                let q = model_predict(data.row(i))?;
                Ok(decompose(rule, &q, DecomposeMode::Auto)?.component(component))
            })
            .collect()
    };
    let id_scores = score_set(id_data)?;
    let ood_scores = score_set(ood_data)?;
    Ok(OodReport {
        auroc: auroc(&id_scores, &ood_scores)?,
        n_id: id_data.len(),
        n_ood: ood_data.len(),
        rule_name: rule.name().to_string(),
        component,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::LogLoss;
    use crate::simplex::Categorical;

    #[test]
    fn perfect_separation() {
        assert_eq!(auroc(&[0.1, 0.2], &[0.3, 0.4]).unwrap(), 1.0);
    }

    #[test]
    fn single_tie_is_half() {
        assert_eq!(auroc(&[0.3], &[0.3]).unwrap(), 0.5);
    }

    #[test]
    fn hand_counted_pairs() {
        // Pairs (0.2 vs 0.3, 0.5) and (0.4 vs 0.3, 0.5): three wins of four.
        assert_eq!(auroc(&[0.2, 0.4], &[0.3, 0.5]).unwrap(), 0.75);
    }

    #[test]
    fn rejects_empty_or_non_finite() {
        assert!(auroc(&[], &[0.1]).is_err());
        assert!(auroc(&[0.1], &[]).is_err());
        assert!(auroc(&[f64::NAN], &[0.1]).is_err());
        assert!(auroc(&[0.1], &[f64::INFINITY]).is_err());
    }

    #[test]
    fn identical_score_multisets_give_half() {
        let scores = [0.4, 0.1, 0.9, 0.4, 0.2];
        assert_eq!(auroc(&scores, &scores).unwrap(), 0.5);
    }

    #[test]
    fn complement_symmetry() {
        let a = [0.1, 0.7, 0.3, 0.3];
        let b = [0.2, 0.3, 0.9];
        let fwd = auroc(&a, &b).unwrap();
        let rev = auroc(&b, &a).unwrap();
        assert!((fwd + rev - 1.0).abs() < 1e-12);
    }

    fn tiny_dataset(values: &[f64]) -> Dataset {
        Dataset::new(values.to_vec(), 1, vec![0; values.len()], 2, "test").unwrap()
    }

    #[test]
    fn experiment_same_data_gives_half() {
        let data = tiny_dataset(&[0.0, 1.0, 2.0, 3.0]);
        let predict = |x: &[f64]| {
            let p = 0.5 + 0.4 * (x[0] / 3.0 - 0.5);
            SecondOrderEnsemble::uniform(vec![
                Categorical::new(vec![p, 1.0 - p]).unwrap(),
                Categorical::new(vec![1.0 - p, p]).unwrap(),
            ])
        };
        let report = ood_experiment(
            predict,
            &data,
            &data,
            &LogLoss::new(),
            UncertaintyComponent::Eu,
        )
        .unwrap();
        assert_eq!(report.auroc, 0.5);
        assert_eq!(report.n_id, 4);
        assert_eq!(report.n_ood, 4);
    }

    #[test]
    fn experiment_constant_predictor_gives_half() {
        let id = tiny_dataset(&[0.0, 1.0]);
        let ood = tiny_dataset(&[10.0, 11.0, 12.0]);
        let constant = |_: &[f64]| {
            SecondOrderEnsemble::uniform(vec![
                Categorical::new(vec![0.8, 0.2]).unwrap(),
                Categorical::new(vec![0.4, 0.6]).unwrap(),
            ])
        };
        let report = ood_experiment(
            constant,
            &id,
            &ood,
            &LogLoss::new(),
            UncertaintyComponent::Tu,
        )
        .unwrap();
        assert_eq!(report.auroc, 0.5);
    }

    #[test]
    fn experiment_rejects_feature_mismatch() {
        let id = tiny_dataset(&[0.0]);
        let ood = Dataset::new(vec![0.0, 1.0], 2, vec![0], 2, "test").unwrap();
        let predict = |_: &[f64]| {
            SecondOrderEnsemble::uniform(vec![Categorical::uniform(2).unwrap()])
        };
        assert!(ood_experiment(predict, &id, &ood, &LogLoss::new(), UncertaintyComponent::Eu)
            .is_err());
    }
}
