//! Selective prediction: rejection orderings, loss-rejection curves, AULC,
//! and the exhaustive permutation oracle.
//!
//! Instances are kept in ascending order of uncertainty, so the curve point
//! at fraction alpha = k/n averages the task losses of the k *least*
//! uncertain instances. AULC is the Riemann sum of the curve at those n
//! points. Writing the double sum the other way, AULC * n equals
//! sum_j w_j * c_{pi(j)} with strictly decreasing weights
//! w_j = sum_{k=j}^{n} 1/k, which the rearrangement inequality shows is
//! minimized by ordering instances by non-decreasing loss.

use crate::error::{Error, Result};
use crate::measures::{decompose, DecomposeMode, UncertaintyComponent};
use crate::scoring::ScoringRule;
use crate::simplex::SecondOrderEnsemble;

/// A loss-rejection curve over retained fractions k/n, k = 1..n.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionCurve {
    /// Retained fraction at each curve point; strictly increasing, last = 1.
    pub alphas: Vec<f64>,
    /// Mean task loss over the retained instances at each point.
    pub losses: Vec<f64>,
    /// Mean of the curve points.
    pub aulc: f64,
    /// Per-instance task losses in retention order c_{pi(1)}..c_{pi(n)}.
    pub ordered_losses: Vec<f64>,
}

impl RejectionCurve {
    /// Re-evaluates (1/n) sum_k (1/k) sum_{j<=k} c_{pi(j)} from the stored
    /// per-instance losses; agrees with `aulc` up to rounding.
    pub fn recompute_aulc(&self) -> f64 {
        let n = self.ordered_losses.len();
        let mut prefix = 0.0;
        let mut total = 0.0;
        for (k, c) in self.ordered_losses.iter().enumerate() {
            prefix += c;
            total += prefix / (k + 1) as f64;
        }
        total / n as f64
    }
}

fn check_no_nan(values: &[f64], what: &str) -> Result<()> {
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::invalid(format!("{what}[{i}] is NaN")));
    }
    Ok(())
}

fn stable_ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("NaN rejected above"));
    order
}

/// Permutation keeping the least uncertain instances first; ties break by
/// original index.
pub fn rejection_order(uncertainties: &[f64]) -> Result<Vec<usize>> {
    check_no_nan(uncertainties, "uncertainties")?;
    Ok(stable_ascending_order(uncertainties))
}

/// Stable ascending permutation of expected losses: the ordering that
/// minimizes AULC.
pub fn optimal_order(expected_losses: &[f64]) -> Result<Vec<usize>> {
    check_no_nan(expected_losses, "expected_losses")?;
    Ok(stable_ascending_order(expected_losses))
}

/// The rearrangement weights w_j = sum_{k=j}^{n} 1/k (1-indexed j);
/// strictly decreasing with w_n = 1/n.
pub fn aulc_weights(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("aulc weights need n >= 1"));
    }
    let mut weights = vec![0.0; n];
    let mut tail = 0.0;
    for j in (0..n).rev() {
        tail += 1.0 / (j + 1) as f64;
        weights[j] = tail;
    }
    Ok(weights)
}

/// Builds the loss-rejection curve for per-instance task losses under the
/// given uncertainty scores.
pub fn loss_rejection_curve(
    per_instance_losses: &[f64],
    uncertainties: &[f64],
) -> Result<RejectionCurve> {
    let n = per_instance_losses.len();
    if n == 0 {
        return Err(Error::invalid("loss-rejection curve needs n >= 1"));
    }
    if uncertainties.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} losses but {} uncertainties",
            uncertainties.len()
        )));
    }
    check_no_nan(per_instance_losses, "losses")?;
    let order = rejection_order(uncertainties)?;

    let mut alphas = Vec::with_capacity(n);
    let mut losses = Vec::with_capacity(n);
    let mut ordered_losses = Vec::with_capacity(n);
    let mut prefix = 0.0;
    for (k, &idx) in order.iter().enumerate() {
        let c = per_instance_losses[idx];
        ordered_losses.push(c);
        prefix += c;
        alphas.push((k + 1) as f64 / n as f64);
        losses.push(prefix / (k + 1) as f64);
    }
    let aulc = losses.iter().sum::<f64>() / n as f64;
    Ok(RejectionCurve {
        alphas,
        losses,
        aulc,
        ordered_losses,
    })
}

/// S(pi) = sum_j w_j c_{pi(j)}, the weighted-sum form of AULC * n.
pub fn weighted_order_sum(losses: &[f64], order: &[usize], weights: &[f64]) -> f64 {
    order
        .iter()
        .zip(weights)
        .map(|(&idx, w)| w * losses[idx])
        .sum()
}

/// Exhaustive oracle: enumerates all n! orderings (n <= 9) and returns the
/// minimizer of S(pi) with its value. Ties resolve to the lexicographically
/// first permutation.
pub fn brute_force_aulc(expected_losses: &[f64]) -> Result<(Vec<usize>, f64)> {
    let n = expected_losses.len();
    if n == 0 {
        return Err(Error::invalid("brute force needs n >= 1"));
    }
    if n > 9 {
        return Err(Error::invalid(format!(
            "brute force enumerates n! permutations; n = {n} is too large (max 9)"
        )));
    }
    check_no_nan(expected_losses, "expected_losses")?;
    let weights = aulc_weights(n)?;

    let mut best_order: Option<Vec<usize>> = None;
    let mut best_s = f64::INFINITY;
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    // Depth-first lexicographic enumeration.
    fn visit(
        losses: &[f64],
        weights: &[f64],
        current: &mut Vec<usize>,
        used: &mut [bool],
        best_order: &mut Option<Vec<usize>>,
        best_s: &mut f64,
    ) {
        let n = losses.len();
        if current.len() == n {
            let s = weighted_order_sum(losses, current, weights);
            if s < *best_s {
                *best_s = s;
                *best_order = Some(current.clone());
            }
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                visit(losses, weights, current, used, best_order, best_s);
                current.pop();
                used[i] = false;
            }
        }
    }
    visit(
        expected_losses,
        &weights,
        &mut current,
        &mut used,
        &mut best_order,
        &mut best_s,
    );
    Ok((best_order.expect("n >= 1 yields at least one permutation"), best_s))
}

/// Runs selective prediction on a set of per-instance ensembles: task losses
/// are scored at the model average, uncertainties come from the chosen
/// component of the decomposition under `unc_rule`.
pub fn selective_experiment(
    predictions: &[SecondOrderEnsemble],
    labels: &[usize],
    unc_rule: &dyn ScoringRule,
    unc_component: UncertaintyComponent,
    task_rule: &dyn ScoringRule,
) -> Result<RejectionCurve> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions but {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut losses = Vec::with_capacity(predictions.len());
    let mut uncertainties = Vec::with_capacity(predictions.len());
    for (q, &y) in predictions.iter().zip(labels) {
        let avg = q.model_average();
        losses.push(task_rule.score(&avg, y)?);
        uncertainties.push(decompose(unc_rule, q, DecomposeMode::Auto)?.component(unc_component));
    }
    loss_rejection_curve(&losses, &uncertainties)
}
