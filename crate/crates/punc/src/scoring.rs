//! Proper scoring rules on categorical predictions.
//!
//! A scoring rule charges a predicted distribution against a realized class:
//! `score(pred, y) = loss of predicting pred when y happens`. From the
//! instance score the module derives, for prediction p and truth t:
//!
//! - expected loss  L(p, t) = sum_y t_y * score(p, y)
//! - entropy        H(t)    = L(t, t)           (irreducible loss at the truth)
//! - divergence     D(p, t) = L(p, t) - H(t)    (excess loss)
//!
//! A rule is proper when D >= 0 everywhere, strictly proper when D = 0 only
//! at p = t. Strictly proper rules expose the convex potential G = -H, whose
//! Bregman divergence coincides with D; the zero-one rule is proper but not
//! strictly proper and has no potential.

use crate::error::{Error, Result};
use crate::simplex::{Categorical, SecondOrderEnsemble};
use std::sync::{Arc, OnceLock};

/// Names of the rules shipped with the crate, in registry order.
pub const BUILTIN_RULE_NAMES: [&str; 3] = ["log", "brier", "zero_one"];

pub trait ScoringRule: Send + Sync {
    fn name(&self) -> &str;

    fn strictly_proper(&self) -> bool;

    /// Instance loss of predicting `pred` when class `y` is realized.
    fn score(&self, pred: &Categorical, y: usize) -> Result<f64>;

    /// L(pred, truth) = sum_y truth_y * score(pred, y).
    fn expected_loss(&self, pred: &Categorical, truth: &Categorical) -> Result<f64> {
        check_same_classes(self.name(), pred, truth)?;
        let mut total = 0.0;
        for (y, t) in truth.probs().iter().enumerate() {
            total += t * self.score(pred, y)?;
        }
        Ok(total)
    }

    /// H(truth) = L(truth, truth).
    fn entropy(&self, truth: &Categorical) -> Result<f64> {
        self.expected_loss(truth, truth)
    }

    /// D(pred, truth) = L(pred, truth) - H(truth); nonnegative for proper rules.
    fn divergence(&self, pred: &Categorical, truth: &Categorical) -> Result<f64> {
        Ok(self.expected_loss(pred, truth)? - self.entropy(truth)?)
    }

    /// Convex potential G = -H, defined for strictly proper rules only.
    fn potential(&self, theta: &Categorical) -> Result<f64> {
        if self.strictly_proper() {
            Ok(-self.entropy(theta)?)
        } else {
            Err(Error::Unsupported {
                rule: self.name().to_string(),
                what: "a convex potential (rule is not strictly proper)".into(),
            })
        }
    }

    /// Gradient of the potential, projected onto the simplex tangent space
    /// (components summing to zero). Only rules with a differentiable
    /// potential provide this.
    fn potential_gradient(&self, theta: &Categorical) -> Result<Vec<f64>> {
        let _ = theta;
        Err(Error::Unsupported {
            rule: self.name().to_string(),
            what: "a potential gradient".into(),
        })
    }

    /// Closed-form (tu, au, eu) for an ensemble, if this rule has one.
    /// The generic decomposition path is used when this returns None.
    fn closed_form_components(&self, q: &SecondOrderEnsemble) -> Option<(f64, f64, f64)> {
        let _ = q;
        None
    }
}

fn check_same_classes(rule: &str, pred: &Categorical, truth: &Categorical) -> Result<()> {
    if pred.classes() != truth.classes() {
        return Err(Error::DimensionMismatch(format!(
            "{rule}: prediction has {} classes, truth has {}",
            pred.classes(),
            truth.classes()
        )));
    }
    Ok(())
}

fn check_label(rule: &str, pred: &Categorical, y: usize) -> Result<()> {
    if y >= pred.classes() {
        let _ = rule;
        return Err(Error::LabelOutOfRange {
            label: y,
            classes: pred.classes(),
        });
    }
    Ok(())
}

/// Subtracts the mean, mapping an ambient gradient to its tangent-space
/// representative. Inner products against simplex differences are unchanged.
fn project_to_tangent(mut grad: Vec<f64>) -> Vec<f64> {
    let mean = grad.iter().sum::<f64>() / grad.len() as f64;
    for g in grad.iter_mut() {
        *g -= mean;
    }
    grad
}

// --- log loss ---------------------------------------------------------

/// Log loss -ln(pred_y). Probabilities are clamped to `[clamp, 1]` before
/// the logarithm so scores stay finite; the same clamp is applied in every
/// closed form so the generic and closed-form paths agree.
#[derive(Debug, Clone)]
pub struct LogLoss {
    clamp: f64,
}

pub const DEFAULT_LOG_CLAMP: f64 = 1e-12;

impl LogLoss {
    pub fn new() -> Self {
        Self::with_clamp(DEFAULT_LOG_CLAMP)
    }

    pub fn with_clamp(clamp: f64) -> Self {
        assert!(clamp > 0.0 && clamp < 1.0, "clamp must lie in (0, 1)");
        LogLoss { clamp }
    }

    fn safe_ln(&self, p: f64) -> f64 {
        p.clamp(self.clamp, 1.0).ln()
    }
}

impl Default for LogLoss {
    fn default() -> Self {
        Self::new()
    }
}

impl ScoringRule for LogLoss {
    fn name(&self) -> &str {
        "log"
    }

    fn strictly_proper(&self) -> bool {
        true
    }

    fn score(&self, pred: &Categorical, y: usize) -> Result<f64> {
        check_label(self.name(), pred, y)?;
        Ok(-self.safe_ln(pred.probs()[y]))
    }

    fn entropy(&self, truth: &Categorical) -> Result<f64> {
        // Shannon entropy; 0 * ln(clamp) = 0 keeps point masses exact.
        Ok(truth.probs().iter().map(|&t| t * -self.safe_ln(t)).sum())
    }

    fn potential(&self, theta: &Categorical) -> Result<f64> {
        Ok(-self.entropy(theta)?)
    }

    fn potential_gradient(&self, theta: &Categorical) -> Result<Vec<f64>> {
        let grad = theta
            .probs()
            .iter()
            .map(|&t| self.safe_ln(t) + 1.0)
            .collect();
        Ok(project_to_tangent(grad))
    }

    fn closed_form_components(&self, q: &SecondOrderEnsemble) -> Option<(f64, f64, f64)> {
        let avg = q.model_average();
        let tu = self.entropy(&avg).expect("entropy is total");
        let mut au = 0.0;
        let mut eu = 0.0;
        for (member, w) in q.members().iter().zip(q.weights()) {
            let mut h = 0.0;
            let mut kl = 0.0;
            for (&t, &a) in member.probs().iter().zip(avg.probs()) {
                h += t * -self.safe_ln(t);
                kl += t * (self.safe_ln(t) - self.safe_ln(a));
            }
            au += w * h;
            eu += w * kl;
        }
        Some((tu, au, eu))
    }
}

// --- Brier loss -------------------------------------------------------

/// Brier loss sum_k (pred_k - [k == y])^2.
#[derive(Debug, Clone, Default)]
pub struct BrierLoss;

impl ScoringRule for BrierLoss {
    fn name(&self) -> &str {
        "brier"
    }

    fn strictly_proper(&self) -> bool {
        true
    }

    fn score(&self, pred: &Categorical, y: usize) -> Result<f64> {
        check_label(self.name(), pred, y)?;
        let mut total = 0.0;
        for (k, &p) in pred.probs().iter().enumerate() {
            let target = if k == y { 1.0 } else { 0.0 };
            total += (p - target) * (p - target);
        }
        Ok(total)
    }

    fn entropy(&self, truth: &Categorical) -> Result<f64> {
        // 1 - sum t^2
        Ok(1.0 - truth.probs().iter().map(|t| t * t).sum::<f64>())
    }

    fn potential(&self, theta: &Categorical) -> Result<f64> {
        Ok(-self.entropy(theta)?)
    }

    fn potential_gradient(&self, theta: &Categorical) -> Result<Vec<f64>> {
        Ok(project_to_tangent(
            theta.probs().iter().map(|&t| 2.0 * t).collect(),
        ))
    }

    fn closed_form_components(&self, q: &SecondOrderEnsemble) -> Option<(f64, f64, f64)> {
        let avg = q.model_average();
        let tu = 1.0 - avg.probs().iter().map(|a| a * a).sum::<f64>();
        let mut au = 0.0;
        let mut eu = 0.0;
        for (member, w) in q.members().iter().zip(q.weights()) {
            let sq_norm: f64 = member.probs().iter().map(|t| t * t).sum();
            let dist: f64 = member
                .probs()
                .iter()
                .zip(avg.probs())
                .map(|(&t, &a)| (a - t) * (a - t))
                .sum();
            au += w * (1.0 - sq_norm);
            eu += w * dist;
        }
        Some((tu, au, eu))
    }
}

// --- zero-one loss ----------------------------------------------------

/// Zero-one loss 1 - [argmax pred == y], with argmax ties resolved to the
/// lowest class index. Proper but not strictly proper: no potential.
#[derive(Debug, Clone, Default)]
pub struct ZeroOneLoss;

impl ScoringRule for ZeroOneLoss {
    fn name(&self) -> &str {
        "zero_one"
    }

    fn strictly_proper(&self) -> bool {
        false
    }

    fn score(&self, pred: &Categorical, y: usize) -> Result<f64> {
        check_label(self.name(), pred, y)?;
        Ok(if pred.argmax() == y { 0.0 } else { 1.0 })
    }

    fn entropy(&self, truth: &Categorical) -> Result<f64> {
        Ok(1.0 - truth.max_prob())
    }

    fn closed_form_components(&self, q: &SecondOrderEnsemble) -> Option<(f64, f64, f64)> {
        let avg = q.model_average();
        let predicted = avg.argmax();
        let tu = 1.0 - avg.probs()[predicted];
        let mut au = 0.0;
        let mut eu = 0.0;
        for (member, w) in q.members().iter().zip(q.weights()) {
            let top = member.max_prob();
            au += w * (1.0 - top);
            // Label-level disagreement: zero whenever the member's argmax
            // matches the model average's.
            eu += w * (top - member.probs()[predicted]);
        }
        Some((tu, au, eu))
    }
}

// --- registry ---------------------------------------------------------

/// Name-keyed rule lookup with an extension point for user-supplied rules.
pub struct RuleRegistry {
    rules: Vec<Arc<dyn ScoringRule>>,
}

impl RuleRegistry {
    /// A registry holding the three built-in rules.
    pub fn with_builtins() -> Self {
        RuleRegistry {
            rules: vec![
                Arc::new(LogLoss::new()),
                Arc::new(BrierLoss),
                Arc::new(ZeroOneLoss),
            ],
        }
    }

    pub fn empty() -> Self {
        RuleRegistry { rules: Vec::new() }
    }

    pub fn register(&mut self, rule: Arc<dyn ScoringRule>) -> Result<()> {
        if self.rules.iter().any(|r| r.name() == rule.name()) {
            return Err(Error::invalid(format!(
                "a rule named `{}` is already registered",
                rule.name()
            )));
        }
        self.rules.push(rule);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ScoringRule>> {
        self.rules
            .iter()
            .find(|r| r.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownRule(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.rules.iter().map(|r| r.name()).collect()
    }
}

/// Looks up a built-in rule ("log", "brier", "zero_one") by name.
pub fn rule_by_name(name: &str) -> Result<Arc<dyn ScoringRule>> {
    static BUILTINS: OnceLock<RuleRegistry> = OnceLock::new();
    BUILTINS.get_or_init(RuleRegistry::with_builtins).get(name)
}
