//! Labeled feature matrices with provenance metadata.

use crate::error::{Error, Result};

/// N instances of D features with integer labels in `{0..classes-1}`.
/// Features are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    classes: usize,
    source: String,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        classes: usize,
        source: impl Into<String>,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::data("datasets need at least one feature"));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::DimensionMismatch(format!(
                "{} feature values for {} rows of {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if classes == 0 {
            return Err(Error::data("class count must be positive"));
        }
        for (i, x) in features.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::data(format!(
                    "feature value at row {}, column {} is not finite",
                    i / n_features,
                    i % n_features
                )));
            }
        }
        for (i, &y) in labels.iter().enumerate() {
            if y >= classes {
                return Err(Error::data(format!(
                    "label {y} at row {i} out of range for {classes} classes"
                )));
            }
        }
        Ok(Dataset {
            features,
            n_features,
            labels,
            classes,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// A new dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::invalid(format!(
                    "row index {i} out of range for {} rows",
                    self.len()
                )));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Ok(Dataset {
            features,
            n_features: self.n_features,
            labels,
            classes: self.classes,
            source: self.source.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_rows() {
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2, vec![0, 1], 2, "t").is_err());
    }

    #[test]
    fn rejects_out_of_range_labels() {
        assert!(Dataset::new(vec![1.0, 2.0], 1, vec![0, 2], 2, "t").is_err());
    }

    #[test]
    fn rejects_non_finite_features() {
        assert!(Dataset::new(vec![1.0, f64::NAN], 1, vec![0, 1], 2, "t").is_err());
    }

    #[test]
    fn row_access() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 2, vec![0, 1], 2, "t").unwrap();
        assert_eq!(d.row(0), &[1.0, 2.0]);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.label(1), 1);
    }

    #[test]
    fn select_reorders_rows() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0], 1, vec![0, 1, 0], 2, "t").unwrap();
        let s = d.select(&[2, 0]).unwrap();
        assert_eq!(s.row(0), &[3.0]);
        assert_eq!(s.row(1), &[1.0]);
        assert_eq!(s.labels(), &[0, 0]);
    }
}
