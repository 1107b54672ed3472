//! Per-class cost multipliers derived from class frequencies.
//!
//! The balanced weighting w_c = N / (K * n_c) gives every class the same
//! aggregate loss mass: summing w_c over the n_c samples of class c yields
//! N / K regardless of c, so sum_c w_c * n_c = N.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::types::ClassLabel;
use crate::error::{CoreError, Result};

/// Class frequencies: n_c per class, in canonical label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub counts: [usize; ClassLabel::COUNT],
}

impl ClassCounts {
    pub fn new(counts: [usize; ClassLabel::COUNT]) -> Self {
        ClassCounts { counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn from_labels(labels: &[ClassLabel]) -> Self {
        let mut counts = [0usize; ClassLabel::COUNT];
        for &l in labels {
            counts[l.index()] += 1;
        }
        ClassCounts { counts }
    }
}

/// Per-class loss multipliers, in canonical label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub weights: [f64; ClassLabel::COUNT],
}

impl ClassWeights {
    pub fn uniform() -> Self {
        ClassWeights { weights: [1.0; ClassLabel::COUNT] }
    }

    pub fn get(&self, label: ClassLabel) -> f64 {
        self.weights[label.index()]
    }

    pub fn as_map(&self) -> BTreeMap<ClassLabel, f64> {
        ClassLabel::ALL
            .iter()
            .map(|&l| (l, self.weights[l.index()]))
            .collect()
    }
}

/// Computes balanced class weights w_c = N / (K * n_c).
///
/// A class at exactly the mean count gets weight 1; rarer classes get
/// proportionally larger weights. Errors if any count is zero.
pub fn compute_class_weights(counts: &ClassCounts) -> Result<ClassWeights> {
    compute_weights_generic(&counts.counts).map(|w| ClassWeights {
        weights: w.try_into().expect("fixed-size input"),
    })
}

/// The same formula for an arbitrary number of classes; used by tests and
/// by callers that weight non-standard label sets.
pub fn compute_weights_generic(counts: &[usize]) -> Result<Vec<f64>> {
    if counts.is_empty() {
        return Err(CoreError::InvalidArgument("weight computation needs at least one class".into()));
    }
    let k = counts.len() as f64;
    let n: usize = counts.iter().sum();
    let n = n as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if c == 0 {
                Err(CoreError::InvalidArgument(format!(
                    "class index {i} has zero samples; weights are undefined"
                )))
            } else {
                Ok(n / (k * c as f64))
            }
        })
        .collect()
}
