use crate::error::{Error, Result};

/// Tolerance on `Σ probs = 1`.
pub const SUM_TOL: f64 = 1e-6;

/// Classification margin: the true-class probability minus the largest
/// other-class probability. Positive iff the node is classified
/// correctly.
pub fn margin(probs: &[f64], true_class: usize) -> Result<f64> {
    if probs.len() < 2 {
        return Err(Error::InvalidProbabilities(format!(
            "need at least 2 classes, got {}",
            probs.len()
        )));
    }
    if true_class >= probs.len() {
        return Err(Error::InvalidProbabilities(format!(
            "class {true_class} out of range for {} classes",
            probs.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidProbabilities(format!("entry {p} outside [0, 1]")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidProbabilities(format!("entries sum to {total}")));
    }
    let runner_up = probs
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != true_class)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(probs[true_class] - runner_up)
}
