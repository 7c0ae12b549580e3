use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HIGH_QUALITY_MIN: f64 = 3.0;

/// Confusion counts with the low-quality class (score below 3) as positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl EvalCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// `None` when there are no low-quality labels.
    pub fn low_quality_recall(&self) -> Option<f64> {
        let positives = self.tp + self.fn_;
        (positives > 0).then(|| self.tp as f64 / positives as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub counts: EvalCounts,
    pub accuracy: f64,
    pub low_quality_recall: Option<f64>,
}

/// Binarizes predicted and gold scores at 3 and scores the predictions.
pub fn classifier_eval(predictions: &[f64], labels: &[f64]) -> Result<EvalReport> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("nothing to evaluate".into()));
    }
    let mut c = EvalCounts::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        for s in [p, l] {
            if !(0.0..=5.0).contains(&s) {
                return Err(Error::InvalidArgument(format!(
                    "score {s} is outside [0, 5]"
                )));
            }
        }
        match (p < HIGH_QUALITY_MIN, l < HIGH_QUALITY_MIN) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(EvalReport {
        counts: c,
        accuracy: c.accuracy(),
        low_quality_recall: c.low_quality_recall(),
    })
}
