use serde::Serialize;

use crate::analytic::Verdict;

/// One experiment row: parameters, empirical average, analytic prediction,
/// and the hypothesis verdicts. Everything needed to reproduce the
/// run is echoed back.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub a_bound: u64,
    pub b_bound: u64,
    pub r: Option<i64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub x: f64,
    /// Curves actually summed after exclusions.
    pub family_size: u64,
    pub singular_skipped: u64,
    pub zero_ab_skipped: u64,
    pub cm_skipped: u64,
    pub empirical: f64,
    pub predicted: f64,
    /// empirical / predicted; NaN when predicted = 0.
    pub ratio: f64,
    pub verdicts: Vec<Verdict>,
    pub warning: Option<String>,
}

impl ExperimentReport {
    pub fn verdict_summary(&self) -> String {
        self.verdicts
            .iter()
            .map(|v| format!("{}={}", v.name, v.pass))
            .collect::<Vec<_>>()
            .join(";")
    }
}
