//! Consensus and optimality diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::max_row_sum;
use crate::objectives::{sum_value, ObjectiveSpec};
use crate::trace::Trace;

/// `h = max_{i,j} |x_i - x_j|` over the rows of `estimates`.
pub fn disagreement(estimates: &DMatrix<f64>) -> f64 {
    let n = estimates.nrows();
    let mut h: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            h = h.max((estimates.row(i) - estimates.row(j)).norm());
        }
    }
    h
}

/// Row average `x_bar`.
pub fn average(estimates: &DMatrix<f64>) -> DVector<f64> {
    estimates.row_mean().transpose()
}

/// `sum_i f_i(x_bar) - f*`, clipped below at `-1e-12`.
pub fn optimality_gap(estimates: &DMatrix<f64>, specs: &[ObjectiveSpec], f_star: f64) -> Result<f64> {
    let gap = sum_value(specs, &average(estimates))? - f_star;
    Ok(gap.max(-1e-12))
}

/// `||x(0)||_inf + (u* + alpha* L) / (1 - ||A||_inf)`.
pub fn lemma1_bound(x0: &DMatrix<f64>, u_star: f64, alpha_star: f64, l: f64, a: &DMatrix<f64>) -> Result<f64> {
    let norm_a = max_row_sum(a);
    if norm_a >= 1.0 {
        return Err(Error::BoundInapplicable(norm_a));
    }
    Ok(x0.amax() + (u_star + alpha_star * l) / (1.0 - norm_a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub disagreement: Vec<f64>,
    pub average: Vec<Vec<f64>>,
    pub gap: Vec<f64>,
    pub max_abs_estimate: f64,
    pub lemma1_bound: Option<f64>,
    pub final_disagreement: f64,
    pub final_gap: f64,
    /// Largest distance from any final estimate to the reference minimizer.
    pub final_max_distance: f64,
}

/// Scans a trace against the reference solution `(x*, f*)`.
pub fn summarize(
    trace: &Trace,
    specs: &[ObjectiveSpec],
    x_star: &DVector<f64>,
    f_star: f64,
    lemma1: Option<f64>,
) -> Result<RunSummary> {
    let mut h = Vec::with_capacity(trace.visible.steps.len());
    let mut avg = Vec::with_capacity(trace.visible.steps.len());
    let mut gap = Vec::with_capacity(trace.visible.steps.len());
    let mut max_abs: f64 = 0.0;
    for step in &trace.visible.steps {
        h.push(disagreement(&step.estimates));
        avg.push(average(&step.estimates).iter().copied().collect());
        gap.push(optimality_gap(&step.estimates, specs, f_star)?);
        max_abs = max_abs.max(step.estimates.amax());
    }
    let last = &trace.visible.steps.last().ok_or_else(|| Error::domain("empty trace"))?.estimates;
    let final_max_distance = last.row_iter().map(|r| (r.transpose() - x_star).norm()).fold(0.0, f64::max);
    Ok(RunSummary {
        final_disagreement: *h.last().unwrap_or(&0.0),
        final_gap: *gap.last().unwrap_or(&0.0),
        disagreement: h,
        average: avg,
        gap,
        max_abs_estimate: max_abs,
        lemma1_bound: lemma1,
        final_max_distance,
    })
}
