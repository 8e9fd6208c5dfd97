//! The malicious agent's attack: probe inputs, windowed least-squares
//! recovery of `(A, b)` and subgradient extraction.
//!
//! Every function here consumes only a [`VisibleTrace`] (the estimates the
//! malicious agent receives plus its own inputs). Ground truth enters only
//! through [`RecoveryReport::build`], which test harnesses call.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::right_least_squares;
use crate::model::AdjacencyPartition;
use crate::sync::StepsizeSchedule;
use crate::trace::{OracleTrace, VisibleTrace};

/// Relative singular-value threshold below which a data matrix is singular.
pub const RECOVERY_TOLERANCE: f64 = 1e-10;

/// Number of trailing time steps summarized separately in error reports.
pub const LATE_WINDOW: usize = 50;

/// Windowed probe: in every window of length `2n - 1` the malicious agent
/// sends `n - 1` zeros followed by `n` ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeSchedule {
    pub n: usize,
    pub windows: usize,
}

impl ProbeSchedule {
    pub fn new(n: usize, windows: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("probe needs n >= 2, got {n}")));
        }
        if windows == 0 {
            return Err(Error::domain("probe needs at least one window"));
        }
        Ok(Self { n, windows })
    }

    pub fn window_len(&self) -> usize {
        2 * self.n - 1
    }

    /// Global time `s_{r,k} = r (2n - 1) + k`.
    pub fn time(&self, r: usize, k: usize) -> usize {
        r * self.window_len() + k
    }

    /// Steps needed to observe every window completely.
    pub fn horizon(&self) -> usize {
        self.windows * self.window_len()
    }

    pub fn sequence(&self) -> Vec<f64> {
        let one = probe_pattern(self.n);
        (0..self.windows).flat_map(|_| one.iter().copied()).collect()
    }
}

fn probe_pattern(n: usize) -> Vec<f64> {
    (0..2 * n - 1).map(|k| if k < n - 1 { 0.0 } else { 1.0 }).collect()
}

/// `u(0) = ... = u(n-2) = 0`, `u(n-1) = ... = u(2n-2) = 1`.
pub fn probe_sequence(n: usize) -> Result<Vec<f64>> {
    Ok(ProbeSchedule::new(n, 1)?.sequence())
}

pub fn windowed_probe(n: usize, windows: usize) -> Result<Vec<f64>> {
    Ok(ProbeSchedule::new(n, windows)?.sequence())
}

/// Builds `Y` (`n x 2n`) and `Z` (`(n-1) x 2n`) from the `2n` consecutive
/// states `x(s), ..., x(s + 2n - 1)` and the `2n - 1` inputs
/// `u(s), ..., u(s + 2n - 2)`, so that `Z = (A, b) Y` for consensus data.
pub fn assemble_yz(states: &[DVector<f64>], inputs: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let Some(first) = states.first() else {
        return Err(Error::domain("no states in window"));
    };
    let regular = first.len();
    let n = regular + 1;
    if states.len() < 2 * n || inputs.len() < 2 * n - 1 {
        return Err(Error::domain(format!(
            "window needs {} states and {} inputs, got {} and {}",
            2 * n,
            2 * n - 1,
            states.len(),
            inputs.len()
        )));
    }
    if states.iter().any(|s| s.len() != regular) {
        return Err(Error::domain("states in window have inconsistent length"));
    }
    let mut y = DMatrix::zeros(n, 2 * n);
    let mut z = DMatrix::zeros(regular, 2 * n);
    y.column_mut(0).fill(1.0);
    z.column_mut(0).fill(1.0);
    for j in 0..2 * n - 1 {
        y.view_mut((0, j + 1), (regular, 1)).copy_from(&states[j]);
        y[(regular, j + 1)] = inputs[j];
        z.set_column(j + 1, &states[j + 1]);
    }
    Ok((y, z))
}

/// `(Y, Z)` for the window starting at `start`, restricted to one coordinate.
pub fn window_data(visible: &VisibleTrace, coord: usize, start: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = visible.agents.len() + 1;
    if start + 2 * n - 1 > visible.horizon() {
        return Err(Error::domain(format!("trace too short for a window starting at {start}")));
    }
    let states: Vec<DVector<f64>> = (start..start + 2 * n).map(|k| visible.state(k, coord)).collect();
    let inputs: Vec<f64> = (start..start + 2 * n - 1)
        .map(|k| visible.input(k, coord).ok_or_else(|| Error::domain(format!("no input recorded at k = {k}"))))
        .collect::<Result<_>>()?;
    assemble_yz(&states, &inputs)
}

/// An estimate of `(A, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Smallest over largest singular value of the data matrix.
    pub conditioning: f64,
}

impl Recovery {
    fn from_stacked(stacked: &DMatrix<f64>, conditioning: f64) -> Self {
        let k = stacked.nrows();
        Self { a: stacked.columns(0, k).into_owned(), b: stacked.column(k).into_owned(), conditioning }
    }

    pub fn stacked(&self) -> DMatrix<f64> {
        let k = self.b.len();
        let mut out = DMatrix::zeros(k, k + 1);
        out.view_mut((0, 0), (k, k)).copy_from(&self.a);
        out.set_column(k, &self.b);
        out
    }

    /// Frobenius distance to the true pair.
    pub fn frobenius_error(&self, truth: &AdjacencyPartition) -> f64 {
        (self.stacked() - truth.stacked()).norm()
    }
}

/// Least-squares `(A, b) = Z Y' (Y Y')^{-1}`, via QR of `Y'`.
pub fn recover_adjacency(y: &DMatrix<f64>, z: &DMatrix<f64>, tol: f64) -> Result<Recovery> {
    if y.nrows() != z.nrows() + 1 {
        return Err(Error::domain("Y must have one more row than Z"));
    }
    let (stacked, cond) = right_least_squares(y, z, tol)?;
    Ok(Recovery::from_stacked(&stacked, cond))
}

/// Recovery that also fits a window-constant subgradient term: the data are
/// modelled as `Z = (A, b, -d) [Y; alpha]`, where the extra row carries the
/// stepsize applied at each column (zero on the row-sum column).
pub fn recover_with_drift(
    y: &DMatrix<f64>,
    z: &DMatrix<f64>,
    alphas: &[f64],
    tol: f64,
) -> Result<(Recovery, DVector<f64>)> {
    if alphas.len() + 1 != y.ncols() {
        return Err(Error::domain("need one stepsize per data column after the first"));
    }
    let rows = y.nrows();
    let mut aug = DMatrix::zeros(rows + 1, y.ncols());
    aug.view_mut((0, 0), (rows, y.ncols())).copy_from(y);
    for (j, a) in alphas.iter().enumerate() {
        aug[(rows, j + 1)] = *a;
    }
    let (sol, cond) = right_least_squares(&aug, z, tol)?;
    let k = z.nrows();
    let rec = Recovery::from_stacked(&sol.columns(0, k + 1).into_owned(), cond);
    let drift = -sol.column(k + 1).into_owned();
    Ok((rec, drift))
}

/// Combines per-coordinate recoveries, weighting each by its conditioning.
fn combine(parts: &[Recovery]) -> Option<Recovery> {
    let total: f64 = parts.iter().map(|p| p.conditioning).sum();
    let first = parts.first()?;
    if parts.len() == 1 {
        return Some(first.clone());
    }
    let mut stacked = DMatrix::zeros(first.b.len(), first.b.len() + 1);
    for p in parts {
        stacked += p.stacked() * (p.conditioning / total);
    }
    let cond = parts.iter().map(|p| p.conditioning).fold(0.0, f64::max);
    Some(Recovery::from_stacked(&stacked, cond))
}

/// Recovers `(A, b)` from consensus data under the single-window probe
/// starting at `k = 0`.
pub fn attack_consensus(visible: &VisibleTrace, tol: f64) -> Result<Recovery> {
    let parts = (0..visible.dim)
        .map(|c| {
            let (y, z) = window_data(visible, c, 0)?;
            recover_adjacency(&y, &z, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&parts).expect("at least one coordinate"))
}

/// `d_hat(k) = (A x(k) + b u(k) - x(k+1)) / alpha_k` for every `k` with a
/// recorded input.
pub fn extract_subgradients(
    visible: &VisibleTrace,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    stepsize: &StepsizeSchedule,
) -> Result<Vec<DMatrix<f64>>> {
    let agents = visible.agents.len();
    if a.nrows() != agents || b.len() != agents {
        return Err(Error::domain("estimate size differs from the number of observed agents"));
    }
    (0..visible.horizon())
        .map(|k| {
            let step = &visible.steps[k];
            let u = step.input.as_ref().ok_or_else(|| Error::domain(format!("no input recorded at k = {k}")))?;
            let alpha = stepsize.alpha(k)?;
            let next = &visible.steps[k + 1].estimates;
            let pred = a * &step.estimates + b * u.transpose();
            Ok((pred - next) / alpha)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate {
    pub index: usize,
    pub start: usize,
    pub recovery: Option<Recovery>,
    pub conditioning: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Extraction {
    /// Final window refit with the window-constant subgradient term.
    DriftAugmented {
        window: usize,
    },
    /// Final window's plain least-squares estimate.
    Plain {
        window: usize,
    },
    None,
}

/// Everything the adversary computes from a visible trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    pub probe: ProbeSchedule,
    pub windows: Vec<WindowEstimate>,
    pub extraction: Extraction,
    pub estimate: Option<Recovery>,
    /// `d_hat(k)` for `k = 0 .. K-1`, one row per observed agent.
    pub subgradients: Vec<DMatrix<f64>>,
}

fn check_probe(visible: &VisibleTrace, probe: &ProbeSchedule) -> Result<()> {
    if visible.agents.len() + 1 != probe.n {
        return Err(Error::domain(format!(
            "probe is for n = {} but the trace observes {} regular agents",
            probe.n,
            visible.agents.len()
        )));
    }
    if visible.horizon() < probe.horizon() {
        return Err(Error::domain(format!(
            "trace horizon {} shorter than the probe's {}",
            visible.horizon(),
            probe.horizon()
        )));
    }
    let seq = probe.sequence();
    for (k, &u) in seq.iter().enumerate() {
        for c in 0..visible.dim {
            if visible.input(k, c) != Some(u) {
                return Err(Error::domain(format!("recorded input at k = {k} does not follow the probe")));
            }
        }
    }
    Ok(())
}

/// The full pipeline: per-window recovery, then subgradient extraction with
/// the last usable window. Windows whose data are singular are skipped.
fn run_attack(visible: &VisibleTrace, probe: &ProbeSchedule, stepsize: &StepsizeSchedule) -> Result<AttackOutcome> {
    check_probe(visible, probe)?;
    stepsize.validate()?;
    let mut windows = Vec::with_capacity(probe.windows);
    for r in 0..probe.windows {
        let start = probe.time(r, 0);
        let mut parts = Vec::with_capacity(visible.dim);
        let mut best_cond: f64 = 0.0;
        for c in 0..visible.dim {
            let (y, z) = window_data(visible, c, start)?;
            match recover_adjacency(&y, &z, RECOVERY_TOLERANCE) {
                Ok(rec) => {
                    best_cond = best_cond.max(rec.conditioning);
                    parts.push(rec);
                }
                Err(Error::SingularData { conditioning, .. }) => best_cond = best_cond.max(conditioning),
                Err(e) => return Err(e),
            }
        }
        windows.push(WindowEstimate { index: r, start, recovery: combine(&parts), conditioning: best_cond });
    }

    let Some(last) = windows.iter().rev().find(|w| w.recovery.is_some()) else {
        return Ok(AttackOutcome {
            probe: *probe,
            windows,
            extraction: Extraction::None,
            estimate: None,
            subgradients: Vec::new(),
        });
    };
    let alphas: Vec<f64> =
        (last.start..last.start + probe.window_len()).map(|k| stepsize.alpha(k)).collect::<Result<_>>()?;
    let mut drift_parts = Vec::with_capacity(visible.dim);
    for c in 0..visible.dim {
        let (y, z) = window_data(visible, c, last.start)?;
        match recover_with_drift(&y, &z, &alphas, RECOVERY_TOLERANCE) {
            Ok((rec, _)) => drift_parts.push(rec),
            Err(Error::SingularData { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let (extraction, estimate) = match combine(&drift_parts) {
        Some(rec) => (Extraction::DriftAugmented { window: last.index }, rec),
        None => (Extraction::Plain { window: last.index }, last.recovery.clone().expect("window has a recovery")),
    };
    let subgradients = extract_subgradients(visible, &estimate.a, &estimate.b, stepsize)?;
    Ok(AttackOutcome { probe: *probe, windows, extraction, estimate: Some(estimate), subgradients })
}

/// Attack on a synchronous trace. The adversary is granted the stepsize
/// schedule, which must be diminishing.
pub fn attack_dssoa(
    visible: &VisibleTrace,
    probe: &ProbeSchedule,
    stepsize: &StepsizeSchedule,
) -> Result<AttackOutcome> {
    if matches!(stepsize, StepsizeSchedule::Constant { .. }) {
        return Err(Error::config("the asymptotic attack needs a diminishing stepsize"));
    }
    run_attack(visible, probe, stepsize)
}

/// The same pipeline against an asynchronous trace, with the stepsize the
/// adversary assumes (it cannot observe the agents' private counters).
pub fn attack_async(
    visible: &VisibleTrace,
    probe: &ProbeSchedule,
    assumed: &StepsizeSchedule,
) -> Result<AttackOutcome> {
    run_attack(visible, probe, assumed)
}

/// Harness-side ground truth for scoring an attack.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub partition: AdjacencyPartition,
    /// True `d_i(k)` for `k = 0 .. K-1`.
    pub subgradients: Vec<DMatrix<f64>>,
}

impl GroundTruth {
    pub fn from_oracle(partition: AdjacencyPartition, oracle: &OracleTrace) -> Self {
        let subgradients = oracle.steps.iter().map_while(|s| s.subgradients.clone()).collect();
        Self { partition, subgradients }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub index: usize,
    pub start: usize,
    pub conditioning: f64,
    pub skipped: bool,
    pub frobenius_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorQuantiles {
    pub count: usize,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
    pub late_steps: usize,
    pub late_median: f64,
    pub late_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryVerdict {
    Recovered,
    /// Some windows were singular and skipped.
    PartiallyRecovered,
    IllConditioned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub conditioning: f64,
    pub frobenius_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub verdict: RecoveryVerdict,
    pub n: usize,
    pub windows: Vec<WindowReport>,
    pub extraction: Extraction,
    pub estimate: Option<EstimateReport>,
    pub subgradient_errors: Option<ErrorQuantiles>,
    /// `d_hat(k)` flattened row-major (agent, coordinate) per time step.
    pub subgradient_series: Vec<Vec<f64>>,
    /// Largest absolute estimate error per time step.
    pub error_series: Option<Vec<f64>>,
}

/// Absolute errors `|d_hat - d|` over all agents and coordinates for the
/// time steps in `range`.
pub fn subgradient_errors(est: &[DMatrix<f64>], truth: &[DMatrix<f64>], range: std::ops::Range<usize>) -> Vec<f64> {
    range
        .filter(|&k| k < est.len() && k < truth.len())
        .flat_map(|k| (&est[k] - &truth[k]).iter().map(|e| e.abs()).collect::<Vec<_>>())
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Nearest-rank quantile on a sorted copy (`NaN` for empty input).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    if q == 0.5 && v.len().is_multiple_of(2) {
        let mid = v.len() / 2;
        return 0.5 * (v[mid - 1] + v[mid]);
    }
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl RecoveryReport {
    pub fn build(outcome: &AttackOutcome, truth: Option<&GroundTruth>) -> Self {
        let windows: Vec<WindowReport> = outcome
            .windows
            .iter()
            .map(|w| WindowReport {
                index: w.index,
                start: w.start,
                conditioning: w.conditioning,
                skipped: w.recovery.is_none(),
                frobenius_error: w.recovery.as_ref().zip(truth).map(|(rec, t)| rec.frobenius_error(&t.partition)),
            })
            .collect();
        let skipped = windows.iter().filter(|w| w.skipped).count();
        let verdict = if skipped == windows.len() {
            RecoveryVerdict::IllConditioned
        } else if skipped > 0 {
            RecoveryVerdict::PartiallyRecovered
        } else {
            RecoveryVerdict::Recovered
        };
        let estimate = outcome.estimate.as_ref().map(|rec| EstimateReport {
            a: to_rows(&rec.a),
            b: rec.b.iter().copied().collect(),
            conditioning: rec.conditioning,
            frobenius_error: truth.map(|t| rec.frobenius_error(&t.partition)),
        });
        let subgradient_errors = truth.filter(|_| !outcome.subgradients.is_empty()).map(|t| {
            let len = outcome.subgradients.len().min(t.subgradients.len());
            let all = subgradient_errors(&outcome.subgradients, &t.subgradients, 0..len);
            let late_start = len.saturating_sub(LATE_WINDOW);
            let late = subgradient_errors(&outcome.subgradients, &t.subgradients, late_start..len);
            ErrorQuantiles {
                count: all.len(),
                median: median(&all),
                p90: quantile(&all, 0.9),
                max: all.iter().copied().fold(0.0, f64::max),
                late_steps: len - late_start,
                late_median: median(&late),
                late_max: late.iter().copied().fold(0.0, f64::max),
            }
        });
        let subgradient_series = outcome.subgradients.iter().map(|d| d.transpose().iter().copied().collect()).collect();
        let error_series = truth
            .filter(|_| !outcome.subgradients.is_empty())
            .map(|t| outcome.subgradients.iter().zip(&t.subgradients).map(|(e, d)| (e - d).amax()).collect());
        RecoveryReport {
            verdict,
            n: outcome.probe.n,
            windows,
            extraction: outcome.extraction,
            estimate,
            subgradient_errors,
            subgradient_series,
            error_series,
        }
    }
}
