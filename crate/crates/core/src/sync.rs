//! Synchronous dynamics: plain consensus and the distributed subgradient
//! method where every agent steps with a common stepsize at every time.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{partition, AdjacencyMatrix, AdjacencyPartition};
use crate::objectives::{subgradient, ObjectiveSpec};
use crate::trace::{OracleStep, OracleTrace, Trace, VisibleStep, VisibleTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepsizeSchedule {
    Constant {
        alpha: f64,
    },
    /// `alpha0 / (k + 1)`.
    Harmonic {
        alpha0: f64,
    },
    Sequence {
        values: Vec<f64>,
    },
}

impl Default for StepsizeSchedule {
    fn default() -> Self {
        StepsizeSchedule::Harmonic { alpha0: 1.0 }
    }
}

impl StepsizeSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = |a: f64| a.is_finite() && a > 0.0;
        let valid = match self {
            StepsizeSchedule::Constant { alpha } => ok(*alpha),
            StepsizeSchedule::Harmonic { alpha0 } => ok(*alpha0),
            StepsizeSchedule::Sequence { values } => !values.is_empty() && values.iter().all(|&a| ok(a)),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::config("stepsizes must be finite and strictly positive"))
        }
    }

    pub fn alpha(&self, k: usize) -> Result<f64> {
        match self {
            StepsizeSchedule::Constant { alpha } => Ok(*alpha),
            StepsizeSchedule::Harmonic { alpha0 } => Ok(alpha0 / (k + 1) as f64),
            StepsizeSchedule::Sequence { values } => values
                .get(k)
                .copied()
                .ok_or_else(|| Error::config(format!("stepsize sequence has no entry for k = {k}"))),
        }
    }

    /// Upper bound `alpha*` on every stepsize.
    pub fn cap(&self) -> f64 {
        match self {
            StepsizeSchedule::Constant { alpha } => *alpha,
            StepsizeSchedule::Harmonic { alpha0 } => *alpha0,
            StepsizeSchedule::Sequence { values } => values.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Weights, objectives and initial estimates of all `n` agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub weights: AdjacencyMatrix,
    pub objectives: Vec<ObjectiveSpec>,
    /// `n x m`, one row per agent.
    pub initial: DMatrix<f64>,
}

impl Network {
    pub fn new(weights: AdjacencyMatrix, objectives: Vec<ObjectiveSpec>, initial: DMatrix<f64>) -> Result<Self> {
        let n = weights.n();
        if objectives.len() != n || initial.nrows() != n {
            return Err(Error::domain(format!(
                "network of {n} agents got {} objectives and {} initial estimates",
                objectives.len(),
                initial.nrows()
            )));
        }
        for o in &objectives {
            o.validate()?;
            if o.dim() != initial.ncols() {
                return Err(Error::domain("objective dimension differs from estimate dimension"));
            }
        }
        Ok(Self { weights, objectives, initial })
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn dim(&self) -> usize {
        self.initial.ncols()
    }

    /// Regular agents given an optional malicious index: (zero-based ids,
    /// objectives, initial estimates, mixing rule).
    pub(crate) fn active(&self, malicious: Option<usize>) -> Result<ActiveAgents> {
        match malicious {
            None => Ok(ActiveAgents {
                ids: (0..self.n()).collect(),
                objectives: self.objectives.clone(),
                initial: self.initial.clone(),
                mixing: Mixing::Full(self.weights.matrix().clone()),
            }),
            Some(idx) => {
                let p = partition(&self.weights, idx)?;
                let ids: Vec<usize> = (0..self.n()).filter(|&i| i != idx).collect();
                let objectives = ids.iter().map(|&i| self.objectives[i].clone()).collect();
                let initial = self.initial.select_rows(ids.iter());
                Ok(ActiveAgents { ids, objectives, initial, mixing: Mixing::Partitioned(p) })
            }
        }
    }
}

pub(crate) struct ActiveAgents {
    pub ids: Vec<usize>,
    pub objectives: Vec<ObjectiveSpec>,
    pub initial: DMatrix<f64>,
    pub mixing: Mixing,
}

/// Sequence `u(k)` transmitted by the malicious agent.
#[derive(Debug, Clone, PartialEq)]
pub struct MaliciousInput {
    /// Zero-based index of the malicious agent.
    pub index: usize,
    pub values: Vec<DVector<f64>>,
}

impl MaliciousInput {
    /// Broadcasts a scalar sequence to every coordinate.
    pub fn broadcast(index: usize, seq: &[f64], dim: usize) -> Self {
        Self { index, values: seq.iter().map(|&u| DVector::from_element(dim, u)).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }
}

/// How regular agents combine what they receive.
#[derive(Debug, Clone, PartialEq)]
pub enum Mixing {
    /// All agents are truthful: `x+ = W x`.
    Full(DMatrix<f64>),
    /// Malicious agent replaced by its input: `x+ = A x + b u`.
    Partitioned(AdjacencyPartition),
}

impl Mixing {
    /// Weighted averages `sum_j a_ij x_j (+ b_i u)`, row by row.
    ///
    /// Sums run in a fixed left-to-right order so scalar and matrix callers
    /// get bitwise identical results.
    pub fn apply(&self, x: &DMatrix<f64>, u: Option<&DVector<f64>>) -> Result<DMatrix<f64>> {
        let (w, b) = match self {
            Mixing::Full(w) => (w, None),
            Mixing::Partitioned(p) => (&p.a, Some(&p.b)),
        };
        if w.ncols() != x.nrows() {
            return Err(Error::domain(format!("weights act on {} agents but state has {}", w.ncols(), x.nrows())));
        }
        let u = match (b, u) {
            (Some(_), Some(u)) if u.len() == x.ncols() => Some(u),
            (Some(_), Some(_)) => return Err(Error::domain("input dimension differs from state dimension")),
            (Some(_), None) => return Err(Error::config("partitioned dynamics need a malicious input")),
            (None, Some(_)) => return Err(Error::config("input supplied but no agent is malicious")),
            (None, None) => None,
        };
        Ok(DMatrix::from_fn(w.nrows(), x.ncols(), |i, c| {
            let mut acc = 0.0;
            for j in 0..w.ncols() {
                acc += w[(i, j)] * x[(j, c)];
            }
            if let (Some(b), Some(u)) = (b, u) {
                acc += b[i] * u[c];
            }
            acc
        }))
    }

    pub fn agents(&self) -> usize {
        match self {
            Mixing::Full(w) => w.nrows(),
            Mixing::Partitioned(p) => p.regular_count(),
        }
    }
}

/// One consensus step `x(k+1) = A x(k) + b u(k)` for scalar states.
pub fn consensus_step(p: &AdjacencyPartition, x: &DVector<f64>, u: f64) -> Result<DVector<f64>> {
    if x.len() != p.regular_count() {
        return Err(Error::domain(format!("state has length {} but A is {}x{}", x.len(), p.a.nrows(), p.a.ncols())));
    }
    let next = Mixing::Partitioned(p.clone())
        .apply(&DMatrix::from_column_slice(x.len(), 1, x.as_slice()), Some(&DVector::from_element(1, u)))?;
    Ok(next.column(0).into_owned())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncStep {
    pub next: DMatrix<f64>,
    /// `d_i(k)` at `x_i(k)`, one row per agent.
    pub subgradients: DMatrix<f64>,
}

/// `x_i(k+1) = sum_j a_ij x_j(k) (+ b_i u(k)) - alpha_k d_i(k)`.
pub fn dssoa_step(
    mixing: &Mixing,
    x: &DMatrix<f64>,
    u: Option<&DVector<f64>>,
    alpha: f64,
    specs: &[ObjectiveSpec],
) -> Result<SyncStep> {
    if specs.len() != x.nrows() {
        return Err(Error::domain(format!("{} objectives for {} agents", specs.len(), x.nrows())));
    }
    let avg = mixing.apply(x, u)?;
    let mut d = DMatrix::zeros(x.nrows(), x.ncols());
    for (i, spec) in specs.iter().enumerate() {
        let row: DVector<f64> = x.row(i).transpose();
        d.set_row(i, &subgradient(spec, &row)?.transpose());
    }
    let next = DMatrix::from_fn(x.nrows(), x.ncols(), |i, c| avg[(i, c)] - alpha * d[(i, c)]);
    Ok(SyncStep { next, subgradients: d })
}

/// Runs the synchronous algorithm for `horizon` steps. Without a malicious
/// input all `n` agents are truthful; with one, the malicious agent's
/// estimate is replaced by `u(k)` and only regular agents are recorded.
pub fn run_sync(
    net: &Network,
    stepsize: &StepsizeSchedule,
    horizon: usize,
    malicious: Option<&MaliciousInput>,
) -> Result<Trace> {
    stepsize.validate()?;
    if let Some(m) = malicious {
        if m.values.len() < horizon {
            return Err(Error::config(format!(
                "malicious input has {} values but the horizon is {horizon}",
                m.values.len()
            )));
        }
    }
    let active = net.active(malicious.map(|m| m.index))?;
    let mut x = active.initial.clone();
    let mut visible = Vec::with_capacity(horizon + 1);
    let mut oracle = Vec::with_capacity(horizon + 1);
    for k in 0..horizon {
        let u = malicious.map(|m| &m.values[k]);
        let alpha = stepsize.alpha(k)?;
        let step = dssoa_step(&active.mixing, &x, u, alpha, &active.objectives)?;
        visible.push(VisibleStep { k, estimates: x, input: u.cloned(), alpha: Some(alpha) });
        oracle.push(OracleStep { k, subgradients: Some(step.subgradients), ..Default::default() });
        x = step.next;
    }
    visible.push(VisibleStep { k: horizon, estimates: x, input: None, alpha: None });
    oracle.push(OracleStep { k: horizon, ..Default::default() });
    Ok(Trace {
        visible: VisibleTrace { agents: active.ids.iter().map(|i| i + 1).collect(), dim: net.dim(), steps: visible },
        oracle: OracleTrace { steps: oracle },
    })
}
