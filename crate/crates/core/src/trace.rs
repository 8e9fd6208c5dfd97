//! Run traces, split into what the malicious agent can observe and the
//! oracle-only ground truth kept for test harnesses.
//!
//! The visible CSV has header `k,agent,coord,value,u,alpha`; the oracle CSV
//! has `k,agent,coord,d,chi,r,omega`. Agent ids in both files are one-based.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One time step as seen by the malicious agent.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibleStep {
    pub k: usize,
    /// Estimates `x_i(k)`, one row per observed agent.
    pub estimates: DMatrix<f64>,
    /// Value `u(k)` injected at this step (absent on the final record).
    pub input: Option<DVector<f64>>,
    /// Common stepsize applied at this step, when the algorithm has one.
    pub alpha: Option<f64>,
}

/// The adversary-visible part of a trace. Carries no schedules, counters or
/// subgradients.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibleTrace {
    /// One-based ids of the agents whose estimates are recorded.
    pub agents: Vec<usize>,
    pub dim: usize,
    pub steps: Vec<VisibleStep>,
}

impl VisibleTrace {
    pub fn horizon(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// `x(k)` restricted to one coordinate.
    pub fn state(&self, k: usize, coord: usize) -> DVector<f64> {
        self.steps[k].estimates.column(coord).into_owned()
    }

    pub fn input(&self, k: usize, coord: usize) -> Option<f64> {
        self.steps[k].input.as_ref().map(|u| u[coord])
    }
}

/// Ground truth for one time step. Never handed to adversary code.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleStep {
    pub k: usize,
    /// Subgradients `d_i(k)` evaluated at `x_i(k)`.
    pub subgradients: Option<DMatrix<f64>>,
    /// Whether each agent made an optimization update at `k`.
    pub update_flags: Option<Vec<bool>>,
    /// Cumulative update counts `r_i(k)` including step `k`.
    pub counters: Option<Vec<usize>>,
    /// `x_i(k+1)` minus the weighted average agent `i` formed at `k`.
    pub omega: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleTrace {
    pub steps: Vec<OracleStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub visible: VisibleTrace,
    pub oracle: OracleTrace,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.visible.horizon()
    }

    pub fn estimates(&self, k: usize) -> &DMatrix<f64> {
        &self.visible.steps[k].estimates
    }

    /// `epsilon(k) = alpha_k d(k)` for synchronous traces.
    pub fn perturbation(&self, k: usize) -> Option<DMatrix<f64>> {
        let alpha = self.visible.steps.get(k)?.alpha?;
        let d = self.oracle.steps.get(k)?.subgradients.as_ref()?;
        Some(d * alpha)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_visible<W: Write>(trace: &VisibleTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "agent", "coord", "value", "u", "alpha"])?;
    for step in &trace.steps {
        for (row, agent) in trace.agents.iter().enumerate() {
            for c in 0..trace.dim {
                w.write_record([
                    step.k.to_string(),
                    agent.to_string(),
                    c.to_string(),
                    step.estimates[(row, c)].to_string(),
                    fmt_opt(step.input.as_ref().map(|u| u[c])),
                    fmt_opt(step.alpha),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_oracle<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "agent", "coord", "d", "chi", "r", "omega"])?;
    let agents = &trace.visible.agents;
    for step in &trace.oracle.steps {
        for (row, agent) in agents.iter().enumerate() {
            for c in 0..trace.visible.dim {
                w.write_record([
                    step.k.to_string(),
                    agent.to_string(),
                    c.to_string(),
                    fmt_opt(step.subgradients.as_ref().map(|d| d[(row, c)])),
                    step.update_flags.as_ref().map(|f| u8::from(f[row]).to_string()).unwrap_or_default(),
                    step.counters.as_ref().map(|r| r[row].to_string()).unwrap_or_default(),
                    fmt_opt(step.omega.as_ref().map(|o| o[(row, c)])),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
struct VisibleRow {
    k: usize,
    agent: usize,
    coord: usize,
    value: f64,
    u: Option<f64>,
    alpha: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct OracleRow {
    k: usize,
    agent: usize,
    coord: usize,
    d: Option<f64>,
    chi: Option<u8>,
    r: Option<usize>,
    omega: Option<f64>,
}

/// Groups rows by `k` and checks the agent/coordinate layout is rectangular.
fn layout<R>(rows: &[R], key: impl Fn(&R) -> (usize, usize, usize)) -> Result<(Vec<usize>, usize, usize)> {
    let Some(first) = rows.first() else {
        return Err(Error::domain("trace file has no rows"));
    };
    let k0 = key(first).0;
    let mut agents: Vec<usize> = Vec::new();
    let mut dim = 0;
    for r in rows.iter().take_while(|r| key(r).0 == k0) {
        let (_, a, c) = key(r);
        if agents.last() != Some(&a) {
            agents.push(a);
        }
        dim = dim.max(c + 1);
    }
    let per_step = agents.len() * dim;
    if per_step == 0 || !rows.len().is_multiple_of(per_step) {
        return Err(Error::domain("trace rows do not form complete time steps"));
    }
    let steps = rows.len() / per_step;
    for (idx, r) in rows.iter().enumerate() {
        let step = idx / per_step;
        let within = idx % per_step;
        let expected = (k0 + step, agents[within / dim], within % dim);
        if key(r) != expected {
            return Err(Error::domain(format!("unexpected row order at row {idx}: {:?} vs {expected:?}", key(r))));
        }
    }
    Ok((agents, dim, steps))
}

pub fn read_visible<R: Read>(input: R) -> Result<VisibleTrace> {
    let mut rd = csv::Reader::from_reader(input);
    let rows: Vec<VisibleRow> = rd.deserialize().collect::<std::result::Result<_, _>>()?;
    let (agents, dim, count) = layout(&rows, |r| (r.k, r.agent, r.coord))?;
    let per_step = agents.len() * dim;
    let steps = (0..count)
        .map(|s| {
            let chunk = &rows[s * per_step..(s + 1) * per_step];
            let estimates = DMatrix::from_row_iterator(agents.len(), dim, chunk.iter().map(|r| r.value));
            let input = if chunk[..dim].iter().all(|r| r.u.is_some()) {
                Some(DVector::from_iterator(dim, chunk[..dim].iter().map(|r| r.u.unwrap_or_default())))
            } else {
                None
            };
            VisibleStep { k: chunk[0].k, estimates, input, alpha: chunk[0].alpha }
        })
        .collect();
    Ok(VisibleTrace { agents, dim, steps })
}

pub fn read_oracle<R: Read>(input: R) -> Result<OracleTrace> {
    let mut rd = csv::Reader::from_reader(input);
    let rows: Vec<OracleRow> = rd.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Ok(OracleTrace::default());
    }
    let (agents, dim, count) = layout(&rows, |r| (r.k, r.agent, r.coord))?;
    let n = agents.len();
    let per_step = n * dim;
    let matrix = |chunk: &[OracleRow], f: &dyn Fn(&OracleRow) -> Option<f64>| -> Option<DMatrix<f64>> {
        let vals: Option<Vec<f64>> = chunk.iter().map(f).collect();
        vals.map(|v| DMatrix::from_row_slice(n, dim, &v))
    };
    let steps = (0..count)
        .map(|s| {
            let chunk = &rows[s * per_step..(s + 1) * per_step];
            let per_agent = |f: &dyn Fn(&OracleRow) -> Option<usize>| -> Option<Vec<usize>> {
                (0..n).map(|a| f(&chunk[a * dim])).collect()
            };
            OracleStep {
                k: chunk[0].k,
                subgradients: matrix(chunk, &|r| r.d),
                update_flags: per_agent(&|r| r.chi.map(usize::from)).map(|v| v.into_iter().map(|x| x != 0).collect()),
                counters: per_agent(&|r| r.r),
                omega: matrix(chunk, &|r| r.omega),
            }
        })
        .collect();
    Ok(OracleTrace { steps })
}
