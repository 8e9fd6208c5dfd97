//! The asynchronous projected subgradient algorithm.
//!
//! At time `k` every agent forms its weighted average. An agent whose private
//! schedule says `k` is its `r`-th update time subtracts `d_i(k) / r` before
//! projecting onto `X`; every other agent just projects the average. The
//! schedules and counters never leave the oracle part of the trace.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{subgradient, ObjectiveSpec};
use crate::projection::{project, ProjectionSet};
use crate::sync::{MaliciousInput, Mixing, Network};
use crate::trace::{OracleStep, OracleTrace, Trace, VisibleStep, VisibleTrace};

/// Update times `kappa_i(1) < kappa_i(2) < ...` of one agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UpdateSchedule {
    /// Updates at `offset, offset + period, offset + 2 period, ...`.
    Periodic {
        #[serde(default)]
        offset: usize,
        period: usize,
    },
    /// Strictly increasing list of update times.
    Explicit { times: Vec<usize> },
}

impl UpdateSchedule {
    pub fn periodic(period: usize) -> Self {
        UpdateSchedule::Periodic { offset: 0, period }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UpdateSchedule::Periodic { period, .. } if *period == 0 => {
                Err(Error::config("update period must be at least 1"))
            }
            UpdateSchedule::Explicit { times } if times.windows(2).any(|w| w[0] >= w[1]) => {
                Err(Error::config("explicit update times must be strictly increasing"))
            }
            _ => Ok(()),
        }
    }

    /// `Some(r)` when `k = kappa(r)`.
    pub fn update_index(&self, k: usize) -> Option<usize> {
        match self {
            UpdateSchedule::Periodic { offset, period } => {
                (k >= *offset && (k - offset).is_multiple_of(*period)).then(|| (k - offset) / period + 1)
            }
            UpdateSchedule::Explicit { times } => times.binary_search(&k).ok().map(|i| i + 1),
        }
    }

    /// Updates with `kappa(r)` in `[start, end)`.
    pub fn count_in(&self, start: usize, end: usize) -> usize {
        if end <= start {
            return 0;
        }
        match self {
            UpdateSchedule::Periodic { offset, period } => {
                let upto = |t: usize| if t <= *offset { 0 } else { (t - offset - 1) / period + 1 };
                upto(end) - upto(start)
            }
            UpdateSchedule::Explicit { times } => {
                times.partition_point(|&t| t < end) - times.partition_point(|&t| t < start)
            }
        }
    }
}

/// Flag and update index of agent `i` at time `k`.
pub fn is_update_time(schedules: &[UpdateSchedule], i: usize, k: usize) -> (bool, Option<usize>) {
    let r = schedules.get(i).and_then(|s| s.update_index(k));
    (r.is_some(), r)
}

/// Least common multiple of the periodic schedules (`None` if any schedule is explicit).
pub fn default_window(schedules: &[UpdateSchedule]) -> Option<usize> {
    schedules.iter().try_fold(1usize, |acc, s| match s {
        UpdateSchedule::Periodic { period, .. } if *period > 0 => Some(lcm(acc, *period)),
        _ => None,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Minimum number of windows checked for explicit schedules.
pub const MIN_VALIDATION_WINDOWS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption4Report {
    pub holds: bool,
    pub window: usize,
    /// Updates per window `t_i`, when constant.
    pub per_agent: Vec<Option<usize>>,
    /// Windows checked for explicit schedules; `None` when every schedule is
    /// periodic and the check is exact.
    pub validation_windows: Option<usize>,
    pub violations: Vec<String>,
}

/// Checks that every agent updates the same positive number of times in each
/// window `[rT, (r+1)T)`. Periodic rules are decided exactly; explicit lists
/// over `max(ceil(horizon / T), 20)` windows.
pub fn verify_assumption4(schedules: &[UpdateSchedule], window: usize, horizon: usize) -> Assumption4Report {
    let mut per_agent = Vec::with_capacity(schedules.len());
    let mut violations = Vec::new();
    let mut validation_windows = None;
    if window == 0 {
        return Assumption4Report {
            holds: false,
            window,
            per_agent: vec![None; schedules.len()],
            validation_windows,
            violations: vec!["window T must be at least 1".into()],
        };
    }
    for (i, s) in schedules.iter().enumerate() {
        if let Err(e) = s.validate() {
            violations.push(format!("agent {}: {e}", i + 1));
            per_agent.push(None);
            continue;
        }
        let t = match s {
            UpdateSchedule::Periodic { offset, period } => {
                if !window.is_multiple_of(*period) {
                    violations.push(format!("agent {}: period {period} does not divide T = {window}", i + 1));
                    None
                } else if offset >= period {
                    violations.push(format!("agent {}: offset {offset} leaves the first window short", i + 1));
                    None
                } else {
                    Some(window / period)
                }
            }
            UpdateSchedule::Explicit { .. } => {
                let windows = horizon.div_ceil(window).max(MIN_VALIDATION_WINDOWS);
                validation_windows = Some(validation_windows.unwrap_or(0).max(windows));
                let counts: Vec<usize> = (0..windows).map(|r| s.count_in(r * window, (r + 1) * window)).collect();
                if counts[0] == 0 || counts.iter().any(|&c| c != counts[0]) {
                    let bad = counts.iter().position(|&c| c != counts[0] || c == 0).unwrap_or(0);
                    violations.push(format!(
                        "agent {}: window {bad} has {} updates, window 0 has {}",
                        i + 1,
                        counts[bad],
                        counts[0]
                    ));
                    None
                } else {
                    Some(counts[0])
                }
            }
        };
        per_agent.push(t);
    }
    Assumption4Report { holds: violations.is_empty(), window, per_agent, validation_windows, violations }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsyncConfig {
    /// One schedule per agent of the network (the malicious agent's is ignored).
    pub schedules: Vec<UpdateSchedule>,
    /// Window length `T` of the update-count condition.
    pub window: usize,
    pub set: ProjectionSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsyncState {
    pub k: usize,
    pub estimates: DMatrix<f64>,
    /// Updates made so far by each agent.
    pub counters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsyncStep {
    pub state: AsyncState,
    pub subgradients: DMatrix<f64>,
    pub update_flags: Vec<bool>,
    pub omega: DMatrix<f64>,
}

fn project_rows(set: &ProjectionSet, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = x.clone();
    for i in 0..x.nrows() {
        let row: DVector<f64> = x.row(i).transpose();
        out.set_row(i, &project(set, &row)?.transpose());
    }
    Ok(out)
}

/// One step of the asynchronous projected algorithm. `schedules` and `specs`
/// are indexed like the rows of `state.estimates`.
pub fn async_step(
    mixing: &Mixing,
    state: &AsyncState,
    schedules: &[UpdateSchedule],
    specs: &[ObjectiveSpec],
    set: &ProjectionSet,
    u: Option<&DVector<f64>>,
) -> Result<AsyncStep> {
    let agents = state.estimates.nrows();
    if schedules.len() != agents || specs.len() != agents || state.counters.len() != agents {
        return Err(Error::config(format!(
            "{agents} agents but {} schedules, {} objectives and {} counters",
            schedules.len(),
            specs.len(),
            state.counters.len()
        )));
    }
    let avg = mixing.apply(&state.estimates, u)?;
    let m = state.estimates.ncols();
    let mut next = DMatrix::zeros(agents, m);
    let mut d = DMatrix::zeros(agents, m);
    let mut flags = vec![false; agents];
    let mut counters = state.counters.clone();
    for i in 0..agents {
        let xi: DVector<f64> = state.estimates.row(i).transpose();
        let di = subgradient(&specs[i], &xi)?;
        let ai: DVector<f64> = avg.row(i).transpose();
        let target = match schedules[i].update_index(state.k) {
            Some(r) => {
                flags[i] = true;
                counters[i] += 1;
                debug_assert_eq!(counters[i], r);
                let step = 1.0 / r as f64;
                DVector::from_fn(m, |c, _| ai[c] - step * di[c])
            }
            None => ai,
        };
        next.set_row(i, &project(set, &target)?.transpose());
        d.set_row(i, &di.transpose());
    }
    let omega = &next - &avg;
    Ok(AsyncStep {
        state: AsyncState { k: state.k + 1, estimates: next, counters },
        subgradients: d,
        update_flags: flags,
        omega,
    })
}

/// Runs the asynchronous algorithm. Refuses to start when the update-count condition
/// fails for the agents that actually run it.
pub fn run_async(
    net: &Network,
    config: &AsyncConfig,
    horizon: usize,
    malicious: Option<&MaliciousInput>,
) -> Result<Trace> {
    config.set.validate()?;
    if config.set.dim() != net.dim() {
        return Err(Error::config("projection set dimension differs from the estimates"));
    }
    if config.schedules.len() != net.n() {
        return Err(Error::config(format!("{} schedules for a network of {} agents", config.schedules.len(), net.n())));
    }
    if let Some(m) = malicious {
        if m.values.len() < horizon {
            return Err(Error::config(format!(
                "malicious input has {} values but the horizon is {horizon}",
                m.values.len()
            )));
        }
    }
    let active = net.active(malicious.map(|m| m.index))?;
    let schedules: Vec<UpdateSchedule> = active.ids.iter().map(|&i| config.schedules[i].clone()).collect();
    let report = verify_assumption4(&schedules, config.window, horizon);
    if !report.holds {
        return Err(Error::Assumption4(report.violations.join("; ")));
    }

    let mut state = AsyncState {
        k: 0,
        estimates: project_rows(&config.set, &active.initial)?,
        counters: vec![0; active.ids.len()],
    };
    let mut visible = Vec::with_capacity(horizon + 1);
    let mut oracle = Vec::with_capacity(horizon + 1);
    for k in 0..horizon {
        let u = malicious.map(|m| &m.values[k]);
        let step = async_step(&active.mixing, &state, &schedules, &active.objectives, &config.set, u)?;
        visible.push(VisibleStep { k, estimates: state.estimates, input: u.cloned(), alpha: None });
        oracle.push(OracleStep {
            k,
            subgradients: Some(step.subgradients),
            update_flags: Some(step.update_flags),
            counters: Some(step.state.counters.clone()),
            omega: Some(step.omega),
        });
        state = step.state;
    }
    visible.push(VisibleStep { k: horizon, estimates: state.estimates, input: None, alpha: None });
    oracle.push(OracleStep { k: horizon, ..Default::default() });
    Ok(Trace {
        visible: VisibleTrace { agents: active.ids.iter().map(|i| i + 1).collect(), dim: net.dim(), steps: visible },
        oracle: OracleTrace { steps: oracle },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_metropolis_weights, AdjacencyPartition, NetworkGraph};
    use crate::projection::contains;

    #[test]
    fn update_time_examples() {
        let s = vec![UpdateSchedule::periodic(2), UpdateSchedule::Explicit { times: vec![1, 5] }];
        assert_eq!(is_update_time(&s, 0, 4), (true, Some(3)));
        assert_eq!(is_update_time(&s, 0, 3), (false, None));
        assert_eq!(is_update_time(&s, 1, 5), (true, Some(2)));
        assert_eq!(is_update_time(&s, 1, 2), (false, None));
    }

    #[test]
    fn assumption4_examples() {
        let r = verify_assumption4(&[UpdateSchedule::periodic(2), UpdateSchedule::periodic(2)], 2, 100);
        assert!(r.holds);
        assert_eq!(r.per_agent, vec![Some(1), Some(1)]);
        assert_eq!(r.validation_windows, None);

        let once = verify_assumption4(&[UpdateSchedule::Explicit { times: vec![0] }], 2, 10);
        assert!(!once.holds);
        assert_eq!(once.validation_windows, Some(20));

        // counting oracle: updates of period p in [6r, 6r+6)
        let count = |p: usize, r: usize| (6 * r..6 * r + 6).filter(|k| k % p == 0).count();
        assert_eq!((count(2, 0), count(3, 0), count(2, 7), count(3, 7)), (3, 2, 3, 2));
        let r = verify_assumption4(&[UpdateSchedule::periodic(2), UpdateSchedule::periodic(3)], 6, 60);
        assert!(r.holds);
        assert_eq!(r.per_agent, vec![Some(3), Some(2)]);
        assert_eq!(default_window(&[UpdateSchedule::periodic(2), UpdateSchedule::periodic(3)]), Some(6));
    }

    #[test]
    fn assumption4_periodic_edge_cases() {
        assert!(!verify_assumption4(&[UpdateSchedule::periodic(4)], 6, 60).holds);
        assert!(!verify_assumption4(&[UpdateSchedule::Periodic { offset: 2, period: 2 }], 4, 60).holds);
        assert!(verify_assumption4(&[UpdateSchedule::Periodic { offset: 1, period: 2 }], 4, 60).holds);
        // explicit list mirroring a periodic rule over 20 windows passes
        let times: Vec<usize> = (0..40).map(|r| 2 * r + 1).collect();
        assert!(verify_assumption4(&[UpdateSchedule::Explicit { times }], 2, 10).holds);
    }

    #[test]
    fn count_in_matches_enumeration() {
        let schedules = [
            UpdateSchedule::Periodic { offset: 3, period: 4 },
            UpdateSchedule::Explicit { times: vec![0, 2, 3, 9, 10] },
        ];
        for s in &schedules {
            for a in 0..15 {
                for b in a..15 {
                    let brute = (a..b).filter(|&k| s.update_index(k).is_some()).count();
                    assert_eq!(s.count_in(a, b), brute);
                }
            }
        }
    }

    fn partition_state() -> (Mixing, AsyncState) {
        let p = AdjacencyPartition::from_rows(&[vec![0.5, 0.2], vec![0.2, 0.4]], &[0.3, 0.4]).unwrap();
        let state = AsyncState { k: 0, estimates: DMatrix::from_column_slice(2, 1, &[1.0, 2.0]), counters: vec![0, 0] };
        (Mixing::Partitioned(p), state)
    }

    #[test]
    fn non_update_time_keeps_average() {
        let (mix, state) = partition_state();
        let schedules = vec![UpdateSchedule::Explicit { times: vec![3] }; 2];
        let specs = vec![ObjectiveSpec::absolute(&[0.0]), ObjectiveSpec::absolute(&[5.0])];
        let set = ProjectionSet::cube(1, 10.0).unwrap();
        let u = DVector::from_element(1, 1.0);
        let out = async_step(&mix, &state, &schedules, &specs, &set, Some(&u)).unwrap();
        let avg = mix.apply(&state.estimates, Some(&u)).unwrap();
        assert_eq!(out.state.estimates, avg);
        assert_eq!(out.omega, DMatrix::zeros(2, 1));
        assert_eq!(out.update_flags, vec![false, false]);
    }

    #[test]
    fn first_update_subtracts_full_subgradient() {
        let (mix, state) = partition_state();
        let schedules = vec![UpdateSchedule::periodic(1); 2];
        let specs = vec![ObjectiveSpec::absolute(&[0.0]), ObjectiveSpec::absolute(&[5.0])];
        let set = ProjectionSet::cube(1, 10.0).unwrap();
        let u = DVector::from_element(1, 0.0);
        let out = async_step(&mix, &state, &schedules, &specs, &set, Some(&u)).unwrap();
        // averages: (.5 + .4, .2 + .8) = (.9, 1.0); subgradients (+1, -1)
        assert!((out.state.estimates[(0, 0)] - (0.9 - 1.0)).abs() < 1e-15);
        assert!((out.state.estimates[(1, 0)] - (1.0 + 1.0)).abs() < 1e-15);
        assert_eq!(out.state.counters, vec![1, 1]);
    }

    #[test]
    fn update_outside_box_is_clamped() {
        let (mix, state) = partition_state();
        let schedules = vec![UpdateSchedule::periodic(1); 2];
        let specs = vec![ObjectiveSpec::quadratic(&[-50.0]), ObjectiveSpec::quadratic(&[50.0])];
        let set = ProjectionSet::cube(1, 10.0).unwrap();
        let out = async_step(&mix, &state, &schedules, &specs, &set, Some(&DVector::zeros(1))).unwrap();
        assert_eq!(out.state.estimates, DMatrix::from_column_slice(2, 1, &[-10.0, 10.0]));
        assert!(async_step(&mix, &state, &schedules[..1], &specs, &set, None).is_err());
    }

    fn ring5(periods: &[usize]) -> (Network, AsyncConfig) {
        let w = build_metropolis_weights(&NetworkGraph::ring(5).unwrap()).unwrap();
        let objectives = (1..=5).map(|c| ObjectiveSpec::absolute(&[c as f64])).collect();
        let net = Network::new(w, objectives, DMatrix::from_column_slice(5, 1, &[-20.0, 4.0, -2.0, 1.0, 8.0])).unwrap();
        let schedules: Vec<_> = periods.iter().map(|&p| UpdateSchedule::periodic(p)).collect();
        let window = default_window(&schedules).unwrap();
        (net, AsyncConfig { schedules, window, set: ProjectionSet::cube(1, 10.0).unwrap() })
    }

    #[test]
    fn zero_horizon_projects_initial_state() {
        let (net, cfg) = ring5(&[1, 2, 3, 2, 1]);
        let t = run_async(&net, &cfg, 0, None).unwrap();
        assert_eq!(t.visible.steps.len(), 1);
        assert_eq!(t.estimates(0)[(0, 0)], -10.0);
    }

    #[test]
    fn closure_and_omega_bound() {
        let (net, cfg) = ring5(&[1, 2, 3, 2, 1]);
        let t = run_async(&net, &cfg, 600, None).unwrap();
        for (k, step) in t.visible.steps.iter().enumerate() {
            for i in 0..5 {
                let row: DVector<f64> = step.estimates.row(i).transpose();
                assert!(contains(&cfg.set, &row).unwrap(), "k={k}");
            }
        }
        for o in &t.oracle.steps[..600] {
            let (flags, counters, omega) =
                (o.update_flags.as_ref().unwrap(), o.counters.as_ref().unwrap(), o.omega.as_ref().unwrap());
            for i in 0..5 {
                if flags[i] {
                    assert!(omega[(i, 0)].abs() <= 1.0 / counters[i] as f64 + 1e-15);
                } else {
                    assert_eq!(omega[(i, 0)], 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_assumption4_violation() {
        let (net, mut cfg) = ring5(&[1, 2, 3, 2, 1]);
        cfg.schedules[2] = UpdateSchedule::Explicit { times: vec![0] };
        assert!(matches!(run_async(&net, &cfg, 10, None), Err(Error::Assumption4(_))));
    }
}
