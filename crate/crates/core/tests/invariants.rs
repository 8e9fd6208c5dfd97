use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use subgrad_privacy::adversary::{
    assemble_yz, attack_dssoa, probe_sequence, GroundTruth, ProbeSchedule, RecoveryReport,
};
use subgrad_privacy::asynchronous::{run_async, AsyncConfig, UpdateSchedule};
use subgrad_privacy::linalg::{rank, RANK_TOLERANCE};
use subgrad_privacy::metrics::{average, lemma1_bound};
use subgrad_privacy::model::{
    build_metropolis_weights, controllability_rank, discoverability_span_rank, nondiscoverability_certificate,
    partition, validate_double_stochastic, AdjacencyMatrix, AdjacencyPartition, NetworkGraph,
};
use subgrad_privacy::objectives::ObjectiveSpec;
use subgrad_privacy::projection::{contains, ProjectionSet};
use subgrad_privacy::sync::{consensus_step, dssoa_step, run_sync, MaliciousInput, Mixing, Network, StepsizeSchedule};
use subgrad_privacy::trace::{read_oracle, read_visible, write_oracle, write_visible};

fn sinkhorn(mut m: DMatrix<f64>) -> DMatrix<f64> {
    for _ in 0..10_000 {
        for i in 0..m.nrows() {
            let s: f64 = m.row(i).sum();
            m.row_mut(i).scale_mut(1.0 / s);
        }
        for j in 0..m.ncols() {
            let s: f64 = m.column(j).sum();
            m.column_mut(j).scale_mut(1.0 / s);
        }
        if (0..m.nrows()).all(|i| (m.row(i).sum() - 1.0).abs() < 1e-15) {
            break;
        }
    }
    m
}

/// Strictly positive doubly stochastic matrix.
fn positive_weights() -> impl Strategy<Value = AdjacencyMatrix> {
    (2usize..6)
        .prop_flat_map(|n| prop::collection::vec(0.05..1.0f64, n * n).prop_map(move |v| (n, v)))
        .prop_map(|(n, v)| AdjacencyMatrix::new(sinkhorn(DMatrix::from_row_slice(n, n, &v))).unwrap())
}

/// Connected undirected graph: a path plus random extra edges.
fn connected_graph() -> impl Strategy<Value = NetworkGraph> {
    (1usize..8).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..12).prop_map(move |extra| {
            let mut arcs: Vec<(usize, usize)> = (1..n).flat_map(|i| [(i - 1, i), (i, i - 1)]).collect();
            for (a, b) in extra {
                if a != b {
                    arcs.push((a, b));
                    arcs.push((b, a));
                }
            }
            NetworkGraph::new(n, arcs).unwrap()
        })
    })
}

/// Three-agent instance whose regular rows have equal sums and `x0 = c 1`,
/// so the span is deficient.
fn equal_row_sum_instance() -> impl Strategy<Value = (AdjacencyPartition, DVector<f64>)> {
    (0.3..0.9f64, 0.1..0.9f64, 0.1..0.9f64, -3.0..3.0f64).prop_map(|(s, f1, f2, c)| {
        let a = vec![vec![s * f1, s * (1.0 - f1)], vec![s * f2, s * (1.0 - f2)]];
        let p = AdjacencyPartition::from_rows(&a, &[1.0 - s, 1.0 - s]).unwrap();
        (p, DVector::from_element(2, c))
    })
}

fn simulate(p: &AdjacencyPartition, x0: &DVector<f64>, u: &[f64]) -> Vec<DVector<f64>> {
    let mut xs = vec![x0.clone()];
    for &v in u {
        let next = consensus_step(p, xs.last().unwrap(), v).unwrap();
        xs.push(next);
    }
    xs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metropolis_is_doubly_stochastic_on_pattern(g in connected_graph()) {
        let w = build_metropolis_weights(&g).unwrap();
        prop_assert!(validate_double_stochastic(w.matrix(), 1e-12));
        for i in 0..g.n() {
            for j in 0..g.n() {
                let expected = i == j || g.has_arc(i, j);
                prop_assert_eq!(w.matrix()[(i, j)] > 0.0, expected, "entry ({}, {})", i, j);
            }
        }
    }

    #[test]
    fn partition_embed_round_trip(w in positive_weights(), pick in 0usize..8) {
        let idx = pick % w.n();
        let p = partition(&w, idx).unwrap();
        let row: DVector<f64> = w.matrix().row(idx).transpose();
        prop_assert_eq!(&p.embed(&row).unwrap(), w.matrix());
    }

    #[test]
    fn controllable_implies_discoverable(w in positive_weights(), x in prop::collection::vec(-5.0..5.0f64, 5)) {
        let p = partition(&w, w.n() - 1).unwrap();
        let x0 = DVector::from_column_slice(&x[..w.n() - 1]);
        if controllability_rank(&p) == w.n() - 1 {
            prop_assert!(discoverability_span_rank(&p, &x0).unwrap().discoverable);
        }
    }

    #[test]
    fn span_rank_scale_invariant(w in positive_weights(), x in prop::collection::vec(-5.0..5.0f64, 5), scale in 0.01..100.0f64) {
        let p = partition(&w, 0).unwrap();
        let x0 = DVector::from_column_slice(&x[..w.n() - 1]);
        let a = discoverability_span_rank(&p, &x0).unwrap().span_rank;
        let b = discoverability_span_rank(&p, &(x0 * scale)).unwrap().span_rank;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn certificate_reproduces_trajectories((p, x0) in equal_row_sum_instance(), u in prop::collection::vec(-2.0..2.0f64, 50)) {
        let cert = nondiscoverability_certificate(&p, &x0).unwrap().expect("span is deficient");
        let alt = cert.partition(p.malicious_index);
        prop_assert!((alt.stacked() - p.stacked()).amax() > 1e-6);
        for (a, b) in simulate(&p, &x0, &u).iter().zip(&simulate(&alt, &x0, &u)) {
            prop_assert!((a - b).amax() <= 1e-12);
        }
    }

    #[test]
    fn probe_data_full_row_rank(w in positive_weights(), x in prop::collection::vec(-1.0..1.0f64, 5)) {
        let n = w.n();
        let p = partition(&w, n - 1).unwrap();
        let x0 = DVector::from_column_slice(&x[..n - 1]);
        prop_assume!(discoverability_span_rank(&p, &x0).unwrap().discoverable);
        let u = probe_sequence(n).unwrap();
        let (y, _) = assemble_yz(&simulate(&p, &x0, &u), &u).unwrap();
        prop_assert_eq!(rank(&y, RANK_TOLERANCE), n);
    }

    #[test]
    fn sync_trace_respects_boundedness(
        w in positive_weights(),
        centers in prop::collection::vec(-5.0..5.0f64, 6),
        u in prop::collection::vec(-3.0..3.0f64, 60),
        alpha0 in 0.1..2.0f64,
    ) {
        let n = w.n();
        let specs: Vec<ObjectiveSpec> = (0..n).map(|i| ObjectiveSpec::absolute(&[centers[i]])).collect();
        let x0 = DMatrix::from_fn(n, 1, |i, _| centers[i] * 0.5);
        let net = Network::new(w.clone(), specs, x0).unwrap();
        let input = MaliciousInput::broadcast(n - 1, &u, 1);
        let trace = run_sync(&net, &StepsizeSchedule::Harmonic { alpha0 }, u.len(), Some(&input)).unwrap();
        let p = partition(&w, n - 1).unwrap();
        let u_star = input.sup_norm();
        let bound = lemma1_bound(&trace.visible.steps[0].estimates, u_star, alpha0, 1.0, &p.a).unwrap();
        for s in &trace.visible.steps {
            prop_assert!(s.estimates.amax() <= bound);
        }
    }

    #[test]
    fn constant_objectives_conserve_average(w in positive_weights(), x in prop::collection::vec(-5.0..5.0f64, 5)) {
        let n = w.n();
        let net = Network::new(w, vec![ObjectiveSpec::constant(2.0, 1); n], DMatrix::from_column_slice(n, 1, &x[..n])).unwrap();
        let trace = run_sync(&net, &StepsizeSchedule::default(), 30, None).unwrap();
        let start = average(&trace.visible.steps[0].estimates);
        for s in &trace.visible.steps {
            prop_assert!((average(&s.estimates) - &start).amax() < 1e-12);
        }
    }

    #[test]
    fn zero_subgradient_step_is_consensus(w in positive_weights(), x in prop::collection::vec(-5.0..5.0f64, 5), u in -3.0..3.0f64, alpha in 0.0..2.0f64) {
        let n = w.n();
        let p = partition(&w, n - 1).unwrap();
        let xv = DVector::from_column_slice(&x[..n - 1]);
        let specs = vec![ObjectiveSpec::constant(0.0, 1); n - 1];
        let step = dssoa_step(&Mixing::Partitioned(p.clone()), &DMatrix::from_column_slice(n - 1, 1, xv.as_slice()), Some(&DVector::from_element(1, u)), alpha, &specs).unwrap();
        prop_assert_eq!(step.next.column(0).into_owned(), consensus_step(&p, &xv, u).unwrap());
    }

    #[test]
    fn async_closure_drift_identity_and_omega(
        w in positive_weights(),
        periods in prop::collection::vec(1usize..4, 5),
        centers in prop::collection::vec(-4.0..4.0f64, 5),
        half in 1.0..6.0f64,
    ) {
        let n = w.n();
        let periods = &periods[..n];
        let window = periods.iter().fold(1, |acc, &p| acc * p / gcd(acc, p));
        let specs: Vec<ObjectiveSpec> = centers[..n].iter().map(|&c| ObjectiveSpec::absolute(&[c])).collect();
        let x0 = DMatrix::from_fn(n, 1, |i, _| 3.0 * centers[i]);
        let net = Network::new(w, specs, x0).unwrap();
        let set = ProjectionSet::cube(1, half).unwrap();
        let cfg = AsyncConfig { schedules: periods.iter().map(|&p| UpdateSchedule::periodic(p)).collect(), window, set: set.clone() };
        let horizon = 120;
        let trace = run_async(&net, &cfg, horizon, None).unwrap();
        for k in 0..horizon {
            let x = &trace.visible.steps[k].estimates;
            let next = &trace.visible.steps[k + 1].estimates;
            let o = &trace.oracle.steps[k];
            let omega = o.omega.as_ref().unwrap();
            let flags = o.update_flags.as_ref().unwrap();
            let counters = o.counters.as_ref().unwrap();
            let mut drift = 0.0;
            for i in 0..n {
                prop_assert!(contains(&set, &next.row(i).transpose()).unwrap());
                if flags[i] {
                    drift += omega[(i, 0)];
                    prop_assert!(omega[(i, 0)].abs() <= 1.0 / counters[i] as f64 + 1e-15);
                } else {
                    prop_assert!(omega[(i, 0)].abs() <= 1e-12);
                }
            }
            let lhs = average(next)[0];
            let rhs = average(x)[0] + drift / n as f64;
            prop_assert!((lhs - rhs).abs() < 1e-12, "k = {}: {} vs {}", k, lhs, rhs);
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn attack_fixture() -> (Network, ProbeSchedule, MaliciousInput) {
    let w = AdjacencyMatrix::from_rows(&[vec![0.5, 0.2, 0.3], vec![0.2, 0.4, 0.4], vec![0.3, 0.4, 0.3]]).unwrap();
    let specs =
        vec![ObjectiveSpec::absolute(&[-2.0]), ObjectiveSpec::absolute(&[3.0]), ObjectiveSpec::constant(0.0, 1)];
    let net = Network::new(w, specs, DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0])).unwrap();
    let probe = ProbeSchedule::new(3, 20).unwrap();
    let input = MaliciousInput::broadcast(2, &probe.sequence(), 1);
    (net, probe, input)
}

#[test]
fn recovery_report_is_deterministic() {
    let render = || {
        let (net, probe, input) = attack_fixture();
        let stepsize = StepsizeSchedule::default();
        let trace = run_sync(&net, &stepsize, probe.horizon(), Some(&input)).unwrap();
        let outcome = attack_dssoa(&trace.visible, &probe, &stepsize).unwrap();
        let truth = GroundTruth::from_oracle(partition(&net.weights, 2).unwrap(), &trace.oracle);
        serde_json::to_string(&RecoveryReport::build(&outcome, Some(&truth))).unwrap()
    };
    assert_eq!(render(), render());
}

#[test]
fn error_fields_need_ground_truth() {
    let (net, probe, input) = attack_fixture();
    let stepsize = StepsizeSchedule::default();
    let trace = run_sync(&net, &stepsize, probe.horizon(), Some(&input)).unwrap();
    let outcome = attack_dssoa(&trace.visible, &probe, &stepsize).unwrap();
    let report = RecoveryReport::build(&outcome, None);
    assert!(report.windows.iter().all(|w| w.frobenius_error.is_none()));
    assert!(report.subgradient_errors.is_none() && report.error_series.is_none());
    assert!(report.estimate.as_ref().unwrap().frobenius_error.is_none());
    assert_eq!(report.subgradient_series.len(), probe.horizon());
}

#[test]
fn constant_stepsize_rejected_by_asymptotic_attack() {
    let (net, probe, input) = attack_fixture();
    let trace = run_sync(&net, &StepsizeSchedule::Constant { alpha: 0.1 }, probe.horizon(), Some(&input)).unwrap();
    assert!(attack_dssoa(&trace.visible, &probe, &StepsizeSchedule::Constant { alpha: 0.1 }).is_err());
}

#[test]
fn async_trace_round_trips_through_csv() {
    let w = build_metropolis_weights(&NetworkGraph::ring(4).unwrap()).unwrap();
    let specs: Vec<ObjectiveSpec> = (0..4).map(|c| ObjectiveSpec::absolute(&[c as f64 * 0.7, -1.0])).collect();
    let x0 = DMatrix::from_fn(4, 2, |i, j| (i as f64 - 1.5) * (j as f64 + 0.3));
    let net = Network::new(w, specs, x0).unwrap();
    let cfg = AsyncConfig {
        schedules: vec![
            UpdateSchedule::periodic(1),
            UpdateSchedule::periodic(2),
            UpdateSchedule::Periodic { offset: 1, period: 2 },
            UpdateSchedule::periodic(1),
        ],
        window: 2,
        set: ProjectionSet::ball(vec![0.0, 0.0], 3.0).unwrap(),
    };
    let input = MaliciousInput::broadcast(1, &[0.25; 25], 2);
    let trace = run_async(&net, &cfg, 25, Some(&input)).unwrap();
    let mut vis = Vec::new();
    let mut ora = Vec::new();
    write_visible(&trace.visible, &mut vis).unwrap();
    write_oracle(&trace, &mut ora).unwrap();
    assert_eq!(read_visible(&vis[..]).unwrap(), trace.visible);
    assert_eq!(read_oracle(&ora[..]).unwrap(), trace.oracle);
}
