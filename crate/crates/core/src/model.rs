//! Network graphs, doubly stochastic weights, the malicious-agent partition
//! and the rank tests deciding whether the weights can be identified from
//! observed estimates.
//!
//! Agent indices are zero-based throughout the library. Scenario files and
//! CSV traces use one-based ids.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_TOLERANCE};

/// Tolerance used when a matrix is accepted as doubly stochastic.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// Directed communication graph. An arc `(j, i)` means agent `i` receives
/// the estimate of agent `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    n: usize,
    arcs: BTreeSet<(usize, usize)>,
}

impl NetworkGraph {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("graph needs at least one node"));
        }
        let mut set = BTreeSet::new();
        for (j, i) in arcs {
            if j >= n || i >= n {
                return Err(Error::domain(format!("arc ({j}, {i}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::domain(format!("self-loop on node {i}")));
            }
            set.insert((j, i));
        }
        Ok(Self { n, arcs: set })
    }

    /// Undirected ring: every node talks to both of its cyclic neighbours.
    pub fn ring(n: usize) -> Result<Self> {
        let mut arcs = Vec::new();
        if n > 1 {
            for i in 0..n {
                let next = (i + 1) % n;
                if next != i {
                    arcs.push((i, next));
                    arcs.push((next, i));
                }
            }
        }
        Self::new(n, arcs)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let arcs = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (j, i)));
        Self::new(n, arcs)
    }

    /// One-directional cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn directed_cycle(n: usize) -> Result<Self> {
        let arcs = (0..n).filter(|_| n > 1).map(|i| (i, (i + 1) % n));
        Self::new(n, arcs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.arcs.contains(&(from, to))
    }

    /// Neighbour set of `i`: every `j` with an arc `(j, i)`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.arcs.iter().filter(|&&(_, to)| to == i).map(|&(from, _)| from).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.arcs.iter().all(|&(j, i)| self.arcs.contains(&(i, j)))
    }

    /// The graph induced on all nodes except `removed`, with indices shifted down.
    pub fn without_node(&self, removed: usize) -> Result<Self> {
        if removed >= self.n || self.n < 2 {
            return Err(Error::domain(format!("cannot remove node {removed} from graph of size {}", self.n)));
        }
        let shift = |v: usize| if v > removed { v - 1 } else { v };
        let arcs = self.arcs.iter().filter(|&&(j, i)| j != removed && i != removed).map(|&(j, i)| (shift(j), shift(i)));
        Self::new(self.n - 1, arcs)
    }
}

/// True iff every ordered pair of nodes is joined by a directed path.
pub fn is_strongly_connected(graph: &NetworkGraph) -> bool {
    let n = graph.n();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for (from, to) in graph.arcs() {
                let (src, dst) = if forward { (from, to) } else { (to, from) };
                if src == v && !seen[dst] {
                    seen[dst] = true;
                    queue.push_back(dst);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Nonnegative weight matrix; entry `(i, j)` weights what `i` receives from `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix(DMatrix<f64>);

impl AdjacencyMatrix {
    /// Wraps an explicit matrix, rejecting anything that is not doubly
    /// stochastic within [`STOCHASTIC_TOLERANCE`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::domain("adjacency matrix must be square"));
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("adjacency matrix has non-finite entries"));
        }
        if !validate_double_stochastic(&entries, STOCHASTIC_TOLERANCE) {
            return Err(Error::domain("adjacency matrix is not doubly stochastic"));
        }
        Ok(Self(entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain("adjacency matrix rows must all have length n"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Graph of the positive off-diagonal entries.
    pub fn graph(&self) -> NetworkGraph {
        let n = self.n();
        let arcs = (0..n).flat_map(|i| (0..n).map(move |j| (j, i))).filter(|&(j, i)| i != j && self.0[(i, j)] > 0.0);
        NetworkGraph::new(n, arcs).expect("indices are in range")
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// Metropolis weights `1 / (1 + max(deg_i, deg_j))` on every arc, with the
/// diagonal absorbing the remainder of each row.
pub fn build_metropolis_weights(graph: &NetworkGraph) -> Result<AdjacencyMatrix> {
    if !graph.is_symmetric() {
        return Err(Error::ConstructionUnsupported("Metropolis weights need every arc to have its reverse".into()));
    }
    if !is_strongly_connected(graph) {
        return Err(Error::NotStronglyConnected);
    }
    let n = graph.n();
    let degree: Vec<usize> = (0..n).map(|i| graph.neighbors(i).len()).collect();
    let mut m = DMatrix::zeros(n, n);
    for (j, i) in graph.arcs() {
        m[(i, j)] = 1.0 / (1.0 + degree[i].max(degree[j]) as f64);
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
        m[(i, i)] = 1.0 - off;
    }
    Ok(AdjacencyMatrix(m))
}

/// Entries at least `-tol`, and every row and column sum within `tol` of one.
pub fn validate_double_stochastic(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let nonneg = m.iter().all(|&v| v >= -tol);
    let rows = m.row_iter().all(|r| (r.sum() - 1.0).abs() <= tol);
    let cols = m.column_iter().all(|c| (c.sum() - 1.0).abs() <= tol);
    nonneg && rows && cols
}

/// The pair `(A, b)`: weights among regular agents and the weights each
/// regular agent puts on the malicious agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyPartition {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Zero-based index of the malicious agent in the full network.
    pub malicious_index: usize,
}

impl AdjacencyPartition {
    /// Builds a partition directly from `(A, b)`; the malicious agent is taken
    /// to be the last one.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.len() {
            return Err(Error::domain(format!("A is {}x{} but b has length {}", a.nrows(), a.ncols(), b.len())));
        }
        let malicious_index = b.len();
        Ok(Self { a, b, malicious_index })
    }

    pub fn from_rows(a: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let n = b.len();
        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(Error::domain("A must be square with side len(b)"));
        }
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat), DVector::from_column_slice(b))
    }

    /// Number of regular agents (`n - 1`).
    pub fn regular_count(&self) -> usize {
        self.b.len()
    }

    /// The stacked matrix `(A, b)`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let k = self.regular_count();
        let mut out = DMatrix::zeros(k, k + 1);
        out.view_mut((0, 0), (k, k)).copy_from(&self.a);
        out.set_column(k, &self.b);
        out
    }

    /// Every row of `(A, b)` nonnegative and summing to one within `tol`.
    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        let s = self.stacked();
        s.iter().all(|&v| v >= -tol) && s.row_iter().all(|r| (r.sum() - 1.0).abs() <= tol)
    }

    /// Puts the partition back into an `n x n` matrix given the malicious
    /// agent's own row.
    pub fn embed(&self, malicious_row: &DVector<f64>) -> Result<DMatrix<f64>> {
        let k = self.regular_count();
        let n = k + 1;
        if malicious_row.len() != n {
            return Err(Error::domain("malicious row must have length n"));
        }
        let full_idx = |i: usize| if i >= self.malicious_index { i + 1 } else { i };
        let mut m = DMatrix::zeros(n, n);
        for i in 0..k {
            for j in 0..k {
                m[(full_idx(i), full_idx(j))] = self.a[(i, j)];
            }
            m[(full_idx(i), self.malicious_index)] = self.b[i];
        }
        m.set_row(self.malicious_index, &malicious_row.transpose());
        Ok(m)
    }
}

/// Splits `m` around the malicious agent `malicious_index` (zero-based).
pub fn partition(m: &AdjacencyMatrix, malicious_index: usize) -> Result<AdjacencyPartition> {
    partition_matrix(m.matrix(), malicious_index)
}

pub fn partition_matrix(m: &DMatrix<f64>, malicious_index: usize) -> Result<AdjacencyPartition> {
    let n = m.nrows();
    if malicious_index >= n || n < 2 {
        return Err(Error::domain(format!("malicious index {malicious_index} out of range for n = {n}")));
    }
    let regular: Vec<usize> = (0..n).filter(|&i| i != malicious_index).collect();
    let a = DMatrix::from_fn(n - 1, n - 1, |i, j| m[(regular[i], regular[j])]);
    let b = DVector::from_fn(n - 1, |i, _| m[(regular[i], malicious_index)]);
    Ok(AdjacencyPartition { a, b, malicious_index })
}

/// Krylov vectors `v, Av, ..., A^{count-1} v` as columns.
fn krylov(a: &DMatrix<f64>, v: &DVector<f64>, count: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut cur = v.clone();
    for _ in 0..count {
        let next = a * &cur;
        out.push(std::mem::replace(&mut cur, next));
    }
    out
}

fn columns(cols: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    if cols.is_empty() {
        return DMatrix::zeros(rows, 0);
    }
    DMatrix::from_columns(cols)
}

/// `rank(b, Ab, ..., A^{n-2} b)`; full rank means complete controllability.
pub fn controllability_rank(p: &AdjacencyPartition) -> usize {
    let k = p.regular_count();
    linalg::rank(&columns(&krylov(&p.a, &p.b, k), k), RANK_TOLERANCE)
}

/// Generators `1, b, ..., A^{n-2} b, x0, ..., A^{n-2} x0` of the span whose
/// fullness guarantees discoverability.
pub fn span_generators(p: &AdjacencyPartition, x0: &DVector<f64>) -> Result<DMatrix<f64>> {
    let k = p.regular_count();
    if x0.len() != k {
        return Err(Error::domain(format!("x0 has length {} but there are {k} regular agents", x0.len())));
    }
    let mut cols = vec![DVector::from_element(k, 1.0)];
    cols.extend(krylov(&p.a, &p.b, k));
    cols.extend(krylov(&p.a, x0, k));
    Ok(columns(&cols, k))
}

/// Witness of non-discoverability: a different stochastic `(A*, b)` that
/// produces identical trajectories for every input sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// Zero-based regular-agent row that was perturbed.
    pub perturbed_row: usize,
}

impl Certificate {
    pub fn partition(&self, malicious_index: usize) -> AdjacencyPartition {
        let mut p = AdjacencyPartition::from_rows(&self.a, &self.b).expect("certificate is well formed");
        p.malicious_index = malicious_index;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoverabilityVerdict {
    pub span_rank: usize,
    pub controllability_rank: usize,
    pub discoverable: bool,
    pub certificate: Option<Certificate>,
}

/// Rank part of the verdict; `discoverable` iff the span is all of `R^{n-1}`.
pub fn discoverability_span_rank(p: &AdjacencyPartition, x0: &DVector<f64>) -> Result<DiscoverabilityVerdict> {
    let g = span_generators(p, x0)?;
    let span_rank = linalg::rank(&g, RANK_TOLERANCE);
    Ok(DiscoverabilityVerdict {
        span_rank,
        controllability_rank: controllability_rank(p),
        discoverable: span_rank == p.regular_count(),
        certificate: None,
    })
}

/// Builds `(A*, b)` by moving one strictly positive row of `A` along the
/// orthogonal complement of the generator span. Returns `Ok(None)` when the
/// span is full.
pub fn nondiscoverability_certificate(p: &AdjacencyPartition, x0: &DVector<f64>) -> Result<Option<Certificate>> {
    let g = span_generators(p, x0)?;
    let k = p.regular_count();
    if linalg::rank(&g, RANK_TOLERANCE) == k {
        return Ok(None);
    }
    let complement = linalg::orthogonal_complement(&g, RANK_TOLERANCE);
    if complement.ncols() == 0 {
        return Ok(None);
    }
    let dir: DVector<f64> = complement.column(0).into_owned();
    let row = (0..k)
        .find(|&i| p.a.row(i).iter().all(|&v| v > 0.0))
        .ok_or_else(|| Error::CertificateNotConstructible("no row of A is strictly positive".into()))?;
    let smallest = p.a.row(row).min();
    let step = 0.5 * smallest / dir.amax();
    let mut a_star = p.a.clone();
    for j in 0..k {
        a_star[(row, j)] -= step * dir[j];
    }
    Ok(Some(Certificate {
        a: a_star.row_iter().map(|r| r.iter().copied().collect()).collect(),
        b: p.b.iter().copied().collect(),
        perturbed_row: row,
    }))
}

/// Full verdict: ranks plus a certificate when the span is deficient.
pub fn analyze_discoverability(p: &AdjacencyPartition, x0: &DVector<f64>) -> Result<DiscoverabilityVerdict> {
    let mut verdict = discoverability_span_rank(p, x0)?;
    if !verdict.discoverable {
        verdict.certificate = nondiscoverability_certificate(p, x0)?;
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_partition() -> AdjacencyPartition {
        AdjacencyPartition::from_rows(&[vec![0.5, 0.2], vec![0.3, 0.4]], &[0.3, 0.3]).unwrap()
    }

    /// Exact rank over the rationals by fraction-free Gaussian elimination on
    /// integer-scaled entries.
    fn exact_rank(rows: &[Vec<i128>]) -> usize {
        let mut m: Vec<Vec<i128>> = rows.to_vec();
        let (nr, nc) = (m.len(), m.first().map_or(0, |r| r.len()));
        let mut rank = 0;
        for c in 0..nc {
            let Some(p) = (rank..nr).find(|&r| m[r][c] != 0) else { continue };
            m.swap(rank, p);
            for r in 0..nr {
                if r != rank && m[r][c] != 0 {
                    let (f, g) = (m[rank][c], m[r][c]);
                    for cc in 0..nc {
                        m[r][cc] = m[r][cc] * f - m[rank][cc] * g;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn metropolis_on_complete_three() {
        let w = build_metropolis_weights(&NetworkGraph::complete(3).unwrap()).unwrap();
        for v in w.matrix().iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(validate_double_stochastic(w.matrix(), 1e-12));
    }

    #[test]
    fn metropolis_single_node() {
        let w = build_metropolis_weights(&NetworkGraph::new(1, []).unwrap()).unwrap();
        assert_eq!(w.matrix(), &DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn metropolis_ring_four_sums() {
        let w = build_metropolis_weights(&NetworkGraph::ring(4).unwrap()).unwrap();
        let m = w.matrix();
        for i in 0..4 {
            let (mut row, mut col) = (0.0, 0.0);
            for j in 0..4 {
                row += m[(i, j)];
                col += m[(j, i)];
            }
            assert!((row - 1.0).abs() < 1e-12 && (col - 1.0).abs() < 1e-12);
            assert!((m[(i, i)] - 1.0 / 3.0).abs() < 1e-15);
            assert!((m[(i, (i + 1) % 4)] - 1.0 / 3.0).abs() < 1e-15);
            assert_eq!(m[(i, (i + 2) % 4)], 0.0);
        }
    }

    #[test]
    fn metropolis_rejects_bad_graphs() {
        assert!(matches!(
            build_metropolis_weights(&NetworkGraph::directed_cycle(4).unwrap()),
            Err(Error::ConstructionUnsupported(_))
        ));
        let split = NetworkGraph::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert!(matches!(build_metropolis_weights(&split), Err(Error::NotStronglyConnected)));
    }

    #[test]
    fn double_stochastic_predicate() {
        assert!(validate_double_stochastic(&DMatrix::from_element(3, 3, 1.0 / 3.0), 1e-12));
        assert!(validate_double_stochastic(&DMatrix::identity(3, 3), 1e-12));
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.6, 0.4]);
        assert!(!validate_double_stochastic(&m, 1e-12));
    }

    #[test]
    fn strong_connectivity() {
        assert!(is_strongly_connected(&NetworkGraph::directed_cycle(4).unwrap()));
        assert!(!is_strongly_connected(&NetworkGraph::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap()));
        assert!(is_strongly_connected(&NetworkGraph::complete(3).unwrap()));
    }

    #[test]
    fn partition_slices() {
        let m = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.3, 0.3, 0.4, 0.3, 0.2, 0.4, 0.4]);
        let p = partition_matrix(&m, 2).unwrap();
        assert_eq!(p.a, DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.3, 0.4]));
        assert_eq!(p.b, DVector::from_column_slice(&[0.3, 0.3]));
        let p1 = partition_matrix(&m, 0).unwrap();
        assert_eq!(p1.a, DMatrix::from_row_slice(2, 2, &[0.4, 0.3, 0.4, 0.4]));
        assert_eq!(p1.b, DVector::from_column_slice(&[0.3, 0.2]));
        assert!(matches!(partition_matrix(&m, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn partition_rows_stochastic_and_embed_round_trip() {
        let w = build_metropolis_weights(&NetworkGraph::ring(5).unwrap()).unwrap();
        for idx in 0..5 {
            let p = partition(&w, idx).unwrap();
            assert!(p.is_row_stochastic(1e-12));
            let row: DVector<f64> = w.matrix().row(idx).transpose();
            assert_eq!(&p.embed(&row).unwrap(), w.matrix());
        }
    }

    #[test]
    fn controllability_examples() {
        // exact oracle: (b, Ab) scaled by 100 to integers
        // A=[[.5,.2],[.3,.4]], b=(.3,.3): Ab=(.21,.21)
        assert_eq!(exact_rank(&[vec![30, 21], vec![30, 21]]), 1);
        assert_eq!(controllability_rank(&example_partition()), 1);
        // A=[[.5,.2],[.2,.4]], b=(.3,.4): Ab=(.23,.22), det = 3*22 - 4*23 != 0
        assert_eq!(exact_rank(&[vec![30, 23], vec![40, 22]]), 2);
        let p = AdjacencyPartition::from_rows(&[vec![0.5, 0.2], vec![0.2, 0.4]], &[0.3, 0.4]).unwrap();
        assert_eq!(controllability_rank(&p), 2);
        let z = AdjacencyPartition::from_rows(&[vec![0.5, 0.2], vec![0.2, 0.4]], &[0.0, 0.0]).unwrap();
        assert_eq!(controllability_rank(&z), 0);
    }

    #[test]
    fn span_rank_examples() {
        let full = AdjacencyPartition::from_rows(&[vec![0.5, 0.2], vec![0.2, 0.4]], &[0.3, 0.4]).unwrap();
        // span{1, b}: det [[1, .3], [1, .4]] = .1
        assert_eq!(exact_rank(&[vec![10, 3], vec![10, 4]]), 2);
        let v = discoverability_span_rank(&full, &DVector::from_column_slice(&[7.0, -1.0])).unwrap();
        assert!(v.discoverable && v.span_rank == 2);

        let p = example_partition();
        let v = discoverability_span_rank(&p, &DVector::from_column_slice(&[1.0, 1.0])).unwrap();
        assert_eq!(v.span_rank, 1);
        assert!(!v.discoverable);

        assert_eq!(exact_rank(&[vec![1, 1], vec![1, 2]]), 2);
        let v = discoverability_span_rank(&p, &DVector::from_column_slice(&[1.0, 2.0])).unwrap();
        assert!(v.discoverable);

        assert!(matches!(discoverability_span_rank(&p, &DVector::from_column_slice(&[1.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn certificate_for_three_agent_instance() {
        let p = example_partition();
        let x0 = DVector::from_column_slice(&[1.0, 1.0]);
        let cert = nondiscoverability_certificate(&p, &x0).unwrap().unwrap();
        assert_eq!(cert.perturbed_row, 0);
        assert!((cert.a[0][0] - 0.4).abs() < 1e-12);
        assert!((cert.a[0][1] - 0.3).abs() < 1e-12);
        assert_eq!(cert.a[1], vec![0.3, 0.4]);
        let star = cert.partition(p.malicious_index);
        assert!(star.is_row_stochastic(1e-12));
        assert_ne!(star.a, p.a);
    }

    #[test]
    fn certificate_absent_for_full_span() {
        let p = AdjacencyPartition::from_rows(&[vec![0.5, 0.2], vec![0.2, 0.4]], &[0.3, 0.4]).unwrap();
        let x0 = DVector::from_column_slice(&[0.0, 1.0]);
        assert_eq!(nondiscoverability_certificate(&p, &x0).unwrap(), None);
        let v = analyze_discoverability(&p, &x0).unwrap();
        assert!(v.discoverable && v.certificate.is_none());
    }

    #[test]
    fn certificate_not_constructible_without_positive_row() {
        let p = AdjacencyPartition::from_rows(&[vec![0.7, 0.0], vec![0.0, 0.7]], &[0.3, 0.3]).unwrap();
        let x0 = DVector::from_column_slice(&[1.0, 1.0]);
        assert!(matches!(nondiscoverability_certificate(&p, &x0), Err(Error::CertificateNotConstructible(_))));
    }

    #[test]
    fn graph_helpers() {
        let g = NetworkGraph::ring(5).unwrap();
        assert_eq!(g.neighbors(0), vec![1, 4]);
        let h = g.without_node(4).unwrap();
        assert_eq!(h.n(), 4);
        assert!(is_strongly_connected(&h));
        assert!(!is_strongly_connected(&h.without_node(1).unwrap()));
        assert!(NetworkGraph::new(3, [(0, 0)]).is_err());
        assert!(NetworkGraph::new(3, [(0, 3)]).is_err());
    }
}
