//! Proximity graphs among the leader and followers, and the matrices built
//! from them.
//!
//! Followers are indexed `0..n`. The leader is not a node of the follower
//! graph; its links are kept separately in [`ProximityGraph::leader_adj`].

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ProximityGraph {
    n: usize,
    /// Unordered follower pairs stored as `(i, j)` with `i < j`, sorted.
    follower_edges: Vec<(usize, usize)>,
    leader_adj: Vec<bool>,
    radius: f64,
}

/// Matrix views of a [`ProximityGraph`].
///
/// The Laplacian and incidence matrices are integer-valued so that
/// `laplacian == incidence * incidenceᵀ` can be checked exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyMatrices {
    pub laplacian: DMatrix<i64>,
    /// `n × N` oriented incidence, column `k` for edge `k`; the lower index is the positive end.
    pub incidence: DMatrix<i64>,
    /// Diagonal of the leader adjacency matrix Λ.
    pub leader_diag: DVector<i64>,
    /// Leader-follower topology matrix `L_F + Λ`.
    pub h: DMatrix<f64>,
}

impl ProximityGraph {
    /// Builds a graph directly from its parts. Edges may be given in either
    /// orientation; they are normalised and deduplicated.
    pub fn from_parts(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        leader_adj: Vec<bool>,
        radius: f64,
    ) -> Result<Self> {
        if leader_adj.len() != n {
            return Err(Error::Config(format!(
                "leader adjacency has length {}, expected {n}",
                leader_adj.len()
            )));
        }
        let mut follower_edges = Vec::new();
        for (a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::Config(format!("invalid follower edge ({a}, {b})")));
            }
            follower_edges.push((a.min(b), a.max(b)));
        }
        follower_edges.sort_unstable();
        follower_edges.dedup();
        Ok(Self {
            n,
            follower_edges,
            leader_adj,
            radius,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn follower_edges(&self) -> &[(usize, usize)] {
        &self.follower_edges
    }

    pub fn leader_adj(&self) -> &[bool] {
        &self.leader_adj
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.follower_edges.binary_search(&key).is_ok()
    }

    /// Followers adjacent to follower `i`, in increasing index order.
    pub fn follower_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.follower_edges.iter().filter_map(move |&(a, b)| {
            if a == i {
                Some(b)
            } else if b == i {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn edge_count(&self) -> usize {
        self.follower_edges.len()
    }
}

/// Connects followers closer than `radius` to each other, and to the leader.
///
/// The comparison is strict: agents exactly `radius` apart are not neighbors.
pub fn build_graph(
    leader: &DVector<f64>,
    followers: &[DVector<f64>],
    radius: f64,
) -> Result<ProximityGraph> {
    if !(radius > 0.0) {
        return Err(Error::Config(format!("sensing radius must be positive, got {radius}")));
    }
    let p = leader.len();
    if let Some((k, q)) = followers.iter().enumerate().find(|(_, q)| q.len() != p) {
        return Err(Error::Config(format!(
            "follower {k} has dimension {}, leader has {p}",
            q.len()
        )));
    }
    let n = followers.len();
    let mut follower_edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if (&followers[i] - &followers[j]).norm() < radius {
                follower_edges.push((i, j));
            }
        }
    }
    let leader_adj = followers
        .iter()
        .map(|q| (q - leader).norm() < radius)
        .collect();
    Ok(ProximityGraph {
        n,
        follower_edges,
        leader_adj,
        radius,
    })
}

pub fn matrices(g: &ProximityGraph) -> TopologyMatrices {
    let n = g.n;
    let mut incidence = DMatrix::<i64>::zeros(n, g.follower_edges.len());
    for (k, &(i, j)) in g.follower_edges.iter().enumerate() {
        incidence[(i, k)] = 1;
        incidence[(j, k)] = -1;
    }
    let mut laplacian = DMatrix::<i64>::zeros(n, n);
    for &(i, j) in &g.follower_edges {
        laplacian[(i, i)] += 1;
        laplacian[(j, j)] += 1;
        laplacian[(i, j)] -= 1;
        laplacian[(j, i)] -= 1;
    }
    let leader_diag = DVector::from_iterator(n, g.leader_adj.iter().map(|&a| i64::from(a)));
    let h = DMatrix::from_fn(n, n, |r, c| {
        let lambda = if r == c { leader_diag[r] } else { 0 };
        (laplacian[(r, c)] + lambda) as f64
    });
    TopologyMatrices {
        laplacian,
        incidence,
        leader_diag,
        h,
    }
}

/// Whether every follower can be reached from the leader through a leader
/// link followed by any number of follower edges.
pub fn leader_reaches_all(g: &ProximityGraph) -> bool {
    let mut seen = g.leader_adj.clone();
    let mut queue: VecDeque<usize> = (0..g.n).filter(|&i| seen[i]).collect();
    while let Some(i) = queue.pop_front() {
        for j in g.follower_neighbors(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// `a` is a subgraph of `b`: every follower edge and leader link of `a` is in `b`.
pub fn is_subgraph(a: &ProximityGraph, b: &ProximityGraph) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::Config(format!(
            "graphs have different follower counts ({} vs {})",
            a.n, b.n
        )));
    }
    let edges_ok = a.follower_edges.iter().all(|&(i, j)| b.has_edge(i, j));
    let leader_ok = a
        .leader_adj
        .iter()
        .zip(&b.leader_adj)
        .all(|(&x, &y)| !x || y);
    Ok(edges_ok && leader_ok)
}

const SYMMETRY_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Smallest eigenvalue of a symmetric matrix, by cyclic Jacobi rotations.
pub fn min_eig_sym(m: &DMatrix<f64>) -> Result<f64> {
    sym_eigenvalues(m).map(|ev| ev.into_iter().fold(f64::INFINITY, f64::min))
}

/// All eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Contract(format!("matrix is {}x{}, not square", n, m.ncols())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    for r in 0..n {
        for c in (r + 1)..n {
            if (m[(r, c)] - m[(c, r)]).abs() > SYMMETRY_TOL {
                return Err(Error::Contract(format!(
                    "matrix is not symmetric at ({r}, {c}): {} vs {}",
                    m[(r, c)],
                    m[(c, r)]
                )));
            }
        }
    }

    let mut a = m.clone();
    let scale = a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| ((r + 1)..n).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)] * a[(r, c)])
            .sum();
        if off.sqrt() <= f64::EPSILON * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn case1_positions() -> (DVector<f64>, Vec<DVector<f64>>) {
        (
            dvector![-80.0, 200.0, 0.0],
            vec![
                dvector![-80.0, 90.0, 0.0],
                dvector![100.0, 90.0, 0.0],
                dvector![100.0, -100.0, 0.0],
                dvector![-80.0, -100.0, 0.0],
            ],
        )
    }

    #[test]
    fn distant_pair_has_no_edge() {
        let g = build_graph(
            &dvector![0.0, 0.0, 0.0],
            &[dvector![100.0, 0.0, 0.0], dvector![350.0, 0.0, 0.0]],
            200.0,
        )
        .unwrap();
        assert!(g.follower_edges().is_empty());
        assert_eq!(g.leader_adj(), &[true, false]);
    }

    #[test]
    fn case1_initial_graph_is_a_ring_with_one_leader_link() {
        // Pairwise distances: 1-2 = 180, 2-3 = 190, 3-4 = 180, 1-4 = 190,
        // diagonals = sqrt(180² + 190²) ≈ 261.7; leader-1 = 110, leader-2 ≈ 210.9.
        let (q0, q) = case1_positions();
        let g = build_graph(&q0, &q, 200.0).unwrap();
        assert_eq!(g.follower_edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert_eq!(g.leader_adj(), &[true, false, false, false]);
        assert!(leader_reaches_all(&g));
    }

    #[test]
    fn boundary_distance_is_excluded() {
        let g = build_graph(&dvector![1.0, 2.0, 3.0], &[dvector![201.0, 2.0, 3.0]], 200.0).unwrap();
        assert_eq!(g.leader_adj(), &[false]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = build_graph(&dvector![0.0, 0.0, 0.0], &[dvector![1.0, 0.0]], 200.0);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn two_follower_matrices() {
        let g = ProximityGraph::from_parts(2, [(0, 1)], vec![true, false], 200.0).unwrap();
        let m = matrices(&g);
        assert_eq!(m.laplacian, DMatrix::from_row_slice(2, 2, &[1, -1, -1, 1]));
        assert_eq!(m.incidence, DMatrix::from_row_slice(2, 1, &[1, -1]));
        assert_eq!(m.leader_diag, DVector::from_vec(vec![1, 0]));
        assert_eq!(m.h, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]));
        assert_eq!(&m.incidence * m.incidence.transpose(), m.laplacian);
    }

    #[test]
    fn two_follower_spectrum() {
        // λ² - 3λ + 1 = 0
        let h = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]);
        let ev = sym_eigenvalues(&h).unwrap();
        assert!((ev[0] - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((ev[1] - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((min_eig_sym(&h).unwrap() - 0.381966).abs() < 1e-6);
    }

    #[test]
    fn empty_graph_gives_zero_matrices() {
        let g = ProximityGraph::from_parts(3, [], vec![false; 3], 200.0).unwrap();
        let m = matrices(&g);
        assert_eq!(m.laplacian, DMatrix::zeros(3, 3));
        assert_eq!(m.h, DMatrix::zeros(3, 3));
        assert_eq!(m.incidence.ncols(), 0);
        assert_eq!(min_eig_sym(&m.h).unwrap(), 0.0);
    }

    #[test]
    fn identity_min_eig() {
        assert!((min_eig_sym(&DMatrix::identity(3, 3)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonsymmetric_input_is_a_contract_violation() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(min_eig_sym(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn reachability() {
        let chain = ProximityGraph::from_parts(3, [(0, 1), (1, 2)], vec![true, false, false], 1.0).unwrap();
        assert!(leader_reaches_all(&chain));
        let split = ProximityGraph::from_parts(4, [(0, 1), (2, 3)], vec![true, false, false, false], 1.0).unwrap();
        assert!(!leader_reaches_all(&split));
    }

    #[test]
    fn subgraph_relation() {
        let b = ProximityGraph::from_parts(3, [(0, 1), (1, 2)], vec![true, false, false], 1.0).unwrap();
        assert!(is_subgraph(&b, &b).unwrap());
        let empty = ProximityGraph::from_parts(3, [], vec![false; 3], 1.0).unwrap();
        assert!(is_subgraph(&empty, &b).unwrap());
        let a = ProximityGraph::from_parts(3, [(0, 2)], vec![false; 3], 1.0).unwrap();
        assert!(!is_subgraph(&a, &b).unwrap());
        let leader_extra = ProximityGraph::from_parts(3, [], vec![false, true, false], 1.0).unwrap();
        assert!(!is_subgraph(&leader_extra, &b).unwrap());
        let small = ProximityGraph::from_parts(2, [], vec![false; 2], 1.0).unwrap();
        assert!(matches!(is_subgraph(&small, &b), Err(Error::Config(_))));
    }

    #[test]
    fn case1_min_eig_matches_reference() {
        // Reference from an independent LAPACK symmetric solver.
        let (q0, q) = case1_positions();
        let m = matrices(&build_graph(&q0, &q, 200.0).unwrap());
        assert!((min_eig_sym(&m.h).unwrap() - 0.186_393_497_7).abs() < 1e-9);
    }
}
