//! Collaboration topology, interaction-matrix algebra, and graph generators.

use rand::Rng;
use thiserror::Error;

/// Tolerance on row sums of a stochastic matrix.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Residual tolerance for the left Perron vector iteration.
pub const PERRON_TOL: f64 = 1e-12;

const PERRON_MAX_SWEEPS: usize = 100_000;
const GRAPH_ATTEMPT_CAP: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("matrix is not row-stochastic: row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },
    #[error("matrix has a negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("matrix is not square: {rows} rows, {cols} columns in row {row}")]
    NotSquare { rows: usize, cols: usize, row: usize },
    #[error("self-collaboration i == j == {0} is undefined")]
    SelfCollaboration(usize),
    #[error("agent index {index} out of range for {m} agents")]
    AgentOutOfRange { index: usize, m: usize },
    #[error("mixing weight {0} outside (0, 1]")]
    BadMixingWeight(f64),
    #[error("matrix is reducible; a strictly positive Perron vector requires irreducibility")]
    Reducible,
    #[error("Perron iteration did not reach residual {PERRON_TOL} within {PERRON_MAX_SWEEPS} sweeps")]
    PerronDiverged,
    #[error("failed to sample a connected geometric graph with radius {radius} in {GRAPH_ATTEMPT_CAP} attempts")]
    DisconnectedRadius { radius: f64 },
    #[error("invalid collaboration model: {0}")]
    InvalidModel(String),
    #[error("window length {r} invalid for a schedule of {len} edge sets")]
    BadWindow { r: usize, len: usize },
}

/// Square nonnegative matrix with rows summing to 1 within [`ROW_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    m: usize,
    entries: Vec<f64>, // row-major
}

impl StochasticMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, NetworkError> {
        let m = rows.len();
        let mut entries = Vec::with_capacity(m * m);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(NetworkError::NotSquare {
                    rows: m,
                    cols: row.len(),
                    row: r,
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_flat(m, entries)
    }

    pub fn from_flat(m: usize, entries: Vec<f64>) -> Result<Self, NetworkError> {
        assert_eq!(entries.len(), m * m, "entry count must be m*m");
        for r in 0..m {
            let mut sum = 0.0;
            for c in 0..m {
                let v = entries[r * m + c];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(NetworkError::NegativeEntry { row: r, col: c });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(NetworkError::NotStochastic { row: r, sum });
            }
        }
        Ok(StochasticMatrix { m, entries })
    }

    pub fn identity(m: usize) -> Self {
        let mut entries = vec![0.0; m * m];
        for i in 0..m {
            entries[i * m + i] = 1.0;
        }
        StochasticMatrix { m, entries }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.m + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.m..(r + 1) * self.m]
    }

    /// `self * other`; closed over stochastic matrices.
    pub fn matmul(&self, other: &StochasticMatrix) -> StochasticMatrix {
        assert_eq!(self.m, other.m, "dimension mismatch");
        let m = self.m;
        let mut entries = vec![0.0; m * m];
        for r in 0..m {
            for k in 0..m {
                let a = self.entries[r * m + k];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.entries[k * m..(k + 1) * m];
                for c in 0..m {
                    entries[r * m + c] += a * orow[c];
                }
            }
        }
        StochasticMatrix { m, entries }
    }

    /// `A x` for a length-m vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.m, "dimension mismatch");
        (0..self.m)
            .map(|r| self.row(r).iter().zip(x).map(|(a, v)| a * v).sum())
            .collect()
    }

    /// Replaces rows `i` and `j` of `self` with their `alpha`-weighted
    /// combination, the effect of left-multiplying by the pairwise
    /// interaction matrix. O(m) instead of a full product.
    pub fn apply_interaction_left(&mut self, i: usize, j: usize, alpha: f64) {
        let m = self.m;
        for c in 0..m {
            let mixed = alpha * self.entries[i * m + c] + (1.0 - alpha) * self.entries[j * m + c];
            self.entries[i * m + c] = mixed;
            self.entries[j * m + c] = mixed;
        }
    }
}

/// Half the maximum L1 distance between rows: 0 for rank-one averaging,
/// 1 for the identity.
pub fn coefficient_of_ergodicity(a: &StochasticMatrix) -> f64 {
    let m = a.dim();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let d: f64 = a
                .row(i)
                .iter()
                .zip(a.row(j))
                .map(|(x, y)| (x - y).abs())
                .sum();
            worst = worst.max(d);
        }
    }
    0.5 * worst
}

/// Pairwise interaction matrix: identity except rows `i` and `j`, which both
/// become `alpha * e_i + (1 - alpha) * e_j`.
pub fn interaction_matrix(
    i: usize,
    j: usize,
    alpha: f64,
    m: usize,
) -> Result<StochasticMatrix, NetworkError> {
    if i == j {
        return Err(NetworkError::SelfCollaboration(i));
    }
    for idx in [i, j] {
        if idx >= m {
            return Err(NetworkError::AgentOutOfRange { index: idx, m });
        }
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(NetworkError::BadMixingWeight(alpha));
    }
    let mut a = StochasticMatrix::identity(m);
    a.entries[i * m + i] = alpha;
    a.entries[i * m + j] = 1.0 - alpha;
    a.entries[j * m + j] = 1.0 - alpha;
    a.entries[j * m + i] = alpha;
    Ok(a)
}

/// Agent-selection and collaboration parameters of one network scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CollaborationModel {
    m: usize,
    q: Vec<f64>,
    p: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    eps: Vec<f64>,
}

impl CollaborationModel {
    /// Validates selection probabilities `q` (nonnegative, summing to 1),
    /// the collaboration matrix `p` (row-stochastic with zero diagonal; the
    /// single-agent model carries the degenerate all-zero row), mixing
    /// weights in (0, 1], and crossover probabilities in (0, 0.5].
    pub fn new(
        q: Vec<f64>,
        p: Vec<Vec<f64>>,
        alpha: Vec<f64>,
        eps: Vec<f64>,
    ) -> Result<Self, NetworkError> {
        let m = q.len();
        if m == 0 {
            return Err(NetworkError::InvalidModel("no agents".into()));
        }
        if p.len() != m || alpha.len() != m || eps.len() != m {
            return Err(NetworkError::InvalidModel(format!(
                "field lengths disagree: q={}, p={}, alpha={}, eps={}",
                m,
                p.len(),
                alpha.len(),
                eps.len()
            )));
        }
        if q.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(NetworkError::InvalidModel(
                "selection probabilities must be nonnegative".into(),
            ));
        }
        let qsum: f64 = q.iter().sum();
        if (qsum - 1.0).abs() > ROW_SUM_TOL {
            return Err(NetworkError::InvalidModel(format!(
                "selection probabilities sum to {qsum}, expected 1"
            )));
        }
        for (r, row) in p.iter().enumerate() {
            if row.len() != m {
                return Err(NetworkError::InvalidModel(format!(
                    "collaboration row {r} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if row[r] != 0.0 {
                return Err(NetworkError::InvalidModel(format!(
                    "collaboration matrix diagonal must be zero, row {r} has {}",
                    row[r]
                )));
            }
            if row.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                return Err(NetworkError::InvalidModel(format!(
                    "collaboration row {r} has a negative entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            // A lone agent has nobody to collaborate with: allow the zero row.
            let expected = if m == 1 { 0.0 } else { 1.0 };
            if (sum - expected).abs() > ROW_SUM_TOL {
                return Err(NetworkError::InvalidModel(format!(
                    "collaboration row {r} sums to {sum}, expected {expected}"
                )));
            }
        }
        if alpha.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(NetworkError::InvalidModel(
                "mixing weights must lie in (0, 1]".into(),
            ));
        }
        if eps.iter().any(|e| !(*e > 0.0 && *e <= 0.5)) {
            return Err(NetworkError::InvalidModel(
                "crossover probabilities must lie in (0, 0.5]".into(),
            ));
        }
        Ok(CollaborationModel { m, q, p, alpha, eps })
    }

    pub fn agent_count(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Indices of agents with a strictly informative channel (eps < 1/2).
    pub fn reliable_agents(&self) -> Vec<usize> {
        (0..self.m).filter(|i| self.eps[*i] < 0.5).collect()
    }
}

/// Probability-weighted average of all pairwise interaction matrices.
pub fn expected_matrix(model: &CollaborationModel) -> StochasticMatrix {
    let m = model.agent_count();
    if m == 1 {
        return StochasticMatrix::identity(1);
    }
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        if model.q[i] == 0.0 {
            continue;
        }
        for j in 0..m {
            let w = model.q[i] * model.p[i][j];
            if w == 0.0 {
                continue;
            }
            // I_m plus the rank corrections of the pairwise matrix.
            for k in 0..m {
                if k != i && k != j {
                    entries[k * m + k] += w;
                }
            }
            entries[i * m + i] += w * model.alpha[i];
            entries[i * m + j] += w * (1.0 - model.alpha[i]);
            entries[j * m + i] += w * model.alpha[i];
            entries[j * m + j] += w * (1.0 - model.alpha[i]);
        }
    }
    StochasticMatrix { m, entries }
}

/// True iff the digraph of strictly positive entries is strongly connected.
pub fn is_irreducible(a: &StochasticMatrix) -> bool {
    let m = a.dim();
    let fwd: Vec<Vec<usize>> = (0..m)
        .map(|r| (0..m).filter(|c| a.get(r, *c) > 0.0).collect())
        .collect();
    let bwd: Vec<Vec<usize>> = (0..m)
        .map(|c| (0..m).filter(|r| a.get(*r, c) > 0.0).collect())
        .collect();
    reaches_all(&fwd, m) && reaches_all(&bwd, m)
}

fn reaches_all(adj: &[Vec<usize>], m: usize) -> bool {
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == m
}

/// Left Perron vector of an irreducible stochastic matrix: strictly positive
/// `v` with `v^T A = v^T`, normalized to sum 1.
///
/// Damped fixed-point iteration on the transpose action, converged when the
/// raw residual `||v^T A - v^T||_1` falls below [`PERRON_TOL`]. Damping keeps
/// the iteration convergent for periodic matrices at the same fixed point.
pub fn left_perron_vector(a: &StochasticMatrix) -> Result<Vec<f64>, NetworkError> {
    if !is_irreducible(a) {
        return Err(NetworkError::Reducible);
    }
    let m = a.dim();
    let mut v = vec![1.0 / m as f64; m];
    for _ in 0..PERRON_MAX_SWEEPS {
        let mut next = vec![0.0; m];
        for r in 0..m {
            let vr = v[r];
            if vr == 0.0 {
                continue;
            }
            for c in 0..m {
                next[c] += vr * a.get(r, c);
            }
        }
        let residual: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        if residual < PERRON_TOL {
            let sum: f64 = v.iter().sum();
            for x in &mut v {
                *x /= sum;
            }
            return Ok(v);
        }
        let mut sum = 0.0;
        for c in 0..m {
            next[c] = 0.5 * (next[c] + v[c]);
            sum += next[c];
        }
        for x in &mut next {
            *x /= sum;
        }
        v = next;
    }
    Err(NetworkError::PerronDiverged)
}

/// A sampled geometric random graph over the unit square together with the
/// induced selection distribution (uniform) and collaboration matrix
/// (uniform over each node's neighbors).
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    pub coords: Vec<(f64, f64)>,
    /// Undirected edges, each stored once with i < j.
    pub edges: Vec<(usize, usize)>,
    pub p: Vec<Vec<f64>>,
    pub q: Vec<f64>,
}

impl GeometricGraph {
    /// Attaches per-agent parameters, yielding a full collaboration model.
    pub fn collaboration_model(
        &self,
        alpha: Vec<f64>,
        eps: Vec<f64>,
    ) -> Result<CollaborationModel, NetworkError> {
        CollaborationModel::new(self.q.clone(), self.p.clone(), alpha, eps)
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let m = self.q.len();
        (0..m).filter(|j| self.p[i][*j] > 0.0).collect()
    }
}

/// Samples points uniformly on the unit square and connects pairs within
/// `radius`, resampling until the graph is connected (capped attempts).
pub fn geometric_random_graph<R: Rng>(
    m: usize,
    radius: f64,
    rng: &mut R,
) -> Result<GeometricGraph, NetworkError> {
    if m == 0 {
        return Err(NetworkError::InvalidModel("no agents".into()));
    }
    if !(radius > 0.0) {
        return Err(NetworkError::DisconnectedRadius { radius });
    }
    for _ in 0..GRAPH_ATTEMPT_CAP {
        let coords: Vec<(f64, f64)> = (0..m).map(|_| (rng.gen(), rng.gen())).collect();
        let mut adj = vec![Vec::new(); m];
        let mut edges = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let dx = coords[i].0 - coords[j].0;
                let dy = coords[i].1 - coords[j].1;
                if (dx * dx + dy * dy).sqrt() <= radius {
                    adj[i].push(j);
                    adj[j].push(i);
                    edges.push((i, j));
                }
            }
        }
        if !undirected_connected(&adj) {
            continue;
        }
        let q = vec![1.0 / m as f64; m];
        let p = (0..m)
            .map(|i| {
                let mut row = vec![0.0; m];
                let deg = adj[i].len();
                for &j in &adj[i] {
                    row[j] = 1.0 / deg as f64;
                }
                row
            })
            .collect();
        return Ok(GeometricGraph { coords, edges, p, q });
    }
    Err(NetworkError::DisconnectedRadius { radius })
}

fn undirected_connected(adj: &[Vec<usize>]) -> bool {
    reaches_all(adj, adj.len())
}

/// True iff every length-`r` window of the schedule has a strongly connected
/// union graph. Edge sets are directed `(from, to)` pairs over `m` nodes.
pub fn window_union_strongly_connected(
    m: usize,
    schedule: &[Vec<(usize, usize)>],
    r: usize,
) -> Result<bool, NetworkError> {
    if r == 0 || r > schedule.len() {
        return Err(NetworkError::BadWindow {
            r,
            len: schedule.len(),
        });
    }
    for start in 0..=schedule.len() - r {
        let mut fwd = vec![Vec::new(); m];
        let mut bwd = vec![Vec::new(); m];
        for edges in &schedule[start..start + r] {
            for &(a, b) in edges {
                fwd[a].push(b);
                bwd[b].push(a);
            }
        }
        if !(reaches_all(&fwd, m) && reaches_all(&bwd, m)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn averaging2() -> StochasticMatrix {
        StochasticMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn interaction_matrix_examples() {
        let a = interaction_matrix(0, 1, 0.5, 2).unwrap();
        assert_eq!(a.row(0), &[0.5, 0.5]);
        assert_eq!(a.row(1), &[0.5, 0.5]);

        let a = interaction_matrix(0, 2, 0.25, 3).unwrap();
        assert_eq!(a.row(0), &[0.25, 0.0, 0.75]);
        assert_eq!(a.row(1), &[0.0, 1.0, 0.0]);
        assert_eq!(a.row(2), &[0.25, 0.0, 0.75]);

        assert!(matches!(
            interaction_matrix(1, 1, 0.5, 3),
            Err(NetworkError::SelfCollaboration(1))
        ));
        assert!(interaction_matrix(0, 3, 0.5, 3).is_err());
        assert!(interaction_matrix(0, 1, 0.0, 3).is_err());
    }

    #[test]
    fn interaction_matrix_identity_rows() {
        for m in [2usize, 3, 6] {
            let a = interaction_matrix(0, m - 1, 0.7, m).unwrap();
            let id_rows = (0..m)
                .filter(|r| (0..m).all(|c| a.get(*r, c) == if *r == c { 1.0 } else { 0.0 }))
                .count();
            assert_eq!(id_rows, m.saturating_sub(2));
            assert!(coefficient_of_ergodicity(&a) <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn expected_matrix_examples() {
        let model = CollaborationModel::new(
            vec![0.5, 0.5],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0.5, 0.5],
            vec![0.45, 0.45],
        )
        .unwrap();
        let a = expected_matrix(&model);
        assert_eq!(a.row(0), &[0.5, 0.5]);
        assert_eq!(a.row(1), &[0.5, 0.5]);

        // Selection concentrated on agent 0 with alpha = 1: rows 0 and 1
        // both collapse onto e_0.
        let model = CollaborationModel::new(
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![1.0, 1.0],
            vec![0.45, 0.45],
        )
        .unwrap();
        let a = expected_matrix(&model);
        assert_eq!(a.row(0), &[1.0, 0.0]);
        assert_eq!(a.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn ergodicity_coefficient_examples() {
        assert_eq!(coefficient_of_ergodicity(&StochasticMatrix::identity(4)), 1.0);
        let flat = StochasticMatrix::from_rows(vec![vec![0.25; 4]; 4]).unwrap();
        assert_eq!(coefficient_of_ergodicity(&flat), 0.0);
        assert_eq!(coefficient_of_ergodicity(&averaging2()), 0.0);
    }

    #[test]
    fn irreducibility_examples() {
        assert!(!is_irreducible(&StochasticMatrix::identity(2)));
        assert!(is_irreducible(&averaging2()));
        let cycle = StochasticMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(is_irreducible(&cycle));
    }

    #[test]
    fn perron_vector_examples() {
        let v = left_perron_vector(&averaging2()).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12);

        let cycle = StochasticMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let v = left_perron_vector(&cycle).unwrap();
        for x in &v {
            assert!((x - 1.0 / 3.0).abs() < 1e-10);
        }

        // Doubly stochastic: uniform left eigenvector.
        let ds = StochasticMatrix::from_rows(vec![
            vec![0.6, 0.3, 0.1],
            vec![0.3, 0.4, 0.3],
            vec![0.1, 0.3, 0.6],
        ])
        .unwrap();
        let v = left_perron_vector(&ds).unwrap();
        for x in &v {
            assert!((x - 1.0 / 3.0).abs() < 1e-10);
        }

        assert!(matches!(
            left_perron_vector(&StochasticMatrix::identity(3)),
            Err(NetworkError::Reducible)
        ));
    }

    #[test]
    fn perron_residual_meets_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = geometric_random_graph(8, 0.6, &mut rng).unwrap();
            let model = g
                .collaboration_model(vec![0.5; 8], vec![0.45; 8])
                .unwrap();
            let a = expected_matrix(&model);
            let v = left_perron_vector(&a).unwrap();
            let av = {
                let mut out = vec![0.0; 8];
                for r in 0..8 {
                    for c in 0..8 {
                        out[c] += v[r] * a.get(r, c);
                    }
                }
                out
            };
            let residual: f64 = av.iter().zip(&v).map(|(x, y)| (x - y).abs()).sum();
            assert!(residual < 1e-11, "residual {residual}");
            assert!(v.iter().all(|x| *x > 0.0));
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_graph_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = geometric_random_graph(2, 2f64.sqrt() + 0.01, &mut rng).unwrap();
        assert_eq!(g.p, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(g.q, vec![0.5, 0.5]);
        assert_eq!(g.edges, vec![(0, 1)]);
    }

    #[test]
    fn geometric_graph_rows_stochastic_zero_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let g = geometric_random_graph(20, 0.35, &mut rng).unwrap();
            assert_eq!(g.q, vec![1.0 / 20.0; 20]);
            for (i, row) in g.p.iter().enumerate() {
                assert_eq!(row[i], 0.0);
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geometric_graph_infeasible_radius_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let err = geometric_random_graph(40, 1e-4, &mut rng).unwrap_err();
        assert!(matches!(err, NetworkError::DisconnectedRadius { .. }));
        assert!(err.to_string().contains("0.0001"));
    }

    #[test]
    fn window_union_examples() {
        let sc = vec![(0, 1), (1, 0)];
        let repeated = vec![sc.clone(); 5];
        assert!(window_union_strongly_connected(2, &repeated, 1).unwrap());

        let alternating: Vec<Vec<(usize, usize)>> = (0..6)
            .map(|t| {
                if t % 2 == 0 {
                    vec![(0, 1)]
                } else {
                    vec![(1, 0)]
                }
            })
            .collect();
        assert!(!window_union_strongly_connected(2, &alternating, 1).unwrap());
        assert!(window_union_strongly_connected(2, &alternating, 2).unwrap());

        assert!(window_union_strongly_connected(2, &alternating, 7).is_err());
        assert!(window_union_strongly_connected(2, &alternating, 0).is_err());
    }

    #[test]
    fn expected_matrix_of_geometric_model_is_irreducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let g = geometric_random_graph(12, 0.45, &mut rng).unwrap();
            let model = g
                .collaboration_model(vec![0.5; 12], vec![0.45; 12])
                .unwrap();
            assert!(is_irreducible(&expected_matrix(&model)));
        }
    }

    #[test]
    fn model_validation_errors() {
        // q does not sum to one
        assert!(CollaborationModel::new(
            vec![0.6, 0.6],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0.5; 2],
            vec![0.4; 2],
        )
        .is_err());
        // nonzero diagonal
        assert!(CollaborationModel::new(
            vec![0.5, 0.5],
            vec![vec![0.5, 0.5], vec![1.0, 0.0]],
            vec![0.5; 2],
            vec![0.4; 2],
        )
        .is_err());
        // alpha out of range
        assert!(CollaborationModel::new(
            vec![0.5, 0.5],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0.0, 0.5],
            vec![0.4; 2],
        )
        .is_err());
        // single-agent degenerate row is accepted
        assert!(CollaborationModel::new(vec![1.0], vec![vec![0.0]], vec![0.5], vec![0.3]).is_ok());
    }
}
