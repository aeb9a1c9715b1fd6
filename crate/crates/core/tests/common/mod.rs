//! Shared test utilities: a grid-discretized numerical reference for the
//! belief operations, and generators for randomized inputs.
//!
//! The oracle keeps densities on a ragged grid seeded with 10,000 uniform
//! bins, accumulates cdf values by linear scan, and renormalizes by numeric
//! summation. It shares no code with the exact piecewise implementation.

use bisectnet::Belief;
use rand::Rng;

pub const ORACLE_BINS: usize = 10_000;

/// Independent numerical implementation of the belief operations on a
/// bin grid. Query cuts are inserted as extra edges; nothing is merged.
pub struct GridOracle {
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl GridOracle {
    /// Samples a belief onto the uniform base grid. Exact whenever the
    /// belief's breakpoints are multiples of the bin width.
    pub fn from_belief(b: &Belief) -> Self {
        let edges: Vec<f64> = (0..=ORACLE_BINS)
            .map(|k| k as f64 / ORACLE_BINS as f64)
            .collect();
        let values: Vec<f64> = (0..ORACLE_BINS)
            .map(|k| b.density_at(edges[k]).unwrap())
            .collect();
        let mut oracle = GridOracle { edges, values };
        oracle.normalize();
        oracle
    }

    fn total(&self) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.values.len() {
            acc += self.values[k] * (self.edges[k + 1] - self.edges[k]);
        }
        acc
    }

    fn normalize(&mut self) {
        let total = self.total();
        for v in &mut self.values {
            *v /= total;
        }
    }

    fn insert_edge(&mut self, x: f64) {
        if x <= 0.0 || x >= 1.0 {
            return;
        }
        let idx = self.edges.partition_point(|e| *e < x);
        if self.edges[idx] == x {
            return;
        }
        self.edges.insert(idx, x);
        self.values.insert(idx, self.values[idx - 1]);
    }

    pub fn bayes_update(&mut self, y: bool, eps: f64, x_hat: f64) {
        self.insert_edge(x_hat);
        let f1 = if y { 1.0 - eps } else { eps };
        let f0 = 1.0 - f1;
        for k in 0..self.values.len() {
            self.values[k] *= if self.edges[k + 1] <= x_hat {
                2.0 * f1
            } else {
                2.0 * f0
            };
        }
        self.normalize();
    }

    /// Replaces the state with `alpha * self + (1 - alpha) * other`.
    pub fn mix_with_belief(&mut self, alpha: f64, other: &Belief) {
        let mut edges = self.edges.clone();
        edges.extend_from_slice(other.breakpoints());
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let mut cursor = 0usize;
        let mut values = Vec::with_capacity(edges.len() - 1);
        for k in 0..edges.len() - 1 {
            let left = edges[k];
            while self.edges[cursor + 1] <= left {
                cursor += 1;
            }
            let own = self.values[cursor];
            let theirs = other.density_at(left).unwrap();
            values.push(alpha * own + (1.0 - alpha) * theirs);
        }
        self.edges = edges;
        self.values = values;
        self.normalize();
    }

    /// Sup-norm cdf distance against the exact implementation, probed at
    /// every oracle edge and every bin midpoint in one accumulating sweep.
    pub fn sup_cdf_distance(&self, exact: &Belief) -> f64 {
        let mut worst = 0.0f64;
        let mut acc = 0.0;
        for k in 0..self.values.len() {
            let (l, r) = (self.edges[k], self.edges[k + 1]);
            let d = (acc - exact.cdf(l).unwrap()).abs();
            worst = worst.max(d);
            let mid = 0.5 * (l + r);
            let d = (acc + self.values[k] * (mid - l) - exact.cdf(mid).unwrap()).abs();
            worst = worst.max(d);
            acc += self.values[k] * (r - l);
        }
        worst.max((acc - exact.cdf(1.0).unwrap()).abs())
    }
}

/// Random piecewise-constant density whose breakpoints sit on the oracle's
/// base grid, so the oracle ingests it exactly.
pub fn random_aligned_belief<R: Rng>(rng: &mut R) -> Belief {
    let cuts = rng.gen_range(0..8usize);
    let mut interior: Vec<u32> = (0..cuts)
        .map(|_| rng.gen_range(1..ORACLE_BINS as u32))
        .collect();
    interior.sort_unstable();
    interior.dedup();
    let mut breakpoints = vec![0.0];
    breakpoints.extend(interior.iter().map(|k| *k as f64 / ORACLE_BINS as f64));
    breakpoints.push(1.0);
    let values: Vec<f64> = (0..breakpoints.len() - 1)
        .map(|_| rng.gen_range(0.1..3.0))
        .collect();
    Belief::new(breakpoints, values).unwrap()
}

/// Random unnormalized-then-validated belief with arbitrary breakpoints.
pub fn random_belief<R: Rng>(rng: &mut R) -> Belief {
    let cuts = rng.gen_range(0..10usize);
    let mut breakpoints = vec![0.0, 1.0];
    for _ in 0..cuts {
        breakpoints.push(rng.gen_range(1e-6..1.0 - 1e-6));
    }
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let values: Vec<f64> = (0..breakpoints.len() - 1)
        .map(|_| rng.gen_range(0.05..4.0))
        .collect();
    Belief::new(breakpoints, values).unwrap()
}

/// Random row-stochastic matrix with a configurable zero-entry rate.
pub fn random_stochastic<R: Rng>(m: usize, sparsity: f64, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let mut rows = Vec::with_capacity(m);
        let mut ok = true;
        for _ in 0..m {
            let mut row: Vec<f64> = (0..m)
                .map(|_| {
                    if rng.gen::<f64>() < sparsity {
                        0.0
                    } else {
                        rng.gen_range(0.01..1.0)
                    }
                })
                .collect();
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                ok = false;
                break;
            }
            for v in &mut row {
                *v /= sum;
            }
            rows.push(row);
        }
        if ok {
            return rows;
        }
    }
}
