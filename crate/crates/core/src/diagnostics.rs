//! Numerical verification of the convergence theory on simulation states.
//!
//! Everything here is a pure function of recorded state: posterior-mass
//! spreads, the martingale identity checked by exact enumeration of all
//! `(i, j, y)` outcomes, the tilted-measure ratio whose decay drives the
//! consensus proof, and the per-window contraction inequality on the
//! dynamic range.

use rand::Rng;
use thiserror::Error;

use crate::belief::Belief;
use crate::engine::{self, EngineError, RunSetup, Trace};
use crate::network::{
    coefficient_of_ergodicity, expected_matrix, interaction_matrix, left_perron_vector,
    CollaborationModel, NetworkError, StochasticMatrix,
};

/// Hard bound on the martingale residual at any reachable state.
pub const MARTINGALE_RESIDUAL_MAX: f64 = 1e-10;

/// Hard lower bound on the tilted-measure ratio.
pub const LAMBDA_MIN: f64 = 1.0 - 1e-9;

/// Hard lower bound on the per-window contraction gap.
pub const LEMMA5_GAP_MIN: f64 = -1e-9;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("smoothing scale {0} must be positive")]
    BadGamma(f64),
    #[error("weights must be strictly positive")]
    NonPositiveWeight,
    #[error("window of {got} steps does not match the expected length {expected}")]
    IncompleteWindow { got: usize, expected: usize },
    #[error("effective iteration {idx} not recorded (trace has {len} snapshots)")]
    MissingSnapshot { idx: usize, len: usize },
}

/// A hard-invariant breach with the coordinates where it occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub eff_iter: usize,
    pub b: f64,
    pub value: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} invariant violated at (eff_iter {}, b {}): value {}",
            self.invariant, self.eff_iter, self.b, self.value
        )
    }
}

/// Spread of the posterior mass of `[0, b]` across agents.
pub fn dynamic_range(beliefs: &[Belief], b: f64) -> Result<f64, DiagnosticsError> {
    if beliefs.is_empty() {
        return Err(DiagnosticsError::EmptyInput("beliefs"));
    }
    let mut min = f64::MAX;
    let mut max = f64::MIN;
    for belief in beliefs {
        let f = belief.cdf(b).map_err(EngineError::from)?;
        min = min.min(f);
        max = max.max(f);
    }
    Ok(max - min)
}

/// `min(F(b), 1 - F(b))`, the mass of the smaller side of the query set.
pub fn mu(belief: &Belief, b: f64) -> Result<f64, DiagnosticsError> {
    let f = belief.cdf(b).map_err(EngineError::from)?;
    Ok(f.min(1.0 - f).clamp(0.0, 0.5))
}

fn check_dims(
    beliefs: &[Belief],
    model: &CollaborationModel,
    v: &[f64],
) -> Result<(), DiagnosticsError> {
    let m = model.agent_count();
    if beliefs.len() != m || v.len() != m {
        return Err(DiagnosticsError::DimensionMismatch(format!(
            "{} beliefs and {} weights for {} agents",
            beliefs.len(),
            v.len(),
            m
        )));
    }
    Ok(())
}

/// Tilted-measure ratio: the conditional expectation of
/// `exp(v' P_{t+1}(B)) / exp(v' P_t(B))` expanded over all collaborating
/// pairs. Bounded below by 1 and decaying to 1 along convergent runs.
///
/// `v` must be the left Perron vector of the expected interaction matrix.
pub fn lambda_t(
    beliefs: &[Belief],
    model: &CollaborationModel,
    v: &[f64],
    b: f64,
) -> Result<f64, DiagnosticsError> {
    check_dims(beliefs, model, v)?;
    let m = model.agent_count();
    let f: Vec<f64> = beliefs
        .iter()
        .map(|bel| bel.cdf(b))
        .collect::<Result<_, _>>()
        .map_err(EngineError::from)?;
    let mut sum = 0.0;
    for i in 0..m {
        if model.q()[i] == 0.0 {
            continue;
        }
        let mu_i = f[i].min(1.0 - f[i]).clamp(0.0, 0.5);
        let gain = model.alpha()[i] * (1.0 - 2.0 * model.eps()[i]) * mu_i;
        for j in 0..m {
            let w = model.q()[i] * model.p()[i][j];
            if w == 0.0 {
                continue;
            }
            // v' A_{i->j} P - v' P: only rows i and j of A differ from I.
            let vij = v[i] + v[j];
            let delta = (model.alpha()[i] * vij - v[i]) * f[i]
                + ((1.0 - model.alpha()[i]) * vij - v[j]) * f[j];
            sum += w * delta.exp() * (vij * gain).cosh();
        }
    }
    Ok(sum)
}

/// Per-agent cdf masses needed by the exact one-step expectation.
#[derive(Debug, Clone, Copy)]
pub struct AgentMassPoint {
    /// `F_i(b)`.
    pub f_at_b: f64,
    /// `F_i(x_hat_i)`, the mass at the agent's own median (1/2 up to float).
    pub f_at_median: f64,
    /// Whether `b <= x_hat_i`, deciding which likelihood branch covers `b`.
    pub b_le_median: bool,
}

impl AgentMassPoint {
    pub fn from_belief(belief: &Belief, b: f64) -> Result<Self, DiagnosticsError> {
        let x_hat = belief.median();
        Ok(AgentMassPoint {
            f_at_b: belief.cdf(b).map_err(EngineError::from)?,
            f_at_median: belief.cdf(x_hat).map_err(EngineError::from)?,
            b_le_median: b <= x_hat,
        })
    }
}

/// `|E[v' P_{t+1}(B) | state] - v' P_t(B)|` by exact enumeration of all
/// `2 M^2` outcomes `(i, j, y)`, each carrying probability
/// `q_i P_{i,j} / 2` (the response is equiprobable at a median query).
pub fn martingale_residual(
    beliefs: &[Belief],
    model: &CollaborationModel,
    v: &[f64],
    b: f64,
) -> Result<f64, DiagnosticsError> {
    check_dims(beliefs, model, v)?;
    let masses: Vec<AgentMassPoint> = beliefs
        .iter()
        .map(|bel| AgentMassPoint::from_belief(bel, b))
        .collect::<Result<_, _>>()?;
    martingale_residual_from_masses(&masses, model, v)
}

/// Enumeration core over precomputed masses, letting tests inject faults.
pub fn martingale_residual_from_masses(
    masses: &[AgentMassPoint],
    model: &CollaborationModel,
    v: &[f64],
) -> Result<f64, DiagnosticsError> {
    let m = model.agent_count();
    if masses.len() != m || v.len() != m {
        return Err(DiagnosticsError::DimensionMismatch(format!(
            "{} mass points and {} weights for {} agents",
            masses.len(),
            v.len(),
            m
        )));
    }
    let vp: f64 = (0..m).map(|k| v[k] * masses[k].f_at_b).sum();
    let mut expected = 0.0;
    for i in 0..m {
        if model.q()[i] == 0.0 {
            continue;
        }
        let eps = model.eps()[i];
        let alpha = model.alpha()[i];
        for j in 0..m {
            let w = model.q()[i] * model.p()[i][j];
            if w == 0.0 {
                continue;
            }
            for y in [false, true] {
                let f1 = if y { 1.0 - eps } else { eps };
                let f0 = 1.0 - f1;
                // Updated mass of [0, b] for agent i, applied analytically.
                let g = if masses[i].b_le_median {
                    2.0 * f1 * masses[i].f_at_b
                } else {
                    2.0 * f1 * masses[i].f_at_median
                        + 2.0 * f0 * (masses[i].f_at_b - masses[i].f_at_median)
                };
                let mixed = alpha * g + (1.0 - alpha) * masses[j].f_at_b;
                let vp_next =
                    vp - v[i] * masses[i].f_at_b - v[j] * masses[j].f_at_b + (v[i] + v[j]) * mixed;
                expected += w * 0.5 * vp_next;
            }
        }
    }
    Ok((expected - vp).abs())
}

/// One recorded asynchronous step inside a contraction window, carrying the
/// querying agent's belief from just before the step.
#[derive(Debug, Clone)]
pub struct WindowStep {
    pub i: usize,
    pub j: usize,
    pub y: bool,
    pub x_hat: f64,
    pub pre_belief_i: Belief,
}

/// Innovation injected by one step into the masses of `[0, b]`: the same
/// signed value at components `i` and `j`, zero elsewhere. Closed form
/// `±alpha_i (1 - 2 eps_i)` times the mass of the smaller side of the query.
pub fn innovation_vector(
    model: &CollaborationModel,
    step: &WindowStep,
    b: f64,
) -> Result<Vec<f64>, DiagnosticsError> {
    let m = model.agent_count();
    if step.i >= m || step.j >= m {
        return Err(DiagnosticsError::DimensionMismatch(format!(
            "step ({}, {}) outside {} agents",
            step.i, step.j, m
        )));
    }
    let f_b = step.pre_belief_i.cdf(b).map_err(EngineError::from)?;
    let side = if b <= step.x_hat { f_b } else { 1.0 - f_b };
    let sign = if step.y { 1.0 } else { -1.0 };
    let d = sign * model.alpha()[step.i] * (1.0 - 2.0 * model.eps()[step.i]) * side;
    let mut out = vec![0.0; m];
    out[step.i] = d;
    out[step.j] = d;
    Ok(out)
}

/// Same innovation computed by integrating the likelihood-ratio perturbation
/// against the pre-step density, using the realized median mass instead of
/// the exact 1/2. Agrees with [`innovation_vector`] at median queries; kept
/// as an independent route for cross-checking.
pub fn innovation_integral(
    model: &CollaborationModel,
    step: &WindowStep,
    b: f64,
) -> Result<f64, DiagnosticsError> {
    let eps = model.eps()[step.i];
    let f1 = if step.y { 1.0 - eps } else { eps };
    let f0 = 1.0 - f1;
    let f_cut = step
        .pre_belief_i
        .cdf(b.min(step.x_hat))
        .map_err(EngineError::from)?;
    let f_b = step.pre_belief_i.cdf(b).map_err(EngineError::from)?;
    let f_hat = step
        .pre_belief_i
        .cdf(step.x_hat)
        .map_err(EngineError::from)?;
    let above = (f_b - f_hat).max(0.0);
    Ok(model.alpha()[step.i] * ((2.0 * f1 - 1.0) * f_cut + (2.0 * f0 - 1.0) * above))
}

/// Contraction-inequality slack over one window of `R` recorded steps:
/// `tau1(A_{t+R-1} ... A_t) V_t(B) + sum_k range(d_{t+k+1}(B)) - V_{t+R}(B)`.
/// Nonnegative (within float) on every realized window.
pub fn lemma5_gap(
    start_beliefs: &[Belief],
    end_beliefs: &[Belief],
    steps: &[WindowStep],
    model: &CollaborationModel,
    b: f64,
) -> Result<f64, DiagnosticsError> {
    if steps.is_empty() {
        return Err(DiagnosticsError::IncompleteWindow {
            got: 0,
            expected: 1,
        });
    }
    let m = model.agent_count();
    if start_beliefs.len() != m || end_beliefs.len() != m {
        return Err(DiagnosticsError::DimensionMismatch(format!(
            "window endpoints have {} and {} beliefs for {} agents",
            start_beliefs.len(),
            end_beliefs.len(),
            m
        )));
    }
    let v_start = dynamic_range(start_beliefs, b)?;
    let v_end = dynamic_range(end_beliefs, b)?;

    // Chronological left-multiplication accumulates A_{t+R-1} ... A_t.
    let mut product = StochasticMatrix::identity(m);
    let mut innovation_ranges = 0.0;
    for step in steps {
        product.apply_interaction_left(step.i, step.j, model.alpha()[step.i]);
        let d = innovation_vector(model, step, b)?;
        let max = d.iter().cloned().fold(f64::MIN, f64::max);
        let min = d.iter().cloned().fold(f64::MAX, f64::min);
        innovation_ranges += max - min;
    }
    let tau = coefficient_of_ergodicity(&product);
    Ok(tau * v_start + innovation_ranges - v_end)
}

/// Weighted log posterior density at the true target.
/// Returns `-inf` when any weighted density has underflowed to zero.
pub fn log_belief_at_truth(
    beliefs: &[Belief],
    weights: &[f64],
    x_star: f64,
) -> Result<f64, DiagnosticsError> {
    if beliefs.is_empty() {
        return Err(DiagnosticsError::EmptyInput("beliefs"));
    }
    if beliefs.len() != weights.len() {
        return Err(DiagnosticsError::DimensionMismatch(format!(
            "{} beliefs, {} weights",
            beliefs.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(DiagnosticsError::NonPositiveWeight);
    }
    let mut sum = 0.0;
    for (bel, w) in beliefs.iter().zip(weights) {
        let p = bel.density_at(x_star).map_err(EngineError::from)?;
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        sum += w * p.ln();
    }
    Ok(sum)
}

/// Overflow-safe log-sum-exp envelopes of max and min:
/// `max <= smooth_max <= max + ln(M)/gamma` and symmetrically for the min.
pub fn smooth_extrema_bounds(a: &[f64], gamma: f64) -> Result<(f64, f64), DiagnosticsError> {
    if a.is_empty() {
        return Err(DiagnosticsError::EmptyInput("vector"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(DiagnosticsError::BadGamma(gamma));
    }
    let lse = |sign: f64| {
        let shift = a
            .iter()
            .map(|x| sign * x)
            .fold(f64::MIN, f64::max);
        let sum: f64 = a.iter().map(|x| ((sign * x - shift) * gamma).exp()).sum();
        sign * (shift + sum.ln() / gamma)
    };
    Ok((lse(1.0), lse(-1.0)))
}

/// Average and worst-case RMSE of the median estimates at one effective
/// iteration, pooled over a collection of trial traces.
pub fn rmse_metrics(traces: &[&Trace], eff_iter: usize) -> Result<(f64, f64), DiagnosticsError> {
    if traces.is_empty() {
        return Err(DiagnosticsError::EmptyInput("traces"));
    }
    let mut avg_acc = 0.0;
    let mut max_acc = 0.0;
    for trace in traces {
        let snap = trace
            .snapshots
            .get(eff_iter)
            .ok_or(DiagnosticsError::MissingSnapshot {
                idx: eff_iter,
                len: trace.snapshots.len(),
            })?;
        let mut sq_sum = 0.0;
        let mut sq_max = 0.0f64;
        for agent in &snap.agents {
            let e = agent.median - trace.x_star;
            sq_sum += e * e;
            sq_max = sq_max.max(e * e);
        }
        avg_acc += sq_sum / snap.agents.len() as f64;
        max_acc += sq_max;
    }
    let t = traces.len() as f64;
    Ok(((avg_acc / t).sqrt(), (max_acc / t).sqrt()))
}

/// Ordinary least-squares slope of `y` against its index. Non-finite points
/// are excluded.
pub fn least_squares_slope(y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = y
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, v)| (i as f64, *v))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    num / den
}

/// One diagnostics record at `(eff_iter, b)`.
#[derive(Debug, Clone)]
pub struct DiagRow {
    pub eff_iter: usize,
    pub b: f64,
    pub dynamic_range: f64,
    pub lambda: f64,
    pub martingale_residual: f64,
    pub lemma5_gap: f64,
    /// Perron-weighted log density at the target (shared across b).
    pub log_belief: f64,
    /// Per-agent `mu` values at this `(eff_iter, b)`.
    pub mu: Vec<f64>,
}

/// Full diagnostics of one asynchronous run.
#[derive(Debug)]
pub struct DiagnosticsRun {
    pub trace: Trace,
    pub rows: Vec<DiagRow>,
    pub perron: Vec<f64>,
    /// First hard-invariant breach, if any.
    pub violation: Option<Violation>,
}

/// Runs the asynchronous algorithm while evaluating the full diagnostic
/// series at every effective iteration. The contraction window spans the
/// `M` steps of each iteration.
pub fn run_with_diagnostics<R: Rng>(
    setup: &RunSetup,
    rng: &mut R,
) -> Result<DiagnosticsRun, DiagnosticsError> {
    let model = setup.model;
    let m = model.agent_count();
    if m < 2 {
        return Err(EngineError::TooFewAgents {
            algo: "async",
            min: 2,
            m,
        }
        .into());
    }
    let perron = left_perron_vector(&expected_matrix(model))?;

    let mut state = engine::SimulationState::from_uniform_priors(m, setup.x_star)?;
    if let Some(priors) = setup.priors {
        if priors.len() != m {
            return Err(EngineError::PriorCountMismatch(priors.len(), m).into());
        }
        state.beliefs = priors.to_vec();
    }
    let mut trace = Trace {
        algo: engine::Algo::Async,
        x_star: setup.x_star,
        b_grid: setup.b_grid.to_vec(),
        seed: setup.seed,
        fingerprint: setup.fingerprint,
        snapshots: Vec::with_capacity(setup.eff_iters + 1),
        events: Vec::new(),
        responses: 0,
    };
    trace.snapshots.push(engine::Snapshot {
        eff_iter: 0,
        agents: engine::snapshot_agents(&state.beliefs, setup.b_grid, setup.x_star)?,
    });

    let mut rows = Vec::with_capacity(setup.eff_iters * setup.b_grid.len());
    let mut violation: Option<Violation> = None;
    let mut prev_beliefs = state.beliefs.clone();

    for iter in 1..=setup.eff_iters {
        let mut steps = Vec::with_capacity(m);
        for _ in 0..m {
            let (event, pre_belief_i) = engine::async_step_captured(&mut state, model, rng)?;
            trace.responses += 1;
            steps.push(WindowStep {
                i: event.i,
                j: event.j,
                y: event.y,
                x_hat: event.x_hat,
                pre_belief_i,
            });
            trace.events.push(event);
        }
        trace.snapshots.push(engine::Snapshot {
            eff_iter: iter,
            agents: engine::snapshot_agents(&state.beliefs, setup.b_grid, setup.x_star)?,
        });

        let log_belief = log_belief_at_truth(&state.beliefs, &perron, setup.x_star)?;
        for &b in setup.b_grid {
            let v_range = dynamic_range(&state.beliefs, b)?;
            let lambda = lambda_t(&state.beliefs, model, &perron, b)?;
            let residual = martingale_residual(&state.beliefs, model, &perron, b)?;
            let gap = lemma5_gap(&prev_beliefs, &state.beliefs, &steps, model, b)?;
            let mu_vec: Vec<f64> = state
                .beliefs
                .iter()
                .map(|bel| mu(bel, b))
                .collect::<Result<_, _>>()?;
            if violation.is_none() {
                if residual >= MARTINGALE_RESIDUAL_MAX {
                    violation = Some(Violation {
                        invariant: "martingale residual",
                        eff_iter: iter,
                        b,
                        value: residual,
                    });
                } else if lambda < LAMBDA_MIN {
                    violation = Some(Violation {
                        invariant: "lambda lower bound",
                        eff_iter: iter,
                        b,
                        value: lambda,
                    });
                } else if gap < LEMMA5_GAP_MIN {
                    violation = Some(Violation {
                        invariant: "contraction gap",
                        eff_iter: iter,
                        b,
                        value: gap,
                    });
                }
            }
            rows.push(DiagRow {
                eff_iter: iter,
                b,
                dynamic_range: v_range,
                lambda,
                martingale_residual: residual,
                lemma5_gap: gap,
                log_belief,
                mu: mu_vec,
            });
        }
        prev_beliefs = state.beliefs.clone();
    }
    Ok(DiagnosticsRun {
        trace,
        rows,
        perron,
        violation,
    })
}

/// Builds the realized interaction matrix of one recorded step.
pub fn step_interaction_matrix(
    model: &CollaborationModel,
    step: &WindowStep,
) -> Result<StochasticMatrix, DiagnosticsError> {
    Ok(interaction_matrix(
        step.i,
        step.j,
        model.alpha()[step.i],
        model.agent_count(),
    )?)
}
