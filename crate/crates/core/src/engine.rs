//! Time-stepped execution of the decentralized bisection search and its
//! comparator baselines, producing reproducible traces.
//!
//! One *effective iteration* is a block of `M` channel queries, which makes
//! query budgets comparable across the four runners: the asynchronous
//! algorithm performs `M` pairwise steps per effective iteration, while the
//! synchronous, no-sharing, and centralized baselines query every agent once.

use rand::Rng;
use thiserror::Error;

use crate::belief::{Belief, BeliefError};
use crate::channel::{self, ChannelError};
use crate::network::{CollaborationModel, NetworkError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("target position {0} outside the unit interval")]
    BadTarget(f64),
    #[error("snapshot grid point {0} outside the unit interval")]
    BadGridPoint(f64),
    #[error("algorithm {algo} requires at least {min} agents, model has {m}")]
    TooFewAgents {
        algo: &'static str,
        min: usize,
        m: usize,
    },
    #[error("{0} priors supplied for {1} agents")]
    PriorCountMismatch(usize, usize),
}

/// The four runners compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    /// Randomized pairwise collaboration (the main algorithm).
    Async,
    /// All agents query, then beliefs are averaged over fixed neighborhoods.
    Sync,
    /// Independent probabilistic bisection per agent.
    NoSharing,
    /// One shared posterior updated by every agent's channel in sequence.
    Centralized,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Async => "async",
            Algo::Sync => "sync",
            Algo::NoSharing => "none",
            Algo::Centralized => "central",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "async" => Some(Algo::Async),
            "sync" => Some(Algo::Sync),
            "none" => Some(Algo::NoSharing),
            "central" => Some(Algo::Centralized),
            _ => None,
        }
    }

    pub const ALL: [Algo; 4] = [Algo::Async, Algo::Sync, Algo::NoSharing, Algo::Centralized];
}

/// Mutable state of one run: per-agent beliefs, the step counter, and the
/// fixed target position.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub beliefs: Vec<Belief>,
    pub t: u64,
    pub x_star: f64,
}

impl SimulationState {
    pub fn from_uniform_priors(m: usize, x_star: f64) -> Result<Self, EngineError> {
        if !(0.0..=1.0).contains(&x_star) {
            return Err(EngineError::BadTarget(x_star));
        }
        Ok(SimulationState {
            beliefs: vec![Belief::uniform(); m],
            t: 0,
            x_star,
        })
    }
}

/// One asynchronous step: agent `i` queried at `x_hat`, channel input `z`,
/// response `y`, collaborator `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionEvent {
    pub t: u64,
    pub i: usize,
    pub j: usize,
    pub x_hat: f64,
    pub z: bool,
    pub y: bool,
}

/// Per-agent estimates recorded at one effective iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSnapshot {
    pub median: f64,
    pub mean: f64,
    /// Posterior cdf evaluated on the diagnostic grid.
    pub cdf: Vec<f64>,
    /// Natural log of the density at the true target.
    pub log_density_at_target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub eff_iter: usize,
    pub agents: Vec<AgentSnapshot>,
}

/// Full record of one run: snapshots every effective iteration (including
/// the initial state), the asynchronous event log, the channel-response
/// count, and enough metadata to reproduce the run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub algo: Algo,
    pub x_star: f64,
    pub b_grid: Vec<f64>,
    pub seed: u64,
    pub fingerprint: u64,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<InteractionEvent>,
    pub responses: u64,
}

/// Immutable inputs shared by all runners.
#[derive(Debug, Clone, Copy)]
pub struct RunSetup<'a> {
    pub model: &'a CollaborationModel,
    pub x_star: f64,
    pub b_grid: &'a [f64],
    pub eff_iters: usize,
    /// Recorded into the trace; the caller derives the actual stream.
    pub seed: u64,
    pub fingerprint: u64,
    pub priors: Option<&'a [Belief]>,
}

impl<'a> RunSetup<'a> {
    fn initial_state(&self) -> Result<SimulationState, EngineError> {
        let m = self.model.agent_count();
        for &b in self.b_grid {
            if !(0.0..=1.0).contains(&b) {
                return Err(EngineError::BadGridPoint(b));
            }
        }
        let mut state = SimulationState::from_uniform_priors(m, self.x_star)?;
        if let Some(priors) = self.priors {
            if priors.len() != m {
                return Err(EngineError::PriorCountMismatch(priors.len(), m));
            }
            state.beliefs = priors.to_vec();
        }
        Ok(state)
    }

    fn empty_trace(&self, algo: Algo) -> Trace {
        Trace {
            algo,
            x_star: self.x_star,
            b_grid: self.b_grid.to_vec(),
            seed: self.seed,
            fingerprint: self.fingerprint,
            snapshots: Vec::with_capacity(self.eff_iters + 1),
            events: Vec::new(),
            responses: 0,
        }
    }
}

pub fn snapshot_agents(
    beliefs: &[Belief],
    b_grid: &[f64],
    x_star: f64,
) -> Result<Vec<AgentSnapshot>, EngineError> {
    beliefs
        .iter()
        .map(|b| {
            let cdf = b_grid
                .iter()
                .map(|&x| b.cdf(x))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(AgentSnapshot {
                median: b.median(),
                mean: b.mean(),
                cdf,
                log_density_at_target: b.density_at(x_star)?.ln(),
            })
        })
        .collect()
}

fn push_snapshot(trace: &mut Trace, eff_iter: usize, state: &SimulationState) -> Result<(), EngineError> {
    let agents = snapshot_agents(&state.beliefs, &trace.b_grid, state.x_star)?;
    trace.snapshots.push(Snapshot { eff_iter, agents });
    Ok(())
}

/// Inverse-cdf sample from a probability row, consuming one uniform draw.
/// Falls back to the last strictly positive entry under float shortfall.
fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (idx, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = idx;
            acc += p;
            if u < acc {
                return idx;
            }
        }
    }
    last_positive
}

/// One step of the asynchronous algorithm. Draw order is fixed: the querying
/// agent `i ~ q`, the collaborator `j ~ P[i]`, then the channel response.
pub fn async_step<R: Rng>(
    state: &mut SimulationState,
    model: &CollaborationModel,
    rng: &mut R,
) -> Result<InteractionEvent, EngineError> {
    async_step_captured(state, model, rng).map(|(event, _)| event)
}

/// [`async_step`] that also returns the querying agent's belief from just
/// before the update, which window diagnostics need.
pub fn async_step_captured<R: Rng>(
    state: &mut SimulationState,
    model: &CollaborationModel,
    rng: &mut R,
) -> Result<(InteractionEvent, Belief), EngineError> {
    let i = sample_index(model.q(), rng);
    let j = sample_index(&model.p()[i], rng);
    let pre_belief = state.beliefs[i].clone();
    let x_hat = state.beliefs[i].median();
    let z = state.x_star <= x_hat;
    let y = channel::respond(z, model.eps()[i], rng)?;
    let updated = state.beliefs[i].bayes_bisection_update_unchecked(y, model.eps()[i], x_hat)?;
    let mixed = Belief::mix(model.alpha()[i], &updated, &state.beliefs[j])?;
    state.beliefs[j] = mixed.clone();
    state.beliefs[i] = mixed;
    let event = InteractionEvent {
        t: state.t,
        i,
        j,
        x_hat,
        z,
        y,
    };
    state.t += 1;
    Ok((event, pre_belief))
}

/// Runs the asynchronous algorithm for `eff_iters * M` steps, recording a
/// snapshot every `M` steps.
pub fn run_async<R: Rng>(setup: &RunSetup, rng: &mut R) -> Result<Trace, EngineError> {
    let m = setup.model.agent_count();
    if m < 2 {
        return Err(EngineError::TooFewAgents {
            algo: "async",
            min: 2,
            m,
        });
    }
    let mut state = setup.initial_state()?;
    let mut trace = setup.empty_trace(Algo::Async);
    push_snapshot(&mut trace, 0, &state)?;
    for iter in 1..=setup.eff_iters {
        for _ in 0..m {
            let event = async_step(&mut state, setup.model, rng)?;
            trace.events.push(event);
            trace.responses += 1;
        }
        push_snapshot(&mut trace, iter, &state)?;
    }
    Ok(trace)
}

/// Row-stochastic averaging weights over closed neighborhoods: each agent
/// mixes uniformly over itself plus the agents it can collaborate with.
pub fn closed_neighborhood_weights(model: &CollaborationModel) -> Vec<Vec<f64>> {
    let m = model.agent_count();
    (0..m)
        .map(|i| {
            let nbrs: Vec<usize> = (0..m).filter(|j| model.p()[i][*j] > 0.0).collect();
            let w = 1.0 / (nbrs.len() + 1) as f64;
            let mut row = vec![0.0; m];
            row[i] = w;
            for j in nbrs {
                row[j] = w;
            }
            row
        })
        .collect()
}

/// Synchronous comparator: every agent bisects and updates its own belief,
/// then all beliefs are replaced by the fixed neighborhood average.
pub fn run_synchronous<R: Rng>(setup: &RunSetup, rng: &mut R) -> Result<Trace, EngineError> {
    let m = setup.model.agent_count();
    let weights = closed_neighborhood_weights(setup.model);
    let mut state = setup.initial_state()?;
    let mut trace = setup.empty_trace(Algo::Sync);
    push_snapshot(&mut trace, 0, &state)?;
    for iter in 1..=setup.eff_iters {
        let mut updated = Vec::with_capacity(m);
        for i in 0..m {
            let x_hat = state.beliefs[i].median();
            let z = state.x_star <= x_hat;
            let y = channel::respond(z, setup.model.eps()[i], rng)?;
            trace.responses += 1;
            updated
                .push(state.beliefs[i].bayes_bisection_update_unchecked(y, setup.model.eps()[i], x_hat)?);
        }
        state.beliefs = (0..m)
            .map(|i| {
                let parts: Vec<(f64, &Belief)> = (0..m)
                    .filter(|j| weights[i][*j] > 0.0)
                    .map(|j| (weights[i][j], &updated[j]))
                    .collect();
                Belief::convex_combination(&parts)
            })
            .collect::<Result<_, _>>()?;
        state.t += m as u64;
        push_snapshot(&mut trace, iter, &state)?;
    }
    Ok(trace)
}

/// No-sharing comparator: independent probabilistic bisection per agent.
pub fn run_no_sharing<R: Rng>(setup: &RunSetup, rng: &mut R) -> Result<Trace, EngineError> {
    let m = setup.model.agent_count();
    let mut state = setup.initial_state()?;
    let mut trace = setup.empty_trace(Algo::NoSharing);
    push_snapshot(&mut trace, 0, &state)?;
    for iter in 1..=setup.eff_iters {
        for i in 0..m {
            let x_hat = state.beliefs[i].median();
            let z = state.x_star <= x_hat;
            let y = channel::respond(z, setup.model.eps()[i], rng)?;
            trace.responses += 1;
            state.beliefs[i] =
                state.beliefs[i].bayes_bisection_update_unchecked(y, setup.model.eps()[i], x_hat)?;
        }
        state.t += m as u64;
        push_snapshot(&mut trace, iter, &state)?;
    }
    Ok(trace)
}

/// Centralized comparator: a single shared posterior bisected by each agent
/// in sequence, `M` sequential updates per effective iteration. Snapshots
/// replicate the shared posterior across all agents; the agent snapshot is
/// computed once per iteration since every copy is identical.
pub fn run_centralized<R: Rng>(setup: &RunSetup, rng: &mut R) -> Result<Trace, EngineError> {
    let m = setup.model.agent_count();
    let state = setup.initial_state()?;
    let mut shared = state.beliefs[0].clone();
    let mut trace = setup.empty_trace(Algo::Centralized);
    let push_replicated =
        |trace: &mut Trace, eff_iter: usize, shared: &Belief| -> Result<(), EngineError> {
            let one = snapshot_agents(std::slice::from_ref(shared), &trace.b_grid, setup.x_star)?;
            trace.snapshots.push(Snapshot {
                eff_iter,
                agents: vec![one[0].clone(); m],
            });
            Ok(())
        };
    push_replicated(&mut trace, 0, &shared)?;
    for iter in 1..=setup.eff_iters {
        for i in 0..m {
            let x_hat = shared.median();
            let z = setup.x_star <= x_hat;
            let y = channel::respond(z, setup.model.eps()[i], rng)?;
            trace.responses += 1;
            shared = shared.bayes_bisection_update_unchecked(y, setup.model.eps()[i], x_hat)?;
        }
        push_replicated(&mut trace, iter, &shared)?;
    }
    Ok(trace)
}

pub fn run<R: Rng>(algo: Algo, setup: &RunSetup, rng: &mut R) -> Result<Trace, EngineError> {
    match algo {
        Algo::Async => run_async(setup, rng),
        Algo::Sync => run_synchronous(setup, rng),
        Algo::NoSharing => run_no_sharing(setup, rng),
        Algo::Centralized => run_centralized(setup, rng),
    }
}
