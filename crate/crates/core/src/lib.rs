//! Simulator and diagnostics for asynchronous decentralized probabilistic
//! bisection search ("noisy twenty questions") over time-varying networks.
//!
//! A network of agents searches for an unknown target in `[0, 1]`. At each
//! step a randomly selected agent bisects its posterior at the median, asks
//! a noisy binary channel whether the target lies below the query point,
//! refines its belief by Bayes' rule, and averages the result with one
//! randomly chosen collaborator. The crate provides:
//!
//! - [`belief`]: exact piecewise-constant posteriors with the bisection
//!   Bayes update and convex mixing.
//! - [`channel`]: binary symmetric channel responses, likelihoods, capacity.
//! - [`network`]: collaboration models, interaction-matrix algebra,
//!   ergodicity coefficients, Perron vectors, geometric random graphs.
//! - [`engine`]: reproducible runners for the asynchronous algorithm and
//!   its synchronous, no-sharing, and centralized baselines.
//! - [`diagnostics`]: numerical checks of the convergence theory
//!   (martingale identity, tilted-measure ratio, contraction windows,
//!   log-density drift, RMSE metrics).
//! - [`config`] / [`experiment`]: experiment configs, Monte-Carlo
//!   orchestration, and CSV export.

pub mod belief;
pub mod channel;
pub mod config;
pub mod diagnostics;
pub mod engine;
pub mod experiment;
pub mod network;

pub use belief::Belief;
pub use config::ExperimentConfig;
pub use engine::{Algo, InteractionEvent, SimulationState, Trace};
pub use network::{CollaborationModel, StochasticMatrix};
