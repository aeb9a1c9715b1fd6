//! Binary symmetric channel responses and related information quantities.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("crossover probability {0} outside (0, 0.5]")]
    BadCrossover(f64),
    #[error("crossover probability {0} outside [0, 0.5]")]
    BadCapacityArg(f64),
}

/// Per-agent channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub eps: f64,
}

impl ChannelParams {
    pub fn new(eps: f64) -> Result<Self, ChannelError> {
        validate_crossover(eps)?;
        Ok(ChannelParams { eps })
    }
}

pub fn validate_crossover(eps: f64) -> Result<(), ChannelError> {
    if !(eps > 0.0 && eps <= 0.5) || !eps.is_finite() {
        return Err(ChannelError::BadCrossover(eps));
    }
    Ok(())
}

/// Passes the binary truth `z` through the channel, flipping it with
/// probability `eps`. Consumes exactly one uniform draw from `rng`.
pub fn respond<R: Rng>(z: bool, eps: f64, rng: &mut R) -> Result<bool, ChannelError> {
    validate_crossover(eps)?;
    let u: f64 = rng.gen();
    Ok(if u < eps { !z } else { z })
}

/// Observation likelihood of response `y` at state `x` for a query at
/// `x_hat`: `f1(y)` when `x <= x_hat`, `f0(y)` otherwise.
pub fn likelihood(y: bool, x: f64, x_hat: f64, eps: f64) -> Result<f64, ChannelError> {
    validate_crossover(eps)?;
    let f1 = if y { 1.0 - eps } else { eps };
    Ok(if x <= x_hat { f1 } else { 1.0 - f1 })
}

/// Capacity in bits of a binary symmetric channel with crossover `eps`,
/// with the convention `0 log 0 = 0`. Accepts the analytic endpoint 0.
pub fn capacity(eps: f64) -> Result<f64, ChannelError> {
    if !(0.0..=0.5).contains(&eps) || !eps.is_finite() {
        return Err(ChannelError::BadCapacityArg(eps));
    }
    let xlog2 = |p: f64| if p == 0.0 { 0.0 } else { p * p.log2() };
    Ok(1.0 + xlog2(eps) + xlog2(1.0 - eps))
}
