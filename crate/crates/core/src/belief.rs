//! Piecewise-constant posterior densities on the unit interval.
//!
//! A [`Belief`] is an agent's posterior over the target position, stored as
//! exact segment breakpoints plus one density value per segment. Both the
//! bisection Bayes update and convex mixing map piecewise-constant densities
//! to piecewise-constant densities, so the whole simulation runs without any
//! discretization drift.

use thiserror::Error;

/// Absolute tolerance on |F(x_hat) - 1/2| for the Bayes update precondition.
pub const MEDIAN_TOL: f64 = 1e-9;

/// Absolute tolerance on the total integral of a valid density.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BeliefError {
    #[error("position {0} outside the unit interval")]
    OutOfDomain(f64),
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("crossover probability {0} outside (0, 0.5]")]
    BadCrossover(f64),
    #[error("mixing weight {0} outside [0, 1]")]
    BadWeight(f64),
    #[error("query point {x_hat} is not the median: cdf mass {mass} differs from 1/2 by more than {MEDIAN_TOL}")]
    NotMedian { x_hat: f64, mass: f64 },
    #[error("invalid belief: {0}")]
    Invalid(String),
}

/// Posterior density over `[0, 1]`, piecewise constant between breakpoints.
///
/// Invariants, enforced at construction and after every operation:
/// breakpoints strictly increase from 0 to 1, densities are nonnegative and
/// finite, the total integral is 1 within [`MASS_TOL`], and no two adjacent
/// segments carry exactly equal values (they are merged).
#[derive(Debug, Clone)]
pub struct Belief {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    // cum[k] = integral over [0, breakpoints[k]); cached for O(log n) queries.
    cum: Vec<f64>,
}

impl PartialEq for Belief {
    fn eq(&self, other: &Self) -> bool {
        self.breakpoints == other.breakpoints && self.values == other.values
    }
}

impl Belief {
    /// The uniform prior: a single segment of density 1.
    pub fn uniform() -> Self {
        Belief {
            breakpoints: vec![0.0, 1.0],
            values: vec![1.0],
            cum: vec![0.0, 1.0],
        }
    }

    /// Builds a belief from raw segments, renormalizing to unit mass.
    ///
    /// `breakpoints` must strictly increase from 0 to 1 and `values` must hold
    /// one finite nonnegative density per segment with positive total mass.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, BeliefError> {
        if breakpoints.len() < 2 {
            return Err(BeliefError::Invalid("need at least two breakpoints".into()));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(BeliefError::Invalid(format!(
                "{} breakpoints require {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(BeliefError::Invalid(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(BeliefError::Invalid(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(BeliefError::Invalid(
                "densities must be finite and nonnegative".into(),
            ));
        }
        let mut b = Belief {
            breakpoints,
            values,
            cum: Vec::new(),
        };
        b.normalize()?;
        Ok(b)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn segment_count(&self) -> usize {
        self.values.len()
    }

    /// Total integral of the stored density (1 within [`MASS_TOL`]).
    pub fn total_mass(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Cumulative distribution function `F(x)`.
    pub fn cdf(&self, x: f64) -> Result<f64, BeliefError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(BeliefError::OutOfDomain(x));
        }
        let k = self.segment_of(x);
        Ok(self.cum[k] + self.values[k] * (x - self.breakpoints[k]))
    }

    /// Leftmost position `x` with `F(x) >= u`.
    pub fn quantile(&self, u: f64) -> Result<f64, BeliefError> {
        if !(0.0..=1.0).contains(&u) {
            return Err(BeliefError::BadProbability(u));
        }
        if u <= 0.0 {
            return Ok(0.0);
        }
        // First k with cum[k] >= u; the crossing lies in segment k-1.
        let idx = self.cum.partition_point(|c| *c < u);
        if idx == 0 {
            return Ok(0.0);
        }
        if idx > self.values.len() {
            // u exceeds the stored total mass by float dust.
            return Ok(1.0);
        }
        let k = idx - 1;
        let v = self.values[k];
        if v <= 0.0 {
            // Only reachable when u == cum[k] on a zero-density plateau;
            // its left end is the leftmost point attaining the mass.
            return Ok(self.breakpoints[k]);
        }
        let x = self.breakpoints[k] + (u - self.cum[k]) / v;
        Ok(x.clamp(self.breakpoints[k], self.breakpoints[k + 1]))
    }

    /// Median of the posterior, the bisection query point.
    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid probability")
    }

    /// Exact first moment of the density. Computed as segment mass times
    /// midpoint, which stays stable for ulp-wide segments where `r^2 - l^2`
    /// would cancel.
    pub fn mean(&self) -> f64 {
        let mut m = 0.0;
        for k in 0..self.values.len() {
            let (l, r) = (self.breakpoints[k], self.breakpoints[k + 1]);
            m += self.values[k] * (r - l) * 0.5 * (r + l);
        }
        m.clamp(0.0, 1.0)
    }

    /// Density value at `x`, right-continuous at interior breakpoints; at
    /// `x == 1` returns the last segment's value.
    pub fn density_at(&self, x: f64) -> Result<f64, BeliefError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(BeliefError::OutOfDomain(x));
        }
        Ok(self.values[self.segment_of(x)])
    }

    /// Bisection Bayes update for a binary response `y` observed through a
    /// symmetric channel with crossover probability `eps`.
    ///
    /// Multiplies the density by `2 f1(y)` on `[0, x_hat]` and `2 f0(y)` on
    /// `(x_hat, 1]`. `x_hat` must be the median of `self` within
    /// [`MEDIAN_TOL`] of cdf mass, which makes the pre-normalization mass 1;
    /// the result is renormalized regardless.
    pub fn bayes_bisection_update(
        &self,
        y: bool,
        eps: f64,
        x_hat: f64,
    ) -> Result<Self, BeliefError> {
        let (mut b, _mass) = self.bayes_update_raw(y, eps, x_hat, true)?;
        b.normalize()?;
        Ok(b)
    }

    /// [`Self::bayes_bisection_update`] without the median-mass check.
    ///
    /// Once a posterior concentrates past a density of roughly `1e7`, the
    /// cdf mass moves by more than 1e-9 per ulp of position, so no
    /// representable query point can meet the public contract even though
    /// the caller passes the exact computed quantile. The simulation
    /// runners, which obtain `x_hat` from [`Self::median`] by construction,
    /// use this variant.
    pub(crate) fn bayes_bisection_update_unchecked(
        &self,
        y: bool,
        eps: f64,
        x_hat: f64,
    ) -> Result<Self, BeliefError> {
        let (mut b, _mass) = self.bayes_update_raw(y, eps, x_hat, false)?;
        b.normalize()?;
        Ok(b)
    }

    /// Integral of the updated density before renormalization.
    ///
    /// Equals 1 within [`MASS_TOL`] whenever `x_hat` splits the cdf mass in
    /// half; exposed so that identity can be checked against the same
    /// construction the update itself uses.
    pub fn bayes_prenorm_mass(&self, y: bool, eps: f64, x_hat: f64) -> Result<f64, BeliefError> {
        self.bayes_update_raw(y, eps, x_hat, true)
            .map(|(_, mass)| mass)
    }

    fn bayes_update_raw(
        &self,
        y: bool,
        eps: f64,
        x_hat: f64,
        check_median: bool,
    ) -> Result<(Self, f64), BeliefError> {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(BeliefError::BadCrossover(eps));
        }
        if !(0.0..=1.0).contains(&x_hat) {
            return Err(BeliefError::OutOfDomain(x_hat));
        }
        let mass_left = self.cdf(x_hat)?;
        if check_median && (mass_left - 0.5).abs() > MEDIAN_TOL {
            return Err(BeliefError::NotMedian {
                x_hat,
                mass: mass_left,
            });
        }
        let f1 = if y { 1.0 - eps } else { eps };
        let f0 = 1.0 - f1;
        let (left, right) = (2.0 * f1, 2.0 * f0);

        let n = self.values.len();
        let mut bps = Vec::with_capacity(self.breakpoints.len() + 1);
        let mut vals = Vec::with_capacity(n + 1);
        for k in 0..n {
            let (l, r) = (self.breakpoints[k], self.breakpoints[k + 1]);
            bps.push(l);
            if r <= x_hat {
                vals.push(self.values[k] * left);
            } else if l >= x_hat {
                vals.push(self.values[k] * right);
            } else {
                // x_hat splits this segment; [l, x_hat] keeps the left factor.
                vals.push(self.values[k] * left);
                bps.push(x_hat);
                vals.push(self.values[k] * right);
            }
        }
        bps.push(1.0);
        let mass = left * mass_left + right * (self.total_mass() - mass_left);
        Ok((
            Belief {
                breakpoints: bps,
                values: vals,
                cum: Vec::new(),
            },
            mass,
        ))
    }

    /// Pointwise convex combination `alpha * updated + (1 - alpha) * other`
    /// on the merged breakpoint set.
    pub fn mix(alpha: f64, updated: &Belief, other: &Belief) -> Result<Self, BeliefError> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(BeliefError::BadWeight(alpha));
        }
        Self::convex_combination(&[(alpha, updated), (1.0 - alpha, other)])
    }

    /// General nonnegative combination of beliefs on their merged breakpoint
    /// set, renormalized to unit mass. Weights must sum to a positive value.
    pub fn convex_combination(parts: &[(f64, &Belief)]) -> Result<Self, BeliefError> {
        if parts.is_empty() {
            return Err(BeliefError::Invalid("empty combination".into()));
        }
        for (w, _) in parts {
            if !w.is_finite() || *w < 0.0 {
                return Err(BeliefError::BadWeight(*w));
            }
        }
        // K-way merge of the (already sorted, deduplicated) breakpoint lists.
        let k = parts.len();
        let mut merge_cursors = vec![0usize; k];
        let capacity: usize = parts.iter().map(|(_, b)| b.breakpoints.len()).sum();
        let mut bps: Vec<f64> = Vec::with_capacity(capacity);
        bps.push(0.0);
        loop {
            let last = *bps.last().unwrap();
            let mut next = f64::INFINITY;
            for (m, (_, b)) in parts.iter().enumerate() {
                let list = &b.breakpoints;
                let mut c = merge_cursors[m];
                while c < list.len() && list[c] <= last {
                    c += 1;
                }
                merge_cursors[m] = c;
                if c < list.len() && list[c] < next {
                    next = list[c];
                }
            }
            if !next.is_finite() {
                break;
            }
            bps.push(next);
        }

        let mut cursors = vec![0usize; k];
        let mut vals = Vec::with_capacity(bps.len() - 1);
        for seg in 0..bps.len() - 1 {
            let l = bps[seg];
            let mut v = 0.0;
            for (m, (w, b)) in parts.iter().enumerate() {
                while b.breakpoints[cursors[m] + 1] <= l {
                    cursors[m] += 1;
                }
                v += w * b.values[cursors[m]];
            }
            vals.push(v);
        }
        let mut out = Belief {
            breakpoints: bps,
            values: vals,
            cum: Vec::new(),
        };
        out.normalize()?;
        Ok(out)
    }

    /// Serializes the segments as CSV rows `agent_id, t, left, right, value`,
    /// one line per segment.
    pub fn segments_csv(&self, agent_id: usize, t: u64) -> String {
        let mut out = String::new();
        for k in 0..self.values.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                agent_id,
                t,
                self.breakpoints[k],
                self.breakpoints[k + 1],
                self.values[k]
            ));
        }
        out
    }

    fn segment_of(&self, x: f64) -> usize {
        // Last k with breakpoints[k] <= x, clamped so x == 1 maps to the
        // final segment (right-continuity everywhere else).
        let idx = self.breakpoints.partition_point(|b| *b <= x);
        idx.saturating_sub(1).min(self.values.len() - 1)
    }

    /// Rescales to unit mass, merges exactly-equal adjacent segments, and
    /// rebuilds the cumulative cache.
    fn normalize(&mut self) -> Result<(), BeliefError> {
        let mut total = 0.0;
        for k in 0..self.values.len() {
            total += self.values[k] * (self.breakpoints[k + 1] - self.breakpoints[k]);
        }
        if !total.is_finite() || total <= 0.0 {
            return Err(BeliefError::Invalid(format!(
                "total mass {total} is not positive and finite"
            )));
        }
        for v in &mut self.values {
            *v /= total;
        }

        // Exact-equality merging only: lossy merging would corrupt the
        // martingale diagnostics downstream.
        let mut w = 0usize;
        for k in 1..self.values.len() {
            if self.values[k] == self.values[w] {
                continue;
            }
            w += 1;
            self.values[w] = self.values[k];
            self.breakpoints[w] = self.breakpoints[k];
        }
        self.values.truncate(w + 1);
        self.breakpoints[w + 1] = 1.0;
        self.breakpoints.truncate(w + 2);

        self.cum.clear();
        self.cum.reserve(self.values.len() + 1);
        let mut acc = 0.0;
        self.cum.push(0.0);
        for k in 0..self.values.len() {
            acc += self.values[k] * (self.breakpoints[k + 1] - self.breakpoints[k]);
            self.cum.push(acc);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step() -> Belief {
        // 1.5 on [0, 0.5), 0.5 on [0.5, 1]
        Belief::new(vec![0.0, 0.5, 1.0], vec![1.5, 0.5]).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn uniform_prior_is_flat() {
        let b = Belief::uniform();
        assert_eq!(b.breakpoints(), &[0.0, 1.0]);
        assert_eq!(b.values(), &[1.0]);
        assert_close(b.total_mass(), 1.0, 1e-15);
        assert_eq!(b.density_at(0.73).unwrap(), 1.0);
    }

    #[test]
    fn cdf_examples() {
        let u = Belief::uniform();
        assert_close(u.cdf(0.5).unwrap(), 0.5, 1e-15);
        assert_close(two_step().cdf(0.5).unwrap(), 0.75, 1e-15);
        assert_close(two_step().cdf(1.0).unwrap(), 1.0, 1e-12);
        assert!(matches!(u.cdf(1.5), Err(BeliefError::OutOfDomain(_))));
        assert!(matches!(u.cdf(-0.1), Err(BeliefError::OutOfDomain(_))));
    }

    #[test]
    fn quantile_examples() {
        let u = Belief::uniform();
        assert_close(u.quantile(0.5).unwrap(), 0.5, 1e-15);
        assert_close(two_step().quantile(0.5).unwrap(), 1.0 / 3.0, 1e-15);
        assert_eq!(two_step().quantile(0.0).unwrap(), 0.0);
        assert!(matches!(
            u.quantile(1.1),
            Err(BeliefError::BadProbability(_))
        ));
    }

    #[test]
    fn quantile_takes_plateau_left_edge() {
        let b = Belief::new(vec![0.0, 0.25, 0.75, 1.0], vec![2.0, 0.0, 2.0]).unwrap();
        assert_close(b.quantile(0.5).unwrap(), 0.25, 1e-15);
        // Just above the plateau mass the quantile jumps past it.
        assert!(b.quantile(0.5 + 1e-9).unwrap() >= 0.75);
    }

    #[test]
    fn mean_examples() {
        assert_close(Belief::uniform().mean(), 0.5, 1e-15);
        assert_close(two_step().mean(), 0.375, 1e-15);
        let tail = Belief::new(vec![0.0, 0.9, 1.0], vec![1e-9, 10.0]).unwrap();
        let m = tail.mean();
        assert!((0.9..=1.0).contains(&m), "mean {m} outside support");
    }

    #[test]
    fn density_right_continuous() {
        let b = two_step();
        assert_eq!(b.density_at(0.5).unwrap(), 0.5);
        assert_eq!(b.density_at(0.49).unwrap(), 1.5);
        assert_eq!(b.density_at(1.0).unwrap(), 0.5);
        assert_eq!(b.density_at(0.0).unwrap(), 1.5);
    }

    #[test]
    fn bayes_update_examples() {
        let u = Belief::uniform();
        let up = u.bayes_bisection_update(true, 0.25, 0.5).unwrap();
        assert_eq!(up.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_close(up.values()[0], 1.5, 1e-12);
        assert_close(up.values()[1], 0.5, 1e-12);

        let down = u.bayes_bisection_update(false, 0.25, 0.5).unwrap();
        assert_close(down.values()[0], 0.5, 1e-12);
        assert_close(down.values()[1], 1.5, 1e-12);
    }

    #[test]
    fn bayes_update_uninformative_channel_is_identity() {
        let b = two_step();
        let x_hat = b.median();
        let up = b.bayes_bisection_update(true, 0.5, x_hat).unwrap();
        assert_eq!(up, b, "eps = 0.5 must leave the belief unchanged");
    }

    #[test]
    fn bayes_update_rejects_bad_inputs() {
        let u = Belief::uniform();
        assert!(matches!(
            u.bayes_bisection_update(true, 0.6, 0.5),
            Err(BeliefError::BadCrossover(_))
        ));
        assert!(matches!(
            u.bayes_bisection_update(true, 0.0, 0.5),
            Err(BeliefError::BadCrossover(_))
        ));
        assert!(matches!(
            u.bayes_bisection_update(true, 0.25, 0.3),
            Err(BeliefError::NotMedian { .. })
        ));
    }

    #[test]
    fn prenorm_mass_is_one_at_median() {
        let b = two_step();
        let x_hat = b.median();
        for y in [false, true] {
            for eps in [1e-6, 0.1, 0.3, 0.5] {
                let mass = b.bayes_prenorm_mass(y, eps, x_hat).unwrap();
                assert_close(mass, 1.0, MASS_TOL);
            }
        }
    }

    #[test]
    fn mix_examples() {
        let u = Belief::uniform();
        let s = two_step();
        let half = Belief::mix(0.5, &u, &s).unwrap();
        assert_eq!(half.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_close(half.values()[0], 1.25, 1e-12);
        assert_close(half.values()[1], 0.75, 1e-12);

        let all_first = Belief::mix(1.0, &s, &u).unwrap();
        assert_eq!(all_first.breakpoints(), s.breakpoints());
        for (a, b) in all_first.values().iter().zip(s.values()) {
            assert_close(*a, *b, 1e-12);
        }
        let all_second = Belief::mix(0.0, &u, &s).unwrap();
        assert_eq!(all_second.breakpoints(), s.breakpoints());

        assert!(matches!(
            Belief::mix(1.5, &u, &s),
            Err(BeliefError::BadWeight(_))
        ));
    }

    #[test]
    fn update_grows_by_at_most_one_segment() {
        let mut b = Belief::uniform();
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        for _ in 0..50 {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let y = rng_state & 1 == 0;
            let before = b.segment_count();
            b = b.bayes_bisection_update(y, 0.3, b.median()).unwrap();
            assert!(b.segment_count() <= before + 1);
            assert_close(b.total_mass(), 1.0, MASS_TOL);
        }
    }

    #[test]
    fn monotone_concentration_left_of_median() {
        let b = two_step();
        let x_hat = b.median();
        let up = b.bayes_bisection_update(true, 0.2, x_hat).unwrap();
        for i in 0..=100 {
            let x = x_hat * i as f64 / 100.0;
            assert!(up.cdf(x).unwrap() + 1e-12 >= b.cdf(x).unwrap());
        }
    }

    #[test]
    fn rejects_malformed_segments() {
        assert!(Belief::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(Belief::new(vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(Belief::new(vec![0.0, 0.5, 0.4, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(Belief::new(vec![0.0, 0.5, 1.0], vec![1.0, -0.5]).is_err());
    }
}
