//! Per-bid running statistics and the two UCB indices.
//!
//! For a bid `b` observed in `n(b)` blocks of `n / (m + 1)` auctions each, the
//! utility index is
//!
//! ```text
//! UCB_u(v, b)   = g(b) v - p(b) + 2U sqrt(2 (m+1) ln t / (n(b) n))
//! ```
//!
//! and the regret index for a (value, bid) pair is
//!
//! ```text
//! UCB_rgt(v, b) = [g(b) v - p(b)] - [g(v) v - p(v)]
//!               + 4U sqrt(3 (m+1) ln t / (n min(n(v), n(b))))
//! ```
//!
//! `ln 1` is taken as 0, so the first round after initialization is greedy.

use crate::auction::{BidGrid, BlockObservation};
use crate::error::{Error, Result};

/// Running block counts and mean allocation/payment for every grid bid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    levels: Vec<f64>,
    counts: Vec<u64>,
    alloc: Vec<f64>,
    pay: Vec<f64>,
}

impl ArmStats {
    /// Empty statistics (all counts 0) over `grid`.
    pub fn new(grid: &BidGrid) -> Self {
        let k = grid.len();
        Self {
            levels: grid.levels().to_vec(),
            counts: vec![0; k],
            alloc: vec![0.0; k],
            pay: vec![0.0; k],
        }
    }

    /// Statistics with explicit contents, mostly for tests and replays.
    pub fn from_parts(grid: &BidGrid, counts: Vec<u64>, alloc: Vec<f64>, pay: Vec<f64>) -> Result<Self> {
        let k = grid.len();
        if counts.len() != k || alloc.len() != k || pay.len() != k {
            return Err(Error::InvalidConfig(format!("statistics must have {k} entries")));
        }
        Ok(Self { levels: grid.levels().to_vec(), counts, alloc, pay })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn level(&self, bid: usize) -> f64 {
        self.levels[bid]
    }

    pub fn count(&self, bid: usize) -> u64 {
        self.counts[bid]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn mean_allocation(&self, bid: usize) -> f64 {
        self.alloc[bid]
    }

    pub fn mean_payment(&self, bid: usize) -> f64 {
        self.pay[bid]
    }

    /// Folds one block into the running means:
    /// `mean <- (mean * n_old + observed) / (n_old + 1)`.
    pub fn absorb(&mut self, obs: &BlockObservation) -> Result<()> {
        let b = obs.bid;
        if b >= self.counts.len() {
            return Err(Error::UnknownBid { index: b, len: self.counts.len() });
        }
        let old = self.counts[b] as f64;
        let new = self.counts[b] + 1;
        self.alloc[b] = (self.alloc[b] * old + obs.mean_allocation) / new as f64;
        self.pay[b] = (self.pay[b] * old + obs.mean_payment) / new as f64;
        self.counts[b] = new;
        Ok(())
    }

    /// Estimated utility `g(b) v - p(b)` for valuation level `value`.
    pub fn utility_estimate(&self, value: f64, bid: usize) -> f64 {
        self.alloc[bid] * value - self.pay[bid]
    }
}

/// Round-level constants shared by every index evaluated at timestep `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcbContext {
    /// Current timestep, starting at 1.
    pub t: u64,
    /// Number of probe blocks; each round uses `m + 1` blocks.
    pub m: usize,
    /// Auctions per timestep.
    pub n: usize,
    /// Utility bound `U`.
    pub utility_bound: f64,
}

impl UcbContext {
    /// Checks `t >= 1`, `1 <= m < arms` and `(m + 1) | n`.
    pub fn new(t: u64, m: usize, n: usize, utility_bound: f64, arms: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidConfig("timesteps start at 1".into()));
        }
        if m == 0 || m >= arms {
            return Err(Error::InvalidConfig(format!(
                "m = {m} must satisfy 1 <= m < |B| = {arms}"
            )));
        }
        crate::auction::block_size(n, m + 1)?;
        Ok(Self { t, m, n, utility_bound })
    }

    fn ln_t(&self) -> f64 {
        if self.t <= 1 {
            0.0
        } else {
            (self.t as f64).ln()
        }
    }

    /// Exploration bonus of the utility index for a bid seen `count` times.
    pub fn utility_radius(&self, count: u64) -> f64 {
        let ln_t = self.ln_t();
        if ln_t == 0.0 {
            return 0.0;
        }
        let u = self.utility_bound;
        2.0 * u * (2.0 * (self.m + 1) as f64 * ln_t / (count as f64 * self.n as f64)).sqrt()
    }

    /// Exploration bonus of the regret index when the rarer of the pair was
    /// seen `min_count` times.
    pub fn regret_radius(&self, min_count: u64) -> f64 {
        let ln_t = self.ln_t();
        if ln_t == 0.0 {
            return 0.0;
        }
        let u = self.utility_bound;
        4.0 * u * (3.0 * (self.m + 1) as f64 * ln_t / (self.n as f64 * min_count as f64)).sqrt()
    }
}

/// Utility UCB of bidding `bid` with valuation level `value`.
pub fn ucb_utility(stats: &ArmStats, ctx: &UcbContext, value: usize, bid: usize) -> f64 {
    stats.utility_estimate(stats.level(value), bid) + ctx.utility_radius(stats.count(bid))
}

/// `rgt_hat(v, b)`: estimated utility gain of bidding `bid` over bidding the
/// valuation `value` truthfully.
pub fn regret_point_estimate(stats: &ArmStats, value: usize, bid: usize) -> f64 {
    let v = stats.level(value);
    stats.utility_estimate(v, bid) - stats.utility_estimate(v, value)
}

/// Regret UCB of the (value, bid) pair.
pub fn ucb_regret(stats: &ArmStats, ctx: &UcbContext, value: usize, bid: usize) -> f64 {
    let rarer = stats.count(value).min(stats.count(bid));
    regret_point_estimate(stats, value, bid) + ctx.regret_radius(rarer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn obs(bid: usize, g: f64, p: f64) -> BlockObservation {
        BlockObservation { bid, mean_allocation: g, mean_payment: p, block_size: 1 }
    }

    fn one_bid(count: u64, g: f64, p: f64) -> ArmStats {
        let grid = BidGrid::from_levels(vec![1.0]).unwrap();
        ArmStats::from_parts(&grid, vec![count], vec![g], vec![p]).unwrap()
    }

    #[test]
    fn absorb_examples() {
        let mut s = one_bid(3, 0.4, 0.0);
        s.absorb(&obs(0, 0.8, 0.0)).unwrap();
        assert_eq!(s.count(0), 4);
        assert_relative_eq!(s.mean_allocation(0), 0.5, max_relative = 1e-15);

        let mut s = one_bid(1, 0.0, 0.0);
        s.absorb(&obs(0, 0.0, 0.0)).unwrap();
        assert_eq!((s.count(0), s.mean_allocation(0)), (2, 0.0));

        let mut s = one_bid(1, 0.0, 2.0);
        s.absorb(&obs(0, 0.0, 2.0)).unwrap();
        assert_eq!(s.mean_payment(0), 2.0);

        assert!(matches!(s.absorb(&obs(3, 0.0, 0.0)), Err(Error::UnknownBid { .. })));
    }

    #[test]
    fn first_absorb_seeds_the_mean() {
        let mut s = ArmStats::new(&BidGrid::from_levels(vec![1.0, 2.0]).unwrap());
        s.absorb(&obs(1, 0.3, 0.7)).unwrap();
        assert_eq!((s.count(1), s.mean_allocation(1), s.mean_payment(1)), (1, 0.3, 0.7));
        assert_eq!(s.count(0), 0);
    }

    #[test]
    fn context_validation() {
        assert!(UcbContext::new(1, 15, 1024, 10.0, 1000).is_ok());
        assert!(UcbContext::new(0, 15, 1024, 10.0, 1000).is_err());
        assert!(UcbContext::new(1, 0, 1024, 10.0, 1000).is_err());
        assert!(UcbContext::new(1, 3, 1024, 10.0, 3).is_err());
        assert!(UcbContext::new(1, 4, 1024, 10.0, 1000).is_err());
    }

    #[test]
    fn utility_index_at_t1_is_the_point_estimate() {
        let grid = BidGrid::from_levels(vec![2.0, 9.5]).unwrap();
        let s = ArmStats::from_parts(&grid, vec![1, 1], vec![0.5, 0.3], vec![2.0, 0.1]).unwrap();
        let ctx = UcbContext::new(1, 1, 1024, 10.0, 2).unwrap();
        assert_eq!(ucb_utility(&s, &ctx, 1, 0), 0.5 * 9.5 - 2.0);
        assert_eq!(ucb_regret(&s, &ctx, 1, 0), regret_point_estimate(&s, 1, 0));
    }

    #[test]
    fn doubling_samples_shrinks_bonus_by_root_two() {
        let ctx = UcbContext::new(57, 3, 64, 10.0, 10).unwrap();
        assert_relative_eq!(ctx.utility_radius(4) / ctx.utility_radius(8), 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(ctx.regret_radius(4) / ctx.regret_radius(8), 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn regret_point_estimate_examples() {
        let grid = BidGrid::from_levels(vec![3.0, 9.5]).unwrap();
        let s = ArmStats::from_parts(&grid, vec![1, 1], vec![0.6, 0.5], vec![3.0, 2.0]).unwrap();
        assert_relative_eq!(regret_point_estimate(&s, 1, 0), -0.05, max_relative = 1e-12);
        assert_eq!(regret_point_estimate(&s, 1, 1), 0.0);
        let zero = ArmStats::from_parts(&grid, vec![1, 1], vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(regret_point_estimate(&zero, 1, 0), 0.0);
    }

    #[test]
    fn diagonal_regret_index_is_pure_bonus() {
        let grid = BidGrid::from_levels(vec![1.0, 2.0]).unwrap();
        let s = ArmStats::from_parts(&grid, vec![3, 9], vec![0.2, 0.9], vec![0.1, 1.1]).unwrap();
        let ctx = UcbContext::new(40, 1, 64, 2.0, 2).unwrap();
        for v in 0..2 {
            assert_eq!(ucb_regret(&s, &ctx, v, v), ctx.regret_radius(s.count(v)));
        }
    }
}
