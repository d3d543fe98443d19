//! Small synthetic environments: constants, scripted sequences and a
//! mechanism with linear expected allocation and payment.

use rand::Rng;

use crate::auction::{seeded_rng, AuctionEnvironment, AuctionOutcome, BidGrid, SimRng, UtilityBound};
use crate::error::{Error, Result};

fn bound_from_grid(grid: &BidGrid, extra: f64) -> Result<UtilityBound> {
    grid.max_bid()
        .map(|b| UtilityBound(b + extra))
        .ok_or_else(|| Error::InvalidGrid("empty grid".into()))
}

/// Returns the same outcome for every bid.
#[derive(Debug, Clone)]
pub struct ConstantEnvironment {
    outcome: AuctionOutcome,
}

impl ConstantEnvironment {
    pub fn new(outcome: AuctionOutcome) -> Self {
        Self { outcome }
    }
}

impl AuctionEnvironment for ConstantEnvironment {
    fn sample(&mut self, _bid: f64) -> AuctionOutcome {
        self.outcome
    }

    fn reseed(&mut self, _seed: u64) {}

    fn utility_bound(&self, grid: &BidGrid) -> Result<UtilityBound> {
        bound_from_grid(grid, self.outcome.payment)
    }
}

/// Replays a fixed list of outcomes in order, cycling, regardless of the bid.
/// Reseeding rewinds to the start.
#[derive(Debug, Clone)]
pub struct ScriptedEnvironment {
    script: Vec<AuctionOutcome>,
    cursor: usize,
}

impl ScriptedEnvironment {
    pub fn new(script: Vec<AuctionOutcome>) -> Self {
        assert!(!script.is_empty(), "script must not be empty");
        Self { script, cursor: 0 }
    }
}

impl AuctionEnvironment for ScriptedEnvironment {
    fn sample(&mut self, _bid: f64) -> AuctionOutcome {
        let out = self.script[self.cursor % self.script.len()];
        self.cursor += 1;
        out
    }

    fn reseed(&mut self, _seed: u64) {
        self.cursor = 0;
    }

    fn utility_bound(&self, grid: &BidGrid) -> Result<UtilityBound> {
        let pay = self.script.iter().map(|o| o.payment).fold(0.0, f64::max);
        bound_from_grid(grid, pay)
    }
}

/// Deterministic table lookup: `outcomes[i]` is returned for `grid.level(i)`.
#[derive(Debug, Clone)]
pub struct TabulatedEnvironment {
    grid: BidGrid,
    outcomes: Vec<AuctionOutcome>,
}

impl TabulatedEnvironment {
    pub fn new(grid: BidGrid, outcomes: Vec<AuctionOutcome>) -> Result<Self> {
        if grid.len() != outcomes.len() {
            return Err(Error::InvalidConfig(format!(
                "{} outcomes for a grid of {} levels",
                outcomes.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, outcomes })
    }
}

impl AuctionEnvironment for TabulatedEnvironment {
    fn sample(&mut self, bid: f64) -> AuctionOutcome {
        let i = self.grid.index_of(bid).expect("bid outside the tabulated grid");
        self.outcomes[i]
    }

    fn reseed(&mut self, _seed: u64) {}

    fn utility_bound(&self, grid: &BidGrid) -> Result<UtilityBound> {
        let pay = self.outcomes.iter().map(|o| o.payment).fold(0.0, f64::max);
        bound_from_grid(grid, pay)
    }
}

/// Mechanism whose expected allocation and payment are affine in the bid:
/// `g(b) = alloc_intercept + alloc_slope * b` and
/// `p(b) = pay_intercept + pay_slope * b`.
///
/// Each auction allocates with probability `g(b)` and charges `p(b)`.
#[derive(Debug, Clone)]
pub struct LinearMechanism {
    pub alloc_intercept: f64,
    pub alloc_slope: f64,
    pub pay_intercept: f64,
    pub pay_slope: f64,
    rng: SimRng,
}

impl LinearMechanism {
    /// Fails unless `g` stays in `[0, 1]` and `p` stays non-negative on
    /// `[0, max_bid]`.
    pub fn new(
        alloc_intercept: f64,
        alloc_slope: f64,
        pay_intercept: f64,
        pay_slope: f64,
        max_bid: f64,
    ) -> Result<Self> {
        let ends = [0.0, max_bid];
        let g_ok = ends
            .iter()
            .all(|&b| (0.0..=1.0).contains(&(alloc_intercept + alloc_slope * b)));
        let p_ok = ends.iter().all(|&b| pay_intercept + pay_slope * b >= 0.0);
        if !(g_ok && p_ok) {
            return Err(Error::InvalidConfig(
                "linear mechanism leaves the admissible range on [0, max_bid]".into(),
            ));
        }
        Ok(Self {
            alloc_intercept,
            alloc_slope,
            pay_intercept,
            pay_slope,
            rng: seeded_rng(0, 0),
        })
    }

    pub fn expected_allocation(&self, bid: f64) -> f64 {
        self.alloc_intercept + self.alloc_slope * bid
    }

    pub fn expected_payment(&self, bid: f64) -> f64 {
        self.pay_intercept + self.pay_slope * bid
    }

    /// Closed-form `rgt(v, b) = u*(v, b) - u*(v, v)`.
    pub fn regret(&self, value: f64, bid: f64) -> f64 {
        let u = |b: f64| self.expected_allocation(b) * value - self.expected_payment(b);
        u(bid) - u(value)
    }

    /// Lipschitz constants `(L_g, L_p)` of the expected allocation and payment.
    pub fn lipschitz(&self) -> (f64, f64) {
        (self.alloc_slope.abs(), self.pay_slope.abs())
    }
}

impl AuctionEnvironment for LinearMechanism {
    fn sample(&mut self, bid: f64) -> AuctionOutcome {
        let g = self.expected_allocation(bid).clamp(0.0, 1.0);
        let won = self.rng.random::<f64>() < g;
        AuctionOutcome::new(if won { 1.0 } else { 0.0 }, self.expected_payment(bid).max(0.0))
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = seeded_rng(seed, 0);
    }

    fn utility_bound(&self, grid: &BidGrid) -> Result<UtilityBound> {
        let top = grid
            .max_bid()
            .ok_or_else(|| Error::InvalidGrid("empty grid".into()))?;
        let pay = self.expected_payment(0.0).max(self.expected_payment(top));
        Ok(UtilityBound(top + pay))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_cycles_and_rewinds() {
        let mut env = ScriptedEnvironment::new(vec![
            AuctionOutcome::new(1.0, 2.0),
            AuctionOutcome::new(0.0, 0.0),
        ]);
        assert_eq!(env.sample(1.0).payment, 2.0);
        assert_eq!(env.sample(1.0).payment, 0.0);
        assert_eq!(env.sample(1.0).payment, 2.0);
        env.reseed(3);
        assert_eq!(env.sample(1.0).payment, 2.0);
    }

    #[test]
    fn linear_mechanism_matches_expectations() {
        let mut env = LinearMechanism::new(0.1, 0.5, 0.0, 0.2, 1.0).unwrap();
        env.reseed(11);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| env.sample(0.8).allocation).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
        assert!((env.regret(0.5, 1.0) - ((0.6 * 0.5 - 0.2) - (0.35 * 0.5 - 0.1))).abs() < 1e-15);
        assert!(LinearMechanism::new(0.6, 0.6, 0.0, 0.0, 1.0).is_err());
    }
}
