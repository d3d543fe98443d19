//! The black-box auction interface seen by the learner.
//!
//! A learner never sees competitor bids or slot CTRs. It submits a bid from a
//! finite [`BidGrid`] and gets back an allocation and a payment, averaged over
//! a block of independent auctions. Everything it knows about the mechanism is
//! built from [`BlockObservation`]s.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// Generator used by every simulated component. Seeded streams are stable
/// across platforms.
pub type SimRng = Xoshiro256PlusPlus;

/// Builds the generator for `(seed, stream)`. Distinct streams of the same
/// seed are statistically independent.
pub fn seeded_rng(seed: u64, stream: u64) -> SimRng {
    SimRng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17))
}

/// Derives an independent seed for sub-stream `stream` of `seed` (SplitMix64
/// finalizer), for handing seeds to components that reseed themselves.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Finite, strictly increasing set of bid levels.
///
/// Levels built by [`BidGrid::uniform`] are the nearest doubles to their
/// decimal values (`9.5` is exactly `9.5`), so valuations can be looked up by
/// exact equality.
#[derive(Debug, Clone, PartialEq)]
pub struct BidGrid {
    levels: Vec<f64>,
    step: f64,
}

fn decimals_of(x: f64) -> Option<u32> {
    (0..=12).find(|&d| {
        let scaled = x * 10f64.powi(d as i32);
        (scaled - scaled.round()).abs() < 1e-6
    })
}

impl BidGrid {
    /// Levels `min, min + step, ..., <= max`.
    pub fn uniform(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("bounds and step must be finite".into()));
        }
        if min < 0.0 {
            return Err(Error::InvalidGrid(format!("minimum bid {min} is negative")));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        if max < min {
            return Err(Error::InvalidGrid(format!("max {max} is below min {min}")));
        }
        let digits = decimals_of(step)
            .zip(decimals_of(min))
            .map(|(a, b)| a.max(b))
            .ok_or_else(|| {
                Error::InvalidGrid("min and step must have at most 12 decimals".into())
            })?;
        let scale = 10f64.powi(digits as i32);
        let base = (min * scale).round() as i64;
        let quantum = (step * scale).round() as i64;
        let count = ((max - min) / step + 1e-9).floor() as i64 + 1;
        let levels = (0..count)
            .map(|i| (base + i * quantum) as f64 / scale)
            .collect();
        Ok(Self { levels, step })
    }

    /// The bid space used in the GSP experiments: `{0.01, 0.02, ..., 10}`.
    pub fn cents_to_ten() -> Self {
        Self::uniform(0.01, 10.0, 0.01).expect("static grid")
    }

    /// Arbitrary strictly increasing, non-negative levels. The reported step is
    /// the smallest spacing between neighbours (0 for a single level).
    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidGrid("no levels".into()));
        }
        if levels.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidGrid("levels must be finite and non-negative".into()));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("levels must be strictly increasing".into()));
        }
        let step = levels
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let step = if step.is_finite() { step } else { 0.0 };
        Ok(Self { levels, step })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Level at `index`. Panics when out of range.
    pub fn level(&self, index: usize) -> f64 {
        self.levels[index]
    }

    pub fn max_bid(&self) -> Option<f64> {
        self.levels.last().copied()
    }

    /// Index of a level, compared by exact equality.
    pub fn index_of(&self, bid: f64) -> Result<usize> {
        self.levels
            .binary_search_by(|probe| probe.total_cmp(&bid))
            .map_err(|_| Error::NotInGrid(bid))
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.levels.len() {
            Ok(())
        } else {
            Err(Error::UnknownBid { index, len: self.levels.len() })
        }
    }
}

/// Bound `U` with every achievable utility in `[-U, U]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityBound(pub f64);

impl UtilityBound {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Result of one auction for the test bidder.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuctionOutcome {
    /// Allocation probability or expected click mass, in `[0, 1]`.
    pub allocation: f64,
    /// Expected payment, non-negative.
    pub payment: f64,
}

impl AuctionOutcome {
    pub const LOSS: Self = Self { allocation: 0.0, payment: 0.0 };

    pub fn new(allocation: f64, payment: f64) -> Self {
        Self { allocation, payment }
    }
}

/// Average outcome of one block of auctions that all received the same bid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockObservation {
    /// Grid index of the submitted bid.
    pub bid: usize,
    pub mean_allocation: f64,
    pub mean_payment: f64,
    pub block_size: usize,
}

/// A stochastic mechanism sampled one auction at a time.
///
/// Outcomes of distinct calls are i.i.d. given the bid. A single instance is
/// not shared between runs; each run reseeds its own copy.
pub trait AuctionEnvironment: Send {
    /// Runs one auction in which the test bidder submits `bid`.
    fn sample(&mut self, bid: f64) -> AuctionOutcome;

    /// Restarts the outcome stream. The same seed replays the same outcomes.
    fn reseed(&mut self, seed: u64);

    /// Utility bound for a test bidder whose bids and values lie in `grid`.
    fn utility_bound(&self, grid: &BidGrid) -> Result<UtilityBound>;
}

/// Quasilinear utility `allocation * value - payment`.
pub fn utility(value: f64, outcome: &AuctionOutcome) -> f64 {
    outcome.allocation * value - outcome.payment
}

/// Utility of a block average for valuation `value`.
pub fn empirical_utility(value: f64, obs: &BlockObservation) -> f64 {
    obs.mean_allocation * value - obs.mean_payment
}

/// Auctions per block when `auctions` are split into `blocks` equal blocks.
pub fn block_size(auctions: usize, blocks: usize) -> Result<usize> {
    if blocks == 0 || auctions == 0 || auctions % blocks != 0 {
        return Err(Error::Indivisible { auctions, blocks });
    }
    Ok(auctions / blocks)
}

/// Submits `grid.level(bid)` to `block_size` fresh auctions and averages them.
///
/// Outcomes are summed in draw order and divided once, so the result is
/// reproducible bit-for-bit for a fixed outcome sequence.
pub fn sample_block<E: AuctionEnvironment + ?Sized>(
    env: &mut E,
    grid: &BidGrid,
    bid: usize,
    block_size: usize,
) -> Result<BlockObservation> {
    if block_size == 0 {
        return Err(Error::ZeroBlockSize);
    }
    grid.check_index(bid)?;
    let level = grid.level(bid);
    let (mut alloc, mut pay) = (0.0, 0.0);
    for _ in 0..block_size {
        let out = env.sample(level);
        debug_assert!((0.0..=1.0).contains(&out.allocation) && out.payment >= 0.0);
        alloc += out.allocation;
        pay += out.payment;
    }
    let k = block_size as f64;
    Ok(BlockObservation {
        bid,
        mean_allocation: alloc / k,
        mean_payment: pay / k,
        block_size,
    })
}
