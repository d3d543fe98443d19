//! Generalized second price simulation and a truthful single-slot control.
//!
//! Each GSP auction draws fresh competitor bids and a fresh descending CTR
//! sequence. The slot-`s` winner is allocated `ctr[s]` and pays `ctr[s]` times
//! the highest bid ranked below it (expected pay-per-click). Competitors win
//! ties against the test bidder. A winner with nobody below pays nothing.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::auction::{seeded_rng, AuctionEnvironment, AuctionOutcome, BidGrid, SimRng, UtilityBound};
use crate::error::{Error, Result};

/// Parameters of the simulated GSP market.
#[derive(Debug, Clone, PartialEq)]
pub struct GspConfig {
    pub num_slots: usize,
    pub num_competitors: usize,
    /// Competitor bids are uniform on `[competitor_low, competitor_high]`.
    pub competitor_low: f64,
    pub competitor_high: f64,
    /// Slot CTRs are i.i.d. `Beta(ctr_alpha, ctr_beta)`, sorted descending.
    pub ctr_alpha: f64,
    pub ctr_beta: f64,
    pub seed: u64,
}

impl Default for GspConfig {
    fn default() -> Self {
        Self {
            num_slots: 5,
            num_competitors: 20,
            competitor_low: 0.0,
            competitor_high: 10.0,
            ctr_alpha: 2.0,
            ctr_beta: 5.0,
            seed: 0,
        }
    }
}

impl GspConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_slots == 0 || self.num_competitors == 0 {
            return bad("slots and competitors must be positive".into());
        }
        if self.num_slots > self.num_competitors {
            return bad(format!(
                "{} slots exceed {} competitors",
                self.num_slots, self.num_competitors
            ));
        }
        if !(self.competitor_low >= 0.0 && self.competitor_low < self.competitor_high) {
            return bad(format!(
                "competitor bid range [{}, {}] must satisfy 0 <= low < high",
                self.competitor_low, self.competitor_high
            ));
        }
        if !(self.ctr_alpha > 0.0 && self.ctr_beta > 0.0) {
            return bad("CTR Beta parameters must be positive".into());
        }
        Ok(())
    }
}

/// `U = max CTR (1) * max grid bid`: allocation is at most 1 and the payment
/// never exceeds the CTR times the test bid.
pub fn gsp_utility_bound(grid: &BidGrid) -> Result<UtilityBound> {
    grid.max_bid()
        .map(|b| UtilityBound(b))
        .ok_or_else(|| Error::InvalidGrid("empty grid".into()))
}

/// Outcome of a GSP auction with the given competitor bids and descending CTRs.
pub fn gsp_outcome(test_bid: f64, competitor_bids: &[f64], ctrs: &[f64]) -> AuctionOutcome {
    let mut above = 0;
    let mut next_below = 0.0f64;
    for &b in competitor_bids {
        if b >= test_bid {
            above += 1;
        } else if b > next_below {
            next_below = b;
        }
    }
    match ctrs.get(above) {
        Some(&ctr) => AuctionOutcome::new(ctr, ctr * next_below),
        None => AuctionOutcome::LOSS,
    }
}

/// Outcome of a single-slot second-price auction (CTR 1).
pub fn second_price_outcome(test_bid: f64, competitor_bids: &[f64]) -> AuctionOutcome {
    let top = competitor_bids.iter().copied().fold(0.0, f64::max);
    if competitor_bids.is_empty() || test_bid > top {
        AuctionOutcome::new(1.0, top)
    } else {
        AuctionOutcome::LOSS
    }
}

/// Beta sampler. With integer shapes `(a, b)` a draw is the `a`-th smallest
/// of `a + b - 1` uniforms, which is far cheaper than the gamma-ratio method.
#[derive(Debug, Clone)]
enum CtrSampler {
    OrderStatistic { rank: usize, count: usize },
    Gamma(Beta<f64>),
}

impl CtrSampler {
    const MAX_UNIFORMS: usize = 32;

    fn new(alpha: f64, beta: f64) -> Result<Self> {
        let integral = |x: f64| x.fract() == 0.0 && x >= 1.0;
        if integral(alpha) && integral(beta) && alpha + beta - 1.0 <= Self::MAX_UNIFORMS as f64 {
            return Ok(Self::OrderStatistic { rank: alpha as usize, count: (alpha + beta) as usize - 1 });
        }
        Beta::new(alpha, beta)
            .map(Self::Gamma)
            .map_err(|e| Error::InvalidConfig(format!("CTR distribution: {e}")))
    }

    fn sample(&self, rng: &mut SimRng) -> f64 {
        match *self {
            Self::OrderStatistic { rank, count } => {
                // The `rank` smallest draws so far, ascending.
                let mut smallest = [1.0f64; Self::MAX_UNIFORMS];
                let smallest = &mut smallest[..rank];
                for _ in 0..count {
                    let mut x: f64 = rng.random();
                    for slot in smallest.iter_mut() {
                        let lo = if x < *slot { x } else { *slot };
                        x = if x < *slot { *slot } else { x };
                        *slot = lo;
                    }
                }
                smallest[rank - 1]
            }
            Self::Gamma(ref d) => d.sample(rng),
        }
    }
}

/// Stochastic GSP market of [`GspConfig`].
#[derive(Debug, Clone)]
pub struct GspEnvironment {
    config: GspConfig,
    ctr_dist: CtrSampler,
    rng: SimRng,
    ctrs: Vec<f64>,
}

impl GspEnvironment {
    pub fn new(config: GspConfig) -> Result<Self> {
        config.validate()?;
        let ctr_dist = CtrSampler::new(config.ctr_alpha, config.ctr_beta)?;
        let rng = seeded_rng(config.seed, 0);
        let ctrs = Vec::with_capacity(config.num_slots);
        Ok(Self { config, ctr_dist, rng, ctrs })
    }

    pub fn config(&self) -> &GspConfig {
        &self.config
    }

    fn competitor_bid(&mut self) -> f64 {
        let (lo, hi) = (self.config.competitor_low, self.config.competitor_high);
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    fn fill_ctrs(&mut self) {
        self.ctrs.clear();
        for _ in 0..self.config.num_slots {
            let c = self.ctr_dist.sample(&mut self.rng);
            self.ctrs.push(c);
        }
        self.ctrs.sort_unstable_by(|a, b| b.total_cmp(a));
    }

    /// Draws all slot CTRs and returns the one at `rank` (0 = largest), equal
    /// to `fill_ctrs` followed by indexing.
    fn ranked_ctr(&mut self, rank: usize) -> f64 {
        const MAX_RANK: usize = 64;
        if rank >= MAX_RANK {
            self.fill_ctrs();
            return self.ctrs[rank];
        }
        let mut largest = [f64::NEG_INFINITY; MAX_RANK];
        let keep = &mut largest[..=rank];
        for _ in 0..self.config.num_slots {
            let mut x = self.ctr_dist.sample(&mut self.rng);
            for slot in keep.iter_mut() {
                let hi = if x > *slot { x } else { *slot };
                x = if x > *slot { *slot } else { x };
                *slot = hi;
            }
        }
        keep[rank]
    }

    /// Draws one auction's competitor bids followed by its descending CTRs.
    /// [`AuctionEnvironment::sample`] consumes the generator in the same
    /// order, but skips the CTR draw when the test bidder gets no slot.
    pub fn draw_auction(&mut self) -> (Vec<f64>, Vec<f64>) {
        let bids = (0..self.config.num_competitors)
            .map(|_| self.competitor_bid())
            .collect();
        self.fill_ctrs();
        (bids, self.ctrs.clone())
    }
}

impl AuctionEnvironment for GspEnvironment {
    fn sample(&mut self, bid: f64) -> AuctionOutcome {
        let mut above = 0;
        let mut next_below = 0.0f64;
        for _ in 0..self.config.num_competitors {
            let b = self.competitor_bid();
            // Kept branch-free for speed.
            let below = if b < bid { b } else { 0.0 };
            above += usize::from(b >= bid);
            next_below = if below > next_below { below } else { next_below };
        }
        if above >= self.config.num_slots {
            return AuctionOutcome::LOSS;
        }
        let ctr = self.ranked_ctr(above);
        AuctionOutcome::new(ctr, ctr * next_below)
    }

    fn reseed(&mut self, seed: u64) {
        self.config.seed = seed;
        self.rng = seeded_rng(seed, 0);
    }

    fn utility_bound(&self, grid: &BidGrid) -> Result<UtilityBound> {
        gsp_utility_bound(grid)
    }
}

/// Truthful control: one slot with CTR 1, priced at the highest competitor bid.
/// The test bidder must strictly exceed every competitor to win.
#[derive(Debug, Clone)]
pub struct SecondPriceEnvironment {
    num_competitors: usize,
    low: f64,
    high: f64,
    rng: SimRng,
}

impl SecondPriceEnvironment {
    /// Uses the competitor part of `config`; slots and CTRs are ignored.
    pub fn new(config: &GspConfig) -> Result<Self> {
        if config.num_competitors == 0 {
            return Err(Error::InvalidConfig("need at least one competitor".into()));
        }
        if !(config.competitor_low >= 0.0 && config.competitor_low < config.competitor_high) {
            return Err(Error::InvalidConfig("competitor range must satisfy 0 <= low < high".into()));
        }
        Ok(Self {
            num_competitors: config.num_competitors,
            low: config.competitor_low,
            high: config.competitor_high,
            rng: seeded_rng(config.seed, 0),
        })
    }
}

impl AuctionEnvironment for SecondPriceEnvironment {
    fn sample(&mut self, bid: f64) -> AuctionOutcome {
        let mut top = 0.0f64;
        for _ in 0..self.num_competitors {
            let b = self.low + (self.high - self.low) * self.rng.random::<f64>();
            top = top.max(b);
        }
        if bid > top {
            AuctionOutcome::new(1.0, top)
        } else {
            AuctionOutcome::LOSS
        }
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = seeded_rng(seed, 0);
    }

    fn utility_bound(&self, grid: &BidGrid) -> Result<UtilityBound> {
        gsp_utility_bound(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::utility;

    #[test]
    fn two_slot_micro_case() {
        let ctrs = [1.0, 0.5];
        let comp = [4.0, 2.0];
        assert_eq!(gsp_outcome(5.0, &comp, &ctrs), AuctionOutcome::new(1.0, 4.0));
        assert_eq!(gsp_outcome(3.0, &comp, &ctrs), AuctionOutcome::new(0.5, 1.0));
        assert_eq!(gsp_outcome(1.0, &comp, &ctrs), AuctionOutcome::LOSS);
    }

    #[test]
    fn competitor_wins_ties_and_bottom_slot_pays_zero() {
        let ctrs = [1.0, 0.5];
        assert_eq!(gsp_outcome(4.0, &[4.0, 2.0], &ctrs), AuctionOutcome::new(0.5, 1.0));
        assert_eq!(gsp_outcome(1.0, &[4.0, 2.0, 6.0], &[1.0, 0.5, 0.2, 0.1]), AuctionOutcome::new(0.1, 0.0));
    }

    #[test]
    fn second_price_examples() {
        assert_eq!(second_price_outcome(5.0, &[4.0, 1.0]), AuctionOutcome::new(1.0, 4.0));
        assert_eq!(second_price_outcome(4.0, &[4.0, 1.0]), AuctionOutcome::LOSS);
        assert_eq!(second_price_outcome(0.0, &[0.3, 1.0]), AuctionOutcome::LOSS);
    }

    #[test]
    fn utility_bound_is_max_bid() {
        assert_eq!(gsp_utility_bound(&BidGrid::cents_to_ten()).unwrap().value(), 10.0);
        assert_eq!(gsp_utility_bound(&BidGrid::uniform(0.1, 1.0, 0.1).unwrap()).unwrap().value(), 1.0);
        let empty: std::result::Result<BidGrid, _> = BidGrid::from_levels(vec![]);
        assert!(empty.is_err());
    }

    #[test]
    fn config_validation() {
        assert!(GspConfig::default().validate().is_ok());
        assert!(GspConfig { num_slots: 21, ..Default::default() }.validate().is_err());
        assert!(GspConfig { competitor_low: 10.0, ..Default::default() }.validate().is_err());
        assert!(GspConfig { ctr_alpha: 0.0, ..Default::default() }.validate().is_err());
        assert!(GspEnvironment::new(GspConfig { num_competitors: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn ctrs_descending_and_sample_matches_pure_outcome() {
        let mut env = GspEnvironment::new(GspConfig::default()).unwrap();
        let grid = BidGrid::uniform(0.5, 10.0, 0.5).unwrap();
        for seed in 0..300u64 {
            env.reseed(seed);
            let (bids, ctrs) = env.draw_auction();
            assert!(ctrs.windows(2).all(|w| w[0] >= w[1]));
            assert!(ctrs.iter().all(|c| (0.0..=1.0).contains(c)));
            let test_bid = grid.level(seed as usize % grid.len());
            env.reseed(seed);
            let out = env.sample(test_bid);
            assert_eq!(out, gsp_outcome(test_bid, &bids, &ctrs));
            for &v in grid.levels() {
                assert!(utility(v, &out).abs() <= 10.0);
            }
        }
    }

    #[test]
    fn monotone_in_own_bid() {
        let mut env = GspEnvironment::new(GspConfig::default()).unwrap();
        for seed in 0..200u64 {
            env.reseed(seed);
            let (bids, ctrs) = env.draw_auction();
            let mut prev = AuctionOutcome::LOSS;
            for k in 0..=200 {
                let out = gsp_outcome(k as f64 * 0.05, &bids, &ctrs);
                assert!(out.allocation >= prev.allocation);
                assert!(out.payment >= prev.payment);
                prev = out;
            }
        }
    }

    #[test]
    fn ctr_sampler_moments() {
        for (a, b) in [(2.0, 5.0), (1.0, 3.0), (2.5, 4.0)] {
            let sampler = CtrSampler::new(a, b).unwrap();
            let mut rng = seeded_rng(5, 0);
            let k = 400_000;
            let draws: Vec<f64> = (0..k).map(|_| sampler.sample(&mut rng)).collect();
            let mean = draws.iter().sum::<f64>() / k as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k as f64;
            let want_var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
            assert!((mean - a / (a + b)).abs() < 2e-3, "{a},{b}: mean {mean}");
            assert!((var - want_var).abs() < 1e-3, "{a},{b}: var {var}");
        }
        assert!(matches!(CtrSampler::new(2.0, 5.0).unwrap(), CtrSampler::OrderStatistic { rank: 2, count: 6 }));
        assert!(matches!(CtrSampler::new(2.5, 5.0).unwrap(), CtrSampler::Gamma(_)));
    }

    #[test]
    fn reseed_replays_bit_for_bit() {
        let mut env = GspEnvironment::new(GspConfig::default()).unwrap();
        let mean = |env: &mut GspEnvironment| {
            env.reseed(42);
            (0..100_000).map(|_| env.sample(8.0).allocation).sum::<f64>() / 1e5
        };
        let a = mean(&mut env);
        let b = mean(&mut env);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
