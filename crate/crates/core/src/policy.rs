//! Bid-selection policies.
//!
//! Every timestep uses `m + 1` blocks of `n / (m + 1)` auctions. A policy turns
//! the current [`ArmStats`] into a [`RoundPlan`]; [`execute_round`] runs the
//! blocks, folds the observations back into the statistics and reports the
//! round's empirical IC regret.
//!
//! Ties are always broken towards the lowest bid index (and then the lowest
//! value index), so runs replay exactly for a fixed seed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::index;
use rand::Rng;

use crate::auction::{block_size, empirical_utility, sample_block, AuctionEnvironment, BidGrid, BlockObservation, SimRng};
use crate::error::{Error, Result};
use crate::estimator::{ucb_utility, ArmStats, UcbContext};

/// Which learner drives the bids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// UCB on utility for a known valuation.
    RegretUcbKnownValue,
    /// UCB on regret over (value, bid) pairs; the value is bid in the last block.
    RegretUcbDsp,
    /// UCB on regret where all `m + 1` blocks are probes and any two of them
    /// form a (value, bid) pair.
    RegretUcbSwitching,
    /// Uniformly random distinct bids (and a random value when none is known).
    RandomBids,
    /// Random plan with probability `epsilon`, otherwise greedy on point estimates.
    EpsilonGreedy(f64),
}

impl PolicyKind {
    pub fn label(&self) -> String {
        match self {
            Self::RegretUcbKnownValue => "regret-ucb-known-v".into(),
            Self::RegretUcbDsp => "regret-ucb-dsp".into(),
            Self::RegretUcbSwitching => "regret-ucb-switching".into(),
            Self::RandomBids => "random-bids".into(),
            Self::EpsilonGreedy(e) => format!("epsilon-greedy-{e}"),
        }
    }
}

/// Ranking used for the DSP planner's remaining `m - 1` probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DspProbeIndex {
    /// `UCB_rgt(v_t, .)`, as in the DSP pseudocode.
    #[default]
    Regret,
    /// `UCB_u(v_t, .)`, as in the DSP prose description.
    Utility,
}

/// How the blocks of a round relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanLayout {
    /// `m` probe blocks plus a truthful block bidding the anchor value.
    Anchored,
    /// `m + 1` distinct bids; every ordered pair is a (value, bid) candidate.
    Switching,
}

/// Bids for one timestep. Blocks `1..=m` get `probe_bids`, block `m + 1` gets
/// `anchor_bid`. All entries are grid indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    pub probe_bids: Vec<usize>,
    pub anchor_bid: usize,
    pub layout: PlanLayout,
}

impl RoundPlan {
    /// Bids in block order, anchor last.
    pub fn blocks(&self) -> impl Iterator<Item = usize> + '_ {
        self.probe_bids.iter().copied().chain(std::iter::once(self.anchor_bid))
    }

    /// Probe bids are pairwise distinct, and in the switching layout the anchor
    /// differs from all of them too.
    pub fn is_well_formed(&self) -> bool {
        let mut seen: Vec<usize> = self.probe_bids.clone();
        if self.layout == PlanLayout::Switching {
            seen.push(self.anchor_bid);
        }
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

/// Indices of the `k` largest scores, ties to the lowest index, best first.
fn top_k(scores: impl Iterator<Item = (usize, f64)>, k: usize) -> Vec<usize> {
    let mut ranked: Vec<(usize, f64)> = scores.collect();
    ranked.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked.into_iter().map(|(i, _)| i).collect()
}

/// Runs one block of `n / (m + 1)` auctions for every grid bid and seeds the
/// statistics with it; every count ends at 1.
pub fn init_probe<E: AuctionEnvironment + ?Sized>(
    env: &mut E,
    grid: &BidGrid,
    m: usize,
    n: usize,
) -> Result<ArmStats> {
    let size = block_size(n, m + 1)?;
    let mut stats = ArmStats::new(grid);
    for bid in 0..grid.len() {
        let obs = sample_block(env, grid, bid, size)?;
        stats.absorb(&obs)?;
    }
    Ok(stats)
}

/// Known valuation: the `m` bids with the largest utility UCB; anchor is `value`.
pub fn plan_known_value(stats: &ArmStats, ctx: &UcbContext, value: usize) -> RoundPlan {
    let probes = top_k((0..stats.len()).map(|b| (b, ucb_utility(stats, ctx, value, b))), ctx.m);
    RoundPlan { probe_bids: probes, anchor_bid: value, layout: PlanLayout::Anchored }
}

/// Per-bid regret radii; `radius(min(n_v, n_b)) == max(r[v], r[b])` because
/// the radius is non-increasing in the count.
fn regret_radii(stats: &ArmStats, ctx: &UcbContext) -> Vec<f64> {
    stats.counts().iter().map(|&c| ctx.regret_radius(c)).collect()
}

/// Pair with the largest score; ties go to the smallest `(v, b)`.
fn argmax_pair(arms: usize, mut score: impl FnMut(usize, usize) -> f64, skip_diagonal: bool) -> (usize, usize) {
    let mut best = (0, if skip_diagonal && arms > 1 { 1 } else { 0 });
    let mut best_score = f64::NEG_INFINITY;
    for v in 0..arms {
        for b in 0..arms {
            if skip_diagonal && v == b {
                continue;
            }
            let s = score(v, b);
            if s > best_score {
                best_score = s;
                best = (v, b);
            }
        }
    }
    best
}

/// Regret UCB of every ordered pair, computed with per-bid radii. Equal to
/// [`ucb_regret`] entry by entry.
fn regret_scores(stats: &ArmStats, ctx: &UcbContext) -> PairTable {
    let arms = stats.len();
    let radii = regret_radii(stats, ctx);
    let mut values = Vec::with_capacity(arms * arms);
    for v in 0..arms {
        let level = stats.level(v);
        let truthful = stats.utility_estimate(level, v);
        for b in 0..arms {
            let point = stats.utility_estimate(level, b) - truthful;
            values.push(point + radii[v].max(radii[b]));
        }
    }
    PairTable { arms, values }
}

/// Unknown valuation: `(v_t, b_1)` maximizes the regret UCB over all pairs;
/// for `m >= 2` the other probes are the best distinct bids under `v_t`.
pub fn plan_dsp(stats: &ArmStats, ctx: &UcbContext, probe_index: DspProbeIndex) -> RoundPlan {
    let arms = stats.len();
    let table = regret_scores(stats, ctx);
    let (value, first) = argmax_pair(arms, |v, b| table.get(v, b), false);
    let mut probes = vec![first];
    if ctx.m >= 2 {
        let rest = (0..arms).filter(|&b| b != first);
        let others = match probe_index {
            DspProbeIndex::Regret => top_k(rest.map(|b| (b, table.get(value, b))), ctx.m - 1),
            DspProbeIndex::Utility => {
                top_k(rest.map(|b| (b, ucb_utility(stats, ctx, value, b))), ctx.m - 1)
            }
        };
        probes.extend(others);
    }
    RoundPlan { probe_bids: probes, anchor_bid: value, layout: PlanLayout::Anchored }
}

/// Dense table of scores indexed by ordered (value, bid) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable {
    arms: usize,
    values: Vec<f64>,
}

impl PairTable {
    pub fn new(arms: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != arms * arms {
            return Err(Error::InvalidConfig(format!(
                "pair table needs {} entries, got {}",
                arms * arms,
                values.len()
            )));
        }
        Ok(Self { arms, values })
    }

    pub fn from_fn(arms: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let values = (0..arms * arms).map(|i| f(i / arms, i % arms)).collect();
        Self { arms, values }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn get(&self, value: usize, bid: usize) -> f64 {
        self.values[value * self.arms + bid]
    }
}

#[derive(PartialEq)]
struct RankedPair {
    score: f64,
    value: usize,
    bid: usize,
}

impl Eq for RankedPair {}

impl Ord for RankedPair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.value.cmp(&self.value))
            .then_with(|| other.bid.cmp(&self.bid))
    }
}

impl PartialOrd for RankedPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy pair cover: repeatedly take the best off-diagonal pair with at least
/// one member outside the chosen set, until `m + 1` bids are chosen. When only
/// one slot is left and both members are new, `rng` picks which one joins.
///
/// Returns the bids in the order they joined. Requires `2 <= m + 1 <= arms`.
pub fn generate_bids(table: &PairTable, m: usize, rng: &mut SimRng) -> Vec<usize> {
    let arms = table.arms();
    let target = m + 1;
    assert!(target >= 2 && target <= arms, "need 2 <= m + 1 <= |B|");
    let pairs: Vec<RankedPair> = (0..arms)
        .flat_map(|v| (0..arms).filter(move |&b| b != v).map(move |b| (v, b)))
        .map(|(value, bid)| RankedPair { score: table.get(value, bid), value, bid })
        .collect();
    let mut heap = BinaryHeap::from(pairs);
    let mut chosen = Vec::with_capacity(target);
    let mut taken = vec![false; arms];
    while chosen.len() < target {
        let Some(top) = heap.pop() else { break };
        match (taken[top.value], taken[top.bid]) {
            (true, true) => continue,
            (false, false) if chosen.len() + 2 > target => {
                let pick = if rng.random_bool(0.5) { top.value } else { top.bid };
                taken[pick] = true;
                chosen.push(pick);
            }
            _ => {
                for b in [top.value, top.bid] {
                    if !taken[b] {
                        taken[b] = true;
                        chosen.push(b);
                    }
                }
            }
        }
    }
    chosen
}

/// Switching variant: `m + 1` distinct bids from [`generate_bids`] on the
/// regret UCB table. The last generated bid takes the `m + 1`-th block.
pub fn plan_switching(stats: &ArmStats, ctx: &UcbContext, rng: &mut SimRng) -> RoundPlan {
    let table = regret_scores(stats, ctx);
    let mut bids = generate_bids(&table, ctx.m, rng);
    let anchor = bids.pop().expect("m + 1 >= 2 bids");
    RoundPlan { probe_bids: bids, anchor_bid: anchor, layout: PlanLayout::Switching }
}

/// `m` distinct uniform bids. The anchor is `value` when known, otherwise a
/// uniform grid level.
pub fn plan_random(arms: usize, m: usize, value: Option<usize>, rng: &mut SimRng) -> RoundPlan {
    let probes = index::sample(rng, arms, m).into_vec();
    let anchor = value.unwrap_or_else(|| rng.random_range(0..arms));
    RoundPlan { probe_bids: probes, anchor_bid: anchor, layout: PlanLayout::Anchored }
}

/// Greedy on point estimates. Known value: top-`m` estimated utilities.
/// Unknown value: the pair with the largest estimated regret, then the
/// `m - 1` best estimated utilities under that value.
pub fn plan_greedy(stats: &ArmStats, m: usize, value: Option<usize>) -> RoundPlan {
    let arms = stats.len();
    match value {
        Some(v) => {
            let level = stats.level(v);
            let probes = top_k((0..arms).map(|b| (b, stats.utility_estimate(level, b))), m);
            RoundPlan { probe_bids: probes, anchor_bid: v, layout: PlanLayout::Anchored }
        }
        None => {
            let (v, first) = argmax_pair(
                arms,
                |v, b| {
                    let level = stats.level(v);
                    stats.utility_estimate(level, b) - stats.utility_estimate(level, v)
                },
                false,
            );
            let level = stats.level(v);
            let mut probes = vec![first];
            probes.extend(top_k(
                (0..arms).filter(|&b| b != first).map(|b| (b, stats.utility_estimate(level, b))),
                m - 1,
            ));
            RoundPlan { probe_bids: probes, anchor_bid: v, layout: PlanLayout::Anchored }
        }
    }
}

/// With probability `epsilon` a [`plan_random`] plan, otherwise [`plan_greedy`].
pub fn plan_epsilon_greedy(
    stats: &ArmStats,
    m: usize,
    epsilon: f64,
    value: Option<usize>,
    rng: &mut SimRng,
) -> RoundPlan {
    if rng.random::<f64>() < epsilon {
        plan_random(stats.len(), m, value, rng)
    } else {
        plan_greedy(stats, m, value)
    }
}

/// What one executed round produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    /// One observation per block, in block order (anchor last).
    pub observations: Vec<BlockObservation>,
    /// Anchored: `max_j u_j(v, b_j) - u_anchor(v, v)`.
    /// Switching: `max_{i != j} u_j(b_i, b_j) - u_i(b_i, b_i)`.
    pub empirical_regret: f64,
}

/// Empirical IC regret of a round's block observations.
pub fn empirical_round_regret(grid: &BidGrid, plan: &RoundPlan, observations: &[BlockObservation]) -> f64 {
    match plan.layout {
        PlanLayout::Anchored => {
            let (probes, anchor) = observations.split_at(observations.len() - 1);
            let v = grid.level(anchor[0].bid);
            let truthful = empirical_utility(v, &anchor[0]);
            probes
                .iter()
                .map(|o| empirical_utility(v, o) - truthful)
                .fold(f64::NEG_INFINITY, f64::max)
        }
        PlanLayout::Switching => {
            let mut best = f64::NEG_INFINITY;
            for (i, oi) in observations.iter().enumerate() {
                let v = grid.level(oi.bid);
                let truthful = empirical_utility(v, oi);
                for (j, oj) in observations.iter().enumerate() {
                    if i != j {
                        best = best.max(empirical_utility(v, oj) - truthful);
                    }
                }
            }
            best
        }
    }
}

/// Samples one block per planned bid and updates `stats` with every probe
/// block. The anchor block of an anchored plan is absorbed only when
/// `absorb_anchor` is set; switching plans absorb every block.
pub fn execute_round<E: AuctionEnvironment + ?Sized>(
    env: &mut E,
    grid: &BidGrid,
    plan: &RoundPlan,
    stats: &mut ArmStats,
    ctx: &UcbContext,
    absorb_anchor: bool,
) -> Result<RoundResult> {
    let size = block_size(ctx.n, ctx.m + 1)?;
    if plan.probe_bids.len() + 1 != ctx.m + 1 {
        return Err(Error::InvalidConfig(format!(
            "plan has {} probe blocks, expected m = {}",
            plan.probe_bids.len(),
            ctx.m
        )));
    }
    let observations = plan
        .blocks()
        .map(|b| sample_block(env, grid, b, size))
        .collect::<Result<Vec<_>>>()?;
    let last = observations.len() - 1;
    for (k, obs) in observations.iter().enumerate() {
        if k < last || absorb_anchor || plan.layout == PlanLayout::Switching {
            stats.absorb(obs)?;
        }
    }
    let empirical_regret = empirical_round_regret(grid, plan, &observations);
    Ok(RoundResult { observations, empirical_regret })
}

/// Problem the learner is solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    /// Advertiser with the known valuation at this grid index.
    Advertiser(usize),
    /// Worst case over all valuations.
    Dsp,
}

/// Full learner configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub setting: Setting,
    pub dsp_probe_index: DspProbeIndex,
    /// Absorb the truthful block for a known valuation.
    pub update_anchor: bool,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, setting: Setting) -> Result<Self> {
        let ok = match (kind, setting) {
            (PolicyKind::RegretUcbKnownValue, Setting::Advertiser(_)) => true,
            (PolicyKind::RegretUcbKnownValue, Setting::Dsp) => false,
            (PolicyKind::RegretUcbDsp | PolicyKind::RegretUcbSwitching, Setting::Dsp) => true,
            (PolicyKind::RegretUcbDsp | PolicyKind::RegretUcbSwitching, Setting::Advertiser(_)) => false,
            (PolicyKind::EpsilonGreedy(e), _) => (0.0..=1.0).contains(&e),
            (PolicyKind::RandomBids, _) => true,
        };
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "policy {} is not valid for {:?}",
                kind.label(),
                setting
            )));
        }
        Ok(Self { kind, setting, dsp_probe_index: DspProbeIndex::default(), update_anchor: false })
    }

    pub fn known_value(&self) -> Option<usize> {
        match self.setting {
            Setting::Advertiser(v) => Some(v),
            Setting::Dsp => None,
        }
    }

    /// Whether the anchor block feeds the statistics. Unknown-value learners
    /// always learn from it.
    pub fn absorbs_anchor(&self) -> bool {
        match self.setting {
            Setting::Advertiser(_) => self.update_anchor,
            Setting::Dsp => true,
        }
    }
}

/// A learner bound to its own statistics and random stream.
#[derive(Debug, Clone)]
pub struct Learner {
    spec: PolicySpec,
    stats: ArmStats,
    rng: SimRng,
}

impl Learner {
    /// Runs initialization against `env` and returns a learner ready for `t = 1`.
    pub fn initialize<E: AuctionEnvironment + ?Sized>(
        spec: PolicySpec,
        env: &mut E,
        grid: &BidGrid,
        m: usize,
        n: usize,
        rng: SimRng,
    ) -> Result<Self> {
        if let Some(v) = spec.known_value() {
            grid.check_index(v)?;
        }
        if m == 0 || m >= grid.len() {
            return Err(Error::InvalidConfig(format!("m = {m} does not fit a grid of {} bids", grid.len())));
        }
        let stats = init_probe(env, grid, m, n)?;
        Ok(Self { spec, stats, rng })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }

    pub fn plan(&mut self, ctx: &UcbContext) -> RoundPlan {
        let value = self.spec.known_value();
        match self.spec.kind {
            PolicyKind::RegretUcbKnownValue => {
                plan_known_value(&self.stats, ctx, value.expect("validated setting"))
            }
            PolicyKind::RegretUcbDsp => plan_dsp(&self.stats, ctx, self.spec.dsp_probe_index),
            PolicyKind::RegretUcbSwitching => plan_switching(&self.stats, ctx, &mut self.rng),
            PolicyKind::RandomBids => plan_random(self.stats.len(), ctx.m, value, &mut self.rng),
            PolicyKind::EpsilonGreedy(e) => {
                plan_epsilon_greedy(&self.stats, ctx.m, e, value, &mut self.rng)
            }
        }
    }

    /// Plans, executes and learns from one timestep.
    pub fn step<E: AuctionEnvironment + ?Sized>(
        &mut self,
        env: &mut E,
        grid: &BidGrid,
        ctx: &UcbContext,
    ) -> Result<(RoundPlan, RoundResult)> {
        let plan = self.plan(ctx);
        debug_assert!(plan.is_well_formed());
        let absorb_anchor = self.spec.absorbs_anchor();
        let result = execute_round(env, grid, &plan, &mut self.stats, ctx, absorb_anchor)?;
        Ok((plan, result))
    }
}
