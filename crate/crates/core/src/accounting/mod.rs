//! Ground truth and regret bookkeeping.
//!
//! The learner never sees [`GroundTruth`]; it is a high-sample Monte Carlo
//! estimate of the expected allocation `g*(b)` and payment `p*(b)` used only to
//! score plans. Gaps are measured against the best bid for a known value, or
//! against the best (value, bid) pair when the value is unknown.

pub mod bounds;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::auction::{derive_seed, AuctionEnvironment, BidGrid};
use crate::error::{Error, Result};
use crate::policy::{PlanLayout, RoundPlan, Setting};

/// Seed sub-stream reserved for the oracle.
const ORACLE_STREAM: u64 = 0x0BAC_1E00;

/// Expected allocation/payment per bid with their sampling moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    levels: Vec<f64>,
    alloc: Vec<f64>,
    pay: Vec<f64>,
    var_alloc: Vec<f64>,
    var_pay: Vec<f64>,
    cov: Vec<f64>,
    samples: usize,
    best_pair: (usize, usize),
}

#[derive(Default, Clone, Copy)]
struct Moments {
    g: f64,
    p: f64,
    gg: f64,
    pp: f64,
    gp: f64,
}

/// Monte Carlo estimate of `g*` and `p*` with `samples_per_bid` independent
/// auctions per bid. Bid `i` runs on its own stream derived from `seed`, so
/// the result does not depend on thread scheduling.
pub fn estimate_ground_truth<E>(env: &E, grid: &BidGrid, samples_per_bid: usize, seed: u64) -> Result<GroundTruth>
where
    E: AuctionEnvironment + Clone + Sync,
{
    if samples_per_bid == 0 {
        return Err(Error::InvalidConfig("oracle needs at least one sample per bid".into()));
    }
    let moments: Vec<Moments> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut local = env.clone();
            local.reseed(derive_seed(seed, ORACLE_STREAM + i as u64));
            let level = grid.level(i);
            let mut m = Moments::default();
            for _ in 0..samples_per_bid {
                let out = local.sample(level);
                m.g += out.allocation;
                m.p += out.payment;
                m.gg += out.allocation * out.allocation;
                m.pp += out.payment * out.payment;
                m.gp += out.allocation * out.payment;
            }
            m
        })
        .collect();
    let k = samples_per_bid as f64;
    let mut alloc = Vec::with_capacity(grid.len());
    let mut pay = Vec::with_capacity(grid.len());
    let mut var_alloc = Vec::with_capacity(grid.len());
    let mut var_pay = Vec::with_capacity(grid.len());
    let mut cov = Vec::with_capacity(grid.len());
    let bessel = if samples_per_bid > 1 { k / (k - 1.0) } else { 0.0 };
    for m in moments {
        let (g, p) = (m.g / k, m.p / k);
        alloc.push(g);
        pay.push(p);
        var_alloc.push(((m.gg / k - g * g) * bessel).max(0.0));
        var_pay.push(((m.pp / k - p * p) * bessel).max(0.0));
        cov.push((m.gp / k - g * p) * bessel);
    }
    Ok(GroundTruth::assemble(grid, alloc, pay, var_alloc, var_pay, cov, samples_per_bid))
}

impl GroundTruth {
    /// Ground truth with exactly known expectations (zero sampling error).
    pub fn from_expectations(grid: &BidGrid, alloc: Vec<f64>, pay: Vec<f64>) -> Result<Self> {
        let k = grid.len();
        if alloc.len() != k || pay.len() != k {
            return Err(Error::InvalidConfig(format!("expectations must have {k} entries")));
        }
        Ok(Self::assemble(grid, alloc, pay, vec![0.0; k], vec![0.0; k], vec![0.0; k], usize::MAX))
    }

    fn assemble(
        grid: &BidGrid,
        alloc: Vec<f64>,
        pay: Vec<f64>,
        var_alloc: Vec<f64>,
        var_pay: Vec<f64>,
        cov: Vec<f64>,
        samples: usize,
    ) -> Self {
        let mut gt = Self {
            levels: grid.levels().to_vec(),
            alloc,
            pay,
            var_alloc,
            var_pay,
            cov,
            samples,
            best_pair: (0, 0),
        };
        let arms = gt.len();
        let mut best = f64::NEG_INFINITY;
        for v in 0..arms {
            for b in 0..arms {
                let r = gt.regret(v, b);
                if r > best {
                    best = r;
                    gt.best_pair = (v, b);
                }
            }
        }
        gt
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, bid: usize) -> f64 {
        self.levels[bid]
    }

    pub fn samples_per_bid(&self) -> usize {
        self.samples
    }

    pub fn allocation(&self, bid: usize) -> f64 {
        self.alloc[bid]
    }

    pub fn payment(&self, bid: usize) -> f64 {
        self.pay[bid]
    }

    /// `u*(v, b) = g*(b) v - p*(b)`.
    pub fn utility(&self, value: usize, bid: usize) -> f64 {
        self.alloc[bid] * self.levels[value] - self.pay[bid]
    }

    /// `rgt(v, b) = u*(v, b) - u*(v, v)`.
    pub fn regret(&self, value: usize, bid: usize) -> f64 {
        self.utility(value, bid) - self.utility(value, value)
    }

    /// Best response `b*` for a known value (lowest bid on ties).
    pub fn best_bid(&self, value: usize) -> usize {
        let mut best = 0;
        for b in 1..self.len() {
            if self.utility(value, b) > self.utility(value, best) {
                best = b;
            }
        }
        best
    }

    /// `(v*, b*)` maximizing `rgt`, lexicographically smallest on ties.
    pub fn best_pair(&self) -> (usize, usize) {
        self.best_pair
    }

    /// `rgt(v*, b*)`.
    pub fn max_regret(&self) -> f64 {
        let (v, b) = self.best_pair;
        self.regret(v, b)
    }

    /// `Delta(b) = u*(v, b*) - u*(v, b)` for a known value.
    pub fn utility_gap(&self, value: usize, bid: usize) -> f64 {
        self.utility(value, self.best_bid(value)) - self.utility(value, bid)
    }

    /// `Delta(v, b) = rgt(v*, b*) - rgt(v, b)`.
    pub fn regret_gap(&self, value: usize, bid: usize) -> f64 {
        self.max_regret() - self.regret(value, bid)
    }

    /// Standard error of the `u*(v, b)` estimate.
    pub fn utility_std_error(&self, value: usize, bid: usize) -> f64 {
        if self.samples == usize::MAX {
            return 0.0;
        }
        let v = self.levels[value];
        let var = v * v * self.var_alloc[bid] + self.var_pay[bid] - 2.0 * v * self.cov[bid];
        (var.max(0.0) / self.samples as f64).sqrt()
    }

    /// Standard error of the `rgt(v, b)` estimate; bids use independent
    /// streams, so the two utility errors add in quadrature.
    pub fn regret_std_error(&self, value: usize, bid: usize) -> f64 {
        if value == bid {
            return 0.0;
        }
        self.utility_std_error(value, bid).hypot(self.utility_std_error(value, value))
    }

    /// Suboptimal gaps `Delta(b)` for all `b != b*`.
    pub fn known_value_gaps(&self, value: usize) -> Vec<f64> {
        let best = self.best_bid(value);
        (0..self.len()).filter(|&b| b != best).map(|b| self.utility_gap(value, b)).collect()
    }

    /// Gaps `Delta(v, b)` for all pairs other than `(v*, b*)`, each tagged with
    /// whether `v == v*`.
    pub fn pair_gaps(&self) -> Vec<(f64, bool)> {
        let (vs, bs) = self.best_pair;
        let top = self.max_regret();
        let mut out = Vec::with_capacity(self.len() * self.len());
        for v in 0..self.len() {
            for b in 0..self.len() {
                if (v, b) != (vs, bs) {
                    out.push((top - self.regret(v, b), v == vs));
                }
            }
        }
        out
    }

    /// Pairs whose regret is within two standard errors of the best pair.
    pub fn near_ties(&self) -> Vec<(usize, usize)> {
        let (vs, bs) = self.best_pair;
        let top = self.max_regret();
        let top_se = self.regret_std_error(vs, bs);
        let mut out = Vec::new();
        for v in 0..self.len() {
            for b in 0..self.len() {
                if (v, b) == (vs, bs) {
                    continue;
                }
                let se = top_se.hypot(self.regret_std_error(v, b));
                if top - self.regret(v, b) <= 2.0 * se {
                    out.push((v, b));
                }
            }
        }
        out
    }

    /// Per-bid table: `bid,g_star,p_star,se_g,se_p`, plus `u_star,rgt` columns
    /// for `value` when given.
    pub fn write_bids_csv(&self, path: &Path, value: Option<usize>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let n = self.samples as f64;
        let se = |var: f64| if self.samples == usize::MAX { 0.0 } else { (var / n).sqrt() };
        match value {
            Some(_) => writeln!(w, "bid,g_star,p_star,se_g,se_p,u_star,rgt")?,
            None => writeln!(w, "bid,g_star,p_star,se_g,se_p")?,
        }
        for b in 0..self.len() {
            write!(
                w,
                "{},{},{},{},{}",
                self.levels[b],
                self.alloc[b],
                self.pay[b],
                se(self.var_alloc[b]),
                se(self.var_pay[b])
            )?;
            if let Some(v) = value {
                write!(w, ",{},{}", self.utility(v, b), self.regret(v, b))?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Long-format pair table: `value,bid,rgt,se_rgt,gap`.
    pub fn write_pairs_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "value,bid,rgt,se_rgt,gap")?;
        for v in 0..self.len() {
            for b in 0..self.len() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    self.levels[v],
                    self.levels[b],
                    self.regret(v, b),
                    self.regret_std_error(v, b),
                    self.regret_gap(v, b)
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Gap charged to a round by the indicator upper bound on pseudo-regret.
///
/// * known value: 0 if `b*` is probed, else `u*(v, b*) - max_j u*(v, b_j)`;
/// * unknown value: 0 if `(v*, b*)` is among `(v_t, b_j)`, else
///   `rgt(v*, b*) - max_j rgt(v_t, b_j)`;
/// * switching: 0 if both `v*` and `b*` are planned, else
///   `rgt(v*, b*) - max_{i, j} rgt(b_i, b_j)`; the diagonal contributes 0.
pub fn instantaneous_gap(gt: &GroundTruth, plan: &RoundPlan, setting: Setting) -> f64 {
    match (setting, plan.layout) {
        (Setting::Advertiser(v), _) => {
            let best = gt.best_bid(v);
            if plan.probe_bids.contains(&best) {
                return 0.0;
            }
            let reached = plan
                .probe_bids
                .iter()
                .map(|&b| gt.utility(v, b))
                .fold(f64::NEG_INFINITY, f64::max);
            gt.utility(v, best) - reached
        }
        (Setting::Dsp, PlanLayout::Anchored) => {
            let (vs, bs) = gt.best_pair();
            let v = plan.anchor_bid;
            if v == vs && plan.probe_bids.contains(&bs) {
                return 0.0;
            }
            let reached = plan
                .probe_bids
                .iter()
                .map(|&b| gt.regret(v, b))
                .fold(f64::NEG_INFINITY, f64::max);
            gt.max_regret() - reached
        }
        (Setting::Dsp, PlanLayout::Switching) => {
            let (vs, bs) = gt.best_pair();
            let bids: Vec<usize> = plan.blocks().collect();
            if bids.contains(&vs) && bids.contains(&bs) {
                return 0.0;
            }
            let mut reached = 0.0f64;
            for &v in &bids {
                for &b in &bids {
                    reached = reached.max(gt.regret(v, b));
                }
            }
            gt.max_regret() - reached
        }
    }
}

/// Running sum of per-round gaps: the tracked pseudo-regret upper bound.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretLedger {
    gaps: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accumulate(&mut self, gap: f64) {
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.gaps.push(gap);
        self.cumulative.push(prev + gap);
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Pseudo-regret after the last recorded round.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// IC regret error `R(T) / T` after `horizon` rounds of the ledger.
pub fn ic_regret_error(ledger: &RegretLedger, horizon: usize) -> Result<f64> {
    if horizon == 0 || horizon > ledger.len() {
        return Err(Error::InvalidConfig(format!(
            "horizon {horizon} outside 1..={}",
            ledger.len()
        )));
    }
    Ok(ledger.cumulative()[horizon - 1] / horizon as f64)
}
