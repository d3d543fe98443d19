//! Repeated policy runs against a shared oracle.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, MarketKind};
use crate::accounting::{estimate_ground_truth, instantaneous_gap, GroundTruth, RegretLedger};
use crate::auction::{derive_seed, seeded_rng, AuctionEnvironment, AuctionOutcome, BidGrid, UtilityBound};
use crate::error::{Error, Result};
use crate::estimator::UcbContext;
use crate::gsp::{GspEnvironment, SecondPriceEnvironment};
use crate::policy::{Learner, PolicySpec, Setting};

/// CSV header of run files.
pub const RUN_HEADER: &str = "policy,rep,t,inst_gap,cum_pseudo_regret,cum_empirical_regret,wall_ms";

/// Learner random stream, kept apart from the market's stream.
const LEARNER_STREAM: u64 = 1;

/// Either simulated market, dispatched statically.
#[derive(Debug, Clone)]
pub enum Market {
    Gsp(GspEnvironment),
    SecondPrice(SecondPriceEnvironment),
}

impl Market {
    pub fn from_config(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        let mut gsp = cfg.gsp.clone();
        gsp.seed = seed;
        Ok(match cfg.market {
            MarketKind::Gsp => Self::Gsp(GspEnvironment::new(gsp)?),
            MarketKind::SecondPrice => Self::SecondPrice(SecondPriceEnvironment::new(&gsp)?),
        })
    }
}

impl AuctionEnvironment for Market {
    fn sample(&mut self, bid: f64) -> AuctionOutcome {
        match self {
            Self::Gsp(e) => e.sample(bid),
            Self::SecondPrice(e) => e.sample(bid),
        }
    }

    fn reseed(&mut self, seed: u64) {
        match self {
            Self::Gsp(e) => e.reseed(seed),
            Self::SecondPrice(e) => e.reseed(seed),
        }
    }

    fn utility_bound(&self, grid: &BidGrid) -> Result<UtilityBound> {
        match self {
            Self::Gsp(e) => e.utility_bound(grid),
            Self::SecondPrice(e) => e.utility_bound(grid),
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub policy: String,
    pub rep: usize,
    pub t: usize,
    pub inst_gap: f64,
    pub cum_pseudo_regret: f64,
    pub cum_empirical_regret: f64,
    pub wall_ms: f64,
}

/// Decimal notation with 12 significant digits; zero is written `0`.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Oracle for the config's market and grid on the dedicated oracle seed.
pub fn build_oracle(cfg: &ExperimentConfig, grid: &BidGrid) -> Result<GroundTruth> {
    let market = Market::from_config(cfg, cfg.oracle_seed)?;
    estimate_ground_truth(&market, grid, cfg.oracle_samples, cfg.oracle_seed)
}

/// Diagnostics about how well the oracle resolves the optimum.
pub fn oracle_warnings(gt: &GroundTruth, setting: Setting) -> Vec<String> {
    let mut out = Vec::new();
    match setting {
        Setting::Advertiser(v) => {
            let best = gt.best_bid(v);
            let se = |b: usize| gt.utility_std_error(v, b);
            let close: Vec<usize> = (0..gt.len())
                .filter(|&b| b != best && gt.utility_gap(v, b) <= 2.0 * se(best).hypot(se(b)))
                .collect();
            if !close.is_empty() {
                out.push(format!(
                    "best bid {} is within 2 oracle standard errors of {} other bid(s) (e.g. {}); ties go to the lowest bid",
                    gt.level(best),
                    close.len(),
                    gt.level(close[0])
                ));
            }
            let small = (0..gt.len())
                .filter(|&b| b != best && gt.utility_gap(v, b) < 10.0 * se(best).hypot(se(b)))
                .count();
            if small > 0 {
                out.push(format!("{small} of {} suboptimal gaps are below 10 oracle standard errors", gt.len() - 1));
            }
        }
        Setting::Dsp => {
            let (vs, bs) = gt.best_pair();
            let ties = gt.near_ties();
            if !ties.is_empty() {
                out.push(format!(
                    "best pair (v={}, b={}) is within 2 oracle standard errors of {} other pair(s) (e.g. v={}, b={}); ties go to the smallest (v, b)",
                    gt.level(vs),
                    gt.level(bs),
                    ties.len(),
                    gt.level(ties[0].0),
                    gt.level(ties[0].1)
                ));
            }
            let se_top = gt.regret_std_error(vs, bs);
            let mut small = 0;
            for v in 0..gt.len() {
                for b in 0..gt.len() {
                    if (v, b) != (vs, bs) && gt.regret_gap(v, b) < 10.0 * se_top.hypot(gt.regret_std_error(v, b)) {
                        small += 1;
                    }
                }
            }
            if small > 0 {
                out.push(format!(
                    "{small} of {} suboptimal pair gaps are below 10 oracle standard errors",
                    gt.len() * gt.len() - 1
                ));
            }
        }
    }
    out
}

/// One policy for one repetition; the market and learner are seeded from
/// `cfg.base_seed + rep`.
pub fn run_single(
    cfg: &ExperimentConfig,
    grid: &BidGrid,
    gt: &GroundTruth,
    spec: PolicySpec,
    rep: usize,
) -> Result<Vec<RunRecord>> {
    let start = Instant::now();
    let seed = cfg.base_seed.wrapping_add(rep as u64);
    let mut market = Market::from_config(cfg, seed)?;
    let bound = market.utility_bound(grid)?.value();
    let rng = seeded_rng(derive_seed(seed, LEARNER_STREAM), 0);
    let mut learner = Learner::initialize(spec, &mut market, grid, cfg.m, cfg.n, rng)?;
    let label = spec.kind.label();
    let mut ledger = RegretLedger::new();
    let mut empirical = 0.0;
    let mut rows = Vec::with_capacity(cfg.horizon);
    for t in 1..=cfg.horizon {
        let ctx = UcbContext::new(t as u64, cfg.m, cfg.n, bound, grid.len())?;
        let (plan, result) = learner.step(&mut market, grid, &ctx)?;
        let gap = instantaneous_gap(gt, &plan, spec.setting);
        ledger.accumulate(gap);
        empirical += result.empirical_regret;
        rows.push(RunRecord {
            policy: label.clone(),
            rep,
            t,
            inst_gap: gap,
            cum_pseudo_regret: ledger.total(),
            cum_empirical_regret: empirical,
            wall_ms: if cfg.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        });
    }
    Ok(rows)
}

/// All policies and repetitions of `cfg` against `gt`, ordered by policy (as
/// listed), then repetition, then `t`. Repetitions run in parallel.
pub fn simulate(cfg: &ExperimentConfig, gt: &GroundTruth) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    if gt.len() != grid.len() {
        return Err(Error::InvalidConfig(format!(
            "oracle covers {} bids but the grid has {}",
            gt.len(),
            grid.len()
        )));
    }
    let specs = cfg.policy_specs(&grid)?;
    let jobs: Vec<(PolicySpec, usize)> =
        specs.iter().flat_map(|&s| (0..cfg.reps).map(move |r| (s, r))).collect();
    let runs = jobs
        .into_par_iter()
        .map(|(spec, rep)| run_single(cfg, &grid, gt, spec, rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(runs.into_iter().flatten().collect())
}

/// Writes records in the run CSV format.
pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = String::with_capacity(64 * (records.len() + 1));
    text.push_str(RUN_HEADER);
    text.push('\n');
    for r in records {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            r.policy,
            r.rep,
            r.t,
            format_sig12(r.inst_gap),
            format_sig12(r.cum_pseudo_regret),
            format_sig12(r.cum_empirical_regret),
            format_sig12(r.wall_ms)
        );
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// What [`run_experiment`] produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv_path: PathBuf,
    pub rows: usize,
    pub warnings: Vec<String>,
}

/// Builds the oracle, simulates every policy and repetition and writes the
/// results CSV named by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let gt = build_oracle(cfg, &grid)?;
    run_with_oracle(cfg, &gt)
}

/// [`run_experiment`] with a prebuilt oracle.
pub fn run_with_oracle(cfg: &ExperimentConfig, gt: &GroundTruth) -> Result<RunReport> {
    let records = simulate(cfg, gt)?;
    let path = cfg.csv_path();
    write_records(&path, &records)?;
    let grid = cfg.grid()?;
    Ok(RunReport { csv_path: path, rows: records.len(), warnings: oracle_warnings(gt, cfg.setting(&grid)?) })
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    N,
    M,
    Horizon,
    Epsilon,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(Self::N),
            "m" => Ok(Self::M),
            "T" => Ok(Self::Horizon),
            "epsilon" => Ok(Self::Epsilon),
            _ => Err(Error::InvalidConfig(format!("cannot sweep '{s}'; expected n, m, T or epsilon"))),
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            Self::N => "n",
            Self::M => "m",
            Self::Horizon => "T",
            Self::Epsilon => "epsilon",
        }
    }
}

/// Runs `cfg` once per value, writing `<name>_<param><value>.csv` each time.
/// None of the swept parameters changes the oracle, so it is built once.
pub fn sweep(cfg: &ExperimentConfig, param: SweepParam, values: &[String]) -> Result<Vec<RunReport>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no sweep values".into()));
    }
    let mut points = Vec::with_capacity(values.len());
    for v in values {
        let mut point = cfg.clone();
        point.set(param.key(), v)?;
        point.name = format!("{}_{}{}", cfg.name, param.key(), v.trim());
        point.validate()?;
        points.push(point);
    }
    let grid = cfg.grid()?;
    let gt = build_oracle(cfg, &grid)?;
    points.iter().map(|p| run_with_oracle(p, &gt)).collect()
}
