//! Drives a known-valuation learner by hand against the GSP market, scoring
//! every round with the oracle.
//!
//! `cargo run --release --example advertiser_regret_ucb`

use ic_regret::accounting::{estimate_ground_truth, ic_regret_error, instantaneous_gap, RegretLedger};
use ic_regret::auction::{seeded_rng, AuctionEnvironment};
use ic_regret::estimator::UcbContext;
use ic_regret::gsp::{GspConfig, GspEnvironment};
use ic_regret::policy::{Learner, PolicyKind, PolicySpec, Setting};
use ic_regret::BidGrid;

fn main() -> anyhow::Result<()> {
    let (m, n, horizon) = (15, 1024, 2000usize);
    let grid = BidGrid::uniform(0.1, 10.0, 0.1)?;
    let value = grid.index_of(9.5)?;
    let mut market = GspEnvironment::new(GspConfig { seed: 3, ..GspConfig::default() })?;
    let gt = estimate_ground_truth(&market, &grid, 100_000, 11)?;
    println!("oracle best bid for v = 9.5: {}", grid.level(gt.best_bid(value)));

    let spec = PolicySpec::new(PolicyKind::RegretUcbKnownValue, Setting::Advertiser(value))?;
    let bound = market.utility_bound(&grid)?.value();
    let mut learner = Learner::initialize(spec, &mut market, &grid, m, n, seeded_rng(3, 1))?;
    let mut ledger = RegretLedger::new();
    for t in 1..=horizon {
        let ctx = UcbContext::new(t as u64, m, n, bound, grid.len())?;
        let (plan, _) = learner.step(&mut market, &grid, &ctx)?;
        ledger.accumulate(instantaneous_gap(&gt, &plan, spec.setting));
        if t.is_power_of_two() || t == horizon {
            println!("t = {t:>5}  pseudo-regret {:>8.3}  per round {:.4}", ledger.total(), ic_regret_error(&ledger, t)?);
        }
    }
    let stats = learner.stats();
    let most = (0..stats.len()).max_by_key(|&b| stats.count(b)).unwrap_or(0);
    println!("most probed bid: {} ({} blocks)", grid.level(most), stats.count(most));
    Ok(())
}
