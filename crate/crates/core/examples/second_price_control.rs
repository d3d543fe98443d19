//! A single-slot second-price auction is truthful, so the oracle should find
//! no profitable misreport beyond Monte Carlo noise.
//!
//! `cargo run --release --example second_price_control`

use ic_regret::accounting::estimate_ground_truth;
use ic_regret::gsp::{GspConfig, SecondPriceEnvironment};
use ic_regret::BidGrid;

fn main() -> anyhow::Result<()> {
    let env = SecondPriceEnvironment::new(&GspConfig::default())?;
    let grid = BidGrid::uniform(0.0, 10.0, 0.1)?;
    let gt = estimate_ground_truth(&env, &grid, 200_000, 1)?;
    println!("{:>6} {:>8} {:>12} {:>10}", "value", "best bid", "rgt", "3 se");
    for v in [2.0, 5.0, 7.5, 9.5] {
        let vi = grid.index_of(v)?;
        let b = gt.best_bid(vi);
        println!(
            "{v:>6.1} {:>8.1} {:>12.2e} {:>10.2e}",
            gt.level(b),
            gt.regret(vi, b),
            3.0 * gt.regret_std_error(vi, b)
        );
    }
    Ok(())
}
