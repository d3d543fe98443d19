//! Ground truth for the 5-slot GSP market: where shading pays and by how much.
//!
//! `cargo run --release --example gsp_oracle [samples_per_bid]`

use ic_regret::accounting::estimate_ground_truth;
use ic_regret::gsp::{GspConfig, GspEnvironment};
use ic_regret::BidGrid;

fn main() -> anyhow::Result<()> {
    let samples = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(100_000);
    let env = GspEnvironment::new(GspConfig::default())?;
    let grid = BidGrid::uniform(0.1, 10.0, 0.1)?;
    let gt = estimate_ground_truth(&env, &grid, samples, 7)?;

    let (v, b) = gt.best_pair();
    println!(
        "largest IC regret {:.4} (se {:.1e}) at value {} bidding {}",
        gt.max_regret(),
        gt.regret_std_error(v, b),
        gt.level(v),
        gt.level(b)
    );
    println!("{:>6} {:>9} {:>10} {:>10}", "value", "best bid", "u(best)", "u(truth)");
    for value in [2.0, 4.0, 6.0, 8.0, 9.5, 10.0] {
        let vi = grid.index_of(value)?;
        let bi = gt.best_bid(vi);
        println!("{value:>6.1} {:>9.1} {:>10.4} {:>10.4}", gt.level(bi), gt.utility(vi, bi), gt.utility(vi, vi));
    }
    let ties = gt.near_ties();
    if !ties.is_empty() {
        println!("{} (value, bid) pairs are within noise of the optimum", ties.len());
    }
    Ok(())
}
