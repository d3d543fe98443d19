//! Evaluates the pseudo-regret bounds on the GSP oracle's gaps and the
//! recommended number of probe blocks for each problem.
//!
//! `cargo run --release --example theory_bounds`

use ic_regret::accounting::bounds::{
    bound_dsp, bound_known_value, bound_switching, optimal_m, BoundSetting, GapRange, TheoryParams,
};
use ic_regret::accounting::estimate_ground_truth;
use ic_regret::gsp::{GspConfig, GspEnvironment};
use ic_regret::BidGrid;

fn main() -> anyhow::Result<()> {
    let grid = BidGrid::uniform(0.1, 10.0, 0.1)?;
    let env = GspEnvironment::new(GspConfig::default())?;
    let gt = estimate_ground_truth(&env, &grid, 100_000, 5)?;
    let value = grid.index_of(9.5)?;
    let (n, u, horizon) = (1024, 10.0, 2000.0);

    println!("{:>3} {:>12} {:>12} {:>12}", "m", "known v", "dsp", "switching");
    for m in [1, 3, 7, 15, 31, 63] {
        let p = TheoryParams { m, n, utility_bound: u, horizon };
        let known = match bound_known_value(&gt, value, &p) {
            Ok(b) => format!("{b:.3e}"),
            Err(e) => format!("({e})"),
        };
        println!("{m:>3} {known:>12} {:>12.3e} {:>12.3e}", bound_dsp(&gt, &p)?, bound_switching(&gt, &p)?);
    }

    let arms = grid.len();
    let known = optimal_m(BoundSetting::KnownValue, GapRange::of(&gt, Some(value))?, n, u, horizon, arms)?;
    let pairs = GapRange::of(&gt, None)?;
    let dsp = optimal_m(BoundSetting::Dsp, pairs, n, u, horizon, arms)?;
    let switching = optimal_m(BoundSetting::Switching, pairs, n, u, horizon, arms)?;
    println!("recommended m: known v {known}, dsp {dsp}, switching {switching}");
    Ok(())
}
