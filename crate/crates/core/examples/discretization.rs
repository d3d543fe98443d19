//! How much IC regret a coarse grid can hide, on mechanisms with affine
//! allocation and payment where the allowance can be checked exactly.
//!
//! `cargo run --release --example discretization`

use ic_regret::accounting::bounds::{discretization_error_bound, measured_discretization_error};
use ic_regret::env::LinearMechanism;
use ic_regret::BidGrid;

fn main() -> anyhow::Result<()> {
    let horizon = 1000.0;
    let mechanisms = [
        LinearMechanism::new(0.1, 0.8, 0.0, 0.9, 1.0)?,
        LinearMechanism::new(0.0, 1.0, 0.2, 0.3, 1.0)?,
        LinearMechanism::new(0.9, -0.5, 0.5, -0.4, 1.0)?,
    ];
    println!("{:>5} {:>4} {:>12} {:>12}", "step", "mech", "measured", "allowance");
    for step in [0.2, 0.1, 0.05, 0.01] {
        let coarse = BidGrid::uniform(0.0, 1.0, step)?;
        let fine = BidGrid::uniform(0.0, 1.0, step / 50.0)?;
        for (i, mech) in mechanisms.iter().enumerate() {
            let (lg, lp) = mech.lipschitz();
            let bound = discretization_error_bound(lg, lp, step, 1.0, horizon)?;
            let measured = measured_discretization_error(&coarse, &fine, horizon, |v, b| mech.regret(v, b));
            println!("{step:>5} {i:>4} {measured:>12.4} {bound:>12.4}");
        }
    }
    Ok(())
}
