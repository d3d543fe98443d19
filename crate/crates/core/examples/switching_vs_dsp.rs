//! Compares the anchored DSP learner with the switching learner, which uses
//! every pair of its blocks, both empirically and through the bounds.
//!
//! `cargo run --release --example switching_vs_dsp`

use ic_regret::accounting::bounds::{bound_dsp, bound_switching, TheoryParams};
use ic_regret::harness::run::build_oracle;
use ic_regret::harness::{simulate, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::from_kv_str(
        "grid_min = 0.1\ngrid_max = 10\ngrid_step = 0.1\npolicy = regret-ucb-dsp, regret-ucb-switching\nT = 1000\nreps = 4\noracle_samples = 100000",
    )?;
    let grid = cfg.grid()?;
    let gt = build_oracle(&cfg, &grid)?;
    println!("{:>3} {:>10} {:>10} {:>12} {:>12}", "m", "dsp", "switching", "dsp bound", "switch bound");
    for m in [3, 7, 15] {
        cfg.m = m;
        let rows = simulate(&cfg, &gt)?;
        let final_mean = |prefix: &str| {
            let xs: Vec<f64> = rows
                .iter()
                .filter(|r| r.t == cfg.horizon && r.policy == prefix)
                .map(|r| r.cum_pseudo_regret)
                .collect();
            xs.iter().sum::<f64>() / xs.len() as f64
        };
        let p = TheoryParams { m, n: cfg.n, utility_bound: 10.0, horizon: cfg.horizon as f64 };
        println!(
            "{m:>3} {:>10.2} {:>10.2} {:>12.3e} {:>12.3e}",
            final_mean("regret-ucb-dsp"),
            final_mean("regret-ucb-switching"),
            bound_dsp(&gt, &p)?,
            bound_switching(&gt, &p)?
        );
    }
    Ok(())
}
