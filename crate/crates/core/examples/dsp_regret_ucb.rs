//! Unknown valuation: the DSP learner searches (value, bid) pairs. Uses the
//! harness so repetitions run in parallel.
//!
//! `cargo run --release --example dsp_regret_ucb`

use ic_regret::harness::run::build_oracle;
use ic_regret::harness::{simulate, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let cfg = ExperimentConfig::from_kv_str(
        "grid_min = 0.1
         grid_max = 10
         grid_step = 0.1
         policy = regret-ucb-dsp
         m = 3
         n = 1024
         T = 1000
         reps = 4
         oracle_samples = 100000",
    )?;
    let grid = cfg.grid()?;
    let gt = build_oracle(&cfg, &grid)?;
    let (v, b) = gt.best_pair();
    println!("target pair: value {} bid {} (rgt {:.4})", gt.level(v), gt.level(b), gt.max_regret());

    let rows = simulate(&cfg, &gt)?;
    for t in [10, 100, 250, 500, 1000] {
        let at: Vec<f64> = rows.iter().filter(|r| r.t == t).map(|r| r.cum_pseudo_regret).collect();
        let mean = at.iter().sum::<f64>() / at.len() as f64;
        println!("t = {t:>4}  mean pseudo-regret {mean:>8.3}");
    }
    Ok(())
}
