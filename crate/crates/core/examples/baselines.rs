//! Known-valuation learner against random bids and epsilon-greedy, written to
//! CSV, summarized and plotted.
//!
//! `cargo run --release --example baselines [out_dir]`

use std::path::PathBuf;

use ic_regret::harness::summary::write_summary;
use ic_regret::harness::{plot_summary, run_experiment, summarize, ExperimentConfig, PlotStyle};

fn main() -> anyhow::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "results/baselines".into()).into();
    let mut cfg = ExperimentConfig::from_kv_str(
        "grid_min = 0.1
         grid_max = 10
         grid_step = 0.1
         v = 9.5
         policy = regret-ucb-known-v, random-bids, epsilon-greedy
         epsilon = 0.1
         T = 1000
         reps = 5
         oracle_samples = 100000
         name = baselines",
    )?;
    cfg.out_dir = out.clone();
    let report = run_experiment(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let summary = summarize(&[report.csv_path.clone()])?;
    write_summary(&out.join("baselines_summary.csv"), &summary)?;
    plot_summary(&summary, &out.join("baselines.svg"), PlotStyle::Semilog, "Known valuation v = 9.5")?;
    for row in summary.finals() {
        println!("{:<22} R(T) = {:>8.2} +/- {:.2}", row.series, row.mean, row.half_width);
    }
    println!("wrote {}", out.display());
    Ok(())
}
