//! Sweeps the number of auctions per round and plots every sweep point.
//!
//! `cargo run --release --example sweep_and_plot [out_dir]`

use std::path::PathBuf;

use ic_regret::harness::summary::write_summary;
use ic_regret::harness::{plot_summary, summarize, sweep, ExperimentConfig, PlotStyle, SweepParam};

fn main() -> anyhow::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "results/sweep_n".into()).into();
    let mut cfg = ExperimentConfig::from_kv_str(
        "grid_min = 0.1\ngrid_max = 10\ngrid_step = 0.1\nv = 9.5\nm = 15\nT = 500\nreps = 4\noracle_samples = 50000\nname = known",
    )?;
    cfg.out_dir = out.clone();
    let values: Vec<String> = ["16", "64", "256", "1024"].map(String::from).into();
    let reports = sweep(&cfg, SweepParam::parse("n")?, &values)?;
    let files: Vec<PathBuf> = reports.iter().map(|r| r.csv_path.clone()).collect();
    let summary = summarize(&files)?;
    write_summary(&out.join("summary.csv"), &summary)?;
    plot_summary(&summary, &out.join("sweep_n.svg"), PlotStyle::Linear, "Pseudo-regret by n")?;
    for row in summary.finals() {
        println!("{:<32} {:>8.2} +/- {:.2}", row.series, row.mean, row.half_width);
    }
    Ok(())
}
