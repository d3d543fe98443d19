//! Command-line front end for IC-regret experiments.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ic_regret::harness::config::OUT_DIR_ENV;
use ic_regret::harness::run::{build_oracle, oracle_warnings};
use ic_regret::harness::summary::{read_summary, write_summary};
use ic_regret::harness::{plot_summary, run_experiment, summarize, sweep, ExperimentConfig, PlotStyle, SweepParam};

/// Measure incentive-compatibility regret of simulated auctions.
///
/// Ties between bids (and between (value, bid) pairs) are always broken
/// towards the lowest bid, then the lowest value, so runs are reproducible.
#[derive(Parser)]
#[command(name = "icregret", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured policy for all repetitions and write a CSV.
    Run(RunArgs),
    /// Repeat `run` for each value of one parameter (one CSV per value).
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Parameter to vary: n, m, T or epsilon.
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. 16,64,256,1024.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Mean cumulative pseudo-regret with 95% normal-approximation CIs.
    Summarize {
        /// Run CSVs; with several files each series is named <file stem>/<policy>.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Render a summary CSV as SVG with shaded CI bands.
    Plot {
        summary: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// linear or semilog (values below 1e-3 are drawn at 1e-3).
        #[arg(long, default_value = "semilog")]
        style: String,
        #[arg(long, default_value = "Pseudo-regret")]
        title: String,
    },
    /// Dump the Monte Carlo ground truth for the configured market and grid.
    Oracle {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the (value, bid) regret table.
        #[arg(long)]
        pairs: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated: regret-ucb-known-v, regret-ucb-dsp,
    /// regret-ucb-switching, random-bids, epsilon-greedy.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Horizon (number of timesteps).
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed; repetition r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Known valuation (a grid level), or `none` for the unknown-value problem.
    #[arg(long)]
    v: Option<String>,
    /// Ranking of the remaining DSP probes: regret or utility.
    #[arg(long)]
    dsp_probe_index: Option<String>,
    /// Fold the truthful block into the estimates for a known valuation.
    #[arg(long)]
    update_anchor: bool,
    /// Extra `key=value` assignments, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        let mut overrides: Vec<(&str, String)> = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                overrides.push((k, v));
            }
        };
        put("policy", self.policy.clone());
        put("n", self.n.map(|x| x.to_string()));
        put("m", self.m.map(|x| x.to_string()));
        put("T", self.horizon.map(|x| x.to_string()));
        put("reps", self.reps.map(|x| x.to_string()));
        put("seed", self.seed.map(|x| x.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("epsilon", self.epsilon.map(|x| x.to_string()));
        put("v", self.v.clone());
        put("dsp_probe_index", self.dsp_probe_index.clone());
        if self.update_anchor {
            put("update_anchor", Some("true".into()));
        }
        for (k, v) in overrides {
            cfg.set(k, &v).with_context(|| format!("--{k}"))?;
        }
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else { bail!("--set expects KEY=VALUE, got '{kv}'") };
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let report = run_experiment(&args.config()?)?;
            warn_all(&report.warnings);
            println!("wrote {} rows to {}", report.rows, report.csv_path.display());
        }
        Command::Sweep { run, param, values } => {
            let cfg = run.config()?;
            let reports = sweep(&cfg, SweepParam::parse(&param)?, &values)?;
            if let Some(first) = reports.first() {
                warn_all(&first.warnings);
            }
            for r in reports {
                println!("wrote {} rows to {}", r.rows, r.csv_path.display());
            }
        }
        Command::Summarize { inputs, out } => {
            let summary = summarize(&inputs)?;
            warn_all(&summary.warnings);
            write_summary(&out, &summary)?;
            println!("wrote {} rows to {}", summary.rows.len(), out.display());
        }
        Command::Plot { summary, out, style, title } => {
            let s = read_summary(&summary)?;
            plot_summary(&s, &out, PlotStyle::parse(&style)?, &title)?;
            println!("wrote {}", out.display());
        }
        Command::Oracle { run, pairs } => {
            let cfg = run.config()?;
            let grid = cfg.grid()?;
            let gt = build_oracle(&cfg, &grid)?;
            let setting = cfg.setting(&grid)?;
            warn_all(&oracle_warnings(&gt, setting));
            std::fs::create_dir_all(&cfg.out_dir)?;
            let bids = cfg.out_dir.join(format!("{}_oracle.csv", cfg.name));
            let value = cfg.effective_value().map(|v| grid.index_of(v)).transpose()?;
            gt.write_bids_csv(&bids, value)?;
            println!("wrote {}", bids.display());
            if pairs {
                let path = cfg.out_dir.join(format!("{}_oracle_pairs.csv", cfg.name));
                gt.write_pairs_csv(&path)?;
                println!("wrote {}", path.display());
            }
            let (vs, bs) = gt.best_pair();
            println!(
                "max rgt = {:.6} at v = {}, b = {} (oracle se {:.2e})",
                gt.max_regret(),
                gt.level(vs),
                gt.level(bs),
                gt.regret_std_error(vs, bs)
            );
        }
    }
    Ok(())
}
