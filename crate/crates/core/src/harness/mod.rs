//! Experiment orchestration: configuration, repeated runs, summaries and plots.

pub mod config;
pub mod plot;
pub mod run;
pub mod summary;

pub use config::{ExperimentConfig, MarketKind, PolicyName};
pub use plot::{plot_summary, PlotStyle};
pub use run::{run_experiment, simulate, sweep, RunRecord, RunReport, SweepParam};
pub use summary::{summarize, Summary, SummaryRow};
