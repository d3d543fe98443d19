//! Across-repetition means and normal-approximation confidence intervals.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::run::{format_sig12, RUN_HEADER};
use crate::error::{Error, Result};

/// Standard normal quantile for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// First line of every summary file.
pub const CI_NOTE: &str = "# 95% CI: normal approximation, half_width = 1.96 * sample_sd / sqrt(reps); 0 when reps = 1";

const SUMMARY_HEADER: &str = "series,t,reps,mean_cum_pseudo_regret,ci_half_width,mean_cum_empirical_regret";

/// Mean and CI half-width of one series at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub series: String,
    pub t: usize,
    pub reps: usize,
    pub mean: f64,
    pub half_width: f64,
    pub mean_empirical: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    /// Ordered by series (first appearance), then `t`.
    pub rows: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

impl Summary {
    /// Series labels in order of appearance.
    pub fn series(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.series.as_str()) {
                out.push(&r.series);
            }
        }
        out
    }

    pub fn rows_of<'a>(&'a self, series: &'a str) -> impl Iterator<Item = &'a SummaryRow> + 'a {
        self.rows.iter().filter(move |r| r.series == series)
    }

    /// Last-timestep row of each series.
    pub fn finals(&self) -> Vec<&SummaryRow> {
        self.series()
            .into_iter()
            .filter_map(|s| self.rows_of(s).max_by_key(|r| r.t))
            .collect()
    }
}

/// Sample mean and `Z_95 * sd / sqrt(k)`; the half-width is 0 for one sample.
pub fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, Z_95 * var.sqrt() / k.sqrt())
}

#[derive(Default)]
struct Cell {
    pseudo: Vec<f64>,
    empirical: Vec<f64>,
}

fn schema(path: &Path, detail: impl Into<String>) -> Error {
    Error::Schema { path: path.display().to_string(), detail: detail.into() }
}

/// Reads run CSVs and aggregates cumulative pseudo-regret per series and `t`.
/// With one input file a series is a policy label; with several it is
/// `<file stem>/<policy>`, so sweep points stay apart.
pub fn summarize(paths: &[PathBuf]) -> Result<Summary> {
    if paths.is_empty() {
        return Err(Error::EmptyInput("no run files to summarize".into()));
    }
    let expected: Vec<&str> = RUN_HEADER.split(',').collect();
    let mut order: Vec<String> = Vec::new();
    let mut cells: HashMap<(String, usize), Cell> = HashMap::new();
    let mut max_t: HashMap<String, usize> = HashMap::new();
    for path in paths {
        let mut reader = csv::Reader::from_path(path)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header != expected {
            return Err(schema(path, format!("expected header '{RUN_HEADER}', found '{}'", header.join(","))));
        }
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| rec.get(k).unwrap_or("");
            let num = |k: usize| -> Result<f64> {
                field(k).parse().map_err(|_| schema(path, format!("row {}: bad number '{}' in {}", i + 2, field(k), expected[k])))
            };
            let series = if paths.len() == 1 { field(0).to_string() } else { format!("{stem}/{}", field(0)) };
            let t: usize = field(2).parse().map_err(|_| schema(path, format!("row {}: bad t '{}'", i + 2, field(2))))?;
            if !order.contains(&series) {
                order.push(series.clone());
            }
            let top = max_t.entry(series.clone()).or_insert(0);
            *top = (*top).max(t);
            let cell = cells.entry((series, t)).or_default();
            cell.pseudo.push(num(4)?);
            cell.empirical.push(num(5)?);
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput("run files contain no rows".into()));
    }
    let mut summary = Summary::default();
    let mut single = Vec::new();
    for series in order {
        for t in 1..=max_t[&series] {
            let Some(cell) = cells.get(&(series.clone(), t)) else { continue };
            let (mean, half_width) = mean_and_half_width(&cell.pseudo);
            let (mean_empirical, _) = mean_and_half_width(&cell.empirical);
            if cell.pseudo.len() == 1 && !single.contains(&series) {
                single.push(series.clone());
            }
            summary.rows.push(SummaryRow { series: series.clone(), t, reps: cell.pseudo.len(), mean, half_width, mean_empirical });
        }
    }
    for s in single {
        summary.warnings.push(format!("series '{s}' has a single repetition; CI half-width reported as 0"));
    }
    Ok(summary)
}

/// Writes the summary CSV, preceded by the CI method comment.
pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = format!("{CI_NOTE}\n{SUMMARY_HEADER}\n");
    for r in &summary.rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            r.series,
            r.t,
            r.reps,
            format_sig12(r.mean),
            format_sig12(r.half_width),
            format_sig12(r.mean_empirical)
        );
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a file written by [`write_summary`].
pub fn read_summary(path: &Path) -> Result<Summary> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != SUMMARY_HEADER {
        return Err(schema(path, format!("expected header '{SUMMARY_HEADER}'")));
    }
    let mut summary = Summary::default();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = || schema(path, format!("row {}: malformed", i + 2));
        let get = |k: usize| rec.get(k).ok_or_else(bad);
        summary.rows.push(SummaryRow {
            series: get(0)?.to_string(),
            t: get(1)?.parse().map_err(|_| bad())?,
            reps: get(2)?.parse().map_err(|_| bad())?,
            mean: get(3)?.parse().map_err(|_| bad())?,
            half_width: get(4)?.parse().map_err(|_| bad())?,
            mean_empirical: get(5)?.parse().map_err(|_| bad())?,
        });
    }
    if summary.rows.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no rows", path.display())));
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_examples() {
        let (mean, hw) = mean_and_half_width(&[10.0, 14.0]);
        assert_eq!(mean, 12.0);
        assert!((hw - 3.92).abs() < 1e-12, "{hw}");
        assert_eq!(mean_and_half_width(&[7.0, 7.0, 7.0]), (7.0, 0.0));
        assert_eq!(mean_and_half_width(&[3.0]), (3.0, 0.0));
    }

    fn write_run(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, format!("{RUN_HEADER}\n{body}")).unwrap();
        p
    }

    #[test]
    fn summarizes_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_run(
            dir.path(),
            "a.csv",
            "ucb,0,1,1,1,0.5,0\nucb,0,2,0,1,0.5,0\nucb,1,1,3,3,0,0\nucb,1,2,0,3,0,0\nrnd,0,1,2,2,0,0\nrnd,0,2,2,4,0,0\n",
        );
        let s = summarize(&[p]).unwrap();
        assert_eq!(s.series(), vec!["ucb", "rnd"]);
        assert_eq!(s.rows.len(), 4);
        assert_eq!((s.rows[0].mean, s.rows[0].reps), (2.0, 2));
        assert_eq!(s.warnings.len(), 1);
        assert!(s.warnings[0].contains("rnd"));
        let out = dir.path().join("s.csv");
        write_summary(&out, &s).unwrap();
        assert!(std::fs::read_to_string(&out).unwrap().starts_with("# 95% CI: normal approximation"));
        let back = read_summary(&out).unwrap();
        assert_eq!(back.rows.len(), 4);
        assert_eq!(back.finals()[1].mean, 4.0);
    }

    #[test]
    fn rejects_wrong_schema_and_empty_input() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "policy,rep,t\nx,0,1\n").unwrap();
        assert!(matches!(summarize(&[p]), Err(Error::Schema { .. })));
        assert!(matches!(summarize(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn multiple_files_keep_series_apart() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_run(dir.path(), "run_n16.csv", "ucb,0,1,1,1,0,0\n");
        let b = write_run(dir.path(), "run_n64.csv", "ucb,0,1,1,2,0,0\n");
        let s = summarize(&[a, b]).unwrap();
        assert_eq!(s.series(), vec!["run_n16/ucb", "run_n64/ucb"]);
    }
}
