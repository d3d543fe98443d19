//! SVG plots of summarized pseudo-regret with shaded confidence bands.

use std::path::Path;

use plotters::coord::Shift;
use plotters::prelude::*;

use super::summary::{Summary, SummaryRow};
use crate::error::{Error, Result};

/// Values below this are drawn at this level on a logarithmic axis.
pub const LOG_FLOOR: f64 = 1e-3;

/// Y-axis scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStyle {
    Linear,
    Semilog,
}

impl PlotStyle {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "semilog" => Ok(Self::Semilog),
            _ => Err(Error::InvalidConfig(format!("plot style '{s}': expected linear or semilog"))),
        }
    }
}

fn plot_err(e: impl std::fmt::Display) -> Error {
    Error::Plot(e.to_string())
}

struct Curve<'a> {
    label: &'a str,
    t: Vec<f64>,
    mean: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn curves(summary: &Summary, floor: Option<f64>) -> Vec<Curve<'_>> {
    let clamp = |y: f64| floor.map_or(y, |f| y.max(f));
    summary
        .series()
        .into_iter()
        .map(|label| {
            let rows: Vec<&SummaryRow> = summary.rows_of(label).collect();
            Curve {
                label,
                t: rows.iter().map(|r| r.t as f64).collect(),
                mean: rows.iter().map(|r| clamp(r.mean)).collect(),
                lower: rows.iter().map(|r| clamp(r.mean - r.half_width)).collect(),
                upper: rows.iter().map(|r| clamp(r.mean + r.half_width)).collect(),
            }
        })
        .collect()
}

fn draw<Y>(root: &DrawingArea<SVGBackend<'_>, Shift>, curves: &[Curve<'_>], title: &str, x_range: std::ops::Range<f64>, y_range: Y) -> Result<()>
where
    Y: plotters::coord::ranged1d::AsRangedCoord<Value = f64>,
    Y::CoordDescType: plotters::coord::ranged1d::ValueFormatter<f64>,
{
    let mut chart = ChartBuilder::on(root)
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x_range, y_range)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("t")
        .y_desc("pseudo-regret")
        .draw()
        .map_err(plot_err)?;
    for (i, c) in curves.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let band: Vec<(f64, f64)> = c
            .t
            .iter()
            .zip(&c.upper)
            .map(|(&t, &y)| (t, y))
            .chain(c.t.iter().zip(&c.lower).rev().map(|(&t, &y)| (t, y)))
            .collect();
        chart.draw_series(std::iter::once(Polygon::new(band, color.mix(0.2).filled()))).map_err(plot_err)?;
        chart
            .draw_series(LineSeries::new(c.t.iter().copied().zip(c.mean.iter().copied()), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(c.label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperLeft)
        .draw()
        .map_err(plot_err)?;
    Ok(())
}

/// Renders one curve per series with its CI band. In semilog mode values are
/// floored at [`LOG_FLOOR`] before taking logs.
pub fn plot_summary(summary: &Summary, path: &Path, style: PlotStyle, title: &str) -> Result<()> {
    if summary.rows.is_empty() {
        return Err(Error::EmptyInput("nothing to plot".into()));
    }
    let floor = (style == PlotStyle::Semilog).then_some(LOG_FLOOR);
    let curves = curves(summary, floor);
    let t_min = curves.iter().flat_map(|c| c.t.iter().copied()).fold(f64::INFINITY, f64::min);
    let t_max = curves.iter().flat_map(|c| c.t.iter().copied()).fold(f64::NEG_INFINITY, f64::max);
    let y_min = curves.iter().flat_map(|c| c.lower.iter().copied()).fold(f64::INFINITY, f64::min);
    let y_max = curves.iter().flat_map(|c| c.upper.iter().copied()).fold(f64::NEG_INFINITY, f64::max);
    let x_range = t_min..(t_max + 1.0).max(t_min + 1.0);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    match style {
        PlotStyle::Linear => {
            let pad = ((y_max - y_min) * 0.05).max(1e-9);
            draw(&root, &curves, title, x_range, (y_min - pad)..(y_max + pad))?;
        }
        PlotStyle::Semilog => {
            let hi = if y_max > y_min { y_max * 1.5 } else { y_min * 10.0 };
            draw(&root, &curves, title, x_range, (y_min..hi).log_scale())?;
        }
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(series: &str, t: usize, mean: f64, hw: f64) -> SummaryRow {
        SummaryRow { series: series.into(), t, reps: 2, mean, half_width: hw, mean_empirical: 0.0 }
    }

    #[test]
    fn two_series_legend_and_semilog_floor() {
        let dir = tempfile::tempdir().unwrap();
        let summary = Summary {
            rows: vec![row("alpha", 1, 0.0, 0.0), row("alpha", 2, 3.0, 1.0), row("beta", 1, 1.0, 0.5), row("beta", 2, 2.0, 0.0)],
            warnings: vec![],
        };
        for style in [PlotStyle::Linear, PlotStyle::Semilog] {
            let path = dir.path().join(format!("{style:?}.svg"));
            plot_summary(&summary, &path, style, "test").unwrap();
            let svg = std::fs::read_to_string(&path).unwrap();
            assert!(svg.contains("alpha") && svg.contains("beta"));
        }
        let c = curves(&summary, Some(LOG_FLOOR));
        assert_eq!(c[0].mean[0], LOG_FLOOR);
    }

    #[test]
    fn flat_series_and_empty_input() {
        let dir = tempfile::tempdir().unwrap();
        let flat = Summary { rows: vec![row("c", 1, 2.0, 0.0), row("c", 2, 2.0, 0.0)], warnings: vec![] };
        plot_summary(&flat, &dir.path().join("flat.svg"), PlotStyle::Linear, "flat").unwrap();
        plot_summary(&flat, &dir.path().join("flat_log.svg"), PlotStyle::Semilog, "flat").unwrap();
        let empty = Summary::default();
        assert!(matches!(plot_summary(&empty, &dir.path().join("e.svg"), PlotStyle::Linear, ""), Err(Error::EmptyInput(_))));
    }
}
