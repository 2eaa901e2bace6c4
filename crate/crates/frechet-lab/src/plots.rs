//! Static SVG plots of scaling experiments.
//!
//! Two write-only figures cover what a rate experiment needs: a log–log
//! plot of mean geodesic distance against sample size (observed means,
//! fitted line, and the theoretical reference slope) and a scatter of the
//! rescaled tangent coordinates at the largest sample size, whose shape
//! shows whether the rescaled fluctuations have stabilised.  SVG keeps the
//! output diff-friendly and viewer-free; there is no interactive UI.

use std::path::Path;

use frechet_core::clt::{ExperimentResult, Regime};
use plotters::prelude::*;

/// Errors from figure generation.
#[derive(Debug)]
pub enum PlotError {
    /// The result carries no data to plot.
    Empty(&'static str),
    /// The drawing backend failed (usually an I/O problem with the target
    /// file).
    Backend(String),
}

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlotError::Empty(what) => write!(f, "nothing to plot: {what}"),
            PlotError::Backend(why) => write!(f, "drawing failed: {why}"),
        }
    }
}

impl std::error::Error for PlotError {}

fn backend_err<E: std::fmt::Display>(e: E) -> PlotError {
    PlotError::Backend(e.to_string())
}

fn rate_label(regime: Regime) -> &'static str {
    match regime {
        Regime::Classical => "-1/2",
        Regime::Smeary => "-1/6",
    }
}

/// Writes the log–log scaling figure: per-size mean distances, the fitted
/// line, and a reference line with the regime's theoretical slope anchored
/// at the largest size.
pub fn scaling_plot(result: &ExperimentResult, path: &Path) -> Result<(), PlotError> {
    if result.fit.per_n.is_empty() {
        return Err(PlotError::Empty("no per-size summaries"));
    }
    let ln10 = std::f64::consts::LN_10;
    let points: Vec<(f64, f64)> = result
        .fit
        .per_n
        .iter()
        .map(|s| ((s.n as f64).log10(), s.mean_norm.log10()))
        .collect();
    let (x0, x1) = (points[0].0, points[points.len() - 1].0);
    let fitted = |x: f64| result.fit.intercept / ln10 + result.fit.slope * x;
    let last = points[points.len() - 1];
    let rate = result.regime.rate_exponent();
    let reference = |x: f64| last.1 + rate * (x - last.0);

    let mut ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    ys.extend([fitted(x0), fitted(x1), reference(x0), reference(x1)]);
    let ymin = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.08 * (ymax - ymin).max(0.5);
    let xpad = 0.05 * (x1 - x0).max(1.0);

    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(backend_err)?;
    let caption = format!(
        "mean geodesic distance vs n (fitted slope {:.4} ± {:.4})",
        result.fit.slope, result.fit.stderr
    );
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(44)
        .y_label_area_size(56)
        .build_cartesian_2d(x0 - xpad..x1 + xpad, ymin - pad..ymax + pad)
        .map_err(backend_err)?;
    chart
        .configure_mesh()
        .x_desc("log10 n")
        .y_desc("log10 mean distance to the population mean")
        .draw()
        .map_err(backend_err)?;

    chart
        .draw_series(LineSeries::new(
            (0..=100).map(|i| {
                let x = x0 + (x1 - x0) * (i as f64) / 100.0;
                (x, fitted(x))
            }),
            &BLUE,
        ))
        .map_err(backend_err)?
        .label(format!("fitted slope {:.4}", result.fit.slope))
        .legend(|(x, y)| PathElement::new(vec![(x - 12, y), (x + 12, y)], BLUE));
    chart
        .draw_series(LineSeries::new(
            (0..=100).map(|i| {
                let x = x0 + (x1 - x0) * (i as f64) / 100.0;
                (x, reference(x))
            }),
            RED.stroke_width(1),
        ))
        .map_err(backend_err)?
        .label(format!("reference slope {}", rate_label(result.regime)))
        .legend(|(x, y)| PathElement::new(vec![(x - 12, y), (x + 12, y)], RED));
    chart
        .draw_series(points.iter().map(|p| Circle::new(*p, 4, BLACK.filled())))
        .map_err(backend_err)?
        .label("observed means")
        .legend(|(x, y)| Circle::new((x, y), 4, BLACK.filled()));

    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(backend_err)?;
    root.present().map_err(backend_err)
}

/// Writes the rescaled scatter: the first two tangent coordinates of the
/// estimated means at the largest sample size, scaled by `n` to the
/// regime's rate, in a square window.
pub fn rescaled_scatter_plot(result: &ExperimentResult, path: &Path) -> Result<(), PlotError> {
    let n = result.largest_n();
    let rows = result.rescaled_at(n);
    let d = result.dimension;
    if rows.is_empty() || d < 2 {
        return Err(PlotError::Empty("need replicates in dimension at least 2"));
    }
    let points: Vec<(f64, f64)> =
        rows.chunks_exact(d).map(|row| (row[0], row[1])).collect();
    let radius = points
        .iter()
        .map(|(x, y)| x.abs().max(y.abs()))
        .fold(0.0_f64, f64::max)
        .max(1e-12)
        * 1.1;

    let root = SVGBackend::new(path, (640, 640)).into_drawing_area();
    root.fill(&WHITE).map_err(backend_err)?;
    let exponent = match result.regime {
        Regime::Classical => "1/2",
        Regime::Smeary => "1/6",
    };
    let caption = format!("n^({exponent}) · tangent coordinates at n = {n}");
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(44)
        .y_label_area_size(56)
        .build_cartesian_2d(-radius..radius, -radius..radius)
        .map_err(backend_err)?;
    chart
        .configure_mesh()
        .x_desc("rescaled tangent coordinate 1")
        .y_desc("rescaled tangent coordinate 2")
        .draw()
        .map_err(backend_err)?;
    chart
        .draw_series(points.iter().map(|p| Circle::new(*p, 3, BLUE.mix(0.6).filled())))
        .map_err(backend_err)?;
    root.present().map_err(backend_err)
}
