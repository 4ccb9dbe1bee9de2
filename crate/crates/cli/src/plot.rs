//! Log-log convergence plot of an iteration log.

use plotters::coord::Shift;
use plotters::prelude::*;

/// SVG of value and best value against iteration on log-log axes. A pure
/// function of the `(k, value, best_value)` triples; non-positive values
/// cannot be drawn on a log axis and are skipped.
pub fn convergence_svg(title: &str, points: &[(usize, f64, f64)]) -> Result<String, String> {
    let drawable: Vec<(usize, f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(k, v, b)| k > 0 && v > 0.0 && b > 0.0 && v.is_finite())
        .collect();
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (900, 560)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| e.to_string())?;
        if !drawable.is_empty() {
            draw(&root, title, &drawable).map_err(|e| e.to_string())?;
        }
        root.present().map_err(|e| e.to_string())?;
    }
    Ok(svg)
}

fn draw(
    root: &DrawingArea<SVGBackend<'_>, Shift>,
    title: &str,
    points: &[(usize, f64, f64)],
) -> Result<(), DrawingAreaErrorKind<std::io::Error>> {
    let k_max = points.iter().map(|p| p.0).max().unwrap_or(1).max(2) as f64;
    let lo = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let (lo, hi) = if hi > lo { (lo / 1.05, hi * 1.05) } else { (lo / 1.5, lo * 1.5) };

    let mut chart = ChartBuilder::on(root)
        .caption(title, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(72)
        .build_cartesian_2d((1f64..k_max).log_scale(), (lo..hi).log_scale())?;
    chart.configure_mesh().x_desc("iteration").y_desc("entropy estimate").draw()?;
    let blue = RGBColor(31, 119, 180);
    let orange = RGBColor(255, 127, 14);
    chart
        .draw_series(LineSeries::new(points.iter().map(|p| (p.0 as f64, p.1)), blue))?
        .label("value")
        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], blue));
    chart
        .draw_series(LineSeries::new(points.iter().map(|p| (p.0 as f64, p.2)), orange.stroke_width(2)))?
        .label("best value")
        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], orange.stroke_width(2)));
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()?;
    Ok(())
}
