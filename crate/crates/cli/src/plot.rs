use neorl_core::harness::BatchResult;
use plotters::prelude::*;
use std::io;
use std::path::Path;

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

fn other<E: std::fmt::Display>(e: E) -> io::Error {
    io::Error::other(e.to_string())
}

/// Mean accumulated reward against minutes, one line per batch.
pub fn mean_reward_chart(path: &Path, batches: &[BatchResult]) -> io::Result<()> {
    let points = batches.iter().flat_map(|b| b.curve.samples.iter());
    let (mut x_max, mut y_min, mut y_max) = (0.0f64, 0.0f64, 0.0f64);
    for p in points {
        x_max = x_max.max(p.minutes);
        y_min = y_min.min(p.mean);
        y_max = y_max.max(p.mean);
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let x_max = if x_max > 0.0 { x_max } else { 1.0 };

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(other)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Mean accumulated reward", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(56)
        .build_cartesian_2d(0.0..x_max, y_min..y_max * 1.05)
        .map_err(other)?;
    chart
        .configure_mesh()
        .x_desc("minutes")
        .y_desc("accumulated reward")
        .draw()
        .map_err(other)?;
    for (i, b) in batches.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(
                b.curve.samples.iter().map(|p| (p.minutes, p.mean)),
                color.stroke_width(2),
            ))
            .map_err(other)?
            .label(b.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.8))
        .position(SeriesLabelPosition::UpperLeft)
        .draw()
        .map_err(other)?;
    root.present().map_err(other)?;
    Ok(())
}
