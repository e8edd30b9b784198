//! SVG line charts of per-seed medians from a simulation CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use dcglearn::sim::{median, read_csv, ResultRow};
use plotters::prelude::*;

#[derive(Clone, Copy, ValueEnum)]
pub enum XAxis {
    NTrainPairs,
    NoisePairs,
    NoiseGrades,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Metric {
    Precision,
    Similarity,
}

#[derive(Args)]
pub struct PlotArgs {
    /// CSV written by `simulate`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "n-train-pairs")]
    x: XAxis,
    #[arg(long, value_enum, default_value = "precision")]
    metric: Metric,
    #[arg(long, default_value = "")]
    title: String,
}

fn x_of(row: &ResultRow, axis: XAxis) -> usize {
    match axis {
        XAxis::NTrainPairs => row.n_train_pairs,
        XAxis::NoisePairs => row.noise_pairs,
        XAxis::NoiseGrades => row.noise_grades,
    }
}

/// One series per combination of the columns that are not on the x axis.
fn series(rows: &[ResultRow], axis: XAxis, metric: Metric) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut groups: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        let mut label = format!("{} {}", r.model, r.pair_mode);
        if !matches!(axis, XAxis::NTrainPairs) {
            label += &format!(" n={}", r.n_train_pairs);
        }
        if !matches!(axis, XAxis::NoisePairs) && r.noise_pairs > 0 {
            label += &format!(" flips={}", r.noise_pairs);
        }
        if !matches!(axis, XAxis::NoiseGrades) && r.noise_grades > 0 {
            label += &format!(" grade_flips={}", r.noise_grades);
        }
        let y = match metric {
            Metric::Precision => r.precision,
            Metric::Similarity => r.similarity,
        };
        groups.entry(label).or_default().entry(x_of(r, axis)).or_default().push(y);
    }
    groups
        .into_iter()
        .map(|(label, points)| {
            let line =
                points.into_iter().map(|(x, ys)| (x as f64, median(ys))).filter(|(_, y)| y.is_finite()).collect();
            (label, line)
        })
        .collect()
}

pub fn run(args: &PlotArgs) -> anyhow::Result<()> {
    let file = fs::File::open(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let rows = read_csv(file)?;
    let lines = series(&rows, args.x, args.metric);
    let points = lines.values().flatten();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, _) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
    }
    if !x_lo.is_finite() {
        bail!("no finite data points in {}", args.input.display());
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    let y_desc = match args.metric {
        Metric::Precision => "median precision",
        Metric::Similarity => "median similarity",
    };

    let root = SVGBackend::new(&args.out, (800, 500)).into_drawing_area();
    let draw = || -> Result<(), Box<dyn std::error::Error + '_>> {
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(&args.title, ("sans-serif", 20))
            .margin(15)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .build_cartesian_2d(x_lo..x_hi, 0.0..1.0)?;
        chart.configure_mesh().y_desc(y_desc).draw()?;
        for (i, (label, line)) in lines.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(LineSeries::new(line.iter().copied(), color.stroke_width(2)))?
                .label(label.as_str())
                .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], color.stroke_width(2)));
        }
        chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
        root.present()?;
        Ok(())
    };
    draw().map_err(|e| anyhow!("drawing {}: {e}", args.out.display()))
}
