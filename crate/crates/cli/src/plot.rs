//! SVG figures from run and sweep artifacts.

use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use plotters::coord::types::RangedCoordf64;
use plotters::prelude::*;

use crate::io::{read_csv, write_atomic};

const SIZE: (u32, u32) = (960, 640);
/// Series longer than this are thinned by a fixed stride.
const MAX_POINTS: usize = 4000;
const MAX_SPIKES: usize = 20_000;

type Chart<'a, 'b> = ChartContext<'a, SVGBackend<'b>, Cartesian2d<RangedCoordf64, RangedCoordf64>>;

fn err(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("plotting: {e}")
}

fn bounds(values: impl Iterator<Item = f64>) -> Range<f64> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return 0.0..1.0;
    }
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else {
        lo.abs().max(1.0) * 0.1
    };
    (lo - pad)..(hi + pad)
}

fn thin<T: Copy>(v: &[T], max: usize) -> Vec<T> {
    let stride = v.len().div_ceil(max).max(1);
    v.iter().step_by(stride).copied().collect()
}

fn chart<'a, 'b>(
    area: &'a DrawingArea<SVGBackend<'b>, plotters::coord::Shift>,
    title: &str,
    x: Range<f64>,
    y: Range<f64>,
    xd: &str,
    yd: &str,
) -> Result<Chart<'a, 'b>> {
    let mut c = ChartBuilder::on(area)
        .caption(title, ("sans-serif", 16))
        .margin(10)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(x, y)
        .map_err(err)?;
    c.configure_mesh()
        .x_desc(xd)
        .y_desc(yd)
        .draw()
        .map_err(err)?;
    Ok(c)
}

fn lines<'a, 'b: 'a>(c: &mut Chart<'a, 'b>, series: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        c.draw_series(LineSeries::new(
            thin(pts, MAX_POINTS),
            color.stroke_width(1),
        ))
        .map_err(err)?
        .label(name.as_str())
        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    if series.len() > 1 {
        c.configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(err)?;
    }
    Ok(())
}

struct Trace {
    t: Vec<f64>,
    x: Vec<f64>,
    angles: Vec<Vec<f64>>,
    u: Vec<f64>,
}

fn read_trace(path: &Path) -> Result<Trace> {
    let (header, rows) = read_csv(path)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{}: missing column {name}", path.display()))
    };
    let values = |i: usize| -> Result<Vec<f64>> {
        rows.iter()
            .map(|r| {
                r.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| anyhow!("{}: malformed row", path.display()))
            })
            .collect()
    };
    let n = header.iter().filter(|h| h.starts_with("theta_")).count();
    Ok(Trace {
        t: values(col("t")?)?,
        x: values(col("x")?)?,
        angles: (1..=n)
            .map(|i| values(col(&format!("theta_{i}"))?))
            .collect::<Result<_>>()?,
        u: values(col("u")?)?,
    })
}

fn read_raster(path: &Path) -> Result<Vec<(f64, f64)>> {
    let (_, rows) = read_csv(path)?;
    rows.iter()
        .map(|r| {
            match (
                r.first().and_then(|v| v.parse().ok()),
                r.get(1).and_then(|v| v.parse::<f64>().ok()),
            ) {
                (Some(t), Some(n)) => Ok((t, n)),
                _ => Err(anyhow!("{}: malformed row", path.display())),
            }
        })
        .collect()
}

fn zip(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().copied().zip(b.iter().copied()).collect()
}

fn svg(
    draw: impl FnOnce(DrawingArea<SVGBackend, plotters::coord::Shift>) -> Result<()>,
) -> Result<String> {
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(err)?;
        draw(root.clone())?;
        root.present().map_err(err)?;
    }
    Ok(out)
}

/// States, control with raster, and phase portrait of one seed directory.
pub fn plot_run(dir: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let trace = read_trace(&dir.join("trace.csv"))?;
    let raster_path = dir.join("raster.csv");
    let raster = if raster_path.exists() {
        read_raster(&raster_path)?
    } else {
        Vec::new()
    };
    let span = bounds(trace.t.iter().copied());
    let angle_series: Vec<(String, Vec<(f64, f64)>)> = trace
        .angles
        .iter()
        .enumerate()
        .map(|(i, a)| (format!("theta_{}", i + 1), zip(&trace.t, a)))
        .collect();

    let states = svg(|root| {
        let areas = root.split_evenly((2, 1));
        let mut c = chart(
            &areas[0],
            "Link angles",
            span.clone(),
            bounds(trace.angles.iter().flatten().copied()),
            "t (s)",
            "angle (rad)",
        )?;
        lines(&mut c, &angle_series)?;
        let mut c = chart(
            &areas[1],
            "Cart position",
            span.clone(),
            bounds(trace.x.iter().copied()),
            "t (s)",
            "x (m)",
        )?;
        lines(&mut c, &[("x".into(), zip(&trace.t, &trace.x))])
    })?;

    let control = svg(|root| {
        let areas = root.split_evenly((2, 1));
        let mut c = chart(
            &areas[0],
            "Control force",
            span.clone(),
            bounds(trace.u.iter().copied()),
            "t (s)",
            "u (N)",
        )?;
        lines(&mut c, &[("u".into(), zip(&trace.t, &trace.u))])?;
        let top = raster.iter().map(|s| s.1).fold(0.0f64, f64::max) + 1.0;
        let shown = thin(&raster, MAX_SPIKES);
        let title = if shown.len() < raster.len() {
            format!("Spike raster ({} of {} spikes)", shown.len(), raster.len())
        } else {
            format!("Spike raster ({} spikes)", raster.len())
        };
        let mut c = chart(
            &areas[1],
            &title,
            span.clone(),
            -0.5..top - 0.5,
            "t (s)",
            "neuron",
        )?;
        c.draw_series(
            shown
                .iter()
                .map(|&(t, n)| Circle::new((t, n), 1, BLACK.filled())),
        )
        .map_err(err)?;
        Ok(())
    })?;

    let phase = svg(|root| {
        let phase_series: Vec<(String, Vec<(f64, f64)>)> = trace
            .angles
            .iter()
            .enumerate()
            .map(|(i, a)| (format!("theta_{}", i + 1), zip(&trace.x, a)))
            .collect();
        let mut c = chart(
            &root,
            "Phase portrait",
            bounds(trace.x.iter().copied()),
            bounds(trace.angles.iter().flatten().copied()),
            "x (m)",
            "angle (rad)",
        )?;
        lines(&mut c, &phase_series)
    })?;

    let mut written = Vec::new();
    for (name, body) in [
        ("states.svg", states),
        ("control_raster.svg", control),
        ("phase.svg", phase),
    ] {
        let p = out.join(name);
        write_atomic(&p, body.as_bytes())?;
        written.push(p);
    }
    Ok(written)
}

const SWEEP_PANELS: [(&str, &str); 6] = [
    ("peak_overshoot", "PO (%)"),
    ("settling_time", "Ts (s)"),
    ("iae", "IAE (rad s)"),
    ("isc", "ISC (N^2 s)"),
    ("control_ripple", "ripple (N)"),
    ("energy_loihi", "energy (uJ/inf)"),
];

/// Seed-mean metrics against the first column of a sweep or comparison
/// table. Neuron counts use a log axis; non-numeric labels are placed by
/// row index.
pub fn plot_table(csv: &Path, out: &Path) -> Result<PathBuf> {
    let (header, rows) = read_csv(csv)?;
    if rows.is_empty() {
        bail!("{}: no rows", csv.display());
    }
    let axis = header[0].clone();
    let numeric: Option<Vec<f64>> = rows.iter().map(|r| r[0].parse().ok()).collect();
    let log = axis == "neurons";
    let xs: Vec<f64> = match &numeric {
        Some(v) if log => v.iter().map(|n| n.log2()).collect(),
        Some(v) => v.clone(),
        None => (0..rows.len()).map(|i| i as f64).collect(),
    };
    let xd = match (log, &numeric) {
        (true, _) => "log2(neurons)".to_string(),
        (false, Some(_)) => axis.clone(),
        (false, None) => format!(
            "{axis} (row order: {})",
            rows.iter()
                .map(|r| r[0].as_str())
                .collect::<Vec<_>>()
                .join(" ")
        ),
    };
    let body = svg(|root| {
        let areas = root.split_evenly((2, 3));
        for (area, (key, label)) in areas.iter().zip(SWEEP_PANELS) {
            let i = header
                .iter()
                .position(|h| *h == format!("{key}_mean"))
                .with_context(|| format!("{}: missing column {key}_mean", csv.display()))?;
            let pts: Vec<(f64, f64)> = xs
                .iter()
                .zip(&rows)
                .filter_map(|(x, r)| {
                    r[i].parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(|v| (*x, v))
                })
                .collect();
            let mut c = chart(
                area,
                label,
                bounds(xs.iter().copied()),
                bounds(pts.iter().map(|p| p.1)),
                &xd,
                label,
            )?;
            c.draw_series(LineSeries::new(pts.clone(), BLUE.stroke_width(1)))
                .map_err(err)?;
            c.draw_series(pts.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))
                .map_err(err)?;
        }
        Ok(())
    })?;
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
    let p = out.join(format!("{stem}.svg"));
    write_atomic(&p, body.as_bytes())?;
    Ok(p)
}

/// Plots whatever artifacts `path` holds: a seed directory, a run directory
/// of seed directories, a table CSV, or a directory of tables.
pub fn render(path: &Path, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        let dir = out
            .map(Path::to_path_buf)
            .unwrap_or_else(|| path.parent().unwrap_or(Path::new(".")).to_path_buf());
        return Ok(vec![plot_table(path, &dir)?]);
    }
    if !path.is_dir() {
        bail!("no artifacts at {}", path.display());
    }
    let mut written = Vec::new();
    if path.join("trace.csv").exists() {
        written.extend(plot_run(path, out.unwrap_or(path))?);
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for e in entries {
        let name = e
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        if e.is_dir() && name.starts_with("seed_") && e.join("trace.csv").exists() {
            let target = out.map(|o| o.join(&name)).unwrap_or_else(|| e.clone());
            written.extend(plot_run(&e, &target)?);
        } else if e.is_file()
            && (name.starts_with("sweep_") || name == "compare.csv")
            && name.ends_with(".csv")
        {
            written.push(plot_table(&e, out.unwrap_or(path))?);
        }
    }
    if written.is_empty() {
        bail!(
            "no trace.csv, seed directories or tables found in {}",
            path.display()
        );
    }
    Ok(written)
}
