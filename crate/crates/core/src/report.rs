//! Report persistence and comparison: CSV emission (bit-exact for the
//! determinism contract), SVG latency plots, and cross-run comparison.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::sim::{DropReason, SimReport, TrainRow};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed report file {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("cannot compare runs with different traffic seeds: {0:?}")]
    SeedMismatch(Vec<u64>),
    #[error("comparison needs at least 2 runs, got {0}")]
    TooFewRuns(usize),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn drop_reason_str(r: DropReason) -> &'static str {
    match r {
        DropReason::QueueFull => "queue_full",
        DropReason::TtlExceeded => "ttl_exceeded",
        DropReason::NoFeasibleAction => "no_feasible_action",
        DropReason::Unreachable => "unreachable",
    }
}

/// Per-packet rows. Float fields use the shortest round-trip decimal form,
/// so identical runs serialize byte-identically.
pub fn packets_csv(report: &SimReport) -> String {
    let mut out = String::new();
    out.push_str("id,src,dst,created_at,delivered_at,hops,e2e_latency_s,dropped\n");
    for p in &report.packets {
        let delivered = p.delivered_at.map(|v| v.to_string()).unwrap_or_default();
        let latency = p.e2e_latency_s.map(|v| v.to_string()).unwrap_or_default();
        let dropped = p.dropped.map(drop_reason_str).unwrap_or("");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.id, p.src_gateway, p.dst_gateway, p.created_at, delivered, p.hops, latency, dropped
        );
    }
    out
}

pub fn summary_csv(report: &SimReport) -> String {
    let mut out = String::new();
    out.push_str("key,value\n");
    let _ = writeln!(out, "created,{}", report.created);
    let _ = writeln!(out, "delivered,{}", report.delivered);
    let _ = writeln!(out, "dropped,{}", report.dropped);
    let _ = writeln!(out, "in_flight,{}", report.in_flight);
    let _ = writeln!(out, "mean_latency_s,{}", report.mean_latency_s);
    let _ = writeln!(out, "median_latency_s,{}", report.median_latency_s);
    let _ = writeln!(out, "p95_latency_s,{}", report.p95_latency_s);
    let _ = writeln!(out, "max_queue_occupancy,{}", report.max_queue_occupancy);
    let _ = writeln!(out, "traffic_seed,{}", report.traffic_seed);
    out
}

pub fn training_csv(rows: &[TrainRow]) -> String {
    let mut out = String::new();
    out.push_str("step,sim_time,epsilon,loss,window_mean_latency_s,buffer_size\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.step, r.sim_time, r.epsilon, r.loss, r.window_mean_latency_s, r.buffer_size
        );
    }
    out
}

/// One named latency series: (creation time, E2E latency) of delivered
/// packets.
pub struct LatencySeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl LatencySeries {
    pub fn from_report(label: &str, report: &SimReport) -> Self {
        let points = report
            .packets
            .iter()
            .filter_map(|p| p.e2e_latency_s.map(|l| (p.created_at, l)))
            .collect();
        Self {
            label: label.to_string(),
            points,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().map(|p| p.1).sum::<f64>() / self.points.len() as f64
    }

    /// Mean latency of the last `fraction` of points by creation order.
    pub fn tail_mean(&self, fraction: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let n = ((self.points.len() as f64 * fraction).ceil() as usize).clamp(1, self.points.len());
        let tail = &self.points[self.points.len() - n..];
        tail.iter().map(|p| p.1).sum::<f64>() / n as f64
    }

    /// Mean latency of the first `fraction` of points.
    pub fn head_mean(&self, fraction: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let n = ((self.points.len() as f64 * fraction).ceil() as usize).clamp(1, self.points.len());
        let head = &self.points[..n];
        head.iter().map(|p| p.1).sum::<f64>() / n as f64
    }
}

const SVG_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Scatter plus rolling-mean plot of E2E latency versus packet creation
/// time, one series per run. Fixed 800x500 viewport, linear axes.
pub fn latency_svg(series: &[LatencySeries]) -> String {
    let (width, height) = (800.0, 500.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 30.0, 50.0);
    let (pw, ph) = (width - ml - mr, height - mt - mb);

    let mut xmax: f64 = 1e-9;
    let mut ymax: f64 = 1e-9;
    for s in series {
        for &(x, y) in &s.points {
            xmax = xmax.max(x);
            ymax = ymax.max(y);
        }
    }
    ymax *= 1.05;
    let sx = |x: f64| ml + x / xmax * pw;
    let sy = |y: f64| mt + ph - y / ymax * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        mt + ph,
        ml + pw,
        mt + ph
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>",
        mt + ph
    );
    for i in 0..=5 {
        let fx = i as f64 / 5.0;
        let x = ml + fx * pw;
        let y = mt + ph - fx * ph;
        let _ = writeln!(
            svg,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>",
            mt + ph,
            mt + ph + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{:.1}</text>",
            mt + ph + 18.0,
            fx * xmax
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{ml}\" y2=\"{y}\" stroke=\"black\"/>",
            ml - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{:.4}</text>",
            ml - 8.0,
            y + 4.0,
            fx * ymax
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">packet creation time (s)</text>",
        ml + pw / 2.0,
        height - 10.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"15\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">E2E latency (s)</text>",
        mt + ph / 2.0,
        mt + ph / 2.0
    );

    for (si, s) in series.iter().enumerate() {
        let color = SVG_COLORS[si % SVG_COLORS.len()];
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"{color}\" fill-opacity=\"0.25\"/>",
                sx(x),
                sy(y)
            );
        }
        // Rolling mean over a 51-packet window.
        if s.points.len() > 2 {
            let w = 51.min(s.points.len());
            let mut path = String::from("M");
            for i in 0..s.points.len() {
                let lo = i.saturating_sub(w / 2);
                let hi = (i + w / 2 + 1).min(s.points.len());
                let mean = s.points[lo..hi].iter().map(|p| p.1).sum::<f64>() / (hi - lo) as f64;
                let _ = write!(path, " {:.2} {:.2}", sx(s.points[i].0), sy(mean));
            }
            let _ = writeln!(
                svg,
                "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>"
            );
        }
        // Legend.
        let ly = mt + 16.0 * si as f64 + 8.0;
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"4\" fill=\"{color}\"/>",
            ml + pw - 160.0,
            ly
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>",
            ml + pw - 142.0,
            ly + 6.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write packets.csv, summary.csv, latency.svg and (when training rows
/// exist) training.csv into `dir`. Returns the written paths.
pub fn write_report_files(
    dir: &Path,
    report: &SimReport,
    label: &str,
) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let write = |name: &str, contents: String| -> Result<PathBuf, ReportError> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(io_err(&path.clone()))?;
        Ok(path)
    };
    written.push(write("packets.csv", packets_csv(report))?);
    written.push(write("summary.csv", summary_csv(report))?);
    if !report.train_rows.is_empty() {
        written.push(write("training.csv", training_csv(&report.train_rows))?);
    }
    let series = LatencySeries::from_report(label, report);
    written.push(write("latency.svg", latency_svg(&[series]))?);
    Ok(written)
}

/// A run loaded back from disk for comparison.
pub struct LoadedRun {
    pub traffic_seed: u64,
    pub series: LatencySeries,
    pub delivered: usize,
}

/// Read packets.csv and summary.csv from a run directory.
pub fn read_run(dir: &Path) -> Result<LoadedRun, ReportError> {
    let label = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());

    let summary_path = dir.join("summary.csv");
    let summary = std::fs::read_to_string(&summary_path).map_err(io_err(&summary_path))?;
    let mut traffic_seed = None;
    for line in summary.lines().skip(1) {
        if let Some(v) = line.strip_prefix("traffic_seed,") {
            traffic_seed = v.trim().parse::<u64>().ok();
        }
    }
    let traffic_seed = traffic_seed.ok_or_else(|| ReportError::Malformed {
        path: summary_path.clone(),
        message: "missing traffic_seed".into(),
    })?;

    let packets_path = dir.join("packets.csv");
    let packets = std::fs::read_to_string(&packets_path).map_err(io_err(&packets_path))?;
    let mut points = Vec::new();
    let mut delivered = 0usize;
    for (ln, line) in packets.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(ReportError::Malformed {
                path: packets_path.clone(),
                message: format!("line {}: expected 8 fields", ln + 1),
            });
        }
        if !fields[6].is_empty() {
            let created: f64 = fields[3].parse().map_err(|_| ReportError::Malformed {
                path: packets_path.clone(),
                message: format!("line {}: bad created_at", ln + 1),
            })?;
            let latency: f64 = fields[6].parse().map_err(|_| ReportError::Malformed {
                path: packets_path.clone(),
                message: format!("line {}: bad latency", ln + 1),
            })?;
            points.push((created, latency));
            delivered += 1;
        }
    }
    Ok(LoadedRun {
        traffic_seed,
        delivered,
        series: LatencySeries { label, points },
    })
}

#[derive(Debug)]
pub struct ComparisonRow {
    pub label: String,
    pub delivered: usize,
    pub mean_latency_s: f64,
    pub tail_mean_latency_s: f64,
    /// Ratio of this run's mean to the first run's mean.
    pub mean_ratio_vs_first: f64,
}

#[derive(Debug)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

/// Align runs taken over identical traffic and compare their latencies.
/// Refuses runs with mismatched traffic seeds.
pub fn compare_runs(runs: &[LoadedRun]) -> Result<Comparison, ReportError> {
    if runs.len() < 2 {
        return Err(ReportError::TooFewRuns(runs.len()));
    }
    let seeds: Vec<u64> = runs.iter().map(|r| r.traffic_seed).collect();
    if seeds.windows(2).any(|w| w[0] != w[1]) {
        return Err(ReportError::SeedMismatch(seeds));
    }
    let base_mean = runs[0].series.mean();
    let rows = runs
        .iter()
        .map(|r| {
            let mean = r.series.mean();
            ComparisonRow {
                label: r.series.label.clone(),
                delivered: r.delivered,
                mean_latency_s: mean,
                tail_mean_latency_s: r.series.tail_mean(0.1),
                mean_ratio_vs_first: mean / base_mean,
            }
        })
        .collect();
    Ok(Comparison { rows })
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn comparison_csv(cmp: &Comparison) -> String {
    let mut out = String::new();
    out.push_str("label,delivered,mean_latency_s,tail_mean_latency_s,mean_ratio_vs_first\n");
    for r in &cmp.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_quote(&r.label),
            r.delivered,
            r.mean_latency_s,
            r.tail_mean_latency_s,
            r.mean_ratio_vs_first
        );
    }
    out
}
