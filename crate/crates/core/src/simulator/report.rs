//! Sweep artifacts: per-request and sweep CSVs plus static SVG plots.
//!
//! Outputs are deterministic functions of the metrics so repeated runs
//! produce byte-identical files.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::simulator::{SimMetrics, SimMode};

/// One sweep-grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda_rps: f64,
    pub mode: SimMode,
    pub p50_ttft_ms: f64,
    pub p90_ttft_ms: f64,
    pub p95_ttft_ms: f64,
    pub slo_attainment: f64,
    pub mean_batch: f64,
    pub saturated: bool,
    pub mean_queue_ms: f64,
    pub mean_search_ms: f64,
    pub mean_prefill_ms: f64,
}

impl SweepRow {
    pub fn from_metrics(m: &SimMetrics, slo_total_ms: f64) -> Self {
        Self {
            lambda_rps: m.lambda_rps,
            mode: m.mode,
            p50_ttft_ms: m.ttft_percentile_ms(50.0),
            p90_ttft_ms: m.ttft_percentile_ms(90.0),
            p95_ttft_ms: m.ttft_percentile_ms(95.0),
            slo_attainment: m.slo_attainment(slo_total_ms),
            mean_batch: m.mean_batch(),
            saturated: m.saturated,
            mean_queue_ms: m.mean_queue_ms(),
            mean_search_ms: m.mean_search_ms(),
            mean_prefill_ms: m.mean_prefill_ms(),
        }
    }
}

/// Per-request CSV
/// (`request_id,arrival_ms,queue_ms,search_ms,prefill_ms,ttft_ms,e2e_ms,batch_size,hit_rate`).
pub fn per_request_csv(metrics: &SimMetrics) -> String {
    let mut out = String::from(
        "request_id,arrival_ms,queue_ms,search_ms,prefill_ms,ttft_ms,e2e_ms,batch_size,hit_rate\n",
    );
    for r in &metrics.records {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{},{:.6}\n",
            r.request_id,
            r.arrival_us as f64 / 1e3,
            r.queue_us as f64 / 1e3,
            r.search_us as f64 / 1e3,
            r.prefill_us as f64 / 1e3,
            r.ttft_us() as f64 / 1e3,
            r.e2e_us() as f64 / 1e3,
            r.batch_size,
            r.hit_rate,
        ));
    }
    out
}

/// Sweep CSV
/// (`lambda_rps,mode,p50_ttft,p90_ttft,p95_ttft,slo_attainment,mean_batch,saturated`).
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Degenerate("empty sweep".into()));
    }
    let mut out = String::from(
        "lambda_rps,mode,p50_ttft,p90_ttft,p95_ttft,slo_attainment,mean_batch,saturated\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{:.3},{},{:.3},{:.3},{:.3},{:.6},{:.3},{}\n",
            r.lambda_rps,
            r.mode,
            r.p50_ttft_ms,
            r.p90_ttft_ms,
            r.p95_ttft_ms,
            r.slo_attainment,
            r.mean_batch,
            r.saturated,
        ));
    }
    Ok(out)
}

/// Parses a sweep CSV back into rows. The pinned schema carries no
/// breakdown columns, so the mean queue/search/prefill fields come back
/// zeroed; callers can fill them from per-request records.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty sweep CSV".into()))?;
    if header
        != "lambda_rps,mode,p50_ttft,p90_ttft,p95_ttft,slo_attainment,mean_batch,saturated"
    {
        return Err(Error::Format(format!("unexpected sweep header: {header}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(Error::Format(format!("sweep row {i} has {} columns", cols.len())));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Format(format!("sweep row {i}: {e}")))
        };
        rows.push(SweepRow {
            lambda_rps: parse_f(cols[0])?,
            mode: SimMode::parse(cols[1])?,
            p50_ttft_ms: parse_f(cols[2])?,
            p90_ttft_ms: parse_f(cols[3])?,
            p95_ttft_ms: parse_f(cols[4])?,
            slo_attainment: parse_f(cols[5])?,
            mean_batch: parse_f(cols[6])?,
            saturated: cols[7] == "true",
            mean_queue_ms: 0.0,
            mean_search_ms: 0.0,
            mean_prefill_ms: 0.0,
        });
    }
    if rows.is_empty() {
        return Err(Error::Degenerate("empty sweep".into()));
    }
    Ok(rows)
}

/// Largest swept rate whose attainment prefix stays at or above the
/// threshold (first-crossing semantics over the ascending grid).
pub fn max_compliant_lambda(
    rows: &[SweepRow],
    mode: SimMode,
    threshold: f64,
) -> Option<f64> {
    let mut of_mode: Vec<&SweepRow> = rows.iter().filter(|r| r.mode == mode).collect();
    of_mode.sort_by(|a, b| a.lambda_rps.total_cmp(&b.lambda_rps));
    let mut best = None;
    for row in of_mode {
        if row.slo_attainment >= threshold {
            best = Some(row.lambda_rps);
        } else {
            break;
        }
    }
    best
}

/// Writes the sweep CSV plus attainment and TTFT-breakdown SVG plots.
/// Fails before touching the filesystem when the sweep is empty.
pub fn write_sweep_outputs(rows: &[SweepRow], slo_total_ms: f64, dir: &Path) -> Result<()> {
    let csv = sweep_csv(rows)?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("sweep.csv"), csv)?;
    render_plots(rows, slo_total_ms, dir)?;
    Ok(())
}

const MODE_COLORS: [(SimMode, RGBColor); 4] = [
    (SimMode::CpuOnly, RGBColor(214, 69, 65)),
    (SimMode::AllGpu, RGBColor(65, 131, 215)),
    (SimMode::DedicatedGpu, RGBColor(244, 179, 80)),
    (SimMode::Tiered, RGBColor(38, 166, 91)),
];

/// SLO-attainment curves per mode and a stacked TTFT breakdown.
pub fn render_plots(rows: &[SweepRow], slo_total_ms: f64, dir: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Degenerate("empty sweep".into()));
    }
    let plot_err = |e: String| Error::Format(format!("plot rendering: {e}"));

    let max_lambda = rows
        .iter()
        .map(|r| r.lambda_rps)
        .fold(f64::NEG_INFINITY, f64::max);

    // attainment vs arrival rate
    {
        let path = dir.join("slo_attainment.svg");
        let root = SVGBackend::new(&path, (800, 520)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
        let mut chart = ChartBuilder::on(&root)
            .caption("SLO attainment vs arrival rate", ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .build_cartesian_2d(0.0..max_lambda * 1.05, 0.0..1.05)
            .map_err(|e| plot_err(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc("arrival rate (req/s)")
            .y_desc("fraction of requests within TTFT budget")
            .draw()
            .map_err(|e| plot_err(e.to_string()))?;
        for (mode, color) in MODE_COLORS {
            let mut pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.mode == mode)
                .map(|r| (r.lambda_rps, r.slo_attainment))
                .collect();
            if pts.is_empty() {
                continue;
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            chart
                .draw_series(LineSeries::new(pts, color.stroke_width(2)))
                .map_err(|e| plot_err(e.to_string()))?
                .label(mode.as_str())
                .legend(move |(x, y)| {
                    PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2))
                });
        }
        chart
            .draw_series(std::iter::once(PathElement::new(
                vec![(0.0, 0.9), (max_lambda * 1.05, 0.9)],
                BLACK.stroke_width(1),
            )))
            .map_err(|e| plot_err(e.to_string()))?;
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.85))
            .draw()
            .map_err(|e| plot_err(e.to_string()))?;
        root.present().map_err(|e| plot_err(e.to_string()))?;
    }

    // TTFT breakdown: stacked mean queue/search/prefill per grid cell
    {
        let path = dir.join("ttft_breakdown.svg");
        let root = SVGBackend::new(&path, (900, 520)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
        let max_ttft = rows
            .iter()
            .map(|r| r.mean_queue_ms + r.mean_search_ms + r.mean_prefill_ms)
            .fold(slo_total_ms, f64::max);
        let n = rows.len();
        let mut chart = ChartBuilder::on(&root)
            .caption("mean TTFT breakdown", ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(60)
            .y_label_area_size(50)
            .build_cartesian_2d(0.0..n as f64, 0.0..max_ttft * 1.1)
            .map_err(|e| plot_err(e.to_string()))?;
        let labels: Vec<String> = rows
            .iter()
            .map(|r| format!("{}@{:.0}", r.mode, r.lambda_rps))
            .collect();
        chart
            .configure_mesh()
            .disable_x_mesh()
            .x_labels(n.min(16))
            .x_label_formatter(&|x| {
                let i = x.floor() as usize;
                labels.get(i).cloned().unwrap_or_default()
            })
            .y_desc("milliseconds")
            .draw()
            .map_err(|e| plot_err(e.to_string()))?;
        let segments = [
            ("queue", RGBColor(120, 120, 200)),
            ("search", RGBColor(200, 120, 120)),
            ("prefill", RGBColor(150, 150, 150)),
        ];
        for (i, row) in rows.iter().enumerate() {
            let parts = [row.mean_queue_ms, row.mean_search_ms, row.mean_prefill_ms];
            let mut base = 0.0;
            for (j, part) in parts.iter().enumerate() {
                chart
                    .draw_series(std::iter::once(Rectangle::new(
                        [
                            (i as f64 + 0.15, base),
                            (i as f64 + 0.85, base + part),
                        ],
                        segments[j].1.filled(),
                    )))
                    .map_err(|e| plot_err(e.to_string()))?;
                base += part;
            }
        }
        chart
            .draw_series(std::iter::once(PathElement::new(
                vec![(0.0, slo_total_ms), (n as f64, slo_total_ms)],
                BLACK.stroke_width(1),
            )))
            .map_err(|e| plot_err(e.to_string()))?;
        root.present().map_err(|e| plot_err(e.to_string()))?;
    }
    Ok(())
}
