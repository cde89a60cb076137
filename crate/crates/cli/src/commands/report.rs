use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args as ClapArgs;
use tivf_core::simulator::{max_compliant_lambda, render_plots, SimMode};

#[derive(ClapArgs)]
pub struct Args {
    /// Directory produced by `simulate` (sweep.csv + per-request CSVs)
    #[arg(long)]
    pub sweep_dir: PathBuf,
    /// Plot output directory (defaults to the sweep directory)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Combined TTFT budget for the compliance summary, ms
    #[arg(long)]
    pub slo_total_ms: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    pub attainment_threshold: f64,
}

pub fn run(args: Args) -> Result<()> {
    let sweep_path = args.sweep_dir.join("sweep.csv");
    let text = std::fs::read_to_string(&sweep_path)
        .with_context(|| format!("loading {}", sweep_path.display()))?;
    let mut rows = tivf_core::simulator::parse_sweep_csv(&text)?;

    // breakdown means from per-request files when the sweep kept them
    for row in &mut rows {
        let name = format!("requests_{}_{:.0}.csv", row.mode, row.lambda_rps);
        let path = args.sweep_dir.join(name);
        if let Ok(csv) = std::fs::read_to_string(&path) {
            if let Some((q, s, p)) = breakdown_means(&csv) {
                row.mean_queue_ms = q;
                row.mean_search_ms = s;
                row.mean_prefill_ms = p;
            }
        }
    }

    let slo_total_ms = match args.slo_total_ms {
        Some(v) => v,
        None => {
            // recorded by `simulate` in the sweep sidecar
            let meta = tivf_core::artifact::read_sidecar(&sweep_path)
                .context("no --slo-total-ms and no sweep.csv.meta.json")?;
            meta.params
                .get("slo_total_ms")
                .and_then(|v| v.as_f64())
                .context("sweep sidecar lacks slo_total_ms")?
        }
    };

    let out_dir = super::resolve_out_dir(args.out_dir.as_deref().unwrap_or(&args.sweep_dir));
    std::fs::create_dir_all(&out_dir)?;
    render_plots(&rows, slo_total_ms, &out_dir)?;

    for mode in SimMode::ALL {
        if !rows.iter().any(|r| r.mode == mode) {
            continue;
        }
        match max_compliant_lambda(&rows, mode, args.attainment_threshold) {
            Some(lam) => println!("{mode}: max compliant rate {lam} req/s"),
            None => println!("{mode}: no compliant rate in sweep"),
        }
    }
    println!("plots -> {}", out_dir.display());
    Ok(())
}

fn breakdown_means(csv: &str) -> Option<(f64, f64, f64)> {
    let mut n = 0usize;
    let (mut q, mut s, mut p) = (0.0f64, 0.0f64, 0.0f64);
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return None;
        }
        q += cols[2].parse::<f64>().ok()?;
        s += cols[3].parse::<f64>().ok()?;
        p += cols[4].parse::<f64>().ok()?;
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    Some((q / nf, s / nf, p / nf))
}
