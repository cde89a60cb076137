use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args as ClapArgs;
use tivf_core::artifact::{file_digest, write_sidecar, SidecarMeta};
use tivf_core::exec::{map_batch, ExecMode};
use tivf_core::simulator::{
    per_request_csv, simulate, sweep_csv, ScenarioConfig, SimMode, SweepRow,
};

#[derive(ClapArgs)]
pub struct Args {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Placement modes to sweep (repeatable); defaults to all four
    #[arg(long = "mode")]
    pub modes: Vec<String>,
    /// Arrival rates to sweep, req/s (repeatable or comma-separated)
    #[arg(long = "lambda", value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    /// Also write one per-request CSV per (mode, lambda) cell
    #[arg(long, default_value_t = true)]
    pub per_request: bool,
}

pub fn run(args: Args) -> Result<()> {
    let text = std::fs::read_to_string(&args.scenario)
        .with_context(|| format!("loading {}", args.scenario.display()))?;
    let cfg = ScenarioConfig::from_json(&text)?;
    let modes: Vec<SimMode> = if args.modes.is_empty() {
        SimMode::ALL.to_vec()
    } else {
        args.modes
            .iter()
            .map(|m| SimMode::parse(m).map_err(Into::into))
            .collect::<Result<_>>()?
    };
    if args.lambdas.is_empty() {
        bail!("at least one --lambda is required");
    }
    if args.lambdas.iter().any(|&l| !(l > 0.0)) {
        bail!("arrival rates must be positive");
    }

    let cells: Vec<(SimMode, f64)> = modes
        .iter()
        .flat_map(|&m| args.lambdas.iter().map(move |&l| (m, l)))
        .collect();
    // sweep points are independent runs; collect in input order
    let metrics = map_batch(ExecMode::default(), &cells, |&(mode, lambda)| {
        simulate(&cfg, mode, lambda)
    });

    let out_dir = super::resolve_out_dir(&args.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    let slo_total = cfg.slo.total_ms();
    let mut rows = Vec::with_capacity(cells.len());
    for m in metrics {
        let m = m?;
        if args.per_request {
            let name = format!("requests_{}_{:.0}.csv", m.mode, m.lambda_rps);
            std::fs::write(out_dir.join(name), per_request_csv(&m))?;
        }
        rows.push(SweepRow::from_metrics(&m, slo_total));
    }
    let csv = sweep_csv(&rows)?;
    let sweep_path = out_dir.join("sweep.csv");
    std::fs::write(&sweep_path, csv)?;

    let mut meta = SidecarMeta {
        version: 1,
        inputs: Default::default(),
        params: Default::default(),
    };
    meta.inputs
        .insert("scenario".into(), file_digest(&args.scenario)?);
    meta.params
        .insert("slo_total_ms".into(), serde_json::json!(slo_total));
    write_sidecar(&sweep_path, &meta)?;

    for row in &rows {
        println!(
            "{} λ={:<6} attainment={:.3} p90_ttft={:.1}ms mean_batch={:.1}{}",
            row.mode,
            row.lambda_rps,
            row.slo_attainment,
            row.p90_ttft_ms,
            row.mean_batch,
            if row.saturated { " [saturated]" } else { "" },
        );
    }
    println!("wrote {}", sweep_path.display());
    Ok(())
}
