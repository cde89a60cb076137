use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args as ClapArgs;
use tivf_core::artifact::{file_digest, LatencySource, ProfileArtifact, PROFILE_VERSION};
use tivf_core::partitioner::LatencyModel;
use tivf_core::profiler::{
    coverage_curve, fit_piecewise_linear, latency_samples_csv, profile_access, profile_latency,
    profile_sigma_max, LatencySample,
};
use tivf_core::vecstore::{load_dataset, load_index};

#[derive(ClapArgs)]
pub struct Args {
    #[arg(long)]
    pub index: PathBuf,
    /// Calibration query file (.tdat)
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub nprobe: usize,
    /// Batch-size grid for latency profiling
    #[arg(long, default_value = "1,2,4,8,16,32,64,128,256", value_delimiter = ',')]
    pub batch_sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 3)]
    pub max_segments: usize,
    /// Inject analytic latency curves instead of wall-clock measurement:
    /// `cq_intercept,cq_slope,lut_intercept,lut_slope` (ms). Keeps the
    /// whole artifact chain byte-reproducible.
    #[arg(long, value_delimiter = ',')]
    pub synthetic_latency: Option<Vec<f64>>,
    /// Also export raw latency samples as CSV
    #[arg(long)]
    pub latency_csv: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let index = load_index(&args.index).with_context(|| format!("loading {}", args.index.display()))?;
    let queries_ds =
        load_dataset(&args.queries).with_context(|| format!("loading {}", args.queries.display()))?;
    let queries: Vec<Vec<f32>> = queries_ds.rows().map(|r| r.to_vec()).collect();

    let access = profile_access(&index, &queries, args.nprobe)?;
    let sigma = profile_sigma_max(&index, &queries, args.nprobe, &access)?;

    let (samples, source) = match &args.synthetic_latency {
        None => (
            profile_latency(&index, &queries, &args.batch_sizes, args.nprobe, args.repetitions)?,
            LatencySource::Measured,
        ),
        Some(params) => {
            if params.len() != 4 {
                bail!("--synthetic-latency expects 4 comma-separated values");
            }
            let samples = args
                .batch_sizes
                .iter()
                .map(|&b| LatencySample {
                    batch: b,
                    t_cq_ms: params[0] + params[1] * b as f64,
                    t_lut_ms: params[2] + params[3] * b as f64,
                })
                .collect();
            (samples, LatencySource::Synthetic)
        }
    };
    let cq_pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.batch as f64, s.t_cq_ms)).collect();
    let lut_pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.batch as f64, s.t_lut_ms)).collect();
    let latency = LatencyModel {
        t_cq: fit_piecewise_linear(&cq_pts, args.max_segments)?,
        t_lut: fit_piecewise_linear(&lut_pts, args.max_segments)?,
    };

    let mut artifact = ProfileArtifact {
        version: PROFILE_VERSION,
        nprobe: args.nprobe,
        n_queries: queries.len(),
        access,
        sigma,
        latency_samples: samples,
        latency,
        latency_source: source,
        inputs: Default::default(),
    };
    artifact
        .inputs
        .insert("index".into(), file_digest(&args.index)?);
    artifact
        .inputs
        .insert("queries".into(), file_digest(&args.queries)?);

    let out = super::resolve_out_dir(&args.out);
    super::ensure_parent(&out)?;
    artifact.store(&out)?;
    if let Some(csv_path) = &args.latency_csv {
        super::ensure_parent(csv_path)?;
        std::fs::write(csv_path, latency_samples_csv(&artifact.latency_samples))?;
    }
    let curve = coverage_curve(&artifact.access)?;
    println!(
        "profiled {} queries: top-20% coverage {:.3}, sigma2_max {:.4} -> {}",
        artifact.n_queries,
        curve.mean_hitrate_at(0.2),
        artifact.sigma.sigma2_max,
        out.display()
    );
    Ok(())
}
