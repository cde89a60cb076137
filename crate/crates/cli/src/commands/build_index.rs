use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args as ClapArgs;
use tivf_core::artifact::{file_digest, write_sidecar, SidecarMeta};
use tivf_core::vecstore::{load_dataset, save_index, train_ivf, Metric, QuantizationKind};

#[derive(ClapArgs)]
pub struct Args {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub n_clusters: usize,
    /// none | scalar8
    #[arg(long, default_value = "none")]
    pub quantization: String,
    /// l2 | ip
    #[arg(long, default_value = "l2")]
    pub metric: String,
    #[arg(long, default_value_t = 2)]
    pub seed: u64,
}

pub fn run(args: Args) -> Result<()> {
    let quantization = match args.quantization.as_str() {
        "none" => QuantizationKind::None,
        "scalar8" => QuantizationKind::Scalar8,
        other => bail!("unknown quantization '{other}' (expected none|scalar8)"),
    };
    let metric = match args.metric.as_str() {
        "l2" => Metric::L2,
        "ip" => Metric::InnerProduct,
        other => bail!("unknown metric '{other}' (expected l2|ip)"),
    };
    let dataset = load_dataset(&args.dataset)
        .with_context(|| format!("loading {}", args.dataset.display()))?;
    let index = train_ivf(&dataset, args.n_clusters, quantization, metric, args.seed)?;

    let out = super::resolve_out_dir(&args.out);
    super::ensure_parent(&out)?;
    save_index(&index, &out)?;
    let mut meta = SidecarMeta {
        version: 1,
        inputs: Default::default(),
        params: Default::default(),
    };
    meta.inputs
        .insert("dataset".into(), file_digest(&args.dataset)?);
    meta.params.insert(
        "train".into(),
        serde_json::json!({
            "n_clusters": args.n_clusters,
            "quantization": args.quantization,
            "metric": args.metric,
            "seed": args.seed,
        }),
    );
    write_sidecar(&out, &meta)?;
    println!(
        "trained {} clusters over {} vectors -> {}",
        index.n_clusters(),
        index.n_vectors(),
        out.display()
    );
    Ok(())
}
