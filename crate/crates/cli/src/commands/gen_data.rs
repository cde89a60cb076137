use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args as ClapArgs;
use tivf_core::artifact::{file_digest, write_sidecar, SidecarMeta};
use tivf_core::synth::{Mixture, Popularity};
use tivf_core::vecstore::{save_dataset, VectorDataset};

#[derive(ClapArgs)]
pub struct Args {
    /// Output directory for dataset.tdat, calib.tdat, test.tdat
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 50_000)]
    pub n_vectors: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    /// Gaussian-mixture mode count
    #[arg(long, default_value_t = 32)]
    pub modes: usize,
    /// Centre spread relative to the unit mode std
    #[arg(long, default_value_t = 14.0)]
    pub separation: f32,
    #[arg(long, default_value_t = 1.0)]
    pub mode_std: f32,
    #[arg(long, default_value_t = 5_000)]
    pub n_calib: usize,
    #[arg(long, default_value_t = 5_000)]
    pub n_test: usize,
    /// Zipf exponent for query popularity; 0 gives a uniform workload
    #[arg(long, default_value_t = 1.2)]
    pub zipf_s: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn run(args: Args) -> Result<()> {
    let out_dir = super::resolve_out_dir(&args.out_dir);
    std::fs::create_dir_all(&out_dir).context("creating output directory")?;

    let mix = Mixture::new(args.dim, args.modes, args.separation, args.mode_std, args.seed);
    let dataset = mix.dataset(args.n_vectors, args.seed.wrapping_add(1))?;
    let popularity = if args.zipf_s > 0.0 {
        Popularity::Zipf { s: args.zipf_s }
    } else {
        Popularity::Uniform
    };
    // calibration and test query sets are disjoint by seed
    let calib = mix.queries(args.n_calib, popularity, args.seed.wrapping_add(2));
    let test = mix.queries(args.n_test, popularity, args.seed.wrapping_add(3));

    let params = serde_json::json!({
        "n_vectors": args.n_vectors,
        "dim": args.dim,
        "modes": args.modes,
        "separation": args.separation,
        "mode_std": args.mode_std,
        "zipf_s": args.zipf_s,
        "seed": args.seed,
    });
    for (name, vectors) in [("calib", &calib), ("test", &test)] {
        let ids = (0..vectors.len() as u64).collect();
        let flat: Vec<f32> = vectors.iter().flatten().copied().collect();
        let ds = VectorDataset::new(args.dim, ids, flat)?;
        let path = out_dir.join(format!("{name}.tdat"));
        save_dataset(&ds, &path)?;
        write_meta(&path, &params)?;
    }
    let path = out_dir.join("dataset.tdat");
    save_dataset(&dataset, &path)?;
    write_meta(&path, &params)?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn write_meta(path: &std::path::Path, params: &serde_json::Value) -> Result<()> {
    let mut meta = SidecarMeta {
        version: 1,
        inputs: Default::default(),
        params: Default::default(),
    };
    meta.params
        .insert("generator".into(), params.clone());
    meta.params
        .insert("self".into(), serde_json::json!(file_digest(path)?));
    write_sidecar(path, &meta)?;
    Ok(())
}
