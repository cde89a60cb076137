use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args as ClapArgs;
use tivf_core::artifact::{file_digest, verify_input, PlanArtifact, ShardMapJson};
use tivf_core::splitter::{save_shard, split_index};
use tivf_core::vecstore::{load_index, save_index};

#[derive(ClapArgs)]
pub struct Args {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub shards: u16,
}

pub fn run(args: Args) -> Result<()> {
    let mut artifact =
        PlanArtifact::load(&args.plan).with_context(|| format!("loading {}", args.plan.display()))?;
    // refuse stale chains: the plan must descend from this exact index
    verify_input(&artifact.inputs, "index", &args.index)?;
    let index = load_index(&args.index)?;

    // the deal depends only on the plan's hot set and the index's
    // cluster sizes; the profile argument just cross-checks shape
    let profile =
        tivf_core::profiler::profile_from_counts(&index, vec![1; index.n_clusters()]);
    let (map, shards, cold) = split_index(&index, &profile, &artifact.plan, args.shards)?;

    let out_dir = super::resolve_out_dir(&args.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    for shard in &shards {
        let path = out_dir.join(format!("shard_{}.tshd", shard.shard_id));
        save_shard(shard, &path)?;
        artifact
            .shard_files
            .insert(format!("shard_{}", shard.shard_id), file_digest(&path)?);
    }
    let cold_path = out_dir.join("cold.tivf");
    save_index(&cold, &cold_path)?;
    artifact
        .shard_files
        .insert("cold".into(), file_digest(&cold_path)?);

    artifact.shard_map = Some(ShardMapJson::from(&map));
    artifact
        .inputs
        .insert("plan".into(), file_digest(&args.plan)?);
    artifact.store(&out_dir.join("plan.json"))?;
    println!(
        "split {} hot clusters across {} shards (bytes: {:?}) -> {}",
        map.hot.len(),
        args.shards,
        map.shard_bytes,
        out_dir.display()
    );
    Ok(())
}
