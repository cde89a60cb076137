use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args as ClapArgs;
use tivf_core::artifact::{verify_input, PlanArtifact, ShardMapJson};
use tivf_core::hitrate::HitRateModel;
use tivf_core::pipeline::{EngineConfig, TierEngine, WireRequest, WireResponse};
use tivf_core::profiler::CoverageCurve;
use tivf_core::splitter::load_shard;
use tivf_core::vecstore::load_index;

#[derive(ClapArgs)]
pub struct Args {
    #[arg(long)]
    pub index: PathBuf,
    /// Directory produced by `split` (plan.json + shard files)
    #[arg(long)]
    pub split_dir: PathBuf,
    /// on | off
    #[arg(long, default_value = "on")]
    pub dispatcher: String,
    /// modeled | wall: source of the reported t_search_ms
    #[arg(long, default_value = "modeled")]
    pub timing: String,
}

pub fn run(args: Args) -> Result<()> {
    let dispatcher_on = match args.dispatcher.as_str() {
        "on" => true,
        "off" => false,
        other => bail!("unknown dispatcher mode '{other}'"),
    };
    let modeled_timing = match args.timing.as_str() {
        "modeled" => true,
        "wall" => false,
        other => bail!("unknown timing mode '{other}'"),
    };

    let plan_path = args.split_dir.join("plan.json");
    let artifact = PlanArtifact::load(&plan_path)
        .with_context(|| format!("loading {}", plan_path.display()))?;
    verify_input(&artifact.inputs, "index", &args.index)?;
    let map_json: &ShardMapJson = artifact
        .shard_map
        .as_ref()
        .context("plan has no shard map; run `split` first")?;

    let index = Arc::new(load_index(&args.index)?);
    let mut shards = Vec::new();
    for sid in 0..map_json.n_shards {
        let name = format!("shard_{sid}");
        let path = args.split_dir.join(format!("{name}.tshd"));
        verify_input(&artifact.shard_files, &name, &path)?;
        shards.push(Arc::new(load_shard(&path)?));
    }

    let curve = CoverageCurve {
        points: artifact.curve.clone(),
    };
    let engine = TierEngine::new(
        Arc::clone(&index),
        artifact.plan.clone(),
        map_json.into(),
        shards,
        curve.mean_hitrate_at(artifact.plan.rho),
        artifact.latency.clone(),
        HitRateModel::new(artifact.sigma2_max)?,
        artifact.slo,
        artifact.mem,
        artifact.llm.clone(),
        EngineConfig {
            dispatcher_on,
            ..Default::default()
        },
    )?;

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: WireRequest = serde_json::from_str(&line)
            .with_context(|| format!("parsing request line: {line}"))?;
        let id = request.id;
        let outcome = engine.run_batch(vec![request.into()])?;
        let r = &outcome.results[0];
        let response = WireResponse {
            id,
            hits: r.topk.hits.clone(),
            t_search_ms: if modeled_timing {
                r.modeled_release_ms
            } else {
                r.wall_release_ms
            },
        };
        serde_json::to_writer(&mut out, &response)?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    Ok(())
}
