use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args as ClapArgs;
use tivf_core::artifact::{file_digest, PlanArtifact, ProfileArtifact, PLAN_VERSION};
use tivf_core::partitioner::{partition, LlmModel, MemoryModel, SloConfig};
use tivf_core::profiler::{coverage_curve, PiecewiseLinear};
use tivf_core::simulator::ScenarioConfig;

const GB: f64 = 1e9;

#[derive(ClapArgs)]
pub struct Args {
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub out_plan: PathBuf,
    /// Also emit a simulator scenario file
    #[arg(long)]
    pub out_scenario: Option<PathBuf>,
    #[arg(long)]
    pub slo_search_ms: f64,
    #[arg(long)]
    pub slo_llm_ms: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.005)]
    pub delta: f64,
    #[arg(long)]
    pub kv_gb: f64,
    #[arg(long, default_value_t = 0.0)]
    pub param_gb: f64,
    #[arg(long)]
    pub mu_llm0: f64,
    #[arg(long, default_value_t = 40.0)]
    pub prefill_ms: f64,
    #[arg(long, default_value_t = 2.0)]
    pub decode_ms_per_token: f64,
    #[arg(long, default_value_t = 64)]
    pub output_tokens: u32,
    #[arg(long, default_value_t = 10.0)]
    pub gpu_speedup: f64,
    #[arg(long, default_value_t = 4)]
    pub n_accelerators: u32,
    #[arg(long, default_value_t = 1)]
    pub dedicated_count: u32,
    #[arg(long, default_value_t = 60.0)]
    pub duration_s: f64,
    #[arg(long, default_value_t = 7)]
    pub sim_seed: u64,
}

pub fn run(args: Args) -> Result<()> {
    let profile = ProfileArtifact::load(&args.profile)
        .with_context(|| format!("loading {}", args.profile.display()))?;
    let slo = SloConfig {
        slo_search_ms: args.slo_search_ms,
        slo_llm_ms: args.slo_llm_ms,
        epsilon: args.epsilon,
        delta: args.delta,
    };
    let mem = MemoryModel {
        kvcache_bytes: (args.kv_gb * GB) as u64,
        param_bytes: (args.param_gb * GB) as u64,
    };
    let llm = LlmModel {
        mu0_rps: args.mu_llm0,
        prefill_ms: PiecewiseLinear::constant(args.prefill_ms),
        decode_ms_per_token: args.decode_ms_per_token,
        output_tokens: args.output_tokens,
    };

    let plan = partition(
        &slo,
        &mem,
        &llm,
        &profile.latency,
        &profile.access,
        profile.sigma.sigma2_max,
    )?;
    let curve = coverage_curve(&profile.access)?;

    let mut artifact = PlanArtifact {
        version: PLAN_VERSION,
        slo,
        mem,
        llm: llm.clone(),
        sigma2_max: profile.sigma.sigma2_max,
        latency: profile.latency.clone(),
        curve: curve.points.clone(),
        plan: plan.clone(),
        shard_map: None,
        shard_files: Default::default(),
        inputs: Default::default(),
    };
    artifact
        .inputs
        .insert("profile".into(), file_digest(&args.profile)?);
    // carry the index digest transitively so later stages can check it
    if let Some(index_digest) = profile.inputs.get("index") {
        artifact
            .inputs
            .insert("index".into(), index_digest.clone());
    }

    let out_plan = super::resolve_out_dir(&args.out_plan);
    super::ensure_parent(&out_plan)?;
    artifact.store(&out_plan)?;

    if let Some(out_scenario) = &args.out_scenario {
        let mut scenario = ScenarioConfig {
            version: 1,
            seed: args.sim_seed,
            duration_s: args.duration_s,
            slo,
            latency: profile.latency.clone(),
            sigma2_max: profile.sigma.sigma2_max,
            curve: curve.points,
            rho: plan.rho,
            llm,
            mem,
            gpu_speedup: args.gpu_speedup,
            n_accelerators: args.n_accelerators,
            dedicated_count: args.dedicated_count,
            max_batch: None,
            dispatcher_on: true,
            inputs: Default::default(),
        };
        scenario
            .inputs
            .insert("plan".into(), file_digest(&out_plan)?);
        let out_scenario = super::resolve_out_dir(out_scenario);
        super::ensure_parent(&out_scenario)?;
        std::fs::write(&out_scenario, scenario.to_json()?)?;
    }

    println!(
        "rho {:.4} ({} hot clusters), predicted batch {}, mu {:.2} rps, {} iterations{} -> {}",
        plan.rho,
        plan.hot_cluster_ids.len(),
        plan.predicted_batch,
        plan.predicted_mu_rps,
        plan.iterations,
        if plan.saturated { " [saturated]" } else { "" },
        out_plan.display()
    );
    Ok(())
}
