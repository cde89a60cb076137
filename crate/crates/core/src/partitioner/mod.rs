//! Latency-bounded index partitioning.
//!
//! Derives the per-batch search budget from the search SLO with a
//! queuing reserve (`τ_s = SLO_search / (1 + ε)`), models LLM throughput
//! loss as index memory displaces KV cache, and runs a bisection
//! feedback loop: each candidate coverage implies a throughput, the
//! throughput implies an expected batch size, and the hybrid latency
//! model solved for the required batch-minimum hit rate is inverted back
//! to a coverage point. The loop converges because more coverage lowers
//! throughput and thus the next iteration's coverage demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitrate::hitrate_to_coverage;
use crate::profiler::{coverage_curve, AccessProfile, CoverageCurve, PiecewiseLinear};

/// SLO configuration. `epsilon` reserves queue wait worth one batch
/// latency (worst case); `delta` is the bisection tolerance on the
/// partitioning point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SloConfig {
    pub slo_search_ms: f64,
    pub slo_llm_ms: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl SloConfig {
    pub fn new(slo_search_ms: f64, slo_llm_ms: f64) -> Self {
        Self {
            slo_search_ms,
            slo_llm_ms,
            epsilon: 1.0,
            delta: 0.005,
        }
    }

    /// Combined TTFT budget used for attainment accounting.
    pub fn total_ms(&self) -> f64 {
        self.slo_search_ms + self.slo_llm_ms
    }
}

/// Per-batch search-latency budget `SLO_search / (1 + ε)`.
pub fn latency_bound(slo: &SloConfig) -> f64 {
    slo.slo_search_ms / (1.0 + slo.epsilon)
}

/// Accelerator memory budgets. `kvcache_bytes` is the KV-cache capacity
/// when no index is resident; index bytes displace it one for one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryModel {
    pub kvcache_bytes: u64,
    pub param_bytes: u64,
}

/// Generation-side model: peak bare-LLM throughput, prefill latency as a
/// function of batch size, and a deterministic decode cost for
/// end-to-end accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmModel {
    pub mu0_rps: f64,
    pub prefill_ms: PiecewiseLinear,
    pub decode_ms_per_token: f64,
    pub output_tokens: u32,
}

/// Fitted batch-latency models for the two search stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    pub t_cq: PiecewiseLinear,
    pub t_lut: PiecewiseLinear,
}

impl LatencyModel {
    /// Full CPU search latency `T_CQ(b) + T_LUT(b)`.
    pub fn total_ms(&self, b: f64) -> f64 {
        self.t_cq.eval(b) + self.t_lut.eval(b)
    }

    /// Hybrid latency at batch-minimum hit rate `eta`:
    /// `T_CQ(b) + (1 − η) · T_LUT(b)`.
    pub fn hybrid_ms(&self, b: f64, eta: f64) -> f64 {
        self.t_cq.eval(b) + (1.0 - eta.clamp(0.0, 1.0)) * self.t_lut.eval(b)
    }
}

/// Linear KV-displacement throughput model: caching `rho` of the index
/// scales throughput by `(KV − Index(ρ)) / KV`.
pub fn llm_throughput_at(
    mem: &MemoryModel,
    llm: &LlmModel,
    curve: &CoverageCurve,
    rho: f64,
) -> Result<f64> {
    let index_bytes = curve.hot_bytes_at(rho);
    if index_bytes > mem.kvcache_bytes {
        return Err(Error::IndexExceedsMemory {
            index_bytes,
            kv_bytes: mem.kvcache_bytes,
        });
    }
    let frac = (mem.kvcache_bytes - index_bytes) as f64 / mem.kvcache_bytes as f64;
    Ok(frac * llm.mu0_rps)
}

/// One InferPartition evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferOutcome {
    pub rho: f64,
    pub saturated: bool,
    /// Ceil-rounded expected batch size used by the up branch.
    pub batch_up: u32,
}

/// Solves the hybrid latency model for the required batch-minimum hit
/// rate under both batch-size roundings and inverts the smaller coverage.
pub fn infer_partition(
    tau_s_ms: f64,
    mu_rps: f64,
    latency: &LatencyModel,
    curve: &CoverageCurve,
    sigma2_max: f64,
) -> Result<InferOutcome> {
    if !(tau_s_ms > 0.0) || !(mu_rps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tau_s {tau_s_ms} ms and mu {mu_rps} rps must be positive"
        )));
    }
    let raw = mu_rps * tau_s_ms / 1000.0;
    if !raw.is_finite() {
        return Err(Error::NonFinite {
            context: "expected batch size",
        });
    }
    let b_up = (raw.ceil() as u32).max(1);
    let b_down = raw.floor() as u32;

    // rounding up: latency bound stays τ_s
    let up = branch(b_up, tau_s_ms, latency, curve, sigma2_max)?;
    // rounding down: bound tightens to the inter-batch period B/μ that
    // sustains throughput μ
    let chosen = if b_down >= 1 {
        let down_bound_ms = b_down as f64 / mu_rps * 1000.0;
        let down = branch(b_down, down_bound_ms, latency, curve, sigma2_max)?;
        if down.rho <= up.rho {
            down
        } else {
            up
        }
    } else {
        up
    };
    Ok(InferOutcome {
        rho: chosen.rho,
        saturated: chosen.saturated,
        batch_up: b_up,
    })
}

#[derive(Debug, Clone, Copy)]
struct BranchOutcome {
    rho: f64,
    saturated: bool,
}

fn branch(
    b: u32,
    bound_ms: f64,
    latency: &LatencyModel,
    curve: &CoverageCurve,
    sigma2_max: f64,
) -> Result<BranchOutcome> {
    let bf = b as f64;
    let t_cq = latency.t_cq.eval(bf);
    let t_lut = latency.t_lut.eval(bf);
    if !(t_cq.is_finite() && t_lut.is_finite()) {
        return Err(Error::NonFinite {
            context: "latency model",
        });
    }
    if t_lut <= 0.0 {
        // nothing to offload; feasible iff the CQ stage alone fits
        return Ok(BranchOutcome {
            rho: 0.0,
            saturated: t_cq > bound_ms,
        });
    }
    let eta_required = (t_cq + t_lut - bound_ms) / t_lut;
    if eta_required <= 0.0 {
        return Ok(BranchOutcome {
            rho: 0.0,
            saturated: false,
        });
    }
    if eta_required > 1.0 {
        // even full offload leaves T_CQ above the bound
        return Ok(BranchOutcome {
            rho: 1.0,
            saturated: true,
        });
    }
    let target = hitrate_to_coverage(curve, sigma2_max, b, eta_required)?;
    Ok(BranchOutcome {
        rho: target.rho,
        saturated: target.saturated,
    })
}

/// Converged partitioning decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub rho: f64,
    pub hot_cluster_ids: Vec<u32>,
    pub predicted_batch: u32,
    pub predicted_tau_s_ms: f64,
    pub predicted_mu_rps: f64,
    pub iterations: u32,
    pub saturated: bool,
}

const MAX_ITERATIONS: u32 = 64;

/// Bisection feedback loop over the partitioning point.
pub fn partition(
    slo: &SloConfig,
    mem: &MemoryModel,
    llm: &LlmModel,
    latency: &LatencyModel,
    profile: &AccessProfile,
    sigma2_max: f64,
) -> Result<PartitionPlan> {
    let curve = coverage_curve(profile)?;
    let tau_s = latency_bound(slo);
    if !(tau_s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "latency bound {tau_s} ms must be positive"
        )));
    }

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut iterations = 0u32;
    let mut last: Option<InferOutcome> = None;

    while hi - lo > slo.delta {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::PartitionDiverged {
                iterations: MAX_ITERATIONS,
            });
        }
        iterations += 1;
        let width = hi - lo;
        let rho_m = 0.5 * (lo + hi);
        let mu = llm_throughput_at(mem, llm, &curve, rho_m)?;
        let outcome = infer_partition(tau_s, mu, latency, &curve, sigma2_max)?;
        if outcome.rho > rho_m {
            lo = outcome.rho;
        } else {
            hi = rho_m;
        }
        last = Some(outcome);
        if hi - lo >= width {
            return Err(Error::PartitionDiverged { iterations });
        }
    }

    // evaluate once at the midpoint when the initial interval is already
    // within tolerance
    let outcome = match last {
        Some(o) => o,
        None => {
            let rho_m = 0.5 * (lo + hi);
            let mu = llm_throughput_at(mem, llm, &curve, rho_m)?;
            iterations += 1;
            infer_partition(tau_s, mu, latency, &curve, sigma2_max)?
        }
    };

    let rho = outcome.rho;
    let mu_final = llm_throughput_at(mem, llm, &curve, rho)?;
    let predicted_batch = ((mu_final * tau_s / 1000.0).ceil() as u32).max(1);
    Ok(PartitionPlan {
        rho,
        hot_cluster_ids: profile.hot_prefix(rho),
        predicted_batch,
        predicted_tau_s_ms: tau_s,
        predicted_mu_rps: mu_final,
        iterations,
        saturated: outcome.saturated,
    })
}

#[cfg(test)]
mod tests;
