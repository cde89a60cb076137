//! Deterministic discrete-event simulation of the arrival → queue →
//! hybrid search → LLM prefill pipeline.
//!
//! The virtual clock is integer microseconds. The retrieval server uses
//! on-demand dynamic batching: whenever it is free and requests are
//! queued, it takes everything waiting (up to an optional cap) and
//! serves the batch with the calibrated latency model. Under the tiered
//! mode each query draws its own hit rate from the Beta model (or
//! measures one against an attached index), so batch completion is
//! governed by the realized minimum — the planner's expectation model is
//! deliberately not reused here, keeping the planner-vs-reality gap
//! observable. The LLM stage is a single server at the memory-scaled
//! throughput with a prefill latency model; decode adds a deterministic
//! per-token cost to end-to-end times only.

mod report;
mod workload;

pub use report::{
    max_compliant_lambda, parse_sweep_csv, per_request_csv, render_plots, sweep_csv,
    write_sweep_outputs, SweepRow,
};
pub use workload::generate_workload;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::sync::Arc;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitrate::HitRateModel;
use crate::partitioner::{llm_throughput_at, LatencyModel, LlmModel, MemoryModel, SloConfig};
use crate::profiler::{CoverageCurve, CoveragePoint};
use crate::vecstore::IvfIndex;

/// Index placement strategy being simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    CpuOnly,
    AllGpu,
    DedicatedGpu,
    Tiered,
}

impl SimMode {
    pub const ALL: [SimMode; 4] = [
        SimMode::CpuOnly,
        SimMode::AllGpu,
        SimMode::DedicatedGpu,
        SimMode::Tiered,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SimMode::CpuOnly => "cpu_only",
            SimMode::AllGpu => "all_gpu",
            SimMode::DedicatedGpu => "dedicated_gpu",
            SimMode::Tiered => "tiered",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cpu_only" => Ok(SimMode::CpuOnly),
            "all_gpu" => Ok(SimMode::AllGpu),
            "dedicated_gpu" => Ok(SimMode::DedicatedGpu),
            "tiered" => Ok(SimMode::Tiered),
            other => Err(Error::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for SimMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

const SCENARIO_VERSION: u32 = 1;

/// Calibrated scenario: everything a sweep needs except the arrival rate
/// and mode. Serializes as the versioned scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub version: u32,
    pub seed: u64,
    pub duration_s: f64,
    pub slo: SloConfig,
    pub latency: LatencyModel,
    pub sigma2_max: f64,
    /// Coverage curve of the profiled workload (mean hit rate and hot
    /// bytes per coverage point).
    pub curve: Vec<CoveragePoint>,
    /// Tiered-mode partitioning point.
    pub rho: f64,
    pub llm: LlmModel,
    pub mem: MemoryModel,
    pub gpu_speedup: f64,
    /// Accelerator pool size and how many a dedicated-retrieval baseline
    /// removes from the LLM pool.
    pub n_accelerators: u32,
    pub dedicated_count: u32,
    pub max_batch: Option<usize>,
    pub dispatcher_on: bool,
    #[serde(default)]
    pub inputs: crate::artifact::InputDigests,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_VERSION {
            return Err(Error::Format(format!(
                "unsupported scenario version {}",
                self.version
            )));
        }
        if self.curve.is_empty() {
            return Err(Error::Degenerate("scenario curve is empty".into()));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidArgument("duration must be positive".into()));
        }
        Ok(())
    }

    pub fn coverage_curve(&self) -> CoverageCurve {
        CoverageCurve {
            points: self.curve.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Optional real index attachment: hit rates are then measured per query
/// against the hot set instead of drawn from the Beta model.
pub struct IndexAttachment {
    pub index: Arc<IvfIndex>,
    pub hot_set: std::collections::BTreeSet<u32>,
    pub queries: Vec<Vec<f32>>,
    pub nprobe: usize,
}

/// One per-request record; times in integer µs of the virtual clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestRecord {
    pub request_id: u64,
    pub arrival_us: u64,
    pub queue_us: u64,
    pub search_us: u64,
    pub prefill_us: u64,
    pub decode_us: u64,
    pub batch_size: u32,
    pub hit_rate: f64,
}

impl RequestRecord {
    pub fn ttft_us(&self) -> u64 {
        self.queue_us + self.search_us + self.prefill_us
    }

    pub fn e2e_us(&self) -> u64 {
        self.ttft_us() + self.decode_us
    }
}

/// One served batch (for dispatcher-ablation accounting).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchRecord {
    pub start_us: u64,
    pub size: u32,
    pub eta_min: f64,
    /// Mean per-query search completion (µs from batch start).
    pub mean_release_us: f64,
    /// Batch barrier completion (µs from batch start).
    pub done_us: u64,
}

/// Simulation output.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub mode: SimMode,
    pub lambda_rps: f64,
    pub records: Vec<RequestRecord>,
    pub batches: Vec<BatchRecord>,
    pub saturated: bool,
    /// Time-average number of requests between arrival and first token
    /// over the arrival horizon.
    pub mean_in_system: f64,
    /// In-flight requests at the arrival horizon.
    pub in_flight_at_horizon: u64,
}

impl SimMetrics {
    pub fn mean_batch(&self) -> f64 {
        if self.batches.is_empty() {
            return 0.0;
        }
        self.batches.iter().map(|b| b.size as f64).sum::<f64>() / self.batches.len() as f64
    }

    pub fn ttft_percentile_ms(&self, p: f64) -> f64 {
        percentile_us(self.records.iter().map(|r| r.ttft_us()), p) / 1e3
    }

    pub fn search_percentile_ms(&self, p: f64) -> f64 {
        percentile_us(self.records.iter().map(|r| r.search_us), p) / 1e3
    }

    pub fn e2e_percentile_ms(&self, p: f64) -> f64 {
        percentile_us(self.records.iter().map(|r| r.e2e_us()), p) / 1e3
    }

    /// Fraction of requests whose TTFT meets the combined budget.
    pub fn slo_attainment(&self, slo_total_ms: f64) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let bound_us = (slo_total_ms * 1e3) as u64;
        let ok = self
            .records
            .iter()
            .filter(|r| r.ttft_us() <= bound_us)
            .count();
        ok as f64 / self.records.len() as f64
    }

    pub fn mean_queue_ms(&self) -> f64 {
        mean_us(self.records.iter().map(|r| r.queue_us))
    }

    pub fn mean_search_ms(&self) -> f64 {
        mean_us(self.records.iter().map(|r| r.search_us))
    }

    pub fn mean_prefill_ms(&self) -> f64 {
        mean_us(self.records.iter().map(|r| r.prefill_us))
    }

    pub fn mean_ttft_ms(&self) -> f64 {
        mean_us(self.records.iter().map(|r| r.ttft_us()))
    }
}

fn mean_us(values: impl Iterator<Item = u64>) -> f64 {
    let mut sum = 0u128;
    let mut n = 0u64;
    for v in values {
        sum += v as u128;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64 / 1e3
    }
}

/// Nearest-rank percentile in µs.
fn percentile_us(values: impl Iterator<Item = u64>, p: f64) -> f64 {
    let mut v: Vec<u64> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_unstable();
    let rank = ((p / 100.0) * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1] as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Arrival(u32),
    SearchDone,
    QueryReady(u32),
    FirstToken(u32),
    LlmDone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Event {
    at_us: u64,
    seq: u64,
    kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.at_us.cmp(&other.at_us).then(self.seq.cmp(&other.seq))
    }
}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Runs one scenario at one arrival rate in one mode.
pub fn simulate(cfg: &ScenarioConfig, mode: SimMode, lambda_rps: f64) -> Result<SimMetrics> {
    simulate_inner(cfg, mode, lambda_rps, None)
}

/// Like [`simulate`], but measures tiered hit rates against a real index.
pub fn simulate_with_index(
    cfg: &ScenarioConfig,
    mode: SimMode,
    lambda_rps: f64,
    attachment: &IndexAttachment,
) -> Result<SimMetrics> {
    simulate_inner(cfg, mode, lambda_rps, Some(attachment))
}

fn simulate_inner(
    cfg: &ScenarioConfig,
    mode: SimMode,
    lambda_rps: f64,
    attachment: Option<&IndexAttachment>,
) -> Result<SimMetrics> {
    cfg.validate()?;
    let curve = cfg.coverage_curve();
    let hit_model = HitRateModel::new(cfg.sigma2_max)?;

    // generation throughput under this placement
    let full_bytes = curve.hot_bytes_at(1.0);
    let mu = match mode {
        SimMode::CpuOnly => cfg.llm.mu0_rps,
        SimMode::Tiered => llm_throughput_at(&cfg.mem, &cfg.llm, &curve, cfg.rho)?,
        SimMode::AllGpu => {
            if full_bytes > cfg.mem.kvcache_bytes {
                return Err(Error::IndexExceedsMemory {
                    index_bytes: full_bytes,
                    kv_bytes: cfg.mem.kvcache_bytes,
                });
            }
            (cfg.mem.kvcache_bytes - full_bytes) as f64 / cfg.mem.kvcache_bytes as f64
                * cfg.llm.mu0_rps
        }
        SimMode::DedicatedGpu => {
            if cfg.dedicated_count >= cfg.n_accelerators {
                return Err(Error::InvalidArgument(
                    "dedicated baseline removes every accelerator".into(),
                ));
            }
            cfg.llm.mu0_rps * (cfg.n_accelerators - cfg.dedicated_count) as f64
                / cfg.n_accelerators as f64
        }
    };
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "generation throughput {mu} must be positive"
        )));
    }
    let llm_service_us = (1e6 / mu).round() as u64;
    let prefill_us = (cfg.llm.prefill_ms.eval(1.0) * 1e3).round() as u64;
    let decode_us =
        (cfg.llm.decode_ms_per_token * cfg.llm.output_tokens as f64 * 1e3).round() as u64;
    let tiered_mean_eta = curve.mean_hitrate_at(cfg.rho);
    let tiered_sampler = hit_model.sampler_at(tiered_mean_eta)?;

    let arrivals = generate_workload(lambda_rps, cfg.duration_s, cfg.seed)?;
    let n = arrivals.len();
    let horizon_us = (cfg.duration_s * 1e6) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_CAFE);

    let mut heap: BinaryHeap<Reverse<Event>> = BinaryHeap::with_capacity(n * 4);
    let mut seq = 0u64;
    let push = |heap: &mut BinaryHeap<Reverse<Event>>, seq: &mut u64, at_us, kind| {
        *seq += 1;
        heap.push(Reverse(Event {
            at_us,
            seq: *seq,
            kind,
        }));
    };
    for (i, &at) in arrivals.iter().enumerate() {
        push(&mut heap, &mut seq, at, EventKind::Arrival(i as u32));
    }

    let mut retrieval_queue: VecDeque<u32> = VecDeque::new();
    let mut retrieval_busy = false;
    let mut llm_queue: VecDeque<u32> = VecDeque::new();
    let mut llm_busy = false;

    let mut batch_start = vec![0u64; n];
    let mut release = vec![0u64; n];
    let mut batch_size = vec![0u32; n];
    let mut hit = vec![0.0f64; n];
    let mut llm_start = vec![0u64; n];
    let mut batches: Vec<BatchRecord> = Vec::new();

    // Little's-law instrumentation over the arrival horizon
    let mut in_system = 0i64;
    let mut last_t = 0u64;
    let mut area_us = 0.0f64;
    let mut in_flight_at_horizon: Option<u64> = None;

    while let Some(Reverse(ev)) = heap.pop() {
        let now = ev.at_us;
        // integrate N(t) over [0, horizon]
        if last_t < horizon_us {
            let upto = now.min(horizon_us);
            if upto > last_t {
                area_us += in_system as f64 * (upto - last_t) as f64;
            }
            if now >= horizon_us && in_flight_at_horizon.is_none() {
                in_flight_at_horizon = Some(in_system.max(0) as u64);
            }
        }
        last_t = now.max(last_t);

        match ev.kind {
            EventKind::Arrival(i) => {
                retrieval_queue.push_back(i);
                in_system += 1;
                if !retrieval_busy {
                    start_batch(
                        now,
                        cfg,
                        mode,
                        &tiered_sampler,
                        attachment,
                        &mut rng,
                        &mut retrieval_queue,
                        &mut retrieval_busy,
                        &mut batch_start,
                        &mut release,
                        &mut batch_size,
                        &mut hit,
                        &mut batches,
                        &mut heap,
                        &mut seq,
                    );
                }
            }
            EventKind::SearchDone => {
                retrieval_busy = false;
                if !retrieval_queue.is_empty() {
                    start_batch(
                        now,
                        cfg,
                        mode,
                        &tiered_sampler,
                        attachment,
                        &mut rng,
                        &mut retrieval_queue,
                        &mut retrieval_busy,
                        &mut batch_start,
                        &mut release,
                        &mut batch_size,
                        &mut hit,
                        &mut batches,
                        &mut heap,
                        &mut seq,
                    );
                }
            }
            EventKind::QueryReady(i) => {
                llm_queue.push_back(i);
                if !llm_busy {
                    llm_busy = true;
                    let i = llm_queue.pop_front().expect("just pushed");
                    llm_start[i as usize] = now;
                    push(
                        &mut heap,
                        &mut seq,
                        now + prefill_us,
                        EventKind::FirstToken(i),
                    );
                    push(&mut heap, &mut seq, now + llm_service_us, EventKind::LlmDone);
                }
            }
            EventKind::FirstToken(_) => {
                in_system -= 1;
            }
            EventKind::LlmDone => {
                llm_busy = false;
                if let Some(i) = llm_queue.pop_front() {
                    llm_busy = true;
                    llm_start[i as usize] = now;
                    push(
                        &mut heap,
                        &mut seq,
                        now + prefill_us,
                        EventKind::FirstToken(i),
                    );
                    push(&mut heap, &mut seq, now + llm_service_us, EventKind::LlmDone);
                }
            }
        }
        // work conservation: the retrieval server never idles with a
        // non-empty queue
        debug_assert!(retrieval_busy || retrieval_queue.is_empty());
    }

    let records: Vec<RequestRecord> = (0..n)
        .map(|i| RequestRecord {
            request_id: i as u64,
            arrival_us: arrivals[i],
            queue_us: batch_start[i] - arrivals[i],
            search_us: release[i] - batch_start[i],
            prefill_us: (llm_start[i] - release[i]) + prefill_us,
            decode_us,
            batch_size: batch_size[i],
            hit_rate: hit[i],
        })
        .collect();

    let in_flight = in_flight_at_horizon.unwrap_or(0);
    // offered load beyond capacity leaves a growing backlog at the
    // horizon; stable queues stay near their stationary size
    let saturated = in_flight > 10.max(n as u64 / 50);
    Ok(SimMetrics {
        mode,
        lambda_rps,
        records,
        batches,
        saturated,
        mean_in_system: area_us / horizon_us as f64,
        in_flight_at_horizon: in_flight,
    })
}

#[allow(clippy::too_many_arguments)]
fn start_batch(
    now: u64,
    cfg: &ScenarioConfig,
    mode: SimMode,
    tiered_sampler: &crate::hitrate::HitRateSampler,
    attachment: Option<&IndexAttachment>,
    rng: &mut ChaCha8Rng,
    queue: &mut VecDeque<u32>,
    busy: &mut bool,
    batch_start: &mut [u64],
    release: &mut [u64],
    batch_size: &mut [u32],
    hit: &mut [f64],
    batches: &mut Vec<BatchRecord>,
    heap: &mut BinaryHeap<Reverse<Event>>,
    seq: &mut u64,
) {
    let take = cfg.max_batch.unwrap_or(usize::MAX).min(queue.len());
    let members: Vec<u32> = (0..take).map(|_| queue.pop_front().expect("sized")).collect();
    let b = members.len();
    debug_assert!(b > 0);
    *busy = true;

    let bf = b as f64;
    let t_cq_us = (cfg.latency.t_cq.eval(bf) * 1e3).round() as u64;
    let t_lut_us = (cfg.latency.t_lut.eval(bf) * 1e3).round() as u64;

    let push = |heap: &mut BinaryHeap<Reverse<Event>>, seq: &mut u64, at_us, kind| {
        *seq += 1;
        heap.push(Reverse(Event {
            at_us,
            seq: *seq,
            kind,
        }));
    };

    let mut eta_min = 1.0f64;
    let mut releases = Vec::with_capacity(b);
    match mode {
        SimMode::CpuOnly => {
            let done = now + t_cq_us + t_lut_us;
            for &i in &members {
                hit[i as usize] = 0.0;
                releases.push(done);
            }
            eta_min = 0.0;
        }
        SimMode::AllGpu | SimMode::DedicatedGpu => {
            let done = now
                + (((t_cq_us + t_lut_us) as f64) / cfg.gpu_speedup).round() as u64;
            for &i in &members {
                hit[i as usize] = 1.0;
                releases.push(done);
            }
        }
        SimMode::Tiered => {
            // per-query hit rates: drawn from the Beta model, or measured
            // against the attached index
            for &i in &members {
                let eta = match attachment {
                    None => tiered_sampler.sample(rng),
                    Some(att) => {
                        let q = &att.queries[(i as usize) % att.queries.len()];
                        let shortlist = att
                            .index
                            .coarse_quantize_one(i as u64, q, att.nprobe)
                            .expect("attachment query dims match");
                        let hits = shortlist
                            .cluster_ids
                            .iter()
                            .filter(|c| att.hot_set.contains(c))
                            .count();
                        hits as f64 / att.nprobe as f64
                    }
                };
                let eta = eta.clamp(0.0, 1.0);
                hit[i as usize] = eta;
                eta_min = eta_min.min(eta);
                // hot-tier work is hidden under the CPU stage: a query's
                // search completes once its own cold remainder is scanned
                let rel = now + t_cq_us + ((1.0 - eta) * t_lut_us as f64).round() as u64;
                releases.push(rel);
            }
        }
    }
    let done = match mode {
        SimMode::Tiered => now + t_cq_us + ((1.0 - eta_min) * t_lut_us as f64).round() as u64,
        _ => *releases.iter().max().expect("non-empty batch"),
    };

    for (pos, &i) in members.iter().enumerate() {
        batch_start[i as usize] = now;
        batch_size[i as usize] = b as u32;
        let rel = if cfg.dispatcher_on {
            releases[pos]
        } else {
            done
        };
        release[i as usize] = rel;
        push(heap, seq, rel, EventKind::QueryReady(i));
    }
    push(heap, seq, done, EventKind::SearchDone);

    let mean_release_us = if cfg.dispatcher_on {
        releases.iter().map(|&r| (r - now) as f64).sum::<f64>() / bf
    } else {
        (done - now) as f64
    };
    batches.push(BatchRecord {
        start_us: now,
        size: b as u32,
        eta_min,
        mean_release_us,
        done_us: done - now,
    });
}
