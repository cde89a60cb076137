//! Runtime hybrid retrieval engine.
//!
//! A batch flows through one central coarse quantization, is routed via
//! the mapping tables into per-shard probe lists (pruned to resident
//! clusters) plus a cold remainder, and executes on one worker per tier.
//! Workers push per-query completion events into a queue; the dispatcher
//! merges and re-ranks a query's partials the moment its last tier
//! finishes (or at the batch barrier when the dispatcher is off). The
//! cold worker reports per query after scanning that query's cluster
//! group, so high-hit queries release early.
//!
//! Placement is a versioned immutable snapshot: readers pin an `Arc` per
//! batch and swaps publish a new version, so routing updates never block
//! or tear in-flight batches. While a shard is being refreshed its
//! clusters route to the cold path, which scans the full host-resident
//! index; every request stays answerable mid-swap and results are always
//! identical to a monolithic search.

mod stats;

pub use stats::{RuntimeStats, StatsWindow};

use std::sync::Arc;
use std::time::Instant;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitrate::HitRateModel;
use crate::partitioner::{
    partition, LatencyModel, LlmModel, MemoryModel, PartitionPlan, SloConfig,
};
use crate::profiler::{coverage_curve, profile_from_counts};
use crate::splitter::{split_index, ShardIndex, ShardMap};
use crate::vecstore::{IvfIndex, TopK};

/// One retrieval request.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalRequest {
    pub request_id: u64,
    pub query: Vec<f32>,
    pub nprobe: usize,
    pub k: usize,
}

/// Which execution tier a task targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Shard(u16),
    Cold,
}

/// Work for one tier: per query, the probe list in shortlist order
/// (local cluster ids for shards, global ids for the cold path).
#[derive(Debug, Clone, PartialEq)]
pub struct TierTask {
    pub tier: Tier,
    pub work: Vec<(usize, Vec<u32>)>,
}

/// Engine tuning knobs.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub dispatcher_on: bool,
    /// Modeled accelerator speedup over the CPU scan curve; used by the
    /// latency model behind runtime statistics, not by execution.
    pub gpu_speedup: f64,
    /// Drift window size in requests.
    pub window: usize,
    pub attainment_threshold: f64,
    pub hitrate_band: f64,
    /// Fault injection: workers of this shard fail, exercising the
    /// cold-path fallback.
    pub fail_shard: Option<u16>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            dispatcher_on: true,
            gpu_speedup: 10.0,
            window: 2000,
            attainment_threshold: 0.9,
            hitrate_band: 0.05,
            fail_shard: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Shard { shard: u16, local: u32 },
    Cold,
}

/// Immutable placement snapshot.
struct EngineState {
    version: u64,
    routes: Vec<Route>,
    shards: Vec<Option<Arc<ShardIndex>>>,
    map: ShardMap,
    plan: PartitionPlan,
    /// Planner's expected mean hit rate at the plan's coverage.
    expected_eta: f64,
}

impl EngineState {
    fn from_placement(
        version: u64,
        n_clusters: usize,
        map: ShardMap,
        shards: Vec<Arc<ShardIndex>>,
        plan: PartitionPlan,
        expected_eta: f64,
    ) -> Result<Self> {
        let mut routes = vec![Route::Cold; n_clusters];
        for (&global, &(shard, local)) in &map.hot {
            if global as usize >= n_clusters {
                return Err(Error::UnknownCluster(global));
            }
            routes[global as usize] = Route::Shard { shard, local };
        }
        Ok(Self {
            version,
            routes,
            shards: shards.into_iter().map(Some).collect(),
            map,
            plan,
            expected_eta,
        })
    }
}

/// Hybrid two-tier retrieval engine. Shareable across threads; all
/// methods take `&self`.
pub struct TierEngine {
    full: Arc<IvfIndex>,
    state: RwLock<Arc<EngineState>>,
    latency: LatencyModel,
    hit_model: HitRateModel,
    slo: SloConfig,
    mem: MemoryModel,
    llm: LlmModel,
    config: EngineConfig,
    stats: Mutex<StatsWindow>,
}

/// A batch routed against one placement snapshot.
pub struct RoutedBatch {
    state: Arc<EngineState>,
    requests: Vec<RetrievalRequest>,
    /// Per query: local probe ids per shard.
    shard_locals: Vec<Vec<Vec<u32>>>,
    /// Per query: the same probes as global ids (fallback + accounting).
    shard_globals: Vec<Vec<Vec<u32>>>,
    /// Per query: cold probes (global ids).
    cold_globals: Vec<Vec<u32>>,
}

impl RoutedBatch {
    pub fn map_version(&self) -> u64 {
        self.state.version
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Tier tasks, listing only tiers with non-empty work.
    pub fn tier_tasks(&self) -> Vec<TierTask> {
        let n_shards = self.state.shards.len();
        let mut tasks = Vec::new();
        for s in 0..n_shards {
            let work: Vec<(usize, Vec<u32>)> = self
                .shard_locals
                .iter()
                .enumerate()
                .filter(|(_, per_shard)| !per_shard[s].is_empty())
                .map(|(qi, per_shard)| (qi, per_shard[s].clone()))
                .collect();
            if !work.is_empty() {
                tasks.push(TierTask {
                    tier: Tier::Shard(s as u16),
                    work,
                });
            }
        }
        let cold_work: Vec<(usize, Vec<u32>)> = self
            .cold_globals
            .iter()
            .enumerate()
            .filter(|(_, probes)| !probes.is_empty())
            .map(|(qi, probes)| (qi, probes.clone()))
            .collect();
        if !cold_work.is_empty() {
            tasks.push(TierTask {
                tier: Tier::Cold,
                work: cold_work,
            });
        }
        tasks
    }
}

/// Per-query result of a hybrid batch.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub request_id: u64,
    pub topk: TopK,
    /// Fraction of probes served by live accelerator shards.
    pub hit_rate: f64,
    /// Modeled search completion for this query (ms from batch start).
    pub modeled_release_ms: f64,
    /// Wall-clock release relative to batch start.
    pub wall_release_ms: f64,
}

/// Outcome of one executed batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub results: Vec<QueryOutcome>,
    pub map_version: u64,
    pub eta_min: f64,
    /// Modeled batch completion `T_CQ(b) + (1 − η_min)·T_LUT(b)`.
    pub modeled_batch_ms: f64,
    pub wall_batch_ms: f64,
}

#[derive(Debug)]
enum WorkerEvent {
    Done {
        batch_idx: usize,
        tier: Tier,
        partial: TopK,
        at: Instant,
    },
    ShardFailed {
        shard: u16,
    },
}

impl TierEngine {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        full: Arc<IvfIndex>,
        plan: PartitionPlan,
        map: ShardMap,
        shards: Vec<Arc<ShardIndex>>,
        expected_eta: f64,
        latency: LatencyModel,
        hit_model: HitRateModel,
        slo: SloConfig,
        mem: MemoryModel,
        llm: LlmModel,
        config: EngineConfig,
    ) -> Result<Self> {
        let n_clusters = full.n_clusters();
        let state =
            EngineState::from_placement(0, n_clusters, map, shards, plan, expected_eta)?;
        let window = config.window;
        Ok(Self {
            full,
            state: RwLock::new(Arc::new(state)),
            latency,
            hit_model,
            slo,
            mem,
            llm,
            config,
            stats: Mutex::new(StatsWindow::new(window, n_clusters)),
        })
    }

    /// Convenience constructor: plans and splits internally.
    #[allow(clippy::too_many_arguments)]
    pub fn from_plan(
        full: Arc<IvfIndex>,
        profile: &crate::profiler::AccessProfile,
        plan: PartitionPlan,
        n_shards: u16,
        latency: LatencyModel,
        hit_model: HitRateModel,
        slo: SloConfig,
        mem: MemoryModel,
        llm: LlmModel,
        config: EngineConfig,
    ) -> Result<Self> {
        let curve = coverage_curve(profile)?;
        let expected_eta = curve.mean_hitrate_at(plan.rho);
        let (map, shards, _cold) = split_index(&full, profile, &plan, n_shards)?;
        Self::new(
            full,
            plan,
            map,
            shards.into_iter().map(Arc::new).collect(),
            expected_eta,
            latency,
            hit_model,
            slo,
            mem,
            llm,
            config,
        )
    }

    pub fn map_version(&self) -> u64 {
        self.state.read().version
    }

    pub fn plan(&self) -> PartitionPlan {
        self.state.read().plan.clone()
    }

    pub fn shard_map(&self) -> ShardMap {
        self.state.read().map.clone()
    }

    pub fn expected_eta(&self) -> f64 {
        self.state.read().expected_eta
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn slo(&self) -> &SloConfig {
        &self.slo
    }

    /// Central coarse quantization plus mapping-table remap for a batch.
    /// Probes of shards currently mid-swap land on the cold path.
    pub fn route_batch(&self, requests: Vec<RetrievalRequest>) -> Result<RoutedBatch> {
        let state = self.state.read().clone();
        let n_shards = state.shards.len();
        let mut shard_locals = Vec::with_capacity(requests.len());
        let mut shard_globals = Vec::with_capacity(requests.len());
        let mut cold_globals = Vec::with_capacity(requests.len());
        for req in &requests {
            if req.nprobe == 0 || req.k == 0 {
                return Err(Error::InvalidArgument(
                    "nprobe and k must be >= 1".into(),
                ));
            }
            let shortlist = self
                .full
                .coarse_quantize_one(req.request_id, &req.query, req.nprobe)?;
            let mut locals: Vec<Vec<u32>> = vec![Vec::new(); n_shards];
            let mut globals: Vec<Vec<u32>> = vec![Vec::new(); n_shards];
            let mut cold = Vec::new();
            for &c in &shortlist.cluster_ids {
                match state.routes[c as usize] {
                    Route::Shard { shard, local }
                        if state.shards[shard as usize].is_some() =>
                    {
                        locals[shard as usize].push(local);
                        globals[shard as usize].push(c);
                    }
                    _ => cold.push(c),
                }
            }
            debug_assert_eq!(
                cold.len() + globals.iter().map(Vec::len).sum::<usize>(),
                shortlist.cluster_ids.len(),
                "probe conservation"
            );
            shard_locals.push(locals);
            shard_globals.push(globals);
            cold_globals.push(cold);
        }
        Ok(RoutedBatch {
            state,
            requests,
            shard_locals,
            shard_globals,
            cold_globals,
        })
    }

    /// Executes a routed batch. Fails with `StaleMapVersion` when the
    /// placement changed since routing; [`TierEngine::run_batch`] retries
    /// by re-routing.
    pub fn execute_hybrid(&self, routed: &RoutedBatch) -> Result<BatchOutcome> {
        let current = self.map_version();
        if routed.state.version != current {
            return Err(Error::StaleMapVersion {
                routed: routed.state.version,
                current,
            });
        }
        let outcome = self.execute_routed(routed)?;
        self.record_batch(routed, &outcome);
        Ok(outcome)
    }

    /// Routes and executes, re-routing if a placement swap lands between
    /// the two steps.
    pub fn run_batch(&self, requests: Vec<RetrievalRequest>) -> Result<BatchOutcome> {
        let mut routed = self.route_batch(requests)?;
        loop {
            match self.execute_hybrid(&routed) {
                Err(Error::StaleMapVersion { .. }) => {
                    routed = self.route_batch(std::mem::take(&mut routed.requests))?;
                }
                other => return other,
            }
        }
    }

    fn execute_routed(&self, routed: &RoutedBatch) -> Result<BatchOutcome> {
        let state = &routed.state;
        let n = routed.requests.len();
        let n_shards = state.shards.len();
        let batch_start = Instant::now();

        // expected completions per query: one per tier with work
        let mut pending: Vec<usize> = vec![0; n];
        for (qi, locals) in routed.shard_locals.iter().enumerate() {
            pending[qi] += locals.iter().filter(|l| !l.is_empty()).count();
            if !routed.cold_globals[qi].is_empty() {
                pending[qi] += 1;
            }
        }

        let mut partials: Vec<Vec<TopK>> = vec![Vec::new(); n];
        let mut release: Vec<Option<Instant>> = vec![None; n];
        let mut failed_shards: Vec<bool> = vec![false; n_shards];

        std::thread::scope(|scope| -> Result<()> {
            let (tx, rx) = crossbeam_channel::unbounded::<WorkerEvent>();

            for s in 0..n_shards {
                let work: Vec<usize> = (0..n)
                    .filter(|&qi| !routed.shard_locals[qi][s].is_empty())
                    .collect();
                if work.is_empty() {
                    continue;
                }
                let tx = tx.clone();
                let shard = state.shards[s].as_ref().expect("routed to live shard");
                let fail = self.config.fail_shard == Some(s as u16);
                scope.spawn(move || {
                    if fail {
                        let _ = tx.send(WorkerEvent::ShardFailed { shard: s as u16 });
                        return;
                    }
                    for qi in work {
                        let req = &routed.requests[qi];
                        let partial = shard
                            .index
                            .scan_clusters(
                                req.request_id,
                                &req.query,
                                &routed.shard_locals[qi][s],
                                req.k,
                            )
                            .expect("local probe ids are valid");
                        let _ = tx.send(WorkerEvent::Done {
                            batch_idx: qi,
                            tier: Tier::Shard(s as u16),
                            partial,
                            at: Instant::now(),
                        });
                    }
                });
            }

            // cold worker: clusters grouped by query, scanned in shortlist
            // order; the per-query send is the completion callback
            {
                let work: Vec<usize> = (0..n)
                    .filter(|&qi| !routed.cold_globals[qi].is_empty())
                    .collect();
                if !work.is_empty() {
                    let tx = tx.clone();
                    let full = Arc::clone(&self.full);
                    scope.spawn(move || {
                        for qi in work {
                            let req = &routed.requests[qi];
                            let partial = full
                                .scan_clusters(
                                    req.request_id,
                                    &req.query,
                                    &routed.cold_globals[qi],
                                    req.k,
                                )
                                .expect("cold probe ids are valid");
                            let _ = tx.send(WorkerEvent::Done {
                                batch_idx: qi,
                                tier: Tier::Cold,
                                partial,
                                at: Instant::now(),
                            });
                        }
                    });
                }
            }
            drop(tx);

            // dispatcher: event-driven merge on the completion queue
            let mut seen = std::collections::HashSet::new();
            while let Ok(event) = rx.recv() {
                match event {
                    WorkerEvent::Done {
                        batch_idx,
                        tier,
                        partial,
                        at,
                    } => {
                        assert!(
                            seen.insert((batch_idx, tier)),
                            "tier {tier:?} completed twice for query {batch_idx}"
                        );
                        partials[batch_idx].push(partial);
                        pending[batch_idx] -= 1;
                        if pending[batch_idx] == 0 && release[batch_idx].is_none() {
                            release[batch_idx] = Some(at);
                        }
                    }
                    WorkerEvent::ShardFailed { shard } => {
                        failed_shards[shard as usize] = true;
                        // fall back: the failed tier's clusters re-run on
                        // the cold path
                        for qi in 0..n {
                            let globals = &routed.shard_globals[qi][shard as usize];
                            if globals.is_empty() {
                                continue;
                            }
                            let req = &routed.requests[qi];
                            let partial = self
                                .full
                                .scan_clusters(req.request_id, &req.query, globals, req.k)
                                .expect("fallback probe ids are valid");
                            partials[qi].push(partial);
                            pending[qi] -= 1;
                            if pending[qi] == 0 && release[qi].is_none() {
                                release[qi] = Some(Instant::now());
                            }
                        }
                    }
                }
            }
            Ok(())
        })?;

        let batch_end = Instant::now();
        let bf = n as f64;
        let t_cq = self.latency.t_cq.eval(bf);
        let t_lut = self.latency.t_lut.eval(bf);

        let mut results = Vec::with_capacity(n);
        let mut eta_min = 1.0f64;
        for qi in 0..n {
            let req = &routed.requests[qi];
            let topk = merge_rerank(&partials[qi], req.k)?;
            // hit rate counts probes served by live, non-failed shards
            let hot: usize = (0..n_shards)
                .filter(|&s| !failed_shards[s])
                .map(|s| routed.shard_globals[qi][s].len())
                .sum();
            let hit_rate = hot as f64 / req.nprobe as f64;
            eta_min = eta_min.min(hit_rate);
            let modeled_release_ms = t_cq + (1.0 - hit_rate) * t_lut;
            results.push(QueryOutcome {
                request_id: req.request_id,
                topk,
                hit_rate,
                modeled_release_ms,
                wall_release_ms: 0.0,
            });
        }
        if n == 0 {
            eta_min = 0.0;
        }
        let modeled_batch_ms = t_cq + (1.0 - eta_min) * t_lut;
        for (qi, r) in results.iter_mut().enumerate() {
            if self.config.dispatcher_on {
                let at = release[qi].unwrap_or(batch_end);
                r.wall_release_ms = at.duration_since(batch_start).as_secs_f64() * 1e3;
            } else {
                // barrier release: everything waits for the batch
                r.wall_release_ms = batch_end.duration_since(batch_start).as_secs_f64() * 1e3;
                r.modeled_release_ms = modeled_batch_ms;
            }
        }

        Ok(BatchOutcome {
            results,
            map_version: state.version,
            eta_min,
            modeled_batch_ms,
            wall_batch_ms: batch_end.duration_since(batch_start).as_secs_f64() * 1e3,
        })
    }

    fn record_batch(&self, routed: &RoutedBatch, outcome: &BatchOutcome) {
        let mut stats = self.stats.lock();
        // per-cluster accesses: the routed probe union is exactly the
        // shortlist, so this matches offline profiling semantics
        for qi in 0..routed.requests.len() {
            for globals in &routed.shard_globals[qi] {
                for &c in globals {
                    stats.record_access(c);
                }
            }
            for &c in &routed.cold_globals[qi] {
                stats.record_access(c);
            }
        }
        for r in &outcome.results {
            stats.record_request(
                r.hit_rate,
                r.modeled_release_ms <= self.slo.slo_search_ms,
            );
        }
        stats.maybe_roll();
    }

    /// Last completed window, if any.
    pub fn window_stats(&self) -> Option<RuntimeStats> {
        self.stats.lock().last_completed()
    }

    /// Drift test per the runtime-update trigger: attainment below
    /// threshold AND observed mean hit rate diverging from the planner's
    /// expectation. Both conditions are required.
    pub fn check_drift(&self) -> bool {
        let Some(w) = self.window_stats() else {
            return false;
        };
        let expected = self.expected_eta();
        w.slo_attainment < self.config.attainment_threshold
            && (w.mean_hitrate - expected).abs() > self.config.hitrate_band
    }

    /// Marks a shard as mid-swap: its clusters route to the cold path
    /// until [`TierEngine::finish_shard_swap`] installs a replacement.
    pub fn begin_shard_swap(&self, shard: u16) -> Result<()> {
        let mut guard = self.state.write();
        let old = guard.as_ref();
        if shard as usize >= old.shards.len() {
            return Err(Error::InvalidArgument(format!("no shard {shard}")));
        }
        let mut routes = old.routes.clone();
        for r in routes.iter_mut() {
            if matches!(r, Route::Shard { shard: s, .. } if *s == shard) {
                *r = Route::Cold;
            }
        }
        let mut shards = old.shards.clone();
        shards[shard as usize] = None;
        *guard = Arc::new(EngineState {
            version: old.version + 1,
            routes,
            shards,
            map: old.map.clone(),
            plan: old.plan.clone(),
            expected_eta: old.expected_eta,
        });
        Ok(())
    }

    /// Installs a (re)built shard and routes its clusters back to it.
    pub fn finish_shard_swap(&self, new_shard: ShardIndex) -> Result<()> {
        let mut guard = self.state.write();
        let old = guard.as_ref();
        let sid = new_shard.shard_id as usize;
        if sid >= old.shards.len() {
            return Err(Error::InvalidArgument(format!(
                "no shard {}",
                new_shard.shard_id
            )));
        }
        let mut routes = old.routes.clone();
        for (local, &global) in new_shard.global_ids.iter().enumerate() {
            routes[global as usize] = Route::Shard {
                shard: new_shard.shard_id,
                local: local as u32,
            };
        }
        let mut shards = old.shards.clone();
        shards[sid] = Some(Arc::new(new_shard));
        *guard = Arc::new(EngineState {
            version: old.version + 1,
            routes,
            shards,
            map: old.map.clone(),
            plan: old.plan.clone(),
            expected_eta: old.expected_eta,
        });
        Ok(())
    }

    /// Re-profiles from the last completed window, re-plans, re-splits,
    /// and swaps shards one at a time. Requests keep flowing during the
    /// swap; a failed re-plan leaves the old placement in service.
    pub fn adaptive_update(&self) -> Result<Option<PartitionPlan>> {
        let Some(window) = self.window_stats() else {
            return Ok(None);
        };
        let profile = profile_from_counts(&self.full, window.cluster_counts.clone());
        if profile.total_accesses == 0 {
            return Ok(None);
        }
        let planned = (|| -> Result<_> {
            let plan = partition(
                &self.slo,
                &self.mem,
                &self.llm,
                &self.latency,
                &profile,
                self.hit_model.sigma2_max,
            )?;
            let curve = coverage_curve(&profile)?;
            let expected_eta = curve.mean_hitrate_at(plan.rho);
            let n_shards = self.state.read().shards.len() as u16;
            let (map, shards, _cold) = split_index(&self.full, &profile, &plan, n_shards)?;
            Ok((plan, map, shards, expected_eta))
        })();
        let (plan, map, shards, expected_eta) = match planned {
            Ok(v) => v,
            Err(e) => {
                log::warn!("adaptive update failed, keeping current placement: {e}");
                return Ok(None);
            }
        };

        // per-shard swap: clusters of the outgoing shard serve from the
        // cold path while the replacement loads
        for shard in shards {
            self.begin_shard_swap(shard.shard_id)?;
            self.finish_shard_swap(shard)?;
        }
        // publish the new plan/map metadata
        {
            let mut guard = self.state.write();
            let old = guard.as_ref();
            *guard = Arc::new(EngineState {
                version: old.version + 1,
                routes: old.routes.clone(),
                shards: old.shards.clone(),
                map,
                plan: plan.clone(),
                expected_eta,
            });
        }
        self.stats.lock().reset_window();
        Ok(Some(plan))
    }
}

/// Merges per-tier partial results into the global top-k under the
/// (distance, id) total order. Routing is a partition of the probe set,
/// so a vector id can appear in at most one partial; duplicates are
/// rejected.
pub fn merge_rerank(partials: &[TopK], k: usize) -> Result<TopK> {
    let Some(first) = partials.first() else {
        return Err(Error::InvalidArgument("no partials to merge".into()));
    };
    let query_id = first.query_id;
    let mut hits: Vec<(u64, f32)> = Vec::new();
    for p in partials {
        if p.query_id != query_id {
            return Err(Error::InvalidArgument(format!(
                "mixed query ids {} and {}",
                query_id, p.query_id
            )));
        }
        hits.extend_from_slice(&p.hits);
    }
    hits.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    for w in hits.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateId(w[0].0));
        }
    }
    hits.truncate(k);
    Ok(TopK { query_id, hits })
}

/// Line-protocol request (`{"id":…, "query":[…], "nprobe":…, "k":…}`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireRequest {
    pub id: u64,
    pub query: Vec<f32>,
    pub nprobe: usize,
    pub k: usize,
}

/// Line-protocol response (`{"id":…, "hits":[[vid,dist],…], "t_search_ms":…}`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireResponse {
    pub id: u64,
    pub hits: Vec<(u64, f32)>,
    pub t_search_ms: f64,
}

impl From<WireRequest> for RetrievalRequest {
    fn from(w: WireRequest) -> Self {
        RetrievalRequest {
            request_id: w.id,
            query: w.query,
            nprobe: w.nprobe,
            k: w.k,
        }
    }
}
