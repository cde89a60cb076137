//! Workload profiling: cluster-access skew, coverage→hit-rate statistics,
//! hit-rate variance at the half-coverage point, and batch-latency curves.
//!
//! All statistics count shortlist membership — a cluster is "accessed"
//! when it appears in a query's coarse-quantization shortlist — so the
//! coverage curve and per-query hit rates agree by construction.

mod pwl;

pub use pwl::{fit_piecewise_linear, PiecewiseLinear};

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::vecstore::IvfIndex;

/// Per-cluster access counts over a calibration query set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessProfile {
    pub n_clusters: usize,
    /// Access count per cluster id.
    pub counts: Vec<u64>,
    pub total_accesses: u64,
    /// Cluster ids sorted by descending count, ties by ascending id.
    pub ranking: Vec<u32>,
    /// Storage bytes per cluster id (ids + payload + centroid row).
    pub cluster_bytes: Vec<u64>,
}

/// One point of the coverage→hit-rate curve: caching the top
/// `ceil(rho * n_clusters)` ranked clusters yields mean hit rate
/// `mean_hitrate` and occupies `hot_bytes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub rho: f64,
    pub mean_hitrate: f64,
    pub hot_bytes: u64,
}

/// Discrete coverage curve, one point per whole cluster count
/// (`n_clusters + 1` points, from empty to full coverage).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    pub points: Vec<CoveragePoint>,
}

impl CoverageCurve {
    pub fn n_clusters(&self) -> usize {
        self.points.len() - 1
    }

    /// Index of the grid point covering `ceil(rho * n_clusters)` clusters.
    pub fn grid_index(&self, rho: f64) -> usize {
        let n = self.n_clusters();
        ((rho.clamp(0.0, 1.0) * n as f64).ceil() as usize).min(n)
    }

    pub fn mean_hitrate_at(&self, rho: f64) -> f64 {
        self.points[self.grid_index(rho)].mean_hitrate
    }

    pub fn hot_bytes_at(&self, rho: f64) -> u64 {
        self.points[self.grid_index(rho)].hot_bytes
    }
}

/// Per-query hit-rate variance measured at the coverage whose mean hit
/// rate is closest to 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaMax {
    pub sigma2_max: f64,
    pub coverage_at_half: f64,
}

/// One latency measurement: median wall-clock milliseconds of the coarse
/// quantization and scan stages at a given batch size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySample {
    pub batch: usize,
    pub t_cq_ms: f64,
    pub t_lut_ms: f64,
}

/// Tallies cluster accesses across all calibration shortlists.
pub fn profile_access(
    index: &IvfIndex,
    queries: &[Vec<f32>],
    nprobe: usize,
) -> Result<AccessProfile> {
    if queries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let shortlists = index.coarse_quantize(queries, nprobe, ExecMode::default())?;
    let mut counts = vec![0u64; index.n_clusters()];
    for s in &shortlists {
        for &c in &s.cluster_ids {
            counts[c as usize] += 1;
        }
    }
    Ok(profile_from_counts(index, counts))
}

/// Builds a profile from externally collected counters (e.g. the runtime
/// engine's access window).
pub fn profile_from_counts(index: &IvfIndex, counts: Vec<u64>) -> AccessProfile {
    assert_eq!(counts.len(), index.n_clusters());
    let total_accesses = counts.iter().sum();
    let mut ranking: Vec<u32> = (0..index.n_clusters() as u32).collect();
    ranking.sort_by(|&a, &b| {
        counts[b as usize]
            .cmp(&counts[a as usize])
            .then(a.cmp(&b))
    });
    let cluster_bytes = (0..index.n_clusters() as u32)
        .map(|c| index.cluster_bytes(c))
        .collect();
    AccessProfile {
        n_clusters: index.n_clusters(),
        counts,
        total_accesses,
        ranking,
        cluster_bytes,
    }
}

impl AccessProfile {
    /// The top `ceil(rho * n_clusters)` ranked cluster ids.
    pub fn hot_prefix(&self, rho: f64) -> Vec<u32> {
        let take = ((rho.clamp(0.0, 1.0) * self.n_clusters as f64).ceil() as usize)
            .min(self.n_clusters);
        self.ranking[..take].to_vec()
    }
}

/// Cumulative access fraction and byte footprint along the ranking.
pub fn coverage_curve(profile: &AccessProfile) -> Result<CoverageCurve> {
    if profile.total_accesses == 0 {
        return Err(Error::Degenerate("profile has no accesses".into()));
    }
    let n = profile.n_clusters;
    let mut points = Vec::with_capacity(n + 1);
    points.push(CoveragePoint {
        rho: 0.0,
        mean_hitrate: 0.0,
        hot_bytes: 0,
    });
    let mut acc_count = 0u64;
    let mut acc_bytes = 0u64;
    for (i, &c) in profile.ranking.iter().enumerate() {
        acc_count += profile.counts[c as usize];
        acc_bytes += profile.cluster_bytes[c as usize];
        points.push(CoveragePoint {
            rho: (i + 1) as f64 / n as f64,
            mean_hitrate: acc_count as f64 / profile.total_accesses as f64,
            hot_bytes: acc_bytes,
        });
    }
    Ok(CoverageCurve { points })
}

/// Per-query hit rates against a hot cluster set:
/// `|shortlist ∩ hot| / nprobe`.
pub fn measure_hitrates(
    index: &IvfIndex,
    queries: &[Vec<f32>],
    nprobe: usize,
    hot_set: &BTreeSet<u32>,
) -> Result<Vec<f64>> {
    let shortlists = index.coarse_quantize(queries, nprobe, ExecMode::default())?;
    Ok(shortlists
        .iter()
        .map(|s| {
            let hits = s.cluster_ids.iter().filter(|c| hot_set.contains(c)).count();
            hits as f64 / nprobe as f64
        })
        .collect())
}

/// Measures σ²_max: the sample variance of per-query hit rates at the
/// coverage point whose mean hit rate is closest to 0.5.
pub fn profile_sigma_max(
    index: &IvfIndex,
    queries: &[Vec<f32>],
    nprobe: usize,
    profile: &AccessProfile,
) -> Result<SigmaMax> {
    if queries.len() < 2 {
        return Err(Error::Degenerate(
            "sigma_max needs at least 2 queries".into(),
        ));
    }
    let curve = coverage_curve(profile)?;
    let (best_idx, _) = curve
        .points
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (a.mean_hitrate - 0.5)
                .abs()
                .total_cmp(&(b.mean_hitrate - 0.5).abs())
        })
        .expect("curve non-empty");
    let rho = curve.points[best_idx].rho;
    let hot: BTreeSet<u32> = profile.hot_prefix(rho).into_iter().collect();
    let rates = measure_hitrates(index, queries, nprobe, &hot)?;
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    Ok(SigmaMax {
        sigma2_max: var.clamp(0.0, 0.25),
        coverage_at_half: rho,
    })
}

/// Wall-clock profile of the coarse-quantization and scan stages across
/// batch sizes: median over `repetitions` runs after one warm-up.
pub fn profile_latency(
    index: &IvfIndex,
    queries: &[Vec<f32>],
    batch_sizes: &[usize],
    nprobe: usize,
    repetitions: usize,
) -> Result<Vec<LatencySample>> {
    if queries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if batch_sizes.iter().any(|&b| b == 0) {
        return Err(Error::InvalidArgument("batch sizes must be >= 1".into()));
    }
    let reps = repetitions.max(1);
    let mut samples = Vec::with_capacity(batch_sizes.len());
    for &b in batch_sizes {
        // cycle the pool to fill the batch
        let batch: Vec<Vec<f32>> = (0..b).map(|i| queries[i % queries.len()].clone()).collect();
        let mut cq_ms = Vec::with_capacity(reps);
        let mut lut_ms = Vec::with_capacity(reps);
        for rep in 0..=reps {
            let t0 = Instant::now();
            let shortlists = index.coarse_quantize(&batch, nprobe, ExecMode::default())?;
            let t1 = Instant::now();
            let _results = crate::exec::map_batch(ExecMode::default(), &shortlists, |s| {
                index
                    .scan_clusters(s.query_id, &batch[s.query_id as usize], &s.cluster_ids, 10)
                    .expect("shortlist ids valid")
            });
            let t2 = Instant::now();
            if rep > 0 {
                cq_ms.push(t1.duration_since(t0).as_secs_f64() * 1e3);
                lut_ms.push(t2.duration_since(t1).as_secs_f64() * 1e3);
            }
        }
        samples.push(LatencySample {
            batch: b,
            t_cq_ms: median(&mut cq_ms),
            t_lut_ms: median(&mut lut_ms),
        });
    }
    Ok(samples)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Renders latency samples as CSV (`b,t_cq_ms,t_lut_ms`).
pub fn latency_samples_csv(samples: &[LatencySample]) -> String {
    let mut out = String::from("b,t_cq_ms,t_lut_ms\n");
    for s in samples {
        out.push_str(&format!("{},{:.6},{:.6}\n", s.batch, s.t_cq_ms, s.t_lut_ms));
    }
    out
}

#[cfg(test)]
mod tests;
