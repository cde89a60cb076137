//! Lloyd's k-means with k-means++ seeding.
//!
//! Seeding always uses squared-L2 D² sampling; assignment and convergence
//! follow the index metric. Empty clusters are repaired by reseeding from
//! the farthest member of the largest cluster.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exec::{map_indices, ExecMode};
use crate::vecstore::{metric_distance, Metric, Scalar8Params, VectorDataset};

const MAX_ITERS: usize = 25;
const MOVEMENT_TOL: f32 = 1e-4;

#[inline]
fn row(data: &[f32], dim: usize, i: usize) -> &[f32] {
    &data[i * dim..(i + 1) * dim]
}

fn l2_sq(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// k-means++ seeding: first centroid uniform, the rest D²-weighted.
fn seed_centroids(data: &[f32], dim: usize, n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(row(data, dim, first));

    let mut best_d2: Vec<f64> = (0..n)
        .map(|i| l2_sq(row(data, dim, i), &centroids[0..dim]) as f64)
        .collect();

    for c in 1..k {
        let total: f64 = best_d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in best_d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // all points coincide with an existing centroid
            rng.random_range(0..n)
        };
        let start = c * dim;
        centroids.extend_from_slice(row(data, dim, pick));
        for i in 0..n {
            let d = l2_sq(row(data, dim, i), &centroids[start..start + dim]) as f64;
            if d < best_d2[i] {
                best_d2[i] = d;
            }
        }
    }
    centroids
}

/// Assigns every row to its nearest centroid under `metric`, ties broken
/// by the smaller cluster id.
pub(crate) fn assign_all(
    data: &[f32],
    dim: usize,
    centroids: &[f32],
    k: usize,
    metric: Metric,
) -> Vec<u32> {
    assign_all_with(data, dim, centroids, k, metric, ExecMode::default())
}

pub(crate) fn assign_all_with(
    data: &[f32],
    dim: usize,
    centroids: &[f32],
    k: usize,
    metric: Metric,
    mode: ExecMode,
) -> Vec<u32> {
    let n = data.len() / dim;
    map_indices(mode, n, |i| {
        let point = row(data, dim, i);
        let mut best = 0u32;
        let mut best_dist = metric_distance(metric, point, &centroids[0..dim]);
        for c in 1..k {
            let d = metric_distance(metric, point, &centroids[c * dim..(c + 1) * dim]);
            if d < best_dist {
                best_dist = d;
                best = c as u32;
            }
        }
        best
    })
}

/// Runs Lloyd iterations and returns the final centroids.
pub(crate) fn train(
    data: &[f32],
    dim: usize,
    n: usize,
    k: usize,
    metric: Metric,
    seed: u64,
) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(data, dim, n, k, &mut rng);

    for _ in 0..MAX_ITERS {
        let assignments = assign_all(data, dim, &centroids, k, metric);

        // Sequential accumulation keeps the result independent of thread count.
        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            let c = c as usize;
            counts[c] += 1;
            let point = row(data, dim, i);
            for d in 0..dim {
                sums[c * dim + d] += point[d] as f64;
            }
        }

        let mut new_centroids = centroids.clone();
        for c in 0..k {
            if counts[c] > 0 {
                for d in 0..dim {
                    new_centroids[c * dim + d] = (sums[c * dim + d] / counts[c] as f64) as f32;
                }
            }
        }

        // Repair empty clusters from the farthest member of the largest one.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
            for (i, &c) in assignments.iter().enumerate() {
                members[c as usize].push(i);
            }
            for empty in empties {
                let donor = (0..k)
                    .max_by(|&a, &b| members[a].len().cmp(&members[b].len()).then(b.cmp(&a)))
                    .expect("k >= 1");
                if members[donor].len() <= 1 {
                    continue;
                }
                let donor_centroid: Vec<f32> =
                    new_centroids[donor * dim..(donor + 1) * dim].to_vec();
                let (pos, &far) = members[donor]
                    .iter()
                    .enumerate()
                    .max_by(|(_, &a), (_, &b)| {
                        let da = l2_sq(row(data, dim, a), &donor_centroid);
                        let db = l2_sq(row(data, dim, b), &donor_centroid);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("donor has members");
                new_centroids[empty * dim..(empty + 1) * dim]
                    .copy_from_slice(row(data, dim, far));
                members[donor].swap_remove(pos);
                members[empty].push(far);
            }
        }

        let mut max_move = 0.0f32;
        for c in 0..k {
            let old = &centroids[c * dim..(c + 1) * dim];
            let new = &new_centroids[c * dim..(c + 1) * dim];
            let moved = l2_sq(old, new).sqrt();
            let norm = old.iter().map(|v| v * v).sum::<f32>().sqrt().max(1.0);
            max_move = max_move.max(moved / norm);
        }
        centroids = new_centroids;
        if max_move < MOVEMENT_TOL {
            break;
        }
    }
    centroids
}

/// Per-dimension min/max affine mapping onto u8 codes.
pub(crate) fn scalar8_params(dataset: &VectorDataset) -> Scalar8Params {
    let dim = dataset.dim();
    let mut min = vec![f32::INFINITY; dim];
    let mut max = vec![f32::NEG_INFINITY; dim];
    for r in dataset.rows() {
        for d in 0..dim {
            min[d] = min[d].min(r[d]);
            max[d] = max[d].max(r[d]);
        }
    }
    let scale: Vec<f32> = (0..dim).map(|d| (max[d] - min[d]) / 255.0).collect();
    Scalar8Params { offset: min, scale }
}

pub(crate) fn encode_scalar8(dataset: &VectorDataset, params: &Scalar8Params) -> Vec<u8> {
    let dim = dataset.dim();
    let mut codes = Vec::with_capacity(dataset.len() * dim);
    for r in dataset.rows() {
        for d in 0..dim {
            let code = if params.scale[d] > 0.0 {
                ((r[d] - params.offset[d]) / params.scale[d]).round()
            } else {
                0.0
            };
            codes.push(code.clamp(0.0, 255.0) as u8);
        }
    }
    codes
}
