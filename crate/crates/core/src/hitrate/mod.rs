//! Hit-rate modeling: Beta distribution from matched moments, the
//! expected batch-minimum hit rate (a first-order statistic), and the
//! numeric inversion from a minimum-hit-rate target back to a cache
//! coverage point.
//!
//! The per-query hit-rate distribution is modeled as Beta(α, β) on
//! [0, 1]; its variance is approximated from the mean as
//! `σ² ≈ 4·σ²_max·η̄(1−η̄)`, anchored by the profiled variance at mean
//! hit rate 0.5. For a batch of size B, the expected minimum hit rate is
//!
//! ```text
//! η_min(B) = ∫0..1 B · x · f(x) · (1 − F(x))^(B−1) dx
//! ```
//!
//! evaluated by adaptive Gauss–Legendre quadrature, with an independent
//! Monte-Carlo oracle for verification.

mod quad;
mod sampler;
pub(crate) mod special;

pub use quad::integrate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indices, ExecMode};
use crate::profiler::CoverageCurve;

/// Quadrature tolerance for the order-statistics integral.
const QUAD_TOL: f64 = 1e-7;

/// Means closer than this to 0 or 1 are treated as point masses.
const MEAN_CLAMP: f64 = 1e-4;

/// Shape parameters of a Beta distribution on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha <= 0.0 || beta <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "beta shapes must be finite and positive (got {alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        special::reg_inc_beta(self.alpha, self.beta, x)
    }

    /// 1 − F(x), computed through the symmetric tail for accuracy.
    pub fn survival(&self, x: f64) -> f64 {
        special::reg_inc_beta(self.beta, self.alpha, 1.0 - x)
    }
}

/// Expected minimum hit rate over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinHitEstimate {
    pub batch_size: u32,
    pub eta_min: f64,
}

/// Variance approximation `4·σ²_max·η̄(1−η̄)`.
pub fn variance_at(mean: f64, sigma2_max: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mean) {
        return Err(Error::InvalidArgument(format!(
            "mean hit rate {mean} outside [0, 1]"
        )));
    }
    if !(0.0..=0.25).contains(&sigma2_max) {
        return Err(Error::InvalidArgument(format!(
            "sigma2_max {sigma2_max} outside [0, 0.25]"
        )));
    }
    Ok(4.0 * sigma2_max * mean * (1.0 - mean))
}

/// Method-of-moments Beta fit: `ν = m(1−m)/v − 1`, `α = mν`, `β = (1−m)ν`.
pub fn beta_from_moments(mean: f64, variance: f64) -> Result<BetaParams> {
    if !(0.0 < mean && mean < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "mean {mean} outside (0, 1)"
        )));
    }
    let bound = mean * (1.0 - mean);
    if variance <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "variance {variance} must be positive"
        )));
    }
    if variance >= bound {
        return Err(Error::InfeasibleVariance { variance, bound });
    }
    let nu = bound / variance - 1.0;
    BetaParams::new(mean * nu, (1.0 - mean) * nu)
}

/// Expected minimum hit rate of a batch of `b` i.i.d. Beta draws,
/// by quadrature of the first-order-statistic integral
/// `∫ B·x·f(x)·(1−F(x))^(B−1) dx`, evaluated in its integrated-by-parts
/// survival form `∫ (1−F(x))^B dx`. The two are algebraically identical;
/// the survival integrand is bounded on [0, 1], which keeps the
/// subdivision convergent when a small Beta shape puts an integrable
/// density spike at an endpoint.
pub fn expected_min_hitrate(params: BetaParams, b: u32) -> Result<MinHitEstimate> {
    if b == 0 {
        return Err(Error::InvalidArgument("batch size must be >= 1".into()));
    }
    let bf = b as f64;
    let integrand = move |x: f64| {
        if x <= 0.0 {
            return 1.0;
        }
        if x >= 1.0 {
            return 0.0;
        }
        params.survival(x).powf(bf)
    };
    let eta_min = integrate(integrand, 0.0, 1.0, QUAD_TOL)?;
    Ok(MinHitEstimate {
        batch_size: b,
        eta_min: eta_min.clamp(0.0, 1.0),
    })
}

/// Monte-Carlo estimate of the expected batch-minimum hit rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: u64,
}

/// Independent oracle for [`expected_min_hitrate`]: the mean of
/// `min(X_1..X_b)` over `n_samples` batches of i.i.d. Beta draws.
/// Deterministic for a fixed seed regardless of thread count.
pub fn mc_min_hitrate_oracle(
    params: BetaParams,
    b: u32,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    mc_min_hitrate_oracle_with(params, b, n_samples, seed, ExecMode::default())
}

pub fn mc_min_hitrate_oracle_with(
    params: BetaParams,
    b: u32,
    n_samples: u64,
    seed: u64,
    mode: ExecMode,
) -> Result<McEstimate> {
    let mut out = mc_min_hitrate_profile(params, &[b], n_samples, seed, mode)?;
    Ok(out.pop().expect("one batch size"))
}

/// Min-of-prefix sweep: estimates the batch-minimum mean for several
/// batch sizes from one shared draw stream. Each entry is an unbiased
/// `n_samples` estimate; entries share draws, which is fine for marginal
/// comparisons against the quadrature route.
pub fn mc_min_hitrate_profile(
    params: BetaParams,
    batch_sizes: &[u32],
    n_samples: u64,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<McEstimate>> {
    use rand_chacha::rand_core::SeedableRng;

    if batch_sizes.is_empty() || batch_sizes.contains(&0) || n_samples == 0 {
        return Err(Error::InvalidArgument(
            "batch sizes and sample count must be >= 1".into(),
        ));
    }
    BetaParams::new(params.alpha, params.beta)?;
    let beta = sampler::BetaSampler::new(params.alpha, params.beta);
    let mut sorted: Vec<u32> = batch_sizes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let b_max = *sorted.last().expect("non-empty");
    let n_targets = sorted.len();

    const CHUNK: u64 = 16384;
    let n_chunks = n_samples.div_ceil(CHUNK);
    // fixed chunking with per-chunk seeds keeps the stream independent of
    // the thread count
    let partials = map_indices(mode, n_chunks as usize, |ci| {
        let lo = ci as u64 * CHUNK;
        let hi = (lo + CHUNK).min(n_samples);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            seed ^ (ci as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let mut sums = vec![0.0f64; n_targets];
        let mut sum_sqs = vec![0.0f64; n_targets];
        for _ in lo..hi {
            let mut min = f64::INFINITY;
            let mut drawn = 0u32;
            for (t, &b) in sorted.iter().enumerate() {
                while drawn < b {
                    let x = beta.sample(&mut rng);
                    if x < min {
                        min = x;
                    }
                    drawn += 1;
                }
                sums[t] += min;
                sum_sqs[t] += min * min;
            }
            debug_assert_eq!(drawn, b_max);
        }
        (sums, sum_sqs)
    });
    let mut sums = vec![0.0f64; n_targets];
    let mut sum_sqs = vec![0.0f64; n_targets];
    for (ps, pq) in partials {
        for t in 0..n_targets {
            sums[t] += ps[t];
            sum_sqs[t] += pq[t];
        }
    }
    let n = n_samples as f64;
    // report in the caller's order
    Ok(batch_sizes
        .iter()
        .map(|b| {
            let t = sorted.binary_search(b).expect("present");
            let mean = sums[t] / n;
            let var = ((sum_sqs[t] - sums[t] * sums[t] / n) / (n - 1.0)).max(0.0);
            McEstimate {
                estimate: mean,
                stderr: (var / n).sqrt(),
                n_samples,
            }
        })
        .collect())
}

/// Calibrated hit-rate model: σ²_max plus the moment-matching and
/// order-statistics machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitRateModel {
    pub sigma2_max: f64,
}

impl HitRateModel {
    pub fn new(sigma2_max: f64) -> Result<Self> {
        if !(0.0..=0.25).contains(&sigma2_max) {
            return Err(Error::InvalidArgument(format!(
                "sigma2_max {sigma2_max} outside [0, 0.25]"
            )));
        }
        Ok(Self { sigma2_max })
    }

    /// Beta parameters at a given mean hit rate, or `None` when the mean
    /// is close enough to an endpoint (or the variance collapses) that
    /// the distribution degenerates to a point mass.
    pub fn beta_at(&self, mean: f64) -> Result<Option<BetaParams>> {
        if !(MEAN_CLAMP..=1.0 - MEAN_CLAMP).contains(&mean) {
            return Ok(None);
        }
        let mut var = variance_at(mean, self.sigma2_max)?;
        if var <= 0.0 {
            return Ok(None);
        }
        let bound = mean * (1.0 - mean);
        if var >= bound {
            log::warn!(
                "profiled variance {var} infeasible for mean {mean}; clamping to {}",
                0.999 * bound
            );
            var = 0.999 * bound;
        }
        Ok(Some(beta_from_moments(mean, var)?))
    }

    /// Expected batch-minimum hit rate at a given mean hit rate.
    pub fn expected_min(&self, mean: f64, b: u32) -> Result<f64> {
        match self.beta_at(mean)? {
            None => Ok(mean.clamp(0.0, 1.0)),
            Some(params) => Ok(expected_min_hitrate(params, b)?.eta_min),
        }
    }

    /// Per-query hit-rate sampler at a given mean, for simulation. The
    /// degenerate cases collapse to a point mass at the mean.
    pub fn sampler_at(&self, mean: f64) -> Result<HitRateSampler> {
        Ok(HitRateSampler {
            inner: match self.beta_at(mean)? {
                None => SamplerInner::PointMass(mean.clamp(0.0, 1.0)),
                Some(p) => SamplerInner::Beta(sampler::BetaSampler::new(p.alpha, p.beta)),
            },
        })
    }
}

/// Draws per-query hit rates from the calibrated model.
#[derive(Debug, Clone, Copy)]
pub struct HitRateSampler {
    inner: SamplerInner,
}

#[derive(Debug, Clone, Copy)]
enum SamplerInner {
    PointMass(f64),
    Beta(sampler::BetaSampler),
}

impl HitRateSampler {
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            SamplerInner::PointMass(v) => *v,
            SamplerInner::Beta(s) => s.sample(rng),
        }
    }
}

/// Result of inverting a minimum-hit-rate target to a coverage point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageTarget {
    pub rho: f64,
    /// Set when only full coverage satisfies (or nothing does).
    pub saturated: bool,
}

/// Smallest coverage on the curve's grid whose expected batch-minimum
/// hit rate reaches `eta_min_target`.
pub fn hitrate_to_coverage(
    curve: &CoverageCurve,
    sigma2_max: f64,
    b: u32,
    eta_min_target: f64,
) -> Result<CoverageTarget> {
    if curve.points.is_empty() {
        return Err(Error::Degenerate("empty coverage curve".into()));
    }
    if eta_min_target <= 0.0 {
        return Ok(CoverageTarget {
            rho: 0.0,
            saturated: false,
        });
    }
    let model = HitRateModel::new(sigma2_max)?;
    let meets = |idx: usize| -> Result<bool> {
        Ok(model.expected_min(curve.points[idx].mean_hitrate, b)? >= eta_min_target)
    };
    // leftmost satisfying grid point; η_min is nondecreasing in the mean,
    // and the mean is nondecreasing along the grid
    let n = curve.points.len();
    if !meets(n - 1)? {
        return Ok(CoverageTarget {
            rho: 1.0,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (0usize, n - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let rho = curve.points[lo].rho;
    Ok(CoverageTarget {
        rho,
        saturated: rho >= 1.0,
    })
}
