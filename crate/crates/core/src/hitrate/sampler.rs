//! Beta variate sampler tuned for the Monte-Carlo oracle's inner loop.
//!
//! Uses the two-gamma representation with Marsaglia–Tsang generation
//! (squeeze test skips the logarithm on the vast majority of draws) and
//! closed forms when a shape equals one. Correctness is pinned by moment
//! and CDF checks below and by the quadrature-vs-oracle agreement suite.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Gamma {
    /// Exp(1): shape exactly one.
    Exponential,
    /// Marsaglia–Tsang for shape >= 1.
    MarsagliaTsang { d: f64, c: f64 },
    /// Shape < 1 via the boost `gamma(a) = gamma(a+1) * U^(1/a)`.
    Boosted { d: f64, c: f64, inv_alpha: f64 },
}

impl Gamma {
    fn new(alpha: f64) -> Self {
        debug_assert!(alpha > 0.0);
        if alpha == 1.0 {
            Gamma::Exponential
        } else if alpha >= 1.0 {
            let d = alpha - 1.0 / 3.0;
            Gamma::MarsagliaTsang {
                d,
                c: 1.0 / (9.0 * d).sqrt(),
            }
        } else {
            let boosted = alpha + 1.0;
            let d = boosted - 1.0 / 3.0;
            Gamma::Boosted {
                d,
                c: 1.0 / (9.0 * d).sqrt(),
                inv_alpha: 1.0 / alpha,
            }
        }
    }

    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Gamma::Exponential => {
                let u: f64 = rng.random();
                // random() is in [0, 1); flip so the log argument is (0, 1]
                -(1.0 - u).ln()
            }
            Gamma::MarsagliaTsang { d, c } => mt_core(d, c, rng),
            Gamma::Boosted { d, c, inv_alpha } => {
                let g = mt_core(d, c, rng);
                let u: f64 = rng.random();
                g * (1.0 - u).powf(inv_alpha)
            }
        }
    }
}

#[inline]
fn mt_core<R: Rng>(d: f64, c: f64, rng: &mut R) -> f64 {
    loop {
        let x: f64 = StandardNormal.sample(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Beta(α, β) sampler.
#[derive(Debug, Clone, Copy)]
pub(crate) enum BetaSampler {
    Uniform,
    /// β = 1: `U^(1/α)`.
    PowAlpha { inv_alpha: f64 },
    /// α = 1: `1 − U^(1/β)`.
    PowBeta { inv_beta: f64 },
    TwoGamma { a: Gamma, b: Gamma },
}

impl BetaSampler {
    pub fn new(alpha: f64, beta: f64) -> Self {
        match (alpha == 1.0, beta == 1.0) {
            (true, true) => BetaSampler::Uniform,
            (false, true) => BetaSampler::PowAlpha {
                inv_alpha: 1.0 / alpha,
            },
            (true, false) => BetaSampler::PowBeta {
                inv_beta: 1.0 / beta,
            },
            (false, false) => BetaSampler::TwoGamma {
                a: Gamma::new(alpha),
                b: Gamma::new(beta),
            },
        }
    }

    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            BetaSampler::Uniform => rng.random(),
            BetaSampler::PowAlpha { inv_alpha } => {
                let u: f64 = rng.random();
                (1.0 - u).powf(inv_alpha)
            }
            BetaSampler::PowBeta { inv_beta } => {
                let u: f64 = rng.random();
                1.0 - (1.0 - u).powf(inv_beta)
            }
            BetaSampler::TwoGamma { a, b } => {
                let ga = a.sample(rng);
                let gb = b.sample(rng);
                let s = ga + gb;
                if s > 0.0 {
                    ga / s
                } else {
                    0.5
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hitrate::special::reg_inc_beta;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_shape(alpha: f64, beta: f64, seed: u64) {
        let sampler = BetaSampler::new(alpha, beta);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 200_000usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let probes = [0.1f64, 0.3, 0.5, 0.7, 0.9];
        let mut below = [0usize; 5];
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            assert!((0.0..=1.0).contains(&x));
            sum += x;
            sum_sq += x * x;
            for (i, &p) in probes.iter().enumerate() {
                if x <= p {
                    below[i] += 1;
                }
            }
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = (sum_sq - sum * sum / nf) / (nf - 1.0);
        let expect_mean = alpha / (alpha + beta);
        let s = alpha + beta;
        let expect_var = alpha * beta / (s * s * (s + 1.0));
        let mean_se = (expect_var / nf).sqrt();
        assert!(
            (mean - expect_mean).abs() < 4.0 * mean_se + 1e-4,
            "a={alpha} b={beta}: mean {mean} vs {expect_mean}"
        );
        assert!(
            (var - expect_var).abs() < 0.05 * expect_var + 1e-4,
            "a={alpha} b={beta}: var {var} vs {expect_var}"
        );
        // empirical CDF against the regularized incomplete beta
        for (i, &p) in probes.iter().enumerate() {
            let emp = below[i] as f64 / nf;
            let expect = reg_inc_beta(alpha, beta, p);
            let se = (expect * (1.0 - expect) / nf).sqrt();
            assert!(
                (emp - expect).abs() < 4.0 * se + 1e-4,
                "a={alpha} b={beta} F({p}): {emp} vs {expect}"
            );
        }
    }

    #[test]
    fn sampler_matches_analytic_distribution() {
        for (i, &(a, b)) in [
            (1.0, 1.0),
            (2.0, 1.0),
            (1.0, 5.0),
            (0.5, 0.5),
            (2.0, 2.0),
            (5.0, 0.5),
            (0.5, 5.0),
            (8.0, 3.0),
        ]
        .iter()
        .enumerate()
        {
            check_shape(a, b, 90 + i as u64);
        }
    }
}
