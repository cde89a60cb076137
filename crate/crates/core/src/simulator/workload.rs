//! Poisson arrival generation.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Arrival times (µs) of a Poisson process of rate `lambda_rps` over
/// `[0, duration_s)`. Deterministic per seed.
pub fn generate_workload(lambda_rps: f64, duration_s: f64, seed: u64) -> Result<Vec<u64>> {
    if !(lambda_rps > 0.0) || !(duration_s > 0.0) {
        return Err(Error::InvalidArgument(
            "arrival rate and duration must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon_us = (duration_s * 1e6) as u64;
    let mut arrivals = Vec::with_capacity((lambda_rps * duration_s * 1.1) as usize + 16);
    let mut t = 0.0f64;
    loop {
        let u: f64 = rng.random();
        // exponential inter-arrival; (1 - u) keeps the log argument in (0, 1]
        t += -(1.0 - u).ln() / lambda_rps * 1e6;
        let at = t as u64;
        if at >= horizon_us {
            break;
        }
        arrivals.push(at);
    }
    Ok(arrivals)
}
