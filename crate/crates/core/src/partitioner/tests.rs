use super::*;
use crate::hitrate::HitRateModel;

/// Zipf-shaped access profile with identity ranking and uniform cluster
/// sizes; `bytes_total` spread evenly.
fn zipf_profile(n_clusters: usize, s: f64, bytes_total: u64) -> AccessProfile {
    let mut counts: Vec<u64> = (1..=n_clusters)
        .map(|k| ((k as f64).powf(-s) * 1e7) as u64 + 1)
        .collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let ranking = (0..n_clusters as u32).collect();
    AccessProfile {
        n_clusters,
        total_accesses: counts.iter().sum(),
        counts,
        ranking,
        cluster_bytes: vec![bytes_total / n_clusters as u64; n_clusters],
    }
}

fn desk_models() -> (MemoryModel, LlmModel, LatencyModel) {
    let mem = MemoryModel {
        kvcache_bytes: 40_000_000_000,
        param_bytes: 30_000_000_000,
    };
    let llm = LlmModel {
        mu0_rps: 100.0,
        prefill_ms: PiecewiseLinear::constant(40.0),
        decode_ms_per_token: 2.0,
        output_tokens: 64,
    };
    let latency = LatencyModel {
        t_cq: PiecewiseLinear::affine(2.0, 0.1),
        t_lut: PiecewiseLinear::affine(60.0, 9.0),
    };
    (mem, llm, latency)
}

#[test]
fn latency_bound_arithmetic() {
    let mut slo = SloConfig::new(200.0, 150.0);
    assert_eq!(latency_bound(&slo), 100.0);
    slo.epsilon = 0.0;
    assert_eq!(latency_bound(&slo), 200.0);
    let slo = SloConfig {
        slo_search_ms: 300.0,
        slo_llm_ms: 100.0,
        epsilon: 0.5,
        delta: 0.005,
    };
    assert_eq!(latency_bound(&slo), 200.0);
}

#[test]
fn throughput_scaling_endpoints() {
    let profile = zipf_profile(256, 1.2, 20_000_000_000);
    let curve = coverage_curve(&profile).unwrap();
    let (mem, llm, _) = desk_models();
    // no index resident: full throughput
    assert_eq!(
        llm_throughput_at(&mem, &llm, &curve, 0.0).unwrap(),
        llm.mu0_rps
    );
    // index occupying half the KV budget halves throughput
    let profile2 = zipf_profile(256, 1.2, mem.kvcache_bytes / 2);
    let curve2 = coverage_curve(&profile2).unwrap();
    let mu = llm_throughput_at(&mem, &llm, &curve2, 1.0).unwrap();
    assert!((mu - 0.5 * llm.mu0_rps).abs() < 1e-9 * llm.mu0_rps);
}

#[test]
fn throughput_ratio_reproduces_published_shard_sizes() {
    // ratio check against the published SLO/shard-size table: with a
    // 36.19 GB KV baseline, shards of 3.80 GB vs 2.21 GB scale
    // throughput by (36.19-3.80)/(36.19-2.21)
    let gb = 1_000_000_000u64;
    let kv = (36.19 * gb as f64) as u64;
    let mem = MemoryModel {
        kvcache_bytes: kv,
        param_bytes: (30.59 * gb as f64) as u64,
    };
    let (_, llm, _) = desk_models();
    let make_curve = |bytes: f64| CoverageCurve {
        points: vec![
            crate::profiler::CoveragePoint {
                rho: 0.0,
                mean_hitrate: 0.0,
                hot_bytes: 0,
            },
            crate::profiler::CoveragePoint {
                rho: 1.0,
                mean_hitrate: 1.0,
                hot_bytes: (bytes * gb as f64) as u64,
            },
        ],
    };
    let mu_tight = llm_throughput_at(&mem, &llm, &make_curve(3.80), 1.0).unwrap();
    let mu_loose = llm_throughput_at(&mem, &llm, &make_curve(2.21), 1.0).unwrap();
    let got = mu_tight / mu_loose;
    let expect = (36.19 - 3.80) / (36.19 - 2.21);
    assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
}

#[test]
fn oversized_index_is_infeasible() {
    let (mem, llm, _) = desk_models();
    let profile = zipf_profile(64, 1.2, mem.kvcache_bytes * 3);
    let curve = coverage_curve(&profile).unwrap();
    assert!(matches!(
        llm_throughput_at(&mem, &llm, &curve, 1.0),
        Err(Error::IndexExceedsMemory { .. })
    ));
}

#[test]
fn cpu_meeting_the_bound_needs_no_cache() {
    let profile = zipf_profile(256, 1.2, 20_000_000_000);
    let curve = coverage_curve(&profile).unwrap();
    // T(b) = (2 + 0.1b) + (10 + 0.5b): at B=ceil(0.1*400)=40, T = 36 < 100
    let latency = LatencyModel {
        t_cq: PiecewiseLinear::affine(2.0, 0.1),
        t_lut: PiecewiseLinear::affine(10.0, 0.5),
    };
    let got = infer_partition(100.0, 400.0, &latency, &curve, 0.04).unwrap();
    assert_eq!(got.rho, 0.0);
    assert!(!got.saturated);
}

#[test]
fn cq_exceeding_the_bound_saturates() {
    let profile = zipf_profile(256, 1.2, 20_000_000_000);
    let curve = coverage_curve(&profile).unwrap();
    let latency = LatencyModel {
        t_cq: PiecewiseLinear::affine(150.0, 1.0),
        t_lut: PiecewiseLinear::affine(10.0, 0.5),
    };
    let got = infer_partition(100.0, 400.0, &latency, &curve, 0.04).unwrap();
    assert_eq!(got.rho, 1.0);
    assert!(got.saturated);
}

#[test]
fn hand_checked_infer_partition() {
    // T_CQ = 2 + 0.5b, T_LUT = 10 + 3b, τ_s = 20 ms, μ = 400 rps:
    // B↑ = B↓ = 8, T = 40, η = (40 − 20) / 34 ≈ 0.588
    let latency = LatencyModel {
        t_cq: PiecewiseLinear::affine(2.0, 0.5),
        t_lut: PiecewiseLinear::affine(10.0, 3.0),
    };
    let profile = zipf_profile(400, 1.2, 20_000_000_000);
    let curve = coverage_curve(&profile).unwrap();
    let sigma2 = 0.04;

    let eta_required: f64 = (40.0 - 20.0) / 34.0;
    assert!((eta_required - 0.588235).abs() < 1e-5);

    let got = infer_partition(20.0, 400.0, &latency, &curve, sigma2).unwrap();
    assert_eq!(got.batch_up, 8);
    // both roundings coincide, so the result must equal the direct
    // inversion of the hand-computed target
    let direct = crate::hitrate::hitrate_to_coverage(&curve, sigma2, 8, eta_required).unwrap();
    assert_eq!(got.rho, direct.rho);
    assert!(!got.saturated);

    // forward check: the chosen coverage meets the target through the
    // hit-rate model
    let model = HitRateModel::new(sigma2).unwrap();
    let eta_at = model
        .expected_min(curve.mean_hitrate_at(got.rho), 8)
        .unwrap();
    assert!(eta_at >= eta_required);
}

#[test]
fn generous_slo_converges_to_zero_coverage() {
    let profile = zipf_profile(256, 1.2, 20_000_000_000);
    let (mem, llm, latency) = desk_models();
    let slo = SloConfig::new(10_000.0, 150.0);
    let plan = partition(&slo, &mem, &llm, &latency, &profile, 0.04).unwrap();
    assert_eq!(plan.rho, 0.0);
    assert!(plan.hot_cluster_ids.is_empty());
    assert_eq!(plan.predicted_mu_rps, llm.mu0_rps);
    assert!(!plan.saturated);
    assert!(plan.iterations <= 64);
}

#[test]
fn tightening_slo_grows_the_hot_set() {
    let profile = zipf_profile(256, 1.2, 20_000_000_000);
    let (mem, llm, latency) = desk_models();
    let mut last_rho = f64::INFINITY;
    let mut last_bytes = u64::MAX;
    let curve = coverage_curve(&profile).unwrap();
    for slo_ms in [100.0, 150.0, 200.0, 250.0] {
        let slo = SloConfig::new(slo_ms, 150.0);
        let plan = partition(&slo, &mem, &llm, &latency, &profile, 0.04).unwrap();
        assert!(
            plan.rho <= last_rho,
            "slo {slo_ms}: rho {} > {last_rho}",
            plan.rho
        );
        let bytes = curve.hot_bytes_at(plan.rho);
        assert!(bytes <= last_bytes);
        assert!(plan.iterations <= 64);
        assert!(plan.predicted_tau_s_ms <= slo.slo_search_ms / (1.0 + slo.epsilon) + 1e-6);
        last_rho = plan.rho;
        last_bytes = bytes;
    }
    // the tightest SLO in this scenario genuinely needs cache
    let tight = partition(
        &SloConfig::new(100.0, 150.0),
        &mem,
        &llm,
        &latency,
        &profile,
        0.04,
    )
    .unwrap();
    assert!(tight.rho > 0.0);
}

#[test]
fn returned_rho_is_a_delta_fixed_point() {
    let profile = zipf_profile(256, 1.2, 20_000_000_000);
    let (mem, llm, latency) = desk_models();
    let curve = coverage_curve(&profile).unwrap();
    for slo_ms in [120.0, 180.0, 240.0] {
        let slo = SloConfig::new(slo_ms, 150.0);
        let plan = partition(&slo, &mem, &llm, &latency, &profile, 0.04).unwrap();
        let mu = llm_throughput_at(&mem, &llm, &curve, plan.rho).unwrap();
        let re = infer_partition(plan.predicted_tau_s_ms, mu, &latency, &curve, 0.04).unwrap();
        assert!(
            (re.rho - plan.rho).abs() <= slo.delta,
            "slo {slo_ms}: |{} - {}| > {}",
            re.rho,
            plan.rho,
            slo.delta
        );
    }
}

#[test]
fn hot_set_is_the_ranking_prefix() {
    let profile = zipf_profile(256, 1.2, 20_000_000_000);
    let (mem, llm, latency) = desk_models();
    let slo = SloConfig::new(120.0, 150.0);
    let plan = partition(&slo, &mem, &llm, &latency, &profile, 0.04).unwrap();
    let expect = ((plan.rho * 256.0).ceil() as usize).min(256);
    assert_eq!(plan.hot_cluster_ids.len(), expect);
    assert_eq!(plan.hot_cluster_ids, profile.ranking[..expect].to_vec());
}
