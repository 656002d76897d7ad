use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use spnknn_core::discovery::{inductive_miner, tree_to_petri, ProcessTree};
use spnknn_core::eval::evaluate_with;
use spnknn_core::gdtspn::{enrich, DistributionKind, Timing};
use spnknn_core::petri::{replay, replay_complete, SoundnessCheck};
use spnknn_core::predict::{benchmark_average, build_model, predict_gdtspn_knn, ModelCache};
use spnknn_core::synth::{generate_log, model_from_tree, random_tree, two_variant_log, TwoVariantConfig};
use spnknn_core::{
    run_experiment, select_neighbors, DurationDistribution, EventLog, ExperimentConfig, GdtSpn,
    Method, SimulationConfig, Trace,
};

fn random_model(seed: u64) -> GdtSpn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = random_tree(&mut rng, 3, 6);
    model_from_tree(&tree, &mut rng).unwrap()
}

/// A random tree behind an instantaneous `start` activity, with integer
/// dirac durations. A trace begins at its first event, so only activities
/// enabled after that event have observable durations.
fn dirac_model(seed: u64) -> GdtSpn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = ProcessTree::Sequence(vec![ProcessTree::activity("start"), random_tree(&mut rng, 3, 6)]);
    let net = tree_to_petri(&tree);
    let timing = (0..net.transition_count())
        .map(|t| match net.transition(t).label.as_deref() {
            None => Timing::Immediate { weight: rng.random_range(1..10) as f64 },
            Some("start") => Timing::Timed(DurationDistribution::dirac(0.0).unwrap()),
            Some(_) => Timing::Timed(DurationDistribution::dirac(rng.random_range(0..5_000_000) as f64).unwrap()),
        })
        .collect();
    GdtSpn::new(net, timing).unwrap()
}

#[test]
fn truncated_mean_grows_with_elapsed() {
    let d = DurationDistribution::normal(100.0, 10.0).unwrap();
    let grid = [0.0, 40.0, 80.0, 95.0, 100.0, 105.0, 120.0, 150.0, 180.0];
    let means: Vec<f64> = grid
        .iter()
        .map(|&e| {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            (0..100_000).map(|_| d.truncated_sample(e, &mut rng)).sum::<f64>() / 1e5
        })
        .collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

#[test]
fn truncated_samples_pass_ks() {
    let crit = (-0.5 * (0.001f64 / 2.0).ln()).sqrt() / (1e5f64).sqrt();
    for (i, &(mu, sigma, e)) in [(5.0, 20.0, 0.0), (50.0, 1.0, 49.0), (3.0, 0.5, 4.0), (1e6, 3e5, 1.5e6)]
        .iter()
        .enumerate()
    {
        let d = DurationDistribution::normal(mu, sigma).unwrap();
        let oracle = Normal::new(mu, sigma).unwrap();
        let lower = f64::max(e, 0.0);
        let s_low = oracle.sf(lower);
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let mut xs: Vec<f64> = (0..100_000).map(|_| d.truncated_sample(e, &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let f = (s_low - oracle.sf(x)) / s_low;
                f64::max(f - j as f64 / n, (j + 1) as f64 / n - f)
            })
            .fold(0.0, f64::max);
        assert!(ks < crit, "case {i}: D = {ks}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generated_traces_replay_on_generator_and_discovered_nets(seed in any::<u64>()) {
        let model = random_model(seed);
        let log = generate_log(&model, 30, 0, 1_000, "c", seed).unwrap();
        let net = tree_to_petri(&inductive_miner(&log));
        net.validate_workflow_net(SoundnessCheck::default()).unwrap();
        for t in log.traces() {
            prop_assert!(replay_complete(model.net(), t).is_ok());
            prop_assert!(replay_complete(&net, t).is_ok());
        }
    }

    #[test]
    fn enrichment_recovers_dirac_durations(seed in any::<u64>()) {
        let truth = dirac_model(seed);
        let log = generate_log(&truth, 40, 0, 10_000_000, "c", seed).unwrap();
        let fitted = enrich(truth.net(), log.traces()).unwrap();
        for t in 0..truth.net().transition_count() {
            if let (Some(a), Some(b)) = (truth.duration(t), fitted.duration(t)) {
                if b.sample_count > 0 {
                    prop_assert_eq!(a.kind, b.kind, "transition {}", t);
                }
            }
        }
    }

    #[test]
    fn simulation_is_non_negative_and_zero_when_final(seed in any::<u64>()) {
        let model = random_model(seed);
        let log = generate_log(&model, 5, 0, 1_000, "c", seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in log.traces() {
            let cut = rng.random_range(1..=t.len());
            let events = &t.events()[..cut];
            let state = replay(model.net(), events, t.start()).unwrap();
            let t0 = events[cut - 1].timestamp + rng.random_range(0..1_000_000);
            let r = model.simulate_once(&state, t0, 10_000, &mut rng);
            if model.net().is_final(&state.marking) {
                prop_assert_eq!(r, Some(0.0));
            } else if let Some(r) = r {
                prop_assert!(r >= 0.0);
            }
        }
    }

    #[test]
    fn remaining_prediction_is_reproducible(seed in any::<u64>()) {
        let model = random_model(seed);
        let state = replay(model.net(), &[], 0).unwrap();
        let cfg = SimulationConfig { n_runs: 50, seed, ..SimulationConfig::default() };
        let a = model.predict_remaining(&state, 0, &cfg).unwrap();
        let b = model.predict_remaining(&state, 0, &cfg).unwrap();
        prop_assert_eq!(a.mean_ms.to_bits(), b.mean_ms.to_bits());
    }

    #[test]
    fn neighbor_order_survives_rescaling(seed in any::<u64>(), scale in 2i64..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log = two_variant_log(&TwoVariantConfig::default(), 120, 0, "c", seed).unwrap();
        let scaled = EventLog::new(
            log.traces()
                .iter()
                .map(|t| {
                    let pairs: Vec<(&str, i64)> =
                        t.events().iter().map(|e| (e.activity.as_str(), e.timestamp * scale)).collect();
                    Trace::from_pairs(t.case_id(), &pairs).unwrap()
                })
                .collect(),
        )
        .unwrap();
        let i = rng.random_range(0..log.len());
        let src = &log.traces()[i];
        let t0 = src.events()[rng.random_range(0..src.len())].timestamp;
        let prefix = src.prefix_at(t0).unwrap();
        let prefix_scaled = scaled.traces()[i].prefix_at(t0 * scale).unwrap();
        for k in [1, 10, 60] {
            let s = rng.random::<u64>();
            let a = select_neighbors(&log, &prefix, k, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
            let b = select_neighbors(&scaled, &prefix_scaled, k, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
            prop_assert_eq!(&a.indices, &b.indices);
            prop_assert_eq!(&a.distances, &b.distances);
        }
    }

    #[test]
    fn average_benchmark_ignores_the_route(elapsed in 0i64..200_000_000) {
        let log = two_variant_log(&TwoVariantConfig::default(), 50, 0, "c", 1).unwrap();
        let a = benchmark_average(&log, elapsed, true).unwrap();
        let b = benchmark_average(&log, elapsed, true).unwrap();
        prop_assert!(a.remaining_s >= 0.0);
        prop_assert_eq!(a.remaining_s.to_bits(), b.remaining_s.to_bits());
    }
}

#[test]
fn knn_selection_is_deterministic_with_random_fill() {
    let log = two_variant_log(&TwoVariantConfig::default(), 200, 0, "c", 4).unwrap();
    let prefix = Trace::from_pairs("p", &[("A", 0), ("E", 10)]).unwrap();
    let a = select_neighbors(&log, &prefix, 30, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = select_neighbors(&log, &prefix, 30, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(a.random_fill_count, 30);
    assert_eq!(a, b);
}

#[test]
fn whole_log_neighbors_give_the_full_log_model() {
    let train = two_variant_log(&TwoVariantConfig::default(), 150, 0, "c", 8).unwrap();
    let test = two_variant_log(&TwoVariantConfig::default(), 1, 0, "t", 9).unwrap();
    let case = &test.traces()[0];
    let prefix = case.prefix_at(case.events()[1].timestamp).unwrap();
    let sel = select_neighbors(&train, &prefix, train.len(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let mut order = sel.indices.clone();
    assert_ne!(order, (0..train.len()).collect::<Vec<_>>(), "selection should reorder");
    order.sort_unstable();
    assert_eq!(order, (0..train.len()).collect::<Vec<_>>());
    let from_neighbors = build_model(&train.select(&sel.indices).unwrap()).unwrap();
    let cache = ModelCache::new();
    let full = cache.get_or_build(&train).unwrap();
    assert_eq!(&from_neighbors, full);
    for t in 0..full.net().transition_count() {
        let Some(d) = full.duration(t) else { continue };
        if full.net().transition(t).label.as_deref() == Some("A") {
            // every case starts with A
            assert_eq!(d.kind, DistributionKind::Dirac { value: 0.0 });
        } else {
            assert!(matches!(d.kind, DistributionKind::Normal { .. }));
        }
    }
}

#[test]
fn predictions_are_thread_count_independent() {
    let train = two_variant_log(&TwoVariantConfig::default(), 300, 0, "c", 10).unwrap();
    let test = two_variant_log(&TwoVariantConfig::default(), 5, 0, "t", 11).unwrap();
    let cfg = SimulationConfig::with_seed(3);
    let run = || -> Vec<u64> {
        test.traces()
            .iter()
            .map(|t| {
                let t0 = t.start() + 2 * 3_600_000;
                let p = t.prefix_at(t0).unwrap();
                predict_gdtspn_knn(&train, &p, t0, 50, &cfg).unwrap().remaining_s.to_bits()
            })
            .collect()
    };
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    assert_eq!(many, one);
}

#[test]
fn constant_zero_predictor_rmse_is_rms_of_actual_remaining() {
    let test = two_variant_log(&TwoVariantConfig::default(), 60, 0, "t", 12).unwrap();
    let mean_ms = 17 * 3_600_000;
    let n = 10;
    let m = evaluate_with(&test, mean_ms, n, &[Method::Average], |_, _| Ok(0.0)).unwrap();
    for it in &m {
        // independent pass over the raw traces
        let remaining: Vec<f64> = test
            .traces()
            .iter()
            .filter_map(|t| {
                let t0 = t.start() + it.iteration as i64 * mean_ms / n as i64;
                (t.end() > t0).then(|| (t.end() - t0) as f64 / 1000.0)
            })
            .collect();
        assert_eq!(it.active_traces, remaining.len());
        let mm = &it.methods[0];
        if remaining.is_empty() {
            assert_eq!(mm.rmse_s, None);
            continue;
        }
        let rms = (remaining.iter().map(|r| r * r).sum::<f64>() / remaining.len() as f64).sqrt();
        let mean = -remaining.iter().sum::<f64>() / remaining.len() as f64;
        assert!((mm.rmse_s.unwrap() - rms).abs() <= 1e-9 * rms);
        assert!((mm.mean_error_s.unwrap() - mean).abs() <= 1e-9 * rms);
    }
}

#[test]
fn experiment_invariants() {
    let gen = TwoVariantConfig::default();
    let train = two_variant_log(&gen, 300, 0, "train", 20).unwrap();
    let test = two_variant_log(&gen, 40, 0, "test", 21).unwrap();
    let cfg = ExperimentConfig {
        n: 5,
        k: 30,
        n_runs: 40,
        seed: 99,
        ..ExperimentConfig::default()
    };
    let m = run_experiment(&train, &test, &cfg).unwrap();
    assert_eq!(m.len(), 10);
    let total: usize = m.iter().map(|it| it.active_traces).sum();
    assert!(total <= test.len() * 2 * cfg.n);
    assert!(m.windows(2).all(|w| w[0].active_traces >= w[1].active_traces));
    for it in &m {
        assert_eq!(it.methods.len(), 5);
        for mm in &it.methods {
            if let (Some(mean), Some(rmse)) = (mm.mean_error_s, mm.rmse_s) {
                assert!(rmse + 1e-9 >= mean.abs(), "{mm:?}");
            }
        }
    }
    assert_eq!(run_experiment(&train, &test, &cfg).unwrap(), m);
}
