use hybrid_relay::ba::{
    ba_flows, ba_flows_tracked, select_ba, selection_metrics, train_lambda, BaTracker, BaWeights,
    TrainingConfig,
};
use hybrid_relay::channels::{CapacityMatrix, ChannelModel, NetworkConfig};
use hybrid_relay::nonba::select_nonba;
use hybrid_relay::oracle::{argmax_exhaustive, random_capacities, single_relay_lambda_grid};
use hybrid_relay::source::{stream_rng, FixedCapacities, SlotSource};
use proptest::prelude::*;

fn matrix(relays: usize) -> impl Strategy<Value = CapacityMatrix<f64>> {
    let row = move || prop::collection::vec(0.0f64..100.0, relays);
    (row(), row(), row(), row()).prop_map(|(a, b, c, d)| CapacityMatrix::from_rows(&a, &b, &c, &d))
}

fn weights(relays: usize) -> impl Strategy<Value = BaWeights<f64>> {
    prop::collection::vec(0.0f64..=1.0, relays).prop_map(|l| BaWeights::new(l).unwrap())
}

fn case() -> impl Strategy<Value = (CapacityMatrix<f64>, BaWeights<f64>)> {
    (1usize..6).prop_flat_map(|m| (matrix(m), weights(m)))
}

fn short_training(seed: u64) -> TrainingConfig {
    TrainingConfig {
        iterations: 150,
        samples: 1000,
        seed,
        ..TrainingConfig::default()
    }
}

#[test]
fn weighted_scores_pick_the_first_relay() {
    let c = CapacityMatrix::from_rows(&[10.0, 4.0], &[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]);
    let w: BaWeights<f64> = BaWeights::new(vec![0.3, 0.7]).unwrap();
    let m = selection_metrics(&c, &w);
    assert!((m.fso[0][0] - 3.0).abs() < 1e-12);
    assert!((m.fso[0][1] - 2.8).abs() < 1e-12);
    assert_eq!(select_ba(&c, &w).fso[0], 0);
}

#[test]
fn zero_capacities_carry_nothing() {
    let c = CapacityMatrix::zeros(3);
    let w = BaWeights::uniform(3, 0.5);
    let f = ba_flows([&c, &c, &c], &w);
    assert_eq!(f.throughput(), 0.0);
    assert_eq!(ba_flows(std::iter::empty(), &w).throughput(), 0.0);
}

#[test]
fn training_a_constant_single_relay_balances_flows() {
    // FSO 10 in, 4 out; RF 6 either way: RF must mostly serve the second hop
    let c = CapacityMatrix::from_rows(&[10.0], &[4.0], &[6.0], &[6.0]);
    let w: BaWeights<f64> = train_lambda(&FixedCapacities(c.clone()), &short_training(1)).unwrap();
    assert!(w.lambda[0] < 0.5, "{:?}", w.lambda);
    assert_eq!(select_ba(&c, &w).rho1, 0.0);
}

#[test]
fn trained_single_relay_weight_matches_grid_search() {
    for (seed, d1, d2) in [(1u64, 1000.0, 800.0), (2, 800.0, 1000.0)] {
        let model = ChannelModel::new(&NetworkConfig::standard(1, d1, d2)).unwrap();
        let w = train_lambda(&model, &short_training(seed)).unwrap();
        let trace: Vec<CapacityMatrix<f64>> = model.trace(20_000, &mut stream_rng(seed, 5));
        let trained = ba_flows(&trace, &w).throughput();
        let (_, best) = single_relay_lambda_grid(&trace, 100);
        assert!(trained >= 0.99 * best, "{trained} vs grid {best}");
    }
}

#[test]
fn trained_weights_balance_relay_flows() {
    let model = ChannelModel::new(&NetworkConfig::standard(3, 800.0, 800.0)).unwrap();
    let w = train_lambda(&model, &short_training(4)).unwrap();
    let trace: Vec<CapacityMatrix<f64>> = model.trace(20_000, &mut stream_rng(4, 6));
    let f = ba_flows(&trace, &w);
    let gap: f64 = f
        .arrival
        .iter()
        .zip(&f.departure)
        .map(|(a, d)| (a - d).abs())
        .sum();
    let volume: f64 = f.arrival.iter().zip(&f.departure).map(|(a, d)| a + d).sum();
    assert!(gap / volume <= 0.05, "imbalance {}", gap / volume);
}

#[test]
fn buffered_beats_unbuffered_on_a_common_trace() {
    let model = ChannelModel::new(&NetworkConfig::standard(2, 800.0, 800.0)).unwrap();
    let w = train_lambda(&model, &short_training(7)).unwrap();
    let trace: Vec<CapacityMatrix<f64>> = model.trace(20_000, &mut stream_rng(7, 0));
    let ba = ba_flows(&trace, &w).throughput();
    let nonba = trace.iter().map(|c| select_nonba(c).total).sum::<f64>() / trace.len() as f64;
    assert!(ba >= nonba, "{ba} < {nonba}");
}

#[test]
fn synthetic_trace_gain_over_unbuffered() {
    let mut rng = stream_rng(9, 0);
    let trace: Vec<_> = (0..5000).map(|_| random_capacities(&mut rng, 3)).collect();
    let src = hybrid_relay::source::EmpiricalCapacities(trace.clone());
    let w = train_lambda(&src, &short_training(9)).unwrap();
    let ba = ba_flows(&trace, &w).throughput();
    let nonba = trace.iter().map(|c| select_nonba(c).total).sum::<f64>() / trace.len() as f64;
    assert!(ba >= nonba, "{ba} < {nonba}");
}

#[test]
fn tracking_balances_tied_relays() {
    // two identical saturated relays: fixed weights always pick relay 0 to
    // send, so relay 1 only fills and relay 0 only drains
    let c = CapacityMatrix::from_rows(&[1.0, 1.0], &[1.0, 1.0], &[0.5, 0.5], &[0.5, 0.5]);
    let trace = vec![c; 4000];
    let w = BaWeights::new(vec![0.50, 0.501]).unwrap();
    let fixed = ba_flows(&trace, &w);
    let tracked = ba_flows_tracked(&trace, &w, 100);
    assert!(fixed.throughput() < 0.6, "{fixed:?}");
    // the dual bound for this slot is 1.25
    assert!(tracked.throughput() > 0.97 * 1.25, "{tracked:?}");
}

#[test]
fn zero_horizon_keeps_weights_fixed() {
    let mut rng = stream_rng(12, 0);
    let w = BaWeights::new(vec![0.3, 0.6, 0.5]).unwrap();
    let mut t = BaTracker::new(w.clone(), 0);
    for _ in 0..200 {
        let c = random_capacities(&mut rng, 3);
        assert_eq!(t.step(&c), select_ba(&c, &w));
    }
    assert_eq!(t.weights(), &w);
}

proptest! {
    #[test]
    fn choices_are_exhaustive_argmaxes((c, w) in case()) {
        let m = selection_metrics(&c, &w);
        let d = select_ba(&c, &w);
        prop_assert_eq!(Some(d.fso[0]), argmax_exhaustive(&m.fso[0]));
        prop_assert_eq!(Some(d.fso[1]), argmax_exhaustive(&m.fso[1]));
        // RF: one flat list, reception scores first
        let flat: Vec<f64> = m.rf[0].iter().chain(&m.rf[1]).copied().collect();
        let k = argmax_exhaustive(&flat).unwrap();
        let relays = c.relays();
        if k < relays {
            prop_assert_eq!(d.rho1, 1.0);
            prop_assert_eq!(d.rf[0], k);
        } else {
            prop_assert_eq!(d.rho1, 0.0);
            prop_assert_eq!(d.rf[1], k - relays);
        }
    }

    #[test]
    fn rf_split_is_binary_and_at_most_three_relays((c, w) in case()) {
        let d = select_ba(&c, &w);
        prop_assert!(d.rho1 == 0.0 || d.rho1 == 1.0);
        prop_assert!(d.distinct_relays() <= 3);
        let active_in = (0..c.relays()).filter(|&m| d.offered_in(&c, m) > 0.0).count();
        prop_assert!(active_in <= 2);
    }

    #[test]
    fn scaling_capacities_keeps_the_decision((c, w) in case(), s in 0.01f64..100.0) {
        prop_assert_eq!(select_ba(&c, &w), select_ba(&c.scaled(s), &w));
    }

    #[test]
    fn f32_and_f64_agree_away_from_ties((c, w) in case()) {
        let d64 = select_ba(&c, &w);
        let c32: CapacityMatrix<f32> = c.cast();
        let w32 = BaWeights::new(w.lambda.iter().map(|&l| l as f32).collect()).unwrap();
        let d32 = select_ba(&c32, &w32);
        let m = selection_metrics(&c, &w);
        let gap = |v: &[f64]| {
            let mut s = v.to_vec();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if s.len() < 2 { f64::INFINITY } else { s[0] - s[1] }
        };
        let flat: Vec<f64> = m.rf[0].iter().chain(&m.rf[1]).copied().collect();
        if gap(&m.fso[0]) > 1e-3 && gap(&m.fso[1]) > 1e-3 && gap(&flat) > 1e-3 {
            prop_assert_eq!(d64.fso, d32.fso);
            prop_assert_eq!(d64.rf, d32.rf);
            prop_assert_eq!(d64.rho1, d32.rho1 as f64);
        }
    }
}

#[test]
fn slot_source_trace_is_reproducible() {
    let model = ChannelModel::new(&NetworkConfig::standard(2, 800.0, 800.0)).unwrap();
    let a: Vec<CapacityMatrix<f64>> = model.trace(10, &mut stream_rng(3, 1));
    let b: Vec<CapacityMatrix<f64>> = model.trace(10, &mut stream_rng(3, 1));
    assert_eq!(a, b);
}
