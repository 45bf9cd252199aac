use hybrid_relay::ba::{select_ba, BaWeights};
use hybrid_relay::distributed::{
    expiry, run_distributed_ba, run_distributed_nonba, EquivalenceReport,
};
use hybrid_relay::nonba::{select_nonba, Mode};
use hybrid_relay::oracle::random_capacities;
use hybrid_relay::source::stream_rng;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn timers_reproduce_centralized_selection() {
    let mut rng = stream_rng(21, 0);
    let mut report = EquivalenceReport::default();
    for i in 0..3000 {
        let relays = 2 + i % 4;
        let c = random_capacities(&mut rng, relays);
        let w = BaWeights::new((0..relays).map(|_| rng.random::<f64>()).collect()).unwrap();
        report.record(&c, &w, 1e-3);
    }
    assert_eq!(report.ba_mismatches, 0);
    assert_eq!(report.nonba_case12_mismatches, 0);
    assert!(report.nonba_case12 > 1000);
    assert!(report.nonba_mixed > 0);
}

#[test]
fn buffered_protocol_matches_on_hand_built_slot() {
    let c =
        hybrid_relay::CapacityMatrix::from_rows(&[5.0, 9.0], &[7.0, 3.0], &[2.0, 4.0], &[6.0, 1.0]);
    let w = BaWeights::new(vec![0.4, 0.6]).unwrap();
    let out = run_distributed_ba(&c, &w, 1.0);
    assert_eq!(out.decision, select_ba(&c, &w));
    assert!(!out.log.is_empty());
}

#[test]
fn mixed_slots_never_beat_centralized() {
    let mut rng = stream_rng(22, 0);
    for _ in 0..2000 {
        let c = random_capacities(&mut rng, 3);
        let central = select_nonba(&c);
        let dist = run_distributed_nonba(&c, 1e-3);
        if dist.decision.mode == Mode::Mixed || central.mode == Mode::Mixed {
            assert!(dist.decision.total <= central.total + 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn larger_metrics_expire_first(a in 1e-6f64..1e6, b in 1e-6f64..1e6, eta in 1e-6f64..1.0) {
        prop_assume!(a != b);
        prop_assert_eq!(a > b, expiry(eta, a) < expiry(eta, b));
    }
}
