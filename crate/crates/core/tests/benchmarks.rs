use hybrid_relay::ba::{ba_flows, train_lambda, TrainingConfig};
use hybrid_relay::benchmarks::{
    best_deliverable, nonba_independent, nonba_maxmin_fso, BaBenchmark, BenchmarkKind, RfSplit,
};
use hybrid_relay::channels::{CapacityMatrix, ChannelModel, Hop, NetworkConfig};
use hybrid_relay::delay::QueueState;
use hybrid_relay::nonba::select_nonba;
use hybrid_relay::source::{stream_rng, SlotSource};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = CapacityMatrix<f64>> {
    (1usize..5).prop_flat_map(|m| {
        let row = move || prop::collection::vec(0.0f64..100.0, m);
        (row(), row(), row(), row())
            .prop_map(|(a, b, c, d)| CapacityMatrix::from_rows(&a, &b, &c, &d))
    })
}

#[test]
fn maxmin_example() {
    let c: CapacityMatrix<f64> =
        CapacityMatrix::from_rows(&[8.0, 5.0], &[3.0, 6.0], &[1.0, 1.0], &[1.0, 1.0]);
    assert_eq!(nonba_maxmin_fso(&c), 5.0);
    assert_eq!(nonba_independent(&c), 5.5);
}

#[test]
fn best_deliverable_respects_buffers() {
    let mut q = QueueState::uniform(2, 10.0).unwrap();
    q.level = vec![10.0, 2.0];
    let rows = [vec![9.0, 4.0], vec![3.0, 8.0]];
    let (a, bits) = best_deliverable(&rows, &q);
    // relay 0 is full, relay 1 holds 2 bits: best is receiving 4 on relay 1
    assert_eq!((a.hop, a.relay, bits), (Hop::First, 1, 4.0));
}

#[test]
fn optimal_buffered_beats_buffered_benchmarks() {
    let model = ChannelModel::new(&NetworkConfig::standard(3, 800.0, 800.0)).unwrap();
    let cfg = TrainingConfig {
        iterations: 150,
        samples: 1000,
        seed: 8,
        ..TrainingConfig::default()
    };
    let w = train_lambda(&model, &cfg).unwrap();
    let trace: Vec<CapacityMatrix<f64>> = model.trace(20_000, &mut stream_rng(8, 0));
    let ba = ba_flows(&trace, &w).throughput();
    for kind in [BenchmarkKind::BaBestFsoOnly, BenchmarkKind::BaIndependent] {
        for split in [RfSplit::FullSlot, RfSplit::HalfSlot] {
            let mut b = BaBenchmark::new(kind, QueueState::unbounded(3), split);
            let tp = trace.iter().map(|c| b.step(c)).sum::<f64>() / trace.len() as f64;
            assert!(ba >= tp, "{kind:?}/{split:?}: {tp} > {ba}");
            assert!(tp > 0.0);
        }
    }
}

proptest! {
    #[test]
    fn unbuffered_dominance_chain(c in matrix()) {
        let opt = select_nonba(&c).total;
        let ind = nonba_independent(&c);
        let fso = nonba_maxmin_fso(&c);
        prop_assert!(opt >= ind - 1e-9);
        prop_assert!(ind >= fso);
    }

    #[test]
    fn buffered_benchmark_keeps_buffers_valid(
        trace in prop::collection::vec(
            (prop::collection::vec(0.0f64..50.0, 8)).prop_map(|v| {
                CapacityMatrix::from_rows(&v[0..2], &v[2..4], &v[4..6], &v[6..8])
            }),
            1..50,
        ),
        full in any::<bool>(),
    ) {
        let kind = if full { BenchmarkKind::BaIndependent } else { BenchmarkKind::BaBestFsoOnly };
        let mut b = BaBenchmark::with_capacity(kind, vec![60.0, 60.0]).unwrap();
        let (mut inflow, mut outflow) = (0.0, 0.0);
        for c in &trace {
            let (r, s) = b.step_flows(c);
            inflow += r.iter().sum::<f64>();
            outflow += s.iter().sum::<f64>();
            for m in 0..2 {
                prop_assert!(b.queue.level[m] >= -1e-9 && b.queue.level[m] <= 60.0 + 1e-9);
            }
        }
        prop_assert!((inflow - outflow - b.queue.total()).abs() < 1e-6);
    }
}
