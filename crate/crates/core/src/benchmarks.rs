//! Reference schemes the proposed policies are compared against.
//!
//! Non-buffered: pick the relay with the best bottleneck, FSO only or with a
//! separate RF relay whose band is split into equal halves. Buffered: each
//! slot activate the single link (per medium) that delivers the most bits
//! given the current buffer contents.

use serde::{Deserialize, Serialize};

use crate::channels::{CapacityMatrix, Hop};
use crate::delay::QueueState;
use crate::error::Result;
use crate::scalar::{argmax, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    NonBaMaxMinFsoOnly,
    NonBaIndependent,
    BaBestFsoOnly,
    BaIndependent,
}

/// `max_m min(C1fso_m, C2fso_m)`.
pub fn nonba_maxmin_fso<T: Scalar>(c: &CapacityMatrix<T>) -> T {
    maxmin_fso_choice(c).1
}

/// FSO max-min relay plus an independently chosen RF relay whose band is
/// split into equal halves.
pub fn nonba_independent<T: Scalar>(c: &CapacityMatrix<T>) -> T {
    maxmin_fso_choice(c).1 + half_slot_rf_choice(c).1
}

/// Relay with the best FSO bottleneck and its rate.
pub fn maxmin_fso_choice<T: Scalar>(c: &CapacityMatrix<T>) -> (usize, T) {
    let rates: Vec<T> = (0..c.relays())
        .map(|m| c.fso(Hop::First, m).min(c.fso(Hop::Second, m)))
        .collect();
    let m = argmax(&rates);
    (m, rates[m])
}

/// Relay with the best RF bottleneck over two half slots, and its rate.
pub fn half_slot_rf_choice<T: Scalar>(c: &CapacityMatrix<T>) -> (usize, T) {
    let rates: Vec<T> = (0..c.relays())
        .map(|n| (T::half() * c.rf(Hop::First, n)).min(T::half() * c.rf(Hop::Second, n)))
        .collect();
    let n = argmax(&rates);
    (n, rates[n])
}

/// How a buffered benchmark uses the RF band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RfSplit {
    /// One RF link for the whole slot.
    #[default]
    FullSlot,
    /// Best receiving and best transmitting RF link, each for half the slot.
    HalfSlot,
}

/// A single activated link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Activation {
    pub hop: Hop,
    pub relay: usize,
}

/// Link among `rows` that delivers the most given the buffers: reception is
/// capped by free space, transmission by buffered bits. Ties go to reception,
/// then to the lowest relay.
pub fn best_deliverable<T: Scalar>(rows: &[Vec<T>; 2], q: &QueueState<T>) -> (Activation, T) {
    let mut best = (
        Activation {
            hop: Hop::First,
            relay: 0,
        },
        -T::one(),
    );
    for hop in Hop::ALL {
        for m in 0..q.relays() {
            let cap = rows[hop.index()][m];
            let amount = match hop {
                Hop::First => cap.min(q.headroom(m)),
                Hop::Second => cap.min(q.level[m]),
            };
            if amount > best.1 {
                best = (Activation { hop, relay: m }, amount);
            }
        }
    }
    best
}

/// Stateful buffered benchmark: FSO only, or FSO and RF chosen separately.
#[derive(Debug, Clone)]
pub struct BaBenchmark<T> {
    pub kind: BenchmarkKind,
    pub rf_split: RfSplit,
    pub queue: QueueState<T>,
}

impl<T: Scalar> BaBenchmark<T> {
    /// `kind` must be one of the buffered variants.
    pub fn new(kind: BenchmarkKind, queue: QueueState<T>, rf_split: RfSplit) -> Self {
        assert!(
            matches!(
                kind,
                BenchmarkKind::BaBestFsoOnly | BenchmarkKind::BaIndependent
            ),
            "{kind:?} is not a buffered benchmark"
        );
        BaBenchmark {
            kind,
            rf_split,
            queue,
        }
    }

    pub fn with_capacity(kind: BenchmarkKind, qmax: Vec<T>) -> Result<Self> {
        Ok(Self::new(kind, QueueState::new(qmax)?, RfSplit::default()))
    }

    /// Runs one slot and returns the bits delivered to the destination.
    pub fn step(&mut self, c: &CapacityMatrix<T>) -> T {
        let (_, sent) = self.step_flows(c);
        sent.into_iter().fold(T::zero(), |a, b| a + b)
    }

    /// Runs one slot and returns the bits received and sent by each relay.
    pub fn step_flows(&mut self, c: &CapacityMatrix<T>) -> (Vec<T>, Vec<T>) {
        let relays = c.relays();
        let mut offered_in = vec![T::zero(); relays];
        let mut offered_out = vec![T::zero(); relays];
        let mut offer = |a: Activation, cap: T| match a.hop {
            Hop::First => offered_in[a.relay] = offered_in[a.relay] + cap,
            Hop::Second => offered_out[a.relay] = offered_out[a.relay] + cap,
        };
        let (fso, _) = best_deliverable(&c.fso, &self.queue);
        offer(fso, c.fso[fso.hop.index()][fso.relay]);
        if self.kind == BenchmarkKind::BaIndependent {
            match self.rf_split {
                RfSplit::FullSlot => {
                    let (rf, _) = best_deliverable(&c.rf, &self.queue);
                    offer(rf, c.rf[rf.hop.index()][rf.relay]);
                }
                RfSplit::HalfSlot => {
                    let half =
                        |row: &Vec<T>| row.iter().map(|&x| T::half() * x).collect::<Vec<_>>();
                    let rx_only = [half(&c.rf[0]), vec![T::zero(); relays]];
                    let tx_only = [vec![T::zero(); relays], half(&c.rf[1])];
                    let (rx, _) = best_deliverable(&rx_only, &self.queue);
                    let (tx, _) = best_deliverable(&tx_only, &self.queue);
                    offer(rx, rx_only[0][rx.relay]);
                    if tx.hop == Hop::Second {
                        offer(tx, tx_only[1][tx.relay]);
                    }
                }
            }
        }
        self.queue.step(&offered_in, &offered_out)
    }
}
