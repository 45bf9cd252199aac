//! Buffer-aided selection with finite relay buffers.
//!
//! The weighted scores of [`crate::ba`] are capped by what a relay can
//! actually accept (free buffer space) or send (buffered bits), so full
//! buffers stop receiving and empty ones stop transmitting. Smaller buffers
//! trade throughput for delay; the mean delay follows from Little's law and
//! can be cross-checked against a FIFO record of every bit's age.

use std::collections::VecDeque;

use crate::ba::{select_from_metrics, BaDecision, BaWeights, Metrics};
use crate::channels::CapacityMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which capacity caps the RF transmission score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RfTxMetric {
    /// The relay's own second-hop RF capacity, like every other tx score.
    #[default]
    SecondHop,
    /// The first-hop RF capacity of the same relay.
    FirstHop,
}

/// Buffer occupancy of every relay, optionally with a FIFO ledger of
/// `(bits, arrival slot)` chunks for measuring per-bit delay.
#[derive(Debug, Clone)]
pub struct QueueState<T> {
    pub level: Vec<T>,
    pub capacity: Vec<T>,
    ledger: Option<Vec<VecDeque<(T, u64)>>>,
    slot: u64,
    /// Sum over departed bits of their time in the buffer, in bit-slots.
    delay_sum: f64,
    departed: f64,
}

impl<T: Scalar> QueueState<T> {
    pub fn new(capacity: Vec<T>) -> Result<Self> {
        if let Some(m) = capacity.iter().position(|c| !(*c >= T::zero())) {
            return Err(Error::invalid(
                format!("qmax[{m}]"),
                "buffer size must be non-negative",
            ));
        }
        Ok(QueueState {
            level: vec![T::zero(); capacity.len()],
            capacity,
            ledger: None,
            slot: 0,
            delay_sum: 0.0,
            departed: 0.0,
        })
    }

    /// Equal buffers of `bits` at every relay.
    pub fn uniform(relays: usize, bits: T) -> Result<Self> {
        Self::new(vec![bits; relays])
    }

    /// Buffers large enough never to constrain any realistic run.
    pub fn unbounded(relays: usize) -> Self {
        Self::uniform(relays, T::infinity()).expect("infinite capacity is valid")
    }

    pub fn with_ledger(mut self) -> Self {
        self.ledger = Some(vec![VecDeque::new(); self.level.len()]);
        self
    }

    pub fn relays(&self) -> usize {
        self.level.len()
    }

    pub fn headroom(&self, m: usize) -> T {
        self.capacity[m] - self.level[m]
    }

    pub fn total(&self) -> T {
        self.level.iter().fold(T::zero(), |a, &b| a + b)
    }

    /// Slots stepped so far.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// Bits held by the FIFO ledger of relay `m`.
    pub fn ledger_bits(&self, m: usize) -> Option<T> {
        self.ledger
            .as_ref()
            .map(|l| l[m].iter().fold(T::zero(), |a, &(b, _)| a + b))
    }

    /// Mean slots a departed bit spent buffered, from the FIFO ledger.
    pub fn fifo_mean_delay(&self) -> Option<f64> {
        (self.ledger.is_some() && self.departed > 0.0).then(|| self.delay_sum / self.departed)
    }

    /// Advances one slot. Both limits use the occupancy at the start of the
    /// slot: a relay cannot forward bits it receives in the same slot, nor
    /// accept more than its free space even if it also sends.
    ///
    /// Returns the bits actually received and sent by each relay.
    pub fn step(&mut self, offered_in: &[T], offered_out: &[T]) -> (Vec<T>, Vec<T>) {
        let relays = self.relays();
        let mut received = vec![T::zero(); relays];
        let mut sent = vec![T::zero(); relays];
        for m in 0..relays {
            let q = self.level[m];
            let out = offered_out[m].min(q);
            let inn = offered_in[m].min(self.capacity[m] - q);
            let next = q - out + inn;
            debug_assert!(next >= -T::epsilon() * q.max(T::one()));
            self.level[m] = clamp_level(next, self.capacity[m]);
            received[m] = inn;
            sent[m] = out;
        }
        if let Some(ledger) = self.ledger.as_mut() {
            for m in 0..relays {
                let fifo = &mut ledger[m];
                let mut due = sent[m];
                while due > T::zero() {
                    let Some(front) = fifo.front_mut() else { break };
                    let take = front.0.min(due);
                    let age = (self.slot - front.1) as f64;
                    self.delay_sum += take.to_f64_lossy() * age;
                    self.departed += take.to_f64_lossy();
                    due = due - take;
                    front.0 = front.0 - take;
                    if front.0 <= T::zero() {
                        fifo.pop_front();
                    }
                }
                if received[m] > T::zero() {
                    fifo.push_back((received[m], self.slot));
                }
            }
        }
        self.slot += 1;
        (received, sent)
    }
}

fn clamp_level<T: Scalar>(x: T, cap: T) -> T {
    x.max(T::zero()).min(cap)
}

/// Scores capped by buffer state.
pub fn modified_metrics<T: Scalar>(
    c: &CapacityMatrix<T>,
    w: &BaWeights<T>,
    q: &QueueState<T>,
    rf_tx: RfTxMetric,
) -> Metrics<T> {
    let relays = c.relays();
    let rx = |row: &[T]| {
        (0..relays)
            .map(|m| w.lambda[m] * row[m].min(q.headroom(m)))
            .collect::<Vec<_>>()
    };
    let tx = |row: &[T]| {
        (0..relays)
            .map(|m| (T::one() - w.lambda[m]) * row[m].min(q.level[m]))
            .collect::<Vec<_>>()
    };
    let rf_tx_row = match rf_tx {
        RfTxMetric::SecondHop => &c.rf[1],
        RfTxMetric::FirstHop => &c.rf[0],
    };
    Metrics {
        fso: [rx(&c.fso[0]), tx(&c.fso[1])],
        rf: [rx(&c.rf[0]), tx(rf_tx_row)],
    }
}

pub fn select_delay_ba<T: Scalar>(
    c: &CapacityMatrix<T>,
    w: &BaWeights<T>,
    q: &QueueState<T>,
    rf_tx: RfTxMetric,
) -> BaDecision<T> {
    select_from_metrics(&modified_metrics(c, w, q, rf_tx))
}

/// Applies `decision` to `q` and returns the new state with the bits received
/// (`R1`) and sent (`R2`) per relay.
pub fn step_queue<T: Scalar>(
    q: &QueueState<T>,
    decision: &BaDecision<T>,
    c: &CapacityMatrix<T>,
) -> (QueueState<T>, Vec<T>, Vec<T>) {
    let mut next = q.clone();
    let (r1, r2) = step_with_decision(&mut next, decision, c);
    (next, r1, r2)
}

pub(crate) fn step_with_decision<T: Scalar>(
    q: &mut QueueState<T>,
    decision: &BaDecision<T>,
    c: &CapacityMatrix<T>,
) -> (Vec<T>, Vec<T>) {
    let relays = c.relays();
    let offered_in: Vec<T> = (0..relays).map(|m| decision.offered_in(c, m)).collect();
    let offered_out: Vec<T> = (0..relays).map(|m| decision.offered_out(c, m)).collect();
    q.step(&offered_in, &offered_out)
}

/// Per-slot record of a finite-buffer run.
#[derive(Debug, Clone, Default)]
pub struct DelayTrace {
    pub level: Vec<Vec<f64>>,
    pub received: Vec<Vec<f64>>,
    pub sent: Vec<Vec<f64>>,
}

/// Summary of a finite-buffer run.
#[derive(Debug, Clone)]
pub struct DelayRun {
    pub slots: usize,
    /// Mean delivered bits per slot.
    pub throughput: f64,
    /// Mean delay in slots by Little's law; `None` when nothing arrived.
    pub delay: Option<f64>,
    /// Mean delay of departed bits measured by the FIFO ledger.
    pub fifo_delay: Option<f64>,
    pub mean_level: Vec<f64>,
    pub mean_arrival: Vec<f64>,
    pub mean_departure: Vec<f64>,
    pub total_received: f64,
    pub total_sent: f64,
    pub final_buffered: f64,
    pub trace: Option<DelayTrace>,
}

/// Options for [`run_delay_ba`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DelayOptions {
    pub rf_tx: RfTxMetric,
    pub fifo_ledger: bool,
    pub keep_trace: bool,
}

/// Running accumulator shared by [`run_delay_ba`] and the engine.
#[derive(Debug, Clone)]
pub struct DelayRunner<T> {
    weights: BaWeights<T>,
    queue: QueueState<T>,
    opts: DelayOptions,
    sum_level: Vec<f64>,
    sum_in: Vec<f64>,
    sum_out: Vec<f64>,
    slots: usize,
    trace: Option<DelayTrace>,
}

impl<T: Scalar> DelayRunner<T> {
    pub fn new(weights: BaWeights<T>, qmax: Vec<T>, opts: DelayOptions) -> Result<Self> {
        if qmax.len() != weights.relays() {
            return Err(Error::Shape(format!(
                "{} buffer sizes for {} relays",
                qmax.len(),
                weights.relays()
            )));
        }
        let relays = qmax.len();
        let mut queue = QueueState::new(qmax)?;
        if opts.fifo_ledger {
            queue = queue.with_ledger();
        }
        Ok(DelayRunner {
            weights,
            queue,
            opts,
            sum_level: vec![0.0; relays],
            sum_in: vec![0.0; relays],
            sum_out: vec![0.0; relays],
            slots: 0,
            trace: opts.keep_trace.then(DelayTrace::default),
        })
    }

    pub fn queue(&self) -> &QueueState<T> {
        &self.queue
    }

    /// Selects, updates the buffers and returns the bits delivered this slot.
    pub fn step(&mut self, c: &CapacityMatrix<T>) -> T {
        self.step_flows(c).2
    }

    /// Like [`step`](Self::step) but also returns the bits each relay
    /// received and sent.
    pub fn step_flows(&mut self, c: &CapacityMatrix<T>) -> (Vec<T>, Vec<T>, T) {
        let d = select_delay_ba(c, &self.weights, &self.queue, self.opts.rf_tx);
        let (r1, r2) = step_with_decision(&mut self.queue, &d, c);
        let mut delivered = T::zero();
        for m in 0..r1.len() {
            self.sum_in[m] += r1[m].to_f64_lossy();
            self.sum_out[m] += r2[m].to_f64_lossy();
            self.sum_level[m] += self.queue.level[m].to_f64_lossy();
            delivered = delivered + r2[m];
        }
        if let Some(t) = self.trace.as_mut() {
            let f = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>();
            t.level.push(f(&self.queue.level));
            t.received.push(f(&r1));
            t.sent.push(f(&r2));
        }
        self.slots += 1;
        (r1, r2, delivered)
    }

    pub fn finish(self) -> DelayRun {
        let n = self.slots.max(1) as f64;
        let mean = |v: &[f64]| v.iter().map(|x| x / n).collect::<Vec<_>>();
        let mean_level = mean(&self.sum_level);
        let mean_arrival = mean(&self.sum_in);
        let mean_departure = mean(&self.sum_out);
        let total_received: f64 = self.sum_in.iter().sum();
        let total_sent: f64 = self.sum_out.iter().sum();
        let arrival_rate: f64 = mean_arrival.iter().sum();
        let delay = (arrival_rate > 0.0).then(|| mean_level.iter().sum::<f64>() / arrival_rate);
        DelayRun {
            slots: self.slots,
            throughput: if self.slots == 0 { 0.0 } else { total_sent / n },
            delay,
            fifo_delay: self.queue.fifo_mean_delay(),
            mean_level,
            mean_arrival,
            mean_departure,
            total_received,
            total_sent,
            final_buffered: self.queue.total().to_f64_lossy(),
            trace: self.trace,
        }
    }
}

/// Runs the finite-buffer policy over `trace`.
pub fn run_delay_ba<'a, T, I>(
    trace: I,
    w: &BaWeights<T>,
    qmax: Vec<T>,
    opts: DelayOptions,
) -> Result<DelayRun>
where
    T: Scalar,
    I: IntoIterator<Item = &'a CapacityMatrix<T>>,
{
    let mut runner = DelayRunner::new(w.clone(), qmax, opts)?;
    for c in trace {
        runner.step(c);
    }
    Ok(runner.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ba::select_ba;

    type C = CapacityMatrix<f64>;

    #[test]
    fn step_uses_pre_slot_occupancy() {
        let mut q = QueueState::new(vec![7.0]).unwrap();
        q.level[0] = 5.0;
        let (r1, r2) = q.step(&[3.0], &[4.0]);
        assert_eq!((r1[0], r2[0], q.level[0]), (2.0, 4.0, 3.0));
    }

    #[test]
    fn idle_and_empty_relays() {
        let mut q = QueueState::new(vec![10.0, 10.0]).unwrap();
        q.level[1] = 4.0;
        let (_, sent) = q.step(&[0.0, 0.0], &[10.0, 0.0]);
        assert_eq!(sent[0], 0.0);
        assert_eq!(q.level[1], 4.0);
    }

    #[test]
    fn metrics_respect_buffer_limits() {
        let c = C::from_rows(&[5.0, 5.0], &[5.0, 5.0], &[3.0, 3.0], &[3.0, 3.0]);
        let w = BaWeights::uniform(2, 0.5);
        let mut q = QueueState::new(vec![8.0, 8.0]).unwrap();
        q.level = vec![8.0, 0.0];
        let m = modified_metrics(&c, &w, &q, RfTxMetric::SecondHop);
        assert_eq!(m.fso[0][0], 0.0);
        assert_eq!(m.rf[0][0], 0.0);
        assert_eq!(m.fso[1][1], 0.0);
        assert_eq!(m.rf[1][1], 0.0);
    }

    #[test]
    fn unbounded_buffers_reduce_to_plain_weights() {
        let c = C::from_rows(&[5.0, 9.0], &[6.0, 2.0], &[1.0, 3.0], &[4.0, 2.0]);
        let w = BaWeights::new(vec![0.4, 0.6]).unwrap();
        let mut q = QueueState::unbounded(2);
        q.level = vec![1e12, 1e12];
        assert_eq!(
            select_delay_ba(&c, &w, &q, RfTxMetric::SecondHop),
            select_ba(&c, &w)
        );
    }

    #[test]
    fn fifo_ledger_tracks_ages() {
        let mut q = QueueState::new(vec![100.0]).unwrap().with_ledger();
        q.step(&[10.0], &[0.0]); // slot 0: 10 bits arrive
        q.step(&[0.0], &[4.0]); // slot 1: 4 leave after 1 slot
        q.step(&[0.0], &[0.0]);
        q.step(&[0.0], &[6.0]); // slot 3: 6 leave after 3 slots
        assert_eq!(q.ledger_bits(0), Some(0.0));
        let expected = (4.0 * 1.0 + 6.0 * 3.0) / 10.0;
        assert!((q.fifo_mean_delay().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_buffer_carries_nothing() {
        let c = C::from_rows(&[5.0], &[5.0], &[1.0], &[1.0]);
        let trace = vec![c; 50];
        let run = run_delay_ba(
            &trace,
            &BaWeights::uniform(1, 0.5),
            vec![0.0],
            DelayOptions::default(),
        )
        .unwrap();
        assert_eq!(run.throughput, 0.0);
        assert!(run.delay.is_none());
    }

    #[test]
    fn constant_rates_give_queue_over_rate() {
        // one relay alternating: fill 4 bits, send 4 bits, with Q steady
        let mut q = QueueState::new(vec![100.0]).unwrap();
        q.level[0] = 6.0;
        let mut sum_q = 0.0f64;
        let mut sum_in = 0.0;
        for _ in 0..1000 {
            let (r1, _) = q.step(&[4.0], &[4.0]);
            sum_q += q.level[0];
            sum_in += r1[0];
        }
        assert!((sum_q / sum_in - 6.0 / 4.0).abs() < 1e-12);
    }
}
