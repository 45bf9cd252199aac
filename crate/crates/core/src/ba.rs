//! Buffer-aided relay selection driven by per-relay Lagrange weights.
//!
//! With buffers the relays decouple reception from transmission, so the
//! long-run problem becomes a linear program whose dual gives a weight
//! `lambda_m` per relay. Per slot, reception on relay `m` is scored
//! `lambda_m * C1` and transmission `(1 - lambda_m) * C2`; the FSO receiver,
//! FSO transmitter and the single active RF link are each the argmax of their
//! score. The weights are trained offline by projected stochastic subgradient
//! descent on the dual.

use std::collections::VecDeque;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{CapacityMatrix, Hop};
use crate::error::{Error, Result};
use crate::scalar::{argmax, clamp, Scalar};
use crate::source::{stream_rng, SlotSource};

/// Per-relay selection weights plus a record of how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct BaWeights<T> {
    pub lambda: Vec<T>,
    pub trace: TrainingTrace,
}

/// Diagnostics of a training run. Rates are averages of served bits per slot
/// over the second half of the iterations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub initial_step: f64,
    pub final_step: f64,
    pub arrival: Vec<f64>,
    pub departure: Vec<f64>,
    /// `arrival - departure` per relay.
    pub residual: Vec<f64>,
}

impl<T: Scalar> BaWeights<T> {
    pub fn uniform(relays: usize, lambda: T) -> Self {
        BaWeights {
            lambda: vec![lambda; relays],
            trace: TrainingTrace::default(),
        }
    }

    pub fn new(lambda: Vec<T>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::invalid("lambda", "need at least one relay"));
        }
        if let Some((m, l)) = lambda
            .iter()
            .enumerate()
            .find(|(_, l)| !(**l >= T::zero() && **l <= T::one()))
        {
            return Err(Error::invalid(
                format!("lambda[{m}]"),
                format!("{l:?} is outside [0, 1]"),
            ));
        }
        Ok(BaWeights {
            lambda,
            trace: TrainingTrace::default(),
        })
    }

    pub fn relays(&self) -> usize {
        self.lambda.len()
    }

    /// Serializes as a TOML key-value document.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            lambda: Vec<f64>,
            trace: &'a TrainingTrace,
        }
        let doc = Doc {
            lambda: self.lambda.iter().map(|l| l.to_f64_lossy()).collect(),
            trace: &self.trace,
        };
        toml::to_string(&doc).expect("weights serialize to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            lambda: Vec<f64>,
            #[serde(default)]
            trace: TrainingTrace,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::Parse {
            what: "weights file".into(),
            reason: e.to_string(),
        })?;
        let mut w = Self::new(doc.lambda.into_iter().map(T::lit).collect())?;
        w.trace = doc.trace;
        Ok(w)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Weighted link scores: `[0]` reception (first hop), `[1]` transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics<T> {
    pub fso: [Vec<T>; 2],
    pub rf: [Vec<T>; 2],
}

/// One slot of buffer-aided selection. The RF band serves a single direction
/// for the whole slot, so `rho1` is either 0 or 1; the idle RF direction's
/// relay index is 0 and carries no traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaDecision<T> {
    pub fso: [usize; 2],
    pub rf: [usize; 2],
    pub rho1: T,
}

impl<T: Scalar> BaDecision<T> {
    pub fn rf_hop(&self) -> Hop {
        if self.rho1 == T::one() {
            Hop::First
        } else {
            Hop::Second
        }
    }

    /// Relay whose RF link is active.
    pub fn rf_relay(&self) -> usize {
        self.rf[self.rf_hop().index()]
    }

    /// Bits relay `m` is offered on its incoming links.
    pub fn offered_in(&self, c: &CapacityMatrix<T>, m: usize) -> T {
        let mut x = T::zero();
        if self.fso[0] == m {
            x = x + c.fso(Hop::First, m);
        }
        if self.rf_hop() == Hop::First && self.rf[0] == m {
            x = x + c.rf(Hop::First, m);
        }
        x
    }

    /// Bits relay `m` may send on its outgoing links.
    pub fn offered_out(&self, c: &CapacityMatrix<T>, m: usize) -> T {
        let mut x = T::zero();
        if self.fso[1] == m {
            x = x + c.fso(Hop::Second, m);
        }
        if self.rf_hop() == Hop::Second && self.rf[1] == m {
            x = x + c.rf(Hop::Second, m);
        }
        x
    }

    pub fn distinct_relays(&self) -> usize {
        let mut v = vec![self.fso[0], self.fso[1], self.rf_relay()];
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

pub fn selection_metrics<T: Scalar>(c: &CapacityMatrix<T>, w: &BaWeights<T>) -> Metrics<T> {
    let rx = |row: &[T]| {
        row.iter()
            .zip(&w.lambda)
            .map(|(&x, &l)| l * x)
            .collect::<Vec<_>>()
    };
    let tx = |row: &[T]| {
        row.iter()
            .zip(&w.lambda)
            .map(|(&x, &l)| (T::one() - l) * x)
            .collect::<Vec<_>>()
    };
    Metrics {
        fso: [rx(&c.fso[0]), tx(&c.fso[1])],
        rf: [rx(&c.rf[0]), tx(&c.rf[1])],
    }
}

/// Argmax selection on precomputed scores. RF ties go to reception, then to
/// the lowest relay index.
pub fn select_from_metrics<T: Scalar>(metrics: &Metrics<T>) -> BaDecision<T> {
    let fso = [argmax(&metrics.fso[0]), argmax(&metrics.fso[1])];
    let rx = argmax(&metrics.rf[0]);
    let tx = argmax(&metrics.rf[1]);
    if metrics.rf[0][rx] >= metrics.rf[1][tx] {
        BaDecision {
            fso,
            rf: [rx, 0],
            rho1: T::one(),
        }
    } else {
        BaDecision {
            fso,
            rf: [0, tx],
            rho1: T::zero(),
        }
    }
}

pub fn select_ba<T: Scalar>(c: &CapacityMatrix<T>, w: &BaWeights<T>) -> BaDecision<T> {
    select_from_metrics(&selection_metrics(c, w))
}

/// Subgradient training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Maximum number of subgradient iterations.
    pub iterations: usize,
    /// Fresh fading draws per iteration.
    pub samples: usize,
    /// First step size; `None` picks it so the first update moves the
    /// weights by at most 0.1.
    pub initial_step: Option<f64>,
    /// Stop once every weight moved less than this for `window` iterations.
    pub tolerance: f64,
    pub window: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            iterations: 400,
            samples: 2000,
            initial_step: None,
            tolerance: 1e-4,
            window: 10,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("training.iterations", "must be at least 1"));
        }
        if self.samples == 0 {
            return Err(Error::invalid("training.samples", "must be at least 1"));
        }
        if let Some(e) = self.initial_step {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::invalid("training.initial_step", "must be positive"));
            }
        }
        if self.window == 0 {
            return Err(Error::invalid("training.window", "must be at least 1"));
        }
        Ok(())
    }
}

/// Served bits per relay, averaged over a batch of slots.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAverages {
    pub arrival: Vec<f64>,
    pub departure: Vec<f64>,
}

impl FlowAverages {
    pub fn zeros(relays: usize) -> Self {
        FlowAverages {
            arrival: vec![0.0; relays],
            departure: vec![0.0; relays],
        }
    }

    pub(crate) fn add_slot<T: Scalar>(&mut self, c: &CapacityMatrix<T>, d: &BaDecision<T>) {
        self.arrival[d.fso[0]] += c.fso(Hop::First, d.fso[0]).to_f64_lossy();
        self.departure[d.fso[1]] += c.fso(Hop::Second, d.fso[1]).to_f64_lossy();
        let m = d.rf_relay();
        match d.rf_hop() {
            Hop::First => self.arrival[m] += c.rf(Hop::First, m).to_f64_lossy(),
            Hop::Second => self.departure[m] += c.rf(Hop::Second, m).to_f64_lossy(),
        }
    }

    fn scale(&mut self, s: f64) {
        self.arrival
            .iter_mut()
            .chain(self.departure.iter_mut())
            .for_each(|x| *x *= s);
    }

    /// `sum_m min(arrival_m, departure_m)`.
    pub fn throughput(&self) -> f64 {
        self.arrival
            .iter()
            .zip(&self.departure)
            .map(|(a, d)| a.min(*d))
            .sum()
    }
}

/// Draws per random-number stream within one iteration. Fixing the chunking
/// keeps training reproducible whatever the thread count.
const CHUNK: usize = 256;

fn iteration_averages<T, S>(
    source: &S,
    w: &BaWeights<T>,
    samples: usize,
    seed: u64,
    iteration: usize,
) -> FlowAverages
where
    T: Scalar,
    S: SlotSource<T>,
{
    use rayon::prelude::*;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<FlowAverages> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, ((iteration as u64) << 24) | k as u64);
            let n = CHUNK.min(samples - k * CHUNK);
            let mut acc = FlowAverages::zeros(source.relays());
            for _ in 0..n {
                let c = source.draw(&mut rng);
                acc.add_slot(&c, &select_ba(&c, w));
            }
            acc
        })
        .collect();
    let mut total = FlowAverages::zeros(source.relays());
    for p in parts {
        for m in 0..total.arrival.len() {
            total.arrival[m] += p.arrival[m];
            total.departure[m] += p.departure[m];
        }
    }
    total.scale(1.0 / samples as f64);
    total
}

/// Trains the weights by projected stochastic subgradient descent, starting
/// from `lambda = 0.5` with step `e0 / sqrt(k)`. Returns the average of the
/// iterates over the second half of the run.
pub fn train_lambda<T, S>(source: &S, cfg: &TrainingConfig) -> Result<BaWeights<T>>
where
    T: Scalar,
    S: SlotSource<T>,
{
    cfg.validate()?;
    let relays = source.relays();
    let mut w = BaWeights::uniform(relays, T::half());
    let mut history: Vec<FlowAverages> = Vec::new();
    let mut iterates: Vec<Vec<T>> = Vec::new();
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(cfg.window);
    let mut e0 = cfg.initial_step.unwrap_or(0.0);
    let mut step = e0;
    let mut converged = false;

    for k in 1..=cfg.iterations {
        let avg = iteration_averages(source, &w, cfg.samples, cfg.seed, k);
        iterates.push(w.lambda.clone());
        let grad: Vec<f64> = avg
            .arrival
            .iter()
            .zip(&avg.departure)
            .map(|(a, d)| a - d)
            .collect();
        if k == 1 && cfg.initial_step.is_none() {
            let largest = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
            e0 = if largest > 0.0 { 0.1 / largest } else { 0.0 };
        }
        step = e0 / (k as f64).sqrt();
        let mut moved = 0.0f64;
        for (l, g) in w.lambda.iter_mut().zip(&grad) {
            let next = clamp(*l - T::lit(step * g), T::zero(), T::one());
            moved = moved.max((next - *l).abs().to_f64_lossy());
            *l = next;
        }
        history.push(avg);
        if recent.len() == cfg.window {
            recent.pop_front();
        }
        recent.push_back(moved);
        if recent.len() == cfg.window && recent.iter().all(|&x| x < cfg.tolerance) {
            converged = true;
            break;
        }
    }

    let tail = &history[history.len() / 2..];
    let mut mean = FlowAverages::zeros(relays);
    for h in tail {
        for m in 0..relays {
            mean.arrival[m] += h.arrival[m];
            mean.departure[m] += h.departure[m];
        }
    }
    mean.scale(1.0 / tail.len() as f64);
    // The last iterate can sit on the clip boundary where selection ties
    // degenerate; the average of the iterates behind the tail flows cannot.
    let lambda_tail = &iterates[iterates.len() / 2..];
    let n = T::lit(lambda_tail.len() as f64);
    for m in 0..relays {
        w.lambda[m] = lambda_tail.iter().fold(T::zero(), |a, l| a + l[m]) / n;
    }
    w.trace = TrainingTrace {
        iterations: history.len(),
        converged,
        seed: cfg.seed,
        initial_step: e0,
        final_step: step,
        residual: mean
            .arrival
            .iter()
            .zip(&mean.departure)
            .map(|(a, d)| a - d)
            .collect(),
        arrival: mean.arrival,
        departure: mean.departure,
    };
    Ok(w)
}

/// Long-run throughput of buffer-aided selection with weights `w` over the
/// given capacity trace.
pub fn ba_flows<'a, T, I>(trace: I, w: &BaWeights<T>) -> FlowAverages
where
    T: Scalar,
    I: IntoIterator<Item = &'a CapacityMatrix<T>>,
{
    let mut acc = FlowAverages::zeros(w.relays());
    let mut slots = 0usize;
    for c in trace {
        acc.add_slot(c, &select_ba(c, w));
        slots += 1;
    }
    if slots > 0 {
        acc.scale(1.0 / slots as f64);
    }
    acc
}

/// Trained weights nudged by a per-relay virtual backlog.
///
/// Saturated optical links leave many slots nearly tied, and fixed weights
/// settle every such tie the same way, which floods some relays and starves
/// others. The backlog of offered arrivals minus offered departures shifts
/// each weight by `-backlog / (horizon * scale)`, where `scale` is the running
/// mean of the bits offered per slot, so long-run flows balance. A zero
/// horizon keeps the weights fixed.
#[derive(Debug, Clone)]
pub struct BaTracker<T> {
    base: Vec<T>,
    weights: BaWeights<T>,
    backlog: Vec<f64>,
    horizon: f64,
    offered: f64,
    slots: usize,
}

impl<T: Scalar> BaTracker<T> {
    pub fn new(weights: BaWeights<T>, horizon: usize) -> Self {
        BaTracker {
            base: weights.lambda.clone(),
            backlog: vec![0.0; weights.relays()],
            weights,
            horizon: horizon as f64,
            offered: 0.0,
            slots: 0,
        }
    }

    /// Weights in force for the next slot.
    pub fn weights(&self) -> &BaWeights<T> {
        &self.weights
    }

    pub fn step(&mut self, c: &CapacityMatrix<T>) -> BaDecision<T> {
        let d = select_ba(c, &self.weights);
        if self.horizon == 0.0 {
            return d;
        }
        for m in 0..self.backlog.len() {
            let a = d.offered_in(c, m).to_f64_lossy();
            let b = d.offered_out(c, m).to_f64_lossy();
            self.backlog[m] += a - b;
            self.offered += a + b;
        }
        self.slots += 1;
        let scale = self.horizon * self.offered / self.slots as f64;
        if scale > 0.0 {
            for m in 0..self.backlog.len() {
                self.backlog[m] = self.backlog[m].clamp(-scale, scale);
                let shift = T::lit(self.backlog[m] / scale);
                self.weights.lambda[m] = clamp(self.base[m] - shift, T::zero(), T::one());
            }
        }
        d
    }
}

/// Like [`ba_flows`] with the weights tracked over the trace.
pub fn ba_flows_tracked<'a, T, I>(trace: I, w: &BaWeights<T>, horizon: usize) -> FlowAverages
where
    T: Scalar,
    I: IntoIterator<Item = &'a CapacityMatrix<T>>,
{
    let mut tracker = BaTracker::new(w.clone(), horizon);
    let mut acc = FlowAverages::zeros(w.relays());
    let mut slots = 0usize;
    for c in trace {
        let d = tracker.step(c);
        acc.add_slot(c, &d);
        slots += 1;
    }
    if slots > 0 {
        acc.scale(1.0 / slots as f64);
    }
    acc
}

/// `sum_m min(mean arrival, mean departure)` over `slots` fresh draws.
pub fn ba_throughput<T, S, R>(
    source: &S,
    w: &BaWeights<T>,
    slots: usize,
    rng: &mut R,
) -> FlowAverages
where
    T: Scalar,
    S: SlotSource<T>,
    R: Rng + ?Sized,
{
    let mut acc = FlowAverages::zeros(w.relays());
    for _ in 0..slots {
        let c = source.draw(rng);
        acc.add_slot(&c, &select_ba(&c, w));
    }
    if slots > 0 {
        acc.scale(1.0 / slots as f64);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::FixedCapacities;

    type C = CapacityMatrix<f64>;

    #[test]
    fn metric_products() {
        let c = C::from_rows(&[10.0, 4.0], &[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]);
        let w = BaWeights::new(vec![0.3, 0.7]).unwrap();
        let m = selection_metrics(&c, &w);
        assert!((m.fso[0][0] - 3.0).abs() < 1e-12);
        assert!((m.fso[0][1] - 2.8).abs() < 1e-12);
        assert_eq!(select_ba(&c, &w).fso[0], 0);
    }

    #[test]
    fn boundary_weights() {
        let c = C::from_rows(&[3.0, 9.0], &[5.0, 7.0], &[1.0, 1.0], &[1.0, 1.0]);
        let d = select_ba(&c, &BaWeights::uniform(2, 1.0));
        assert_eq!(d.fso, [1, 0]);
        let zero = selection_metrics(&c, &BaWeights::uniform(2, 0.0));
        assert!(zero.fso[0].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rf_tie_goes_to_reception() {
        let c = C::from_rows(&[1.0], &[1.0], &[4.0], &[4.0]);
        let d = select_ba(&c, &BaWeights::uniform(1, 0.5));
        assert_eq!(d.rho1, 1.0);
        assert_eq!(d.rf_hop(), Hop::First);
    }

    #[test]
    fn weights_round_trip_through_toml() {
        let mut w = BaWeights::new(vec![0.25, 0.75]).unwrap();
        w.trace.iterations = 7;
        w.trace.residual = vec![0.5, -0.5];
        let back: BaWeights<f64> = BaWeights::from_toml(&w.to_toml()).unwrap();
        assert_eq!(back, w);
        assert!(BaWeights::<f64>::from_toml("lambda = [1.5]").is_err());
        assert!(BaWeights::<f64>::from_toml("lambda = ").is_err());
    }

    #[test]
    fn single_relay_bottleneck_pushes_weight_to_one() {
        // a < b: the relay always has more to send than to receive
        let c = C::from_rows(&[3.0], &[8.0], &[0.0], &[0.0]);
        let cfg = TrainingConfig {
            iterations: 100,
            samples: 1,
            ..Default::default()
        };
        let w = train_lambda(&FixedCapacities(c), &cfg).unwrap();
        assert_eq!(w.lambda[0], 1.0);
        assert!((w.trace.residual[0] - (3.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn rf_only_relay_time_shares_directions() {
        let c = C::from_rows(&[0.0], &[0.0], &[30.0], &[60.0]);
        let cfg = TrainingConfig {
            iterations: 4000,
            samples: 1,
            ..Default::default()
        };
        let w = train_lambda(&FixedCapacities(c), &cfg).unwrap();
        let t = &w.trace;
        let share = t.arrival[0] / 30.0;
        assert!((share - 2.0 / 3.0).abs() < 0.01, "share {share}");
        assert!((t.arrival[0].min(t.departure[0]) - 20.0).abs() < 0.3);
        assert!((w.lambda[0] - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn zero_slots_and_zero_capacities() {
        let w = BaWeights::uniform(2, 0.5);
        let src = FixedCapacities(C::zeros(2));
        let mut rng = stream_rng(0, 0);
        assert_eq!(ba_throughput(&src, &w, 0, &mut rng).throughput(), 0.0);
        assert_eq!(ba_throughput(&src, &w, 10, &mut rng).throughput(), 0.0);
    }
}
