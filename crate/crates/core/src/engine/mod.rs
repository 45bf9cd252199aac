//! Monte-Carlo engine: every policy of a scenario is stepped on the same
//! fading trace, sweep point by sweep point and seed by seed.

mod report;
mod scenario;

pub use report::{summary_table, write_aggregates, write_records, write_relays};
pub use scenario::{
    LinkOverride, LinkSpec, NetworkSpec, PointConfig, PolicyKind, PolicySettings, RunSettings,
    Scenario, Sweep, SweepAxis,
};

use rayon::prelude::*;

use crate::ba::{train_lambda, BaTracker, BaWeights, FlowAverages, TrainingConfig};
use crate::benchmarks::{half_slot_rf_choice, maxmin_fso_choice, BaBenchmark, BenchmarkKind};
use crate::channels::{CapacityMatrix, ChannelModel};
use crate::delay::{DelayOptions, DelayRunner, QueueState};
use crate::error::{Error, Result};
use crate::nonba::{select_nonba_with, MixedRule, Mode};
use crate::source::stream_rng;

/// Result of one policy on one (sweep point, seed) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRecord {
    pub policy: PolicyKind,
    pub point: usize,
    pub axis_value: f64,
    pub seed: u64,
    pub slots: usize,
    /// Mean end-to-end bits per second.
    pub throughput: f64,
    /// Batch-means standard error of `throughput`.
    pub stderr: f64,
    /// Little's-law delay in slots (finite-buffer policy only).
    pub delay: Option<f64>,
    pub fifo_delay: Option<f64>,
    /// Share of slots in hybrid, independent and mixed mode (non-buffered
    /// optimal policy only).
    pub modes: Option<[f64; 3]>,
    pub arrival: Vec<f64>,
    pub departure: Vec<f64>,
}

/// A policy at one sweep point, combined over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRecord {
    pub policy: PolicyKind,
    pub point: usize,
    pub axis_value: f64,
    pub seeds: usize,
    pub slots: usize,
    pub throughput: f64,
    /// Standard error across seeds, or the batch-means error for one seed.
    pub stderr: f64,
    pub delay: Option<f64>,
    pub modes: Option<[f64; 3]>,
}

#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub scenario: String,
    pub axis: SweepAxis,
    pub records: Vec<PolicyRecord>,
    pub aggregates: Vec<AggregateRecord>,
    /// Trained weights per sweep point, when a policy needed them.
    pub weights: Vec<Option<BaWeights<f64>>>,
}

impl RunMetrics {
    pub fn aggregate(&self, policy: PolicyKind, point: usize) -> Option<&AggregateRecord> {
        self.aggregates
            .iter()
            .find(|a| a.policy == policy && a.point == point)
    }
}

/// Fractions of hybrid, independent and mixed decisions.
pub fn mode_histogram(modes: &[Mode]) -> Option<[f64; 3]> {
    if modes.is_empty() {
        return None;
    }
    let mut h = [0.0; 3];
    for m in modes {
        h[m.index()] += 1.0;
    }
    Some(h.map(|x| x / modes.len() as f64))
}

/// Mean and standard error of the mean. One sample has no spread estimate.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Training settings for sweep point `point`.
pub fn point_training(base: &TrainingConfig, point: usize) -> TrainingConfig {
    TrainingConfig {
        seed: base.seed.wrapping_add(point as u64),
        ..base.clone()
    }
}

/// Runs the scenario, training weights at each point when needed.
pub fn run_scenario(s: &Scenario) -> Result<RunMetrics> {
    run_scenario_with(s, None)
}

/// Runs the scenario with optional pre-trained weights, one per sweep point.
pub fn run_scenario_with(s: &Scenario, weights: Option<&[BaWeights<f64>]>) -> Result<RunMetrics> {
    s.validate()?;
    let points = s.points()?;
    if let Some(w) = weights {
        if w.len() != points.len() {
            return Err(Error::Shape(format!(
                "{} weight sets for {} sweep points",
                w.len(),
                points.len()
            )));
        }
        for (w, p) in w.iter().zip(&points) {
            if w.relays() != p.network.relays() {
                return Err(Error::Shape(format!(
                    "weights for {} relays at a {}-relay point",
                    w.relays(),
                    p.network.relays()
                )));
            }
        }
    }
    let models: Vec<ChannelModel> = points
        .iter()
        .map(|p| ChannelModel::new(&p.network))
        .collect::<Result<_>>()?;
    let policies = dedup(&s.policies.include);
    let needs = policies.iter().any(|p| p.needs_weights());

    let trained: Vec<Option<BaWeights<f64>>> = match weights {
        Some(w) => w.iter().cloned().map(Some).collect(),
        None if needs && s.run.slots > 0 => models
            .iter()
            .enumerate()
            .map(|(i, m)| train_lambda(m, &point_training(&s.training, i)).map(Some))
            .collect::<Result<_>>()?,
        None => vec![None; points.len()],
    };

    let mut records = Vec::new();
    if s.run.slots > 0 {
        let jobs: Vec<(usize, u64)> = (0..points.len())
            .flat_map(|p| s.run.seeds.iter().map(move |&seed| (p, seed)))
            .collect();
        let results: Vec<Vec<PolicyRecord>> = jobs
            .par_iter()
            .map(|&(p, seed)| {
                simulate(
                    s,
                    &policies,
                    &points[p],
                    p,
                    &models[p],
                    trained[p].as_ref(),
                    seed,
                )
            })
            .collect::<Result<_>>()?;
        records = results.into_iter().flatten().collect();
    }

    let mut aggregates = Vec::new();
    for p in 0..points.len() {
        for &policy in &policies {
            let rs: Vec<&PolicyRecord> = records
                .iter()
                .filter(|r| r.point == p && r.policy == policy)
                .collect();
            if let Some(agg) = aggregate(&rs) {
                aggregates.push(agg);
            }
        }
    }

    Ok(RunMetrics {
        scenario: s.name.clone(),
        axis: s.sweep.axis,
        records,
        aggregates,
        weights: trained,
    })
}

fn dedup(ps: &[PolicyKind]) -> Vec<PolicyKind> {
    let mut out = Vec::new();
    for p in ps {
        if !out.contains(p) {
            out.push(*p);
        }
    }
    out
}

fn aggregate(rs: &[&PolicyRecord]) -> Option<AggregateRecord> {
    let first = rs.first()?;
    let tps: Vec<f64> = rs.iter().map(|r| r.throughput).collect();
    let (throughput, across) = mean_stderr(&tps);
    let stderr = if rs.len() == 1 { first.stderr } else { across };
    let delays: Vec<f64> = rs.iter().filter_map(|r| r.delay).collect();
    let modes = first.modes.map(|_| {
        let mut h = [0.0; 3];
        for r in rs {
            let m = r.modes.unwrap_or_default();
            for i in 0..3 {
                h[i] += m[i] / rs.len() as f64;
            }
        }
        h
    });
    Some(AggregateRecord {
        policy: first.policy,
        point: first.point,
        axis_value: first.axis_value,
        seeds: rs.len(),
        slots: first.slots,
        throughput,
        stderr,
        delay: (!delays.is_empty()).then(|| mean_stderr(&delays).0),
        modes,
    })
}

/// Per-slot state of one policy.
enum Runner {
    NonBa { rule: MixedRule, modes: [u64; 3] },
    MaxMinFso,
    Independent,
    Ba(BaTracker<f64>),
    Delay(Box<DelayRunner<f64>>),
    Buffered(BaBenchmark<f64>),
}

impl Runner {
    /// Steps one slot, adds per-relay flows and returns the delivered bits.
    /// For the infinite-buffer policy the return value is the offered
    /// departure, which only matters through the batch flow balance.
    fn step(&mut self, c: &CapacityMatrix<f64>, arr: &mut [f64], dep: &mut [f64]) -> f64 {
        match self {
            Runner::NonBa { rule, modes } => {
                let d = select_nonba_with(c, *rule);
                modes[d.mode.index()] += 1;
                for (m, r) in d.rates.iter().enumerate() {
                    arr[m] += r;
                    dep[m] += r;
                }
                d.total
            }
            Runner::MaxMinFso => {
                let (m, r) = maxmin_fso_choice(c);
                arr[m] += r;
                dep[m] += r;
                r
            }
            Runner::Independent => {
                let (m, r) = maxmin_fso_choice(c);
                let (n, q) = half_slot_rf_choice(c);
                arr[m] += r;
                dep[m] += r;
                arr[n] += q;
                dep[n] += q;
                r + q
            }
            Runner::Ba(t) => {
                let d = t.step(c);
                let mut acc = FlowAverages::zeros(c.relays());
                acc.add_slot(c, &d);
                for m in 0..arr.len() {
                    arr[m] += acc.arrival[m];
                    dep[m] += acc.departure[m];
                }
                0.0
            }
            Runner::Delay(r) => {
                let (r1, r2, delivered) = r.step_flows(c);
                for m in 0..arr.len() {
                    arr[m] += r1[m];
                    dep[m] += r2[m];
                }
                delivered
            }
            Runner::Buffered(b) => {
                let (r1, r2) = b.step_flows(c);
                for m in 0..arr.len() {
                    arr[m] += r1[m];
                    dep[m] += r2[m];
                }
                r2.iter().sum()
            }
        }
    }
}

fn make_runner(
    s: &Scenario,
    policy: PolicyKind,
    relays: usize,
    qmax: f64,
    weights: Option<&BaWeights<f64>>,
) -> Result<Runner> {
    let need = || {
        weights.cloned().ok_or_else(|| {
            Error::invalid(
                "policies.include",
                format!("{policy} needs trained weights"),
            )
        })
    };
    Ok(match policy {
        PolicyKind::NonBa => Runner::NonBa {
            rule: s.policies.mixed_rule,
            modes: [0; 3],
        },
        PolicyKind::NonBaAllOrNothing => Runner::NonBa {
            rule: MixedRule::AllOrNothing,
            modes: [0; 3],
        },
        PolicyKind::NonBaMaxMinFso => Runner::MaxMinFso,
        PolicyKind::NonBaIndependent => Runner::Independent,
        PolicyKind::Ba => Runner::Ba(BaTracker::new(need()?, s.policies.ba_tracking_horizon)),
        PolicyKind::DelayBa => {
            let opts = DelayOptions {
                rf_tx: s.policies.rf_tx_metric,
                fifo_ledger: s.run.fifo_ledger,
                keep_trace: false,
            };
            Runner::Delay(Box::new(DelayRunner::new(
                need()?,
                vec![qmax; relays],
                opts,
            )?))
        }
        PolicyKind::BaBestFso | PolicyKind::BaIndependent => {
            let kind = if policy == PolicyKind::BaBestFso {
                BenchmarkKind::BaBestFsoOnly
            } else {
                BenchmarkKind::BaIndependent
            };
            let q = QueueState::uniform(relays, s.run.benchmark_qmax)?;
            Runner::Buffered(BaBenchmark::new(kind, q, s.policies.benchmark_rf_split))
        }
    })
}

struct Tally {
    arr: Vec<f64>,
    dep: Vec<f64>,
    batch_arr: Vec<f64>,
    batch_dep: Vec<f64>,
    batch_delivered: f64,
    batch_slots: usize,
    batch_rates: Vec<f64>,
}

impl Tally {
    fn new(relays: usize) -> Self {
        Tally {
            arr: vec![0.0; relays],
            dep: vec![0.0; relays],
            batch_arr: vec![0.0; relays],
            batch_dep: vec![0.0; relays],
            batch_delivered: 0.0,
            batch_slots: 0,
            batch_rates: Vec::new(),
        }
    }

    fn close_batch(&mut self, flow_balance: bool) {
        if self.batch_slots == 0 {
            return;
        }
        let n = self.batch_slots as f64;
        let rate = if flow_balance {
            self.batch_arr
                .iter()
                .zip(&self.batch_dep)
                .map(|(a, d)| a.min(*d))
                .sum::<f64>()
                / n
        } else {
            self.batch_delivered / n
        };
        self.batch_rates.push(rate);
        for m in 0..self.arr.len() {
            self.arr[m] += self.batch_arr[m];
            self.dep[m] += self.batch_dep[m];
        }
        self.batch_arr
            .iter_mut()
            .chain(self.batch_dep.iter_mut())
            .for_each(|x| *x = 0.0);
        self.batch_delivered = 0.0;
        self.batch_slots = 0;
    }
}

fn simulate(
    s: &Scenario,
    policies: &[PolicyKind],
    point: &PointConfig,
    index: usize,
    model: &ChannelModel,
    weights: Option<&BaWeights<f64>>,
    seed: u64,
) -> Result<Vec<PolicyRecord>> {
    let relays = model.relays();
    let slots = s.run.slots;
    let mut runners: Vec<Runner> = policies
        .iter()
        .map(|&p| make_runner(s, p, relays, point.qmax, weights))
        .collect::<Result<_>>()?;
    let mut tallies: Vec<Tally> = policies.iter().map(|_| Tally::new(relays)).collect();
    let batches = s.run.batches.min(slots).max(1);
    let mut rng = stream_rng(seed, 0);

    for t in 0..slots {
        let c: CapacityMatrix<f64> = model.sample_capacities(&mut rng);
        for (r, tally) in runners.iter_mut().zip(tallies.iter_mut()) {
            tally.batch_delivered += r.step(&c, &mut tally.batch_arr, &mut tally.batch_dep);
            tally.batch_slots += 1;
        }
        // batch boundaries split the slots as evenly as possible
        if (t + 1) * batches / slots != t * batches / slots || t + 1 == slots {
            for (p, tally) in policies.iter().zip(tallies.iter_mut()) {
                tally.close_batch(*p == PolicyKind::Ba);
            }
        }
    }

    let n = slots as f64;
    let mut out = Vec::with_capacity(policies.len());
    for ((&policy, runner), tally) in policies.iter().zip(runners).zip(tallies) {
        let arrival: Vec<f64> = tally.arr.iter().map(|x| x / n).collect();
        let departure: Vec<f64> = tally.dep.iter().map(|x| x / n).collect();
        let (_, stderr) = mean_stderr(&tally.batch_rates);
        let (throughput, delay, fifo_delay, modes) = match runner {
            Runner::Ba(_) => (
                arrival.iter().zip(&departure).map(|(a, d)| a.min(*d)).sum(),
                None,
                None,
                None,
            ),
            Runner::Delay(r) => {
                let run = r.finish();
                (run.throughput, run.delay, run.fifo_delay, None)
            }
            Runner::NonBa { modes, .. } => {
                let total: u64 = modes.iter().sum();
                let h = modes.map(|k| k as f64 / total.max(1) as f64);
                (departure.iter().sum(), None, None, Some(h))
            }
            _ => (departure.iter().sum(), None, None, None),
        };
        out.push(PolicyRecord {
            policy,
            point: index,
            axis_value: point.value,
            seed,
            slots,
            throughput,
            stderr,
            delay,
            fifo_delay,
            modes,
            arrival,
            departure,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(slots: usize) -> Scenario {
        let mut s = Scenario::new(NetworkSpec::standard(2, 800.0, 800.0));
        s.run.slots = slots;
        s.run.batches = 4;
        s.training.iterations = 20;
        s.training.samples = 200;
        s
    }

    #[test]
    fn histogram_fractions() {
        let h =
            mode_histogram(&[Mode::Hybrid, Mode::Mixed, Mode::Mixed, Mode::Independent]).unwrap();
        assert_eq!(h, [0.25, 0.25, 0.5]);
        assert!(mode_histogram(&[]).is_none());
    }

    #[test]
    fn zero_slots_give_empty_metrics() {
        let m = run_scenario(&small(0)).unwrap();
        assert!(m.records.is_empty());
        assert!(m.aggregates.is_empty());
    }

    #[test]
    fn every_policy_reports() {
        let mut s = small(400);
        s.policies.include = PolicyKind::ALL.to_vec();
        let m = run_scenario(&s).unwrap();
        assert_eq!(m.records.len(), PolicyKind::ALL.len());
        for r in &m.records {
            assert!(r.throughput.is_finite() && r.throughput >= 0.0, "{r:?}");
            assert_eq!(r.arrival.len(), 2);
        }
        let nonba = m.aggregate(PolicyKind::NonBa, 0).unwrap();
        let h = nonba.modes.unwrap();
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.aggregate(PolicyKind::DelayBa, 0).unwrap().delay.is_some());
    }

    #[test]
    fn optimal_policies_beat_their_benchmarks_on_common_trace() {
        let mut s = small(2000);
        s.policies.include = vec![
            PolicyKind::NonBa,
            PolicyKind::NonBaMaxMinFso,
            PolicyKind::NonBaIndependent,
        ];
        let m = run_scenario(&s).unwrap();
        let tp = |p| m.aggregate(p, 0).unwrap().throughput;
        assert!(tp(PolicyKind::NonBa) >= tp(PolicyKind::NonBaIndependent) - 1e-9);
        assert!(tp(PolicyKind::NonBaIndependent) >= tp(PolicyKind::NonBaMaxMinFso));
    }
}
