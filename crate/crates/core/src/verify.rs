//! Reduced-scale self checks against the brute-force references.
//!
//! Each suite is small enough to run in seconds and reports a single
//! pass/fail line. The full-scale versions live in the acceptance tests.

use std::fmt;

use crate::ba::{ba_flows, train_lambda, BaWeights, TrainingConfig};
use crate::channels::{CapacityMatrix, ChannelModel};
use crate::delay::{run_delay_ba, DelayOptions};
use crate::distributed::EquivalenceReport;
use crate::engine::{NetworkSpec, Scenario};
use crate::error::Result;
use crate::nonba::select_nonba;
use crate::oracle::{nonba_exhaustive, random_capacities, single_relay_lambda_grid};
use crate::source::{stream_rng, SlotSource};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {:<18} {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Network the stochastic suites run on.
    pub scenario: Scenario,
    /// Fading slots per stochastic suite.
    pub slots: usize,
    pub seed: u64,
    /// Weights checked by the residual suite; trained on the spot if absent.
    pub weights: Option<BaWeights<f64>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let mut scenario = Scenario::new(NetworkSpec::standard(3, 800.0, 800.0));
        scenario.training.iterations = 200;
        scenario.training.samples = 1000;
        VerifyOptions {
            scenario,
            slots: 20_000,
            seed: 1,
            weights: None,
        }
    }
}

fn model(s: &Scenario, relays: usize, seed: u64) -> Result<ChannelModel> {
    ChannelModel::new(&s.links.build(&s.network, relays, s.run.slots, seed)?)
}

fn trace(model: &ChannelModel, slots: usize, seed: u64, stream: u64) -> Vec<CapacityMatrix<f64>> {
    model.trace(slots, &mut stream_rng(seed, stream))
}

/// Non-buffered selection against role enumeration with a grid RF split.
pub fn nonba_oracle(matrices: usize, grid_steps: usize, seed: u64) -> SuiteResult {
    let mut rng = stream_rng(seed, 11);
    let mut failures = 0;
    let mut checked = 0;
    for relays in [2, 3] {
        for _ in 0..matrices {
            let c = random_capacities(&mut rng, relays);
            let tau = select_nonba(&c).total;
            let oracle = nonba_exhaustive(&c, grid_steps);
            let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
            let slack = (max(&c.rf[0]) + max(&c.rf[1])) / grid_steps as f64;
            if tau < oracle - 1e-9 * oracle.max(1.0) || tau > oracle + slack + 1e-12 {
                failures += 1;
            }
            checked += 1;
        }
    }
    SuiteResult {
        name: "nonba-oracle",
        passed: failures == 0,
        detail: format!("{failures} of {checked} matrices off the exhaustive optimum"),
    }
}

/// Single-relay trained weight against a weight grid on a shared trace.
pub fn lambda_grid(opts: &VerifyOptions) -> Result<SuiteResult> {
    let s = &opts.scenario;
    let m = model(s, 1, opts.seed)?;
    let cfg = TrainingConfig {
        seed: opts.seed,
        ..s.training.clone()
    };
    let w = train_lambda(&m, &cfg)?;
    let slots = trace(&m, opts.slots, opts.seed, 12);
    let trained = ba_flows(&slots, &w).throughput();
    let (best_lambda, best) = single_relay_lambda_grid(&slots, 100);
    let ratio = if best > 0.0 { trained / best } else { 1.0 };
    Ok(SuiteResult {
        name: "lambda-grid",
        passed: ratio >= 0.99,
        detail: format!(
            "trained lambda {:.4} reaches {:.2}% of grid optimum (lambda {best_lambda:.2})",
            w.lambda[0],
            100.0 * ratio
        ),
    })
}

/// Little's-law delay against the FIFO age ledger.
pub fn littles_law(opts: &VerifyOptions, weights: &BaWeights<f64>) -> Result<SuiteResult> {
    let s = &opts.scenario;
    let m = model(s, weights.relays(), opts.seed)?;
    let slots = trace(&m, opts.slots, opts.seed, 13);
    let mean_cap = slots.iter().map(|c| c.max_entry()).sum::<f64>() / slots.len().max(1) as f64;
    let opts_run = DelayOptions {
        fifo_ledger: true,
        ..DelayOptions::default()
    };
    let run = run_delay_ba(
        &slots,
        weights,
        vec![10.0 * mean_cap; weights.relays()],
        opts_run,
    )?;
    let (passed, detail) = match (run.delay, run.fifo_delay) {
        (Some(l), Some(f)) => {
            let rel = (l - f).abs() / f.max(1e-300);
            (
                rel <= 0.02,
                format!(
                    "queue-length delay {l:.3} vs ledger {f:.3} slots ({:.2}% apart)",
                    100.0 * rel
                ),
            )
        }
        _ => (false, "no traffic reached the relays".to_string()),
    };
    Ok(SuiteResult {
        name: "littles-law",
        passed,
        detail,
    })
}

/// Timer protocols against centralized selection on random slots.
pub fn distributed(opts: &VerifyOptions, weights: &BaWeights<f64>) -> SuiteResult {
    let mut rng = stream_rng(opts.seed, 14);
    let mut report = EquivalenceReport::default();
    for _ in 0..opts.slots.min(10_000) {
        let c = random_capacities(&mut rng, weights.relays());
        report.record(&c, weights, opts.scenario.run.eta);
    }
    SuiteResult {
        name: "distributed",
        passed: report.ba_mismatches == 0 && report.nonba_case12_mismatches == 0,
        detail: format!(
            "{} slots: buffered mismatches {}, non-buffered case 1/2 mismatches {} of {}, mixed divergence {:.2}%",
            report.slots,
            report.ba_mismatches,
            report.nonba_case12_mismatches,
            report.nonba_case12,
            100.0 * report.mixed_divergence_rate()
        ),
    }
}

/// Flow balance of a weight vector: trained weights leave every relay with
/// matching mean arrival and departure.
pub fn lambda_residual(opts: &VerifyOptions, weights: &BaWeights<f64>) -> Result<SuiteResult> {
    let s = &opts.scenario;
    let m = model(s, weights.relays(), opts.seed)?;
    let slots = trace(&m, opts.slots, opts.seed, 15);
    let f = ba_flows(&slots, weights);
    let imbalance: f64 = f
        .arrival
        .iter()
        .zip(&f.departure)
        .map(|(a, d)| (a - d).abs())
        .sum();
    let volume: f64 = f.arrival.iter().zip(&f.departure).map(|(a, d)| a + d).sum();
    let rel = if volume > 0.0 {
        imbalance / volume
    } else {
        0.0
    };
    Ok(SuiteResult {
        name: "lambda-residual",
        passed: rel <= 0.05,
        detail: format!("relative arrival/departure imbalance {:.2}%", 100.0 * rel),
    })
}

/// Runs every suite; weights are trained on the scenario's network when the
/// options carry none.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<SuiteResult>> {
    let s = &opts.scenario;
    let trained = match &opts.weights {
        Some(_) => None,
        None => {
            let m = model(s, s.network.relays, opts.seed)?;
            Some(train_lambda(
                &m,
                &TrainingConfig {
                    seed: opts.seed,
                    ..s.training.clone()
                },
            )?)
        }
    };
    let w = opts
        .weights
        .as_ref()
        .or(trained.as_ref())
        .expect("weights available");
    let grid = (opts.slots / 20).clamp(100, 2000);
    Ok(vec![
        nonba_oracle((opts.slots / 200).clamp(10, 200), grid, opts.seed),
        lambda_grid(opts)?,
        littles_law(opts, w)?,
        distributed(opts, w),
        lambda_residual(opts, w)?,
    ])
}
