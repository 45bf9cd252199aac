//! CSV output and a plain-text summary of a run.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::RunMetrics;
use crate::error::Result;

#[derive(Serialize)]
struct RecordRow<'a> {
    scenario: &'a str,
    policy: &'a str,
    axis: &'a str,
    axis_value: Option<f64>,
    seed: u64,
    slots: usize,
    throughput_bps: f64,
    stderr_bps: Option<f64>,
    delay_slots: Option<f64>,
    fifo_delay_slots: Option<f64>,
    mode_hybrid: Option<f64>,
    mode_independent: Option<f64>,
    mode_mixed: Option<f64>,
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    scenario: &'a str,
    policy: &'a str,
    axis: &'a str,
    axis_value: Option<f64>,
    seeds: usize,
    slots: usize,
    throughput_bps: f64,
    stderr_bps: Option<f64>,
    delay_slots: Option<f64>,
    mode_hybrid: Option<f64>,
    mode_independent: Option<f64>,
    mode_mixed: Option<f64>,
}

#[derive(Serialize)]
struct RelayRow<'a> {
    scenario: &'a str,
    policy: &'a str,
    axis: &'a str,
    axis_value: Option<f64>,
    seed: u64,
    relay: usize,
    arrival_bps: f64,
    departure_bps: f64,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// One row per run, policy, sweep point and seed. Runs share one header.
pub fn write_records<W: Write>(runs: &[RunMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in runs {
        for r in &m.records {
            w.serialize(RecordRow {
                scenario: &m.scenario,
                policy: r.policy.label(),
                axis: m.axis.label(),
                axis_value: finite(r.axis_value),
                seed: r.seed,
                slots: r.slots,
                throughput_bps: r.throughput,
                stderr_bps: finite(r.stderr),
                delay_slots: r.delay,
                fifo_delay_slots: r.fifo_delay,
                mode_hybrid: r.modes.map(|h| h[0]),
                mode_independent: r.modes.map(|h| h[1]),
                mode_mixed: r.modes.map(|h| h[2]),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per policy and sweep point, combined over seeds.
pub fn write_aggregates<W: Write>(runs: &[RunMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in runs {
        for a in &m.aggregates {
            w.serialize(AggregateRow {
                scenario: &m.scenario,
                policy: a.policy.label(),
                axis: m.axis.label(),
                axis_value: finite(a.axis_value),
                seeds: a.seeds,
                slots: a.slots,
                throughput_bps: a.throughput,
                stderr_bps: finite(a.stderr),
                delay_slots: a.delay,
                mode_hybrid: a.modes.map(|h| h[0]),
                mode_independent: a.modes.map(|h| h[1]),
                mode_mixed: a.modes.map(|h| h[2]),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Mean per-relay arrival and departure rates.
pub fn write_relays<W: Write>(runs: &[RunMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in runs {
        for r in &m.records {
            for (relay, (a, d)) in r.arrival.iter().zip(&r.departure).enumerate() {
                w.serialize(RelayRow {
                    scenario: &m.scenario,
                    policy: r.policy.label(),
                    axis: m.axis.label(),
                    axis_value: finite(r.axis_value),
                    seed: r.seed,
                    relay: relay + 1,
                    arrival_bps: *a,
                    departure_bps: *d,
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Aligned table of the aggregated results, throughput in Mbit/s.
pub fn summary_table(m: &RunMetrics) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:>12} {:>12} {:>10} {:>10}",
        "policy",
        m.axis.label(),
        "Mbit/s",
        "stderr",
        "delay"
    );
    for a in &m.aggregates {
        let value = if a.axis_value.is_finite() {
            format!("{}", a.axis_value)
        } else {
            "-".into()
        };
        let stderr = if a.stderr.is_finite() {
            format!("{:.4}", a.stderr / 1e6)
        } else {
            "-".into()
        };
        let delay = a.delay.map_or("-".into(), |d| format!("{d:.2}"));
        let _ = writeln!(
            s,
            "{:<22} {:>12} {:>12.4} {:>10} {:>10}",
            a.policy.label(),
            value,
            a.throughput / 1e6,
            stderr,
            delay
        );
    }
    s
}
