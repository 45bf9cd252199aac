//! Timer-based distributed selection.
//!
//! Every relay knows only its own link capacities. It starts one timer per
//! role class with expiry `eta / metric`; the relay whose timer expires first
//! in a class broadcasts a beacon and the others stay silent. Since expiry is
//! decreasing in the metric, the first beacon of each class comes from the
//! relay with the largest metric, and every node can read that metric back
//! as `eta / expiry`. Beacons are delivered instantly and without collisions.

use std::fmt::{self, Write as _};

use crate::ba::{select_ba, selection_metrics, BaDecision, BaWeights};
use crate::channels::{CapacityMatrix, Hop};
use crate::nonba::{
    select_nonba, tau_fso, tau_hyb, tau_mix, tau_mix_exact, tau_rf, Mode, SelectionDecision,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimerClass {
    Hybrid,
    Fso,
    Rf,
    /// FSO reception feeding RF transmission.
    FsoToRf,
    /// RF reception feeding FSO transmission.
    RfToFso,
    BaFsoRx,
    BaFsoTx,
    BaRf,
}

impl TimerClass {
    pub fn label(self) -> &'static str {
        match self {
            TimerClass::Hybrid => "hyb",
            TimerClass::Fso => "fso",
            TimerClass::Rf => "rf",
            TimerClass::FsoToRf => "mix1",
            TimerClass::RfToFso => "mix2",
            TimerClass::BaFsoRx => "fso1",
            TimerClass::BaFsoTx => "fso2",
            TimerClass::BaRf => "rf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimerEvent {
    pub relay: usize,
    pub class: TimerClass,
    /// Seconds after the start of the contention phase; `+inf` never fires.
    pub expiry: f64,
    /// RF direction advertised by buffer-aided RF beacons.
    pub direction: Option<Hop>,
}

impl fmt::Display for TimerEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={:.6e} relay={} class={}",
            self.expiry,
            self.relay,
            self.class.label()
        )?;
        if let Some(d) = self.direction {
            write!(f, " dir={}", d.label())?;
        }
        Ok(())
    }
}

/// `eta / metric`, infinite for a zero metric.
pub fn expiry(eta: f64, metric: f64) -> f64 {
    if metric > 0.0 {
        eta / metric
    } else {
        f64::INFINITY
    }
}

/// Runs the contention phase: returns the beacon of each class (the first
/// expiring timer, lowest relay on equal expiry) and the full event log.
fn contend(events: &mut [TimerEvent], classes: &[TimerClass]) -> (Vec<Option<TimerEvent>>, String) {
    events.sort_by(|a, b| a.expiry.total_cmp(&b.expiry).then(a.relay.cmp(&b.relay)));
    let mut winners: Vec<Option<TimerEvent>> = vec![None; classes.len()];
    let mut log = String::new();
    for e in events.iter().filter(|e| e.expiry.is_finite()) {
        let k = classes
            .iter()
            .position(|c| *c == e.class)
            .expect("known class");
        if winners[k].is_none() {
            winners[k] = Some(*e);
            let _ = writeln!(log, "{e} beacon");
        } else {
            let _ = writeln!(log, "{e} silent");
        }
    }
    (winners, log)
}

/// Outcome of the non-buffered distributed protocol.
#[derive(Debug, Clone)]
pub struct NonBaOutcome {
    pub decision: SelectionDecision<f64>,
    /// Mode rates as read back from the beacons: hybrid, independent, mixed.
    pub announced: [f64; 3],
    /// The mixed pair chosen from independent beacons either shares a relay
    /// or cannot carry both full FSO rates on one RF band.
    pub mixed_divergence: bool,
    pub log: String,
}

const NONBA_CLASSES: [TimerClass; 5] = [
    TimerClass::Hybrid,
    TimerClass::Fso,
    TimerClass::Rf,
    TimerClass::FsoToRf,
    TimerClass::RfToFso,
];

pub fn run_distributed_nonba(c: &CapacityMatrix<f64>, eta: f64) -> NonBaOutcome {
    let relays = c.relays();
    let mut events = Vec::with_capacity(5 * relays);
    for m in 0..relays {
        let metrics = [
            tau_hyb(c, m).0,
            tau_fso(c, m),
            tau_rf(c, m).0,
            c.fso(Hop::First, m).min(c.rf(Hop::Second, m)),
            c.rf(Hop::First, m).min(c.fso(Hop::Second, m)),
        ];
        for (class, metric) in NONBA_CLASSES.iter().zip(metrics) {
            events.push(TimerEvent {
                relay: m,
                class: *class,
                expiry: expiry(eta, metric),
                direction: None,
            });
        }
    }
    let (winners, log) = contend(&mut events, &NONBA_CLASSES);
    let read = |k: usize| winners[k].map_or((0, 0.0), |e| (e.relay, eta / e.expiry));
    let (h, hyb) = read(0);
    let (fm, fso) = read(1);
    let (rn, rf) = read(2);
    let (mm, mix1) = read(3);
    let (mn, mix2) = read(4);
    let ind = fso + rf;
    let mix = if relays > 1 { mix1 + mix2 } else { 0.0 };
    let announced = [hyb, ind, mix];

    let mut rates = vec![0.0; relays];
    let mut mixed_divergence = false;
    let decision = if mix > hyb.max(ind) {
        // bits actually carried by the announced pair with its best split
        let (rate, rho1) = if mm == mn {
            (0.0, 0.0)
        } else {
            tau_mix_exact(c, mm, mn)
        };
        mixed_divergence = mm == mn || tau_mix(c, mm, mn).0 == 0.0 && mix > 0.0;
        if mm != mn {
            rates[mm] = c
                .fso(Hop::First, mm)
                .min((1.0 - rho1) * c.rf(Hop::Second, mm));
            rates[mn] = (rho1 * c.rf(Hop::First, mn)).min(c.fso(Hop::Second, mn));
        }
        SelectionDecision {
            fso: [mm, mn],
            rf: [mn, mm],
            rho1,
            mode: Mode::Mixed,
            rates,
            total: rate,
        }
    } else if ind > hyb {
        let rho1 = tau_rf(c, rn).1;
        rates[fm] += tau_fso(c, fm);
        rates[rn] += tau_rf(c, rn).0;
        SelectionDecision {
            fso: [fm, fm],
            rf: [rn, rn],
            rho1,
            mode: Mode::Independent,
            total: rates.iter().sum(),
            rates,
        }
    } else {
        let (rate, rho1) = tau_hyb(c, h);
        rates[h] = rate;
        SelectionDecision {
            fso: [h, h],
            rf: [h, h],
            rho1,
            mode: Mode::Hybrid,
            rates,
            total: rate,
        }
    };
    NonBaOutcome {
        decision,
        announced,
        mixed_divergence,
        log,
    }
}

/// Outcome of the buffer-aided distributed protocol.
#[derive(Debug, Clone)]
pub struct BaOutcome {
    pub decision: BaDecision<f64>,
    pub log: String,
}

const BA_CLASSES: [TimerClass; 3] = [TimerClass::BaFsoRx, TimerClass::BaFsoTx, TimerClass::BaRf];

pub fn run_distributed_ba(c: &CapacityMatrix<f64>, w: &BaWeights<f64>, eta: f64) -> BaOutcome {
    let metrics = selection_metrics(c, w);
    let mut events = Vec::with_capacity(3 * c.relays());
    for m in 0..c.relays() {
        let (rx, tx) = (metrics.rf[0][m], metrics.rf[1][m]);
        let dir = if rx >= tx { Hop::First } else { Hop::Second };
        let entries = [
            (TimerClass::BaFsoRx, metrics.fso[0][m], None),
            (TimerClass::BaFsoTx, metrics.fso[1][m], None),
            (TimerClass::BaRf, rx.max(tx), Some(dir)),
        ];
        for (class, metric, direction) in entries {
            events.push(TimerEvent {
                relay: m,
                class,
                expiry: expiry(eta, metric),
                direction,
            });
        }
    }
    let (winners, log) = contend(&mut events, &BA_CLASSES);
    let relay = |k: usize| winners[k].map_or(0, |e| e.relay);
    let rf = winners[2];
    let decision = match rf.and_then(|e| e.direction.map(|d| (e.relay, d))) {
        Some((m, Hop::Second)) => BaDecision {
            fso: [relay(0), relay(1)],
            rf: [0, m],
            rho1: 0.0,
        },
        Some((m, Hop::First)) => BaDecision {
            fso: [relay(0), relay(1)],
            rf: [m, 0],
            rho1: 1.0,
        },
        None => BaDecision {
            fso: [relay(0), relay(1)],
            rf: [0, 0],
            rho1: 1.0,
        },
    };
    BaOutcome { decision, log }
}

/// Agreement counts between distributed and centralized selection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EquivalenceReport {
    pub slots: usize,
    pub ba_mismatches: usize,
    /// Slots where both sides chose hybrid or independent.
    pub nonba_case12: usize,
    pub nonba_case12_mismatches: usize,
    /// Slots where either side chose mixed.
    pub nonba_mixed: usize,
    /// Mixed-mode slots whose outcome differs from the centralized one.
    pub nonba_mixed_disagreements: usize,
    pub nonba_divergence_flags: usize,
}

impl EquivalenceReport {
    pub fn mixed_divergence_rate(&self) -> f64 {
        if self.nonba_mixed == 0 {
            0.0
        } else {
            self.nonba_mixed_disagreements as f64 / self.nonba_mixed as f64
        }
    }

    /// Folds one slot into the counts.
    pub fn record(&mut self, c: &CapacityMatrix<f64>, w: &BaWeights<f64>, eta: f64) {
        self.slots += 1;
        if run_distributed_ba(c, w, eta).decision != select_ba(c, w) {
            self.ba_mismatches += 1;
        }
        let central = select_nonba(c);
        let dist = run_distributed_nonba(c, eta);
        if dist.mixed_divergence {
            self.nonba_divergence_flags += 1;
        }
        let d = &dist.decision;
        if central.mode != Mode::Mixed && d.mode != Mode::Mixed {
            self.nonba_case12 += 1;
            let same = central.mode == d.mode
                && central.fso == d.fso
                && central.rf == d.rf
                && central.rho1 == d.rho1;
            if !same {
                self.nonba_case12_mismatches += 1;
            }
        } else {
            self.nonba_mixed += 1;
            let same = central.mode == d.mode && central.fso == d.fso && central.rf == d.rf;
            if !same {
                self.nonba_mixed_disagreements += 1;
            }
        }
    }
}
