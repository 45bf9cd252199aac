//! Optimal per-slot relay selection when relays cannot buffer.
//!
//! Each slot one relay receives and one relay forwards on the FSO links, and
//! the RF band is time-shared between a receiving and a forwarding relay
//! (`rho1` of the slot for the first hop, the rest for the second). Without
//! buffers a relay can forward at most what it receives in the same slot, so
//! the slot rate is the sum over relays of `min(in, out)`. Three role
//! configurations can be optimal:
//!
//! * **Hybrid**: one relay carries both media on both hops.
//! * **Independent**: one relay is the FSO path, another the RF path.
//! * **Mixed**: relay `m` takes FSO in and RF out, relay `n` takes RF in and
//!   FSO out, so the two RF directions share the band.

use serde::{Deserialize, Serialize};

use crate::channels::{CapacityMatrix, Hop};
use crate::scalar::{argmax, clamp, safe_ratio, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Hybrid,
    Independent,
    Mixed,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Hybrid, Mode::Independent, Mode::Mixed];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Hybrid => "hybrid",
            Mode::Independent => "independent",
            Mode::Mixed => "mixed",
        }
    }
}

/// How the mixed configuration is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MixedRule {
    /// Best RF split for the pair: `max_rho min(a, (1-rho)b) + min(rho c, d)`.
    #[default]
    Exact,
    /// Both relays saturated or nothing: `a + d` when `d/c + a/b <= 1`,
    /// otherwise zero. See [`tau_mix`].
    AllOrNothing,
}

/// One slot's role assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionDecision<T> {
    /// FSO receiving relay (`[0]`) and forwarding relay (`[1]`).
    pub fso: [usize; 2],
    /// RF receiving relay (`[0]`) and forwarding relay (`[1]`).
    pub rf: [usize; 2],
    /// Share of the slot the RF band serves the first hop.
    pub rho1: T,
    pub mode: Mode,
    /// End-to-end bits delivered through each relay.
    pub rates: Vec<T>,
    pub total: T,
}

impl<T: Scalar> SelectionDecision<T> {
    pub fn rho2(&self) -> T {
        T::one() - self.rho1
    }

    /// One-hot FSO selection rows.
    pub fn alpha(&self) -> [Vec<u8>; 2] {
        one_hot(self.fso, self.rates.len())
    }

    /// One-hot RF selection rows.
    pub fn beta(&self) -> [Vec<u8>; 2] {
        one_hot(self.rf, self.rates.len())
    }

    /// Bits relay `m` receives under this decision.
    pub fn inflow(&self, c: &CapacityMatrix<T>, m: usize) -> T {
        let mut x = T::zero();
        if self.fso[0] == m {
            x = x + c.fso(Hop::First, m);
        }
        if self.rf[0] == m {
            x = x + self.rho1 * c.rf(Hop::First, m);
        }
        x
    }

    /// Bits relay `m` can forward under this decision.
    pub fn outflow(&self, c: &CapacityMatrix<T>, m: usize) -> T {
        let mut x = T::zero();
        if self.fso[1] == m {
            x = x + c.fso(Hop::Second, m);
        }
        if self.rf[1] == m {
            x = x + self.rho2() * c.rf(Hop::Second, m);
        }
        x
    }

    pub fn distinct_relays(&self) -> usize {
        let mut v = vec![self.fso[0], self.fso[1], self.rf[0], self.rf[1]];
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

fn one_hot(sel: [usize; 2], relays: usize) -> [Vec<u8>; 2] {
    sel.map(|s| (0..relays).map(|m| u8::from(m == s)).collect())
}

/// Rate of relay `m` carrying both media on both hops, with its RF split.
pub fn tau_hyb<T: Scalar>(c: &CapacityMatrix<T>, m: usize) -> (T, T) {
    let (f1, r1) = (c.fso(Hop::First, m), c.rf(Hop::First, m));
    let (f2, r2) = (c.fso(Hop::Second, m), c.rf(Hop::Second, m));
    let rf_total = r1 + r2;
    if rf_total == T::zero() {
        return (f1.min(f2), T::zero());
    }
    if f2 + r2 < f1 {
        // second hop is the bottleneck even with the whole band
        (f2 + r2, T::zero())
    } else if f1 + r1 < f2 {
        (f1 + r1, T::one())
    } else {
        let rho1 = clamp((f2 + r2 - f1) / rf_total, T::zero(), T::one());
        (f1 + rho1 * r1, rho1)
    }
}

/// FSO-only rate of relay `m`.
pub fn tau_fso<T: Scalar>(c: &CapacityMatrix<T>, m: usize) -> T {
    c.fso(Hop::First, m).min(c.fso(Hop::Second, m))
}

/// RF-only rate of relay `n` with the band split that balances its hops.
pub fn tau_rf<T: Scalar>(c: &CapacityMatrix<T>, n: usize) -> (T, T) {
    let (r1, r2) = (c.rf(Hop::First, n), c.rf(Hop::Second, n));
    let sum = r1 + r2;
    if sum == T::zero() {
        return (T::zero(), T::half());
    }
    (r1 * r2 / sum, r2 / sum)
}

/// Independent configuration: relay `m` on FSO, relay `n` on RF.
pub fn tau_ind<T: Scalar>(c: &CapacityMatrix<T>, m: usize, n: usize) -> (T, T) {
    let (rf, rho1) = tau_rf(c, n);
    (tau_fso(c, m) + rf, rho1)
}

/// Mixed configuration scored all-or-nothing: both relays forward their full
/// FSO capacity if the band can be split to carry it, otherwise zero.
///
/// Relay `m` receives on FSO and forwards on RF; relay `n` receives on RF and
/// forwards on FSO.
pub fn tau_mix<T: Scalar>(c: &CapacityMatrix<T>, m: usize, n: usize) -> (T, T) {
    let a = c.fso(Hop::First, m);
    let b = c.rf(Hop::Second, m);
    let rc = c.rf(Hop::First, n);
    let d = c.fso(Hop::Second, n);
    if safe_ratio(d, rc) + safe_ratio(a, b) <= T::one() {
        (a + d, safe_ratio(d, rc))
    } else {
        (T::zero(), T::zero())
    }
}

/// Mixed configuration with the best RF split for the pair.
///
/// The rate `min(a, (1-rho)b) + min(rho c, d)` is concave and piecewise
/// linear in `rho`, so its maximum sits on a breakpoint or an end of `[0, 1]`.
pub fn tau_mix_exact<T: Scalar>(c: &CapacityMatrix<T>, m: usize, n: usize) -> (T, T) {
    let a = c.fso(Hop::First, m);
    let b = c.rf(Hop::Second, m);
    let rc = c.rf(Hop::First, n);
    let d = c.fso(Hop::Second, n);
    let rate = |rho: T| a.min((T::one() - rho) * b) + (rho * rc).min(d);
    let unit = |x: T| clamp(x, T::zero(), T::one());
    let candidates = [
        unit(safe_ratio(d, rc)),
        unit(T::one() - safe_ratio(a, b)),
        T::zero(),
        T::one(),
    ];
    let mut best = (rate(candidates[0]), candidates[0]);
    for &rho in &candidates[1..] {
        let r = rate(rho);
        if r > best.0 {
            best = (r, rho);
        }
    }
    best
}

/// Best relay pair for the mixed configuration, `None` for a single relay.
pub fn best_mixed<T: Scalar>(
    c: &CapacityMatrix<T>,
    rule: MixedRule,
) -> Option<(T, T, usize, usize)> {
    let relays = c.relays();
    let mut best: Option<(T, T, usize, usize)> = None;
    for m in 0..relays {
        for n in 0..relays {
            if m == n {
                continue;
            }
            let (rate, rho1) = match rule {
                MixedRule::Exact => tau_mix_exact(c, m, n),
                MixedRule::AllOrNothing => tau_mix(c, m, n),
            };
            if best.is_none_or(|b| rate > b.0) {
                best = Some((rate, rho1, m, n));
            }
        }
    }
    best
}

/// Optimal decision with the exact mixed-mode score.
pub fn select_nonba<T: Scalar>(c: &CapacityMatrix<T>) -> SelectionDecision<T> {
    select_nonba_with(c, MixedRule::Exact)
}

pub fn select_nonba_with<T: Scalar>(
    c: &CapacityMatrix<T>,
    rule: MixedRule,
) -> SelectionDecision<T> {
    let relays = c.relays();
    let hyb: Vec<(T, T)> = (0..relays).map(|m| tau_hyb(c, m)).collect();
    let hyb_rates: Vec<T> = hyb.iter().map(|h| h.0).collect();
    let h = argmax(&hyb_rates);

    let fso_rates: Vec<T> = (0..relays).map(|m| tau_fso(c, m)).collect();
    let rf: Vec<(T, T)> = (0..relays).map(|n| tau_rf(c, n)).collect();
    let rf_rates: Vec<T> = rf.iter().map(|r| r.0).collect();
    let (fm, rn) = (argmax(&fso_rates), argmax(&rf_rates));
    let ind_total = fso_rates[fm] + rf_rates[rn];

    let mut rates = vec![T::zero(); relays];
    let mut decision = if ind_total > hyb_rates[h] {
        rates[fm] = rates[fm] + fso_rates[fm];
        rates[rn] = rates[rn] + rf_rates[rn];
        SelectionDecision {
            fso: [fm, fm],
            rf: [rn, rn],
            rho1: rf[rn].1,
            mode: Mode::Independent,
            rates: Vec::new(),
            total: ind_total,
        }
    } else {
        rates[h] = hyb_rates[h];
        SelectionDecision {
            fso: [h, h],
            rf: [h, h],
            rho1: hyb[h].1,
            mode: Mode::Hybrid,
            rates: Vec::new(),
            total: hyb_rates[h],
        }
    };

    if let Some((mix, rho1, m, n)) = best_mixed(c, rule) {
        if mix > decision.total {
            rates = vec![T::zero(); relays];
            rates[m] = c
                .fso(Hop::First, m)
                .min((T::one() - rho1) * c.rf(Hop::Second, m));
            rates[n] = (rho1 * c.rf(Hop::First, n)).min(c.fso(Hop::Second, n));
            decision = SelectionDecision {
                fso: [m, n],
                rf: [n, m],
                rho1,
                mode: Mode::Mixed,
                rates: Vec::new(),
                total: mix,
            };
        }
    }
    decision.rates = rates;
    decision
}
