//! Per-slot link capacities.

use std::f64::consts::{LN_2, PI};

use super::params::Hop;
use super::quadrature::GaussHermite;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// Capacities of every link in one slot, in bit/s (equivalently bits per
/// unit-length slot).
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityMatrix<T> {
    pub fso: [Vec<T>; 2],
    pub rf: [Vec<T>; 2],
}

impl<T: Scalar> CapacityMatrix<T> {
    pub fn new(fso: [Vec<T>; 2], rf: [Vec<T>; 2]) -> Result<Self> {
        let m = fso[0].len();
        if m == 0 || fso[1].len() != m || rf[0].len() != m || rf[1].len() != m {
            return Err(Error::Shape(format!(
                "capacity rows must share a non-zero length, got fso {}/{} rf {}/{}",
                fso[0].len(),
                fso[1].len(),
                rf[0].len(),
                rf[1].len()
            )));
        }
        let all = fso.iter().chain(rf.iter()).flatten();
        if all.clone().any(|c| !(c.is_finite() && *c >= T::zero())) {
            return Err(Error::invalid(
                "capacities",
                "entries must be finite and non-negative",
            ));
        }
        Ok(CapacityMatrix { fso, rf })
    }

    /// Builds from plain per-hop rows; panics on invalid shape. Intended for
    /// literals in examples and tests.
    pub fn from_rows(fso1: &[f64], fso2: &[f64], rf1: &[f64], rf2: &[f64]) -> Self {
        let conv = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<_>>();
        Self::new([conv(fso1), conv(fso2)], [conv(rf1), conv(rf2)]).expect("valid capacity rows")
    }

    pub fn zeros(relays: usize) -> Self {
        CapacityMatrix {
            fso: [vec![T::zero(); relays], vec![T::zero(); relays]],
            rf: [vec![T::zero(); relays], vec![T::zero(); relays]],
        }
    }

    pub fn relays(&self) -> usize {
        self.fso[0].len()
    }

    #[inline]
    pub fn fso(&self, hop: Hop, relay: usize) -> T {
        self.fso[hop.index()][relay]
    }

    #[inline]
    pub fn rf(&self, hop: Hop, relay: usize) -> T {
        self.rf[hop.index()][relay]
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|c| c * s)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CapacityMatrix<U> {
        let row = |v: &Vec<T>| v.iter().map(|&x| f(x)).collect::<Vec<U>>();
        CapacityMatrix {
            fso: [row(&self.fso[0]), row(&self.fso[1])],
            rf: [row(&self.rf[0]), row(&self.rf[1])],
        }
    }

    pub fn cast<U: Scalar>(&self) -> CapacityMatrix<U> {
        self.map(|x| U::lit(x.to_f64_lossy()))
    }

    /// Largest entry, used to scale buffers and step sizes.
    pub fn max_entry(&self) -> T {
        self.fso
            .iter()
            .chain(self.rf.iter())
            .flatten()
            .fold(T::zero(), |a, &b| a.max(b))
    }
}

/// Capacity of an equiprobable on-off keyed link observed in Gaussian noise.
#[derive(Debug, Clone)]
pub struct OokCapacity {
    rule: GaussHermite,
}

impl Default for OokCapacity {
    fn default() -> Self {
        Self::new(DEFAULT_QUADRATURE_ORDER)
    }
}

impl OokCapacity {
    pub fn new(order: usize) -> Self {
        OokCapacity {
            rule: GaussHermite::new(order),
        }
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    /// Mutual information in bits per symbol for amplitude-to-noise ratio `snr = p/σ`.
    pub fn bits_per_symbol(&self, snr: f64) -> f64 {
        if !(snr > 0.0) {
            return 0.0;
        }
        let s = 0.5 * snr * snr;
        let scale = 2f64.sqrt() * snr;
        // log2{1 + e^{-s}[e^{x} + e^{-x} + e^{-s}]} = log2(1 + e^{x-s}) + log2(1 + e^{-x-s})
        let integral = self.rule.integrate_even(|t| {
            let x = scale * t;
            (softplus(x - s) + softplus(-x - s)) / LN_2
        });
        (1.0 - integral / (2.0 * PI.sqrt())).clamp(0.0, 1.0)
    }

    /// Link capacity in bit/s for received peak photocurrent `p_signal`,
    /// noise standard deviation `sigma` and bandwidth `bandwidth`.
    pub fn capacity(&self, p_signal: f64, sigma: f64, bandwidth: f64) -> f64 {
        bandwidth * self.bits_per_symbol(p_signal / sigma)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// OOK link capacity using the default quadrature order.
pub fn fso_capacity(p_signal: f64, sigma: f64, bandwidth: f64) -> f64 {
    thread_local! {
        static DEFAULT_RULE: OokCapacity = OokCapacity::default();
    }
    DEFAULT_RULE.with(|c| c.capacity(p_signal, sigma, bandwidth))
}

/// Gaussian-input RF link capacity for received amplitude `q`.
pub fn rf_capacity(q: f64, noise_variance: f64, bandwidth: f64) -> f64 {
    bandwidth * (q * q / noise_variance).ln_1p() / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ook_limits() {
        assert_eq!(fso_capacity(0.0, 1.0, 1e9), 0.0);
        let c = fso_capacity(1e4, 1.0, 1e9);
        assert!((c - 1e9).abs() <= 1e-6 * 1e9);
        // tiny but positive signal gives tiny but non-negative capacity
        let small = fso_capacity(1e-6, 1.0, 1.0);
        assert!((0.0..1e-10).contains(&small));
    }

    #[test]
    fn ook_scale_invariance() {
        for &(p, s, w) in &[(2e-7, 1e-7, 1e9), (3.0, 0.5, 2.0), (1e-9, 1e-8, 5e8)] {
            let direct = fso_capacity(p, s, w);
            let scaled = w * fso_capacity(p / s, 1.0, 1.0);
            assert!((direct - scaled).abs() <= 1e-10 * direct.abs().max(1e-300));
        }
    }

    #[test]
    fn rf_capacity_values() {
        assert_eq!(rf_capacity(0.0, 1.0, 2e7), 0.0);
        assert!((rf_capacity(1.0, 1.0, 2e7) - 2e7).abs() < 1e-6);
        assert!((rf_capacity(3f64.sqrt(), 1.0, 2e7) - 4e7).abs() < 1e-6);
    }

    #[test]
    fn capacity_matrix_rejects_bad_shapes() {
        let bad = CapacityMatrix::<f64>::new([vec![1.0], vec![1.0, 2.0]], [vec![1.0], vec![1.0]]);
        assert!(bad.is_err());
        let neg = CapacityMatrix::<f64>::new([vec![-1.0], vec![1.0]], [vec![1.0], vec![1.0]]);
        assert!(neg.is_err());
    }
}
