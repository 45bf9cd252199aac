//! Fading realizations and per-slot link capacities.
//!
//! FSO links use Gamma-Gamma turbulence on top of a geometric/weather path
//! gain, and an on-off keyed binary-input Gaussian capacity evaluated by
//! Gauss-Hermite quadrature. RF links use Rician fading on a power-law path
//! gain and the Gaussian-input Shannon capacity.

mod capacity;
mod fading;
mod gain;
mod params;
mod quadrature;

pub use capacity::{
    fso_capacity, rf_capacity, CapacityMatrix, OokCapacity, DEFAULT_QUADRATURE_ORDER,
};
pub use fading::{FadingRealization, GammaGammaFading, RicianMagnitude};
pub use gain::{fso_avg_gain, rf_avg_gain};
pub use params::{
    db_to_linear, dbm_to_watt, watt_to_dbm, FsoLinkParams, GammaGamma, Hop, NetworkConfig,
    RfLinkParams,
};
pub use quadrature::GaussHermite;

use rand::Rng;
use rand_distr::Distribution;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::source::SlotSource;

#[derive(Debug, Clone)]
struct FsoLink {
    avg_gain: f64,
    fading: GammaGammaFading,
    tx_intensity: f64,
    noise_std: f64,
    bandwidth: f64,
}

#[derive(Debug, Clone)]
struct RfLink {
    avg_amplitude: f64,
    fading: RicianMagnitude,
    tx_amplitude: f64,
    noise_variance: f64,
    bandwidth: f64,
}

/// Precomputed per-link quantities of a [`NetworkConfig`].
///
/// Building the model validates the configuration once; sampling afterwards
/// cannot fail.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    fso: [Vec<FsoLink>; 2],
    rf: [Vec<RfLink>; 2],
    ook: OokCapacity,
}

impl ChannelModel {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        Self::with_quadrature_order(cfg, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn with_quadrature_order(cfg: &NetworkConfig, order: usize) -> Result<Self> {
        cfg.validate()?;
        let fso_hop = |links: &[FsoLinkParams]| -> Result<Vec<FsoLink>> {
            links
                .iter()
                .map(|p| {
                    Ok(FsoLink {
                        avg_gain: fso_avg_gain(p)?,
                        fading: GammaGammaFading::new(p.turbulence)?,
                        tx_intensity: p.tx_intensity,
                        noise_std: p.noise_variance.sqrt(),
                        bandwidth: p.bandwidth,
                    })
                })
                .collect()
        };
        let rf_hop = |links: &[RfLinkParams]| -> Result<Vec<RfLink>> {
            links
                .iter()
                .map(|p| {
                    Ok(RfLink {
                        avg_amplitude: rf_avg_gain(p)?.sqrt(),
                        fading: RicianMagnitude::new(p.rician_k, p.rician_power)?,
                        tx_amplitude: p.tx_power.sqrt(),
                        noise_variance: p.noise_variance(),
                        bandwidth: p.bandwidth,
                    })
                })
                .collect()
        };
        Ok(ChannelModel {
            fso: [fso_hop(&cfg.fso[0])?, fso_hop(&cfg.fso[1])?],
            rf: [rf_hop(&cfg.rf[0])?, rf_hop(&cfg.rf[1])?],
            ook: OokCapacity::new(order),
        })
    }

    pub fn relays(&self) -> usize {
        self.fso[0].len()
    }

    /// Draws one slot of independent fading for every link.
    pub fn sample_fading<R: Rng + ?Sized>(&self, rng: &mut R) -> FadingRealization {
        let fso_gain = [0, 1].map(|l| {
            self.fso[l]
                .iter()
                .map(|link| link.avg_gain * link.fading.sample(rng))
                .collect()
        });
        let rf_magnitude = [0, 1].map(|l| {
            self.rf[l]
                .iter()
                .map(|link| link.avg_amplitude * link.fading.sample(rng))
                .collect()
        });
        FadingRealization {
            fso_gain,
            rf_magnitude,
        }
    }

    /// Applies the FSO and RF capacity formulas link by link.
    pub fn capacities<T: Scalar>(&self, fading: &FadingRealization) -> CapacityMatrix<T> {
        let fso = [0, 1].map(|l| {
            self.fso[l]
                .iter()
                .zip(&fading.fso_gain[l])
                .map(|(link, &h)| {
                    T::lit(
                        self.ook
                            .capacity(link.tx_intensity * h, link.noise_std, link.bandwidth),
                    )
                })
                .collect()
        });
        let rf = [0, 1].map(|l| {
            self.rf[l]
                .iter()
                .zip(&fading.rf_magnitude[l])
                .map(|(link, &g)| {
                    T::lit(rf_capacity(
                        link.tx_amplitude * g,
                        link.noise_variance,
                        link.bandwidth,
                    ))
                })
                .collect()
        });
        CapacityMatrix { fso, rf }
    }

    pub fn sample_capacities<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> CapacityMatrix<T> {
        let fading = self.sample_fading(rng);
        self.capacities(&fading)
    }
}

impl<T: Scalar> SlotSource<T> for ChannelModel {
    fn relays(&self) -> usize {
        ChannelModel::relays(self)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CapacityMatrix<T> {
        self.sample_capacities(rng)
    }
}

/// Convenience wrapper: validates `cfg` and draws one fading slot.
pub fn sample_fading<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<FadingRealization> {
    Ok(ChannelModel::new(cfg)?.sample_fading(rng))
}

/// Convenience wrapper: capacities of `fading` under the links of `cfg`.
pub fn capacities<T: Scalar>(
    cfg: &NetworkConfig,
    fading: &FadingRealization,
) -> Result<CapacityMatrix<T>> {
    Ok(ChannelModel::new(cfg)?.capacities(fading))
}
