//! Static per-link physical parameters and the network configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hop of a two-hop relay path: source-to-relay or relay-to-destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hop {
    First,
    Second,
}

impl Hop {
    pub const ALL: [Hop; 2] = [Hop::First, Hop::Second];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Hop::First => 0,
            Hop::Second => 1,
        }
    }

    /// 1-based label used in file formats (`1` for source-relay, `2` for relay-destination).
    pub fn label(self) -> u8 {
        self.index() as u8 + 1
    }
}

/// Gamma-Gamma turbulence shape parameters (large- and small-scale eddies).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaGamma {
    pub large_scale: f64,
    pub small_scale: f64,
}

impl GammaGamma {
    /// Variance of the unit-mean fading gain.
    pub fn scintillation_variance(&self) -> f64 {
        let (a, b) = (self.large_scale, self.small_scale);
        1.0 / a + 1.0 / b + 1.0 / (a * b)
    }
}

/// Optical link between two nodes, intensity-modulated with on-off keying.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsoLinkParams {
    /// Photodetector responsivity (numeric scale only).
    pub responsivity: f64,
    /// Receiver aperture radius in meters.
    pub aperture_radius: f64,
    /// Beam divergence angle in radians.
    pub divergence: f64,
    /// Link distance in meters.
    pub distance: f64,
    /// Weather-dependent attenuation in dB per meter.
    pub attenuation: f64,
    pub turbulence: GammaGamma,
    /// Receiver noise variance in A^2.
    pub noise_variance: f64,
    /// Peak transmit intensity in W.
    pub tx_intensity: f64,
    /// Signal bandwidth in Hz.
    pub bandwidth: f64,
}

impl FsoLinkParams {
    /// Default parameter set (light-moderate fog, 1550 nm, 1 GHz).
    pub fn standard(distance: f64) -> Self {
        FsoLinkParams {
            responsivity: 0.5,
            aperture_radius: 0.1,
            divergence: 2e-3,
            distance,
            attenuation: 0.032,
            turbulence: GammaGamma {
                large_scale: 2.23,
                small_scale: 1.54,
            },
            noise_variance: 1e-14,
            tx_intensity: 20e-3,
            bandwidth: 1e9,
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let positive = [
            ("responsivity", self.responsivity),
            ("aperture_radius", self.aperture_radius),
            ("divergence", self.divergence),
            ("turbulence.large_scale", self.turbulence.large_scale),
            ("turbulence.small_scale", self.turbulence.small_scale),
            ("noise_variance", self.noise_variance),
            ("tx_intensity", self.tx_intensity),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    format!("{path}.{name}"),
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.distance.is_finite() && self.distance >= 0.0) {
            return Err(Error::invalid(
                format!("{path}.distance"),
                format!("must be finite and >= 0, got {}", self.distance),
            ));
        }
        if !(self.attenuation >= 0.0) {
            return Err(Error::invalid(
                format!("{path}.attenuation"),
                format!("must be >= 0, got {}", self.attenuation),
            ));
        }
        Ok(())
    }
}

/// Radio link between two nodes with Rician fading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfLinkParams {
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Transmit antenna gain, linear.
    pub tx_gain: f64,
    /// Receive antenna gain, linear.
    pub rx_gain: f64,
    /// Antenna far-field reference distance in meters.
    pub reference_distance: f64,
    /// Link distance in meters.
    pub distance: f64,
    pub path_loss_exponent: f64,
    /// Direct-to-scattered power ratio of the Rician fading.
    pub rician_k: f64,
    /// Total fading power `E{|g|^2}`.
    pub rician_power: f64,
    /// Noise power spectral density in dBm/MHz.
    pub noise_psd_dbm_per_mhz: f64,
    /// Receiver noise figure in dB.
    pub noise_figure_db: f64,
    /// Transmit power in W.
    pub tx_power: f64,
    /// Signal bandwidth in Hz.
    pub bandwidth: f64,
}

impl RfLinkParams {
    /// Default parameter set (3.5 GHz, 10 dBi antennas, 23 dBm, 20 MHz).
    pub fn standard(distance: f64) -> Self {
        RfLinkParams {
            wavelength: 85.7e-3,
            tx_gain: db_to_linear(10.0),
            rx_gain: db_to_linear(10.0),
            reference_distance: 80.0,
            distance,
            path_loss_exponent: 3.5,
            rician_k: 4.0,
            rician_power: 1.0,
            noise_psd_dbm_per_mhz: -114.0,
            noise_figure_db: 5.0,
            tx_power: 0.2,
            bandwidth: 20e6,
        }
    }

    /// Receiver noise power in dBm: PSD plus bandwidth in MHz plus noise figure.
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_psd_dbm_per_mhz + 10.0 * (self.bandwidth / 1e6).log10() + self.noise_figure_db
    }

    /// Receiver noise variance in W.
    pub fn noise_variance(&self) -> f64 {
        dbm_to_watt(self.noise_power_dbm())
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("reference_distance", self.reference_distance),
            ("distance", self.distance),
            ("rician_power", self.rician_power),
            ("tx_power", self.tx_power),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    format!("{path}.{name}"),
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.rician_k.is_finite() && self.rician_k >= 0.0) {
            return Err(Error::invalid(
                format!("{path}.rician_k"),
                format!("must be >= 0, got {}", self.rician_k),
            ));
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent >= 2.0) {
            return Err(Error::invalid(
                format!("{path}.path_loss_exponent"),
                format!("must be >= 2, got {}", self.path_loss_exponent),
            ));
        }
        if !self.noise_psd_dbm_per_mhz.is_finite() || !self.noise_figure_db.is_finite() {
            return Err(Error::invalid(
                format!("{path}.noise"),
                "noise PSD and figure must be finite",
            ));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Link parameters of a whole network: one FSO and one RF link per hop and relay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub fso: [Vec<FsoLinkParams>; 2],
    pub rf: [Vec<RfLinkParams>; 2],
    /// Number of slots simulated per run.
    pub slots: usize,
    pub seed: u64,
}

impl NetworkConfig {
    /// Every relay shares the same link parameters per hop.
    pub fn uniform(
        relays: usize,
        fso: [FsoLinkParams; 2],
        rf: [RfLinkParams; 2],
        slots: usize,
        seed: u64,
    ) -> Self {
        let [f1, f2] = fso;
        let [r1, r2] = rf;
        NetworkConfig {
            fso: [vec![f1; relays], vec![f2; relays]],
            rf: [vec![r1; relays], vec![r2; relays]],
            slots,
            seed,
        }
    }

    /// Default parameters with the given hop distances (used for both media).
    pub fn standard(relays: usize, first_hop: f64, second_hop: f64) -> Self {
        Self::uniform(
            relays,
            [
                FsoLinkParams::standard(first_hop),
                FsoLinkParams::standard(second_hop),
            ],
            [
                RfLinkParams::standard(first_hop),
                RfLinkParams::standard(second_hop),
            ],
            100_000,
            0,
        )
    }

    pub fn relays(&self) -> usize {
        self.fso[0].len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.relays();
        if m == 0 {
            return Err(Error::invalid(
                "network.relays",
                "at least one relay is required",
            ));
        }
        for hop in Hop::ALL {
            let l = hop.index();
            if self.fso[l].len() != m || self.rf[l].len() != m {
                return Err(Error::Shape(format!(
                    "hop {} has {} FSO and {} RF links, expected {m}",
                    hop.label(),
                    self.fso[l].len(),
                    self.rf[l].len()
                )));
            }
            for (i, p) in self.fso[l].iter().enumerate() {
                p.validate(&format!("links.fso[{}][{}]", hop.label(), i + 1))?;
            }
            for (i, p) in self.rf[l].iter().enumerate() {
                p.validate(&format!("links.rf[{}][{}]", hop.label(), i + 1))?;
            }
        }
        Ok(())
    }
}
