//! Average (path-loss) gains of the FSO and RF links.

use std::f64::consts::PI;

use super::params::{FsoLinkParams, RfLinkParams};
use crate::error::{Error, Result};

/// Average FSO gain: responsivity times geometric collection loss times
/// weather attenuation.
///
/// `distance == 0` is legal and saturates both loss factors at one.
pub fn fso_avg_gain(p: &FsoLinkParams) -> Result<f64> {
    let exponent = -p.attenuation * p.distance / 10.0;
    if exponent.is_nan() {
        return Err(Error::invalid(
            "fso.attenuation",
            "attenuation times distance is undefined",
        ));
    }
    let geometric = if p.distance == 0.0 {
        1.0
    } else {
        let arg = PI.sqrt() * p.aperture_radius / (2f64.sqrt() * p.divergence * p.distance);
        libm::erf(arg).powi(2)
    };
    Ok(p.responsivity * geometric * 10f64.powf(exponent))
}

/// Average RF power gain: free-space loss up to the reference distance, then
/// power-law decay with the link's path-loss exponent.
pub fn rf_avg_gain(p: &RfLinkParams) -> Result<f64> {
    if p.distance == 0.0 {
        return Err(Error::invalid(
            "rf.distance",
            "RF average gain is undefined at zero distance",
        ));
    }
    let free_space =
        p.wavelength * (p.tx_gain * p.rx_gain).sqrt() / (4.0 * PI * p.reference_distance);
    Ok(free_space.powi(2) * (p.reference_distance / p.distance).powf(p.path_loss_exponent))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Maclaurin series of erf, independent of libm.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..60 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn zero_distance_saturates_at_responsivity() {
        let mut p = FsoLinkParams::standard(0.0);
        p.responsivity = 0.7;
        assert_eq!(fso_avg_gain(&p).unwrap(), 0.7);
        // and approaches it continuously
        p.distance = 1e-6;
        assert!((fso_avg_gain(&p).unwrap() - 0.7).abs() < 1e-7);
    }

    #[test]
    fn default_fso_gain_at_800m() {
        let p = FsoLinkParams::standard(800.0);
        let arg = PI.sqrt() * 0.1 / (2f64.sqrt() * 2e-3 * 800.0);
        let oracle = 0.5 * erf_series(arg).powi(2) * 10f64.powf(-0.032 * 800.0 / 10.0);
        let got = fso_avg_gain(&p).unwrap();
        assert!((got - oracle).abs() / oracle < 1e-12);
        assert!((got - 1.071e-5).abs() / 1.071e-5 < 2e-3, "{got}");
    }

    #[test]
    fn doubling_attenuation_multiplies_by_exponent() {
        let mut p = FsoLinkParams::standard(800.0);
        let base = fso_avg_gain(&p).unwrap();
        p.attenuation = 0.064;
        let ratio = fso_avg_gain(&p).unwrap() / base;
        assert!((ratio - 10f64.powf(-2.56)).abs() / ratio < 1e-12);
    }

    #[test]
    fn rf_gain_at_reference_distance() {
        let p = RfLinkParams::standard(80.0);
        let expected = (0.0857 * 10.0 / (4.0 * PI * 80.0)).powi(2);
        let got = rf_avg_gain(&p).unwrap();
        assert!((got - expected).abs() / expected < 1e-12);
        assert!((got - 7.27e-7).abs() / 7.27e-7 < 2e-3, "{got}");
    }

    #[test]
    fn rf_gain_power_law() {
        let near = rf_avg_gain(&RfLinkParams::standard(80.0)).unwrap();
        let far = rf_avg_gain(&RfLinkParams::standard(160.0)).unwrap();
        assert!((far / near - 2f64.powf(-3.5)).abs() < 1e-12);
    }

    #[test]
    fn rf_gain_rejects_zero_distance() {
        assert!(rf_avg_gain(&RfLinkParams::standard(0.0)).is_err());
    }
}
