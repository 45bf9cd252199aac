//! Small-scale fading draws.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::params::GammaGamma;
use crate::error::{Error, Result};

/// One slot of fading for every link of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization {
    /// FSO channel gains `h̄·h̃`, linear.
    pub fso_gain: [Vec<f64>; 2],
    /// RF channel magnitudes `√ḡ·|g̃|`, linear.
    pub rf_magnitude: [Vec<f64>; 2],
}

impl FadingRealization {
    pub fn zeros(relays: usize) -> Self {
        FadingRealization {
            fso_gain: [vec![0.0; relays], vec![0.0; relays]],
            rf_magnitude: [vec![0.0; relays], vec![0.0; relays]],
        }
    }
}

/// Unit-mean Gamma-Gamma variate, drawn as the product of two independent
/// unit-mean Gamma variates.
#[derive(Debug, Clone, Copy)]
pub struct GammaGammaFading {
    large: Gamma<f64>,
    small: Gamma<f64>,
}

impl GammaGammaFading {
    pub fn new(params: GammaGamma) -> Result<Self> {
        let unit_mean = |shape: f64| {
            Gamma::new(shape, 1.0 / shape)
                .map_err(|e| Error::invalid("turbulence", format!("bad Gamma shape {shape}: {e}")))
        };
        Ok(GammaGammaFading {
            large: unit_mean(params.large_scale)?,
            small: unit_mean(params.small_scale)?,
        })
    }
}

impl Distribution<f64> for GammaGammaFading {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.large.sample(rng) * self.small.sample(rng)
    }
}

/// Magnitude of a Rician fading coefficient with direct-to-scattered power
/// ratio `k` and total power `E{|g|²} = power`.
#[derive(Debug, Clone, Copy)]
pub struct RicianMagnitude {
    los: f64,
    sigma: f64,
}

impl RicianMagnitude {
    pub fn new(k: f64, power: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite() && power > 0.0 && power.is_finite()) {
            return Err(Error::invalid(
                "rician",
                format!("need k >= 0 and power > 0, got ({k}, {power})"),
            ));
        }
        Ok(RicianMagnitude {
            los: (k * power / (k + 1.0)).sqrt(),
            sigma: (power / (2.0 * (k + 1.0))).sqrt(),
        })
    }
}

impl Distribution<f64> for RicianMagnitude {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        (self.los + self.sigma * re).hypot(self.sigma * im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn gamma_gamma_has_unit_mean_and_product_variance() {
        let params = GammaGamma {
            large_scale: 2.23,
            small_scale: 1.54,
        };
        let dist = GammaGammaFading::new(params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..1_000_000).map(|_| dist.sample(&mut rng)).collect();
        let (mean, var) = mean_var(&xs);
        let se = (var / xs.len() as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");
        // moment formula for a product of independent unit-mean Gammas
        let expected = 1.0 / 2.23 + 1.0 / 1.54 + 1.0 / (2.23 * 1.54);
        assert!((params.scintillation_variance() - expected).abs() < 1e-15);
        // heavy-tailed fourth moment; a 3% band is ~5 standard errors at 1e6 draws
        assert!(
            (var - expected).abs() / expected < 0.03,
            "var {var} vs {expected}"
        );
    }

    #[test]
    fn rician_total_power() {
        for (k, power) in [(4.0, 1.0), (0.0, 2.0), (10.0, 0.5)] {
            let dist = RicianMagnitude::new(k, power).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let p: Vec<f64> = (0..1_000_000)
                .map(|_| dist.sample(&mut rng).powi(2))
                .collect();
            let (mean, var) = mean_var(&p);
            let se = (var / p.len() as f64).sqrt();
            assert!((mean - power).abs() < 3.0 * se, "k={k}: {mean} vs {power}");
        }
    }

    #[test]
    fn rician_rejects_bad_parameters() {
        assert!(RicianMagnitude::new(-1.0, 1.0).is_err());
        assert!(RicianMagnitude::new(1.0, 0.0).is_err());
    }
}
