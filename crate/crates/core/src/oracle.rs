//! Brute-force reference computations.
//!
//! Everything here is deliberately naive: exhaustive enumeration and grid
//! search with no knowledge of the closed forms used by the policies. Tests,
//! the acceptance suite and `verify` compare the policies against these.

use rand::Rng;

use crate::channels::{CapacityMatrix, Hop};

/// Synthetic capacity matrix whose entries span two decades, with about one
/// entry in twenty set to zero, so that every selection mode wins regularly.
pub fn random_capacities<R: Rng + ?Sized>(rng: &mut R, relays: usize) -> CapacityMatrix<f64> {
    let mut entry = || {
        if rng.random::<f64>() < 0.05 {
            0.0
        } else {
            rng.random::<f64>() * 10f64.powf(rng.random_range(-1.0..1.0))
        }
    };
    let mut row = || (0..relays).map(|_| entry()).collect::<Vec<_>>();
    let fso = [row(), row()];
    let rf = [row(), row()];
    CapacityMatrix { fso, rf }
}

/// Best non-buffered slot rate by enumerating every assignment of the four
/// roles (FSO in, FSO out, RF in, RF out) to relays, and every RF split on a
/// uniform grid of `grid_steps + 1` points. Each relay contributes
/// `min(in, out)`.
pub fn nonba_exhaustive(c: &CapacityMatrix<f64>, grid_steps: usize) -> f64 {
    let relays = c.relays();
    let mut best = 0.0f64;
    let mut inflow = vec![0.0; relays];
    let mut outflow = vec![0.0; relays];
    for f_in in 0..relays {
        for f_out in 0..relays {
            for r_in in 0..relays {
                for r_out in 0..relays {
                    for k in 0..=grid_steps {
                        let rho1 = k as f64 / grid_steps as f64;
                        inflow.iter_mut().for_each(|x| *x = 0.0);
                        outflow.iter_mut().for_each(|x| *x = 0.0);
                        inflow[f_in] += c.fso(Hop::First, f_in);
                        inflow[r_in] += rho1 * c.rf(Hop::First, r_in);
                        outflow[f_out] += c.fso(Hop::Second, f_out);
                        outflow[r_out] += (1.0 - rho1) * c.rf(Hop::Second, r_out);
                        let total: f64 = inflow.iter().zip(&outflow).map(|(i, o)| i.min(*o)).sum();
                        best = best.max(total);
                    }
                }
            }
        }
    }
    best
}

/// Largest achievable RF time-share rate `max_rho min(rho a, (1-rho) b)` on a grid.
pub fn rf_split_grid(a: f64, b: f64, grid_steps: usize) -> f64 {
    (0..=grid_steps)
        .map(|k| {
            let rho = k as f64 / grid_steps as f64;
            (rho * a).min((1.0 - rho) * b)
        })
        .fold(0.0, f64::max)
}

/// Best single-relay buffered throughput over `lambda = k / grid_steps`,
/// evaluated on a fixed trace. With one relay both FSO links are always
/// used and the weight only steers the RF band: reception when
/// `lambda C1rf >= (1 - lambda) C2rf`. Returns `(lambda, throughput)`.
pub fn single_relay_lambda_grid(trace: &[CapacityMatrix<f64>], grid_steps: usize) -> (f64, f64) {
    let n = trace.len().max(1) as f64;
    let mut best = (0.0, -1.0);
    for k in 0..=grid_steps {
        let lambda = k as f64 / grid_steps as f64;
        let (mut arrival, mut departure) = (0.0, 0.0);
        for c in trace {
            assert_eq!(c.relays(), 1, "single-relay oracle");
            arrival += c.fso[0][0];
            departure += c.fso[1][0];
            if lambda * c.rf[0][0] >= (1.0 - lambda) * c.rf[1][0] {
                arrival += c.rf[0][0];
            } else {
                departure += c.rf[1][0];
            }
        }
        let tp = arrival.min(departure) / n;
        if tp > best.1 {
            best = (lambda, tp);
        }
    }
    best
}

/// Exhaustive argmax over a flat list, lowest index on ties.
pub fn argmax_exhaustive(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= *v => {}
            _ => best = Some(i),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hybrid_examples_on_grid() {
        let c = CapacityMatrix::from_rows(&[100.0], &[40.0], &[10.0], &[10.0]);
        assert!((nonba_exhaustive(&c, 10_000) - 50.0).abs() < 1e-9);
        let c = CapacityMatrix::from_rows(&[50.0], &[40.0], &[20.0], &[20.0]);
        assert!((nonba_exhaustive(&c, 10_000) - 55.0).abs() < 1e-9);
    }

    #[test]
    fn rf_split() {
        assert!((rf_split_grid(30.0, 60.0, 30_000) - 20.0).abs() < 1e-9);
    }
}
