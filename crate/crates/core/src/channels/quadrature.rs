//! Gauss-Hermite quadrature for integrals of the form `∫ exp(-t²) f(t) dt`.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `order`-point rule. Nodes are the eigenvalues of the
    /// Hermite Jacobi matrix, located by Sturm-count bisection; weights come
    /// from the normalized recurrence. Nodes are returned in decreasing order.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let bound = (2.0 * n as f64).sqrt() + 1.0;
        for i in 0..n.div_ceil(2) {
            // nodes[i] has n - 1 - i eigenvalues below it
            let rank = n - 1 - i;
            let (mut lo, mut hi) = (0.0, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if eigenvalues_below(n, mid) <= rank {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z = if n % 2 == 1 && i == n / 2 {
                0.0
            } else {
                0.5 * (lo + hi)
            };
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = weight(n, z);
            weights[n - 1 - i] = weights[i];
        }
        GaussHermite { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    /// Same as [`integrate`](Self::integrate) for an even integrand, using
    /// only the non-negative half of the nodes.
    pub fn integrate_even(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.nodes.len();
        let mut acc = 0.0;
        for i in 0..n / 2 {
            acc += 2.0 * self.weights[i] * f(self.nodes[i]);
        }
        if n % 2 == 1 {
            acc += self.weights[n / 2] * f(0.0);
        }
        acc
    }
}

/// Eigenvalues of the Jacobi matrix (zero diagonal, off-diagonal
/// `sqrt(k / 2)`) lying below `x`.
fn eigenvalues_below(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    for k in 0..n {
        if k > 0 {
            q = -x - 0.5 * k as f64 / q;
        }
        if q == 0.0 {
            q = -f64::EPSILON * x.abs().max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Christoffel weight at node `z` from the normalized Hermite functions. The
/// recurrence is rescaled as it goes because the outer nodes of large rules
/// overflow it.
fn weight(n: usize, z: f64) -> f64 {
    const RESCALE: f64 = 1e100;
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    let mut log_scale = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        if p1.abs() > RESCALE {
            p1 /= RESCALE;
            p2 /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    let pp = (2.0 * n as f64).sqrt() * p2;
    2.0 * (-2.0 * (pp.abs().ln() + log_scale)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_gaussian_weight() {
        for order in [1, 2, 5, 16, 64, 100] {
            let gh = GaussHermite::new(order);
            let m0 = gh.integrate(|_| 1.0);
            assert!((m0 - PI.sqrt()).abs() < 1e-12, "order {order}: {m0}");
            if order >= 2 {
                // ∫ t² e^{-t²} = √π / 2
                let m2 = gh.integrate(|t| t * t);
                assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let gh = GaussHermite::new(8);
        // ∫ t^8 e^{-t²} = 105 √π / 16, needs order >= 5
        let m8 = gh.integrate(|t| t.powi(8));
        assert!((m8 - 105.0 * PI.sqrt() / 16.0).abs() < 1e-10);
        let odd = gh.integrate(|t| t.powi(7));
        assert!(odd.abs() < 1e-12);
    }

    #[test]
    fn even_half_rule_matches_full_rule() {
        for order in [7, 64] {
            let gh = GaussHermite::new(order);
            let f = |t: f64| (t * t).cos() + t.powi(4);
            assert!((gh.integrate(f) - gh.integrate_even(f)).abs() < 1e-12);
        }
    }
}
