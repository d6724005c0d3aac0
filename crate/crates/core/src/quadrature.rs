//! Gauss–Hermite quadrature for expectations under a standard normal law.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Number of nodes used for normal-jump integrals.
pub const GAUSS_HERMITE_POINTS: usize = 64;

/// Nodes and weights for `∫ f(x) e^{−x²} dx ≈ Σ wᵢ f(xᵢ)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes via Newton iteration on the orthonormal Hermite recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let pim4 = PI.powf(-0.25);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Self { nodes, weights }
    }

    /// `E[f(Z)]` for `Z ~ N(0, 1)`.
    pub fn normal_expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let scale = std::f64::consts::SQRT_2;
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(scale * x))
            .sum();
        sum / PI.sqrt()
    }
}

/// Shared 64-point rule.
pub fn standard() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(GAUSS_HERMITE_POINTS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sqrt_pi() {
        let rule = standard();
        let total: f64 = rule.weights.iter().sum();
        assert!((total - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn normal_moments_are_exact() {
        let rule = standard();
        // E[Z^{2k}] = (2k-1)!!
        let expected = [1.0, 1.0, 3.0, 15.0, 105.0, 945.0];
        for (k, &e) in expected.iter().enumerate() {
            let got = rule.normal_expectation(|z| z.powi(2 * k as i32));
            assert!((got - e).abs() < 1e-12 * e, "order {}: {got}", 2 * k);
        }
        assert!(rule.normal_expectation(|z| z.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn smooth_integrand_matches_closed_form() {
        // E[cos Z] = e^{-1/2}
        let got = standard().normal_expectation(f64::cos);
        assert!((got - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn small_rule_nodes() {
        let rule = GaussHermite::new(2);
        assert!((rule.nodes[0] - 0.5f64.sqrt()).abs() < 1e-14);
    }
}
