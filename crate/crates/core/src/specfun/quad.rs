//! Fixed-order Gauss-Legendre quadrature.
//!
//! Nodes are the roots of the Legendre polynomial P_n, found by Newton
//! iteration from the Chebyshev-angle initial guess; weights follow from the
//! derivative. Rules are cached per order since the channel integrals reuse
//! a small set of orders (64/128/256) across entire sweeps.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::{OdoError, Result};

pub const MAX_ORDER: usize = 512;

/// An immutable quadrature rule on [-1, 1]: Σ w_i f(x_i) ≈ ∫ f.
///
/// Nodes are strictly increasing and symmetric about zero; weights are
/// positive and sum to 2. Exact for polynomials of degree ≤ 2·order - 1.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Integrate `f` over [a, b] by affine mapping of the reference nodes.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Build (or fetch from cache) the Gauss-Legendre rule of the given order.
pub fn gauss_legendre(order: usize) -> Result<Arc<QuadratureRule>> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(OdoError::Domain(format!(
            "gauss_legendre supports orders 1..={MAX_ORDER}, got {order}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    Ok(Arc::clone(
        guard
            .entry(order)
            .or_insert_with(|| Arc::new(build_rule(order))),
    ))
}

fn build_rule(order: usize) -> QuadratureRule {
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let pairs = n / 2;
    for i in 0..pairs {
        // largest root first: x ≈ cos(π(i + 3/4) / (n + 1/2))
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        // mirror pair, exactly symmetric by construction
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[pairs] = 0.0;
        weights[pairs] = 2.0 / (d * d);
    }
    QuadratureRule {
        nodes,
        weights,
        order,
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x² - 1); |x| < 1 at every root
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_and_two_are_textbook() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_eq!(r1.weights(), &[2.0]);

        let r2 = gauss_legendre(2).unwrap();
        let inv_sqrt3 = 1.0 / 3f64.sqrt();
        assert!((r2.nodes()[0] + inv_sqrt3).abs() < 1e-15);
        assert!((r2.nodes()[1] - inv_sqrt3).abs() < 1e-15);
        assert!((r2.weights()[0] - 1.0).abs() < 1e-15);
        assert!((r2.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degree_seven_exactness_at_order_four() {
        let r = gauss_legendre(4).unwrap();
        let got = r.integrate(-1.0, 1.0, |x| x.powi(6));
        assert!((got - 2.0 / 7.0).abs() < 1e-14, "got {got}");
    }

    #[test]
    fn rule_invariants_across_orders() {
        for &order in &[1usize, 2, 3, 5, 16, 64, 128, 256, 512] {
            let r = gauss_legendre(order).unwrap();
            let sum: f64 = r.weights().iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "order {order}: Σw = {sum}");
            for w in r.weights() {
                assert!(*w > 0.0);
            }
            for pair in r.nodes().windows(2) {
                assert!(pair[0] < pair[1], "order {order}: nodes not increasing");
            }
            for i in 0..order {
                let mirrored = r.nodes()[order - 1 - i];
                assert!(
                    (r.nodes()[i] + mirrored).abs() < 1e-14,
                    "order {order}: asymmetric nodes"
                );
            }
            // exactness at the highest guaranteed degree, 2·order - 1 (odd
            // powers vanish by symmetry, so check 2·order - 2 as well)
            let deg = 2 * order as i32 - 2;
            let got = r.integrate(-1.0, 1.0, |x| x.powi(deg));
            let exact = 2.0 / (deg as f64 + 1.0);
            assert!(
                ((got - exact) / exact).abs() < 1e-12,
                "order {order}: ∫x^{deg} = {got}, exact {exact}"
            );
        }
    }

    #[test]
    fn constant_over_zero_pi_returns_pi() {
        let r = gauss_legendre(64).unwrap();
        let got = r.integrate(0.0, std::f64::consts::PI, |_| 1.0);
        assert!((got - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn rejects_out_of_range_order() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(513).is_err());
    }

    #[test]
    fn cache_returns_shared_rule() {
        let a = gauss_legendre(64).unwrap();
        let b = gauss_legendre(64).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
