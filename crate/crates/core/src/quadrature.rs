//! Gauss–Legendre quadrature on [−1, 1].

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes (ascending) and weights of the `order`-point Gauss–Legendre rule.
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!("quadrature order {order} < 2")));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule() {
        let (x, w) = gauss_legendre(2).unwrap();
        let a = 1.0 / 3f64.sqrt();
        assert!((x[0] + a).abs() < 1e-15 && (x[1] - a).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        for order in [3, 8, 17, 32, 64] {
            let (x, w) = gauss_legendre(order).unwrap();
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for degree in 0..2 * order {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(degree as i32)).sum();
                let want = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "order {order} degree {degree}: {got}");
            }
        }
    }

    #[test]
    fn smooth_integrand() {
        let (x, w) = gauss_legendre(32).unwrap();
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((got - (1f64.exp() - (-1f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn order_below_two_is_rejected() {
        assert!(gauss_legendre(1).is_err());
        assert!(gauss_legendre(0).is_err());
    }
}
