//! One-dimensional quadrature rules on `[0, 1]`.

use crate::basis::{self, MethodKind};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule1D {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Affine image on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadRule1D {
        let h = b - a;
        QuadRule1D {
            points: self.points.iter().map(|&x| a + h * x).collect(),
            weights: self.weights.iter().map(|&w| h * w).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Legendre rule with `q` points, exact to degree `2q - 1`.
pub fn gauss_legendre(q: usize) -> Result<QuadRule1D> {
    if q == 0 {
        return Err(Error::InvalidInput("Gauss rule needs at least one point".into()));
    }
    let qf = q as f64;
    let mut points = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = basis::legendre(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = basis::legendre(q, x);
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        points[i] = 0.5 * (1.0 - x);
        points[q - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        points[q / 2] = 0.5;
    }
    Ok(QuadRule1D { points, weights })
}

/// Gauss–Lobatto–Legendre rule on `n` points, exact to degree `2n - 3`.
pub fn gll_rule(n: usize) -> Result<QuadRule1D> {
    let points = basis::gll_points(n)?;
    let nd = (n - 1) as f64;
    let weights = points
        .iter()
        .map(|&s| {
            let (p, _) = basis::legendre(n - 1, 2.0 * s - 1.0);
            1.0 / (nd * (nd + 1.0) * p * p)
        })
        .collect();
    Ok(QuadRule1D { points, weights })
}

/// Gauss–Lobatto–Chebyshev rule for the Chebyshev-weighted measure; the
/// weights sum to `pi / 2`.
pub fn glc_rule(n: usize) -> Result<QuadRule1D> {
    let points = basis::glc_points(n)?;
    let inner = std::f64::consts::PI / (n - 1) as f64;
    let weights = (0..n)
        .map(|j| if j == 0 || j == n - 1 { 0.25 * inner } else { 0.5 * inner })
        .collect();
    Ok(QuadRule1D { points, weights })
}

/// Per-element rule used by a Galerkin method with `n` local functions.
pub fn rule_for_method(kind: MethodKind, n: usize) -> Result<QuadRule1D> {
    match kind {
        MethodKind::LG => gll_rule(n),
        MethodKind::CG => glc_rule(n),
        MethodKind::SG | MethodKind::IG => gauss_legendre(2 * n - 1),
        _ => Err(Error::Unsupported(format!("{kind} is a collocation method and has no stiffness rule"))),
    }
}

/// Rule used for error norms regardless of the method.
pub fn overkill_rule(n: usize) -> Result<QuadRule1D> {
    gauss_legendre(n + 10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_small_rules() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.points, vec![0.5]);
        assert!((r1.weights[0] - 1.0).abs() < 1e-15);
        let r2 = gauss_legendre(2).unwrap();
        let d = 0.5 / 3f64.sqrt();
        assert!((r2.points[0] - (0.5 - d)).abs() < 1e-15 && (r2.points[1] - (0.5 + d)).abs() < 1e-15);
        assert!((r2.weights[0] - 0.5).abs() < 1e-15);
        assert!((r2.integrate(|s| s * s * s) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn monomial_exactness() {
        for q in 1..=25 {
            let r = gauss_legendre(q).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.points.windows(2).all(|w| w[0] < w[1]));
            for k in 0..2 * q {
                let exact = 1.0 / (k + 1) as f64;
                assert!((r.integrate(|s| s.powi(k as i32)) - exact).abs() < 1e-14, "q={q} k={k}");
            }
        }
        for n in 2..=20 {
            let r = gll_rule(n).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for k in 0..=2 * n - 3 {
                let exact = 1.0 / (k + 1) as f64;
                assert!((r.integrate(|s| s.powi(k as i32)) - exact).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn gll_classical() {
        assert_eq!(gll_rule(2).unwrap().weights, vec![0.5, 0.5]);
        let r = gll_rule(3).unwrap();
        for (w, e) in r.weights.iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
            assert!((w - e).abs() < 1e-15);
        }
        assert!((r.integrate(|s| s * s) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn glc_weights() {
        let pi = std::f64::consts::PI;
        for n in 2..12 {
            let r = glc_rule(n).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 0.5 * pi).abs() < 1e-14);
        }
        assert!((glc_rule(3).unwrap().weights[0] - pi / 8.0).abs() < 1e-15);
        // Chebyshev-weighted integral of t^2 over [-1,1] is pi/2; half on [0,1].
        let r = glc_rule(5).unwrap();
        let v = r.integrate(|s| (2.0 * s - 1.0).powi(2));
        assert!((v - 0.25 * pi).abs() < 1e-14);
    }

    #[test]
    fn method_rules() {
        assert_eq!(rule_for_method(MethodKind::LG, 8).unwrap().len(), 8);
        assert_eq!(rule_for_method(MethodKind::SG, 8).unwrap().len(), 15);
        assert_eq!(rule_for_method(MethodKind::CG, 8).unwrap(), glc_rule(8).unwrap());
        assert!(matches!(rule_for_method(MethodKind::IC, 4), Err(Error::Unsupported(_))));
        assert_eq!(overkill_rule(3).unwrap().len(), 13);
    }
}
