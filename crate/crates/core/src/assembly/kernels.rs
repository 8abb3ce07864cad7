//! Element kernels. Each operator comes twice: a sum-factorized apply built
//! from small matrix products, and a dense element matrix built by looping
//! over basis pairs.

use nalgebra::DMatrix;

use super::factors::GeometricFactors;
use crate::basis::BasisMatrices;

/// Weak Laplace–Beltrami form `(grad psi, grad u)` on one element.
pub fn galerkin_stiffness_apply(
    gf: &GeometricFactors,
    bu: &BasisMatrices,
    bv: &BasisMatrices,
    u: &DMatrix<f64>,
) -> DMatrix<f64> {
    let u1 = &bu.d1 * u * bv.m.transpose();
    let u2 = &bu.m * u * bv.d1.transpose();
    let w1 = gf.g[0][0].component_mul(&u1) + gf.g[0][1].component_mul(&u2);
    let w2 = gf.g[1][0].component_mul(&u1) + gf.g[1][1].component_mul(&u2);
    bu.d1.transpose() * w1 * &bv.m + bu.m.transpose() * w2 * &bv.d1
}

/// `-Delta u` at the evaluation points (scaled by the factors' mode).
pub fn strong_lb_values(
    gf: &GeometricFactors,
    bu: &BasisMatrices,
    bv: &BasisMatrices,
    u: &DMatrix<f64>,
) -> DMatrix<f64> {
    let u11 = &bu.d2 * u * bv.m.transpose();
    let u12 = &bu.d1 * u * bv.d1.transpose();
    let u22 = &bu.m * u * bv.d2.transpose();
    let u1 = &bu.d1 * u * bv.m.transpose();
    let u2 = &bu.m * u * bv.d1.transpose();
    let second = gf.g[0][0].component_mul(&u11) + gf.g[0][1].component_mul(&u12) * 2.0 + gf.g[1][1].component_mul(&u22);
    let first = gf.c_sum[0].component_mul(&u1) + gf.c_sum[1].component_mul(&u2);
    first - second
}

/// Values of the field at the evaluation points.
pub fn values(bu: &BasisMatrices, bv: &BasisMatrices, u: &DMatrix<f64>) -> DMatrix<f64> {
    &bu.m * u * bv.m.transpose()
}

/// Weak mass-type form `(psi, c u)` with pointwise weights `cw` (already
/// including `J w rho`).
pub fn galerkin_mass_apply(cw: &DMatrix<f64>, bu: &BasisMatrices, bv: &BasisMatrices, u: &DMatrix<f64>) -> DMatrix<f64> {
    bu.m.transpose() * cw.component_mul(&values(bu, bv, u)) * &bv.m
}

/// Local index of `(i1, i2)`.
#[inline]
fn li(i1: usize, i2: usize, n2: usize) -> usize {
    i1 * n2 + i2
}

/// Dense weak stiffness, rows and columns indexed `i1 * n2 + i2`.
pub fn galerkin_stiffness_dense(gf: &GeometricFactors, bu: &BasisMatrices, bv: &BasisMatrices) -> DMatrix<f64> {
    let (qu, qv) = gf.shape();
    let (n1, n2) = (bu.nfuncs(), bv.nfuncs());
    let mut k = DMatrix::zeros(n1 * n2, n1 * n2);
    // (test-u, trial-u, test-v, trial-v, coefficient)
    let terms = [
        (&bu.d1, &bu.d1, &bv.m, &bv.m, &gf.g[0][0]),
        (&bu.d1, &bu.m, &bv.m, &bv.d1, &gf.g[0][1]),
        (&bu.m, &bu.d1, &bv.d1, &bv.m, &gf.g[1][0]),
        (&bu.m, &bu.m, &bv.d1, &bv.d1, &gf.g[1][1]),
    ];
    let mut h = vec![0.0; qv];
    for i1 in 0..n1 {
        for j1 in 0..n1 {
            for &(au, bu_, av, bv_, g) in &terms {
                for (l, hl) in h.iter_mut().enumerate() {
                    *hl = (0..qu).map(|q| g[(q, l)] * au[(q, i1)] * bu_[(q, j1)]).sum();
                }
                for i2 in 0..n2 {
                    for j2 in 0..n2 {
                        let v: f64 = (0..qv).map(|l| h[l] * av[(l, i2)] * bv_[(l, j2)]).sum();
                        k[(li(i1, i2, n2), li(j1, j2, n2))] += v;
                    }
                }
            }
        }
    }
    k
}

/// Dense weak mass-type matrix with pointwise weights `cw`.
pub fn galerkin_mass_dense(cw: &DMatrix<f64>, bu: &BasisMatrices, bv: &BasisMatrices) -> DMatrix<f64> {
    let (qu, qv) = cw.shape();
    let (n1, n2) = (bu.nfuncs(), bv.nfuncs());
    let mut k = DMatrix::zeros(n1 * n2, n1 * n2);
    let mut h = vec![0.0; qv];
    for i1 in 0..n1 {
        for j1 in 0..n1 {
            for (l, hl) in h.iter_mut().enumerate() {
                *hl = (0..qu).map(|q| cw[(q, l)] * bu.m[(q, i1)] * bu.m[(q, j1)]).sum();
            }
            for i2 in 0..n2 {
                for j2 in 0..n2 {
                    k[(li(i1, i2, n2), li(j1, j2, n2))] = (0..qv).map(|l| h[l] * bv.m[(l, i2)] * bv.m[(l, j2)]).sum();
                }
            }
        }
    }
    k
}

/// Dense strong operator: row `k * Qv + l` holds `-Delta phi_j` at point
/// `(k, l)` for every local function `j`.
pub fn strong_lb_dense(gf: &GeometricFactors, bu: &BasisMatrices, bv: &BasisMatrices) -> DMatrix<f64> {
    let (qu, qv) = gf.shape();
    let (n1, n2) = (bu.nfuncs(), bv.nfuncs());
    let mut k = DMatrix::zeros(qu * qv, n1 * n2);
    for q in 0..qu {
        for l in 0..qv {
            let r = q * qv + l;
            let (g11, g12, g22) = (gf.g[0][0][(q, l)], gf.g[0][1][(q, l)], gf.g[1][1][(q, l)]);
            let (c1, c2) = (gf.c_sum[0][(q, l)], gf.c_sum[1][(q, l)]);
            for j1 in 0..n1 {
                for j2 in 0..n2 {
                    let (m1, d1, d2u) = (bu.m[(q, j1)], bu.d1[(q, j1)], bu.d2[(q, j1)]);
                    let (m2, e1, d2v) = (bv.m[(l, j2)], bv.d1[(l, j2)], bv.d2[(l, j2)]);
                    k[(r, li(j1, j2, n2))] =
                        -(g11 * d2u * m2 + 2.0 * g12 * d1 * e1 + g22 * m1 * d2v) + c1 * d1 * m2 + c2 * m1 * e1;
                }
            }
        }
    }
    k
}

/// Dense point values: row `k * Qv + l`, column `j1 * n2 + j2`.
pub fn values_dense(bu: &BasisMatrices, bv: &BasisMatrices) -> DMatrix<f64> {
    let (qu, qv) = (bu.npoints(), bv.npoints());
    let (n1, n2) = (bu.nfuncs(), bv.nfuncs());
    DMatrix::from_fn(qu * qv, n1 * n2, |r, c| bu.m[(r / qv, c / n2)] * bv.m[(r % qv, c % n2)])
}
