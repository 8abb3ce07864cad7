use nalgebra::DMatrix;

use crate::error::Result;
use crate::geometry::{MetricData, NurbsSurface};

/// How geometric arrays are scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorMode {
    /// Multiplied by `J * w_k * rho_l`.
    Galerkin,
    /// Raw pointwise values.
    Collocation,
}

/// Geometric arrays on a `Q1 x Q2` tensor grid of one element.
#[derive(Clone, Debug)]
pub struct GeometricFactors {
    pub mode: FactorMode,
    /// `g^{ab}`, scaled in Galerkin mode.
    pub g: [[DMatrix<f64>; 2]; 2],
    /// `g^{ab} Gamma^mu_{ab}` indexed `[mu][a][b]`, scaled in Galerkin mode.
    pub c: [[[DMatrix<f64>; 2]; 2]; 2],
    /// `sum_{ab} c[mu][a][b]`.
    pub c_sum: [DMatrix<f64>; 2],
    /// `J * w * rho` in Galerkin mode, `J` in collocation mode.
    pub jw: DMatrix<f64>,
    pub metric: Vec<MetricData>,
}

impl GeometricFactors {
    pub fn shape(&self) -> (usize, usize) {
        self.jw.shape()
    }

    pub fn metric_at(&self, k: usize, l: usize) -> &MetricData {
        &self.metric[k * self.jw.ncols() + l]
    }
}

/// Evaluates the metric on `pts_u x pts_v` inside the element whose
/// midpoint is `cell`. Galerkin mode requires quadrature weights.
pub fn geometric_factors(
    surf: &NurbsSurface,
    cell: (f64, f64),
    pts_u: &[f64],
    pts_v: &[f64],
    weights: Option<(&[f64], &[f64])>,
    mode: FactorMode,
) -> Result<GeometricFactors> {
    let (qu, qv) = (pts_u.len(), pts_v.len());
    let z = || DMatrix::<f64>::zeros(qu, qv);
    let mut g = [[z(), z()], [z(), z()]];
    let mut c = [[[z(), z()], [z(), z()]], [[z(), z()], [z(), z()]]];
    let mut c_sum = [z(), z()];
    let mut jw = z();
    let mut metric = Vec::with_capacity(qu * qv);
    for k in 0..qu {
        for l in 0..qv {
            let m = surf.metric_in((pts_u[k], pts_v[l]), cell)?;
            let scale = match (mode, weights) {
                (FactorMode::Galerkin, Some((wu, wv))) => m.jac * wu[k] * wv[l],
                (FactorMode::Galerkin, None) => m.jac,
                (FactorMode::Collocation, _) => 1.0,
            };
            for a in 0..2 {
                for b in 0..2 {
                    g[a][b][(k, l)] = m.g_inv[a][b] * scale;
                    for mu in 0..2 {
                        let v = m.g_inv[a][b] * m.christoffel[mu][a][b] * scale;
                        c[mu][a][b][(k, l)] = v;
                        c_sum[mu][(k, l)] += v;
                    }
                }
            }
            jw[(k, l)] = if mode == FactorMode::Galerkin { scale } else { m.jac };
            metric.push(m);
        }
    }
    Ok(GeometricFactors {
        mode,
        g,
        c,
        c_sum,
        jw,
        metric,
    })
}
