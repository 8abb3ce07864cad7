use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splinecore::{self, KnotVector, WeightVector};

pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(acc: &mut Vec3, c: f64, x: &Vec3) {
    for k in 0..3 {
        acc[k] += c * x[k];
    }
}

/// Tensor-product rational surface over `[0,1]^2`. Control data is stored
/// row-major: index `i * n_v + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct NurbsSurface {
    kv_u: KnotVector,
    kv_v: KnotVector,
    weights: Vec<f64>,
    ctrl: Vec<Vec3>,
}

/// Map and its first and second partial derivatives at a point.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceDerivs {
    pub x: Vec3,
    pub xu: Vec3,
    pub xv: Vec3,
    pub xuu: Vec3,
    pub xuv: Vec3,
    pub xvv: Vec3,
}

/// Differential geometry at one parametric point.
#[derive(Clone, Copy, Debug)]
pub struct MetricData {
    pub s: (f64, f64),
    pub x: Vec3,
    /// Covariant tangents `g_1`, `g_2`.
    pub tangents: [Vec3; 2],
    /// Second derivatives `x_{ab}`.
    pub hessian: [[Vec3; 2]; 2],
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub jac: f64,
    /// `christoffel[mu][a][b]` is the second-kind symbol with upper index `mu`.
    pub christoffel: [[[f64; 2]; 2]; 2],
}

impl MetricData {
    /// `sum_{ab} g^{ab} Gamma^mu_{ab}`, the first-derivative coefficient of the
    /// Laplace–Beltrami operator.
    pub fn contracted_christoffel(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for (mu, cm) in c.iter_mut().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    *cm += self.g_inv[a][b] * self.christoffel[mu][a][b];
                }
            }
        }
        c
    }
}

/// Side of the reference square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// `s1 = 0`
    U0,
    /// `s1 = 1`
    U1,
    /// `s2 = 0`
    V0,
    /// `s2 = 1`
    V1,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::U0, Side::U1, Side::V0, Side::V1];

    /// Parametric point at edge coordinate `t`.
    pub fn point(self, t: f64) -> (f64, f64) {
        match self {
            Side::U0 => (0.0, t),
            Side::U1 => (1.0, t),
            Side::V0 => (t, 0.0),
            Side::V1 => (t, 1.0),
        }
    }

    /// Reference outward normal.
    pub fn reference_normal(self) -> [f64; 2] {
        match self {
            Side::U0 => [-1.0, 0.0],
            Side::U1 => [1.0, 0.0],
            Side::V0 => [0.0, -1.0],
            Side::V1 => [0.0, 1.0],
        }
    }

    /// Direction (0 or 1) along which the edge runs.
    pub fn tangent_dir(self) -> usize {
        match self {
            Side::U0 | Side::U1 => 1,
            Side::V0 | Side::V1 => 0,
        }
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "u0" => Ok(Side::U0),
            "u1" => Ok(Side::U1),
            "v0" => Ok(Side::V0),
            "v1" => Ok(Side::V1),
            other => Err(Error::Parse(format!("unknown side '{other}'"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::U0 => "u0",
            Side::U1 => "u1",
            Side::V0 => "v0",
            Side::V1 => "v1",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Boundary condition type on one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundarySide {
    pub side: Side,
    pub kind: BcKind,
}

impl NurbsSurface {
    pub fn new(kv_u: KnotVector, kv_v: KnotVector, weights: Vec<f64>, ctrl: Vec<Vec3>) -> Result<Self> {
        let n = kv_u.num_basis() * kv_v.num_basis();
        if weights.len() != n {
            return Err(Error::WeightMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        if ctrl.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} control points for a {}x{} net",
                ctrl.len(),
                kv_u.num_basis(),
                kv_v.num_basis()
            )));
        }
        WeightVector::new(weights.clone())?;
        Ok(NurbsSurface {
            kv_u,
            kv_v,
            weights,
            ctrl,
        })
    }

    pub fn kv_u(&self) -> &KnotVector {
        &self.kv_u
    }

    pub fn kv_v(&self) -> &KnotVector {
        &self.kv_v
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ctrl(&self) -> &[Vec3] {
        &self.ctrl
    }

    pub fn n_u(&self) -> usize {
        self.kv_u.num_basis()
    }

    pub fn n_v(&self) -> usize {
        self.kv_v.num_basis()
    }

    /// Map value at `s`.
    pub fn point(&self, s: (f64, f64)) -> Result<Vec3> {
        Ok(self.derivatives(s)?.x)
    }

    pub fn derivatives(&self, s: (f64, f64)) -> Result<SurfaceDerivs> {
        self.derivatives_in(s, s)
    }

    /// Derivatives at `s` using the knot spans that contain `cell`. Passing
    /// an element midpoint gives one-sided values on element boundaries.
    pub fn derivatives_in(&self, s: (f64, f64), cell: (f64, f64)) -> Result<SurfaceDerivs> {
        for v in [s.0, s.1] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(v));
            }
        }
        let bu = splinecore::eval_bspline_span(&self.kv_u, self.kv_u.find_span(cell.0), s.0);
        let bv = splinecore::eval_bspline_span(&self.kv_v, self.kv_v.find_span(cell.1), s.1);
        let nv = self.n_v();
        // a[k][l]: homogeneous sums with k derivatives in u and l in v.
        let mut a = [[[0.0f64; 4]; 3]; 3];
        for (iu, _) in bu.values.iter().enumerate() {
            let du = [bu.values[iu], bu.d1[iu], bu.d2[iu]];
            for (jv, _) in bv.values.iter().enumerate() {
                let dv = [bv.values[jv], bv.d1[jv], bv.d2[jv]];
                let idx = (bu.first + iu) * nv + bv.first + jv;
                let w = self.weights[idx];
                let p = &self.ctrl[idx];
                let h = [w * p[0], w * p[1], w * p[2], w];
                for k in 0..3 {
                    for l in 0..3 - k {
                        let c = du[k] * dv[l];
                        for (dst, src) in a[k][l].iter_mut().zip(&h) {
                            *dst += c * src;
                        }
                    }
                }
            }
        }
        let w = a[0][0][3];
        let split = |h: &[f64; 4]| -> Vec3 { [h[0], h[1], h[2]] };
        let x = split(&a[0][0]).map(|c| c / w);
        let first = |h: &[f64; 4]| -> Vec3 {
            let mut r = split(h);
            axpy(&mut r, -h[3], &x);
            r.map(|c| c / w)
        };
        let xu = first(&a[1][0]);
        let xv = first(&a[0][1]);
        let second = |h: &[f64; 4], ya: &Vec3, wb: f64, yb: &Vec3, wa: f64| -> Vec3 {
            let mut r = split(h);
            axpy(&mut r, -wb, ya);
            axpy(&mut r, -wa, yb);
            axpy(&mut r, -h[3], &x);
            r.map(|c| c / w)
        };
        let (wu, wv) = (a[1][0][3], a[0][1][3]);
        let xuu = second(&a[2][0], &xu, wu, &xu, wu);
        let xuv = second(&a[1][1], &xu, wv, &xv, wu);
        let xvv = second(&a[0][2], &xv, wv, &xv, wv);
        Ok(SurfaceDerivs {
            x,
            xu,
            xv,
            xuu,
            xuv,
            xvv,
        })
    }

    pub fn metric(&self, s: (f64, f64)) -> Result<MetricData> {
        self.metric_in(s, s)
    }

    /// Metric data evaluated with the spans containing `cell`.
    pub fn metric_in(&self, s: (f64, f64), cell: (f64, f64)) -> Result<MetricData> {
        let d = self.derivatives_in(s, cell)?;
        let t = [d.xu, d.xv];
        let hess = [[d.xuu, d.xuv], [d.xuv, d.xvv]];
        let mut g = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                g[a][b] = dot(&t[a], &t[b]);
            }
        }
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let scale = g[0][0] * g[1][1];
        if !(det > 1e-14 * scale) || !det.is_finite() {
            return Err(Error::SingularMetric(s.0, s.1));
        }
        let g_inv = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
        // dg[c][a][b] = d_c g_ab
        let mut dg = [[[0.0; 2]; 2]; 2];
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    dg[c][a][b] = dot(&hess[a][c], &t[b]) + dot(&t[a], &hess[b][c]);
                }
            }
        }
        // Christoffel symbols of the first kind, first index lowered.
        let mut first = [[[0.0; 2]; 2]; 2];
        for l in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    first[l][m][n] = 0.5 * (dg[n][l][m] + dg[m][l][n] - dg[l][m][n]);
                }
            }
        }
        let mut christoffel = [[[0.0; 2]; 2]; 2];
        for mu in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    christoffel[mu][a][b] = g_inv[mu][0] * first[0][a][b] + g_inv[mu][1] * first[1][a][b];
                }
            }
        }
        Ok(MetricData {
            s,
            x: d.x,
            tangents: t,
            hessian: hess,
            g,
            g_inv,
            jac: det.sqrt(),
            christoffel,
        })
    }

    /// Outward unit conormal on `side` at edge coordinate `t`, using the
    /// spans containing `cell_t` along the edge.
    pub fn boundary_normal_in(&self, side: Side, t: f64, cell_t: f64) -> Result<Vec3> {
        let s = side.point(t);
        let cell = side.point(cell_t);
        let m = self.metric_in(s, cell)?;
        let nu_hat = side.reference_normal();
        let mut nu = [0.0; 3];
        axpy(&mut nu, nu_hat[0], &m.tangents[0]);
        axpy(&mut nu, nu_hat[1], &m.tangents[1]);
        let tan = m.tangents[side.tangent_dir()];
        let tt = dot(&tan, &tan);
        let c = dot(&nu, &tan) / tt;
        axpy(&mut nu, -c, &tan);
        let len = norm(&nu);
        if !(len > 1e-14) {
            return Err(Error::SingularMetric(s.0, s.1));
        }
        Ok(nu.map(|x| x / len))
    }

    pub fn boundary_normal(&self, side: Side, t: f64) -> Result<Vec3> {
        self.boundary_normal_in(side, t, t)
    }

    /// Arc-length rate `|dx/dt|` along `side`.
    pub fn edge_jacobian_in(&self, side: Side, t: f64, cell_t: f64) -> Result<f64> {
        let d = self.derivatives_in(side.point(t), side.point(cell_t))?;
        Ok(norm(if side.tangent_dir() == 0 { &d.xu } else { &d.xv }))
    }

    /// Exact refinement onto larger knot vectors (degree elevation plus
    /// knot insertion in homogeneous coordinates).
    pub fn refine_to(&self, target_u: &KnotVector, target_v: &KnotVector) -> Result<NurbsSurface> {
        let (nu, nv) = (self.n_u(), self.n_v());
        let hom = |idx: usize| -> Vec<f64> {
            let w = self.weights[idx];
            let p = &self.ctrl[idx];
            vec![w * p[0], w * p[1], w * p[2], w]
        };
        // Refine along u for every fixed j: pack column j as rows of dim 4.
        let mut stage: Vec<Vec<Vec<f64>>> = Vec::with_capacity(nv);
        for j in 0..nv {
            let rows: Vec<Vec<f64>> = (0..nu).map(|i| hom(i * nv + j)).collect();
            stage.push(splinecore::refine_rows_to(&self.kv_u, &rows, target_u)?);
        }
        let nu2 = target_u.num_basis();
        let nv2 = target_v.num_basis();
        let mut weights = vec![0.0; nu2 * nv2];
        let mut ctrl = vec![[0.0; 3]; nu2 * nv2];
        for i in 0..nu2 {
            let rows: Vec<Vec<f64>> = (0..nv).map(|j| stage[j][i].clone()).collect();
            let r = splinecore::refine_rows_to(&self.kv_v, &rows, target_v)?;
            for (j, h) in r.iter().enumerate() {
                let w = h[3];
                weights[i * nv2 + j] = w;
                ctrl[i * nv2 + j] = [h[0] / w, h[1] / w, h[2] / w];
            }
        }
        NurbsSurface::new(target_u.clone(), target_v.clone(), weights, ctrl)
    }

    /// k-refinement of both directions from the current knots.
    pub fn k_refine(&self, m: usize) -> Result<NurbsSurface> {
        self.refine_to(&splinecore::k_refine(&self.kv_u, m)?, &splinecore::k_refine(&self.kv_v, m)?)
    }

    /// Control points mapped through `f`.
    pub fn map_ctrl(&self, f: impl Fn(&Vec3) -> Vec3) -> NurbsSurface {
        NurbsSurface {
            ctrl: self.ctrl.iter().map(f).collect(),
            ..self.clone()
        }
    }

    /// Weight function restricted to one direction when the weights are
    /// separable (`w_ij = a_i b_j`); `None` otherwise.
    pub fn separable_weights(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let (nu, nv) = (self.n_u(), self.n_v());
        let w00 = self.weights[0];
        let a: Vec<f64> = (0..nu).map(|i| self.weights[i * nv] / w00).collect();
        let b: Vec<f64> = (0..nv).map(|j| self.weights[j]).collect();
        for i in 0..nu {
            for j in 0..nv {
                let w = self.weights[i * nv + j];
                if (w - a[i] * b[j]).abs() > 1e-13 * w {
                    return None;
                }
            }
        }
        Some((a, b))
    }
}

/// Map value at `s`.
pub fn eval_surface(surf: &NurbsSurface, s: (f64, f64)) -> Result<Vec3> {
    surf.point(s)
}

/// Metric, Jacobian and Christoffel symbols at `s`.
pub fn eval_metric(surf: &NurbsSurface, s: (f64, f64)) -> Result<MetricData> {
    surf.metric(s)
}

/// Outward unit conormal on `side` at edge coordinate `t`.
pub fn boundary_normal(surf: &NurbsSurface, side: Side, t: f64) -> Result<Vec3> {
    surf.boundary_normal(side, t)
}
