//! Exact solutions and the boundary value problems built from them.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::geometry::{dot, BcKind, MetricData, Side, Vec3};

pub type Mat3 = [[f64; 3]; 3];

/// A smooth function on R³ with derivatives up to second order.
pub trait ExactSolution: Send + Sync + std::fmt::Debug {
    fn value(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
    fn hessian(&self, x: &Vec3) -> Mat3;
}

/// `-(1/2pi) log |x - c|`, harmonic in any plane through `c`.
#[derive(Clone, Copy, Debug)]
pub struct LogSource {
    pub center: Vec3,
}

impl Default for LogSource {
    fn default() -> Self {
        LogSource { center: [1.0, 1.0, 0.0] }
    }
}

impl LogSource {
    fn offset(&self, x: &Vec3) -> (Vec3, f64) {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        let r2 = dot(&d, &d);
        (d, r2)
    }
}

impl ExactSolution for LogSource {
    fn value(&self, x: &Vec3) -> f64 {
        let (_, r2) = self.offset(x);
        -0.25 / PI * r2.ln()
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        let (d, r2) = self.offset(x);
        d.map(|di| -0.5 / PI * di / r2)
    }

    fn hessian(&self, x: &Vec3) -> Mat3 {
        let (d, r2) = self.offset(x);
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                h[i][j] = -0.5 / PI * (delta / r2 - 2.0 * d[i] * d[j] / (r2 * r2));
            }
        }
        h
    }
}

/// `cos(x2) cos(x3)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CosCos;

impl ExactSolution for CosCos {
    fn value(&self, x: &Vec3) -> f64 {
        x[1].cos() * x[2].cos()
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        [0.0, -x[1].sin() * x[2].cos(), -x[1].cos() * x[2].sin()]
    }

    fn hessian(&self, x: &Vec3) -> Mat3 {
        let (c2, s2, c3, s3) = (x[1].cos(), x[1].sin(), x[2].cos(), x[2].sin());
        [[0.0, 0.0, 0.0], [0.0, -c2 * c3, s2 * s3], [0.0, s2 * s3, -c2 * c3]]
    }
}

/// `x1^2 - x2^3`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cubic;

impl ExactSolution for Cubic {
    fn value(&self, x: &Vec3) -> f64 {
        x[0] * x[0] - x[1].powi(3)
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        [2.0 * x[0], -3.0 * x[1] * x[1], 0.0]
    }

    fn hessian(&self, x: &Vec3) -> Mat3 {
        [[2.0, 0.0, 0.0], [0.0, -6.0 * x[1], 0.0], [0.0, 0.0, 0.0]]
    }
}

/// A polynomial `c0 + g.x + x^T A x / 2` (tests and examples).
#[derive(Clone, Copy, Debug)]
pub struct Quadratic {
    pub c0: f64,
    pub g: Vec3,
    pub a: Mat3,
}

impl ExactSolution for Quadratic {
    fn value(&self, x: &Vec3) -> f64 {
        let ax = mat_vec(&self.a, x);
        self.c0 + dot(&self.g, x) + 0.5 * dot(x, &ax)
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        let ax = mat_vec(&self.a, x);
        [self.g[0] + ax[0], self.g[1] + ax[1], self.g[2] + ax[2]]
    }

    fn hessian(&self, _x: &Vec3) -> Mat3 {
        self.a
    }
}

/// `u(R^T x)`: a solution carried along by the rotation `R`.
#[derive(Clone, Debug)]
pub struct Rotated {
    pub inner: Arc<dyn ExactSolution>,
    pub rotation: Mat3,
}

fn mat_vec(a: &Mat3, x: &Vec3) -> Vec3 {
    [dot(&a[0], x), dot(&a[1], x), dot(&a[2], x)]
}

fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

impl ExactSolution for Rotated {
    fn value(&self, x: &Vec3) -> f64 {
        self.inner.value(&mat_vec(&transpose(&self.rotation), x))
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        let y = mat_vec(&transpose(&self.rotation), x);
        mat_vec(&self.rotation, &self.inner.gradient(&y))
    }

    fn hessian(&self, x: &Vec3) -> Mat3 {
        let rt = transpose(&self.rotation);
        let h = self.inner.hessian(&mat_vec(&rt, x));
        mat_mul(&mat_mul(&self.rotation, &h), &rt)
    }
}

/// Parametric gradient `(grad u . x_1, grad u . x_2)`.
pub fn parametric_gradient(u: &dyn ExactSolution, m: &MetricData) -> [f64; 2] {
    let g = u.gradient(&m.x);
    [dot(&g, &m.tangents[0]), dot(&g, &m.tangents[1])]
}

/// Laplace–Beltrami operator of the restriction of `u` to the surface.
pub fn laplace_beltrami(u: &dyn ExactSolution, m: &MetricData) -> f64 {
    let g = u.gradient(&m.x);
    let h = u.hessian(&m.x);
    let d1 = [dot(&g, &m.tangents[0]), dot(&g, &m.tangents[1])];
    let mut out = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let hb = mat_vec(&h, &m.tangents[b]);
            let second = dot(&m.tangents[a], &hb) + dot(&g, &m.hessian[a][b]);
            let first: f64 = (0..2).map(|mu| m.christoffel[mu][a][b] * d1[mu]).sum();
            out += m.g_inv[a][b] * (second - first);
        }
    }
    out
}

/// Conormal derivative `grad u . nu`.
pub fn conormal_derivative(u: &dyn ExactSolution, x: &Vec3, nu: &Vec3) -> f64 {
    dot(&u.gradient(x), nu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Equation {
    /// `-Delta u = f`
    LaplaceBeltrami,
    /// `-Delta u - u + u^3 = f`
    AllenCahn,
}

/// A manufactured boundary value problem: the source and boundary data
/// are generated from `exact`.
#[derive(Clone, Debug)]
pub struct Problem {
    pub equation: Equation,
    pub exact: Arc<dyn ExactSolution>,
    /// Boundary condition per side in the order of [`Side::ALL`].
    pub bc: [BcKind; 4],
}

impl Problem {
    pub fn dirichlet(equation: Equation, exact: Arc<dyn ExactSolution>) -> Self {
        Problem {
            equation,
            exact,
            bc: [BcKind::Dirichlet; 4],
        }
    }

    pub fn with_neumann(mut self, side: Side) -> Self {
        self.bc[side_index(side)] = BcKind::Neumann;
        self
    }

    pub fn bc_on(&self, side: Side) -> BcKind {
        self.bc[side_index(side)]
    }

    pub fn sides(&self, kind: BcKind) -> Vec<Side> {
        Side::ALL.into_iter().filter(|&s| self.bc_on(s) == kind).collect()
    }

    pub fn source(&self, m: &MetricData) -> f64 {
        let lap = -laplace_beltrami(self.exact.as_ref(), m);
        match self.equation {
            Equation::LaplaceBeltrami => lap,
            Equation::AllenCahn => {
                let u = self.exact.value(&m.x);
                lap - u + u * u * u
            }
        }
    }

    pub fn dirichlet_value(&self, x: &Vec3) -> f64 {
        self.exact.value(x)
    }

    pub fn neumann_value(&self, x: &Vec3, nu: &Vec3) -> f64 {
        conormal_derivative(self.exact.as_ref(), x, nu)
    }
}

pub(crate) fn side_index(side: Side) -> usize {
    Side::ALL.iter().position(|&s| s == side).unwrap_or(0)
}
