//! Reference bases on `[0, 1]`: B-splines, NURBS, and Lagrange interpolants
//! on Gauss–Lobatto–Legendre or Gauss–Lobatto–Chebyshev nodes.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splinecore::{self, KnotVector, WeightVector};

/// The seven discretizations: trial family letter followed by test scheme
/// letter (Galerkin or Collocation). `S` = B-spline, `I` = NURBS,
/// `C` = Chebyshev, `L` = Legendre.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodKind {
    SG,
    SC,
    IG,
    IC,
    CC,
    CG,
    LG,
}

/// Trial basis family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    BSpline,
    Nurbs,
    GllLagrange,
    GlcLagrange,
}

impl MethodKind {
    pub const ALL: [MethodKind; 7] = [
        MethodKind::SG,
        MethodKind::SC,
        MethodKind::IG,
        MethodKind::IC,
        MethodKind::CC,
        MethodKind::CG,
        MethodKind::LG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::SG => "SG",
            MethodKind::SC => "SC",
            MethodKind::IG => "IG",
            MethodKind::IC => "IC",
            MethodKind::CC => "CC",
            MethodKind::CG => "CG",
            MethodKind::LG => "LG",
        }
    }

    pub fn family(self) -> Family {
        match self {
            MethodKind::SG | MethodKind::SC => Family::BSpline,
            MethodKind::IG | MethodKind::IC => Family::Nurbs,
            MethodKind::CC | MethodKind::CG => Family::GlcLagrange,
            MethodKind::LG => Family::GllLagrange,
        }
    }

    pub fn is_galerkin(self) -> bool {
        matches!(self, MethodKind::SG | MethodKind::IG | MethodKind::CG | MethodKind::LG)
    }

    pub fn is_collocation(self) -> bool {
        !self.is_galerkin()
    }

    pub fn is_spline(self) -> bool {
        matches!(self.family(), Family::BSpline | Family::Nurbs)
    }

    /// Lagrange spaces glued with value and derivative continuity.
    pub fn is_c1_lagrange(self) -> bool {
        matches!(self, MethodKind::CC | MethodKind::CG)
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown method '{s}'")))
    }
}

/// One reference basis on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceBasis1D {
    BSpline(KnotVector),
    Nurbs(KnotVector, WeightVector),
    GllLagrange(usize),
    GlcLagrange(usize),
}

impl ReferenceBasis1D {
    pub fn family(&self) -> Family {
        match self {
            ReferenceBasis1D::BSpline(_) => Family::BSpline,
            ReferenceBasis1D::Nurbs(..) => Family::Nurbs,
            ReferenceBasis1D::GllLagrange(_) => Family::GllLagrange,
            ReferenceBasis1D::GlcLagrange(_) => Family::GlcLagrange,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            ReferenceBasis1D::BSpline(kv) | ReferenceBasis1D::Nurbs(kv, _) => kv.num_basis(),
            ReferenceBasis1D::GllLagrange(n) | ReferenceBasis1D::GlcLagrange(n) => *n,
        }
    }

    /// Interpolation nodes of the Lagrange families.
    pub fn nodes(&self) -> Result<Option<Vec<f64>>> {
        Ok(match self {
            ReferenceBasis1D::GllLagrange(n) => Some(gll_points(*n)?),
            ReferenceBasis1D::GlcLagrange(n) => Some(glc_points(*n)?),
            _ => None,
        })
    }

    pub fn matrices(&self, eval_at: &[f64]) -> Result<BasisMatrices> {
        match self.nodes()? {
            Some(nodes) => lagrange_matrices(&nodes, eval_at),
            None => spline_matrices(self, eval_at),
        }
    }
}

/// Values and derivatives of `n` functions at `Q` points, each `Q x n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisMatrices {
    pub m: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
}

impl BasisMatrices {
    pub fn zeros(q: usize, n: usize) -> Self {
        BasisMatrices {
            m: DMatrix::zeros(q, n),
            d1: DMatrix::zeros(q, n),
            d2: DMatrix::zeros(q, n),
        }
    }

    pub fn npoints(&self) -> usize {
        self.m.nrows()
    }

    pub fn nfuncs(&self) -> usize {
        self.m.ncols()
    }

    /// Chain rule for the affine map `t = (s - a) / h`.
    pub fn scaled(mut self, h: f64) -> Self {
        self.d1 /= h;
        self.d2 /= h * h;
        self
    }
}

/// Legendre polynomial `P_N` and its derivative at `x`.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        let d2 = d0 + (2.0 * kf - 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Interior GLL nodes on `[-1, 1]`: roots of `P'_N`, ascending.
fn gll_interior(n_deg: usize) -> Vec<f64> {
    let nf = n_deg as f64;
    let mut x: Vec<f64> = (1..n_deg)
        .map(|j| -(std::f64::consts::PI * j as f64 / nf).cos())
        .collect();
    for xi in x.iter_mut() {
        for _ in 0..100 {
            let (p, dp) = legendre(n_deg, *xi);
            let d2p = (2.0 * *xi * dp - nf * (nf + 1.0) * p) / (1.0 - *xi * *xi);
            let dx = dp / d2p;
            *xi -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
    }
    let k = x.len();
    let sym: Vec<f64> = (0..k).map(|j| 0.5 * (x[j] - x[k - 1 - j])).collect();
    sym
}

/// Gauss–Lobatto–Legendre points on `[0, 1]`.
pub fn gll_points(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("GLL needs n >= 2, got {n}")));
    }
    let mut pts = vec![0.0];
    pts.extend(gll_interior(n - 1).into_iter().map(|x| 0.5 * (1.0 + x)));
    pts.push(1.0);
    Ok(pts)
}

/// Gauss–Lobatto–Chebyshev points on `[0, 1]`.
pub fn glc_points(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("GLC needs n >= 2, got {n}")));
    }
    let mut pts: Vec<f64> = (0..n)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / (n - 1) as f64).cos()))
        .collect();
    for j in 0..n / 2 {
        pts[n - 1 - j] = 1.0 - pts[j];
    }
    if n % 2 == 1 {
        pts[n / 2] = 0.5;
    }
    pts[0] = 0.0;
    pts[n - 1] = 1.0;
    Ok(pts)
}

fn barycentric_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    let mut lam = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                let d = nodes[j] - nodes[k];
                if d == 0.0 {
                    return Err(Error::InvalidInput(format!("coincident nodes at {}", nodes[j])));
                }
                lam[j] /= d;
            }
        }
    }
    Ok(lam)
}

/// Lagrange cardinal functions on `nodes` evaluated at `eval_at`.
pub fn lagrange_matrices(nodes: &[f64], eval_at: &[f64]) -> Result<BasisMatrices> {
    let n = nodes.len();
    let lam = barycentric_weights(nodes)?;
    let mut out = BasisMatrices::zeros(eval_at.len(), n);
    for (r, &x) in eval_at.iter().enumerate() {
        let hit = nodes
            .iter()
            .position(|&xi| (x - xi).abs() <= 4.0 * f64::EPSILON);
        if let Some(i) = hit {
            out.m[(r, i)] = 1.0;
            let xi = nodes[i];
            let mut diag = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                let dij = (lam[j] / lam[i]) / (xi - nodes[j]);
                out.d1[(r, j)] = dij;
                diag -= dij;
            }
            out.d1[(r, i)] = diag;
            let mut diag2 = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                let v = 2.0 * out.d1[(r, j)] * (diag - 1.0 / (xi - nodes[j]));
                out.d2[(r, j)] = v;
                diag2 -= v;
            }
            out.d2[(r, i)] = diag2;
            continue;
        }
        let denom: f64 = (0..n).map(|k| lam[k] / (x - nodes[k])).sum();
        for j in 0..n {
            let lj = lam[j] / (x - nodes[j]) / denom;
            let (mut a, mut b) = (0.0, 0.0);
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j {
                    let t = 1.0 / (x - xk);
                    a += t;
                    b += t * t;
                }
            }
            out.m[(r, j)] = lj;
            out.d1[(r, j)] = lj * a;
            out.d2[(r, j)] = lj * (a * a - b);
        }
    }
    Ok(out)
}

/// Global spline matrices (`Q x n`) of a spline reference basis.
pub fn spline_matrices(rb: &ReferenceBasis1D, eval_at: &[f64]) -> Result<BasisMatrices> {
    let (kv, w) = match rb {
        ReferenceBasis1D::BSpline(kv) => (kv, None),
        ReferenceBasis1D::Nurbs(kv, w) => (kv, Some(w)),
        _ => return Err(Error::InvalidInput("not a spline basis".into())),
    };
    let mut out = BasisMatrices::zeros(eval_at.len(), kv.num_basis());
    for (r, &s) in eval_at.iter().enumerate() {
        let e = match w {
            Some(w) => splinecore::eval_nurbs(kv, w, s)?,
            None => splinecore::eval_bspline(kv, s)?,
        };
        for j in 0..kv.num_basis() {
            out.m[(r, j)] = e.values[j];
            out.d1[(r, j)] = e.d1[j];
            out.d2[(r, j)] = e.d2[j];
        }
    }
    Ok(out)
}

/// Collocation point choice for the spline collocation methods.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointStrategy {
    #[default]
    Greville,
    Demko,
    Optimized,
}

impl FromStr for PointStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greville" => Ok(PointStrategy::Greville),
            "demko" => Ok(PointStrategy::Demko),
            "optimized" | "optimised" => Ok(PointStrategy::Optimized),
            other => Err(Error::Parse(format!("unknown point set '{other}'"))),
        }
    }
}

/// Test side of a method.
#[derive(Clone, Debug, PartialEq)]
pub enum TestScheme {
    Galerkin,
    Collocation(Vec<f64>),
}

/// Test scheme of `kind` on a single-element reference basis. Optimized
/// points start from Greville; the bench refines them.
pub fn test_scheme(kind: MethodKind, rb_trial: &ReferenceBasis1D, points: PointStrategy) -> Result<TestScheme> {
    if kind.family() != rb_trial.family() {
        return Err(Error::InvalidInput(format!(
            "{kind} cannot use a {:?} trial basis",
            rb_trial.family()
        )));
    }
    if kind.is_galerkin() {
        return Ok(TestScheme::Galerkin);
    }
    match rb_trial {
        ReferenceBasis1D::BSpline(kv) | ReferenceBasis1D::Nurbs(kv, _) => Ok(TestScheme::Collocation(match points {
            PointStrategy::Demko => splinecore::demko_abscissae(kv, 1e-12)?,
            _ => splinecore::greville_abscissae(kv),
        })),
        ReferenceBasis1D::GlcLagrange(n) => Ok(TestScheme::Collocation(glc_points(*n)?)),
        ReferenceBasis1D::GllLagrange(_) => Err(Error::InvalidInput("LG is a Galerkin method".into())),
    }
}
