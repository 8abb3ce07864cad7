//! Dense linear solves, condition numbers, the Allen–Cahn fixed point and
//! error norms.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{kernels, Discretization};
use crate::bc::{self, LinearSystem};
use crate::error::{Error, Result};
use crate::geometry::BcKind;
use crate::problems::{parametric_gradient, Equation, ExactSolution, Problem};

/// Size above which the condition number is estimated instead of computed
/// from the full SVD.
pub const SVD_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Solved,
    /// Increment below the tolerance.
    Converged,
    /// Increment stopped decreasing at roundoff level.
    Stagnated,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub u: Vec<f64>,
    pub cond2: f64,
    pub iterations: usize,
    pub increments: Vec<f64>,
    pub termination: Termination,
    /// Size of the solved (possibly augmented) system.
    pub n_unknowns: usize,
}

/// 2-norm condition number.
pub fn cond2(m: &DMatrix<f64>) -> f64 {
    if m.nrows() > SVD_LIMIT {
        return cond2_estimate(m, 1e-3);
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Power iteration on `A^T A` and inverse power iteration through an LU
/// factorization, each run to relative change `rtol`.
pub fn cond2_estimate(m: &DMatrix<f64>, rtol: f64) -> f64 {
    let n = m.nrows();
    let lu = m.clone().lu();
    let lut = m.transpose().lu();
    let start = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618).fract());
    let iterate = |f: &dyn Fn(&DVector<f64>) -> Option<DVector<f64>>| -> f64 {
        let mut x = start.normalize();
        let mut lam = 0.0;
        for _ in 0..500 {
            let y = match f(&x) {
                Some(y) => y,
                None => return f64::INFINITY,
            };
            let next = y.norm();
            x = y / next;
            if (next - lam).abs() <= rtol * next {
                return next.sqrt();
            }
            lam = next;
        }
        lam.sqrt()
    };
    let smax = iterate(&|x| Some(m.transpose() * (m * x)));
    let sinv = iterate(&|x| lut.solve(&lu.solve(x)?));
    smax * sinv
}

/// Dense LU solve returning the first `n_dofs` unknowns.
fn lu_solve(sys: &LinearSystem) -> Result<Vec<f64>> {
    Ok(solve_full(&sys.matrix, &sys.rhs)?.rows(0, sys.n_dofs).iter().copied().collect())
}

/// Maximum number of iterative refinement steps after the LU solve.
const REFINE_STEPS: usize = 4;

/// LU solve followed by iterative refinement with compensated residuals.
/// A correction is kept only while corrections keep shrinking.
fn solve_full(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = m.clone().lu();
    let mut x = match lu.solve(b) {
        Some(x) if x.iter().all(|v| v.is_finite()) => x,
        _ => return Err(Error::SingularMatrix { cond: cond2(m) }),
    };
    let mut last = x.amax();
    for _ in 0..REFINE_STEPS {
        let Some(d) = lu.solve(&residual(m, &x, b)) else { break };
        let size = d.amax();
        if !(size < 0.5 * last) {
            break;
        }
        x += d;
        last = size;
        if size <= f64::EPSILON * x.amax() {
            break;
        }
    }
    Ok(x)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// `b - m x` with compensated products and sums, accurate to about twice
/// the working precision.
pub fn residual(m: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(m.nrows(), |i, _| {
        let (mut s, mut c) = (b[i], 0.0);
        for j in 0..m.ncols() {
            let p = -m[(i, j)] * x[j];
            let ep = (-m[(i, j)]).mul_add(x[j], -p);
            let (t, es) = two_sum(s, p);
            s = t;
            c += ep + es;
        }
        s + c
    })
}

/// Dense LU solve, refined iteratively, with the condition number of the
/// matrix.
pub fn solve_linear(sys: &LinearSystem) -> Result<SolveReport> {
    let u = lu_solve(sys)?;
    Ok(SolveReport {
        u,
        cond2: cond2(&sys.matrix),
        iterations: 1,
        increments: Vec::new(),
        termination: Termination::Solved,
        n_unknowns: sys.n_unknowns(),
    })
}

/// Assembles `-Delta + c(u_n)` with boundary conditions for `problem`.
/// For Allen–Cahn the reaction is `u_n^2 - 1` (`u_n = 0` when absent).
pub fn build_system(d: &Discretization, problem: &Problem, u_n: Option<&[f64]>) -> Result<LinearSystem> {
    let (k, f) = base_system(d, problem);
    with_reaction(d, problem, &k, &f, u_n)
}

/// Stiffness matrix and load vector, before reaction terms and boundary
/// conditions.
fn base_system(d: &Discretization, problem: &Problem) -> (DMatrix<f64>, Vec<f64>) {
    let src = |m: &crate::geometry::MetricData| problem.source(m);
    (d.stiffness_matrix(), d.load_vector(&src))
}

fn with_reaction(d: &Discretization, problem: &Problem, k: &DMatrix<f64>, f: &[f64], u_n: Option<&[f64]>) -> Result<LinearSystem> {
    let mut k = k.clone();
    if problem.equation == Equation::AllenCahn {
        k += d.reaction_matrix(u_n, &|v| v * v - 1.0);
    }
    impose_bcs(d, problem, LinearSystem::new(k, f.to_vec()))
}

fn impose_bcs(d: &Discretization, problem: &Problem, mut sys: LinearSystem) -> Result<LinearSystem> {
    let dir = problem.sides(BcKind::Dirichlet);
    let neu = problem.sides(BcKind::Neumann);
    let q_dir = bc::restriction(d, &dir)?;
    let hn = |x: &crate::geometry::Vec3, nu: &crate::geometry::Vec3| problem.neumann_value(x, nu);
    let hd = |x: &crate::geometry::Vec3| problem.dirichlet_value(x);
    if !neu.is_empty() {
        bc::apply_neumann(&mut sys, d, &neu, &q_dir, &hn)?;
    }
    if d.kind().is_spline() {
        bc::least_squares_dirichlet(&sys, d, &dir, &hd)
    } else {
        bc::apply_dirichlet_rows(&mut sys, d, &dir, &hd)?;
        Ok(sys)
    }
}

pub fn solve_problem(d: &Discretization, problem: &Problem) -> Result<SolveReport> {
    solve_linear(&build_system(d, problem, None)?)
}

/// Fixed point `-Delta u_{n+1} - u_{n+1} + u_n^2 u_{n+1} = f` starting from
/// the linear part. Stops when the H1 increment is below `tol`, or when it
/// stops decreasing below the roundoff floor `10 eps cond2 |u|` (with
/// `cond2` of the linear part, capped at `1 / eps`).
pub fn allen_cahn_fixed_point(d: &Discretization, problem: &Problem, tol: f64, max_iter: usize) -> Result<SolveReport> {
    if problem.equation != Equation::AllenCahn {
        return Err(Error::InvalidInput("fixed point needs an Allen–Cahn problem".into()));
    }
    let gram = d.h1_gram_matrix()?;
    let h1 = |v: &[f64]| -> f64 {
        let x = DVector::from_column_slice(v);
        (x.dot(&(&gram * &x))).max(0.0).sqrt()
    };
    // K and f are shared by every step; each new iterate is the previous one
    // plus a correction solved from an accurately computed residual, so the
    // increments are not swamped by the rounding of a full solve.
    let (k, f) = base_system(d, problem);
    let first = with_reaction(d, problem, &k, &f, None)?;
    let cond_linear = cond2(&first.matrix);
    let mut x = solve_full(&first.matrix, &first.rhs)?;
    let n = first.n_dofs;
    let mut increments = Vec::new();
    for it in 1..=max_iter {
        let u: Vec<f64> = x.rows(0, n).iter().copied().collect();
        let sys = with_reaction(d, problem, &k, &f, Some(&u))?;
        if sys.rhs.len() != x.len() {
            return Err(Error::InvalidInput("system size changed between iterations".into()));
        }
        let delta = solve_full(&sys.matrix, &residual(&sys.matrix, &x, &sys.rhs))?;
        x += &delta;
        let dn = h1(delta.rows(0, n).as_slice());
        increments.push(dn);
        let u: Vec<f64> = x.rows(0, n).iter().copied().collect();
        let floor = 10.0 * f64::EPSILON * cond_linear.min(1.0 / f64::EPSILON) * h1(&u);
        let stalled = increments.len() >= 2 && dn >= 0.5 * increments[increments.len() - 2];
        let done = if dn <= tol {
            Some(Termination::Converged)
        } else if dn <= floor && stalled {
            Some(Termination::Stagnated)
        } else {
            None
        };
        if let Some(t) = done {
            return Ok(SolveReport {
                u,
                cond2: cond2(&sys.matrix),
                iterations: it,
                increments,
                termination: t,
                n_unknowns: sys.n_unknowns(),
            });
        }
        if !dn.is_finite() {
            break;
        }
    }
    Err(Error::Divergence {
        iterations: increments.len(),
        last: increments.last().copied().unwrap_or(f64::NAN),
        increments,
    })
}

/// `(L2 error, H1 error)` of the field with coefficients `u` against
/// `exact`, using the accurate Gauss rule on every element.
pub fn h1_error(d: &Discretization, u: &[f64], exact: &dyn ExactSolution) -> Result<(f64, f64)> {
    let blocks = d.overkill_blocks()?;
    let parts: Vec<(f64, f64)> = blocks
        .par_iter()
        .map(|b| {
            let ul = d.dofs().scatter_element(u, b.elem.0, b.elem.1);
            let val = kernels::values(&b.bu, &b.bv, &ul);
            let du = &b.bu.d1 * &ul * b.bv.m.transpose();
            let dv = &b.bu.m * &ul * b.bv.d1.transpose();
            let (qu, qv) = b.gf.shape();
            let (mut l2, mut semi) = (0.0, 0.0);
            for k in 0..qu {
                for l in 0..qv {
                    let m = b.gf.metric_at(k, l);
                    let g = parametric_gradient(exact, m);
                    let e = val[(k, l)] - exact.value(&m.x);
                    let ea = [du[(k, l)] - g[0], dv[(k, l)] - g[1]];
                    let w = b.gf.jw[(k, l)];
                    l2 += w * e * e;
                    for a in 0..2 {
                        for c in 0..2 {
                            semi += w * m.g_inv[a][c] * ea[a] * ea[c];
                        }
                    }
                }
            }
            (l2, semi)
        })
        .collect();
    let (l2, semi) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok((l2.sqrt(), (l2 + semi).sqrt()))
}
