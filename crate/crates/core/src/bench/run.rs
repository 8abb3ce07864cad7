use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Levels, ProblemKind};
use super::optimize::nelder_mead;
use crate::assembly::{op_count, trial_space, Discretization, MethodConfig, Refinement};
use crate::basis::{MethodKind, PointStrategy};
use crate::error::{Error, Result};
use crate::geometry::NurbsSurface;
use crate::mesh::LocalBasis;
use crate::problems::Problem;
use crate::solver::{self, SolveReport};
use crate::splinecore;

/// Evaluation budget of the optimized collocation points.
pub const OPTIMIZER_BUDGET: usize = 200;

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub experiment: u8,
    pub method: String,
    pub p: usize,
    pub ndof: usize,
    pub h1_error: f64,
    pub l2_error: f64,
    pub cond2: f64,
    pub op_count: u64,
    pub iterations: usize,
    pub wall_ms: f64,
    pub status: String,
}

impl ConvergenceRecord {
    /// Rows with status `ok` or `ok-budget` hold a valid solution.
    pub fn is_ok(&self) -> bool {
        self.status.starts_with("ok")
    }
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::SingularMatrix { .. } => "singular",
        Error::Divergence { .. } => "diverged",
        Error::Unsupported(_) | Error::InsufficientSmoothness(_) => "unsupported",
        _ => "error",
    }
}

/// Method setup of one sweep level.
pub fn method_config(cfg: &ExperimentConfig, surf: &NurbsSurface, kind: MethodKind, level: usize) -> Result<MethodConfig> {
    let base = |p| MethodConfig::new(kind, p, cfg.elements).with_points(cfg.points);
    match cfg.levels {
        Levels::Degrees { .. } => Ok(base(level)),
        Levels::KSteps { .. } => {
            let q = surf.kv_u().degree();
            if surf.kv_v().degree() != q {
                return Err(Error::InvalidInput(
                    "k-refinement sweeps need equal geometry degrees in both directions".into(),
                ));
            }
            Ok(base(q + level).with_refinement(Refinement::K(level)))
        }
    }
}

fn levels(cfg: &ExperimentConfig) -> Vec<usize> {
    match cfg.levels {
        Levels::Degrees { pmin, pmax } => (pmin..=pmax).collect(),
        Levels::KSteps { max } => (0..=max).collect(),
    }
}

fn solve(d: &Discretization, problem: &Problem, cfg: &ExperimentConfig) -> Result<SolveReport> {
    match cfg.problem {
        ProblemKind::Lb => solver::solve_problem(d, problem),
        ProblemKind::Ac => solver::allen_cahn_fixed_point(d, problem, cfg.tol, cfg.max_iter),
    }
}

/// Collocation points of a spline space: interior points move in mirrored
/// pairs around the Greville abscissae.
fn mirrored_points(greville: &[f64], delta: &[f64]) -> Option<Vec<f64>> {
    let n = greville.len();
    let mut pts = greville.to_vec();
    for (k, &dx) in delta.iter().enumerate() {
        let i = k + 1;
        pts[i] += dx;
        pts[n - 1 - i] -= dx;
    }
    let ordered = pts.windows(2).all(|w| w[1] > w[0]);
    if ordered {
        Some(pts)
    } else {
        None
    }
}

fn pair_count(n: usize) -> usize {
    // interior points 1..n-1, pairs (i, n-1-i) with i < n-1-i
    (n.saturating_sub(2)) / 2
}

/// Collocation points minimizing the H1 error over mirrored perturbations
/// of the Greville abscissae, with the flag set when the budget ran out.
pub fn optimized_points(mc: &MethodConfig, surf: &NurbsSurface, problem: &Problem) -> Result<([Vec<f64>; 2], bool)> {
    if !mc.kind.is_spline() || !mc.kind.is_collocation() {
        return Err(Error::InvalidInput(format!("{} has no free collocation points", mc.kind)));
    }
    let dofs = trial_space(mc, surf)?;
    let grev = |s: &crate::mesh::Space1D| match s.basis() {
        LocalBasis::Spline { kv, .. } => Ok(splinecore::greville_abscissae(kv)),
        LocalBasis::Lagrange { .. } => Err(Error::InvalidInput("expected a spline space".into())),
    };
    let (gu, gv) = (grev(&dofs.u)?, grev(&dofs.v)?);
    let (nu, nv) = (pair_count(gu.len()), pair_count(gv.len()));
    let split = |x: &[f64]| -> Option<[Vec<f64>; 2]> {
        Some([mirrored_points(&gu, &x[..nu])?, mirrored_points(&gv, &x[nu..])?])
    };
    let mut objective = |x: &[f64]| -> f64 {
        let Some([pu, pv]) = split(x) else {
            return f64::INFINITY;
        };
        let run = || -> Result<f64> {
            let d = Discretization::from_config(&mc.clone().with_collocation_points(pu, pv), surf)?;
            let r = solver::solve_problem(&d, problem)?;
            Ok(solver::h1_error(&d, &r.u, problem.exact.as_ref())?.1)
        };
        run().unwrap_or(f64::INFINITY)
    };
    let gap = gu.windows(2).chain(gv.windows(2)).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let x0 = vec![0.0; nu + nv];
    let m = nelder_mead(&mut objective, &x0, 0.2 * gap, OPTIMIZER_BUDGET, 1e-6);
    let pts = split(&m.x).expect("minimizer keeps a feasible point");
    Ok((pts, m.exhausted))
}

/// Solves one (method, level) cell. Failures become rows with a status.
pub fn run_cell(cfg: &ExperimentConfig, surf: &NurbsSurface, problem: &Problem, kind: MethodKind, level: usize) -> ConvergenceRecord {
    let start = Instant::now();
    let mut rec = ConvergenceRecord {
        experiment: cfg.id,
        method: kind.name().to_string(),
        p: 0,
        ndof: 0,
        h1_error: f64::NAN,
        l2_error: f64::NAN,
        cond2: f64::NAN,
        op_count: 0,
        iterations: 0,
        wall_ms: 0.0,
        status: String::new(),
    };
    let mc = match method_config(cfg, surf, kind, level) {
        Ok(mc) => mc,
        Err(e) => {
            rec.status = status_of(&e).into();
            return rec;
        }
    };
    rec.p = mc.degree;
    rec.op_count = op_count(kind, (mc.degree + 1) as u64);
    if let Ok(dofs) = trial_space(&mc, surf) {
        rec.ndof = dofs.n_dofs();
    }
    let result = (|| -> Result<(SolveReport, f64, f64, bool)> {
        let (mc, exhausted) = if mc.points == PointStrategy::Optimized && kind.is_spline() && kind.is_collocation() {
            let ([pu, pv], ex) = optimized_points(&mc, surf, problem)?;
            (mc.with_collocation_points(pu, pv), ex)
        } else {
            (mc, false)
        };
        let d = Discretization::from_config(&mc, surf)?;
        let r = solve(&d, problem, cfg)?;
        let (l2, h1) = solver::h1_error(&d, &r.u, problem.exact.as_ref())?;
        Ok((r, l2, h1, exhausted))
    })();
    match result {
        Ok((r, l2, h1, exhausted)) => {
            rec.h1_error = h1;
            rec.l2_error = l2;
            rec.cond2 = r.cond2;
            rec.iterations = r.iterations;
            rec.status = if exhausted { "ok-budget" } else { "ok" }.into();
        }
        Err(e) => {
            if let Error::Divergence { iterations, .. } = &e {
                rec.iterations = *iterations;
            }
            rec.status = status_of(&e).into();
        }
    }
    if cfg.wall_time {
        rec.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    }
    rec
}

/// Runs every (method, level) cell of `cfg` in parallel. Rows come back
/// sorted by method (in the order given) and level.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>> {
    cfg.validate()?;
    let surf = cfg.surface()?;
    let problem = cfg.problem();
    let cells: Vec<(usize, MethodKind, usize)> = cfg
        .methods
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| levels(cfg).into_iter().map(move |l| (i, k, l)))
        .collect();
    let mut rows: Vec<((usize, usize), ConvergenceRecord)> = cells
        .par_iter()
        .map(|&(i, k, l)| ((i, l), run_cell(cfg, &surf, &problem, k, l)))
        .collect();
    rows.sort_by_key(|r| r.0);
    Ok(rows.into_iter().map(|r| r.1).collect())
}

/// k-refinement sweep over steps `m_range` of the original geometry knots.
pub fn k_refinement_sweep(cfg: &ExperimentConfig, max_steps: usize) -> Result<Vec<ConvergenceRecord>> {
    let cfg = ExperimentConfig {
        levels: Levels::KSteps { max: max_steps },
        ..cfg.clone()
    };
    run_experiment(&cfg)
}

/// Runs the spline collocation methods of `cfg` once per point strategy.
pub fn collocation_point_study(
    cfg: &ExperimentConfig,
    strategies: &[PointStrategy],
) -> Result<Vec<(PointStrategy, Vec<ConvergenceRecord>)>> {
    if cfg.methods.iter().any(|k| !(k.is_spline() && k.is_collocation())) {
        return Err(Error::InvalidInput("the point study needs spline collocation methods".into()));
    }
    strategies
        .iter()
        .map(|&s| {
            let c = ExperimentConfig { points: s, ..cfg.clone() };
            Ok((s, run_experiment(&c)?))
        })
        .collect()
}
