//! Laplace-Beltrami problem on the quarter annulus with a harmonic exact
//! solution, solved by every method at one degree.
//!
//! cargo run --example poisson_annulus -- 8

use std::sync::Arc;

use nurbs_sem::assembly::{Discretization, MethodConfig};
use nurbs_sem::basis::MethodKind;
use nurbs_sem::geometry;
use nurbs_sem::problems::{Equation, LogSource, Problem};
use nurbs_sem::solver;

fn main() -> nurbs_sem::Result<()> {
    let p: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let surf = geometry::make_quarter_annulus();
    let problem = Problem::dirichlet(Equation::LaplaceBeltrami, Arc::new(LogSource::default()));
    println!("p = {p}, 2 x 2 elements");
    println!("{:<4}{:>6}{:>12}{:>12}{:>12}", "", "ndof", "L2", "H1", "cond2");
    for kind in MethodKind::ALL {
        let d = Discretization::from_config(&MethodConfig::new(kind, p, (2, 2)), &surf)?;
        let r = solver::solve_problem(&d, &problem)?;
        let (l2, h1) = solver::h1_error(&d, &r.u, problem.exact.as_ref())?;
        println!("{:<4}{:>6}{:>12.3e}{:>12.3e}{:>12.3e}", kind.name(), d.n_dofs(), l2, h1, r.cond2);
    }
    Ok(())
}
