//! Fixed-point iteration for -Delta u - u + u^3 = f on the annulus with
//! u = x1^2 - x2^3.

use std::sync::Arc;

use nurbs_sem::assembly::{Discretization, MethodConfig, Refinement};
use nurbs_sem::basis::MethodKind;
use nurbs_sem::geometry;
use nurbs_sem::problems::{Cubic, Equation, Problem};
use nurbs_sem::solver;

fn main() -> nurbs_sem::Result<()> {
    let surf = geometry::make_quarter_annulus();
    let problem = Problem::dirichlet(Equation::AllenCahn, Arc::new(Cubic));
    for (kind, cfg) in [
        (MethodKind::IG, MethodConfig::new(MethodKind::IG, 5, (2, 2)).with_refinement(Refinement::K(3))),
        (MethodKind::LG, MethodConfig::new(MethodKind::LG, 5, (2, 2))),
    ] {
        let d = Discretization::from_config(&cfg, &surf)?;
        let r = solver::allen_cahn_fixed_point(&d, &problem, 1e-15, 50)?;
        let (_, h1) = solver::h1_error(&d, &r.u, problem.exact.as_ref())?;
        println!("{kind}: {} iterations ({:?}), H1 error {h1:.3e}", r.iterations, r.termination);
        for (n, dn) in r.increments.iter().enumerate() {
            println!("  d_{} = {dn:.3e}", n + 1);
        }
    }
    Ok(())
}
