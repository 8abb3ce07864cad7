//! k-refinement of the spline spaces against degree elevation of the
//! spectral elements, by number of unknowns.

use nurbs_sem::basis::MethodKind;
use nurbs_sem::bench::{self, ExperimentConfig};

fn main() -> nurbs_sem::Result<()> {
    let cfg = ExperimentConfig {
        methods: vec![MethodKind::SG, MethodKind::IG, MethodKind::LG],
        ..ExperimentConfig::table(5)?
    };
    let rows = bench::k_refinement_sweep(&cfg, 6)?;
    for r in &rows {
        println!("{:<3} p={:<3} ndof={:<5} H1 {:.3e} cond {:.2e}", r.method, r.p, r.ndof, r.h1_error, r.cond2);
    }
    Ok(())
}
