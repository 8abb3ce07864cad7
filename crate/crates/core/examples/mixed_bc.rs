//! Neumann data on the outer arc, Dirichlet elsewhere.

use nurbs_sem::bench::{self, ExperimentConfig, Levels};

fn main() -> nurbs_sem::Result<()> {
    let cfg = ExperimentConfig {
        levels: Levels::Degrees { pmin: 2, pmax: 10 },
        ..ExperimentConfig::table(3)?
    };
    let rows = bench::run_experiment(&cfg)?;
    for r in &rows {
        println!("{:<3} p={:<3} H1 {:.3e}  {}", r.method, r.p, r.h1_error, r.status);
    }
    Ok(())
}
