//! Isogeometric collocation on a single element with Greville, Demko and
//! optimized points.

use nurbs_sem::basis::PointStrategy;
use nurbs_sem::bench::{self, ExperimentConfig, Levels};

fn main() -> nurbs_sem::Result<()> {
    let cfg = ExperimentConfig {
        levels: Levels::Degrees { pmin: 2, pmax: 8 },
        ..ExperimentConfig::table(2)?
    };
    let study = bench::collocation_point_study(
        &cfg,
        &[PointStrategy::Greville, PointStrategy::Demko, PointStrategy::Optimized],
    )?;
    println!("{:>3}{:>12}{:>12}{:>12}", "p", "greville", "demko", "optimized");
    for i in 0..study[0].1.len() {
        print!("{:>3}", study[0].1[i].p);
        for (_, rows) in &study {
            print!("{:>12.3e}", rows[i].h1_error);
        }
        println!();
    }
    Ok(())
}
