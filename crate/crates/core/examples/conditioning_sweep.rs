//! Condition number against degree: spline methods blow up, spectral
//! elements grow polynomially.

use nurbs_sem::basis::MethodKind;
use nurbs_sem::bench::{self, ExperimentConfig, Levels};

fn main() -> nurbs_sem::Result<()> {
    let cfg = ExperimentConfig {
        methods: vec![MethodKind::SG, MethodKind::IG, MethodKind::CG, MethodKind::LG],
        levels: Levels::Degrees { pmin: 2, pmax: 12 },
        ..ExperimentConfig::table(1)?
    };
    let rows = bench::run_experiment(&cfg)?;
    print!("{:>3}", "p");
    for k in &cfg.methods {
        print!("{:>12}", k.name());
    }
    println!();
    for p in 2..=12 {
        print!("{p:>3}");
        for k in &cfg.methods {
            let r = rows.iter().find(|r| r.p == p && r.method == k.name()).expect("row");
            print!("{:>12.2e}", r.cond2);
        }
        println!();
    }
    Ok(())
}
