//! Nodes, quadrature rules and 1D basis matrices behind the seven methods.

use nurbs_sem::basis::{self, MethodKind};
use nurbs_sem::quadrature;

fn main() -> nurbs_sem::Result<()> {
    let n = 5;
    println!("GLL nodes (n={n}) {:.6?}", basis::gll_points(n)?);
    println!("GLC nodes (n={n}) {:.6?}", basis::glc_points(n)?);
    let gl = quadrature::gauss_legendre(n)?;
    println!("Gauss-Legendre int s^8 = {:.15} (1/9 = {:.15})", gl.integrate(|s| s.powi(8)), 1.0 / 9.0);

    let nodes = basis::gll_points(n)?;
    let b = basis::lagrange_matrices(&nodes, &[0.0, 0.3, 1.0])?;
    println!("Lagrange values at 0, 0.3, 1:\n{:.4}", b.m);
    println!("derivative rows sum to {:.1e}", b.d1.column_sum().amax());

    for kind in MethodKind::ALL {
        if kind.is_collocation() {
            println!("{kind}: {:?} family, collocation", kind.family());
            continue;
        }
        let rule = quadrature::rule_for_method(kind, n)?;
        println!(
            "{kind}: {:?} family, {} quadrature points per element direction",
            kind.family(),
            rule.len()
        );
    }
    Ok(())
}
