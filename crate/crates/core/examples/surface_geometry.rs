//! Differential geometry of the benchmark surfaces, and the text format
//! used by `--geometry`.

use nurbs_sem::geometry::{self, Side};

fn main() -> nurbs_sem::Result<()> {
    let annulus = geometry::make_quarter_annulus();
    println!("annulus: {} x {} control points", annulus.n_u(), annulus.n_v());
    for s in [(0.0, 0.0), (0.25, 0.5), (1.0, 1.0)] {
        let m = annulus.metric(s)?;
        let r = (m.x[0] * m.x[0] + m.x[1] * m.x[1]).sqrt();
        println!("  s={s:?} x={:.4?} r={r:.6} J={:.6}", m.x, m.jac);
    }
    let nu = annulus.boundary_normal(Side::V1, 0.5)?;
    println!("  outward normal on the outer arc at its midpoint {nu:.4?}");

    let c = geometry::make_c_surface();
    println!("C-shaped surface: knots s1 {:?}", c.kv_u().knots());
    println!("                  knots s2 {:?}", c.kv_v().knots());
    let m = c.metric((0.3, 0.2))?;
    println!("  g = {:.4?}", m.g);
    println!("  Gamma^1 = {:.4?}", m.christoffel[0]);
    println!("  Gamma^2 = {:.4?}", m.christoffel[1]);
    println!("  g^ab Gamma^mu_ab = {:.4?}", m.contracted_christoffel());

    let oblique = geometry::make_oblique_plane(&annulus, geometry::oblique_rotation())?;
    let a = annulus.metric((0.3, 0.7))?;
    let b = oblique.metric((0.3, 0.7))?;
    println!("oblique plane: J {:.12} vs {:.12}", b.jac, a.jac);

    let path = std::env::temp_dir().join("annulus.geo");
    geometry::write_geometry(&annulus, &path)?;
    let back = geometry::read_geometry(&path)?;
    println!("wrote {} ({} weights)", path.display(), back.weights().len());
    Ok(())
}
