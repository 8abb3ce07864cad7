//! Knot insertion, degree elevation and k-refinement of a rational quarter
//! circle. The curve never moves.

use nurbs_sem::splinecore::{self, KnotVector, WeightVector};

fn max_radius_error(kv: &KnotVector, w: &WeightVector, ctrl: &[Vec<f64>]) -> nurbs_sem::Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let p = splinecore::curve_point(kv, w, ctrl, k as f64 / 200.0)?;
        worst = worst.max(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs());
    }
    Ok(worst)
}

fn main() -> nurbs_sem::Result<()> {
    let kv = KnotVector::bezier(2);
    let w = WeightVector::new(vec![1.0, std::f64::consts::FRAC_1_SQRT_2, 1.0])?;
    let ctrl = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    println!("quarter circle: knots {:?}", kv.knots());
    println!("  radius error {:.1e}", max_radius_error(&kv, &w, &ctrl)?);

    let (kv1, w1, c1) = splinecore::insert_knot(&kv, &w, &ctrl, 0.3)?;
    println!("insert 0.3: {} control points, radius error {:.1e}", c1.len(), max_radius_error(&kv1, &w1, &c1)?);

    let (kv2, w2, c2) = splinecore::elevate_degree(&kv, &w, &ctrl, 3)?;
    println!("elevate by 3: degree {}, radius error {:.1e}", kv2.degree(), max_radius_error(&kv2, &w2, &c2)?);

    for m in 1..=4 {
        let target = splinecore::k_refine(&kv, m)?;
        let (wm, cm) = splinecore::refine_to(&kv, &w, &ctrl, &target)?;
        println!(
            "k-refine m={m}: degree {}, {} functions, radius error {:.1e}",
            target.degree(),
            target.num_basis(),
            max_radius_error(&target, &wm, &cm)?
        );
    }

    let kv5 = KnotVector::new(vec![0., 0., 0., 0., 0.25, 0.5, 0.75, 1., 1., 1., 1.], 3)?;
    let g = splinecore::greville_abscissae(&kv5);
    let d = splinecore::demko_abscissae(&kv5, 1e-12)?;
    println!("cubic, 4 spans");
    println!("  greville {:.4?}", g);
    println!("  demko    {:.4?}", d);
    Ok(())
}
