use super::*;
use crate::basis::MethodKind;
use crate::geometry::{make_affine_patch, make_quarter_annulus, make_unit_square};

fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    let mut x = seed;
    (0..n)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn disc(kind: MethodKind, p: usize, e: (usize, usize)) -> Discretization {
    let surf = make_quarter_annulus();
    Discretization::from_config(&MethodConfig::new(kind, p, e), &surf).unwrap()
}

#[test]
fn apply_matches_dense_for_all_methods() {
    for kind in MethodKind::ALL {
        let d = disc(kind, 3, (2, 2));
        let u = pseudo_random(d.n_dofs(), 7);
        let k = d.stiffness_matrix();
        let dense = &k * nalgebra::DVector::from_column_slice(&u);
        let fast = d.apply_stiffness(&u);
        let scale = max_abs(dense.as_slice()).max(1.0);
        for (a, b) in fast.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-11 * scale, "{kind}: {a} vs {b}");
        }
        let coef = |x: f64| 1.0 + x * x;
        let un = pseudo_random(d.n_dofs(), 11);
        let r = d.reaction_matrix(Some(&un), &coef);
        let dense = &r * nalgebra::DVector::from_column_slice(&u);
        let fast = d.apply_reaction(Some(&un), &coef, &u);
        for (a, b) in fast.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-12, "{kind} reaction: {a} vs {b}");
        }
    }
}

#[test]
fn square_systems_and_constant_null_space() {
    for kind in MethodKind::ALL {
        let d = disc(kind, 4, (2, 2));
        let k = d.stiffness_matrix();
        assert_eq!(k.nrows(), k.ncols());
        let one = vec![1.0; d.n_dofs()];
        let c = d.dofs().interpolate(|_, _| 1.0).unwrap();
        for (a, b) in c.iter().zip(&one) {
            assert!((a - b).abs() < 1e-12, "{kind}: constants are not reproduced by unit coefficients");
        }
        let r = d.apply_stiffness(&one);
        assert!(max_abs(&r) < 1e-10, "{kind}: {}", max_abs(&r));
    }
}

#[test]
fn galerkin_matrices_are_symmetric_positive_semidefinite() {
    for kind in [MethodKind::SG, MethodKind::IG, MethodKind::LG] {
        let d = disc(kind, 3, (2, 2));
        let k = d.stiffness_matrix();
        let asym = (&k - k.transpose()).abs().max();
        assert!(asym < 1e-12 * k.abs().max(), "{kind}: {asym}");
        let ev = k.symmetric_eigenvalues();
        assert!(ev.min() > -1e-10, "{kind}");
        let positive = ev.iter().filter(|&&x| x > 1e-10).count();
        assert_eq!(positive, d.n_dofs() - 1, "{kind}: one constant mode");
    }
}

#[test]
fn strong_form_of_quadratic_on_flat_square() {
    // u = x^2 on the unit square: -Delta u = -2 at every row.
    let surf = make_unit_square();
    for kind in [MethodKind::SC, MethodKind::IC, MethodKind::CC] {
        let d = Discretization::from_config(&MethodConfig::new(kind, 3, (2, 2)), &surf).unwrap();
        let u = d.dofs().interpolate(|s1, _| s1 * s1).unwrap();
        for r in d.apply_stiffness(&u) {
            assert!((r + 2.0).abs() < 1e-11, "{kind}: {r}");
        }
    }
}

#[test]
fn weak_form_of_quadratic_on_flat_square() {
    // (grad v, grad x^2) = 2 int_dx v = -(v, 2) + boundary term on s1 = 1.
    let surf = make_unit_square();
    for kind in [MethodKind::SG, MethodKind::LG] {
        let d = Discretization::from_config(&MethodConfig::new(kind, 2, (2, 2)), &surf).unwrap();
        let u = d.dofs().interpolate(|s1, _| s1 * s1).unwrap();
        let v = d.dofs().interpolate(|s1, s2| s1 + 3.0 * s2 * s2).unwrap();
        let ku = d.apply_stiffness(&u);
        let vku: f64 = v.iter().zip(&ku).map(|(a, b)| a * b).sum();
        // int 2 s1 * 1 = 1 over the square.
        assert!((vku - 1.0).abs() < 1e-12, "{kind}: {vku}");
    }
}

#[test]
fn affine_patch_matches_transformed_laplacian() {
    // On x = s1 e1 + s2 e2, u = |x|^2 has -Delta u = -4.
    let e1 = [1.0, 0.3, 0.2];
    let e2 = [-0.2, 0.8, 0.5];
    let surf = make_affine_patch([0.1, -0.4, 0.7], e1, e2);
    let o = [0.1, -0.4, 0.7];
    let x = |s1: f64, s2: f64| -> f64 {
        (0..3).map(|i| (o[i] + s1 * e1[i] + s2 * e2[i]).powi(2)).sum()
    };
    for kind in [MethodKind::SC, MethodKind::CC, MethodKind::CG] {
        let d = Discretization::from_config(&MethodConfig::new(kind, 3, (2, 2)), &surf).unwrap();
        let u = d.dofs().interpolate(x).unwrap();
        let r = d.apply_stiffness(&u);
        if kind == MethodKind::CG {
            let w = d.load_vector(&|_| 1.0);
            for (a, b) in r.iter().zip(&w) {
                assert!((a + 4.0 * b).abs() < 1e-11, "{kind}: {a} vs {}", -4.0 * b);
            }
        } else {
            for a in r {
                assert!((a + 4.0).abs() < 1e-10, "{kind}: {a}");
            }
        }
    }
}

#[test]
fn harmonic_function_on_annulus() {
    // x1^2 - x2^2 is harmonic in the plane of the annulus.
    let surf = make_quarter_annulus();
    let f = |s: (f64, f64)| {
        let x = surf.point(s).unwrap();
        x[0] * x[0] - x[1] * x[1]
    };
    let residual = |kind: MethodKind, p: usize| {
        let d = Discretization::from_config(&MethodConfig::new(kind, p, (2, 2)), &surf).unwrap();
        let u = d.dofs().interpolate(|a, b| f((a, b))).unwrap();
        max_abs(&d.apply_stiffness(&u))
    };
    assert!(residual(MethodKind::CC, 12) < 1e-6);
    for kind in [MethodKind::SC, MethodKind::IC, MethodKind::CC] {
        let (lo, hi) = (residual(kind, 4), residual(kind, 8));
        assert!(hi < 0.05 * lo, "{kind}: {lo} -> {hi}");
    }
}

#[test]
fn load_and_mass_integrate_area() {
    let (r1, r2) = crate::geometry::ANNULUS_RADII;
    let area = 0.25 * std::f64::consts::PI * (r2 * r2 - r1 * r1);
    for kind in [MethodKind::SG, MethodKind::IG, MethodKind::LG] {
        let d = disc(kind, 4, (2, 2));
        let f: f64 = d.load_vector(&|_| 1.0).iter().sum();
        assert!((f - area).abs() < 1e-7, "{kind}: {f} vs {area}");
        let one = vec![1.0; d.n_dofs()];
        let m: f64 = d.apply_reaction(None, &|_| 1.0, &one).iter().sum();
        assert!((m - f).abs() < 1e-12);
        let g = d.h1_gram_matrix().unwrap();
        let o = nalgebra::DVector::from_element(d.n_dofs(), 1.0);
        let mass = (o.transpose() * &g * &o)[(0, 0)];
        assert!((mass - area).abs() < 1e-12, "{kind}: {mass}");
    }
}

#[test]
fn isogeometric_trial_weights_reproduce_geometry_weight() {
    let surf = make_quarter_annulus();
    let (a, _) = surf.separable_weights().unwrap();
    for p in [2, 3, 5] {
        for kind in [MethodKind::IG, MethodKind::IC] {
            let cfg = MethodConfig::new(kind, p, (2, 2));
            let kv = spline_trial_knots(&cfg, &surf, 0).unwrap();
            let w = trial_weights(surf.kv_u(), &a, &kv).unwrap();
            // Collocation knots drop the geometry's C0 knot; the weight
            // function then only matches at the geometry's own Greville points.
            let samples = if kind == MethodKind::IC {
                vec![0.0, 0.25, 0.75, 1.0]
            } else {
                vec![0.0, 0.13, 0.5, 0.77, 1.0]
            };
            for s in samples {
                let wg = crate::splinecore::eval_bspline(surf.kv_u(), s).unwrap();
                let wt = crate::splinecore::eval_bspline(&kv, s).unwrap();
                let vg: f64 = wg.values.iter().enumerate().map(|(i, v)| v * a[i]).sum();
                let vt: f64 = wt.values.iter().enumerate().map(|(i, v)| v * w[i]).sum();
                assert!((vg - vt).abs() < 1e-12, "{kind} p={p} s={s}");
            }
        }
    }
}

#[test]
fn k_refinement_configurations() {
    let surf = make_quarter_annulus();
    let cfg = MethodConfig::new(MethodKind::SG, 4, (1, 1)).with_refinement(Refinement::K(2));
    let kv = spline_trial_knots(&cfg, &surf, 0).unwrap();
    assert_eq!(kv.degree(), 4);
    assert_eq!(kv.multiplicity(0.5), 4);
    assert_eq!(kv.distinct().len(), 2 + 1 + 4);
    // Collocation caps the C0 geometry knot at p - 1.
    let cfg = MethodConfig::new(MethodKind::SC, 4, (1, 1)).with_refinement(Refinement::K(2));
    assert_eq!(spline_trial_knots(&cfg, &surf, 0).unwrap().multiplicity(0.5), 3);
    let cfg = MethodConfig::new(MethodKind::SC, 3, (1, 1)).with_refinement(Refinement::K(1));
    assert_eq!(spline_trial_knots(&cfg, &surf, 0).unwrap().multiplicity(0.5), 2);
    let bad = MethodConfig::new(MethodKind::SG, 5, (1, 1)).with_refinement(Refinement::K(2));
    assert!(spline_trial_knots(&bad, &surf, 0).is_err());
}

#[test]
fn collocation_rejects_bad_points() {
    let surf = make_quarter_annulus();
    let cfg = MethodConfig::new(MethodKind::SC, 3, (2, 2)).with_collocation_points(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]);
    assert!(Discretization::from_config(&cfg, &surf).is_err());
    let cfg = MethodConfig::new(MethodKind::SC, 1, (2, 2));
    assert!(matches!(
        Discretization::from_config(&cfg, &surf),
        Err(crate::Error::InsufficientSmoothness(_))
    ));
}

#[test]
fn cg_rows_are_weighted_cc_residuals() {
    // Both C1 Lagrange methods share a trial space; CG tests the same strong
    // residual at quadrature nodes, so a function they both reproduce gives
    // zero in both.
    let surf = make_unit_square();
    let cc = Discretization::from_config(&MethodConfig::new(MethodKind::CC, 4, (2, 2)), &surf).unwrap();
    let cg = Discretization::from_config(&MethodConfig::new(MethodKind::CG, 4, (2, 2)), &surf).unwrap();
    assert_eq!(cc.n_dofs(), cg.n_dofs());
    let u = cc.dofs().interpolate(|a, b| a * a * b - b * b * b / 3.0).unwrap();
    assert!(max_abs(&cc.apply_stiffness(&u)) < 1e-10);
    assert!(max_abs(&cg.apply_stiffness(&u)) < 1e-10);
}

#[test]
fn neumann_edge_integrals() {
    let square = make_unit_square();
    for kind in [MethodKind::SG, MethodKind::LG, MethodKind::IG] {
        let d = Discretization::from_config(&MethodConfig::new(kind, 3, (2, 2)), &square).unwrap();
        let r = neumann_rhs(&d, crate::geometry::Side::U1, &|_, _| 1.0).unwrap();
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-13, "{kind}");
        assert!(neumann_rhs(&d, crate::geometry::Side::U1, &|_, _| 0.0).unwrap().iter().all(|&x| x == 0.0));
        let d = disc(kind, 4, (2, 2));
        let r = neumann_rhs(&d, crate::geometry::Side::V1, &|_, _| 1.0).unwrap();
        let arc = 0.5 * std::f64::consts::PI * crate::geometry::ANNULUS_RADII.1;
        // GLL under-integrates the rational arc-length rate.
        let tol = if kind == MethodKind::LG { 1e-7 } else { 1e-12 };
        assert!((r.iter().sum::<f64>() - arc).abs() < tol, "{kind}: {}", r.iter().sum::<f64>());
    }
    let d = disc(MethodKind::SC, 3, (2, 2));
    assert!(matches!(
        neumann_rhs(&d, crate::geometry::Side::V1, &|_, _| 1.0),
        Err(crate::Error::Unsupported(_))
    ));
}

#[test]
fn conormal_rows_on_square() {
    let square = make_unit_square();
    for kind in [MethodKind::CC, MethodKind::CG] {
        let d = Discretization::from_config(&MethodConfig::new(kind, 4, (2, 2)), &square).unwrap();
        let lin = d.dofs().interpolate(|s1, _| s1).unwrap();
        let one = vec![1.0; d.n_dofs()];
        let nv = d.dofs().v.n_dofs();
        let last = d.dofs().u.n_dofs() - 1;
        for i2 in 0..nv {
            let (pu, pv) = d.dof_point(last, i2).unwrap();
            let row = conormal_row(&d, crate::geometry::Side::U1, pu, pv).unwrap();
            let dl: f64 = row.iter().zip(&lin).map(|(a, b)| a * b).sum();
            let dc: f64 = row.iter().zip(&one).map(|(a, b)| a * b).sum();
            assert!((dl - 1.0).abs() < 1e-11 && dc.abs() < 1e-11, "{kind}: {dl} {dc}");
        }
    }
}
