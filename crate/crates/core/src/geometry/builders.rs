//! The benchmark geometries.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use super::surface::{NurbsSurface, Vec3};
use crate::error::{Error, Result};
use crate::splinecore::KnotVector;

/// Inner and outer radius of the default annulus.
pub const ANNULUS_RADII: (f64, f64) = (0.5, 1.0);

/// Degree-2 quarter circle of unit radius as two 45-degree arcs.
fn quarter_circle_two_arcs() -> (KnotVector, Vec<f64>, Vec<[f64; 2]>) {
    let t = FRAC_PI_8.tan();
    let c = FRAC_PI_4.cos();
    let kv = KnotVector::new(vec![0., 0., 0., 0.5, 0.5, 1., 1., 1.], 2).expect("static knots");
    let w = FRAC_PI_8.cos();
    (
        kv,
        vec![1.0, w, 1.0, w, 1.0],
        vec![[1.0, 0.0], [1.0, t], [c, c], [t, 1.0], [0.0, 1.0]],
    )
}

/// Quarter annulus between radii `r1` and `r2` in the `xy`-plane. `s1` is
/// the angle (0 on the `+x` axis) and `s2` the radius.
pub fn make_quarter_annulus_radii(r1: f64, r2: f64) -> Result<NurbsSurface> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(Error::InvalidInput(format!("bad radii {r1}, {r2}")));
    }
    let (kv_u, wu, pu) = quarter_circle_two_arcs();
    let kv_v = KnotVector::bezier(2);
    let radii = [r1, 0.5 * (r1 + r2), r2];
    let mut weights = Vec::new();
    let mut ctrl = Vec::new();
    for (i, p) in pu.iter().enumerate() {
        for r in radii {
            weights.push(wu[i]);
            ctrl.push([r * p[0], r * p[1], 0.0]);
        }
    }
    NurbsSurface::new(kv_u, kv_v, weights, ctrl)
}

/// The default quarter annulus with radii 0.5 and 1.
pub fn make_quarter_annulus() -> NurbsSurface {
    make_quarter_annulus_radii(ANNULUS_RADII.0, ANNULUS_RADII.1).expect("static geometry")
}

/// Quarter annulus with the angular direction as a single 90-degree
/// rational arc, so the whole patch is one element.
pub fn make_quarter_annulus_one_span() -> NurbsSurface {
    let (r1, r2) = ANNULUS_RADII;
    let pu = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let wu = [1.0, FRAC_1_SQRT_2, 1.0];
    let mut weights = Vec::new();
    let mut ctrl = Vec::new();
    for (i, p) in pu.iter().enumerate() {
        for r in [r1, 0.5 * (r1 + r2), r2] {
            weights.push(wu[i]);
            ctrl.push([r * p[0], r * p[1], 0.0]);
        }
    }
    NurbsSurface::new(KnotVector::bezier(2), KnotVector::bezier(2), weights, ctrl).expect("static geometry")
}

/// Applies an orthogonal matrix to every control point.
pub fn make_oblique_plane(annulus: &NurbsSurface, rotation: [[f64; 3]; 3]) -> Result<NurbsSurface> {
    let mut dev: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d: f64 = (0..3).map(|k| rotation[k][i] * rotation[k][j]).sum();
            dev = dev.max((d - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    if dev > 1e-14 {
        return Err(Error::NonOrthogonal(dev));
    }
    Ok(annulus.map_ctrl(|p| apply(&rotation, p)))
}

pub fn apply(r: &[[f64; 3]; 3], p: &Vec3) -> Vec3 {
    [
        r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2],
        r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2],
        r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2],
    ]
}

/// Rotation by `angle` about `axis` (Rodrigues).
pub fn rotation_about(axis: Vec3, angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|a| a / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

/// Rotation used for the oblique-plane benchmark: 0.7 rad about (1,2,3).
pub fn oblique_rotation() -> [[f64; 3]; 3] {
    rotation_about([1.0, 2.0, 3.0], 0.7)
}

/// Radius of the profile arcs and of the sweep of the C-shaped surface.
pub const C_PROFILE_RADIUS: f64 = 0.5;
pub const C_SWEEP_RADIUS: f64 = 2.5;

/// Quarter revolution of a C-shaped profile. `s1` sweeps the revolution
/// angle, `s2` runs along the profile (three 90-degree arcs from 45 to 315
/// degrees around the profile centre).
pub fn make_c_surface() -> NurbsSurface {
    let a = C_PROFILE_RADIUS;
    let rho0 = C_SWEEP_RADIUS;
    let third = 1.0 / 3.0;
    let kv_v = KnotVector::new(
        vec![0., 0., 0., third, third, 2.0 * third, 2.0 * third, 1., 1., 1.],
        2,
    )
    .expect("static knots");
    let mut prof = Vec::new();
    let mut wv = Vec::new();
    for k in 0..7 {
        let theta = FRAC_PI_4 * (1 + k) as f64;
        let (r, w) = if k % 2 == 0 { (a, 1.0) } else { (a * 2f64.sqrt(), FRAC_1_SQRT_2) };
        prof.push([rho0 + r * theta.cos(), r * theta.sin()]);
        wv.push(w);
    }
    let kv_u = KnotVector::bezier(2);
    let wu = [1.0, FRAC_1_SQRT_2, 1.0];
    let circ = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut weights = Vec::new();
    let mut ctrl = Vec::new();
    for i in 0..3 {
        for j in 0..7 {
            weights.push(wu[i] * wv[j]);
            ctrl.push([prof[j][0] * circ[i][0], prof[j][0] * circ[i][1], prof[j][1]]);
        }
    }
    NurbsSurface::new(kv_u, kv_v, weights, ctrl).expect("static geometry")
}

/// Bilinear patch `origin + s1 e1 + s2 e2`.
pub fn make_affine_patch(origin: Vec3, e1: Vec3, e2: Vec3) -> NurbsSurface {
    let kv = KnotVector::bezier(1);
    let mut ctrl = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            ctrl.push([0, 1, 2].map(|k| origin[k] + i as f64 * e1[k] + j as f64 * e2[k]));
        }
    }
    NurbsSurface::new(kv.clone(), kv, vec![1.0; 4], ctrl).expect("static geometry")
}

/// The unit square in the `xy`-plane.
pub fn make_unit_square() -> NurbsSurface {
    make_affine_patch([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
}
