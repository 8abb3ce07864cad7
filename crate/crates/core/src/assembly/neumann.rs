use super::Discretization;
use crate::basis::MethodKind;
use crate::error::{Error, Result};
use crate::geometry::{dot, Side, Vec3};
use crate::quadrature;

/// Edge integral `int_side psi h(x, nu) dl` for Galerkin methods, using the
/// method's own 1D rule on every element along the side.
pub fn neumann_rhs(d: &Discretization, side: Side, h: &(dyn Fn(&Vec3, &Vec3) -> f64 + Sync)) -> Result<Vec<f64>> {
    match d.kind() {
        MethodKind::SG | MethodKind::IG | MethodKind::LG => {}
        MethodKind::CC | MethodKind::CG => {
            return Err(Error::InvalidInput(format!(
                "{} imposes Neumann data by conormal rows",
                d.kind()
            )))
        }
        MethodKind::SC | MethodKind::IC => {
            return Err(Error::Unsupported(format!(
                "Neumann conditions are not available for {}",
                d.kind()
            )))
        }
    }
    let dofs = d.dofs();
    let surf = d.surface();
    let td = side.tangent_dir();
    let (tspace, fspace) = if td == 0 { (&dofs.u, &dofs.v) } else { (&dofs.v, &dofs.u) };
    let fixed = if matches!(side, Side::U0 | Side::V0) { 0.0 } else { 1.0 };
    let fvals = fspace.eval_at(&[fixed])?.m;
    let rule = quadrature::rule_for_method(d.kind(), tspace.n_local())?;
    let nv = dofs.v.n_dofs();
    let mut out = vec![0.0; dofs.n_dofs()];
    for e in 0..tspace.n_elements() {
        let (a, b) = tspace.elements()[e];
        let r = rule.mapped(a, b);
        let bm = tspace.local_matrices(e, &r.points)?;
        let cell_t = tspace.midpoint(e);
        let mut wq = vec![0.0; r.len()];
        for (q, &t) in r.points.iter().enumerate() {
            let x = surf.metric_in(side.point(t), side.point(cell_t))?.x;
            let nu = surf.boundary_normal_in(side, t, cell_t)?;
            wq[q] = r.weights[q] * h(&x, &nu) * surf.edge_jacobian_in(side, t, cell_t)?;
        }
        for (j, entries) in tspace.l2g(e).iter().enumerate() {
            let integral: f64 = (0..r.len()).map(|q| wq[q] * bm.m[(q, j)]).sum();
            for &(gt, ct) in entries {
                for gf in 0..fspace.n_dofs() {
                    let fv = fvals[(0, gf)];
                    if fv == 0.0 {
                        continue;
                    }
                    let idx = if td == 0 { gt * nv + gf } else { gf * nv + gt };
                    out[idx] += ct * fv * integral;
                }
            }
        }
    }
    Ok(out)
}

/// Conormal-derivative functional `sum (nu . g_a) g^{ab} d_b u` of a
/// boundary point, as a row over the global DOFs.
pub fn conormal_row(d: &Discretization, side: Side, pu: (usize, f64), pv: (usize, f64)) -> Result<Vec<f64>> {
    let surf = d.surface();
    let s = (pu.1, pv.1);
    let cell = (d.dofs().u.midpoint(pu.0), d.dofs().v.midpoint(pv.0));
    let m = surf.metric_in(s, cell)?;
    let t = if side.tangent_dir() == 0 { s.0 } else { s.1 };
    let cell_t = if side.tangent_dir() == 0 { cell.0 } else { cell.1 };
    let nu = surf.boundary_normal_in(side, t, cell_t)?;
    let nt = [dot(&nu, &m.tangents[0]), dot(&nu, &m.tangents[1])];
    let c = [
        nt[0] * m.g_inv[0][0] + nt[1] * m.g_inv[1][0],
        nt[0] * m.g_inv[0][1] + nt[1] * m.g_inv[1][1],
    ];
    let (_, [du, dv]) = d.functional_at(pu, pv)?;
    Ok(du.iter().zip(&dv).map(|(a, b)| c[0] * a + c[1] * b).collect())
}
