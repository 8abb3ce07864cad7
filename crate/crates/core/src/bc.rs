//! Essential and natural boundary conditions.
//!
//! Lagrange methods replace boundary rows by identity rows. Spline methods
//! fit the boundary trace in the least-squares sense through an augmented
//! saddle-point system.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{conormal_row, neumann_rhs, Discretization};
use crate::basis::MethodKind;
use crate::error::{Error, Result};
use crate::geometry::{Side, Vec3};
use crate::mesh::Space1D;
use crate::quadrature;

/// A square linear system whose first `n_dofs` unknowns are the field
/// coefficients; augmented systems carry multipliers after them.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub n_dofs: usize,
}

impl LinearSystem {
    pub fn new(matrix: DMatrix<f64>, rhs: Vec<f64>) -> Self {
        let n_dofs = matrix.nrows();
        LinearSystem {
            matrix,
            rhs: DVector::from_vec(rhs),
            n_dofs,
        }
    }

    pub fn n_unknowns(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Selector of the functions with a nonzero trace on some sides.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionQ {
    pub indices: Vec<usize>,
    pub n: usize,
}

impl RestrictionQ {
    pub fn n_boundary(&self) -> usize {
        self.indices.len()
    }

    /// `n_b x n` selector matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut q = DMatrix::zeros(self.indices.len(), self.n);
        for (r, &i) in self.indices.iter().enumerate() {
            q[(r, i)] = 1.0;
        }
        q
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| y[i]).collect()
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&i, &v) in self.indices.iter().zip(y) {
            out[i] = v;
        }
        out
    }

    pub fn interior(&self) -> Vec<usize> {
        let b: BTreeSet<usize> = self.indices.iter().copied().collect();
        (0..self.n).filter(|i| !b.contains(i)).collect()
    }
}

/// Global functions at the end of a 1D space.
fn end_functions(space: &Space1D, at_one: bool) -> Result<Vec<usize>> {
    let s = if at_one { 1.0 } else { 0.0 };
    let m = space.eval_at(&[s])?.m;
    Ok((0..space.n_dofs()).filter(|&i| m[(0, i)].abs() > 1e-14).collect())
}

/// Tensor indices of the functions whose trace on `side` is nonzero.
pub fn side_dofs(d: &Discretization, side: Side) -> Result<Vec<usize>> {
    let dofs = d.dofs();
    let nv = dofs.v.n_dofs();
    let at_one = matches!(side, Side::U1 | Side::V1);
    let mut out = Vec::new();
    match side {
        Side::U0 | Side::U1 => {
            for i1 in end_functions(&dofs.u, at_one)? {
                out.extend((0..nv).map(|i2| i1 * nv + i2));
            }
        }
        Side::V0 | Side::V1 => {
            for i2 in end_functions(&dofs.v, at_one)? {
                out.extend((0..dofs.u.n_dofs()).map(|i1| i1 * nv + i2));
            }
        }
    }
    Ok(out)
}

pub fn restriction(d: &Discretization, sides: &[Side]) -> Result<RestrictionQ> {
    let mut set = BTreeSet::new();
    for &s in sides {
        set.extend(side_dofs(d, s)?);
    }
    Ok(RestrictionQ {
        indices: set.into_iter().collect(),
        n: d.n_dofs(),
    })
}

/// Boundary sample points `(side, t)`: the corners of the listed sides
/// once each, then Gauss–Legendre points inside every edge in proportion
/// to the number of functions along it, `2 n_b` points in total.
pub fn choose_boundary_samples(d: &Discretization, sides: &[Side], n_b: usize) -> Result<Vec<(Side, f64)>> {
    if sides.is_empty() {
        return Ok(Vec::new());
    }
    let q = 2 * n_b;
    let mut corners: Vec<(f64, f64)> = Vec::new();
    let mut samples = Vec::new();
    for &s in sides {
        for t in [0.0, 1.0] {
            let p = s.point(t);
            if !corners.contains(&p) {
                corners.push(p);
                samples.push((s, t));
            }
        }
    }
    let counts: Vec<usize> = sides
        .iter()
        .map(|&s| {
            if s.tangent_dir() == 0 {
                d.dofs().u.n_dofs()
            } else {
                d.dofs().v.n_dofs()
            }
        })
        .collect();
    let remaining = q.saturating_sub(samples.len());
    let total: usize = counts.iter().sum();
    // Largest-remainder split of `remaining` over the sides.
    let exact: Vec<f64> = counts.iter().map(|&c| remaining as f64 * c as f64 / total as f64).collect();
    let mut alloc: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sides.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = remaining - alloc.iter().sum::<usize>();
    for &i in &order {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }
    for (&s, &k) in sides.iter().zip(&alloc) {
        if k > 0 {
            for t in quadrature::gauss_legendre(k)?.points {
                samples.push((s, t));
            }
        }
    }
    Ok(samples)
}

fn sample_location(d: &Discretization, side: Side, t: f64) -> ((usize, f64), (usize, f64)) {
    let (s1, s2) = side.point(t);
    ((d.dofs().u.element_of(s1), s1), (d.dofs().v.element_of(s2), s2))
}

/// Sample points, evaluation matrix `V` (`q x n_b`) and data for a
/// least-squares boundary fit.
#[derive(Clone, Debug)]
pub struct BoundaryFit {
    pub samples: Vec<(Side, f64)>,
    pub v: DMatrix<f64>,
    pub data: DVector<f64>,
}

pub fn boundary_fit(
    d: &Discretization,
    q: &RestrictionQ,
    sides: &[Side],
    h: &(dyn Fn(&Vec3) -> f64 + Sync),
) -> Result<BoundaryFit> {
    let samples = choose_boundary_samples(d, sides, q.n_boundary())?;
    let mut v = DMatrix::zeros(samples.len(), q.n_boundary());
    let mut data = DVector::zeros(samples.len());
    for (r, &(side, t)) in samples.iter().enumerate() {
        let (pu, pv) = sample_location(d, side, t);
        let (vals, _) = d.functional_at(pu, pv)?;
        for (c, &i) in q.indices.iter().enumerate() {
            v[(r, c)] = vals[i];
        }
        let cell = (d.dofs().u.midpoint(pu.0), d.dofs().v.midpoint(pv.0));
        let x = d.surface().metric_in((pu.1, pv.1), cell)?.x;
        data[r] = h(&x);
    }
    let rank = v.clone().svd(false, false).rank(1e-12 * v.abs().max().max(1.0));
    if rank < q.n_boundary() {
        return Err(Error::InvalidInput(format!(
            "boundary evaluation matrix has rank {rank} < {}",
            q.n_boundary()
        )));
    }
    Ok(BoundaryFit { samples, v, data })
}

/// Augmented system `[K, Q^T V^T V; V^T V Q, 0] (u; l) = (f; V^T qbar)`.
pub fn least_squares_dirichlet(
    sys: &LinearSystem,
    d: &Discretization,
    sides: &[Side],
    h: &(dyn Fn(&Vec3) -> f64 + Sync),
) -> Result<LinearSystem> {
    let q = restriction(d, sides)?;
    let n = sys.n_dofs;
    let nb = q.n_boundary();
    if nb == 0 {
        return Ok(sys.clone());
    }
    let fit = boundary_fit(d, &q, sides, h)?;
    let vtv = fit.v.transpose() * &fit.v;
    let vtq = fit.v.transpose() * &fit.data;
    let mut a = DMatrix::zeros(n + nb, n + nb);
    a.view_mut((0, 0), (n, n)).copy_from(&sys.matrix.view((0, 0), (n, n)));
    for (r, &i) in q.indices.iter().enumerate() {
        for c in 0..nb {
            a[(i, n + c)] = vtv[(c, r)];
            a[(n + c, i)] = vtv[(c, r)];
        }
    }
    let mut rhs = DVector::zeros(n + nb);
    rhs.rows_mut(0, n).copy_from(&sys.rhs.rows(0, n));
    rhs.rows_mut(n, nb).copy_from(&vtq);
    Ok(LinearSystem {
        matrix: a,
        rhs,
        n_dofs: n,
    })
}

/// Parametric node of a Lagrange DOF.
pub fn dof_node(d: &Discretization, i: usize) -> Result<(f64, f64)> {
    let nv = d.dofs().v.n_dofs();
    let (nu, nvn) = match (d.dofs().u.dof_nodes(), d.dofs().v.dof_nodes()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidInput("nodal boundary rows need a Lagrange basis".into())),
    };
    Ok((nu[i / nv], nvn[i % nv]))
}

/// Replaces the rows of boundary DOFs by identity rows carrying `h` at the
/// DOF nodes.
pub fn apply_dirichlet_rows(
    sys: &mut LinearSystem,
    d: &Discretization,
    sides: &[Side],
    h: &(dyn Fn(&Vec3) -> f64 + Sync),
) -> Result<()> {
    if d.kind().is_spline() {
        return Err(Error::Unsupported(format!(
            "{} needs the least-squares boundary fit",
            d.kind()
        )));
    }
    let q = restriction(d, sides)?;
    for &i in &q.indices {
        let s = dof_node(d, i)?;
        let x = d.surface().point(s)?;
        sys.matrix.row_mut(i).fill(0.0);
        sys.matrix[(i, i)] = 1.0;
        sys.rhs[i] = h(&x);
    }
    Ok(())
}

/// Imposes Neumann data `h(x, nu)` on `sides`: edge integrals for Galerkin
/// methods, conormal rows for CC/CG. Rows listed in `skip` (Dirichlet DOFs)
/// are left alone.
pub fn apply_neumann(
    sys: &mut LinearSystem,
    d: &Discretization,
    sides: &[Side],
    skip: &RestrictionQ,
    h: &(dyn Fn(&Vec3, &Vec3) -> f64 + Sync),
) -> Result<()> {
    match d.kind() {
        MethodKind::SG | MethodKind::IG | MethodKind::LG => {
            for &s in sides {
                let r = neumann_rhs(d, s, h)?;
                for (i, v) in r.into_iter().enumerate() {
                    sys.rhs[i] += v;
                }
            }
            Ok(())
        }
        MethodKind::CC | MethodKind::CG => {
            let dir: BTreeSet<usize> = skip.indices.iter().copied().collect();
            let nv = d.dofs().v.n_dofs();
            for &s in sides {
                for i in side_dofs(d, s)? {
                    if dir.contains(&i) {
                        continue;
                    }
                    let (pu, pv) = d
                        .dof_point(i / nv, i % nv)
                        .ok_or_else(|| Error::InvalidInput("no boundary point".into()))?;
                    let row = conormal_row(d, s, pu, pv)?;
                    let cell = (d.dofs().u.midpoint(pu.0), d.dofs().v.midpoint(pv.0));
                    let x = d.surface().metric_in((pu.1, pv.1), cell)?.x;
                    let t = if s.tangent_dir() == 0 { pu.1 } else { pv.1 };
                    let cell_t = if s.tangent_dir() == 0 { cell.0 } else { cell.1 };
                    let nu = d.surface().boundary_normal_in(s, t, cell_t)?;
                    for (j, v) in row.into_iter().enumerate() {
                        sys.matrix[(i, j)] = v;
                    }
                    sys.rhs[i] = h(&x, &nu);
                }
            }
            Ok(())
        }
        MethodKind::SC | MethodKind::IC => Err(Error::Unsupported(format!(
            "Neumann conditions are not available for {}",
            d.kind()
        ))),
    }
}

/// Block of `m` on the given rows and columns.
pub fn sub_block(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::MethodConfig;
    use crate::geometry::{make_quarter_annulus, make_unit_square};

    fn disc(kind: MethodKind, p: usize) -> Discretization {
        Discretization::from_config(&MethodConfig::new(kind, p, (2, 2)), &make_quarter_annulus()).unwrap()
    }

    #[test]
    fn restriction_selector() {
        let d = disc(MethodKind::SG, 3);
        let q = restriction(&d, &Side::ALL).unwrap();
        let (n1, n2) = (d.dofs().u.n_dofs(), d.dofs().v.n_dofs());
        assert_eq!(q.n_boundary(), n1 * n2 - (n1 - 2) * (n2 - 2));
        let qm = q.matrix();
        assert_eq!(&qm * qm.transpose(), DMatrix::identity(q.n_boundary(), q.n_boundary()));
        let mut y = vec![0.0; q.n];
        for i in q.interior() {
            y[i] = 1.0;
        }
        assert!(q.apply(&y).iter().all(|&x| x == 0.0));
        let one = restriction(&d, &[Side::U0]).unwrap();
        assert_eq!(one.indices, (0..n2).collect::<Vec<_>>());
    }

    #[test]
    fn boundary_sample_counts() {
        let d = disc(MethodKind::SG, 3);
        let s = choose_boundary_samples(&d, &[Side::U0], 5).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.contains(&(Side::U0, 0.0)) && s.contains(&(Side::U0, 1.0)));
        assert!(s[2..].iter().all(|&(_, t)| t > 0.0 && t < 1.0));
        let q = restriction(&d, &Side::ALL).unwrap();
        let s = choose_boundary_samples(&d, &Side::ALL, q.n_boundary()).unwrap();
        assert_eq!(s.len(), 2 * q.n_boundary());
        let corners = s.iter().filter(|&&(_, t)| t == 0.0 || t == 1.0).count();
        assert_eq!(corners, 4);
    }

    #[test]
    fn boundary_matrix_has_full_rank() {
        for kind in [MethodKind::SG, MethodKind::IG, MethodKind::SC, MethodKind::IC] {
            for p in 2..=12 {
                let d = disc(kind, p);
                let q = restriction(&d, &Side::ALL).unwrap();
                assert!(boundary_fit(&d, &q, &Side::ALL, &|_| 0.0).is_ok(), "{kind} p={p}");
            }
        }
    }

    #[test]
    fn identity_rows() {
        let d = Discretization::from_config(&MethodConfig::new(MethodKind::LG, 1, (1, 1)), &make_unit_square()).unwrap();
        let mut sys = LinearSystem::new(d.stiffness_matrix(), vec![0.0; d.n_dofs()]);
        apply_dirichlet_rows(&mut sys, &d, &Side::ALL, &|x| x[0] + 2.0 * x[1]).unwrap();
        assert_eq!(sys.matrix, DMatrix::identity(4, 4));
        let u = sys.matrix.clone().lu().solve(&sys.rhs).unwrap();
        assert_eq!(u.as_slice(), &[0.0, 2.0, 1.0, 3.0]);
        let s = disc(MethodKind::SG, 2);
        let mut sys = LinearSystem::new(s.stiffness_matrix(), vec![0.0; s.n_dofs()]);
        assert!(apply_dirichlet_rows(&mut sys, &s, &Side::ALL, &|_| 0.0).is_err());
    }
}
