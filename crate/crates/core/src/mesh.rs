//! Element partitions of the reference square and the discrete spaces
//! living on them.
//!
//! Every 2D space is a tensor product of two [`Space1D`]. A 1D space is a set
//! of elements, a local basis of `n_local` functions per element, and a
//! local-to-global map whose entries carry coefficients, so that C0 node
//! sharing, C1 node elimination and spline bases share one code path.

use nalgebra::{DMatrix, DVector};

use crate::basis::{self, BasisMatrices, MethodKind};
use crate::error::{Error, Result};
use crate::geometry::NurbsSurface;
use crate::splinecore::{self, KnotVector};

/// Breakpoints of a tensor-product element partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchMesh {
    pub breakpoints_u: Vec<f64>,
    pub breakpoints_v: Vec<f64>,
}

impl PatchMesh {
    pub fn new(breakpoints_u: Vec<f64>, breakpoints_v: Vec<f64>) -> Result<Self> {
        for b in [&breakpoints_u, &breakpoints_v] {
            let ok = b.len() >= 2
                && b[0] == 0.0
                && b[b.len() - 1] == 1.0
                && b.windows(2).all(|w| w[1] > w[0]);
            if !ok {
                return Err(Error::InvalidInput(format!("bad breakpoints {b:?}")));
            }
        }
        Ok(PatchMesh {
            breakpoints_u,
            breakpoints_v,
        })
    }

    pub fn uniform(eu: usize, ev: usize) -> Result<Self> {
        let lin = |e: usize| (0..=e).map(|k| k as f64 / e as f64).collect::<Vec<_>>();
        if eu == 0 || ev == 0 {
            return Err(Error::InvalidInput("need at least one element".into()));
        }
        PatchMesh::new(lin(eu), lin(ev))
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.breakpoints_u.len() - 1, self.breakpoints_v.len() - 1)
    }

    /// Interior breakpoints in one direction.
    pub fn interior(&self, dir: usize) -> &[f64] {
        let b = if dir == 0 { &self.breakpoints_u } else { &self.breakpoints_v };
        &b[1..b.len() - 1]
    }
}

/// Splits `count` elements over spans with the given lengths: largest
/// remainder, ties resolved symmetrically from the outside in.
fn distribute(lengths: &[f64], count: usize) -> Vec<usize> {
    let k = lengths.len();
    let total: f64 = lengths.iter().sum();
    let spare = count - k;
    let exact: Vec<f64> = lengths.iter().map(|l| spare as f64 * l / total).collect();
    let mut alloc: Vec<usize> = exact.iter().map(|e| 1 + e.floor() as usize).collect();
    let mut left = count - alloc.iter().sum::<usize>();
    let mid = (k as f64 - 1.0) / 2.0;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                let (da, db) = ((a as f64 - mid).abs(), (b as f64 - mid).abs());
                db.partial_cmp(&da).unwrap_or(std::cmp::Ordering::Equal)
            })
            .then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }
    alloc
}

fn breaks_for(geom_breaks: &[f64], count: usize) -> Result<Vec<f64>> {
    let spans = geom_breaks.len() - 1;
    if count < spans {
        return Err(Error::InvalidInput(format!(
            "{count} elements cannot resolve {spans} geometry knot spans"
        )));
    }
    let lengths: Vec<f64> = geom_breaks.windows(2).map(|w| w[1] - w[0]).collect();
    let alloc = distribute(&lengths, count);
    let mut out = vec![0.0];
    for (k, w) in geom_breaks.windows(2).enumerate() {
        for j in 1..=alloc[k] {
            out.push(if j == alloc[k] { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / alloc[k] as f64 });
        }
    }
    Ok(out)
}

/// Element partition whose breakpoints contain every geometry knot and are
/// uniform inside each geometry knot span.
pub fn build_mesh(geom: &NurbsSurface, elements: (usize, usize)) -> Result<PatchMesh> {
    PatchMesh::new(
        breaks_for(&geom.kv_u().breaks(), elements.0)?,
        breaks_for(&geom.kv_v().breaks(), elements.1)?,
    )
}

/// Local basis shared by all elements of a 1D space.
#[derive(Clone, Debug)]
pub enum LocalBasis {
    /// B-splines (or NURBS when `weights` is set) of one knot vector;
    /// elements are its knot spans.
    Spline { kv: KnotVector, weights: Option<Vec<f64>> },
    /// Lagrange cardinal functions on reference nodes in `[0, 1]`.
    Lagrange { nodes: Vec<f64> },
}

/// Continuity imposed between Lagrange elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    C0,
    C1,
}

/// A 1D discrete space.
#[derive(Clone, Debug)]
pub struct Space1D {
    basis: LocalBasis,
    elements: Vec<(f64, f64)>,
    l2g: Vec<Vec<Vec<(usize, f64)>>>,
    n_dofs: usize,
    n_local: usize,
    dof_nodes: Option<Vec<f64>>,
}

impl Space1D {
    /// Spline space: one element per nonempty knot span.
    pub fn spline(kv: KnotVector, weights: Option<Vec<f64>>) -> Result<Self> {
        if let Some(w) = &weights {
            if w.len() != kv.num_basis() {
                return Err(Error::WeightMismatch {
                    expected: kv.num_basis(),
                    got: w.len(),
                });
            }
        }
        let p = kv.degree();
        let spans = kv.spans();
        let u = kv.knots();
        let elements = spans.iter().map(|&k| (u[k], u[k + 1])).collect();
        let l2g = spans
            .iter()
            .map(|&k| (0..=p).map(|i| vec![(k - p + i, 1.0)]).collect())
            .collect();
        Ok(Space1D {
            n_dofs: kv.num_basis(),
            n_local: p + 1,
            basis: LocalBasis::Spline { kv, weights },
            elements,
            l2g,
            dof_nodes: None,
        })
    }

    /// Lagrange space on `breaks` with reference `nodes`.
    pub fn lagrange(breaks: &[f64], nodes: Vec<f64>, coupling: Coupling) -> Result<Self> {
        let n = nodes.len();
        if n < 2 || nodes[0] != 0.0 || nodes[n - 1] != 1.0 {
            return Err(Error::InvalidInput("Lagrange nodes must include both ends".into()));
        }
        if coupling == Coupling::C1 && n < 3 {
            return Err(Error::InsufficientSmoothness(format!(
                "C1 coupling needs at least 3 nodes per element, got {n}"
            )));
        }
        let ne = breaks.len() - 1;
        let elements: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
        let n0 = ne * (n - 1) + 1;
        let g0 = |e: usize, i: usize| e * (n - 1) + i;
        let pos: Vec<f64> = (0..n0)
            .map(|g| {
                let e = (g / (n - 1)).min(ne - 1);
                let (a, b) = elements[e];
                a + (b - a) * nodes[g - e * (n - 1)]
            })
            .collect();
        // t[g] expresses C0 node g in terms of C0 nodes; eliminated rows are
        // rewritten in place.
        let mut t = DMatrix::<f64>::identity(n0, n0);
        let mut eliminated = vec![false; n0];
        if coupling == Coupling::C1 {
            let d = basis::lagrange_matrices(&nodes, &[0.0, 1.0])?;
            for e in 0..ne.saturating_sub(1) {
                let hl = elements[e].1 - elements[e].0;
                let hr = elements[e + 1].1 - elements[e + 1].0;
                let k = g0(e + 1, 1);
                let b1 = d.d1[(0, 1)] / hr;
                let mut row = DVector::<f64>::zeros(n0);
                for i in 0..n {
                    row.axpy(d.d1[(1, i)] / hl, &t.row(g0(e, i)).transpose(), 1.0);
                    if i != 1 {
                        row.axpy(-d.d1[(0, i)] / hr, &t.row(g0(e + 1, i)).transpose(), 1.0);
                    }
                }
                t.set_row(k, &(row / b1).transpose());
                eliminated[k] = true;
            }
        }
        let kept: Vec<usize> = (0..n0).filter(|&g| !eliminated[g]).collect();
        let l2g = (0..ne)
            .map(|e| {
                (0..n)
                    .map(|i| {
                        kept.iter()
                            .enumerate()
                            .filter_map(|(col, &g)| {
                                let c = t[(g0(e, i), g)];
                                (c != 0.0).then_some((col, c))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Space1D {
            basis: LocalBasis::Lagrange { nodes },
            elements,
            l2g,
            n_dofs: kept.len(),
            n_local: n,
            dof_nodes: Some(kept.iter().map(|&g| pos[g]).collect()),
        })
    }

    pub fn basis(&self) -> &LocalBasis {
        &self.basis
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[(f64, f64)] {
        &self.elements
    }

    pub fn l2g(&self, e: usize) -> &[Vec<(usize, f64)>] {
        &self.l2g[e]
    }

    /// Physical node of each DOF (Lagrange spaces only).
    pub fn dof_nodes(&self) -> Option<&[f64]> {
        self.dof_nodes.as_deref()
    }

    /// Degree of the local polynomials.
    pub fn degree(&self) -> usize {
        self.n_local - 1
    }

    /// Element containing `s`; the last element is closed on the right.
    pub fn element_of(&self, s: f64) -> usize {
        self.elements
            .iter()
            .rposition(|&(a, _)| a <= s)
            .unwrap_or(0)
            .min(self.elements.len() - 1)
    }

    pub fn midpoint(&self, e: usize) -> f64 {
        0.5 * (self.elements[e].0 + self.elements[e].1)
    }

    /// Local functions of element `e` at `pts` (`Q x n_local`), derivatives
    /// with respect to the patch coordinate.
    pub fn local_matrices(&self, e: usize, pts: &[f64]) -> Result<BasisMatrices> {
        let (a, b) = self.elements[e];
        match &self.basis {
            LocalBasis::Lagrange { nodes } => {
                let h = b - a;
                let t: Vec<f64> = pts.iter().map(|&s| (s - a) / h).collect();
                Ok(basis::lagrange_matrices(nodes, &t)?.scaled(h))
            }
            LocalBasis::Spline { kv, weights } => {
                let span = kv.spans()[e];
                let mut out = BasisMatrices::zeros(pts.len(), self.n_local);
                for (r, &s) in pts.iter().enumerate() {
                    if !(0.0..=1.0).contains(&s) {
                        return Err(Error::Domain(s));
                    }
                    let loc = match weights {
                        Some(w) => splinecore::eval_nurbs_span(kv, w, span, s),
                        None => splinecore::eval_bspline_span(kv, span, s),
                    };
                    for i in 0..self.n_local {
                        out.m[(r, i)] = loc.values[i];
                        out.d1[(r, i)] = loc.d1[i];
                        out.d2[(r, i)] = loc.d2[i];
                    }
                }
                Ok(out)
            }
        }
    }

    /// Global functions at `(element, s)` pairs (`rows x n_dofs`).
    pub fn global_matrices(&self, pts: &[(usize, f64)]) -> Result<BasisMatrices> {
        let mut out = BasisMatrices::zeros(pts.len(), self.n_dofs);
        for (r, &(e, s)) in pts.iter().enumerate() {
            let loc = self.local_matrices(e, &[s])?;
            for (i, entries) in self.l2g[e].iter().enumerate() {
                for &(g, c) in entries {
                    out.m[(r, g)] += c * loc.m[(0, i)];
                    out.d1[(r, g)] += c * loc.d1[(0, i)];
                    out.d2[(r, g)] += c * loc.d2[(0, i)];
                }
            }
        }
        Ok(out)
    }

    /// Global functions at points, each assigned to [`Self::element_of`].
    pub fn eval_at(&self, pts: &[f64]) -> Result<BasisMatrices> {
        let tagged: Vec<(usize, f64)> = pts.iter().map(|&s| (self.element_of(s), s)).collect();
        self.global_matrices(&tagged)
    }

    /// Broken-to-global map `C` (`n_elements * n_local x n_dofs`).
    pub fn c_matrix(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.elements.len() * self.n_local, self.n_dofs);
        for (e, funcs) in self.l2g.iter().enumerate() {
            for (i, entries) in funcs.iter().enumerate() {
                for &(g, v) in entries {
                    c[(e * self.n_local + i, g)] += v;
                }
            }
        }
        c
    }

    /// Points where global coefficients are recovered by interpolation:
    /// the DOF nodes, or Greville points for splines.
    pub fn interpolation_points(&self) -> Vec<f64> {
        match (&self.dof_nodes, &self.basis) {
            (Some(n), _) => n.clone(),
            (None, LocalBasis::Spline { kv, .. }) => splinecore::greville_abscissae(kv),
            (None, LocalBasis::Lagrange { .. }) => Vec::new(),
        }
    }

    /// Rows of the 1D space owned by each element for collocation: the
    /// given points tagged with their elements.
    pub fn tag_points(&self, pts: &[f64]) -> Vec<(usize, f64)> {
        pts.iter().map(|&s| (self.element_of(s), s)).collect()
    }
}

/// Tensor-product DOF map: global index `i1 * n_v + i2`.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub u: Space1D,
    pub v: Space1D,
}

impl DofMap {
    pub fn new(u: Space1D, v: Space1D) -> Self {
        DofMap { u, v }
    }

    pub fn n_dofs(&self) -> usize {
        self.u.n_dofs() * self.v.n_dofs()
    }

    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.v.n_dofs() + i2
    }

    pub fn n_elements(&self) -> usize {
        self.u.n_elements() * self.v.n_elements()
    }

    /// Element pairs in row-major order.
    pub fn element_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.u.n_elements())
            .flat_map(|a| (0..self.v.n_elements()).map(move |b| (a, b)))
            .collect()
    }

    /// Local coefficients (`n_local_u x n_local_v`) of element `(e1, e2)`.
    pub fn scatter_element(&self, global: &[f64], e1: usize, e2: usize) -> DMatrix<f64> {
        let (lu, lv) = (self.u.l2g(e1), self.v.l2g(e2));
        let nv = self.v.n_dofs();
        DMatrix::from_fn(lu.len(), lv.len(), |i, j| {
            let mut acc = 0.0;
            for &(g1, c1) in &lu[i] {
                for &(g2, c2) in &lv[j] {
                    acc += c1 * c2 * global[g1 * nv + g2];
                }
            }
            acc
        })
    }

    pub fn scatter(&self, global: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        if global.len() != self.n_dofs() {
            return Err(Error::InvalidInput(format!(
                "vector of length {} for {} DOFs",
                global.len(),
                self.n_dofs()
            )));
        }
        Ok(self
            .element_pairs()
            .into_iter()
            .map(|(a, b)| self.scatter_element(global, a, b))
            .collect())
    }

    /// Adds `C^T` of one element's local array into `out`.
    pub fn gather_element(&self, local: &DMatrix<f64>, e1: usize, e2: usize, out: &mut [f64]) {
        let (lu, lv) = (self.u.l2g(e1), self.v.l2g(e2));
        let nv = self.v.n_dofs();
        for (i, eu) in lu.iter().enumerate() {
            for (j, ev) in lv.iter().enumerate() {
                let x = local[(i, j)];
                if x == 0.0 {
                    continue;
                }
                for &(g1, c1) in eu {
                    for &(g2, c2) in ev {
                        out[g1 * nv + g2] += c1 * c2 * x;
                    }
                }
            }
        }
    }

    /// Sums element contributions (`C^T`), in element order.
    pub fn gather(&self, locals: &[DMatrix<f64>]) -> Result<Vec<f64>> {
        let pairs = self.element_pairs();
        if locals.len() != pairs.len() {
            return Err(Error::InvalidInput("one local array per element expected".into()));
        }
        let mut out = vec![0.0; self.n_dofs()];
        for (loc, &(a, b)) in locals.iter().zip(&pairs) {
            self.gather_element(loc, a, b, &mut out);
        }
        Ok(out)
    }

    /// Least-squares left inverse of [`Self::scatter`]; recovers `u` from
    /// `scatter(u)` exactly.
    pub fn restrict(&self, locals: &[DMatrix<f64>]) -> Result<Vec<f64>> {
        let g = self.gather(locals)?;
        let inv = |s: &Space1D| -> Result<DMatrix<f64>> {
            let c = s.c_matrix();
            (c.transpose() * &c)
                .try_inverse()
                .ok_or(Error::SingularMatrix { cond: f64::INFINITY })
        };
        let (au, av) = (inv(&self.u)?, inv(&self.v)?);
        let gm = DMatrix::from_row_slice(self.u.n_dofs(), self.v.n_dofs(), &g);
        let x = au * gm * av.transpose();
        Ok(row_major(&x))
    }

    /// Coefficients of the interpolant of `f` (given on the parameter
    /// square) at the tensor interpolation points.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
        let (pu, pv) = (self.u.interpolation_points(), self.v.interpolation_points());
        let au = self.u.eval_at(&pu)?.m;
        let av = self.v.eval_at(&pv)?.m;
        let fm = DMatrix::from_fn(pu.len(), pv.len(), |i, j| f(pu[i], pv[j]));
        let lu_u = au.lu();
        let lu_v = av.lu();
        let y = lu_u.solve(&fm).ok_or(Error::SingularMatrix { cond: f64::INFINITY })?;
        let x = lu_v
            .solve(&y.transpose())
            .ok_or(Error::SingularMatrix { cond: f64::INFINITY })?
            .transpose();
        Ok(row_major(&x))
    }

    /// Value and parametric gradient of the field with coefficients `c`.
    pub fn eval_field(&self, c: &[f64], s: (f64, f64)) -> Result<(f64, [f64; 2])> {
        let bu = self.u.eval_at(&[s.0])?;
        let bv = self.v.eval_at(&[s.1])?;
        let nv = self.v.n_dofs();
        let (mut val, mut du, mut dv) = (0.0, 0.0, 0.0);
        for i in 0..self.u.n_dofs() {
            for j in 0..nv {
                let x = c[i * nv + j];
                val += x * bu.m[(0, i)] * bv.m[(0, j)];
                du += x * bu.d1[(0, i)] * bv.m[(0, j)];
                dv += x * bu.m[(0, i)] * bv.d1[(0, j)];
            }
        }
        Ok((val, [du, dv]))
    }
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Spline knot vector for p-refinement on a mesh: every interior breakpoint
/// gets multiplicity `p` (C0) for Galerkin and `p - 1` (C1) for collocation.
pub fn p_refined_knots(breaks_interior: &[f64], p: usize, collocation: bool) -> Result<KnotVector> {
    if collocation && p < 2 {
        return Err(Error::InsufficientSmoothness(format!(
            "spline collocation needs degree >= 2, got {p}"
        )));
    }
    let mult = if collocation { p - 1 } else { p };
    KnotVector::from_breaks(breaks_interior, mult.max(1), p)
}

/// DOF map of `kind` on `mesh` with `n` functions per element and
/// direction. Spline kinds use p-refined knot vectors on the mesh
/// breakpoints with polynomial (B-spline) weights.
pub fn build_dofmap(kind: MethodKind, mesh: &PatchMesh, n: usize) -> Result<DofMap> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 functions per element, got {n}")));
    }
    let dir = |d: usize| -> Result<Space1D> {
        let breaks = if d == 0 { &mesh.breakpoints_u } else { &mesh.breakpoints_v };
        match kind {
            MethodKind::LG => Space1D::lagrange(breaks, basis::gll_points(n)?, Coupling::C0),
            MethodKind::CC | MethodKind::CG => Space1D::lagrange(breaks, basis::glc_points(n)?, Coupling::C1),
            _ => Space1D::spline(p_refined_knots(mesh.interior(d), n - 1, kind.is_collocation())?, None),
        }
    };
    Ok(DofMap::new(dir(0)?, dir(1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_c_surface, make_quarter_annulus};

    #[test]
    fn mesh_examples() {
        let a = build_mesh(&make_quarter_annulus(), (2, 2)).unwrap();
        assert_eq!(a.breakpoints_u, vec![0.0, 0.5, 1.0]);
        assert_eq!(a.breakpoints_v, vec![0.0, 0.5, 1.0]);
        let c = build_mesh(&make_c_surface(), (3, 5)).unwrap();
        assert_eq!(c.shape(), (3, 5));
        // Two elements in each outer profile arc, one in the middle arc.
        let v = &c.breakpoints_v;
        assert!((v[2] - 1.0 / 3.0).abs() < 1e-15 && (v[3] - 2.0 / 3.0).abs() < 1e-15);
        assert!(build_mesh(&make_quarter_annulus(), (1, 1)).is_err());
        assert_eq!(PatchMesh::uniform(1, 1).unwrap().shape(), (1, 1));
        let d = build_mesh(&make_quarter_annulus(), (4, 3)).unwrap();
        assert!(d.breakpoints_u.contains(&0.5));
    }

    #[test]
    fn dof_counts() {
        let m = PatchMesh::uniform(2, 2).unwrap();
        assert_eq!(build_dofmap(MethodKind::LG, &m, 8).unwrap().n_dofs(), 225);
        let one = PatchMesh::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        let cg = build_dofmap(MethodKind::CG, &one, 8).unwrap();
        assert_eq!(cg.u.n_dofs(), 14);
        assert!(matches!(
            Space1D::lagrange(&[0.0, 0.5, 1.0], vec![0.0, 1.0], Coupling::C1),
            Err(Error::InsufficientSmoothness(_))
        ));
        for p in 2..=12usize {
            let n = p + 1;
            for (eu, ev) in [(1, 1), (2, 2), (3, 5)] {
                let m = PatchMesh::uniform(eu, ev).unwrap();
                let count = |e: usize, per: usize| e * per;
                let lg = (count(eu, p) + 1) * (count(ev, p) + 1);
                let cc = (count(eu, p) + 1 - (eu - 1)) * (count(ev, p) + 1 - (ev - 1));
                let sg = (eu * p + 1) * (ev * p + 1);
                let sc = (eu * (p - 1) + 2) * (ev * (p - 1) + 2);
                assert_eq!(build_dofmap(MethodKind::LG, &m, n).unwrap().n_dofs(), lg);
                assert_eq!(build_dofmap(MethodKind::CC, &m, n).unwrap().n_dofs(), cc);
                assert_eq!(build_dofmap(MethodKind::SG, &m, n).unwrap().n_dofs(), sg);
                assert_eq!(build_dofmap(MethodKind::SC, &m, n).unwrap().n_dofs(), sc);
            }
        }
    }

    #[test]
    fn interpolants_are_continuous() {
        let f = |s: f64, t: f64| (2.0 * s + 0.3).sin() * (1.5 * t).exp();
        let m = PatchMesh::new(vec![0.0, 0.3, 0.55, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        for kind in MethodKind::ALL {
            let dm = build_dofmap(kind, &m, 6).unwrap();
            let c = dm.interpolate(f).unwrap();
            for &x in &[0.3, 0.55] {
                let el = dm.u.element_of(x);
                for k in 0..7 {
                    let t = k as f64 / 6.0;
                    let e2 = dm.v.element_of(t);
                    let eval = |e1: usize| -> (f64, f64) {
                        let bu = dm.u.global_matrices(&[(e1, x)]).unwrap();
                        let bv = dm.v.global_matrices(&[(e2, t)]).unwrap();
                        let nv = dm.v.n_dofs();
                        let (mut v, mut d) = (0.0, 0.0);
                        for i in 0..dm.u.n_dofs() {
                            for j in 0..nv {
                                v += c[i * nv + j] * bu.m[(0, i)] * bv.m[(0, j)];
                                d += c[i * nv + j] * bu.d1[(0, i)] * bv.m[(0, j)];
                            }
                        }
                        (v, d)
                    };
                    let (l, r) = (eval(el - 1), eval(el));
                    assert!((l.0 - r.0).abs() < 1e-12, "{kind} value jump");
                    if kind.is_c1_lagrange() || matches!(kind, MethodKind::SC | MethodKind::IC) {
                        assert!((l.1 - r.1).abs() < 1e-10, "{kind} derivative jump {}", l.1 - r.1);
                    }
                }
            }
        }
    }

    #[test]
    fn scatter_gather_restrict() {
        let m = PatchMesh::uniform(2, 3).unwrap();
        for kind in [MethodKind::LG, MethodKind::CC, MethodKind::SG] {
            let dm = build_dofmap(kind, &m, 5).unwrap();
            let n = dm.n_dofs();
            let u: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 / 101.0).collect();
            let back = dm.restrict(&dm.scatter(&u).unwrap()).unwrap();
            assert!(u.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-11));
            // Projection of a broken field is idempotent.
            let broken: Vec<DMatrix<f64>> = (0..dm.n_elements())
                .map(|e| DMatrix::from_fn(5, 5, |i, j| ((e + 3 * i + 5 * j) as f64).sin()))
                .collect();
            let p1 = dm.scatter(&dm.restrict(&broken).unwrap()).unwrap();
            let p2 = dm.scatter(&dm.restrict(&p1).unwrap()).unwrap();
            for (a, b) in p1.iter().zip(&p2) {
                assert!((a - b).amax() < 1e-11);
            }
        }
        let single = build_dofmap(MethodKind::LG, &PatchMesh::uniform(1, 1).unwrap(), 4).unwrap();
        let u: Vec<f64> = (0..16).map(|i| i as f64).collect();
        assert_eq!(single.gather(&single.scatter(&u).unwrap()).unwrap(), u);
        let dm = build_dofmap(MethodKind::CG, &m, 5).unwrap();
        let locals = dm.scatter(&vec![1.0; dm.n_dofs()]).unwrap();
        assert!(locals.iter().all(|l| l.iter().all(|x| (x - 1.0).abs() < 1e-12)));
    }

    #[test]
    fn distribution_is_symmetric() {
        assert_eq!(distribute(&[1.0; 3], 5), vec![2, 1, 2]);
        assert_eq!(distribute(&[0.5, 0.5], 4), vec![2, 2]);
        assert_eq!(distribute(&[1.0; 3], 3), vec![1, 1, 1]);
    }
}
