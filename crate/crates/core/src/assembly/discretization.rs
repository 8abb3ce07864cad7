use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::factors::{geometric_factors, FactorMode, GeometricFactors};
use super::kernels;
use crate::basis::{self, BasisMatrices, MethodKind, PointStrategy};
use crate::error::{Error, Result};
use crate::geometry::{MetricData, NurbsSurface};
use crate::mesh::{self, Coupling, DofMap, LocalBasis, Space1D};
use crate::quadrature::{self, QuadRule1D};
use crate::splinecore::{self, KnotVector};

/// How the trial space is enlarged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Refinement {
    /// Fixed elements, degree raised; spline breakpoints get multiplicity
    /// `p` (Galerkin) or `p - 1` (collocation).
    P,
    /// `m` steps of k-refinement of the geometry knots (spline methods);
    /// Lagrange methods keep the element mesh.
    K(usize),
}

/// One discretization choice.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodConfig {
    pub kind: MethodKind,
    pub degree: usize,
    pub elements: (usize, usize),
    pub refinement: Refinement,
    pub points: PointStrategy,
    /// Explicit collocation points per direction (spline collocation only).
    pub collocation_points: Option<[Vec<f64>; 2]>,
}

impl MethodConfig {
    pub fn new(kind: MethodKind, degree: usize, elements: (usize, usize)) -> Self {
        MethodConfig {
            kind,
            degree,
            elements,
            refinement: Refinement::P,
            points: PointStrategy::Greville,
            collocation_points: None,
        }
    }

    pub fn with_refinement(mut self, r: Refinement) -> Self {
        self.refinement = r;
        self
    }

    pub fn with_points(mut self, p: PointStrategy) -> Self {
        self.points = p;
        self
    }

    pub fn with_collocation_points(mut self, u: Vec<f64>, v: Vec<f64>) -> Self {
        self.collocation_points = Some([u, v]);
        self
    }
}

/// How an element block's evaluation points relate to test functions.
#[derive(Clone, Debug)]
pub enum TestSide {
    /// Quadrature points of a Galerkin form; test with the local basis.
    Weak,
    /// Weighted strong form at the element nodes, gathered through `C^T`.
    Nodal,
    /// Collocation: each point is a global row `u[k] * n_v + v[l]`.
    Rows { u: Vec<usize>, v: Vec<usize> },
}

/// Everything needed to evaluate operators on one element.
#[derive(Clone, Debug)]
pub struct ElementBlock {
    pub elem: (usize, usize),
    pub bu: BasisMatrices,
    pub bv: BasisMatrices,
    pub gf: GeometricFactors,
    pub test: TestSide,
}

/// A method bound to a surface: trial space, test scheme, element data.
#[derive(Clone, Debug)]
pub struct Discretization {
    kind: MethodKind,
    surf: NurbsSurface,
    dofs: DofMap,
    rows: Option<[Vec<(usize, f64)>; 2]>,
    blocks: Vec<ElementBlock>,
}

fn cap_multiplicity(kv: &KnotVector, max: usize) -> Result<KnotVector> {
    let p = kv.degree();
    let mut knots = vec![0.0; p + 1];
    for (k, m) in kv.interior() {
        knots.extend(std::iter::repeat(k).take(m.min(max)));
    }
    knots.extend(vec![1.0; p + 1]);
    KnotVector::new(knots, p)
}

fn interpolate_weight_function(geom_kv: &KnotVector, geom_w: &[f64], kv: &KnotVector) -> Result<Vec<f64>> {
    let tau = splinecore::greville_abscissae(kv);
    let a = splinecore::collocation_matrix(kv, &tau);
    let rhs = nalgebra::DVector::from_iterator(
        tau.len(),
        tau.iter().map(|&t| {
            let b = splinecore::eval_bspline_span(geom_kv, geom_kv.find_span(t), t);
            b.values.iter().enumerate().map(|(i, v)| v * geom_w[b.first + i]).sum::<f64>()
        }),
    );
    Ok(a.lu()
        .solve(&rhs)
        .ok_or(Error::SingularMatrix { cond: f64::INFINITY })?
        .iter()
        .copied()
        .collect())
}

/// Trial weights for a NURBS space on `trial`. When the trial knots contain
/// the (elevated) geometry knots the geometry weight function is refined
/// exactly. Otherwise it is interpolated at the Greville points of a
/// geometry-degree spline on the trial breakpoints, which is then elevated
/// to the trial degree; interpolating directly at degree `p` would make the
/// weight function oscillate near dropped geometry knots.
pub fn trial_weights(geom_kv: &KnotVector, geom_w: &[f64], trial: &KnotVector) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = geom_w.iter().map(|&w| vec![w]).collect();
    let w = match splinecore::refine_rows_to(geom_kv, &rows, trial) {
        Ok(r) => r.into_iter().map(|v| v[0]).collect::<Vec<f64>>(),
        Err(_) => {
            let (p, q) = (trial.degree(), geom_kv.degree());
            if p < q {
                interpolate_weight_function(geom_kv, geom_w, trial)?
            } else {
                let mut knots = vec![0.0; q + 1];
                for (k, m) in trial.interior() {
                    if m > p - q {
                        knots.extend(std::iter::repeat(k).take((m - (p - q)).min(q)));
                    }
                }
                knots.extend(vec![1.0; q + 1]);
                let coarse = KnotVector::new(knots, q)?;
                let wc = interpolate_weight_function(geom_kv, geom_w, &coarse)?;
                let rows: Vec<Vec<f64>> = wc.iter().map(|&w| vec![w]).collect();
                splinecore::refine_rows_to(&coarse, &rows, trial)?
                    .into_iter()
                    .map(|v| v[0])
                    .collect()
            }
        }
    };
    if w.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidInput("trial weights are not positive".into()));
    }
    Ok(w)
}

/// Trial knot vector of a spline method in direction `dir`.
pub fn spline_trial_knots(cfg: &MethodConfig, surf: &NurbsSurface, dir: usize) -> Result<KnotVector> {
    let geom = if dir == 0 { surf.kv_u() } else { surf.kv_v() };
    let p = cfg.degree;
    let colloc = cfg.kind.is_collocation();
    if colloc && p < 2 {
        return Err(Error::InsufficientSmoothness(format!(
            "spline collocation needs degree >= 2, got {p}"
        )));
    }
    match cfg.refinement {
        Refinement::P => {
            let mesh = mesh::build_mesh(surf, cfg.elements)?;
            mesh::p_refined_knots(mesh.interior(dir), p, colloc)
        }
        Refinement::K(m) => {
            if geom.degree() + m != p {
                return Err(Error::InvalidInput(format!(
                    "k-refinement by {m} of degree {} gives degree {}, not {p}",
                    geom.degree(),
                    geom.degree() + m
                )));
            }
            let kv = splinecore::k_refine(geom, m)?;
            if colloc {
                cap_multiplicity(&kv, p - 1)
            } else {
                Ok(kv)
            }
        }
    }
}

/// Trial space of `cfg` on `surf`.
pub fn trial_space(cfg: &MethodConfig, surf: &NurbsSurface) -> Result<DofMap> {
    let n = cfg.degree + 1;
    let dir = |d: usize| -> Result<Space1D> {
        match cfg.kind {
            MethodKind::LG | MethodKind::CC | MethodKind::CG => {
                let mesh = mesh::build_mesh(surf, cfg.elements)?;
                let breaks = if d == 0 { &mesh.breakpoints_u } else { &mesh.breakpoints_v };
                if cfg.kind == MethodKind::LG {
                    Space1D::lagrange(breaks, basis::gll_points(n)?, Coupling::C0)
                } else {
                    Space1D::lagrange(breaks, basis::glc_points(n)?, Coupling::C1)
                }
            }
            MethodKind::SG | MethodKind::SC => Space1D::spline(spline_trial_knots(cfg, surf, d)?, None),
            MethodKind::IG | MethodKind::IC => {
                let kv = spline_trial_knots(cfg, surf, d)?;
                let (a, b) = surf
                    .separable_weights()
                    .ok_or_else(|| Error::Unsupported("NURBS trial spaces need separable geometry weights".into()))?;
                let (gkv, gw) = if d == 0 { (surf.kv_u(), a) } else { (surf.kv_v(), b) };
                let w = trial_weights(gkv, &gw, &kv)?;
                Space1D::spline(kv, Some(w))
            }
        }
    };
    Ok(DofMap::new(dir(0)?, dir(1)?))
}

/// Collocation rows of a C1 Lagrange space: both patch ends plus the
/// interior nodes of every element.
fn lagrange_collocation_rows(space: &Space1D) -> Vec<(usize, f64)> {
    let nodes = match space.basis() {
        LocalBasis::Lagrange { nodes } => nodes,
        LocalBasis::Spline { .. } => return Vec::new(),
    };
    let ne = space.n_elements();
    let mut rows = vec![(0, 0.0)];
    for (e, &(a, b)) in space.elements().iter().enumerate() {
        for &t in &nodes[1..nodes.len() - 1] {
            rows.push((e, a + (b - a) * t));
        }
    }
    rows.push((ne - 1, 1.0));
    rows
}

impl Discretization {
    pub fn from_config(cfg: &MethodConfig, surf: &NurbsSurface) -> Result<Self> {
        let dofs = trial_space(cfg, surf)?;
        let points = match (&cfg.collocation_points, cfg.kind) {
            (Some(p), MethodKind::SC | MethodKind::IC) => Some(p.clone()),
            (_, MethodKind::SC | MethodKind::IC) => {
                let pick = |s: &Space1D| -> Result<Vec<f64>> {
                    match s.basis() {
                        LocalBasis::Spline { kv, .. } => Ok(match cfg.points {
                            PointStrategy::Demko => splinecore::demko_abscissae(kv, 1e-12)?,
                            _ => splinecore::greville_abscissae(kv),
                        }),
                        LocalBasis::Lagrange { .. } => Err(Error::InvalidInput("expected a spline space".into())),
                    }
                };
                Some([pick(&dofs.u)?, pick(&dofs.v)?])
            }
            _ => None,
        };
        Discretization::new(cfg.kind, surf.clone(), dofs, points)
    }

    /// Binds a trial space to `kind`'s test scheme. Spline collocation
    /// needs one point per DOF and direction.
    pub fn new(kind: MethodKind, surf: NurbsSurface, dofs: DofMap, points: Option<[Vec<f64>; 2]>) -> Result<Self> {
        let rows = match kind {
            MethodKind::CC => Some([lagrange_collocation_rows(&dofs.u), lagrange_collocation_rows(&dofs.v)]),
            MethodKind::SC | MethodKind::IC => {
                let [pu, pv] = points.ok_or_else(|| Error::InvalidInput("collocation points missing".into()))?;
                for (p, s) in [(&pu, &dofs.u), (&pv, &dofs.v)] {
                    if p.len() != s.n_dofs() || p.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(Error::InvalidInput(format!(
                            "need {} increasing collocation points, got {}",
                            s.n_dofs(),
                            p.len()
                        )));
                    }
                    if let LocalBasis::Spline { kv, .. } = s.basis() {
                        if kv.interior().iter().any(|&(_, m)| m + 1 > kv.degree()) {
                            return Err(Error::InsufficientSmoothness(
                                "collocation needs interior knot multiplicity <= p - 1".into(),
                            ));
                        }
                    }
                }
                Some([dofs.u.tag_points(&pu), dofs.v.tag_points(&pv)])
            }
            _ => None,
        };
        let mut d = Discretization {
            kind,
            surf,
            dofs,
            rows,
            blocks: Vec::new(),
        };
        d.blocks = d.native_blocks()?;
        Ok(d)
    }

    pub fn kind(&self) -> MethodKind {
        self.kind
    }

    pub fn surface(&self) -> &NurbsSurface {
        &self.surf
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    pub fn blocks(&self) -> &[ElementBlock] {
        &self.blocks
    }

    /// Collocation row points per direction as `(owner element, s)`.
    pub fn row_points(&self) -> Option<&[Vec<(usize, f64)>; 2]> {
        self.rows.as_ref()
    }

    fn cell(&self, e1: usize, e2: usize) -> (f64, f64) {
        (self.dofs.u.midpoint(e1), self.dofs.v.midpoint(e2))
    }

    /// Galerkin-type blocks with a per-element rule.
    pub fn weak_blocks(&self, rule: &QuadRule1D, test: TestSide) -> Result<Vec<ElementBlock>> {
        self.dofs
            .element_pairs()
            .par_iter()
            .map(|&(e1, e2)| {
                let (a1, b1) = self.dofs.u.elements()[e1];
                let (a2, b2) = self.dofs.v.elements()[e2];
                let ru = rule.mapped(a1, b1);
                let rv = rule.mapped(a2, b2);
                let bu = self.dofs.u.local_matrices(e1, &ru.points)?;
                let bv = self.dofs.v.local_matrices(e2, &rv.points)?;
                let gf = geometric_factors(
                    &self.surf,
                    self.cell(e1, e2),
                    &ru.points,
                    &rv.points,
                    Some((&ru.weights, &rv.weights)),
                    FactorMode::Galerkin,
                )?;
                Ok(ElementBlock {
                    elem: (e1, e2),
                    bu,
                    bv,
                    gf,
                    test: test.clone(),
                })
            })
            .collect()
    }

    fn native_blocks(&self) -> Result<Vec<ElementBlock>> {
        let n = self.dofs.u.n_local();
        match self.kind {
            MethodKind::SG | MethodKind::IG | MethodKind::LG => {
                if self.dofs.u.n_local() != self.dofs.v.n_local() {
                    return Err(Error::InvalidInput("directions need equal degree".into()));
                }
                self.weak_blocks(&quadrature::rule_for_method(self.kind, n)?, TestSide::Weak)
            }
            MethodKind::CG => self.weak_blocks(&quadrature::glc_rule(n)?, TestSide::Nodal),
            MethodKind::SC | MethodKind::IC | MethodKind::CC => {
                let rows = self.rows.as_ref().ok_or_else(|| Error::InvalidInput("no rows".into()))?;
                let owned = |r: &[(usize, f64)], e: usize| -> (Vec<usize>, Vec<f64>) {
                    r.iter().enumerate().filter(|(_, (o, _))| *o == e).map(|(i, &(_, s))| (i, s)).unzip()
                };
                self.dofs
                    .element_pairs()
                    .par_iter()
                    .filter_map(|&(e1, e2)| {
                        let (iu, su) = owned(&rows[0], e1);
                        let (iv, sv) = owned(&rows[1], e2);
                        if iu.is_empty() || iv.is_empty() {
                            return None;
                        }
                        let block = (|| -> Result<ElementBlock> {
                            let gf = geometric_factors(&self.surf, self.cell(e1, e2), &su, &sv, None, FactorMode::Collocation)?;
                            Ok(ElementBlock {
                                elem: (e1, e2),
                                bu: self.dofs.u.local_matrices(e1, &su)?,
                                bv: self.dofs.v.local_matrices(e2, &sv)?,
                                gf,
                                test: TestSide::Rows { u: iu, v: iv },
                            })
                        })();
                        Some(block)
                    })
                    .collect()
            }
        }
    }

    /// Blocks of the accurate Gauss rule used for norms.
    pub fn overkill_blocks(&self) -> Result<Vec<ElementBlock>> {
        let n = self.dofs.u.n_local().max(self.dofs.v.n_local());
        self.weak_blocks(&quadrature::overkill_rule(n)?, TestSide::Weak)
    }

    fn merge_vector(&self, blocks: &[ElementBlock], locals: Vec<DMatrix<f64>>) -> Vec<f64> {
        let nv = self.dofs.v.n_dofs();
        let mut out = vec![0.0; self.n_dofs()];
        for (b, loc) in blocks.iter().zip(locals) {
            match &b.test {
                TestSide::Weak | TestSide::Nodal => self.dofs.gather_element(&loc, b.elem.0, b.elem.1, &mut out),
                TestSide::Rows { u, v } => {
                    for (k, &r1) in u.iter().enumerate() {
                        for (l, &r2) in v.iter().enumerate() {
                            out[r1 * nv + r2] += loc[(k, l)];
                        }
                    }
                }
            }
        }
        out
    }

    fn merge_matrix(&self, blocks: &[ElementBlock], locals: Vec<DMatrix<f64>>) -> DMatrix<f64> {
        let n = self.n_dofs();
        let nv = self.dofs.v.n_dofs();
        let mut k = DMatrix::zeros(n, n);
        for (b, loc) in blocks.iter().zip(locals) {
            let lu = self.dofs.u.l2g(b.elem.0);
            let lv = self.dofs.v.l2g(b.elem.1);
            let n2 = lv.len();
            // Column map of local index j1 * n2 + j2.
            let cols: Vec<Vec<(usize, f64)>> = (0..lu.len() * n2)
                .map(|j| {
                    let mut e = Vec::new();
                    for &(g1, c1) in &lu[j / n2] {
                        for &(g2, c2) in &lv[j % n2] {
                            e.push((g1 * nv + g2, c1 * c2));
                        }
                    }
                    e
                })
                .collect();
            let rows: Vec<Vec<(usize, f64)>> = match &b.test {
                TestSide::Weak | TestSide::Nodal => cols.clone(),
                TestSide::Rows { u, v } => u
                    .iter()
                    .flat_map(|&r1| v.iter().map(move |&r2| vec![(r1 * nv + r2, 1.0)]))
                    .collect(),
            };
            for (i, re) in rows.iter().enumerate() {
                for (j, ce) in cols.iter().enumerate() {
                    let x = loc[(i, j)];
                    if x == 0.0 {
                        continue;
                    }
                    for &(gi, ci) in re {
                        for &(gj, cj) in ce {
                            k[(gi, gj)] += ci * cj * x;
                        }
                    }
                }
            }
        }
        k
    }

    /// Matrix-free application of the Laplace–Beltrami operator (`-Delta`).
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let locals: Vec<DMatrix<f64>> = self
            .blocks
            .par_iter()
            .map(|b| {
                let ul = self.dofs.scatter_element(u, b.elem.0, b.elem.1);
                match b.test {
                    TestSide::Weak => kernels::galerkin_stiffness_apply(&b.gf, &b.bu, &b.bv, &ul),
                    _ => kernels::strong_lb_values(&b.gf, &b.bu, &b.bv, &ul),
                }
            })
            .collect();
        self.merge_vector(&self.blocks, locals)
    }

    /// Dense Laplace–Beltrami matrix assembled element by element.
    pub fn stiffness_matrix(&self) -> DMatrix<f64> {
        let locals: Vec<DMatrix<f64>> = self
            .blocks
            .par_iter()
            .map(|b| match b.test {
                TestSide::Weak => kernels::galerkin_stiffness_dense(&b.gf, &b.bu, &b.bv),
                _ => kernels::strong_lb_dense(&b.gf, &b.bu, &b.bv),
            })
            .collect();
        self.merge_matrix(&self.blocks, locals)
    }

    /// Pointwise reaction weights `c(u_n)` on a block, scaled for the test side.
    fn reaction_weights(&self, b: &ElementBlock, u_n: Option<&[f64]>, coef: &(dyn Fn(f64) -> f64 + Sync)) -> DMatrix<f64> {
        let un = match u_n {
            Some(c) => kernels::values(&b.bu, &b.bv, &self.dofs.scatter_element(c, b.elem.0, b.elem.1)),
            None => DMatrix::zeros(b.bu.npoints(), b.bv.npoints()),
        };
        let c = un.map(coef);
        match b.test {
            TestSide::Rows { .. } => c,
            _ => c.component_mul(&b.gf.jw),
        }
    }

    /// Matrix-free `(v, c(u_n) u)` (Galerkin) or `c(u_n(x_i)) u(x_i)` (collocation).
    pub fn apply_reaction(&self, u_n: Option<&[f64]>, coef: &(dyn Fn(f64) -> f64 + Sync), u: &[f64]) -> Vec<f64> {
        let locals: Vec<DMatrix<f64>> = self
            .blocks
            .par_iter()
            .map(|b| {
                let w = self.reaction_weights(b, u_n, coef);
                let ul = self.dofs.scatter_element(u, b.elem.0, b.elem.1);
                match b.test {
                    TestSide::Weak => kernels::galerkin_mass_apply(&w, &b.bu, &b.bv, &ul),
                    _ => w.component_mul(&kernels::values(&b.bu, &b.bv, &ul)),
                }
            })
            .collect();
        self.merge_vector(&self.blocks, locals)
    }

    /// Dense counterpart of [`Self::apply_reaction`].
    pub fn reaction_matrix(&self, u_n: Option<&[f64]>, coef: &(dyn Fn(f64) -> f64 + Sync)) -> DMatrix<f64> {
        let locals: Vec<DMatrix<f64>> = self
            .blocks
            .par_iter()
            .map(|b| {
                let w = self.reaction_weights(b, u_n, coef);
                match b.test {
                    TestSide::Weak => kernels::galerkin_mass_dense(&w, &b.bu, &b.bv),
                    _ => {
                        let mut v = kernels::values_dense(&b.bu, &b.bv);
                        let qv = w.ncols();
                        for (r, mut row) in v.row_iter_mut().enumerate() {
                            row *= w[(r / qv, r % qv)];
                        }
                        v
                    }
                }
            })
            .collect();
        self.merge_matrix(&self.blocks, locals)
    }

    /// Right-hand side of a source `f` evaluated from the metric data.
    pub fn load_vector(&self, f: &(dyn Fn(&MetricData) -> f64 + Sync)) -> Vec<f64> {
        let locals: Vec<DMatrix<f64>> = self
            .blocks
            .par_iter()
            .map(|b| {
                let (qu, qv) = b.gf.shape();
                let fv = DMatrix::from_fn(qu, qv, |k, l| f(b.gf.metric_at(k, l)));
                match b.test {
                    TestSide::Weak => b.bu.m.transpose() * fv.component_mul(&b.gf.jw) * &b.bv.m,
                    TestSide::Nodal => fv.component_mul(&b.gf.jw),
                    TestSide::Rows { .. } => fv,
                }
            })
            .collect();
        self.merge_vector(&self.blocks, locals)
    }

    /// Stiffness plus mass with the accurate rule: the H1 Gram matrix.
    pub fn h1_gram_matrix(&self) -> Result<DMatrix<f64>> {
        let blocks = self.overkill_blocks()?;
        let locals: Vec<DMatrix<f64>> = blocks
            .par_iter()
            .map(|b| kernels::galerkin_stiffness_dense(&b.gf, &b.bu, &b.bv) + kernels::galerkin_mass_dense(&b.gf.jw, &b.bu, &b.bv))
            .collect();
        Ok(self.merge_matrix(&blocks, locals))
    }

    /// Parametric location of a DOF's boundary functional: the collocation
    /// point of row `(i1, i2)` or the Lagrange node of DOF `(i1, i2)`.
    pub fn dof_point(&self, i1: usize, i2: usize) -> Option<((usize, f64), (usize, f64))> {
        if let Some([ru, rv]) = &self.rows {
            return Some((ru[i1], rv[i2]));
        }
        let (nu, nv) = (self.dofs.u.dof_nodes()?, self.dofs.v.dof_nodes()?);
        Some((
            (self.dofs.u.element_of(nu[i1]), nu[i1]),
            (self.dofs.v.element_of(nv[i2]), nv[i2]),
        ))
    }

    /// Global basis rows (values and parametric gradients) at one point.
    pub fn functional_at(&self, pu: (usize, f64), pv: (usize, f64)) -> Result<(Vec<f64>, [Vec<f64>; 2])> {
        let bu = self.dofs.u.global_matrices(&[pu])?;
        let bv = self.dofs.v.global_matrices(&[pv])?;
        let (n1, n2) = (self.dofs.u.n_dofs(), self.dofs.v.n_dofs());
        let mut val = vec![0.0; n1 * n2];
        let mut du = vec![0.0; n1 * n2];
        let mut dv = vec![0.0; n1 * n2];
        for i in 0..n1 {
            let (a, b) = (bu.m[(0, i)], bu.d1[(0, i)]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            for j in 0..n2 {
                let idx = i * n2 + j;
                val[idx] = a * bv.m[(0, j)];
                du[idx] = b * bv.m[(0, j)];
                dv[idx] = a * bv.d1[(0, j)];
            }
        }
        Ok((val, [du, dv]))
    }
}
