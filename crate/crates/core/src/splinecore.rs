//! Univariate B-spline and NURBS machinery.
//!
//! Knot vectors live on `[0, 1]` and are always open. Control data is passed
//! as rows of arbitrary dimension so the same routines refine curves, the
//! rows of a surface net, and identity matrices (to extract transfer
//! operators).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Two knots closer than this are the same knot.
pub const KNOT_TOL: f64 = 1e-12;

/// Open knot vector on `[0, 1]` with its degree.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    /// Validates and snaps near-duplicate knots together.
    pub fn new(mut knots: Vec<f64>, degree: usize) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::InvalidKnotVector(format!(
                "{} knots cannot carry degree {p}",
                knots.len()
            )));
        }
        for k in knots.iter_mut() {
            if !k.is_finite() || *k < -KNOT_TOL || *k > 1.0 + KNOT_TOL {
                return Err(Error::InvalidKnotVector(format!("knot {k} outside [0,1]")));
            }
            if k.abs() <= KNOT_TOL {
                *k = 0.0;
            } else if (*k - 1.0).abs() <= KNOT_TOL {
                *k = 1.0;
            }
        }
        for i in 1..knots.len() {
            if knots[i] < knots[i - 1] - KNOT_TOL {
                return Err(Error::InvalidKnotVector("knots decrease".into()));
            }
            if knots[i] - knots[i - 1] <= KNOT_TOL {
                knots[i] = knots[i - 1];
            }
        }
        let m = knots.len();
        let open_start = knots[..=p].iter().all(|&k| k == 0.0) && knots[p + 1] > 0.0;
        let open_end = knots[m - p - 1..].iter().all(|&k| k == 1.0) && knots[m - p - 2] < 1.0;
        if !open_start || !open_end {
            return Err(Error::InvalidKnotVector(format!(
                "end knots must be repeated exactly {} times",
                p + 1
            )));
        }
        let kv = KnotVector { knots, degree };
        if let Some(&(k, mult)) = kv.distinct().iter().find(|&&(_, mult)| mult > p + 1) {
            return Err(Error::InvalidKnotVector(format!(
                "knot {k} has multiplicity {mult} > {}",
                p + 1
            )));
        }
        Ok(kv)
    }

    /// Open knot vector with the given interior breakpoints, each repeated
    /// `mult` times.
    pub fn from_breaks(interior: &[f64], mult: usize, degree: usize) -> Result<Self> {
        let mut knots = vec![0.0; degree + 1];
        for &b in interior {
            knots.extend(std::iter::repeat(b).take(mult));
        }
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        KnotVector::new(knots, degree)
    }

    /// Single Bézier segment of degree `p`.
    pub fn bezier(degree: usize) -> Self {
        let mut knots = vec![0.0; degree + 1];
        knots.extend(vec![1.0; degree + 1]);
        KnotVector { knots, degree }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values with multiplicities.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            match out.last_mut() {
                Some((v, m)) if (k - *v).abs() <= KNOT_TOL => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// Distinct knot values, `0` and `1` included.
    pub fn breaks(&self) -> Vec<f64> {
        self.distinct().into_iter().map(|(k, _)| k).collect()
    }

    /// Distinct interior knots with multiplicities.
    pub fn interior(&self) -> Vec<(f64, usize)> {
        let d = self.distinct();
        d[1..d.len() - 1].to_vec()
    }

    pub fn multiplicity(&self, s: f64) -> usize {
        self.knots.iter().filter(|&&k| (k - s).abs() <= KNOT_TOL).count()
    }

    /// Knot indices `k` with `knots[k] < knots[k+1]`, one per element.
    pub fn spans(&self) -> Vec<usize> {
        (self.degree..self.num_basis())
            .filter(|&k| self.knots[k] < self.knots[k + 1])
            .collect()
    }

    /// Index `k` of the span containing `s`; the last span is closed on the right.
    pub fn find_span(&self, s: f64) -> usize {
        let n = self.num_basis();
        if s >= self.knots[n] {
            return n - 1;
        }
        let (mut lo, mut hi) = (self.degree, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.knots[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Positive weights of a rational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput(format!("weight {bad} is not positive")));
        }
        Ok(WeightVector(w))
    }

    pub fn ones(n: usize) -> Self {
        WeightVector(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check(&self, kv: &KnotVector) -> Result<()> {
        if self.len() != kv.num_basis() {
            return Err(Error::WeightMismatch {
                expected: kv.num_basis(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// All basis functions (and first/second derivatives) at one point.
#[derive(Clone, Debug)]
pub struct BasisEval1D {
    pub s: f64,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// The `p + 1` functions that are nonzero on one span.
#[derive(Clone, Debug)]
pub struct LocalEval {
    /// Global index of the first local function.
    pub first: usize,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// Derivatives `0..=nd` of the nonzero B-splines on `span` at `s`.
pub fn ders_basis_funs(kv: &KnotVector, span: usize, s: f64, nd: usize) -> Vec<Vec<f64>> {
    let p = kv.degree;
    let u = &kv.knots;
    let mut ders = vec![vec![0.0; p + 1]; nd + 1];
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = s - u[span + 1 - j];
        right[j] = u[span + j] - s;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let top = nd.min(p);
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=top {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for (k, row) in ders.iter_mut().enumerate().take(top + 1).skip(1) {
        for v in row.iter_mut() {
            *v *= fac;
        }
        fac *= (p - k) as f64;
    }
    ders
}

fn check_domain(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(s));
    }
    Ok(())
}

/// Nonzero B-splines on a given span. `span` may differ from
/// `find_span(s)` to take one-sided values at a breakpoint.
pub fn eval_bspline_span(kv: &KnotVector, span: usize, s: f64) -> LocalEval {
    let d = ders_basis_funs(kv, span, s, 2);
    let mut it = d.into_iter();
    LocalEval {
        first: span - kv.degree,
        values: it.next().unwrap_or_default(),
        d1: it.next().unwrap_or_default(),
        d2: it.next().unwrap_or_default(),
    }
}

/// Rational counterpart of [`eval_bspline_span`].
pub fn eval_nurbs_span(kv: &KnotVector, w: &[f64], span: usize, s: f64) -> LocalEval {
    let b = eval_bspline_span(kv, span, s);
    let ws = &w[b.first..b.first + b.values.len()];
    let wsum: f64 = ws.iter().zip(&b.values).map(|(a, c)| a * c).sum();
    let w1: f64 = ws.iter().zip(&b.d1).map(|(a, c)| a * c).sum();
    let w2: f64 = ws.iter().zip(&b.d2).map(|(a, c)| a * c).sum();
    let n = b.values.len();
    let mut out = LocalEval {
        first: b.first,
        values: vec![0.0; n],
        d1: vec![0.0; n],
        d2: vec![0.0; n],
    };
    for i in 0..n {
        let v = ws[i] * b.values[i] / wsum;
        let v1 = (ws[i] * b.d1[i] - v * w1) / wsum;
        let v2 = (ws[i] * b.d2[i] - 2.0 * v1 * w1 - v * w2) / wsum;
        out.values[i] = v;
        out.d1[i] = v1;
        out.d2[i] = v2;
    }
    out
}

fn expand(kv: &KnotVector, s: f64, local: LocalEval) -> BasisEval1D {
    let n = kv.num_basis();
    let mut out = BasisEval1D {
        s,
        values: vec![0.0; n],
        d1: vec![0.0; n],
        d2: vec![0.0; n],
    };
    for i in 0..local.values.len() {
        out.values[local.first + i] = local.values[i];
        out.d1[local.first + i] = local.d1[i];
        out.d2[local.first + i] = local.d2[i];
    }
    out
}

/// All B-spline values and derivatives at `s`.
pub fn eval_bspline(kv: &KnotVector, s: f64) -> Result<BasisEval1D> {
    check_domain(s)?;
    Ok(expand(kv, s, eval_bspline_span(kv, kv.find_span(s), s)))
}

/// All NURBS values and derivatives at `s`.
pub fn eval_nurbs(kv: &KnotVector, w: &WeightVector, s: f64) -> Result<BasisEval1D> {
    check_domain(s)?;
    w.check(kv)?;
    Ok(expand(kv, s, eval_nurbs_span(kv, w.as_slice(), kv.find_span(s), s)))
}

/// Knot averages; knot midpoints when `p = 0`.
pub fn greville_abscissae(kv: &KnotVector) -> Vec<f64> {
    let p = kv.degree;
    let u = &kv.knots;
    (0..kv.num_basis())
        .map(|i| {
            if p == 0 {
                0.5 * (u[i] + u[i + 1])
            } else {
                u[i + 1..=i + p].iter().sum::<f64>() / p as f64
            }
        })
        .collect()
}

/// Collocation matrix `A[i][j] = B_j(tau_i)`.
pub fn collocation_matrix(kv: &KnotVector, tau: &[f64]) -> DMatrix<f64> {
    let n = kv.num_basis();
    let mut a = DMatrix::zeros(tau.len(), n);
    for (i, &t) in tau.iter().enumerate() {
        let loc = eval_bspline_span(kv, kv.find_span(t), t);
        for (j, v) in loc.values.iter().enumerate() {
            a[(i, loc.first + j)] = *v;
        }
    }
    a
}

fn spline_value(kv: &KnotVector, c: &[f64], x: f64, order: usize) -> f64 {
    let loc = eval_bspline_span(kv, kv.find_span(x), x);
    let d = match order {
        0 => &loc.values,
        1 => &loc.d1,
        _ => &loc.d2,
    };
    d.iter().enumerate().map(|(j, v)| v * c[loc.first + j]).sum()
}

/// Location of the maximum of `sign * s(x)` on `[a, b]`.
fn local_extremum(kv: &KnotVector, c: &[f64], sign: f64, a: f64, b: f64) -> f64 {
    const SAMPLES: usize = 48;
    let f = |x: f64| sign * spline_value(kv, c, x, 0);
    let g = |x: f64| sign * spline_value(kv, c, x, 1);
    let xs: Vec<f64> = (0..=SAMPLES)
        .map(|k| a + (b - a) * k as f64 / SAMPLES as f64)
        .collect();
    let best = (0..=SAMPLES)
        .max_by(|&i, &j| f(xs[i]).total_cmp(&f(xs[j])))
        .unwrap_or(0);
    let mut lo = xs[best.saturating_sub(1)];
    let mut hi = xs[(best + 1).min(SAMPLES)];
    let mut x = xs[best];
    if g(lo) < 0.0 || g(hi) > 0.0 {
        // No derivative sign change in the bracket: golden section.
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut l, mut h) = (lo, hi);
        for _ in 0..100 {
            let x1 = h - r * (h - l);
            let x2 = l + r * (h - l);
            if f(x1) < f(x2) {
                l = x1;
            } else {
                h = x2;
            }
        }
        return 0.5 * (l + h);
    }
    // Safeguarded Newton on the derivative; bisection keeps kinks at knots
    // resolved to machine precision.
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        let hx = sign * spline_value(kv, c, x, 2);
        let xn = x - gx / hx;
        let step_ok = hx < 0.0 && xn > lo && xn < hi;
        let next = if step_ok { xn } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-16 {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// Extrema of the equioscillating Chebyshev spline on `kv`.
pub fn demko_abscissae(kv: &KnotVector, tol: f64) -> Result<Vec<f64>> {
    const MAX_ITER: usize = 100;
    let n = kv.num_basis();
    let mut tau = greville_abscissae(kv);
    if kv.degree == 0 || n <= 2 {
        return Ok(tau);
    }
    let rhs = nalgebra::DVector::from_fn(n, |i, _| if (n - 1 - i) % 2 == 0 { 1.0 } else { -1.0 });
    let mut delta = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let a = collocation_matrix(kv, &tau);
        let c = a
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularMatrix { cond: f64::INFINITY })?;
        let c = c.as_slice();
        let mut next = tau.clone();
        for i in 1..n - 1 {
            next[i] = local_extremum(kv, c, rhs[i], tau[i - 1], tau[i + 1]);
        }
        delta = next
            .iter()
            .zip(&tau)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        tau = next;
        if delta < tol {
            return Ok(tau);
        }
    }
    Err(Error::Iteration { residual: delta })
}

fn homogenize(w: &[f64], ctrl: &[Vec<f64>]) -> Vec<Vec<f64>> {
    ctrl.iter()
        .zip(w)
        .map(|(p, &wi)| {
            let mut h: Vec<f64> = p.iter().map(|x| x * wi).collect();
            h.push(wi);
            h
        })
        .collect()
}

fn dehomogenize(h: Vec<Vec<f64>>) -> Result<(WeightVector, Vec<Vec<f64>>)> {
    let mut w = Vec::with_capacity(h.len());
    let mut pts = Vec::with_capacity(h.len());
    for mut row in h {
        let wi = row.pop().unwrap_or(1.0);
        w.push(wi);
        pts.push(row.into_iter().map(|x| x / wi).collect());
    }
    Ok((WeightVector::new(w)?, pts))
}

/// Boehm insertion on rows that are already homogeneous (or polynomial).
pub fn insert_knot_rows(kv: &KnotVector, rows: &[Vec<f64>], s_new: f64) -> Result<(KnotVector, Vec<Vec<f64>>)> {
    let p = kv.degree;
    if !(s_new > 0.0 && s_new < 1.0) {
        return Err(Error::Domain(s_new));
    }
    let mult = kv.multiplicity(s_new);
    if mult + 1 > p {
        return Err(Error::MultiplicityOverflow {
            knot: s_new,
            mult: mult + 1,
            max: p,
        });
    }
    let s_new = if mult > 0 {
        kv.knots[kv.knots.iter().position(|&k| (k - s_new).abs() <= KNOT_TOL).unwrap_or(0)]
    } else {
        s_new
    };
    let u = &kv.knots;
    let k = kv.find_span(s_new);
    let n = kv.num_basis();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if i + p <= k {
            out.push(rows[i].clone());
        } else if i > k {
            out.push(rows[i - 1].clone());
        } else {
            let alpha = (s_new - u[i]) / (u[i + p] - u[i]);
            out.push(
                rows[i]
                    .iter()
                    .zip(&rows[i - 1])
                    .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                    .collect(),
            );
        }
    }
    let mut knots = u.clone();
    knots.insert(k + 1, s_new);
    Ok((KnotVector { knots, degree: p }, out))
}

/// Inserts `s_new` once; the rational curve is unchanged.
pub fn insert_knot(
    kv: &KnotVector,
    w: &WeightVector,
    ctrl: &[Vec<f64>],
    s_new: f64,
) -> Result<(KnotVector, WeightVector, Vec<Vec<f64>>)> {
    w.check(kv)?;
    let (kv2, h) = insert_knot_rows(kv, &homogenize(w.as_slice(), ctrl), s_new)?;
    let (w2, pts) = dehomogenize(h)?;
    Ok((kv2, w2, pts))
}

/// Knots of `target` minus knots of `kv`, as a multiset; errors unless
/// `kv` is contained in `target` and both share a degree.
fn knot_difference(kv: &KnotVector, target: &KnotVector) -> Result<Vec<f64>> {
    let mut extra = Vec::new();
    let have = kv.distinct();
    for (t, mt) in target.distinct() {
        let mk = have
            .iter()
            .find(|(k, _)| (k - t).abs() <= KNOT_TOL)
            .map(|&(_, m)| m)
            .unwrap_or(0);
        if mk > mt {
            return Err(Error::InvalidInput(format!("target knot vector drops knot {t}")));
        }
        extra.extend(std::iter::repeat(t).take(mt - mk));
    }
    for (k, _) in have {
        if target.multiplicity(k) == 0 {
            return Err(Error::InvalidInput(format!("target knot vector drops knot {k}")));
        }
    }
    Ok(extra)
}

/// Transfer matrix `T` (target basis count × source basis count) with
/// `B_src = T^T B_target`, i.e. target coefficients `= T * source`.
pub fn insertion_matrix(kv: &KnotVector, target: &KnotVector) -> Result<DMatrix<f64>> {
    if kv.degree != target.degree {
        return Err(Error::InvalidInput("degrees differ".into()));
    }
    let n = kv.num_basis();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut cur = kv.clone();
    for s in knot_difference(kv, target)? {
        let (k2, r2) = insert_knot_rows(&cur, &rows, s)?;
        cur = k2;
        rows = r2;
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Degree elevation of homogeneous rows by `m`.
pub fn elevate_degree_rows(kv: &KnotVector, rows: &[Vec<f64>], m: usize) -> Result<(KnotVector, Vec<Vec<f64>>)> {
    if m == 0 {
        return Ok((kv.clone(), rows.to_vec()));
    }
    let p = kv.degree;
    let interior = kv.interior();
    if p == 0 || interior.iter().any(|&(_, mult)| mult > p) {
        return Err(Error::Unsupported(
            "degree elevation of a discontinuous spline".into(),
        ));
    }
    // Bezier extraction.
    let mut cur = kv.clone();
    let mut h = rows.to_vec();
    for &(k, mult) in &interior {
        for _ in mult..p {
            let (k2, h2) = insert_knot_rows(&cur, &h, k)?;
            cur = k2;
            h = h2;
        }
    }
    let nseg = interior.len() + 1;
    let q = p + m;
    let dim = rows.first().map_or(0, |r| r.len());
    let mut bez = vec![vec![0.0; dim]; nseg * q + 1];
    for seg in 0..nseg {
        let pts = &h[seg * p..=seg * p + p];
        for i in 0..=q {
            let mut acc = vec![0.0; dim];
            let lo = i.saturating_sub(m);
            for (j, pj) in pts.iter().enumerate().take(p.min(i) + 1).skip(lo) {
                let c = binom(p, j) * binom(m, i - j) / binom(q, i);
                for (a, x) in acc.iter_mut().zip(pj) {
                    *a += c * x;
                }
            }
            bez[seg * q + i] = acc;
        }
    }
    let breaks: Vec<f64> = interior.iter().map(|&(k, _)| k).collect();
    let bez_kv = KnotVector::from_breaks(&breaks, q, q)?;
    let mut knots = vec![0.0; q + 1];
    for &(k, mult) in &interior {
        knots.extend(std::iter::repeat(k).take(mult + m));
    }
    knots.extend(vec![1.0; q + 1]);
    let target = KnotVector::new(knots, q)?;
    // Recompose: solve T c = b (T has full column rank, system consistent).
    let t = insertion_matrix(&target, &bez_kv)?;
    let b = DMatrix::from_fn(bez.len(), dim, |i, j| bez[i][j]);
    let c = t
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let out = (0..c.nrows())
        .map(|i| (0..dim).map(|j| c[(i, j)]).collect())
        .collect();
    Ok((target, out))
}

/// Raises the degree by `m`; every knot's multiplicity grows by `m`.
pub fn elevate_degree(
    kv: &KnotVector,
    w: &WeightVector,
    ctrl: &[Vec<f64>],
    m: usize,
) -> Result<(KnotVector, WeightVector, Vec<Vec<f64>>)> {
    w.check(kv)?;
    let (kv2, h) = elevate_degree_rows(kv, &homogenize(w.as_slice(), ctrl), m)?;
    let (w2, pts) = dehomogenize(h)?;
    Ok((kv2, w2, pts))
}

/// Exact refinement of homogeneous rows onto `target`, which must contain
/// the source knot vector after elevation to the target degree.
pub fn refine_rows_to(kv: &KnotVector, rows: &[Vec<f64>], target: &KnotVector) -> Result<Vec<Vec<f64>>> {
    if target.degree < kv.degree {
        return Err(Error::InvalidInput("target degree is lower".into()));
    }
    let (mut cur, mut h) = elevate_degree_rows(kv, rows, target.degree - kv.degree)?;
    for s in knot_difference(&cur, target)? {
        let (k2, h2) = insert_knot_rows(&cur, &h, s)?;
        cur = k2;
        h = h2;
    }
    Ok(h)
}

/// Rational counterpart of [`refine_rows_to`].
pub fn refine_to(
    kv: &KnotVector,
    w: &WeightVector,
    ctrl: &[Vec<f64>],
    target: &KnotVector,
) -> Result<(WeightVector, Vec<Vec<f64>>)> {
    w.check(kv)?;
    dehomogenize(refine_rows_to(kv, &homogenize(w.as_slice(), ctrl), target)?)
}

/// Raises every knot's multiplicity by `m` and adds `m` equally spaced
/// simple knots inside each original knot interval.
pub fn k_refine(kv: &KnotVector, m: usize) -> Result<KnotVector> {
    if m == 0 {
        return Ok(kv.clone());
    }
    let q = kv.degree + m;
    let d = kv.distinct();
    let mut knots = Vec::new();
    for (idx, &(k, mult)) in d.iter().enumerate() {
        knots.extend(std::iter::repeat(k).take(mult + m));
        if let Some(&(next, _)) = d.get(idx + 1) {
            for j in 1..=m {
                knots.push(k + (next - k) * j as f64 / (m + 1) as f64);
            }
        }
    }
    KnotVector::new(knots, q)
}

/// Evaluates a rational curve at `s`.
pub fn curve_point(kv: &KnotVector, w: &WeightVector, ctrl: &[Vec<f64>], s: f64) -> Result<Vec<f64>> {
    let b = eval_nurbs(kv, w, s)?;
    let dim = ctrl.first().map_or(0, |r| r.len());
    let mut x = vec![0.0; dim];
    for (bi, p) in b.values.iter().zip(ctrl) {
        for (xk, pk) in x.iter_mut().zip(p) {
            *xk += bi * pk;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(k: &[f64], p: usize) -> KnotVector {
        KnotVector::new(k.to_vec(), p).unwrap()
    }

    fn quarter_arc(r: f64) -> (KnotVector, WeightVector, Vec<Vec<f64>>) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        (
            kv(&[0., 0., 0., 1., 1., 1.], 2),
            WeightVector::new(vec![1.0, h, 1.0]).unwrap(),
            vec![vec![r, 0.0], vec![r, r], vec![0.0, r]],
        )
    }

    #[test]
    fn hat_functions() {
        let b = eval_bspline(&kv(&[0., 0., 1., 1.], 1), 0.5).unwrap();
        assert_eq!(b.values, vec![0.5, 0.5]);
    }

    #[test]
    fn open_endpoints_interpolate() {
        let k = kv(&[0., 0., 0., 1., 1., 1.], 2);
        assert_eq!(eval_bspline(&k, 0.0).unwrap().values, vec![1.0, 0.0, 0.0]);
        assert_eq!(eval_bspline(&k, 1.0).unwrap().values, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn double_knot_example() {
        let b = eval_bspline(&kv(&[0., 0., 0., 0.5, 0.5, 1., 1., 1.], 2), 0.25).unwrap();
        // On [0, 0.5] the functions are Bernstein polynomials in t = 2s.
        let expect = [0.25, 0.5, 0.25, 0.0, 0.0];
        for (a, e) in b.values.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn rational_quadratic_example() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k = kv(&[0., 0., 0., 1., 1., 1.], 2);
        let b = eval_nurbs(&k, &WeightVector::new(vec![1.0, h, 1.0]).unwrap(), 0.5).unwrap();
        let raw = [0.25, 0.5 * h, 0.25];
        let sum: f64 = raw.iter().sum();
        for (a, r) in b.values.iter().zip(raw) {
            assert!((a - r / sum).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_domain_and_bad_weights() {
        let k = kv(&[0., 0., 1., 1.], 1);
        assert!(matches!(eval_bspline(&k, 1.5), Err(Error::Domain(_))));
        let w = WeightVector::new(vec![1.0; 3]).unwrap();
        assert!(matches!(eval_nurbs(&k, &w, 0.5), Err(Error::WeightMismatch { .. })));
        assert!(KnotVector::new(vec![0., 0.5, 1., 1.], 1).is_err());
        assert!(KnotVector::new(vec![0., 0., 0.7, 0.3, 1., 1.], 1).is_err());
    }

    #[test]
    fn greville_examples() {
        assert_eq!(greville_abscissae(&kv(&[0., 0., 0., 1., 1., 1.], 2)), vec![0.0, 0.5, 1.0]);
        assert_eq!(
            greville_abscissae(&kv(&[0., 0., 0., 0.5, 0.5, 1., 1., 1.], 2)),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(greville_abscissae(&kv(&[0., 0., 1., 1.], 1)), vec![0.0, 1.0]);
    }

    #[test]
    fn demko_examples() {
        assert_eq!(demko_abscissae(&kv(&[0., 0., 1., 1.], 1), 1e-12).unwrap(), vec![0.0, 1.0]);
        let k = kv(&[0., 0., 0., 1., 1., 1.], 2);
        let d = demko_abscissae(&k, 1e-12).unwrap();
        assert!((d[1] - 0.5).abs() < 1e-12);
        // Dense sampling: the interpolant of (1,-1,1) never exceeds 1 in modulus.
        let a = collocation_matrix(&k, &d);
        let c = a.lu().solve(&nalgebra::DVector::from_vec(vec![1.0, -1.0, 1.0])).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!(spline_value(&k, c.as_slice(), x, 0).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn demko_points_are_extrema_and_in_support() {
        let k = k_refine(&kv(&[0., 0., 0., 0.5, 0.5, 1., 1., 1.], 2), 3).unwrap();
        let d = demko_abscissae(&k, 1e-12).unwrap();
        let n = k.num_basis();
        assert_eq!(d.len(), n);
        let rhs = nalgebra::DVector::from_fn(n, |i, _| if (n - 1 - i) % 2 == 0 { 1.0 } else { -1.0 });
        let c = collocation_matrix(&k, &d).lu().solve(&rhs).unwrap();
        for i in 0..=4000 {
            let x = i as f64 / 4000.0;
            assert!(spline_value(&k, c.as_slice(), x, 0).abs() <= 1.0 + 1e-9);
        }
        for (i, &t) in d.iter().enumerate() {
            assert!(k.knots()[i] <= t && t <= k.knots()[i + k.degree() + 1]);
        }
    }

    #[test]
    fn insert_into_segment() {
        let k = kv(&[0., 0., 1., 1.], 1);
        let ctrl = vec![vec![0.0, 0.0], vec![2.0, 4.0]];
        let (k2, w2, c2) = insert_knot(&k, &WeightVector::ones(2), &ctrl, 0.5).unwrap();
        assert_eq!(k2.knots(), &[0., 0., 0.5, 1., 1.]);
        assert_eq!(w2.as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(c2[1], vec![1.0, 2.0]);
    }

    #[test]
    fn insertion_preserves_arc() {
        let (k, w, c) = quarter_arc(1.0);
        let (k2, w2, c2) = insert_knot(&k, &w, &c, 0.25).unwrap();
        let (k3, w3, c3) = insert_knot(&k2, &w2, &c2, 0.25).unwrap();
        assert!(insert_knot(&k3, &w3, &c3, 0.25).is_err());
        for i in 0..20 {
            let s = i as f64 / 19.0;
            let a = curve_point(&k, &w, &c, s).unwrap();
            for (kk, ww, cc) in [(&k2, &w2, &c2), (&k3, &w3, &c3)] {
                let b = curve_point(kk, ww, cc, s).unwrap();
                assert!((b[0].hypot(b[1]) - 1.0).abs() < 1e-13);
                assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn elevation_preserves_arc_and_line() {
        let (k, w, c) = quarter_arc(2.0);
        let (k2, w2, c2) = elevate_degree(&k, &w, &c, 2).unwrap();
        assert_eq!(k2.degree(), 4);
        assert_eq!(k2.num_basis(), 5);
        for i in 0..20 {
            let s = i as f64 / 19.0;
            let b = curve_point(&k2, &w2, &c2, s).unwrap();
            assert!((b[0].hypot(b[1]) - 2.0).abs() < 1e-12);
        }
        let line = kv(&[0., 0., 1., 1.], 1);
        let (k3, _, c3) = elevate_degree(&line, &WeightVector::ones(2), &[vec![0.0], vec![3.0]], 1).unwrap();
        assert_eq!(k3.degree(), 2);
        assert!((c3[1][0] - 1.5).abs() < 1e-14);
        let (k0, _, c0) = elevate_degree(&k, &w, &c, 0).unwrap();
        assert_eq!(k0, k);
        assert_eq!(c0, c);
    }

    #[test]
    fn elevation_of_multi_span_curve() {
        let k = kv(&[0., 0., 0., 0.3, 0.6, 0.6, 1., 1., 1.], 2);
        let w = WeightVector::new(vec![1.0, 0.7, 1.3, 0.9, 1.1, 1.0]).unwrap();
        let c: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64 * 0.1]).collect();
        let (k2, w2, c2) = elevate_degree(&k, &w, &c, 3).unwrap();
        assert_eq!(k2.multiplicity(0.3), 4);
        assert_eq!(k2.multiplicity(0.6), 5);
        for i in 0..50 {
            let s = i as f64 / 49.0;
            let a = curve_point(&k, &w, &c, s).unwrap();
            let b = curve_point(&k2, &w2, &c2, s).unwrap();
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn k_refine_examples() {
        let a = k_refine(&kv(&[0., 0., 0., 0.5, 0.5, 1., 1., 1.], 2), 1).unwrap();
        assert_eq!(a.degree(), 3);
        assert_eq!(a.knots(), &[0., 0., 0., 0., 0.25, 0.5, 0.5, 0.5, 0.75, 1., 1., 1., 1.]);
        let b = k_refine(&kv(&[0., 0., 0., 1., 1., 1.], 2), 2).unwrap();
        assert_eq!(b.degree(), 4);
        assert_eq!(b.distinct().len(), 4);
        assert!((b.knots()[5] - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.knots()[6] - 2.0 / 3.0).abs() < 1e-15);
        let c = kv(&[0., 0., 1., 1.], 1);
        assert_eq!(k_refine(&c, 0).unwrap(), c);
    }

    #[test]
    fn refine_to_k_refined_vector() {
        let (k, w, c) = quarter_arc(1.0);
        for m in 1..=4 {
            let t = k_refine(&k, m).unwrap();
            let (w2, c2) = refine_to(&k, &w, &c, &t).unwrap();
            for i in 0..20 {
                let s = i as f64 / 19.0;
                let b = curve_point(&t, &w2, &c2, s).unwrap();
                assert!((b[0].hypot(b[1]) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = kv(&[0., 0., 0., 0., 0.3, 0.55, 0.55, 1., 1., 1., 1.], 3);
        let w = WeightVector::new(vec![1.0, 0.8, 1.2, 0.6, 1.0, 0.9, 1.0]).unwrap();
        let h = 1e-6;
        for &s in &[0.1, 0.42, 0.7, 0.93] {
            let b = eval_nurbs(&k, &w, s).unwrap();
            let bp = eval_nurbs(&k, &w, s + h).unwrap();
            let bm = eval_nurbs(&k, &w, s - h).unwrap();
            for i in 0..7 {
                let fd1 = (bp.values[i] - bm.values[i]) / (2.0 * h);
                let fd2 = (bp.d1[i] - bm.d1[i]) / (2.0 * h);
                assert!((fd1 - b.d1[i]).abs() < 1e-6 * b.d1[i].abs().max(1.0));
                assert!((fd2 - b.d2[i]).abs() < 1e-6 * b.d2[i].abs().max(1.0));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_knots() -> impl Strategy<Value = KnotVector> {
            (1usize..6, proptest::collection::vec(0.02f64..0.98, 0..6)).prop_map(|(p, mut inner)| {
                inner.sort_by(f64::total_cmp);
                let mut knots = vec![0.0; p + 1];
                for x in inner {
                    let count = knots.iter().filter(|&&k| (k - x).abs() <= KNOT_TOL).count();
                    if count < p {
                        knots.push(x);
                    }
                }
                knots.extend(vec![1.0; p + 1]);
                KnotVector::new(knots, p).unwrap()
            })
        }

        proptest! {
            #[test]
            fn partition_of_unity(k in arb_knots(), s in 0.0f64..=1.0, seed in 0.2f64..5.0) {
                let b = eval_bspline(&k, s).unwrap();
                prop_assert!((b.values.iter().sum::<f64>() - 1.0).abs() < 1e-13);
                prop_assert!(b.values.iter().filter(|v| **v != 0.0).count() <= k.degree() + 1);
                prop_assert!(b.d1.iter().sum::<f64>().abs() < 1e-9);
                let w: Vec<f64> = (0..k.num_basis()).map(|i| 0.5 + ((i as f64 * seed).sin()).abs()).collect();
                let r = eval_nurbs(&k, &WeightVector::new(w).unwrap(), s).unwrap();
                prop_assert!((r.values.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            }

            #[test]
            fn abscissae_counts(k in arb_knots()) {
                let g = greville_abscissae(&k);
                prop_assert_eq!(g.len(), k.num_basis());
                prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(g[0] == 0.0 && *g.last().unwrap() == 1.0);
            }

            #[test]
            fn k_refine_counts(k in arb_knots(), m in 0usize..5) {
                let r = k_refine(&k, m).unwrap();
                let interior = k.distinct().len() - 2;
                prop_assert_eq!(r.distinct().len(), k.distinct().len() + (interior + 1) * m);
                prop_assert_eq!(r.degree(), k.degree() + m);
            }

            #[test]
            fn insertion_is_exact(k in arb_knots(), s in 0.01f64..0.99) {
                prop_assume!(k.multiplicity(s) < k.degree());
                let n = k.num_basis();
                let ctrl: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64).cos(), i as f64]).collect();
                let w = WeightVector::new((0..n).map(|i| 1.0 + 0.3 * (i as f64).sin()).collect()).unwrap();
                let (k2, w2, c2) = insert_knot(&k, &w, &ctrl, s).unwrap();
                prop_assert_eq!(k2.num_basis(), n + 1);
                for i in 0..20 {
                    let t = i as f64 / 19.0;
                    let a = curve_point(&k, &w, &ctrl, t).unwrap();
                    let b = curve_point(&k2, &w2, &c2, t).unwrap();
                    prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
                }
            }
        }
    }
}
