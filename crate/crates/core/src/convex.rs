//! Hypodifferential calculus for convex functions.
//!
//! A [`ConvexFn`] is a tree of smooth convex atoms combined by nonnegative
//! linear combinations and pointwise maxima. Its hypodifferential at `x` is a
//! polytope whose vertices `(a, v)` satisfy `max a = 0`:
//!
//! * smooth atom: `{(0, grad f(x))}`
//! * `sum l_m f_m`: Minkowski sum of `l_m * hypo f_m(x)`
//! * `max_m f_m`: union of `(f_m(x) - u(x), 0) + hypo f_m(x)`
//!
//! The checkers at the bottom sample the amenability and Lipschitzian
//! approximation inequalities on caller-provided point pairs.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::minnorm::{AugVector, VertexSet};
use crate::pa::DcForm;

/// A differentiable convex function with an analytic gradient.
pub trait SmoothConvex: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;
}

/// `0.5 x'Qx + <b, x> + c` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    q: DMatrix<f64>,
    b: Vec<f64>,
    c: f64,
    lipschitz: f64,
}

impl Quadratic {
    pub fn new(q: DMatrix<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        let d = b.len();
        if q.nrows() != d || q.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: q.nrows() });
        }
        if q.iter().chain(&b).any(|x| !x.is_finite()) || !c.is_finite() {
            return Err(Error::NonFinite);
        }
        let sym = (&q + q.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if lmin < -1e-12 * (1.0 + eig.eigenvalues.amax()) {
            return Err(Error::InvalidParameter("quadratic form is not positive semidefinite".into()));
        }
        let lipschitz = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        Ok(Self { q: sym, b, c, lipschitz })
    }

    /// `0.5 (x - center)' Q (x - center) + offset`.
    pub fn centered(q: DMatrix<f64>, center: &[f64], offset: f64) -> Result<Self> {
        let qc = &q * nalgebra::DVector::from_column_slice(center);
        let b: Vec<f64> = qc.iter().map(|x| -x).collect();
        let c = 0.5 * crate::dot(center, qc.as_slice()) + offset;
        Self::new(q, b, c)
    }
}

impl SmoothConvex for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let g = self.q_times(x);
        0.5 * crate::dot(x, &g) + crate::dot(&self.b, x) + self.c
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.q_times(x).iter().zip(&self.b).map(|(g, b)| g + b).collect()
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

impl Quadratic {
    fn q_times(&self, x: &[f64]) -> Vec<f64> {
        let d = self.b.len();
        (0..d).map(|r| (0..d).map(|c| self.q[(r, c)] * x[c]).sum()).collect()
    }
}

/// `c + <g, x>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub c: f64,
    pub g: Vec<f64>,
}

impl SmoothConvex for Affine {
    fn dim(&self) -> usize {
        self.g.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.c + crate::dot(&self.g, x)
    }

    fn gradient(&self, _x: &[f64]) -> Vec<f64> {
        self.g.clone()
    }

    fn lipschitz(&self) -> f64 {
        0.0
    }
}

/// Convex function assembled from smooth atoms, sums and maxima.
#[derive(Debug, Clone)]
pub enum ConvexFn {
    Smooth(Arc<dyn SmoothConvex>),
    /// Nonnegative weights and children.
    Sum(Vec<(f64, ConvexFn)>),
    Max(Vec<ConvexFn>),
}

impl ConvexFn {
    pub fn smooth(f: impl SmoothConvex + 'static) -> Self {
        ConvexFn::Smooth(Arc::new(f))
    }

    pub fn sum(children: Vec<(f64, ConvexFn)>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::EmptySet);
        }
        if children.iter().any(|(l, _)| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter("sum weights must be finite and nonnegative".into()));
        }
        let d = children[0].1.dim();
        for (_, c) in &children {
            check_dim(d, c.dim())?;
        }
        Ok(ConvexFn::Sum(children))
    }

    pub fn max(children: Vec<ConvexFn>) -> Result<Self> {
        let d = children.first().ok_or(Error::EmptySet)?.dim();
        for c in &children {
            check_dim(d, c.dim())?;
        }
        Ok(ConvexFn::Max(children))
    }

    /// `max_i (a_i + <v_i, x>)` as a maximum of affine atoms.
    pub fn max_affine(pieces: &[AugVector]) -> Result<Self> {
        let children = pieces
            .iter()
            .map(|q| ConvexFn::smooth(Affine { c: q.a, g: q.v.clone() }))
            .collect();
        Self::max(children)
    }

    /// `max_i (a_i + b + <v_i + w, x>)` for a form with one minus piece `(b, w)`.
    pub fn from_convex_dc(f: &DcForm) -> Result<Self> {
        let [w] = f.minus() else {
            return Err(Error::InvalidParameter(format!(
                "form has {} minus pieces; a convex form has exactly one",
                f.minus().len()
            )));
        };
        let pieces: Vec<AugVector> = f.plus().iter().map(|q| q.add(w)).collect();
        Self::max_affine(&pieces)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFn::Smooth(f) => f.dim(),
            ConvexFn::Sum(cs) => cs[0].1.dim(),
            ConvexFn::Max(cs) => cs[0].dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ConvexFn::Smooth(f) => f.value(x),
            ConvexFn::Sum(cs) => cs.iter().map(|(l, c)| l * c.eval(x)).sum(),
            ConvexFn::Max(cs) => cs.iter().map(|c| c.eval(x)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn hypodiff(&self, x: &[f64]) -> Result<VertexSet> {
        check_dim(self.dim(), x.len())?;
        match self {
            ConvexFn::Smooth(f) => hypo_smooth(f.as_ref(), x),
            ConvexFn::Sum(cs) => hypo_sum(cs, x),
            ConvexFn::Max(cs) => hypo_max(cs, x),
        }
    }

    /// Lipschitz constant of the hypodifferential approximation implied by
    /// the tree: sums add weighted constants, maxima take the largest.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            ConvexFn::Smooth(f) => f.lipschitz(),
            ConvexFn::Sum(cs) => cs.iter().map(|(l, c)| l.abs() * c.lipschitz_bound()).sum(),
            ConvexFn::Max(cs) => cs.iter().map(ConvexFn::lipschitz_bound).fold(0.0, f64::max),
        }
    }

    /// `max_{hypo(x)} (a + <v, y - x>)`.
    pub fn model(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let dx: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        Ok(self.hypodiff(x)?.support_max(&dx))
    }
}

pub fn hypo_smooth(f: &dyn SmoothConvex, x: &[f64]) -> Result<VertexSet> {
    check_dim(f.dim(), x.len())?;
    let g = f.gradient(x);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(VertexSet::singleton(AugVector::new(0.0, g)))
}

pub fn hypo_sum(children: &[(f64, ConvexFn)], x: &[f64]) -> Result<VertexSet> {
    let (first, rest) = children.split_first().ok_or(Error::EmptySet)?;
    let mut acc = first.1.hypodiff(x)?.scaled(first.0);
    for (l, c) in rest {
        acc = acc.minkowski_sum(&c.hypodiff(x)?.scaled(*l))?;
    }
    Ok(acc)
}

pub fn hypo_max(children: &[ConvexFn], x: &[f64]) -> Result<VertexSet> {
    if children.is_empty() {
        return Err(Error::EmptySet);
    }
    let values: Vec<f64> = children.iter().map(|c| c.eval(x)).collect();
    let u = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut vertices = Vec::new();
    for (c, fx) in children.iter().zip(&values) {
        let shift = fx - u;
        for q in c.hypodiff(x)?.into_vertices() {
            vertices.push(AugVector::new(q.a + shift, q.v));
        }
    }
    Ok(VertexSet::new(vertices)?.dedup())
}

/// Axis-aligned box used as the sampling region of the checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn cube(d: usize, half_width: f64) -> Self {
        Self { lo: vec![-half_width; d], hi: vec![half_width; d] }
    }

    pub fn sample(&self, rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| self.lo.iter().zip(&self.hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect())
            .collect()
    }

    /// `n` random pairs, the default workload of the checkers being 1000.
    pub fn sample_pairs(&self, rng: &mut impl Rng, n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let xs = self.sample(rng, n);
        let ys = self.sample(rng, n);
        xs.into_iter().zip(ys).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmenabilityReport {
    pub pairs: usize,
    /// `max (a + <v, y - x>) - (f(y) - f(x))` over pairs and vertices.
    pub worst_violation: f64,
    pub holds: bool,
}

/// Checks `f(y) - f(x) >= a + <v, y - x>` for every vertex of `hypo f(x)`
/// on all pairs `(x, y)` drawn from the two sample lists.
pub fn check_amenable(f: &ConvexFn, xs: &[Vec<f64>], ys: &[Vec<f64>], tol: f64) -> Result<AmenabilityReport> {
    check_amenable_with(f, |x| f.hypodiff(x), xs, ys, tol)
}

/// As [`check_amenable`], with a caller-supplied hypodifferential oracle.
pub fn check_amenable_with(
    f: &ConvexFn,
    hypodiff: impl Fn(&[f64]) -> Result<VertexSet>,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    tol: f64,
) -> Result<AmenabilityReport> {
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for x in xs {
        let hd = hypodiff(x)?;
        let fx = f.eval(x);
        for y in ys {
            let dx: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
            worst = worst.max(hd.support_max(&dx) - (f.eval(y) - fx));
            pairs += 1;
        }
    }
    Ok(AmenabilityReport { pairs, worst_violation: worst, holds: worst <= tol })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub pairs: usize,
    /// Largest `|remainder| - (L/2)|y - x|^2`.
    pub worst_excess: f64,
    /// Largest `|remainder| / ((L/2)|y - x|^2)` over pairs with `y != x`.
    pub worst_ratio: f64,
    pub holds: bool,
}

/// Checks `|f(y) - f(x) - max_{hypo f(x)} (a + <v, y - x>)| <= (L/2)|y - x|^2`.
pub fn check_lipschitz_approx(
    f: &ConvexFn,
    lipschitz: f64,
    pairs: &[(Vec<f64>, Vec<f64>)],
    tol: f64,
) -> Result<LipschitzReport> {
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidParameter("Lipschitz constant must be positive".into()));
    }
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_ratio: f64 = 0.0;
    for (x, y) in pairs {
        let remainder = f.eval(y) - f.eval(x) - f.model(x, y)?;
        let dist2: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        let bound = 0.5 * lipschitz * dist2;
        worst_excess = worst_excess.max(remainder.abs() - bound);
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(remainder.abs() / bound);
        }
    }
    Ok(LipschitzReport { pairs: pairs.len(), worst_excess, worst_ratio, holds: worst_excess <= tol })
}

/// Largest relative deviation between the analytic gradient and central
/// differences with step `h`.
pub fn gradient_fd_error(f: &dyn SmoothConvex, x: &[f64], h: f64) -> f64 {
    let g = f.gradient(x);
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + h;
        let up = f.value(&xp);
        xp[k] = x[k] - h;
        let down = f.value(&xp);
        xp[k] = x[k];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - g[k]).abs() / (1.0 + g[k].abs()));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn convex_form_folds_minus_piece() {
        let plus = vec![AugVector::new(1.0, vec![2.0]), AugVector::new(0.0, vec![-1.0])];
        let f = DcForm::new(1, plus.clone(), vec![AugVector::new(-0.5, vec![0.25])]).unwrap();
        let g = ConvexFn::from_convex_dc(&f).unwrap();
        for x in [-3.0, -0.2, 0.0, 1.7] {
            assert!((g.eval(&[x]) - f.eval(&[x]).unwrap()).abs() < 1e-15);
        }
        let two = DcForm::new(1, plus, vec![AugVector::zeros(1), AugVector::zeros(1)]).unwrap();
        assert!(ConvexFn::from_convex_dc(&two).is_err());
    }

    fn half_norm_sq(d: usize) -> Quadratic {
        Quadratic::new(DMatrix::identity(d, d), vec![0.0; d], 0.0).unwrap()
    }

    fn square_1d() -> ConvexFn {
        ConvexFn::smooth(Quadratic::new(DMatrix::from_element(1, 1, 2.0), vec![0.0], 0.0).unwrap())
    }

    fn line(g: f64) -> ConvexFn {
        ConvexFn::smooth(Affine { c: 0.0, g: vec![g] })
    }

    #[test]
    fn smooth_atoms() {
        let hd = hypo_smooth(&half_norm_sq(2), &[1.0, 2.0]).unwrap();
        assert_eq!(hd.vertices(), &[AugVector::new(0.0, vec![1.0, 2.0])]);
        let lin = Affine { c: 3.0, g: vec![0.5, -1.0] };
        assert_eq!(hypo_smooth(&lin, &[7.0, 7.0]).unwrap().vertices(), &[AugVector::new(0.0, vec![0.5, -1.0])]);
        assert_eq!(square_1d().hypodiff(&[3.0]).unwrap().vertices(), &[AugVector::new(0.0, vec![6.0])]);
    }

    #[test]
    fn sum_rules() {
        let f = square_1d();
        let x = [1.5];
        let one = hypo_sum(&[(1.0, f.clone())], &x).unwrap();
        assert_eq!(one, f.hypodiff(&x).unwrap());
        let two = hypo_sum(&[(1.0, f.clone()), (1.0, line(2.0))], &x).unwrap();
        assert_eq!(two.vertices(), &[AugVector::new(0.0, vec![5.0])]);
        let weighted = hypo_sum(&[(2.0, f.clone()), (0.0, line(2.0))], &x).unwrap();
        assert_eq!(weighted.vertices(), &[AugVector::new(0.0, vec![6.0])]);
    }

    #[test]
    fn max_rules() {
        let hd = hypo_max(&[line(1.0), line(-1.0)], &[1.0]).unwrap();
        assert_eq!(hd.vertices(), &[AugVector::new(0.0, vec![1.0]), AugVector::new(-2.0, vec![-1.0])]);
        let f = square_1d();
        assert_eq!(hypo_max(std::slice::from_ref(&f), &[0.3]).unwrap(), f.hypodiff(&[0.3]).unwrap());
        let zero = ConvexFn::smooth(Affine { c: 0.0, g: vec![0.0] });
        let hd = hypo_max(&[f, zero], &[0.0]).unwrap();
        assert_eq!(hd.vertices(), &[AugVector::new(0.0, vec![0.0])]);
    }

    #[test]
    fn max_of_affine_expansion_is_exact() {
        let u = ConvexFn::max(vec![line(1.0), line(-1.0), ConvexFn::smooth(Affine { c: 0.5, g: vec![0.2] })]).unwrap();
        for k in -20..20 {
            let x = k as f64 * 0.21;
            let hd = u.hypodiff(&[x]).unwrap();
            assert!(hd.max_a().abs() < 1e-15);
            for m in -20..20 {
                let dx = m as f64 * 0.17;
                let exact = u.eval(&[x + dx]) - u.eval(&[x]);
                assert!((hd.support_max(&[dx]) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn amenability_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let region = BoxRegion::cube(1, 2.0);
        let xs = region.sample(&mut rng, 50);
        let ys = region.sample(&mut rng, 50);
        let sq = square_1d();
        assert!(check_amenable(&sq, &xs, &ys, 1e-12).unwrap().holds);
        let abs = ConvexFn::max(vec![line(1.0), line(-1.0)]).unwrap();
        assert!(check_amenable(&abs, &xs, &ys, 1e-12).unwrap().holds);

        let corrupted = |x: &[f64]| -> Result<VertexSet> {
            let hd = sq.hypodiff(x)?;
            Ok(hd.translated(&AugVector::new(1.0, vec![0.0])))
        };
        let report = check_amenable_with(&sq, corrupted, &xs, &xs, 1e-12).unwrap();
        assert!(!report.holds);
        assert!((report.worst_violation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs = BoxRegion::cube(1, 2.0).sample_pairs(&mut rng, 200);
        let sq = square_1d();
        let report = check_lipschitz_approx(&sq, 2.0, &pairs, 1e-12).unwrap();
        assert!(report.holds);
        // Remainder of x^2 is exactly |y - x|^2, the bound itself.
        assert!((report.worst_ratio - 1.0).abs() < 1e-9);
        assert!(!check_lipschitz_approx(&sq, 1.0, &pairs, 1e-12).unwrap().holds);
        assert!(check_lipschitz_approx(&sq, 0.0, &pairs, 1e-12).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let q = Quadratic::centered(a.transpose() * &a, &[0.5, -1.0, 2.0], 0.3).unwrap();
        for x in BoxRegion::cube(3, 2.0).sample(&mut rng, 10) {
            assert!(gradient_fd_error(&q, &x, 1e-6) < 1e-4);
        }
        assert!((q.value(&[0.5, -1.0, 2.0]) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_weights_and_indefinite_forms() {
        assert!(ConvexFn::sum(vec![(-1.0, square_1d())]).is_err());
        assert!(Quadratic::new(DMatrix::from_element(1, 1, -1.0), vec![0.0], 0.0).is_err());
    }
}
