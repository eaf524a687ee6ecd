//! Piecewise-affine functions and their global codifferentials.
//!
//! A [`DcForm`] stores `f(x) = max_i (a_i + <v_i, x>) + min_j (b_j + <w_j, x>)`.
//! Its global codifferential at `x` is exact for every displacement:
//!
//! ```text
//! f(x + dx) - f(x) = max_{hypo(x)} (a + <v, dx>) + min_{hyper(x)} (b + <w, dx>)
//! ```
//!
//! The calculus functions (`codiff_*`) build DC forms of sums, scalings,
//! maxima and minima, and [`expr_to_dc`] applies them to an expression tree.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::minnorm::{merge_duplicates, AugVector, VertexSet};

/// Default cap on the number of affine pieces in either part of a DC form.
pub const DEFAULT_PIECE_CAP: usize = 1_000_000;

/// A piecewise-affine function as a max part plus a min part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DcFormRepr", into = "DcFormRepr")]
pub struct DcForm {
    d: usize,
    plus: Vec<AugVector>,
    minus: Vec<AugVector>,
}

impl DcForm {
    pub fn new(d: usize, plus: Vec<AugVector>, minus: Vec<AugVector>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if plus.is_empty() || minus.is_empty() {
            return Err(Error::EmptySet);
        }
        for q in plus.iter().chain(&minus) {
            check_dim(d, q.dim())?;
            if !q.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { d, plus, minus })
    }

    /// The constant function `c`.
    pub fn constant(d: usize, c: f64) -> Self {
        Self { d, plus: vec![AugVector::new(c, vec![0.0; d])], minus: vec![AugVector::zeros(d)] }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// The max part `(a_i, v_i)`.
    pub fn plus(&self) -> &[AugVector] {
        &self.plus
    }

    /// The min part `(b_j, w_j)`.
    pub fn minus(&self) -> &[AugVector] {
        &self.minus
    }

    /// `max_i (a_i + <v_i, x>)`, without a dimension check.
    pub fn max_part(&self, x: &[f64]) -> f64 {
        self.plus.iter().map(|q| q.affine_at(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min_j (b_j + <w_j, x>)`, without a dimension check.
    pub fn min_part(&self, x: &[f64]) -> f64 {
        self.minus.iter().map(|q| q.affine_at(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.d, x.len())?;
        Ok(self.value(x))
    }

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        self.max_part(x) + self.min_part(x)
    }

    /// True when the min part is a single piece, i.e. the function is convex
    /// by construction.
    pub fn is_convex_form(&self) -> bool {
        self.minus.len() == 1
    }
}

#[derive(Serialize, Deserialize)]
struct PlusPiece {
    a: f64,
    v: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MinusPiece {
    b: f64,
    w: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DcFormRepr {
    d: usize,
    plus: Vec<PlusPiece>,
    minus: Vec<MinusPiece>,
}

impl TryFrom<DcFormRepr> for DcForm {
    type Error = Error;

    fn try_from(r: DcFormRepr) -> Result<Self> {
        DcForm::new(
            r.d,
            r.plus.into_iter().map(|p| AugVector::new(p.a, p.v)).collect(),
            r.minus.into_iter().map(|p| AugVector::new(p.b, p.w)).collect(),
        )
    }
}

impl From<DcForm> for DcFormRepr {
    fn from(f: DcForm) -> Self {
        DcFormRepr {
            d: f.d,
            plus: f.plus.into_iter().map(|q| PlusPiece { a: q.a, v: q.v }).collect(),
            minus: f.minus.into_iter().map(|q| MinusPiece { b: q.a, w: q.v }).collect(),
        }
    }
}

/// Global codifferential `[hypo, hyper]` of a [`DcForm`] at a base point.
///
/// Vertex `i` of `hypo` corresponds to plus piece `i`, vertex `j` of `hyper`
/// to minus piece `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalCodiff {
    pub at: Vec<f64>,
    pub hypo: VertexSet,
    pub hyper: VertexSet,
}

impl GlobalCodiff {
    /// `max_hypo (a + <v, dx>) + min_hyper (b + <w, dx>)`.
    pub fn expansion(&self, dx: &[f64]) -> f64 {
        self.hypo.support_max(dx) + self.hyper.support_min(dx)
    }
}

fn shifted_pieces(pieces: &[AugVector], x: &[f64], level: f64) -> VertexSet {
    let vertices = pieces
        .iter()
        .map(|q| AugVector::new(q.a - level + crate::dot(&q.v, x), q.v.clone()))
        .collect();
    VertexSet::new(vertices).expect("DcForm parts are nonempty")
}

/// Global codifferential of `f` at `x`.
pub fn global_codiff(f: &DcForm, x: &[f64]) -> Result<GlobalCodiff> {
    check_dim(f.d, x.len())?;
    Ok(GlobalCodiff {
        at: x.to_vec(),
        hypo: shifted_pieces(&f.plus, x, f.max_part(x)),
        hyper: shifted_pieces(&f.minus, x, f.min_part(x)),
    })
}

/// Moves a global codifferential computed at `gc.at` to the point `y`,
/// without rebuilding it from the pieces.
pub fn translate(f: &DcForm, gc: &GlobalCodiff, y: &[f64]) -> Result<GlobalCodiff> {
    check_dim(f.d, y.len())?;
    check_dim(f.d, gc.at.len())?;
    check_dim(gc.hypo.len(), f.plus.len())?;
    check_dim(gc.hyper.len(), f.minus.len())?;
    let x = &gc.at;
    let step: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let move_set = |set: &VertexSet, shift: f64| {
        let vertices = set
            .vertices()
            .iter()
            .map(|q| AugVector::new(q.a + shift + crate::dot(&q.v, &step), q.v.clone()))
            .collect();
        VertexSet::new(vertices).expect("nonempty")
    };
    Ok(GlobalCodiff {
        at: y.to_vec(),
        hypo: move_set(&gc.hypo, f.max_part(x) - f.max_part(y)),
        hyper: move_set(&gc.hyper, f.min_part(x) - f.min_part(y)),
    })
}

/// Which half of the codifferential carries an affine function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Hypo,
    Hyper,
}

/// DC form of `a + <v, x>`.
///
/// The hypo flavour keeps the function in the max part; the hyper flavour
/// moves the gradient to the min part and keeps the constant in the max part.
pub fn codiff_affine(a: f64, v: Vec<f64>, flavor: Flavor) -> DcForm {
    let d = v.len();
    match flavor {
        Flavor::Hypo => DcForm { d, plus: vec![AugVector::new(a, v)], minus: vec![AugVector::zeros(d)] },
        Flavor::Hyper => DcForm {
            d,
            plus: vec![AugVector::new(a, vec![0.0; d])],
            minus: vec![AugVector::new(0.0, v)],
        },
    }
}

/// DC form of `lambda * f`. A negative factor swaps the two parts.
pub fn codiff_scale(lambda: f64, f: &DcForm) -> DcForm {
    let scale = |pieces: &[AugVector]| merge_duplicates(pieces.iter().map(|q| q.scale(lambda)).collect());
    if lambda >= 0.0 {
        DcForm { d: f.d, plus: scale(&f.plus), minus: scale(&f.minus) }
    } else {
        DcForm { d: f.d, plus: scale(&f.minus), minus: scale(&f.plus) }
    }
}

fn common_dim(fs: &[DcForm]) -> Result<usize> {
    let d = fs.first().ok_or(Error::EmptySet)?.d;
    for f in fs {
        check_dim(d, f.d)?;
    }
    Ok(d)
}

fn checked_product(counts: impl Iterator<Item = usize>, cap: usize) -> Result<usize> {
    let mut total: usize = 1;
    for c in counts {
        total = total.checked_mul(c).filter(|t| *t <= cap).ok_or(Error::SizeOverflow {
            pieces: total.saturating_mul(c),
            cap,
        })?;
    }
    Ok(total)
}

/// All sums `p_1 + ... + p_k` with `p_m` drawn from `lists[m]`, first list
/// outermost.
fn minkowski(lists: &[&[AugVector]], d: usize, cap: usize) -> Result<Vec<AugVector>> {
    checked_product(lists.iter().map(|l| l.len()), cap)?;
    let mut acc = vec![AugVector::zeros(d)];
    for list in lists {
        let mut next = Vec::with_capacity(acc.len() * list.len());
        for p in &acc {
            for q in list.iter() {
                next.push(p.add(q));
            }
        }
        acc = merge_duplicates(next);
    }
    Ok(acc)
}

/// DC form of `f_1 + ... + f_p` (Minkowski sums of both parts).
pub fn codiff_sum(fs: &[DcForm], cap: usize) -> Result<DcForm> {
    let d = common_dim(fs)?;
    let plus: Vec<&[AugVector]> = fs.iter().map(|f| f.plus.as_slice()).collect();
    let minus: Vec<&[AugVector]> = fs.iter().map(|f| f.minus.as_slice()).collect();
    Ok(DcForm { d, plus: minkowski(&plus, d, cap)?, minus: minkowski(&minus, d, cap)? })
}

/// For each `m`: `own[m]` pieces minus every combination of the `other`
/// parts of the remaining functions.
fn mixed_part(fs: &[DcForm], own: fn(&DcForm) -> &[AugVector], other: fn(&DcForm) -> &[AugVector], cap: usize) -> Result<Vec<AugVector>> {
    let d = fs[0].d;
    let mut total = 0usize;
    for m in 0..fs.len() {
        let count = checked_product(
            std::iter::once(own(&fs[m]).len())
                .chain(fs.iter().enumerate().filter(|(k, _)| *k != m).map(|(_, f)| other(f).len())),
            cap,
        )?;
        total = total.saturating_add(count);
        if total > cap {
            return Err(Error::SizeOverflow { pieces: total, cap });
        }
    }
    let mut out = Vec::with_capacity(total);
    for m in 0..fs.len() {
        let negated: Vec<Vec<AugVector>> = fs
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != m)
            .map(|(_, f)| other(f).iter().map(|q| q.scale(-1.0)).collect())
            .collect();
        let mut lists: Vec<&[AugVector]> = vec![own(&fs[m])];
        lists.extend(negated.iter().map(|l| l.as_slice()));
        out.extend(minkowski(&lists, d, cap)?);
    }
    Ok(merge_duplicates(out))
}

/// DC form of `max_m f_m`.
pub fn codiff_max(fs: &[DcForm], cap: usize) -> Result<DcForm> {
    let d = common_dim(fs)?;
    if fs.len() == 1 {
        return Ok(fs[0].clone());
    }
    let plus = mixed_part(fs, |f| &f.plus, |f| &f.minus, cap)?;
    let minus_lists: Vec<&[AugVector]> = fs.iter().map(|f| f.minus.as_slice()).collect();
    Ok(DcForm { d, plus, minus: minkowski(&minus_lists, d, cap)? })
}

/// DC form of `min_m f_m`.
pub fn codiff_min(fs: &[DcForm], cap: usize) -> Result<DcForm> {
    let d = common_dim(fs)?;
    if fs.len() == 1 {
        return Ok(fs[0].clone());
    }
    let plus_lists: Vec<&[AugVector]> = fs.iter().map(|f| f.plus.as_slice()).collect();
    let minus = mixed_part(fs, |f| &f.minus, |f| &f.plus, cap)?;
    Ok(DcForm { d, plus: minkowski(&plus_lists, d, cap)?, minus })
}

/// Expression tree over affine atoms.
///
/// JSON form is externally tagged, e.g.
/// `{"min": [{"affine": {"a": 0.0, "v": [1.0]}}, {"const": 2.0}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaExpr {
    Affine { a: f64, v: Vec<f64> },
    Const(f64),
    Scale { factor: f64, expr: Box<PaExpr> },
    Sum(Vec<PaExpr>),
    Max(Vec<PaExpr>),
    Min(Vec<PaExpr>),
}

impl PaExpr {
    pub fn affine(a: f64, v: Vec<f64>) -> Self {
        PaExpr::Affine { a, v }
    }

    pub fn scale(factor: f64, expr: PaExpr) -> Self {
        PaExpr::Scale { factor, expr: Box::new(expr) }
    }

    /// Dimension of the first affine leaf, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            PaExpr::Affine { v, .. } => Some(v.len()),
            PaExpr::Const(_) => None,
            PaExpr::Scale { expr, .. } => expr.dim(),
            PaExpr::Sum(cs) | PaExpr::Max(cs) | PaExpr::Min(cs) => cs.iter().find_map(|c| c.dim()),
        }
    }

    /// Direct evaluation of the tree.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            PaExpr::Affine { a, v } => a + crate::dot(v, x),
            PaExpr::Const(c) => *c,
            PaExpr::Scale { factor, expr } => factor * expr.eval(x),
            PaExpr::Sum(cs) => cs.iter().map(|c| c.eval(x)).sum(),
            PaExpr::Max(cs) => cs.iter().map(|c| c.eval(x)).fold(f64::NEG_INFINITY, f64::max),
            PaExpr::Min(cs) => cs.iter().map(|c| c.eval(x)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Compiles an expression tree into a DC form with the default piece cap.
pub fn expr_to_dc(e: &PaExpr) -> Result<DcForm> {
    expr_to_dc_with_cap(e, DEFAULT_PIECE_CAP)
}

pub fn expr_to_dc_with_cap(e: &PaExpr, cap: usize) -> Result<DcForm> {
    let d = e.dim().ok_or(Error::UnknownDimension)?;
    compile(e, d, Flavor::Hypo, cap)
}

// Affine leaves take the hypo flavour under a max and the hyper flavour under
// a min; a negative scaling flips the context.
fn compile(e: &PaExpr, d: usize, ctx: Flavor, cap: usize) -> Result<DcForm> {
    match e {
        PaExpr::Affine { a, v } => {
            check_dim(d, v.len())?;
            if !a.is_finite() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            Ok(codiff_affine(*a, v.clone(), ctx))
        }
        PaExpr::Const(c) => {
            if !c.is_finite() {
                return Err(Error::NonFinite);
            }
            Ok(DcForm::constant(d, *c))
        }
        PaExpr::Scale { factor, expr } => {
            if !factor.is_finite() {
                return Err(Error::NonFinite);
            }
            let inner_ctx = match (ctx, *factor < 0.0) {
                (c, false) => c,
                (Flavor::Hypo, true) => Flavor::Hyper,
                (Flavor::Hyper, true) => Flavor::Hypo,
            };
            Ok(codiff_scale(*factor, &compile(expr, d, inner_ctx, cap)?))
        }
        PaExpr::Sum(cs) => {
            let parts = compile_all(cs, d, ctx, cap)?;
            codiff_sum(&parts, cap)
        }
        PaExpr::Max(cs) => {
            let parts = compile_all(cs, d, Flavor::Hypo, cap)?;
            codiff_max(&parts, cap)
        }
        PaExpr::Min(cs) => {
            let parts = compile_all(cs, d, Flavor::Hyper, cap)?;
            codiff_min(&parts, cap)
        }
    }
}

fn compile_all(cs: &[PaExpr], d: usize, ctx: Flavor, cap: usize) -> Result<Vec<DcForm>> {
    if cs.is_empty() {
        return Err(Error::EmptySet);
    }
    cs.iter().map(|c| compile(c, d, ctx, cap)).collect()
}

/// `min{ max{|x1|, |x2|}, 1 + max{2|x1 - 2|, |x2 - 2|} }`, a nonconvex
/// function with a local minimum at `(2, 2)` and the global minimum at the
/// origin.
pub fn two_basin_example() -> PaExpr {
    let g1 = PaExpr::Max(vec![
        PaExpr::affine(0.0, vec![1.0, 0.0]),
        PaExpr::affine(0.0, vec![-1.0, 0.0]),
        PaExpr::affine(0.0, vec![0.0, 1.0]),
        PaExpr::affine(0.0, vec![0.0, -1.0]),
    ]);
    let g2 = PaExpr::Sum(vec![
        PaExpr::Const(1.0),
        PaExpr::Max(vec![
            PaExpr::affine(4.0, vec![-2.0, 0.0]),
            PaExpr::affine(-4.0, vec![2.0, 0.0]),
            PaExpr::affine(2.0, vec![0.0, -1.0]),
            PaExpr::affine(-2.0, vec![0.0, 1.0]),
        ]),
    ]);
    PaExpr::Min(vec![g1, g2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_1d() -> DcForm {
        DcForm::new(
            1,
            vec![AugVector::new(0.0, vec![1.0]), AugVector::new(0.0, vec![-1.0])],
            vec![AugVector::zeros(1)],
        )
        .unwrap()
    }

    #[test]
    fn eval_single_piece() {
        let f = codiff_affine(0.0, vec![1.0], Flavor::Hypo);
        assert_eq!(f.eval(&[5.0]).unwrap(), 5.0);
        assert_eq!(f.eval(&[1.0, 2.0]), Err(Error::DimensionMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn eval_example_points() {
        let f = expr_to_dc(&two_basin_example()).unwrap();
        assert!((f.eval(&[2.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(f.eval(&[0.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn affine_flavours() {
        let h = codiff_affine(0.0, vec![1.0], Flavor::Hypo);
        assert_eq!(h.plus(), &[AugVector::new(0.0, vec![1.0])]);
        assert_eq!(h.minus(), &[AugVector::new(0.0, vec![0.0])]);
        let g = codiff_affine(2.0, vec![3.0], Flavor::Hyper);
        assert_eq!(g.plus(), &[AugVector::new(2.0, vec![0.0])]);
        assert_eq!(g.minus(), &[AugVector::new(0.0, vec![3.0])]);
        assert_eq!(codiff_affine(2.0, vec![3.0], Flavor::Hypo).eval(&[1.0]).unwrap(), 5.0);
        assert_eq!(g.eval(&[1.0]).unwrap(), 5.0);
    }

    #[test]
    fn single_affine_codiff() {
        let f = codiff_affine(3.0, vec![1.0, -2.0], Flavor::Hypo);
        let gc = global_codiff(&f, &[0.7, 4.0]).unwrap();
        assert_eq!(gc.hypo.vertices(), &[AugVector::new(0.0, vec![1.0, -2.0])]);
        assert_eq!(gc.hyper.vertices(), &[AugVector::zeros(2)]);
    }

    #[test]
    fn translate_abs_value() {
        let f = abs_1d();
        let gc = global_codiff(&f, &[1.0]).unwrap();
        assert_eq!(gc.hypo.vertices(), &[AugVector::new(0.0, vec![1.0]), AugVector::new(-2.0, vec![-1.0])]);
        let moved = translate(&f, &gc, &[-1.0]).unwrap();
        assert_eq!(moved.hypo.vertices(), &[AugVector::new(-2.0, vec![1.0]), AugVector::new(0.0, vec![-1.0])]);
        assert_eq!(translate(&f, &gc, &[1.0]).unwrap(), gc);
    }

    #[test]
    fn scale_cases() {
        let f = abs_1d();
        assert_eq!(codiff_scale(1.0, &f), f);
        let neg = codiff_scale(-1.0, &f);
        let zero = codiff_scale(0.0, &f);
        for k in -50..50 {
            let x = k as f64 * 0.37;
            assert_eq!(neg.eval(&[x]).unwrap(), -x.abs());
            assert_eq!(zero.eval(&[x]).unwrap(), 0.0);
        }
    }

    #[test]
    fn sum_and_max_of_one() {
        let f = abs_1d();
        assert_eq!(codiff_sum(std::slice::from_ref(&f), DEFAULT_PIECE_CAP).unwrap(), f);
        assert_eq!(codiff_max(std::slice::from_ref(&f), DEFAULT_PIECE_CAP).unwrap(), f);
        assert_eq!(codiff_min(std::slice::from_ref(&f), DEFAULT_PIECE_CAP).unwrap(), f);
    }

    #[test]
    fn min_of_two_affine() {
        let e = PaExpr::Min(vec![PaExpr::affine(1.0, vec![1.0]), PaExpr::affine(0.0, vec![-1.0])]);
        let f = expr_to_dc(&e).unwrap();
        assert_eq!(f.eval(&[0.0]).unwrap(), 0.0);
        assert_eq!(f.eval(&[2.0]).unwrap(), -2.0);
    }

    #[test]
    fn affine_leaf_compiles_to_hypo() {
        let f = expr_to_dc(&PaExpr::affine(0.0, vec![1.0, 0.0])).unwrap();
        assert_eq!(f.plus(), &[AugVector::new(0.0, vec![1.0, 0.0])]);
        assert_eq!(f.minus(), &[AugVector::zeros(2)]);
    }

    #[test]
    fn size_overflow_is_reported() {
        let leaf = PaExpr::Max(vec![PaExpr::affine(0.0, vec![1.0]), PaExpr::affine(0.0, vec![-1.0]), PaExpr::affine(1.0, vec![0.5])]);
        let e = PaExpr::Sum(vec![leaf.clone(), PaExpr::scale(2.0, leaf.clone()), PaExpr::scale(3.0, leaf)]);
        assert!(matches!(expr_to_dc_with_cap(&e, 10), Err(Error::SizeOverflow { .. })));
        assert!(expr_to_dc_with_cap(&e, 27).is_ok());
    }

    #[test]
    fn constant_only_expression_has_no_dimension() {
        assert_eq!(expr_to_dc(&PaExpr::Const(1.0)), Err(Error::UnknownDimension));
    }

    #[test]
    fn json_schema_uses_b_and_w_for_min_part() {
        let f = abs_1d();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"d":1,"plus":[{"a":0.0,"v":[1.0]},{"a":0.0,"v":[-1.0]}],"minus":[{"b":0.0,"w":[0.0]}]}"#);
        let back: DcForm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"d":2,"plus":[{"a":0.0,"v":[1.0]}],"minus":[{"b":0.0,"w":[0.0]}]}"#;
        assert!(serde_json::from_str::<DcForm>(bad).is_err());
    }

    #[test]
    fn expr_json_is_tagged() {
        let e = PaExpr::Min(vec![PaExpr::affine(1.0, vec![1.0]), PaExpr::scale(-2.0, PaExpr::Const(3.0))]);
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"min":[{"affine":{"a":1.0,"v":[1.0]}},{"scale":{"factor":-2.0,"expr":{"const":3.0}}}]}"#);
        assert_eq!(serde_json::from_str::<PaExpr>(&s).unwrap(), e);
    }
}
