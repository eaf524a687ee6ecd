//! Minimum-norm point of a polytope given by its vertices.
//!
//! Implements Wolfe's algorithm: major cycles add the vertex minimising the
//! linear functional `<x, q>`, minor cycles move inside the current corral
//! until the affine minimiser has strictly positive barycentric weights.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default optimality tolerance of [`min_norm_point`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tolerance used by the descent methods. The stopping test
/// `<p, q> >= |p|^2 - tol` only pins `|p|` down to about `sqrt(tol)`, so
/// certificates near zero need a residual at rounding level; the solver
/// floors it at `1e-14 * max |q|^2`.
pub const TIGHT_TOL: f64 = 1e-15;

const SV_CUTOFF: f64 = 1e-12;
const WEIGHT_EPS: f64 = 1e-14;
/// Grid used to decide that two vertices coincide.
pub(crate) const MERGE_GRID: f64 = 1e-12;

/// A point `(a, v)` of `R x R^d`: an affine offset together with a gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugVector {
    pub a: f64,
    pub v: Vec<f64>,
}

impl AugVector {
    pub fn new(a: f64, v: Vec<f64>) -> Self {
        Self { a, v }
    }

    pub fn zeros(d: usize) -> Self {
        Self { a: 0.0, v: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// `a^2 + |v|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.a * self.a + crate::dot(&self.v, &self.v)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &AugVector) -> f64 {
        self.a * other.a + crate::dot(&self.v, &other.v)
    }

    pub fn add(&self, other: &AugVector) -> AugVector {
        AugVector {
            a: self.a + other.a,
            v: self.v.iter().zip(&other.v).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &AugVector) -> AugVector {
        AugVector {
            a: self.a - other.a,
            v: self.v.iter().zip(&other.v).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, lambda: f64) -> AugVector {
        AugVector {
            a: lambda * self.a,
            v: self.v.iter().map(|x| lambda * x).collect(),
        }
    }

    /// Value of the affine function `a + <v, x>`.
    pub fn affine_at(&self, x: &[f64]) -> f64 {
        self.a + crate::dot(&self.v, x)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.v.iter().all(|x| x.is_finite())
    }

    fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.a).chain(self.v.iter().copied())
    }
}

/// Ordered, nonempty list of vertices whose convex hull is a polytope in `R^{d+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSet {
    dim: usize,
    vertices: Vec<AugVector>,
}

impl VertexSet {
    pub fn new(vertices: Vec<AugVector>) -> Result<Self> {
        let dim = vertices.first().ok_or(Error::EmptySet)?.dim();
        for q in &vertices {
            check_dim(dim, q.dim())?;
        }
        Ok(Self { dim, vertices })
    }

    pub fn singleton(q: AugVector) -> Self {
        Self { dim: q.dim(), vertices: vec![q] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[AugVector] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<AugVector> {
        self.vertices
    }

    /// Every vertex shifted by `z`.
    pub fn translated(&self, z: &AugVector) -> VertexSet {
        VertexSet {
            dim: self.dim,
            vertices: self.vertices.iter().map(|q| q.add(z)).collect(),
        }
    }

    /// Minkowski sum; vertex order is lexicographic with `self` outermost.
    pub fn minkowski_sum(&self, other: &VertexSet) -> Result<VertexSet> {
        check_dim(self.dim, other.dim)?;
        let mut out = Vec::with_capacity(self.len() * other.len());
        for p in &self.vertices {
            for q in &other.vertices {
                out.push(p.add(q));
            }
        }
        Ok(VertexSet { dim: self.dim, vertices: merge_duplicates(out) })
    }

    pub fn scaled(&self, lambda: f64) -> VertexSet {
        VertexSet {
            dim: self.dim,
            vertices: merge_duplicates(self.vertices.iter().map(|q| q.scale(lambda)).collect()),
        }
    }

    /// Largest first coordinate over the vertices.
    pub fn max_a(&self) -> f64 {
        self.vertices.iter().map(|q| q.a).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest first coordinate over the vertices.
    pub fn min_a(&self) -> f64 {
        self.vertices.iter().map(|q| q.a).fold(f64::INFINITY, f64::min)
    }

    /// `max_{(a, v)} a + <v, dx>` over the polytope.
    pub fn support_max(&self, dx: &[f64]) -> f64 {
        self.vertices.iter().map(|q| q.affine_at(dx)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min_{(b, w)} b + <w, dx>` over the polytope.
    pub fn support_min(&self, dx: &[f64]) -> f64 {
        self.vertices.iter().map(|q| q.affine_at(dx)).fold(f64::INFINITY, f64::min)
    }

    pub fn dedup(self) -> VertexSet {
        VertexSet { dim: self.dim, vertices: merge_duplicates(self.vertices) }
    }
}

#[derive(Hash, PartialEq, Eq)]
enum CoordKey {
    Grid(i64),
    Bits(u64),
}

fn coord_key(x: f64) -> CoordKey {
    if x.abs() < 1e6 {
        CoordKey::Grid((x / MERGE_GRID).round() as i64)
    } else {
        CoordKey::Bits(x.to_bits())
    }
}

/// Drops vertices that round to the same `1e-12` grid cell as an earlier
/// vertex. First occurrences keep their relative order.
pub(crate) fn merge_duplicates(points: Vec<AugVector>) -> Vec<AugVector> {
    if points.len() < 2 {
        return points;
    }
    let mut seen: HashMap<Vec<CoordKey>, ()> = HashMap::with_capacity(points.len());
    points
        .into_iter()
        .filter(|q| seen.insert(q.coords().map(coord_key).collect(), ()).is_none())
        .collect()
}

/// Result of [`min_norm_point`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNormPoint {
    pub point: AugVector,
    /// Barycentric weights, one per input vertex.
    pub weights: Vec<f64>,
    /// Number of major cycles performed.
    pub iterations: usize,
}

/// `min_q <p, q> - |p|^2` over the vertices; nonnegative at the exact
/// minimum-norm point.
pub fn optimality_residual(s: &VertexSet, p: &AugVector) -> f64 {
    let pp = p.norm_sq();
    s.vertices.iter().map(|q| p.dot(q) - pp).fold(f64::INFINITY, f64::min)
}

/// Minimum-norm point of `conv(s)`.
///
/// On return `<point, q> >= |point|^2 - tol` holds for every vertex `q`
/// (up to rounding relative to the vertex magnitudes), the weights are
/// nonnegative and sum to one.
pub fn min_norm_point(s: &VertexSet, tol: f64) -> Result<MinNormPoint> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if s.vertices.iter().any(|q| !q.is_finite()) {
        return Err(Error::NonFinite);
    }
    let pts: Vec<Vec<f64>> = s.vertices.iter().map(|q| q.coords().collect()).collect();
    let (weights, iterations) = wolfe(&pts, tol)?;

    let n = s.dim + 1;
    let mut x = vec![0.0; n];
    for (w, p) in weights.iter().zip(&pts) {
        if *w != 0.0 {
            for k in 0..n {
                x[k] += w * p[k];
            }
        }
    }
    let point = AugVector { a: x[0], v: x[1..].to_vec() };
    Ok(MinNormPoint { point, weights, iterations })
}

fn dotv(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn combine(pts: &[Vec<f64>], corral: &[usize], lambda: &[f64]) -> Vec<f64> {
    let n = pts[0].len();
    let mut x = vec![0.0; n];
    for (&i, &l) in corral.iter().zip(lambda) {
        for k in 0..n {
            x[k] += l * pts[i][k];
        }
    }
    x
}

/// Affine minimiser of `|sum mu_i p_i|` subject to `sum mu_i = 1`, solved as
/// a least-squares problem in the differences `p_i - p_0`.
fn affine_min_norm(pts: &[Vec<f64>], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    if k == 1 {
        return vec![1.0];
    }
    let n = pts[0].len();
    let p0 = &pts[corral[0]];
    let diffs = DMatrix::from_fn(n, k - 1, |r, c| pts[corral[c + 1]][r] - p0[r]);
    let rhs = DVector::from_fn(n, |r, _| -p0[r]);
    let svd = diffs.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let coef = match svd.solve(&rhs, SV_CUTOFF * smax.max(f64::MIN_POSITIVE)) {
        Ok(c) => c,
        Err(_) => DVector::zeros(k - 1),
    };
    let mut mu = Vec::with_capacity(k);
    mu.push(1.0 - coef.iter().sum::<f64>());
    mu.extend(coef.iter().copied());
    mu
}

fn wolfe(pts: &[Vec<f64>], tol: f64) -> Result<(Vec<f64>, usize)> {
    let m = pts.len();
    let norms: Vec<f64> = pts.iter().map(|p| dotv(p, p)).collect();
    let scale = norms.iter().copied().fold(1.0, f64::max);
    // Rounding in <x, q> is of order eps * |x| |q|.
    let gap_tol = tol.max(1e-14 * scale);

    let start = (0..m).fold(0, |best, q| if norms[q] < norms[best] { q } else { best });
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let mut x = pts[start].clone();
    let cap = 1000 * m;
    let mut iterations = 0;

    loop {
        iterations += 1;
        if iterations > cap {
            return Err(Error::NoConvergence { iterations: cap });
        }
        let xx = dotv(&x, &x);
        let (j, best) = (0..m).fold((0, f64::INFINITY), |(bj, bv), q| {
            let val = dotv(&x, &pts[q]);
            if val < bv {
                (q, val)
            } else {
                (bj, bv)
            }
        });
        if best >= xx - gap_tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);

        // Minor cycles: at most one vertex leaves per pass.
        loop {
            let mu = affine_min_norm(pts, &corral);
            if mu.iter().all(|&w| w > WEIGHT_EPS) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0;
            for (l, w) in lambda.iter().zip(&mu) {
                if *w <= WEIGHT_EPS {
                    let t = if l - w > 0.0 { l / (l - w) } else { 0.0 };
                    theta = f64::min(theta, t);
                }
            }
            for (l, w) in lambda.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * w;
            }
            let mut keep_c = Vec::with_capacity(corral.len());
            let mut keep_l = Vec::with_capacity(corral.len());
            for (&c, &l) in corral.iter().zip(&lambda) {
                if l > WEIGHT_EPS {
                    keep_c.push(c);
                    keep_l.push(l);
                }
            }
            if keep_c.is_empty() {
                // All weights collapsed; restart from the best corral vertex.
                let b = *corral
                    .iter()
                    .min_by(|p, q| norms[**p].total_cmp(&norms[**q]))
                    .expect("corral is nonempty");
                keep_c.push(b);
                keep_l.push(1.0);
            }
            let total: f64 = keep_l.iter().sum();
            keep_l.iter_mut().for_each(|l| *l /= total);
            corral = keep_c;
            lambda = keep_l;
        }

        let next = combine(pts, &corral, &lambda);
        let stalled = dotv(&next, &next) >= xx;
        x = next;
        if stalled {
            break;
        }
    }

    let mut weights = vec![0.0; m];
    for (&c, &l) in corral.iter().zip(&lambda) {
        weights[c] += l;
    }
    Ok((weights, iterations))
}
