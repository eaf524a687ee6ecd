//! Test-only oracles and instance builders, independent of the solvers
//! under test.

#![allow(dead_code)]

use codiff::convex::{ConvexFn, Quadratic};
use codiff::generate::GenSpec;
use codiff::PaExpr;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn uniform_vec(rng: &mut ChaCha8Rng, d: usize, half: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-half..=half)).collect()
}

/// Random expression tree of depth at most `depth` over `R^d`.
pub fn random_expr(rng: &mut ChaCha8Rng, d: usize, depth: usize) -> PaExpr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.1) {
            PaExpr::Const(rng.gen_range(-2.0..=2.0))
        } else {
            PaExpr::affine(rng.gen_range(-2.0..=2.0), uniform_vec(rng, d, 2.0))
        };
    }
    let arity = rng.gen_range(2..=3);
    let children = |rng: &mut ChaCha8Rng| (0..arity).map(|_| random_expr(rng, d, depth - 1)).collect();
    match rng.gen_range(0..4) {
        0 => PaExpr::scale(rng.gen_range(-2.0..=2.0), random_expr(rng, d, depth - 1)),
        1 => PaExpr::Sum(children(rng)),
        2 => PaExpr::Max(children(rng)),
        _ => PaExpr::Min(children(rng)),
    }
}

/// Ensures the tree has an affine leaf so its dimension is known.
pub fn anchored(e: PaExpr, d: usize) -> PaExpr {
    if e.dim().is_some() {
        e
    } else {
        PaExpr::Sum(vec![e, PaExpr::affine(0.0, vec![0.0; d])])
    }
}

/// Closed-form projection of the origin onto the hull of one, two or three
/// points in any dimension.
pub fn closed_form_projection(pts: &[Vec<f64>]) -> Vec<f64> {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let sub = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<f64>>();
    let segment = |p: &[f64], q: &[f64]| {
        let e = sub(q, p);
        let ee = dot(&e, &e);
        let t = if ee == 0.0 { 0.0 } else { (-dot(p, &e) / ee).clamp(0.0, 1.0) };
        p.iter().zip(&e).map(|(pi, ei)| pi + t * ei).collect::<Vec<f64>>()
    };
    match pts.len() {
        1 => pts[0].clone(),
        2 => segment(&pts[0], &pts[1]),
        3 => {
            let (p, e1, e2) = (&pts[0], sub(&pts[1], &pts[0]), sub(&pts[2], &pts[0]));
            let (a11, a12, a22) = (dot(&e1, &e1), dot(&e1, &e2), dot(&e2, &e2));
            let (b1, b2) = (-dot(p, &e1), -dot(p, &e2));
            let det = a11 * a22 - a12 * a12;
            if det > 1e-12 * (a11 * a22).max(f64::MIN_POSITIVE) {
                let s = (b1 * a22 - b2 * a12) / det;
                let t = (a11 * b2 - a12 * b1) / det;
                if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
                    return p.iter().zip(e1.iter().zip(&e2)).map(|(pi, (x, y))| pi + s * x + t * y).collect();
                }
            }
            [segment(&pts[0], &pts[1]), segment(&pts[1], &pts[2]), segment(&pts[0], &pts[2])]
                .into_iter()
                .min_by(|x, y| dot(x, x).total_cmp(&dot(y, y)))
                .unwrap()
        }
        _ => panic!("closed form only for up to three points"),
    }
}

/// Convex quadratic `0.5 x'Qx + b'x + c` in plain matrix form.
#[derive(Clone, Debug)]
pub struct RawQuadratic {
    pub q: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl RawQuadratic {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.b.dot(x) + self.c
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * x + &self.b
    }
}

/// `K` random positive definite quadratics in `R^d` with eigenvalues in
/// `[0.5, 0.5 + spread]`.
pub fn random_quadratics(rng: &mut ChaCha8Rng, d: usize, k: usize, spread: f64) -> Vec<RawQuadratic> {
    (0..k)
        .map(|_| {
            let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..=1.0));
            let q = a.transpose() * &a * (spread / d as f64) + DMatrix::identity(d, d) * 0.5;
            let center = DVector::from_vec(uniform_vec(rng, d, 1.0));
            let b = -(&q * &center);
            let c = 0.5 * center.dot(&(&q * &center)) + rng.gen_range(0.0..=1.0);
            RawQuadratic { q, b, c }
        })
        .collect()
}

pub fn max_of_quadratics(qs: &[RawQuadratic]) -> ConvexFn {
    let children = qs
        .iter()
        .map(|q| ConvexFn::smooth(Quadratic::new(q.q.clone(), q.b.as_slice().to_vec(), q.c).unwrap()))
        .collect();
    ConvexFn::max(children).unwrap()
}

/// Minimum of `max_i q_i(x)` by a log-barrier Newton method on
/// `min t  s.t.  q_i(x) <= t`. Returns `(x*, f*)`; the duality gap at exit
/// is below `K / 1e12`.
pub fn max_quadratics_minimum(qs: &[RawQuadratic]) -> (Vec<f64>, f64) {
    let d = qs[0].b.len();
    let n = d + 1;
    let fmax = |x: &DVector<f64>| qs.iter().map(|q| q.value(x)).fold(f64::NEG_INFINITY, f64::max);
    let mut x = DVector::zeros(d);
    let mut t = fmax(&x) + 1.0;
    let barrier = |x: &DVector<f64>, t: f64, tau: f64| -> f64 {
        let mut v = tau * t;
        for q in qs {
            let s = t - q.value(x);
            if s <= 0.0 {
                return f64::INFINITY;
            }
            v -= s.ln();
        }
        v
    };
    let mut tau = 1.0;
    while tau <= 1e12 {
        for _ in 0..200 {
            let mut grad = DVector::zeros(n);
            let mut hess = DMatrix::zeros(n, n);
            grad[d] = tau;
            for q in qs {
                let s = t - q.value(&x);
                let mut ds = DVector::zeros(n);
                let g = q.gradient(&x);
                for i in 0..d {
                    ds[i] = -g[i];
                }
                ds[d] = 1.0;
                grad -= &ds / s;
                hess += &ds * ds.transpose() / (s * s);
                let mut block = hess.view_mut((0, 0), (d, d));
                block += &q.q / s;
            }
            let step = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => hess.lu().solve(&(-&grad)).expect("barrier Hessian is nonsingular"),
            };
            let decrement = -grad.dot(&step);
            if decrement / 2.0 < 1e-14 {
                break;
            }
            let f0 = barrier(&x, t, tau);
            let mut h = 1.0;
            loop {
                let xn = &x + step.rows(0, d) * h;
                let tn = t + step[d] * h;
                if barrier(&xn, tn, tau) <= f0 - 0.25 * h * decrement {
                    x = xn;
                    t = tn;
                    break;
                }
                h *= 0.5;
                if h < 1e-20 {
                    break;
                }
            }
            if h < 1e-20 {
                break;
            }
        }
        tau *= 10.0;
    }
    let value = fmax(&x);
    (x.as_slice().to_vec(), value)
}

/// The 200-instance set shared by several criteria: `d in 2..=5`, five
/// `(l, s)` shapes with `l <= 10, s <= 6`, ten seeds each.
pub fn instance_set() -> Vec<GenSpec> {
    let mut out = Vec::new();
    for d in 2..=5usize {
        let shapes = [(2 * d, 1), (2 * d, 3), (10, 2), (10, 4), (10, 6)];
        for (shape, (l, s)) in shapes.into_iter().enumerate() {
            for k in 0..10u64 {
                out.push(GenSpec::new(1000 * d as u64 + 100 * shape as u64 + k, d, l, s));
            }
        }
    }
    out
}
