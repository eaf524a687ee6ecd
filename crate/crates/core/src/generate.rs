//! Seeded random piecewise-affine instances that are bounded below.
//!
//! The max part contains a cross-polytope `{+-c_k e_k}` with
//! `c_k >= 1.5 rho sqrt(d)`, which contains the ball of radius `1.5 rho`. Every
//! minus gradient has `|w_j| <= rho`, so `0` lies in the interior of
//! `conv{v_i + w_j}` for each `j` and every convex piece
//! `max_i (a_i + b_j + <v_i + w_j, x>)` is coercive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minnorm::{self, min_norm_point, AugVector, VertexSet};
use crate::oracle::{pa_global_min, LpOutcome};
use crate::pa::DcForm;

/// Mixed into the seed for starting points so they are independent of the
/// instance stream.
const START_STREAM: u64 = 0x5851_F42D_4C95_7F2D;

/// Squared norms at or below this count as `0 in C` in [`theta`].
pub const THETA_ZERO: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub d: usize,
    pub l: usize,
    pub s: usize,
    pub scale: f64,
}

impl GenSpec {
    pub fn new(seed: u64, d: usize, l: usize, s: usize) -> Self {
        Self { seed, d, l, s, scale: 1.0 }
    }

    pub fn generate(&self) -> Result<DcForm> {
        generate_pa(self.seed, self.d, self.l, self.s, self.scale)
    }

    pub fn start(&self) -> Vec<f64> {
        generate_start(self.seed, self.d, self.scale)
    }
}

fn ball_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    let side = radius / (d as f64).sqrt();
    (0..d).map(|_| rng.gen_range(-side..=side)).collect()
}

/// Random bounded-below DC form with `l` plus pieces and `s` minus pieces.
pub fn generate_pa(seed: u64, d: usize, l: usize, s: usize, scale: f64) -> Result<DcForm> {
    if d == 0 || s == 0 || l < 2 * d {
        return Err(Error::InvalidParameter(format!("need d >= 1, s >= 1 and l >= 2d (got d={d}, l={l}, s={s})")));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter("scale must be positive and finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = scale;
    let reach = rho * (d as f64).sqrt();

    let mut minus = Vec::with_capacity(s);
    for _ in 0..s {
        let b = rng.gen_range(-2.0 * scale..=2.0 * scale);
        minus.push(AugVector::new(b, ball_point(&mut rng, d, rho)));
    }

    let mut plus = Vec::with_capacity(l);
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let c = rng.gen_range(1.5 * reach..=3.0 * reach);
            let mut v = vec![0.0; d];
            v[k] = sign * c;
            plus.push(AugVector::new(rng.gen_range(-scale..=scale), v));
        }
    }
    for _ in 2 * d..l {
        let a = rng.gen_range(-scale..=scale);
        let v = (0..d).map(|_| rng.gen_range(-3.0 * reach..=3.0 * reach)).collect();
        plus.push(AugVector::new(a, v));
    }

    let f = DcForm::new(d, plus, minus)?;
    match pa_global_min(&f)? {
        LpOutcome::Bounded { .. } => Ok(f),
        LpOutcome::UnboundedBelow { .. } => {
            Err(Error::GenerationFailure(format!("instance seed={seed} d={d} l={l} s={s} is unbounded below")))
        }
    }
}

/// Starting point drawn uniformly from `[-2 scale, 2 scale]^d`.
pub fn generate_start(seed: u64, d: usize, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ START_STREAM);
    (0..d).map(|_| rng.gen_range(-2.0 * scale..=2.0 * scale)).collect()
}

fn for_each_subset(n: usize, max_size: usize, mut visit: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut stack: Vec<usize> = Vec::new();
    fn rec(
        n: usize,
        max_size: usize,
        from: usize,
        stack: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        for i in from..n {
            stack.push(i);
            visit(stack)?;
            if stack.len() < max_size {
                rec(n, max_size, i + 1, stack, visit)?;
            }
            stack.pop();
        }
        Ok(())
    }
    rec(n, max_size, 0, &mut stack, &mut visit)
}

/// `min |u|^2` over all sets `C = conv{v_i : i in S} + w_j` with `0 not in C`.
///
/// A nonzero min-norm point of a polytope in `R^d` lies in the hull of at
/// most `d` of its vertices, so subsets of size up to `d` suffice.
pub fn theta(f: &DcForm) -> Result<f64> {
    let d = f.dim();
    let plus = f.plus();
    let mut best = f64::INFINITY;
    for w in f.minus() {
        for_each_subset(plus.len(), d.min(plus.len()), |subset| {
            let pts = subset.iter().map(|&i| {
                let v: Vec<f64> = plus[i].v.iter().zip(&w.v).map(|(a, b)| a + b).collect();
                AugVector::new(0.0, v)
            });
            let set = VertexSet::new(pts.collect())?;
            let n2 = min_norm_point(&set, minnorm::TIGHT_TOL)?.point.norm_sq();
            if n2 > THETA_ZERO && n2 < best {
                best = n2;
            }
            Ok(())
        })?;
    }
    Ok(best)
}

/// Step budget `10 s (ceil((f0 - fstar) / min(theta, 1)) + 1)`.
pub fn iteration_bound(s: usize, f0: f64, fstar: f64, theta: f64) -> usize {
    let quotient = ((f0 - fstar).max(0.0) / theta.min(1.0)).ceil();
    let steps = 10.0 * s as f64 * (quotient + 1.0);
    if steps >= usize::MAX as f64 {
        usize::MAX
    } else {
        steps as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = generate_pa(7, 3, 8, 2, 1.0).unwrap();
        let b = generate_pa(7, 3, 8, 2, 1.0).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a, generate_pa(8, 3, 8, 2, 1.0).unwrap());
        assert_eq!(generate_start(7, 3, 1.0), generate_start(7, 3, 1.0));
    }

    #[test]
    fn bounded_below() {
        let f = generate_pa(1, 2, 6, 3, 1.0).unwrap();
        assert!(pa_global_min(&f).unwrap().is_bounded());
        assert_eq!((f.plus().len(), f.minus().len()), (6, 3));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(generate_pa(1, 3, 5, 1, 1.0).is_err());
        assert!(generate_pa(1, 2, 4, 0, 1.0).is_err());
        assert!(generate_pa(1, 2, 4, 1, 0.0).is_err());
    }

    #[test]
    fn theta_of_unit_square() {
        let plus = vec![
            AugVector::new(0.0, vec![1.0, 0.0]),
            AugVector::new(0.0, vec![-1.0, 0.0]),
            AugVector::new(0.0, vec![0.0, 2.0]),
            AugVector::new(0.0, vec![0.0, -2.0]),
        ];
        let f = DcForm::new(2, plus, vec![AugVector::zeros(2)]).unwrap();
        // The segment [(1,0), (0,2)] is nearest to 0 at distance 2/sqrt(5).
        assert!((theta(&f).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn iteration_bound_formula() {
        assert_eq!(iteration_bound(2, 3.0, 1.0, 0.5), 10 * 2 * (4 + 1));
        assert_eq!(iteration_bound(1, 3.0, 1.0, 4.0), 10 * (2 + 1));
    }
}
