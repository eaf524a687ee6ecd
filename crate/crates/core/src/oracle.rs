//! Independent ground truth for polyhedral and piecewise-affine functions.
//!
//! `min_x max_i (a_i + <v_i, x>)` is solved through its LP dual
//! `max sum_i l_i a_i  s.t.  sum_i l_i v_i = 0, sum_i l_i = 1, l >= 0`
//! with the dense simplex. The simplex multipliers `y` of the equality rows
//! satisfy `a_i + <v_i, y_v> <= -y_s`, so `y_v` is a primal minimiser; an
//! infeasible dual yields a ray along which every piece decreases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minnorm::{min_norm_point, AugVector, VertexSet};
use crate::pa::DcForm;
use crate::simplex::{self, SimplexResult};

/// Default tolerance of [`classify_nonnegative`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum LpOutcome {
    Bounded {
        argmin: Vec<f64>,
        value: f64,
        /// Convex weights on the pieces whose gradients combine to zero.
        weights: Vec<f64>,
    },
    UnboundedBelow {
        /// Unit direction along which every piece strictly decreases.
        ray: Vec<f64>,
    },
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Bounded { value, .. } => Some(*value),
            LpOutcome::UnboundedBelow { .. } => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, LpOutcome::Bounded { .. })
    }
}

fn max_affine(pieces: &[AugVector], x: &[f64]) -> f64 {
    pieces.iter().map(|q| q.affine_at(x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Global minimum of `max_i (a_i + <v_i, x>)` over `R^d`.
pub fn min_max_affine(pieces: &[AugVector], d: usize) -> Result<LpOutcome> {
    if pieces.is_empty() {
        return Err(Error::EmptySet);
    }
    for q in pieces {
        crate::error::check_dim(d, q.dim())?;
        if !q.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    let k = pieces.len();
    let mut rows: Vec<Vec<f64>> = (0..d).map(|r| pieces.iter().map(|q| q.v[r]).collect()).collect();
    rows.push(vec![1.0; k]);
    let mut rhs = vec![0.0; d];
    rhs.push(1.0);
    let cost: Vec<f64> = pieces.iter().map(|q| -q.a).collect();

    match simplex::solve(&rows, &rhs, &cost)? {
        SimplexResult::Optimal { x: weights, duals, .. } => {
            let argmin = duals[..d].to_vec();
            let value = max_affine(pieces, &argmin);
            Ok(LpOutcome::Bounded { argmin, value, weights })
        }
        SimplexResult::Infeasible { farkas, .. } => {
            let mut ray = farkas[..d].to_vec();
            let len = crate::norm(&ray);
            if len > 0.0 {
                ray.iter_mut().for_each(|r| *r /= len);
            }
            Ok(LpOutcome::UnboundedBelow { ray })
        }
        // The dual feasible set lies in the unit simplex.
        SimplexResult::Unbounded => Err(Error::Degenerate { iterations: 0 }),
    }
}

/// Sign classification of a polyhedral convex function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Nonnegativity {
    Nonnegative,
    AttainsNegative { witness: Vec<f64> },
    UnboundedBelow { direction: Vec<f64> },
}

/// Decides whether `max_i (a_i + <v_i, x>) >= 0` on all of `R^d` from the
/// min-norm point `(a0, v0)` of `conv{(a_i, v_i)}`: for a bounded-below
/// function this holds exactly when `a0 >= 0`.
pub fn classify_nonnegative(pieces: &[AugVector], tol: f64) -> Result<Nonnegativity> {
    let set = VertexSet::new(pieces.to_vec())?;
    let d = set.dim();
    let mn = min_norm_point(&set, crate::minnorm::TIGHT_TOL)?;
    let (a0, v0) = (mn.point.a, &mn.point.v);

    let lp = min_max_affine(pieces, d)?;
    let bounded_argmin = match lp {
        LpOutcome::UnboundedBelow { ray } => {
            let direction = if a0.abs() <= tol && crate::norm(v0) > tol {
                v0.iter().map(|x| -x).collect()
            } else {
                ray
            };
            return Ok(Nonnegativity::UnboundedBelow { direction });
        }
        LpOutcome::Bounded { argmin, .. } => argmin,
    };
    if a0 >= -tol {
        return Ok(Nonnegativity::Nonnegative);
    }
    // max_i (a_i + <v_i, v0 / a0>) <= -|(a0, v0)|^2 / |a0| < 0
    let witness: Vec<f64> = v0.iter().map(|x| x / a0).collect();
    if max_affine(pieces, &witness) < 0.0 {
        Ok(Nonnegativity::AttainsNegative { witness })
    } else {
        Ok(Nonnegativity::AttainsNegative { witness: bounded_argmin })
    }
}

/// Global minimum of a piecewise-affine function: the best of the convex
/// problems `min_x max_i (a_i + b_j + <v_i + w_j, x>)` over `j`.
pub fn pa_global_min(f: &DcForm) -> Result<LpOutcome> {
    let mut best: Option<LpOutcome> = None;
    for piece in f.minus() {
        let shifted: Vec<AugVector> = f.plus().iter().map(|p| p.add(piece)).collect();
        let outcome = min_max_affine(&shifted, f.dim())?;
        match &outcome {
            LpOutcome::UnboundedBelow { .. } => return Ok(outcome),
            LpOutcome::Bounded { value, .. } => {
                if best.as_ref().and_then(LpOutcome::value).is_none_or(|b| *value < b) {
                    best = Some(outcome);
                }
            }
        }
    }
    let Some(LpOutcome::Bounded { argmin, weights, .. }) = best else {
        unreachable!("DcForm has at least one minus piece")
    };
    let value = f.value(&argmin);
    Ok(LpOutcome::Bounded { argmin, value, weights })
}
