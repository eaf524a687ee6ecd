//! Codifferential descent for nonsmooth minimization.
//!
//! The crate provides three descent methods built on codifferentials, i.e.
//! pairs of polytopes `[hypo, hyper]` in `R^{d+1}` whose max/min expansion
//! approximates the increment of a function:
//!
//! * [`mhd`]: hypodifferential descent with Armijo steps for convex
//!   hypodifferentiable functions ([`convex::ConvexFn`]).
//! * [`mgcd::mcd_run`]: classical codifferential descent with exact line
//!   search, specialised to piecewise-affine functions.
//! * [`mgcd::mgcd_run`]: global codifferential descent, which steps by the
//!   projection itself and discards hyperdifferential pieces that can no
//!   longer produce descent. It terminates at a certified global minimum.
//!
//! Piecewise-affine functions are held as [`pa::DcForm`] (a max of affine
//! pieces plus a min of affine pieces). [`pa::PaExpr`] trees are compiled into
//! that form with the global codifferential calculus. [`oracle`] is an
//! independent LP-based ground truth used to verify every claimed minimum.

pub mod convex;
pub mod error;
pub mod generate;
pub mod mgcd;
pub mod mhd;
pub mod minnorm;
pub mod oracle;
pub mod pa;
mod simplex;

pub use error::{Error, Result};
pub use minnorm::{min_norm_point, AugVector, MinNormPoint, VertexSet};
pub use pa::{DcForm, GlobalCodiff, PaExpr};

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
