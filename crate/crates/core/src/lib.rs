//! Kolmogorov n-width machinery for reachable sets of bilinear control systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`subspaces`]: affine subspaces of a finite-dimensional Hilbert space and
//!   the asymmetric distance `rho(K, W) = sup_{x in K} inf_{w in W} |x - w|`.
//! * [`widths`]: upper estimates of the linear (`D_n`) and affine (`d_n`)
//!   widths of a finite snapshot cloud, plus a brute-force oracle for tiny
//!   instances.
//! * [`operators`]: operators `pi(x) = l0 + pi0 x + F(x)` and the explicit
//!   subspace constructions that bound the width of `pi(K)`.
//! * [`volterra`]: the Volterra series of the endpoint map of
//!   `x' = (A + u(t) B) x`, its term and tail certificates, and an exact
//!   matrix-exponential propagator.
//! * [`models`]: Galerkin truncations of the controlled Euler-Bernoulli beam and
//!   of the bilinear Schrodinger equation.
//! * [`bounds`]: closed-form width bounds with validity gating.
//! * [`reachset`]: admissible control sets, endpoint clouds and the comparison
//!   of empirical widths against the bounds.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod models;
pub mod operators;
pub mod quadrature;
pub mod reachset;
pub mod subspaces;
pub mod volterra;
pub mod widths;

pub use error::{Error, Result};
pub use linalg::{FieldTag, Scalar};
pub use subspaces::AffineSubspace;

/// Tolerance added to the right-hand side of every constructive inequality.
pub const INEQUALITY_TOL: f64 = 1e-10;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order always matches input order.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    items.iter().map(f).collect()
}
