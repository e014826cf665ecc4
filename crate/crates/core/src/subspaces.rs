//! Affine subspaces `W = c + W0` of a finite-dimensional Hilbert space.
//!
//! Norms are the Euclidean (real) or Hermitian (complex) inner-product norms.
//! A basis of size zero is allowed and describes the single point `c`.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{extend_orthonormal, inner, orthonormalize, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace<T: Scalar> {
    offset: DVector<T>,
    basis: Vec<DVector<T>>,
}

impl<T: Scalar> AffineSubspace<T> {
    /// Affine subspace through `offset` spanned by `directions`; the directions
    /// are orthonormalised and dependent ones dropped.
    pub fn new(offset: DVector<T>, directions: &[DVector<T>]) -> Result<Self> {
        let n = offset.len();
        if n == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be at least 1".into()));
        }
        for d in directions {
            check_dim(n, d.len())?;
        }
        Ok(Self {
            offset,
            basis: orthonormalize(directions, 0.0),
        })
    }

    /// Linear subspace (zero offset).
    pub fn linear(ambient_dim: usize, directions: &[DVector<T>]) -> Result<Self> {
        Self::new(DVector::zeros(ambient_dim), directions)
    }

    pub fn point(offset: DVector<T>) -> Self {
        Self {
            offset,
            basis: Vec::new(),
        }
    }

    pub fn origin(ambient_dim: usize) -> Self {
        Self::point(DVector::zeros(ambient_dim))
    }

    /// Builds from a basis already known to be orthonormal.
    pub(crate) fn from_orthonormal(offset: DVector<T>, basis: Vec<DVector<T>>) -> Self {
        debug_assert!(basis.iter().all(|b| b.len() == offset.len()));
        Self { offset, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.offset.len()
    }

    /// Dimension of the linear part.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn offset(&self) -> &DVector<T> {
        &self.offset
    }

    pub fn basis(&self) -> &[DVector<T>] {
        &self.basis
    }

    pub fn is_linear(&self) -> bool {
        self.offset.iter().all(|x| x.is_zero())
    }

    /// Same offset, first `k` basis vectors.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            offset: self.offset.clone(),
            basis: self.basis.iter().take(k).cloned().collect(),
        }
    }

    /// `(x - c) - P0 (x - c)`, the component of `x - c` orthogonal to `W0`.
    pub fn residual(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.ambient_dim(), x.len())?;
        let mut r = x - &self.offset;
        for q in &self.basis {
            let c = inner(q, &r);
            r.axpy(-c, q, T::one());
        }
        Ok(r)
    }

    /// Nearest point of `W` to `x`.
    pub fn project(&self, x: &DVector<T>) -> Result<DVector<T>> {
        Ok(x - self.residual(x)?)
    }

    /// A point of `W` with the given coordinates in the orthonormal basis.
    pub fn point_at(&self, coords: &[T]) -> DVector<T> {
        let mut p = self.offset.clone();
        for (q, &c) in self.basis.iter().zip(coords) {
            p.axpy(c, q, T::one());
        }
        p
    }
}

/// `rho(x, W) = inf_{w in W} |x - w|`.
pub fn point_distance<T: Scalar>(x: &DVector<T>, w: &AffineSubspace<T>) -> Result<f64> {
    Ok(w.residual(x)?.norm())
}

/// `rho(K, W) = sup_{x in K} rho(x, W)`.
pub fn set_distance<T: Scalar>(k: &[DVector<T>], w: &AffineSubspace<T>) -> Result<f64> {
    if k.is_empty() {
        return Err(Error::EmptySet);
    }
    k.iter().try_fold(0.0f64, |acc, x| Ok(acc.max(point_distance(x, w)?)))
}

/// Affine hull of `W1 ∪ W2`, anchored at `W1`'s offset.
pub fn affine_join<T: Scalar>(w1: &AffineSubspace<T>, w2: &AffineSubspace<T>) -> Result<AffineSubspace<T>> {
    check_dim(w1.ambient_dim(), w2.ambient_dim())?;
    let mut basis = orthonormalize(w1.basis.iter().chain(&w2.basis), 0.0);
    // The offset difference is judged against the offsets' own size so that
    // roundoff between nearly equal offsets does not add a direction.
    let shift = &w2.offset - &w1.offset;
    let scale = w1.offset.norm().max(w2.offset.norm());
    extend_orthonormal(&mut basis, &shift, scale);
    Ok(AffineSubspace::from_orthonormal(w1.offset.clone(), basis))
}

/// `W1 + W2` for a linear `W2`: same offset as `W1`, linear part the span of
/// both bases.
pub fn subspace_sum<T: Scalar>(w1: &AffineSubspace<T>, w2_linear: &AffineSubspace<T>) -> Result<AffineSubspace<T>> {
    check_dim(w1.ambient_dim(), w2_linear.ambient_dim())?;
    if !w2_linear.is_linear() {
        return Err(Error::InvalidArgument(
            "second summand must be a linear subspace (zero offset)".into(),
        ));
    }
    let basis = orthonormalize(w1.basis.iter().chain(&w2_linear.basis), 0.0);
    Ok(AffineSubspace::from_orthonormal(w1.offset.clone(), basis))
}
