//! Empirical Kolmogorov widths of finite snapshot clouds.
//!
//! For a cloud `K` the linear width `D_n(K) = inf_{dim W0 = n} rho(K, W0)` and
//! the affine width `d_n(K) = inf_{dim W0 = n, c} rho(K, c + W0)` are minimax
//! problems with no tractable exact solution in general. The estimators here
//! evaluate a fixed, deterministic family of candidate subspaces and return
//! the best one, so every reported value is an upper bound on the width of the
//! cloud, realised by the returned subspace.

mod oracle;

pub use oracle::exact_width_oracle;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{extend_orthonormal, inner, Scalar};
use crate::subspaces::{set_distance, AffineSubspace};

/// Iterations of the minimax-centre refinement used as an extra offset
/// candidate.
const CENTER_ITERATIONS: usize = 400;

#[derive(Debug, Clone)]
pub struct SnapshotCloud<T: Scalar> {
    points: Vec<DVector<T>>,
    label: String,
}

impl<T: Scalar> SnapshotCloud<T> {
    pub fn new(points: Vec<DVector<T>>, label: impl Into<String>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("points must have dimension >= 1".into()));
        }
        for p in &points {
            check_dim(dim, p.len())?;
            if !crate::linalg::all_finite(p) {
                return Err(Error::InvalidArgument("non-finite point in cloud".into()));
            }
        }
        Ok(Self {
            points,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[DVector<T>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mean(&self) -> DVector<T> {
        let mut m = DVector::zeros(self.dim());
        for p in &self.points {
            m += p;
        }
        m.unscale(self.len() as f64)
    }

    /// A sub-cloud with the points at `indices`.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.points[i].clone()).collect(),
            self.label.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthMode {
    Linear,
    Affine,
}

/// A candidate subspace and its sup-residual over the cloud.
#[derive(Debug, Clone)]
pub struct WidthEstimate<T: Scalar> {
    pub subspace: AffineSubspace<T>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct WidthEntry<T: Scalar> {
    pub n: usize,
    pub linear_estimate: f64,
    pub affine_estimate: f64,
    pub linear_subspace: AffineSubspace<T>,
    pub affine_subspace: AffineSubspace<T>,
}

/// Estimates for `n = 0..=n_max`, non-increasing in `n` with
/// `affine <= linear` at every `n`.
#[derive(Debug, Clone)]
pub struct WidthProfile<T: Scalar> {
    pub entries: Vec<WidthEntry<T>>,
}

impl<T: Scalar> WidthProfile<T> {
    pub fn linear(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.linear_estimate).collect()
    }

    pub fn affine(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.affine_estimate).collect()
    }
}

/// Upper estimate of `D_n` for the cloud: the better of the top-`n` left
/// singular subspace and greedy worst-point pivoting.
pub fn linear_width_estimate<T: Scalar>(cloud: &SnapshotCloud<T>, n: usize) -> Result<WidthEstimate<T>> {
    let zero = DVector::zeros(cloud.dim());
    let mut best: Option<WidthEstimate<T>> = None;
    for basis in [
        svd_directions(cloud.points(), &zero, n),
        greedy_directions(cloud.points(), &zero, n),
    ] {
        consider(&mut best, cloud, AffineSubspace::from_orthonormal(zero.clone(), basis))?;
    }
    Ok(best.expect("at least one candidate"))
}

/// Upper estimate of `d_n` for the cloud.
pub fn affine_width_estimate<T: Scalar>(cloud: &SnapshotCloud<T>, n: usize) -> Result<WidthEstimate<T>> {
    affine_width_estimate_with(cloud, n, &[])
}

/// Like [`affine_width_estimate`], with additional caller-supplied candidates.
/// Candidates of dimension larger than `n` are truncated to `n` directions.
///
/// Offsets tried, in order: zero, the cloud mean, the midpoint of the two
/// residuals farthest apart after a first centred fit, and an iteratively
/// refined minimax centre of those residuals. Each offset is combined with
/// centred singular directions and greedy pivoting.
pub fn affine_width_estimate_with<T: Scalar>(
    cloud: &SnapshotCloud<T>,
    n: usize,
    extra: &[AffineSubspace<T>],
) -> Result<WidthEstimate<T>> {
    for w in extra {
        check_dim(cloud.dim(), w.ambient_dim())?;
    }
    let pts = cloud.points();
    let mut best: Option<WidthEstimate<T>> = None;

    // Zero offset: the same candidates as the linear estimate, so affine <= linear.
    let zero = DVector::zeros(cloud.dim());
    for basis in [svd_directions(pts, &zero, n), greedy_directions(pts, &zero, n)] {
        consider(&mut best, cloud, AffineSubspace::from_orthonormal(zero.clone(), basis))?;
    }

    let mean = cloud.mean();
    let mut first_fit: Option<WidthEstimate<T>> = None;
    for basis in [svd_directions(pts, &mean, n), greedy_directions(pts, &mean, n)] {
        consider(
            &mut first_fit,
            cloud,
            AffineSubspace::from_orthonormal(mean.clone(), basis),
        )?;
    }
    let first_fit = first_fit.expect("candidate");
    consider(&mut best, cloud, first_fit.subspace.clone())?;

    let residuals: Vec<DVector<T>> = pts
        .iter()
        .map(|p| first_fit.subspace.residual(p))
        .collect::<Result<_>>()?;

    let (i, j) = farthest_pair(&residuals);
    let mid = first_fit.subspace.offset() + (&residuals[i] + &residuals[j]).unscale(2.0);
    consider(
        &mut best,
        cloud,
        AffineSubspace::from_orthonormal(mid.clone(), first_fit.subspace.basis().to_vec()),
    )?;
    for basis in [svd_directions(pts, &mid, n), greedy_directions(pts, &mid, n)] {
        consider(&mut best, cloud, AffineSubspace::from_orthonormal(mid.clone(), basis))?;
    }

    let center = first_fit.subspace.offset() + minimax_center(&residuals);
    consider(
        &mut best,
        cloud,
        AffineSubspace::from_orthonormal(center, first_fit.subspace.basis().to_vec()),
    )?;

    for w in extra {
        let w = if w.dim() > n { w.truncated(n) } else { w.clone() };
        consider(&mut best, cloud, w)?;
    }
    Ok(best.expect("candidate"))
}

/// Linear and affine estimates for `n = 0..=n_max` with a monotone cleanup
/// pass: each entry is replaced by the best entry at any smaller `n`.
pub fn width_profile<T: Scalar>(cloud: &SnapshotCloud<T>, n_max: usize) -> Result<WidthProfile<T>> {
    width_profile_with(cloud, n_max, |_| Vec::new())
}

/// [`width_profile`] with extra affine candidates supplied per `n`.
pub fn width_profile_with<T, F>(cloud: &SnapshotCloud<T>, n_max: usize, extra: F) -> Result<WidthProfile<T>>
where
    T: Scalar,
    F: Fn(usize) -> Vec<AffineSubspace<T>>,
{
    let mut entries: Vec<WidthEntry<T>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let lin = linear_width_estimate(cloud, n)?;
        let mut aff = affine_width_estimate_with(cloud, n, &extra(n))?;
        if lin.residual < aff.residual {
            aff = lin.clone();
        }
        let mut entry = WidthEntry {
            n,
            linear_estimate: lin.residual,
            affine_estimate: aff.residual,
            linear_subspace: lin.subspace,
            affine_subspace: aff.subspace,
        };
        if let Some(prev) = entries.last() {
            if prev.linear_estimate < entry.linear_estimate {
                entry.linear_estimate = prev.linear_estimate;
                entry.linear_subspace = prev.linear_subspace.clone();
            }
            if prev.affine_estimate < entry.affine_estimate {
                entry.affine_estimate = prev.affine_estimate;
                entry.affine_subspace = prev.affine_subspace.clone();
            }
        }
        entries.push(entry);
    }
    Ok(WidthProfile { entries })
}

fn consider<T: Scalar>(
    best: &mut Option<WidthEstimate<T>>,
    cloud: &SnapshotCloud<T>,
    subspace: AffineSubspace<T>,
) -> Result<()> {
    let residual = set_distance(cloud.points(), &subspace)?;
    if best.as_ref().is_none_or(|b| residual < b.residual) {
        *best = Some(WidthEstimate { subspace, residual });
    }
    Ok(())
}

/// Top-`n` left singular directions of the matrix with columns `p - offset`.
fn svd_directions<T: Scalar>(points: &[DVector<T>], offset: &DVector<T>, n: usize) -> Vec<DVector<T>> {
    let dim = offset.len();
    if n == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(dim, points.len(), |r, c| points[c][r] - offset[r]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
            .then(a.cmp(&b))
    });
    let mut basis = Vec::new();
    for &k in order.iter().take(n) {
        if svd.singular_values[k] == 0.0 {
            break;
        }
        extend_orthonormal(&mut basis, &u.column(k).into_owned(), 0.0);
    }
    basis
}

/// Greedy pivoting: repeatedly add the residual direction of the worst
/// approximated point (smallest index on ties).
fn greedy_directions<T: Scalar>(points: &[DVector<T>], offset: &DVector<T>, n: usize) -> Vec<DVector<T>> {
    let mut residuals: Vec<DVector<T>> = points.iter().map(|p| p - offset).collect();
    let mut basis: Vec<DVector<T>> = Vec::new();
    while basis.len() < n {
        let mut worst = 0;
        let mut worst_norm = residuals[0].norm();
        for (i, r) in residuals.iter().enumerate().skip(1) {
            let nr = r.norm();
            if nr > worst_norm {
                worst = i;
                worst_norm = nr;
            }
        }
        if worst_norm == 0.0 {
            break;
        }
        let pivot = residuals[worst].clone();
        if !extend_orthonormal(&mut basis, &pivot, 0.0) {
            break;
        }
        let q = basis.last().expect("just pushed");
        for r in residuals.iter_mut() {
            let c = inner(q, r);
            r.axpy(-c, q, T::one());
        }
    }
    basis
}

fn farthest_pair<T: Scalar>(points: &[DVector<T>]) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_d = -1.0;
    for i in 0..points.len() {
        for j in i..points.len() {
            let d = (&points[i] - &points[j]).norm();
            if d > best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    best
}

/// Approximate centre of the smallest enclosing ball (Badoiu-Clarkson
/// iteration), returning the best iterate seen.
fn minimax_center<T: Scalar>(points: &[DVector<T>]) -> DVector<T> {
    let radius_at = |c: &DVector<T>| {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - c).norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    };
    let mut center = points[0].clone();
    let mut best = center.clone();
    let mut best_r = f64::INFINITY;
    for k in 1..=CENTER_ITERATIONS {
        let (far, r) = radius_at(&center);
        if r < best_r {
            best_r = r;
            best = center.clone();
        }
        let step = 1.0 / (k as f64 + 1.0);
        center = &center + (&points[far] - &center).scale(step);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: &[&[f64]]) -> SnapshotCloud<f64> {
        SnapshotCloud::new(points.iter().map(|p| DVector::from_column_slice(p)).collect(), "t").unwrap()
    }

    #[test]
    fn empty_cloud_rejected() {
        assert_eq!(SnapshotCloud::<f64>::new(vec![], "e").unwrap_err(), Error::EmptySet);
        assert!(SnapshotCloud::new(
            vec![DVector::from_vec(vec![1.0]), DVector::from_vec(vec![1.0, 2.0])],
            "m"
        )
        .is_err());
    }

    #[test]
    fn linear_examples() {
        let c = cloud(&[&[1.0, 0.0], &[2.0, 0.0], &[-1.0, 0.0]]);
        assert!(linear_width_estimate(&c, 1).unwrap().residual < 1e-15);
        let c = cloud(&[&[0.0, 1.0], &[0.0, -1.0]]);
        assert_eq!(linear_width_estimate(&c, 0).unwrap().residual, 1.0);
    }

    #[test]
    fn linear_matches_exhaustive_angle_search() {
        let c = cloud(&[&[2.0, 1.0], &[2.0, -1.0], &[-2.0, 0.0]]);
        // exhaustive search over theta in [0, pi) with step 1e-5
        let mut brute = f64::INFINITY;
        let steps = (std::f64::consts::PI / 1e-5) as usize;
        for k in 0..steps {
            let t = k as f64 * 1e-5;
            let (s, co) = t.sin_cos();
            let worst = c
                .points()
                .iter()
                .map(|p| (p[0] * s - p[1] * co).abs())
                .fold(0.0, f64::max);
            brute = brute.min(worst);
        }
        let est = linear_width_estimate(&c, 1).unwrap().residual;
        assert!(est >= brute - 1e-9);
        // the leading singular direction is the x-axis, which is also the
        // minimax line
        assert!((brute - 1.0).abs() < 1e-9);
        assert!((est - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_examples() {
        let c = cloud(&[&[0.0, 5.0], &[2.0, 5.0]]);
        assert!(affine_width_estimate(&c, 1).unwrap().residual < 1e-14);

        let c = cloud(&[&[0.0, 0.0], &[0.0, 2.0]]);
        let e = affine_width_estimate(&c, 0).unwrap();
        assert!((e.residual - 1.0).abs() < 1e-15);
        assert!((e.subspace.offset() - DVector::from_vec(vec![0.0, 1.0])).norm() < 1e-15);

        let c = cloud(&[&[3.0, -7.0, 1.0]]);
        assert_eq!(affine_width_estimate(&c, 0).unwrap().residual, 0.0);
    }

    #[test]
    fn profile_examples() {
        let c = cloud(&[&[1.0, 2.0], &[-0.5, -1.0], &[3.0, 6.0]]);
        let p = width_profile(&c, 2).unwrap();
        assert_eq!(p.entries.len(), 3);
        assert!(p.entries[1].linear_estimate < 1e-14);
        assert!(p.entries[2].linear_estimate < 1e-14);

        let sq = cloud(&[&[1.0, 1.0], &[1.0, -1.0], &[-1.0, 1.0], &[-1.0, -1.0]]);
        let p = width_profile(&sq, 0).unwrap();
        let r2 = 2f64.sqrt();
        assert!((p.entries[0].linear_estimate - r2).abs() < 1e-15);
        assert!((p.entries[0].affine_estimate - r2).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<_> = (0..10)
            .map(|_| DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let p = width_profile(&SnapshotCloud::new(pts, "r").unwrap(), 4).unwrap();
        assert!(p.entries[4].affine_estimate < 1e-12);
    }

    #[test]
    fn complex_cloud_on_a_complex_line() {
        let dir = DVector::from_vec(vec![C64::new(1.0, 0.5), C64::new(0.0, -1.0), C64::new(2.0, 0.0)]);
        let off = DVector::from_vec(vec![C64::new(0.3, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 1.0)]);
        let pts: Vec<_> = [C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.5, -0.5)]
            .iter()
            .map(|&z| &off + dir.scale(1.0) * z)
            .collect();
        let c = SnapshotCloud::new(pts, "c").unwrap();
        assert!(affine_width_estimate(&c, 1).unwrap().residual < 1e-12);
        assert!(linear_width_estimate(&c, 1).unwrap().residual > 1e-3);
    }

    #[test]
    fn extra_candidate_can_win() {
        let c = cloud(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0]]);
        let plane = AffineSubspace::linear(
            3,
            &[
                DVector::from_vec(vec![1.0, 0.0, 0.0]),
                DVector::from_vec(vec![0.0, 1.0, 0.0]),
            ],
        )
        .unwrap();
        let e = affine_width_estimate_with(&c, 2, &[plane]).unwrap();
        assert!(e.residual < 1e-15);
        // truncated to n = 1 directions
        let e1 = affine_width_estimate_with(
            &c,
            1,
            &[AffineSubspace::linear(3, &[DVector::from_vec(vec![0.0, 1.0, 0.0])]).unwrap()],
        )
        .unwrap();
        assert!(e1.subspace.dim() <= 1);
    }
}
