//! Operators `pi(x) = l0 + pi0 x + F(x)` between finite-dimensional spaces and
//! the constructive inequalities bounding the width of `pi(K)`.
//!
//! Every check builds an explicit subspace
//! (the image `l0 + pi0(W)` of a near-optimal subspace for `K`, possibly
//! enlarged by a subspace approximating `F(K)`) and compares the sup-distance
//! of the image samples to it with the right-hand side of the estimate. Since
//! width estimates are upper bounds realised by concrete subspaces, these
//! comparisons hold literally, not just up to estimator slack.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{all_finite, sigma_max, Scalar};
use crate::subspaces::{set_distance, subspace_sum, AffineSubspace};
use crate::widths::{affine_width_estimate, linear_width_estimate, SnapshotCloud};
use crate::INEQUALITY_TOL;

/// The nonlinear part `F` of an operator.
pub trait NonlinearMap<T>: Send + Sync {
    fn eval(&self, x: &DVector<T>) -> DVector<T>;
}

impl<T, F> NonlinearMap<T> for F
where
    F: Fn(&DVector<T>) -> DVector<T> + Send + Sync,
{
    fn eval(&self, x: &DVector<T>) -> DVector<T> {
        self(x)
    }
}

#[derive(Clone)]
pub struct OperatorSpec<T: Scalar> {
    ell0: DVector<T>,
    pi0: DMatrix<T>,
    pi0_norm: f64,
    nonlinear: Arc<dyn NonlinearMap<T>>,
    sup_bound: Option<f64>,
    lipschitz: Option<f64>,
}

impl<T: Scalar> std::fmt::Debug for OperatorSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("input_dim", &self.input_dim())
            .field("output_dim", &self.output_dim())
            .field("pi0_norm", &self.pi0_norm)
            .field("sup_bound", &self.sup_bound)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl<T: Scalar> OperatorSpec<T> {
    pub fn new(ell0: DVector<T>, pi0: DMatrix<T>, nonlinear: impl NonlinearMap<T> + 'static) -> Result<Self> {
        check_dim(ell0.len(), pi0.nrows())?;
        let pi0_norm = sigma_max(&pi0);
        if !pi0_norm.is_finite() {
            return Err(Error::InvalidArgument("linear part has non-finite norm".into()));
        }
        Ok(Self {
            ell0,
            pi0,
            pi0_norm,
            nonlinear: Arc::new(nonlinear),
            sup_bound: None,
            lipschitz: None,
        })
    }

    /// Affine operator (`F = 0`).
    pub fn affine(ell0: DVector<T>, pi0: DMatrix<T>) -> Result<Self> {
        let out = ell0.len();
        Self::new(ell0, pi0, move |_: &DVector<T>| DVector::zeros(out))
    }

    /// Declares `sup_{x in K} |F(x)| <= bound`; checked against every sample set.
    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    pub fn with_lipschitz(mut self, mu: f64) -> Self {
        self.lipschitz = Some(mu);
        self
    }

    pub fn input_dim(&self) -> usize {
        self.pi0.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.pi0.nrows()
    }

    pub fn ell0(&self) -> &DVector<T> {
        &self.ell0
    }

    pub fn pi0(&self) -> &DMatrix<T> {
        &self.pi0
    }

    /// Operator norm of `pi0` (largest singular value).
    pub fn pi0_norm(&self) -> f64 {
        self.pi0_norm
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn eval_nonlinear(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.input_dim(), x.len())?;
        let y = self.nonlinear.eval(x);
        if y.len() != self.output_dim() {
            return Err(Error::Evaluation(format!(
                "F returned dimension {}, expected {}",
                y.len(),
                self.output_dim()
            )));
        }
        if !all_finite(&y) {
            return Err(Error::Evaluation("F returned a non-finite value".into()));
        }
        Ok(y)
    }

    /// `max |F(x)|` over the samples, failing if a declared bound is exceeded.
    fn nonlinear_sup(&self, samples: &[DVector<T>]) -> Result<(Vec<DVector<T>>, f64)> {
        let values: Vec<DVector<T>> = samples.iter().map(|x| self.eval_nonlinear(x)).collect::<Result<_>>()?;
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if let Some(bound) = self.sup_bound {
            if sup > bound * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::Precondition(format!(
                    "declared sup bound {bound:e} on |F| exceeded by sample value {sup:e}"
                )));
            }
        }
        Ok((values, sup))
    }
}

/// `pi(x) = l0 + pi0 x + F(x)`.
pub fn apply_pi<T: Scalar>(spec: &OperatorSpec<T>, x: &DVector<T>) -> Result<DVector<T>> {
    let f = spec.eval_nonlinear(x)?;
    Ok(&spec.ell0 + &spec.pi0 * x + f)
}

/// A finite sample of a bounded set together with a radius bound.
#[derive(Debug, Clone)]
pub struct BoundedSampleSet<T: Scalar> {
    samples: SnapshotCloud<T>,
    radius_bound: f64,
}

impl<T: Scalar> BoundedSampleSet<T> {
    pub fn new(samples: SnapshotCloud<T>, radius_bound: f64) -> Result<Self> {
        if !(radius_bound >= 0.0) {
            return Err(Error::InvalidArgument("radius bound must be nonnegative".into()));
        }
        if let Some(p) = samples.points().iter().find(|p| p.norm() > radius_bound + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "sample of norm {:e} exceeds radius bound {radius_bound:e}",
                p.norm()
            )));
        }
        Ok(Self { samples, radius_bound })
    }

    /// Uses the largest sample norm as the radius bound.
    pub fn from_cloud(samples: SnapshotCloud<T>) -> Self {
        let radius_bound = samples.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
        Self { samples, radius_bound }
    }

    pub fn samples(&self) -> &SnapshotCloud<T> {
        &self.samples
    }

    pub fn radius_bound(&self) -> f64 {
        self.radius_bound
    }
}

/// `W_y = l0 + pi0(W)`.
pub fn pushforward_subspace<T: Scalar>(spec: &OperatorSpec<T>, w: &AffineSubspace<T>) -> Result<AffineSubspace<T>> {
    check_dim(spec.input_dim(), w.ambient_dim())?;
    let offset = &spec.ell0 + &spec.pi0 * w.offset();
    let images: Vec<DVector<T>> = w.basis().iter().map(|b| &spec.pi0 * b).collect();
    AffineSubspace::new(offset, &images)
}

/// Left- and right-hand side of one constructive inequality `lhs <= rhs + tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            tolerance: INEQUALITY_TOL,
        }
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.tolerance
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone)]
pub struct Lemma4Report {
    pub inequality: Inequality,
    pub r1: f64,
    pub pi0_norm: f64,
    pub nonlinear_sup: f64,
}

/// Samples within `r1` of `W` are mapped within
/// `r2 = r1 |pi0| + sup |F|` of `l0 + pi0(W)`.
pub fn lemma4_check<T: Scalar>(
    spec: &OperatorSpec<T>,
    w: &AffineSubspace<T>,
    k: &BoundedSampleSet<T>,
    r1: f64,
) -> Result<Lemma4Report> {
    if !(r1 > 0.0) {
        return Err(Error::InvalidArgument("r1 must be positive".into()));
    }
    let samples = k.samples().points();
    let farthest = set_distance(samples, w)?;
    if farthest > r1 {
        return Err(Error::Precondition(format!(
            "a sample lies at distance {farthest:e} > r1 = {r1:e} from W"
        )));
    }
    let (_, f_sup) = spec.nonlinear_sup(samples)?;
    let images: Vec<DVector<T>> = samples.iter().map(|x| apply_pi(spec, x)).collect::<Result<_>>()?;
    let wy = pushforward_subspace(spec, w)?;
    let lhs = set_distance(&images, &wy)?;
    let r2 = r1 * spec.pi0_norm + f_sup;
    Ok(Lemma4Report {
        inequality: Inequality::new(lhs, r2),
        r1,
        pi0_norm: spec.pi0_norm,
        nonlinear_sup: f_sup,
    })
}

#[derive(Debug, Clone)]
pub struct Theorem1Report {
    pub inequality: Inequality,
    pub n: usize,
    /// Affine width estimate of the samples of `K`.
    pub domain_width: f64,
    pub pi0_norm: f64,
    pub nonlinear_sup: f64,
    /// Affine width estimate of the image samples, for reference.
    pub image_width: f64,
}

/// `d_n(pi(K)) <= |pi0| d_n(K) + sup |F|`, checked through the pushforward of
/// the subspace realising the width estimate of `K`.
pub fn theorem1_check<T: Scalar>(spec: &OperatorSpec<T>, k: &BoundedSampleSet<T>, n: usize) -> Result<Theorem1Report> {
    let samples = k.samples().points();
    let fit = affine_width_estimate(k.samples(), n)?;
    let (_, f_sup) = spec.nonlinear_sup(samples)?;
    let images: Vec<DVector<T>> = samples.iter().map(|x| apply_pi(spec, x)).collect::<Result<_>>()?;
    let wy = pushforward_subspace(spec, &fit.subspace)?;
    let lhs = set_distance(&images, &wy)?;
    let image_width = affine_width_estimate(&SnapshotCloud::new(images, "image")?, n)?.residual;
    Ok(Theorem1Report {
        inequality: Inequality::new(lhs, spec.pi0_norm * fit.residual + f_sup),
        n,
        domain_width: fit.residual,
        pi0_norm: spec.pi0_norm,
        nonlinear_sup: f_sup,
        image_width,
    })
}

/// `|pi0| d_nK + mu sup_{x in K} |x|` for a Lipschitz `F` with `F(0) = 0`.
pub fn lipschitz_bound<T: Scalar>(spec: &OperatorSpec<T>, k: &BoundedSampleSet<T>, d_nk: f64) -> Result<f64> {
    let mu = spec
        .lipschitz
        .ok_or_else(|| Error::InvalidArgument("no Lipschitz constant declared".into()))?;
    let f0 = spec.eval_nonlinear(&DVector::zeros(spec.input_dim()))?;
    if f0.norm() > 1e-12 {
        return Err(Error::Precondition(format!("F(0) = {:e} is not zero", f0.norm())));
    }
    Ok(spec.pi0_norm * d_nk + mu * k.radius_bound)
}

#[derive(Debug, Clone)]
pub struct Theorem2Report {
    pub inequality: Inequality,
    pub n: usize,
    pub m: usize,
    pub domain_width: f64,
    /// Linear width estimate of the samples of `F(K)`.
    pub nonlinear_width: f64,
    pub pi0_norm: f64,
    /// Dimension of the linear part of the constructed subspace.
    pub subspace_dim: usize,
}

/// `d_{n+m}(pi(K)) <= |pi0| d_n(K) + D_m(F(K))`, checked through
/// `c + (pi0(W_n) + W_m)`.
pub fn theorem2_check<T: Scalar>(
    spec: &OperatorSpec<T>,
    k: &BoundedSampleSet<T>,
    n: usize,
    m: usize,
) -> Result<Theorem2Report> {
    let samples = k.samples().points();
    let fit = affine_width_estimate(k.samples(), n)?;
    let (f_values, _) = spec.nonlinear_sup(samples)?;
    let f_fit = linear_width_estimate(&SnapshotCloud::new(f_values, "F(K)")?, m)?;
    let combined = subspace_sum(&pushforward_subspace(spec, &fit.subspace)?, &f_fit.subspace)?;
    let images: Vec<DVector<T>> = samples.iter().map(|x| apply_pi(spec, x)).collect::<Result<_>>()?;
    let lhs = set_distance(&images, &combined)?;
    Ok(Theorem2Report {
        inequality: Inequality::new(lhs, spec.pi0_norm * fit.residual + f_fit.residual),
        n,
        m,
        domain_width: fit.residual,
        nonlinear_width: f_fit.residual,
        pi0_norm: spec.pi0_norm,
        subspace_dim: combined.dim(),
    })
}

/// Randomised instances of the constructive inequalities.
pub mod synthetic {
    use super::*;

    /// Shape of the random instances.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct TrialShape {
        pub max_input_dim: usize,
        pub max_output_dim: usize,
        pub samples: usize,
        pub radius: f64,
    }

    impl Default for TrialShape {
        fn default() -> Self {
            Self {
                max_input_dim: 5,
                max_output_dim: 5,
                samples: 50,
                radius: 1.0,
            }
        }
    }

    /// One random instance: operator with quadratic-plus-cubic `F`, samples of
    /// a ball, a random affine subspace and dimensions `n`, `m`.
    pub struct Trial {
        pub spec: OperatorSpec<f64>,
        pub set: BoundedSampleSet<f64>,
        pub subspace: AffineSubspace<f64>,
        pub n: usize,
        pub m: usize,
    }

    /// Per-trial generator seeded from `(root_seed, index)` through the
    /// ChaCha stream counter, so trials are independent of evaluation order.
    pub fn trial_rng(root_seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
        rng.set_stream(index);
        rng
    }

    pub fn random_trial(rng: &mut ChaCha8Rng, shape: &TrialShape) -> Result<Trial> {
        let dx = rng.random_range(1..=shape.max_input_dim);
        let dy = rng.random_range(1..=shape.max_output_dim);
        let gauss = |r: &mut ChaCha8Rng| -> f64 { r.sample(StandardNormal) };
        let pi0 = DMatrix::from_fn(dy, dx, |_, _| gauss(rng));
        let ell0 = DVector::from_fn(dy, |_, _| gauss(rng));
        let quad_scale = rng.random_range(0.0..1.0);
        let cubic_scale = rng.random_range(0.0..0.5);
        let quad: Vec<DMatrix<f64>> = (0..dy)
            .map(|_| DMatrix::from_fn(dx, dx, |_, _| quad_scale * gauss(rng)))
            .collect();
        let cubic = DMatrix::from_fn(dy, dx, |_, _| cubic_scale * gauss(rng));
        // |x^T Q_i x| <= |Q_i|_F |x|^2 and |x|^2 |P x| <= sigma(P) |x|^3
        let quad_frob: f64 = quad.iter().map(|q| q.norm_squared()).sum::<f64>().sqrt();
        let r = shape.radius;
        let declared = quad_frob * r * r + sigma_max(&cubic) * r.powi(3);
        let f = move |x: &DVector<f64>| {
            let sq = x.norm_squared();
            DVector::from_fn(quad.len(), |i, _| (x.transpose() * &quad[i] * x)[(0, 0)]) + (&cubic * x) * sq
        };
        let spec = OperatorSpec::new(ell0, pi0, f)?.with_sup_bound(declared);

        let points: Vec<DVector<f64>> = (0..shape.samples)
            .map(|_| {
                let g = DVector::from_fn(dx, |_, _| gauss(rng));
                let g_norm = g.norm().max(f64::MIN_POSITIVE);
                let radius = r * rng.random_range(0.0f64..1.0).powf(1.0 / dx as f64);
                g * (radius / g_norm)
            })
            .collect();
        let set = BoundedSampleSet::new(SnapshotCloud::new(points, "ball")?, r)?;

        let n = rng.random_range(0..=dx);
        let m = rng.random_range(0..=dy);
        let k = rng.random_range(0..=dx);
        let offset = DVector::from_fn(dx, |_, _| 0.5 * gauss(rng));
        let dirs: Vec<DVector<f64>> = (0..k).map(|_| DVector::from_fn(dx, |_, _| gauss(rng))).collect();
        let subspace = AffineSubspace::new(offset, &dirs)?;
        Ok(Trial {
            spec,
            set,
            subspace,
            n,
            m,
        })
    }

    #[derive(Debug, Clone, Copy, Default, PartialEq)]
    pub struct Tally {
        pub trials: usize,
        pub passed: usize,
        /// Largest `lhs - rhs` seen (negative when every trial had slack).
        pub worst_excess: f64,
    }

    impl Tally {
        fn record(&mut self, ineq: &Inequality) {
            if self.trials == 0 {
                self.worst_excess = f64::NEG_INFINITY;
            }
            self.trials += 1;
            if ineq.holds() {
                self.passed += 1;
            }
            self.worst_excess = self.worst_excess.max(ineq.lhs - ineq.rhs);
        }

        pub fn all_passed(&self) -> bool {
            self.passed == self.trials
        }
    }

    #[derive(Debug, Clone, Default, PartialEq)]
    pub struct Summary {
        pub lemma4: Tally,
        pub theorem1: Tally,
        pub theorem2: Tally,
        /// Theorem-2 constructions whose dimension exceeded `n + m`.
        pub dimension_violations: usize,
    }

    impl Summary {
        pub fn all_passed(&self) -> bool {
            self.lemma4.all_passed()
                && self.theorem1.all_passed()
                && self.theorem2.all_passed()
                && self.dimension_violations == 0
        }
    }

    struct TrialOutcome {
        lemma4: Inequality,
        theorem1: Inequality,
        theorem2: Inequality,
        dimension_ok: bool,
    }

    fn run_one(root_seed: u64, index: u64, shape: &TrialShape) -> Result<TrialOutcome> {
        let mut rng = trial_rng(root_seed, index);
        let t = random_trial(&mut rng, shape)?;
        let r1 = set_distance(t.set.samples().points(), &t.subspace)?.max(f64::MIN_POSITIVE);
        let l4 = lemma4_check(&t.spec, &t.subspace, &t.set, r1)?;
        let t1 = theorem1_check(&t.spec, &t.set, t.n)?;
        let t2 = theorem2_check(&t.spec, &t.set, t.n, t.m)?;
        Ok(TrialOutcome {
            lemma4: l4.inequality,
            theorem1: t1.inequality,
            theorem2: t2.inequality,
            dimension_ok: t2.subspace_dim <= t.n + t.m,
        })
    }

    /// Runs `trials` random instances of the Lemma-4, Theorem-1 and Theorem-2
    /// constructions.
    pub fn run_trials(root_seed: u64, trials: usize, shape: &TrialShape) -> Result<Summary> {
        let indices: Vec<u64> = (0..trials as u64).collect();
        let outcomes = crate::par_map(&indices, |&i| run_one(root_seed, i, shape));
        let mut summary = Summary::default();
        for o in outcomes {
            let o = o?;
            summary.lemma4.record(&o.lemma4);
            summary.theorem1.record(&o.theorem1);
            summary.theorem2.record(&o.theorem2);
            if !o.dimension_ok {
                summary.dimension_violations += 1;
            }
        }
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::power_iteration_norm;
    use crate::subspaces::point_distance;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn ball_samples(dim: usize, count: usize, radius: f64, seed: u64) -> BoundedSampleSet<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..count)
            .map(|_| {
                let g = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                let r = radius * rng.random_range(0.0f64..1.0).powf(1.0 / dim as f64);
                &g * (r / g.norm())
            })
            .collect();
        BoundedSampleSet::new(SnapshotCloud::new(pts, "ball").unwrap(), radius).unwrap()
    }

    #[test]
    fn apply_examples() {
        let id = OperatorSpec::affine(v(&[0.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
        assert_eq!(apply_pi(&id, &v(&[1.0, 2.0])).unwrap(), v(&[1.0, 2.0]));

        let konst = OperatorSpec::affine(v(&[1.0, 0.0]), DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(apply_pi(&konst, &v(&[7.0, -3.0])).unwrap(), v(&[1.0, 0.0]));

        let quad = OperatorSpec::new(v(&[0.0, 0.0]), DMatrix::identity(2, 2), |x: &DVector<f64>| {
            v(&[x[0] * x[0], 0.0])
        })
        .unwrap();
        assert_eq!(apply_pi(&quad, &v(&[2.0, 3.0])).unwrap(), v(&[6.0, 3.0]));
    }

    #[test]
    fn evaluation_failures() {
        let bad_dim = OperatorSpec::new(v(&[0.0, 0.0]), DMatrix::identity(2, 2), |_: &DVector<f64>| v(&[1.0])).unwrap();
        assert!(matches!(apply_pi(&bad_dim, &v(&[1.0, 1.0])), Err(Error::Evaluation(_))));
        let nan = OperatorSpec::new(v(&[0.0]), DMatrix::identity(1, 1), |_: &DVector<f64>| v(&[f64::NAN])).unwrap();
        assert!(matches!(apply_pi(&nan, &v(&[1.0])), Err(Error::Evaluation(_))));
        let id = OperatorSpec::affine(v(&[0.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            apply_pi(&id, &v(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pushforward_examples() {
        let w = AffineSubspace::new(v(&[1.0, -1.0]), &[v(&[1.0, 2.0])]).unwrap();
        let id = OperatorSpec::affine(v(&[0.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
        let p = pushforward_subspace(&id, &w).unwrap();
        let samples: Vec<_> = (-3..=3).map(|t| w.point_at(&[t as f64])).collect();
        assert!(set_distance(&samples, &p).unwrap() < 1e-12);
        let back: Vec<_> = (-3..=3).map(|t| p.point_at(&[t as f64])).collect();
        assert!(set_distance(&back, &w).unwrap() < 1e-12);

        let zero = OperatorSpec::affine(v(&[2.0, 5.0]), DMatrix::zeros(2, 2)).unwrap();
        let p = pushforward_subspace(&zero, &w).unwrap();
        assert_eq!(p.dim(), 0);
        assert_eq!(p.offset(), &v(&[2.0, 5.0]));

        let diag = OperatorSpec::affine(v(&[0.0, 0.0]), DMatrix::from_diagonal(&v(&[2.0, 0.0]))).unwrap();
        let line = AffineSubspace::linear(2, &[v(&[1.0, 1.0])]).unwrap();
        let p = pushforward_subspace(&diag, &line).unwrap();
        assert_eq!(p.dim(), 1);
        assert!((p.basis()[0][0].abs() - 1.0).abs() < 1e-15);
        assert!(p.basis()[0][1].abs() < 1e-15);
    }

    #[test]
    fn pushforward_contains_images_of_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pi0 = DMatrix::from_fn(4, 3, |_, _| rng.random_range(-1.0..1.0));
        let ell0 = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        let spec = OperatorSpec::affine(ell0.clone(), pi0.clone()).unwrap();
        let w = AffineSubspace::new(v(&[0.3, -0.2, 1.0]), &[v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, -1.0])]).unwrap();
        let p = pushforward_subspace(&spec, &w).unwrap();
        assert!(p.dim() <= w.dim());
        for _ in 0..100 {
            let c: Vec<f64> = (0..2).map(|_| rng.random_range(-5.0..5.0)).collect();
            let xi = w.point_at(&c);
            assert!(point_distance(&(&ell0 + &pi0 * xi), &p).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn lemma4_examples() {
        let k = ball_samples(2, 30, 1.0, 1);
        let w = AffineSubspace::linear(2, &[v(&[1.0, 0.0])]).unwrap();
        let r1 = set_distance(k.samples().points(), &w).unwrap();

        let id = OperatorSpec::affine(v(&[0.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
        let rep = lemma4_check(&id, &w, &k, r1).unwrap();
        assert!((rep.inequality.rhs - r1).abs() < 1e-14);
        assert!(rep.inequality.holds());

        let zero = OperatorSpec::affine(v(&[0.0, 0.0]), DMatrix::zeros(2, 2)).unwrap();
        let rep = lemma4_check(&zero, &w, &k, r1).unwrap();
        assert_eq!(rep.inequality.lhs, 0.0);
        assert_eq!(rep.inequality.rhs, 0.0);

        assert!(matches!(
            lemma4_check(&id, &w, &k, r1 * 0.5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lemma4_random_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pi0 = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let spec = OperatorSpec::new(DVector::zeros(3), pi0, |x: &DVector<f64>| {
            v(&[x[0] * x[1], x[2] * x[2], -x[0] * x[0]])
        })
        .unwrap();
        let k = ball_samples(3, 50, 1.0, 6);
        let w = AffineSubspace::new(v(&[0.1, 0.0, 0.0]), &[v(&[1.0, 1.0, 0.0])]).unwrap();
        let r1 = set_distance(k.samples().points(), &w).unwrap();
        let rep = lemma4_check(&spec, &w, &k, r1).unwrap();
        assert!(rep.inequality.holds());
        assert!(rep.inequality.slack() > 0.0);
    }

    #[test]
    fn declared_bound_violation_fails_loudly() {
        let spec = OperatorSpec::new(DVector::zeros(2), DMatrix::identity(2, 2), |x: &DVector<f64>| {
            x * x.norm()
        })
        .unwrap()
        .with_sup_bound(0.01);
        let k = ball_samples(2, 10, 1.0, 2);
        assert!(matches!(theorem1_check(&spec, &k, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn theorem1_examples() {
        // rotation: isometry, F = 0
        let (s, c) = 0.7f64.sin_cos();
        let rot = OperatorSpec::affine(v(&[1.0, 2.0]), DMatrix::from_row_slice(2, 2, &[c, -s, s, c])).unwrap();
        let k = ball_samples(2, 40, 1.0, 3);
        let rep = theorem1_check(&rot, &k, 1).unwrap();
        assert!((rep.inequality.lhs - rep.inequality.rhs).abs() < 1e-12);

        let single = BoundedSampleSet::from_cloud(SnapshotCloud::new(vec![v(&[0.5, 0.5])], "p").unwrap());
        let quad = OperatorSpec::new(v(&[0.0, 0.0]), DMatrix::identity(2, 2), |x: &DVector<f64>| {
            v(&[x.norm_squared(), 0.0])
        })
        .unwrap();
        let rep = theorem1_check(&quad, &single, 0).unwrap();
        assert!(rep.inequality.lhs <= rep.nonlinear_sup + 1e-15);

        // quadratic F with |F| <= r^2 on the unit ball
        let rep = theorem1_check(&quad.clone().with_sup_bound(1.0), &k, 1).unwrap();
        assert!(rep.inequality.holds());
        assert!(rep.image_width <= rep.inequality.lhs + 1e-12);
    }

    #[test]
    fn lipschitz_examples() {
        let k = ball_samples(2, 5, 2.0, 4);
        let zero_mu = OperatorSpec::affine(DVector::zeros(2), DMatrix::from_diagonal(&v(&[3.0, 1.0])))
            .unwrap()
            .with_lipschitz(0.0);
        assert!((lipschitz_bound(&zero_mu, &k, 0.5).unwrap() - 1.5).abs() < 1e-14);

        let pure = OperatorSpec::new(DVector::zeros(2), DMatrix::zeros(2, 2), |x: &DVector<f64>| {
            x.map(f64::sin)
        })
        .unwrap()
        .with_lipschitz(1.0);
        assert!((lipschitz_bound(&pure, &k, 0.3).unwrap() - 2.0).abs() < 1e-14);

        let k1 = BoundedSampleSet::new(k.samples().clone(), 2.0).unwrap();
        let mixed = OperatorSpec::new(
            DVector::zeros(2),
            DMatrix::from_diagonal(&v(&[3.0, 1.0])),
            |x: &DVector<f64>| x * 0.2,
        )
        .unwrap()
        .with_lipschitz(0.2);
        let unit = BoundedSampleSet::new(ball_samples(2, 5, 1.0, 9).samples().clone(), 1.0).unwrap();
        assert!((lipschitz_bound(&mixed, &unit, 0.5).unwrap() - 1.7).abs() < 1e-14);
        assert!((lipschitz_bound(&mixed, &k1, 0.5).unwrap() - 1.9).abs() < 1e-14);

        let undeclared = OperatorSpec::affine(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        assert!(lipschitz_bound(&undeclared, &k, 0.1).is_err());
        let shifted = OperatorSpec::new(DVector::zeros(1), DMatrix::identity(1, 1), |x: &DVector<f64>| {
            x.add_scalar(1.0)
        })
        .unwrap()
        .with_lipschitz(1.0);
        let k1d = BoundedSampleSet::from_cloud(SnapshotCloud::new(vec![v(&[0.0])], "z").unwrap());
        assert!(matches!(
            lipschitz_bound(&shifted, &k1d, 0.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn theorem2_examples() {
        let k = ball_samples(3, 40, 1.0, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pi0 = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let affine = OperatorSpec::affine(DVector::zeros(3), pi0.clone()).unwrap();
        let r2 = theorem2_check(&affine, &k, 1, 0).unwrap();
        let r1 = theorem1_check(&affine, &k, 1).unwrap();
        assert!((r2.inequality.rhs - r1.inequality.rhs).abs() < 1e-14);
        assert!(r2.inequality.holds());

        let pure = OperatorSpec::new(DVector::zeros(3), DMatrix::zeros(3, 3), |x: &DVector<f64>| {
            v(&[x[0] * x[1], x[1], x[2] * x[2]])
        })
        .unwrap();
        let rep = theorem2_check(&pure, &k, 0, 1).unwrap();
        assert!(rep.inequality.lhs <= rep.nonlinear_width + 1e-12);

        // F(x) = |x|^2 e1 lies on a ray: one direction captures it exactly
        let cone = OperatorSpec::new(DVector::zeros(3), pi0, |x: &DVector<f64>| {
            v(&[x.norm_squared(), 0.0, 0.0])
        })
        .unwrap();
        let rep = theorem2_check(&cone, &k, 1, 1).unwrap();
        assert!(rep.nonlinear_width < 1e-12);
        assert!(rep.inequality.holds());
        assert!(rep.subspace_dim <= 2);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let pi0 = DMatrix::from_fn(4, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
            let spec = OperatorSpec::affine(DVector::zeros(4), pi0.clone()).unwrap();
            let p = power_iteration_norm(&pi0, 100_000);
            assert!((spec.pi0_norm() - p).abs() <= 1e-8 * p);
        }
    }

    #[test]
    fn synthetic_trials_pass() {
        let s = synthetic::run_trials(7, 60, &synthetic::TrialShape::default()).unwrap();
        assert_eq!(s.lemma4.trials, 60);
        assert!(s.all_passed(), "{s:?}");
    }

    #[test]
    fn trials_are_order_independent() {
        let shape = synthetic::TrialShape::default();
        let a = synthetic::random_trial(&mut synthetic::trial_rng(3, 17), &shape).unwrap();
        let b = synthetic::random_trial(&mut synthetic::trial_rng(3, 17), &shape).unwrap();
        assert_eq!(a.set.samples().points(), b.set.samples().points());
        assert_eq!(a.n, b.n);
    }
}
