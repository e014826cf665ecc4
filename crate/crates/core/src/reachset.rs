//! Admissible control sets, endpoint clouds of the reachable set, and the
//! comparison of empirical widths with the closed-form bounds.
//!
//! The control set `K` is the ball of radius `r` in the span of `m`
//! orthonormal piecewise-constant functions on `[0, T]`. The endpoint map
//! splits as `u -> l0 + pi0(u) + F(u)` with `l0 = e^{TA} x0` and
//! `pi0(u) = V_1(T; u)`; the constructive subspace for `n` is
//! `l0 + span{pi0(b_j)}` over `min(n, m)` chosen basis functions `b_j`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds::{corollary1_bound, corollary2_bound, theorem3_bound, BoundReport};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{gram_deviation, orthonormalize, Scalar};
use crate::par_map;
use crate::subspaces::{set_distance, AffineSubspace};
use crate::volterra::{endpoint_exact, tail_bound, BilinearModel, ControlSignal, VolterraSolver, DEFAULT_CELL_NODES};
use crate::widths::{width_profile_with, SnapshotCloud};

/// Tolerance on `constructive_residual <= bound`.
pub const BOUND_TOL: f64 = 1e-8;
/// Tolerance on `affine_width_est <= constructive_residual`.
pub const ESTIMATE_TOL: f64 = 1e-10;
/// Largest allowed deviation of the realized basis Gram matrix from identity.
pub const GRAM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    /// Legendre polynomials `P_0..P_{m-1}` rescaled to `[0, T]`.
    Legendre,
    /// `1, cos(2 pi t/T), sin(2 pi t/T), cos(4 pi t/T), ...`.
    Fourier,
    /// Indicators of `m` contiguous blocks of cells.
    Indicator,
}

impl BasisFamily {
    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::Legendre => "legendre",
            BasisFamily::Fourier => "fourier",
            BasisFamily::Indicator => "indicator",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "legendre" => Some(BasisFamily::Legendre),
            "fourier" => Some(BasisFamily::Fourier),
            "indicator" => Some(BasisFamily::Indicator),
            _ => None,
        }
    }
}

/// Cell values of `m` functions orthonormal in the piecewise-constant
/// `L^2(0, T)` inner product.
pub fn realize_basis(family: BasisFamily, horizon: f64, cells: usize, m: usize) -> Result<Vec<Vec<f64>>> {
    if !(horizon > 0.0) || cells == 0 || m == 0 {
        return Err(Error::InvalidArgument("need T > 0, cells >= 1, m >= 1".into()));
    }
    if m > cells {
        return Err(Error::InvalidArgument(format!(
            "m = {m} exceeds the {cells} grid cells"
        )));
    }
    let dt = horizon / cells as f64;
    let mid = |i: usize| (i as f64 + 0.5) / cells as f64;
    let raw: Vec<DVector<f64>> = (0..m)
        .map(|k| {
            DVector::from_fn(cells, |i, _| {
                let s = mid(i);
                match family {
                    BasisFamily::Legendre => legendre(k, 2.0 * s - 1.0),
                    BasisFamily::Fourier => {
                        let freq = 2.0 * std::f64::consts::PI * k.div_ceil(2) as f64 * s;
                        if k == 0 {
                            1.0
                        } else if k % 2 == 1 {
                            freq.cos()
                        } else {
                            freq.sin()
                        }
                    }
                    BasisFamily::Indicator => {
                        let lo = k * cells / m;
                        let hi = (k + 1) * cells / m;
                        if (lo..hi).contains(&i) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            }) * dt.sqrt()
        })
        .collect();
    let ortho = orthonormalize(raw.iter(), 1.0);
    if ortho.len() < m {
        return Err(Error::InvalidArgument(format!(
            "{} basis is degenerate on {cells} cells for m = {m}",
            family.name()
        )));
    }
    let dev = gram_deviation(&ortho);
    if dev > GRAM_TOL {
        return Err(Error::Evaluation(format!("realized basis Gram deviation {dev:e}")));
    }
    Ok(ortho
        .iter()
        .map(|v| v.iter().map(|x| x / dt.sqrt()).collect())
        .collect())
}

fn legendre(k: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return p0;
    }
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Ball of radius `r` in the span of `m` realized basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    horizon: f64,
    cells: usize,
    family: BasisFamily,
    radius: f64,
    sample_count: usize,
    seed: u64,
    basis: Vec<ControlSignal>,
}

impl ControlSet {
    pub fn new(
        horizon: f64,
        cells: usize,
        family: BasisFamily,
        m: usize,
        radius: f64,
        sample_count: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius must be finite and nonnegative, got {radius}"
            )));
        }
        let basis = realize_basis(family, horizon, cells, m)?
            .into_iter()
            .map(|v| ControlSignal::new(horizon, v))
            .collect::<Result<_>>()?;
        Ok(Self {
            horizon,
            cells,
            family,
            radius,
            sample_count,
            seed,
            basis,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn basis(&self) -> &[ControlSignal] {
        &self.basis
    }

    /// The control `sum_j c_j b_j`.
    pub fn control(&self, coefficients: &[f64]) -> Result<ControlSignal> {
        check_dim(self.m(), coefficients.len())?;
        let mut values = vec![0.0; self.cells];
        for (c, b) in coefficients.iter().zip(&self.basis) {
            for (v, bv) in values.iter_mut().zip(b.values()) {
                *v += c * bv;
            }
        }
        ControlSignal::new(self.horizon, values)
    }
}

/// `d_n(K)` for the ball: `r` below the ball's dimension, `0` from it on.
pub fn known_control_width(k: &ControlSet, n: usize) -> f64 {
    if n < k.m() {
        k.radius
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSamples {
    pub coefficients: Vec<Vec<f64>>,
    pub signals: Vec<ControlSignal>,
}

/// `+-r b_j` for every basis function, then `sample_count` points uniform in
/// the coefficient ball, all determined by the seed.
pub fn sample_controls(k: &ControlSet) -> Result<ControlSamples> {
    let m = k.m();
    let r = k.radius;
    let mut coefficients = Vec::with_capacity(2 * m + k.sample_count);
    for j in 0..m {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; m];
            c[j] = sign * r;
            coefficients.push(c);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(k.seed);
    for _ in 0..k.sample_count {
        let g: Vec<f64> = loop {
            let g: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            if g.iter().any(|x: &f64| *x != 0.0) {
                break g;
            }
        };
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u: f64 = rng.random();
        let rad = r * u.powf(1.0 / m as f64);
        coefficients.push(g.iter().map(|x| x / norm * rad).collect());
    }
    let signals = coefficients.iter().map(|c| k.control(c)).collect::<Result<_>>()?;
    Ok(ControlSamples { coefficients, signals })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMethod {
    /// Volterra series truncated after `order` terms.
    Series { order: usize },
    /// Per-cell matrix exponentials.
    Oracle,
}

impl PropagationMethod {
    pub fn tag(self) -> String {
        match self {
            PropagationMethod::Series { order } => format!("series(K={order})"),
            PropagationMethod::Oracle => "oracle".into(),
        }
    }
}

/// Endpoints `x(T)` for each control, in input order. The series method is
/// refused when `M |B| sqrt(T) max|u| >= 1`.
pub fn propagate_cloud<T: Scalar>(
    model: &BilinearModel<T>,
    x0: &DVector<T>,
    controls: &[ControlSignal],
    method: PropagationMethod,
) -> Result<SnapshotCloud<T>> {
    check_dim(model.dim(), x0.len())?;
    let first = controls.first().ok_or(Error::EmptySet)?;
    let points = match method {
        PropagationMethod::Oracle => par_map(controls, |u| endpoint_exact(model, x0, u))
            .into_iter()
            .collect::<Result<Vec<_>>>()?,
        PropagationMethod::Series { order } => {
            let r = controls.iter().map(|u| u.l2_norm()).fold(0.0, f64::max);
            let q = model.constants().q(first.horizon(), r);
            if !(q < 1.0) {
                return Err(Error::Divergent { q });
            }
            let solver = VolterraSolver::new(model, first.horizon(), first.cells(), order, DEFAULT_CELL_NODES)?;
            par_map(controls, |u| solver.expand(x0, u).map(|e| e.endpoint()))
                .into_iter()
                .collect::<Result<Vec<_>>>()?
        }
    };
    SnapshotCloud::new(points, format!("endpoints[{}]", method.tag()))
}

/// How the `n < m` basis images spanning the constructive subspace are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionSelection {
    /// The `n` basis functions with the largest `|pi0(b_j)|`.
    Greedy,
    /// The top `n` left singular vectors of `[pi0(b_1) .. pi0(b_m)]`.
    Svd,
}

impl DirectionSelection {
    pub fn name(self) -> &'static str {
        match self {
            DirectionSelection::Greedy => "greedy",
            DirectionSelection::Svd => "svd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "greedy" => Some(DirectionSelection::Greedy),
            "svd" => Some(DirectionSelection::Svd),
            _ => None,
        }
    }
}

/// `l0 = e^{TA} x0` and `pi0(b_j) = V_1(T; b_j)` for every basis function.
#[derive(Debug, Clone)]
pub struct AffinePart<T: Scalar> {
    pub ell0: DVector<T>,
    pub basis_images: Vec<DVector<T>>,
}

pub fn affine_part<T: Scalar>(model: &BilinearModel<T>, x0: &DVector<T>, k: &ControlSet) -> Result<AffinePart<T>> {
    check_dim(model.dim(), x0.len())?;
    let solver = VolterraSolver::new(model, k.horizon, k.cells, 1, DEFAULT_CELL_NODES)?;
    let mut ell0 = None;
    let mut basis_images = Vec::with_capacity(k.m());
    for b in &k.basis {
        let e = solver.expand(x0, b)?;
        ell0.get_or_insert(e.zeroth);
        basis_images.extend(e.terms);
    }
    Ok(AffinePart {
        ell0: ell0.expect("basis is nonempty"),
        basis_images,
    })
}

/// `l0 + span` of `min(n, m)` selected basis images.
pub fn constructive_subspace<T: Scalar>(
    part: &AffinePart<T>,
    n: usize,
    selection: DirectionSelection,
) -> Result<AffineSubspace<T>> {
    let m = part.basis_images.len();
    let keep = n.min(m);
    if keep == 0 {
        return Ok(AffineSubspace::point(part.ell0.clone()));
    }
    let dirs: Vec<DVector<T>> = match selection {
        DirectionSelection::Greedy => {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| {
                part.basis_images[j]
                    .norm()
                    .total_cmp(&part.basis_images[i].norm())
                    .then(i.cmp(&j))
            });
            order[..keep].iter().map(|&j| part.basis_images[j].clone()).collect()
        }
        DirectionSelection::Svd => {
            let p = DMatrix::from_columns(&part.basis_images);
            let svd = p.svd(true, false);
            let u = svd.u.as_ref().expect("left singular vectors requested");
            let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
            idx.sort_by(|&i, &j| {
                svd.singular_values[j]
                    .total_cmp(&svd.singular_values[i])
                    .then(i.cmp(&j))
            });
            idx[..keep.min(idx.len())]
                .iter()
                .map(|&j| u.column(j).into_owned() * T::lift(svd.singular_values[j]))
                .collect()
        }
    };
    AffineSubspace::new(part.ell0.clone(), &dirs)
}

/// Sup-distance of the endpoint cloud to the constructive subspace.
pub fn constructive_residual<T: Scalar>(
    part: &AffinePart<T>,
    cloud: &SnapshotCloud<T>,
    n: usize,
    selection: DirectionSelection,
) -> Result<f64> {
    set_distance(cloud.points(), &constructive_subspace(part, n, selection)?)
}

/// Which closed-form bound a report is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundFamily {
    Theorem3 {
        m: f64,
        omega: f64,
        b_norm: f64,
    },
    /// Beam with a full-segment actuator constant `1/a`.
    Corollary1 {
        a: f64,
    },
    Corollary2 {
        mu_l2: f64,
    },
}

impl BoundFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BoundFamily::Theorem3 { .. } => "theorem3",
            BoundFamily::Corollary1 { .. } => "corollary1",
            BoundFamily::Corollary2 { .. } => "corollary2",
        }
    }

    /// `M |B|` with the constants the bound uses.
    pub fn gain(&self) -> f64 {
        match *self {
            BoundFamily::Theorem3 { m, b_norm, .. } => m * b_norm,
            BoundFamily::Corollary1 { a } => 1.0 / a,
            BoundFamily::Corollary2 { mu_l2 } => mu_l2,
        }
    }

    /// `q = M |B| sqrt(T) r`.
    pub fn q(&self, horizon: f64, r: f64) -> f64 {
        self.gain() * horizon.sqrt() * r
    }

    pub fn evaluate(&self, x0_norm: f64, horizon: f64, r: f64, d_nk: f64) -> Result<BoundReport> {
        match *self {
            BoundFamily::Theorem3 { m, omega, b_norm } => theorem3_bound(m, omega, b_norm, x0_norm, horizon, r, d_nk),
            BoundFamily::Corollary1 { a } => corollary1_bound(a, x0_norm, horizon, r, d_nk),
            BoundFamily::Corollary2 { mu_l2 } => corollary2_bound(mu_l2, x0_norm, horizon, r, d_nk),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub d_nk: f64,
    pub constructive_residual: f64,
    pub affine_width_est: f64,
    pub linear_width_est: f64,
    pub bound: BoundReport,
}

impl ReportRow {
    /// `bound - constructive_residual` when the bound is valid.
    pub fn slack(&self) -> Option<f64> {
        self.bound.value.map(|b| b - self.constructive_residual)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
    pub method: String,
    pub bound_family: &'static str,
    pub selection: &'static str,
    pub q: f64,
    pub x0_norm: f64,
    pub samples: usize,
    /// Tail bound of the truncated series, when the series method is used
    /// and converges.
    pub series_error_budget: Option<f64>,
    /// Names of the inequalities that failed.
    pub violations: Vec<String>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn all_valid(&self) -> bool {
        self.rows.iter().all(|r| r.bound.valid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub n_max: usize,
    pub method: PropagationMethod,
    pub bound: BoundFamily,
    pub selection: DirectionSelection,
}

/// Rows `n = 0..=n_max` comparing the constructive residual and the width
/// estimates of the endpoint cloud with the bound at `d_n(K)`.
pub fn compare_report<T: Scalar>(
    model: &BilinearModel<T>,
    x0: &DVector<T>,
    k: &ControlSet,
    options: &CompareOptions,
) -> Result<ComparisonReport> {
    let samples = sample_controls(k)?;
    let cloud = propagate_cloud(model, x0, &samples.signals, options.method)?;
    let part = affine_part(model, x0, k)?;
    let subspaces: Vec<AffineSubspace<T>> = (0..=options.n_max)
        .map(|n| constructive_subspace(&part, n, options.selection))
        .collect::<Result<_>>()?;
    let profile = width_profile_with(&cloud, options.n_max, |n| vec![subspaces[n].clone()])?;
    let x0_norm = x0.norm();
    let mut rows = Vec::with_capacity(options.n_max + 1);
    let mut violations = Vec::new();
    for (n, entry) in profile.entries.iter().enumerate() {
        let d_nk = known_control_width(k, n);
        let residual = set_distance(cloud.points(), &subspaces[n])?;
        let bound = options.bound.evaluate(x0_norm, k.horizon, k.radius, d_nk)?;
        if let Some(b) = bound.value {
            if !(residual <= b + BOUND_TOL) {
                violations.push(format!(
                    "constructive_residual <= bound at n={n} ({residual:e} > {b:e})"
                ));
            }
        }
        if !(entry.affine_estimate <= residual + ESTIMATE_TOL) {
            violations.push(format!(
                "affine_width_est <= constructive_residual at n={n} ({:e} > {residual:e})",
                entry.affine_estimate
            ));
        }
        rows.push(ReportRow {
            n,
            d_nk,
            constructive_residual: residual,
            affine_width_est: entry.affine_estimate,
            linear_width_est: entry.linear_estimate,
            bound,
        });
    }
    let series_error_budget = match options.method {
        PropagationMethod::Series { order } => {
            tail_bound(&model.constants(), x0_norm, k.horizon, k.radius, order + 1).ok()
        }
        PropagationMethod::Oracle => None,
    };
    Ok(ComparisonReport {
        rows,
        method: options.method.tag(),
        bound_family: options.bound.name(),
        selection: options.selection.name(),
        q: options.bound.q(k.horizon, k.radius),
        x0_norm,
        samples: cloud.len(),
        series_error_budget,
        violations,
    })
}
