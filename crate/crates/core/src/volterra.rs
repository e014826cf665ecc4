//! Volterra series of the endpoint map of `x' = (A + u(t) B) x`.
//!
//! For a piecewise-constant control the terms `V_k(T; u)` are computed through
//! the triangular chain
//!
//! ```text
//! x_0' = A x_0,              x_0(0) = x0,
//! x_k' = A x_k + u B x_{k-1}, x_k(0) = 0,
//! ```
//!
//! whose solution satisfies `x_k(T) = V_k(T; u)`. Within a control cell the
//! chain is integrated by variation of constants in the interaction picture
//! `z_k(s) = e^{-sA} x_k(t_i + s)`, which obeys
//! `z_k(s) = z_k(0) + u_i int_0^s e^{-sA} B e^{sA} z_{k-1}`; the integral is
//! evaluated by Gauss-Legendre collocation on the cell.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{expm, sigma_max, Scalar};
use crate::quadrature::gauss_legendre;

pub const DEFAULT_SERIES_ORDER: usize = 8;
pub const DEFAULT_CELL_NODES: usize = 32;
/// Largest phase `2 rho(A) h` swept by the collocation rule on one sub-cell.
pub const MAX_SUBCELL_PHASE: f64 = 8.0;

/// Exact action of the semigroup `e^{tA}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Semigroup<T: Scalar> {
    /// State `(xi_1..xi_N, eta_1..eta_N)` with generator blocks
    /// `(0 w_n; -w_n 0)` on `(xi_n, eta_n)`.
    Rotation { frequencies: Vec<f64> },
    /// Diagonal generator: coordinate `k` is multiplied by `exp(t d_k)`.
    Diagonal { rates: Vec<T> },
    /// General generator; `e^{tA}` by scaling and squaring.
    Dense,
}

/// `M`, `omega` with `|e^{tA}| <= M e^{omega t}`, and `|B|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    pub m: f64,
    pub omega: f64,
    pub b_norm: f64,
}

impl GrowthConstants {
    /// `q = M |B| sqrt(T) r`; the series bounds need `q < 1`.
    pub fn q(&self, horizon: f64, r: f64) -> f64 {
        self.m * self.b_norm * horizon.sqrt() * r
    }
}

#[derive(Debug, Clone)]
pub struct BilinearModel<T: Scalar> {
    a_matrix: DMatrix<T>,
    b_matrix: DMatrix<T>,
    semigroup: Semigroup<T>,
    constants: GrowthConstants,
}

impl<T: Scalar> BilinearModel<T> {
    /// Model with a general generator and caller-supplied growth constants.
    pub fn dense(a: DMatrix<T>, b: DMatrix<T>, m: f64, omega: f64) -> Result<Self> {
        Self::with_semigroup(a, b, Semigroup::Dense, m, omega)
    }

    pub fn with_semigroup(a: DMatrix<T>, b: DMatrix<T>, semigroup: Semigroup<T>, m: f64, omega: f64) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::InvalidArgument(
                "generator must be a nonempty square matrix".into(),
            ));
        }
        check_dim(n, b.nrows())?;
        check_dim(n, b.ncols())?;
        match &semigroup {
            Semigroup::Rotation { frequencies } => check_dim(n, 2 * frequencies.len())?,
            Semigroup::Diagonal { rates } => check_dim(n, rates.len())?,
            Semigroup::Dense => {}
        }
        if !(m >= 1.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "growth constants M = {m}, omega = {omega}"
            )));
        }
        let b_norm = sigma_max(&b);
        Ok(Self {
            a_matrix: a,
            b_matrix: b,
            semigroup,
            constants: GrowthConstants { m, omega, b_norm },
        })
    }

    pub fn dim(&self) -> usize {
        self.a_matrix.nrows()
    }

    pub fn a_matrix(&self) -> &DMatrix<T> {
        &self.a_matrix
    }

    pub fn b_matrix(&self) -> &DMatrix<T> {
        &self.b_matrix
    }

    pub fn semigroup(&self) -> &Semigroup<T> {
        &self.semigroup
    }

    pub fn constants(&self) -> GrowthConstants {
        self.constants
    }

    pub fn b_norm(&self) -> f64 {
        self.constants.b_norm
    }

    /// Spectral radius of the generator (for dense generators, `|A|`).
    pub fn generator_radius(&self) -> f64 {
        match &self.semigroup {
            Semigroup::Rotation { frequencies } => frequencies.iter().fold(0.0, |m, w| m.max(w.abs())),
            Semigroup::Diagonal { rates } => rates.iter().fold(0.0, |m, d| m.max(d.modulus())),
            Semigroup::Dense => sigma_max(&self.a_matrix),
        }
    }

    /// `e^{tA} v`. Negative `t` is allowed (all generators here are
    /// finite-dimensional, so the semigroup extends to a group).
    pub fn semigroup_apply(&self, t: f64, v: &DVector<T>) -> DVector<T> {
        match &self.semigroup {
            Semigroup::Rotation { frequencies } => {
                let n = frequencies.len();
                let mut out = v.clone();
                for (k, &w) in frequencies.iter().enumerate() {
                    let (s, c) = (w * t).sin_cos();
                    let (xi, eta) = (v[k], v[n + k]);
                    out[k] = xi * T::lift(c) + eta * T::lift(s);
                    out[n + k] = eta * T::lift(c) - xi * T::lift(s);
                }
                out
            }
            Semigroup::Diagonal { rates } => DVector::from_fn(v.len(), |k, _| v[k] * (rates[k] * T::lift(t)).exp()),
            Semigroup::Dense => expm(&(&self.a_matrix * T::lift(t))) * v,
        }
    }

    /// `e^{tA}` as a matrix.
    pub fn semigroup_matrix(&self, t: f64) -> DMatrix<T> {
        match &self.semigroup {
            Semigroup::Dense => expm(&(&self.a_matrix * T::lift(t))),
            _ => {
                let n = self.dim();
                let mut m = DMatrix::zeros(n, n);
                for j in 0..n {
                    let mut e = DVector::zeros(n);
                    e[j] = T::one();
                    m.set_column(j, &self.semigroup_apply(t, &e));
                }
                m
            }
        }
    }
}

/// Piecewise-constant control on a uniform grid of `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    horizon: f64,
    values: Vec<f64>,
    l2_norm: f64,
}

impl ControlSignal {
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if values.is_empty() || values.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidArgument(
                "control needs at least one finite cell value".into(),
            ));
        }
        let dt = horizon / values.len() as f64;
        let l2_norm = (values.iter().map(|u| u * u).sum::<f64>() * dt).sqrt();
        Ok(Self {
            horizon,
            values,
            l2_norm,
        })
    }

    pub fn zero(horizon: f64, cells: usize) -> Result<Self> {
        Self::new(horizon, vec![0.0; cells])
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn cell_width(&self) -> f64 {
        self.horizon / self.values.len() as f64
    }

    /// `|u|_{L^2(0,T)}`.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.horizon, self.values.iter().map(|u| u * s).collect()).expect("scaling keeps validity")
    }

    /// Value on the cell containing `t` (right-continuous, last cell closed).
    pub fn value_at(&self, t: f64) -> f64 {
        let i = ((t / self.cell_width()).floor() as usize).min(self.values.len() - 1);
        self.values[i]
    }
}

/// Volterra kernel
/// `w_k(t, s_1..s_k) = e^{(t-s_k)A} B e^{(s_k-s_{k-1})A} B ... B e^{s_1 A} x0`.
pub fn kernel_eval<T: Scalar>(model: &BilinearModel<T>, x0: &DVector<T>, t: f64, sigmas: &[f64]) -> Result<DVector<T>> {
    check_dim(model.dim(), x0.len())?;
    if sigmas.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::InvalidArgument("kernel times must be sorted".into()));
    }
    if sigmas.iter().any(|&s| s < 0.0 || s > t) {
        return Err(Error::InvalidArgument(format!("kernel times must lie in [0, {t}]")));
    }
    let mut prev = 0.0;
    let mut v = x0.clone();
    for &s in sigmas {
        v = &model.b_matrix * model.semigroup_apply(s - prev, &v);
        prev = s;
    }
    Ok(model.semigroup_apply(t - prev, &v))
}

/// `e^{TA} x0` and the terms `V_1..V_K` at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraExpansion<T: Scalar> {
    pub zeroth: DVector<T>,
    pub terms: Vec<DVector<T>>,
}

impl<T: Scalar> VolterraExpansion<T> {
    /// `e^{TA} x0 + V_1 + ... + V_k`.
    pub fn partial_sum(&self, k: usize) -> DVector<T> {
        let mut s = self.zeroth.clone();
        for v in self.terms.iter().take(k) {
            s += v;
        }
        s
    }

    pub fn endpoint(&self) -> DVector<T> {
        self.partial_sum(self.terms.len())
    }

    /// `V_2 + ... + V_K`, the truncated nonlinear part of the endpoint map.
    pub fn nonlinear_part(&self) -> DVector<T> {
        let mut s = DVector::zeros(self.zeroth.len());
        for v in self.terms.iter().skip(1) {
            s += v;
        }
        s
    }
}

/// Precomputed per-cell data for one model, grid and series order; reusable
/// across controls. Each control cell is split into equal sub-cells so that
/// `e^{-sA} B e^{sA}`, whose frequencies are at most `2 rho(A)`, turns by at
/// most [`MAX_SUBCELL_PHASE`] radians across one sub-cell.
#[derive(Debug, Clone)]
pub struct VolterraSolver<T: Scalar> {
    horizon: f64,
    cells: usize,
    order: usize,
    substeps: usize,
    /// `e^{hA}` for the sub-cell width `h`.
    step: DMatrix<T>,
    /// `e^{-s_q A} B e^{s_q A}` at the collocation nodes.
    rotated_b: Vec<DMatrix<T>>,
    weights: Vec<f64>,
    /// `integration[(p, q)] = int_0^{s_p} l_q`, Lagrange basis `l_q` on the nodes.
    integration: DMatrix<f64>,
}

impl<T: Scalar> VolterraSolver<T> {
    pub fn new(model: &BilinearModel<T>, horizon: f64, cells: usize, order: usize, nodes: usize) -> Result<Self> {
        if !(horizon > 0.0) || cells == 0 || order == 0 || nodes == 0 {
            return Err(Error::InvalidArgument(
                "need horizon > 0, cells >= 1, order >= 1, nodes >= 1".into(),
            ));
        }
        let cell = horizon / cells as f64;
        let substeps = ((2.0 * model.generator_radius() * cell / MAX_SUBCELL_PHASE).ceil() as usize).max(1);
        let h = cell / substeps as f64;
        let (x, w) = gauss_legendre(nodes);
        let s: Vec<f64> = x.iter().map(|xi| 0.5 * h * (1.0 + xi)).collect();
        let rotated_b = s
            .iter()
            .map(|&sq| model.semigroup_matrix(-sq) * &model.b_matrix * model.semigroup_matrix(sq))
            .collect();
        let integration = lagrange_integration_matrix(&x, &w) * (0.5 * h);
        Ok(Self {
            horizon,
            cells,
            order,
            substeps,
            step: model.semigroup_matrix(h),
            rotated_b,
            weights: w.iter().map(|wi| 0.5 * h * wi).collect(),
            integration,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn expand(&self, x0: &DVector<T>, u: &ControlSignal) -> Result<VolterraExpansion<T>> {
        check_dim(self.step.nrows(), x0.len())?;
        if u.cells() != self.cells || (u.horizon() - self.horizon).abs() > 1e-12 * self.horizon {
            return Err(Error::InvalidArgument(format!(
                "control grid ({} cells on [0, {}]) does not match solver grid ({} cells on [0, {}])",
                u.cells(),
                u.horizon(),
                self.cells,
                self.horizon
            )));
        }
        let dim = x0.len();
        let nodes = self.weights.len();
        let mut ys: Vec<DVector<T>> = std::iter::once(x0.clone())
            .chain((0..self.order).map(|_| DVector::zeros(dim)))
            .collect();
        let mut z_nodes: Vec<DVector<T>> = vec![DVector::zeros(dim); nodes];
        let mut forcing: Vec<DVector<T>> = vec![DVector::zeros(dim); nodes];
        for &c in u.values().iter().flat_map(|c| std::iter::repeat_n(c, self.substeps)) {
            if c != 0.0 {
                let c = T::lift(c);
                for z in z_nodes.iter_mut() {
                    z.copy_from(&ys[0]);
                }
                for (k, y) in ys.iter_mut().enumerate().skip(1) {
                    for (g, (b, z)) in forcing.iter_mut().zip(self.rotated_b.iter().zip(&z_nodes)) {
                        g.gemv(T::one(), b, z, T::zero());
                    }
                    let mut end = y.clone();
                    for (g, &w) in forcing.iter().zip(&self.weights) {
                        end.axpy(c * T::lift(w), g, T::one());
                    }
                    if k < self.order {
                        for (p, z) in z_nodes.iter_mut().enumerate() {
                            z.copy_from(y);
                            for (q, g) in forcing.iter().enumerate() {
                                z.axpy(c * T::lift(self.integration[(p, q)]), g, T::one());
                            }
                        }
                    }
                    *y = end;
                }
            }
            for y in ys.iter_mut() {
                *y = &self.step * &*y;
            }
        }
        let zeroth = ys.remove(0);
        Ok(VolterraExpansion { zeroth, terms: ys })
    }
}

/// `Q[p][q] = int_{-1}^{x_p} l_q(x) dx` for the Lagrange basis on the
/// Gauss nodes `x`, by the same Gauss rule mapped to `[-1, x_p]` (exact for
/// the degree `n - 1` basis polynomials).
fn lagrange_integration_matrix(x: &[f64], w: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let bary: Vec<f64> = (0..n)
        .map(|q| 1.0 / (0..n).filter(|&j| j != q).map(|j| x[q] - x[j]).product::<f64>())
        .collect();
    let basis_at = |t: f64| -> Vec<f64> {
        if let Some(hit) = x.iter().position(|&xj| xj == t) {
            let mut e = vec![0.0; n];
            e[hit] = 1.0;
            return e;
        }
        let terms: Vec<f64> = (0..n).map(|j| bary[j] / (t - x[j])).collect();
        let denom: f64 = terms.iter().sum();
        terms.iter().map(|v| v / denom).collect()
    };
    let mut q = DMatrix::zeros(n, n);
    for p in 0..n {
        let half = 0.5 * (x[p] + 1.0);
        for r in 0..n {
            let t = -1.0 + half * (x[r] + 1.0);
            let l = basis_at(t);
            for (qi, lq) in l.iter().enumerate() {
                q[(p, qi)] += half * w[r] * lq;
            }
        }
    }
    q
}

/// `e^{TA} x0` and `V_1..V_{k_max}` for the control `u`, with `nodes`
/// collocation points per control cell.
pub fn volterra_terms<T: Scalar>(
    model: &BilinearModel<T>,
    x0: &DVector<T>,
    u: &ControlSignal,
    k_max: usize,
    nodes: usize,
) -> Result<VolterraExpansion<T>> {
    VolterraSolver::new(model, u.horizon(), u.cells(), k_max, nodes)?.expand(x0, u)
}

/// `|V_k(t; u)| <= M e^{omega t} |x0| (M |B| sqrt(t) |u|)^k`.
pub fn term_bound(constants: &GrowthConstants, x0_norm: f64, t: f64, u_l2: f64, k: usize) -> f64 {
    let q = constants.m * constants.b_norm * t.sqrt() * u_l2;
    constants.m * (constants.omega * t).exp() * x0_norm * q.powi(k as i32)
}

/// `sum_{k >= k_start} M e^{omega T} |x0| q^k = M e^{omega T} |x0| q^{k_start} / (1 - q)`
/// with `q = M |B| sqrt(T) r`. For `k_start = 2` this bounds the nonlinear
/// part of the endpoint map over controls with `|u| <= r`.
pub fn tail_bound(constants: &GrowthConstants, x0_norm: f64, horizon: f64, r: f64, k_start: usize) -> Result<f64> {
    let q = constants.q(horizon, r);
    if !(q < 1.0) {
        return Err(Error::Divergent { q });
    }
    Ok(constants.m * (constants.omega * horizon).exp() * x0_norm * q.powi(k_start as i32) / (1.0 - q))
}

/// Exact endpoint for a piecewise-constant control: the product of
/// `exp(h (A + u_i B))` over the cells in time order.
pub fn endpoint_exact<T: Scalar>(model: &BilinearModel<T>, x0: &DVector<T>, u: &ControlSignal) -> Result<DVector<T>> {
    check_dim(model.dim(), x0.len())?;
    let h = u.cell_width();
    let mut x = x0.clone();
    for &c in u.values() {
        let generator = (&model.a_matrix + &model.b_matrix * T::lift(c)) * T::lift(h);
        x = expm(&generator) * x;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussRule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_model(a: f64, b: f64) -> BilinearModel<f64> {
        BilinearModel::dense(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            1.0,
            a.max(0.0),
        )
        .unwrap()
    }

    fn random_dense(dim: usize, seed: u64) -> BilinearModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let b = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        // |e^{tA}| <= e^{|A| t}
        let omega = sigma_max(&a);
        BilinearModel::dense(a, b, 1.0, omega).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let zero_b = BilinearModel::dense(DMatrix::identity(2, 2), DMatrix::zeros(2, 2), 1.0, 1.0).unwrap();
        let w = kernel_eval(&zero_b, &DVector::from_vec(vec![1.0, 2.0]), 1.0, &[0.3]).unwrap();
        assert_eq!(w.norm(), 0.0);

        let m = scalar_model(0.0, 1.7);
        for k in 1..5 {
            let sig: Vec<f64> = (0..k).map(|i| 0.1 * i as f64).collect();
            let w = kernel_eval(&m, &DVector::from_element(1, 1.0), 1.0, &sig).unwrap();
            assert!((w[0] - 1.7f64.powi(k)).abs() < 1e-13);
        }

        assert!(kernel_eval(&m, &DVector::from_element(1, 1.0), 1.0, &[0.5, 0.2]).is_err());
        assert!(kernel_eval(&m, &DVector::from_element(1, 1.0), 1.0, &[1.5]).is_err());
    }

    #[test]
    fn scalar_terms_are_exponential_series() {
        let m = scalar_model(0.0, 1.0);
        let u = ControlSignal::new(1.0, vec![1.0; 4]).unwrap();
        let e = volterra_terms(&m, &DVector::from_element(1, 1.0), &u, 8, DEFAULT_CELL_NODES).unwrap();
        let mut fact = 1.0;
        for k in 1..=8 {
            fact *= k as f64;
            assert!((e.terms[k - 1][0] - 1.0 / fact).abs() < 1e-13, "k={k}");
        }
        assert!((e.terms[0][0] - 1.0).abs() < 1e-14);
        assert!((e.terms[1][0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_control_has_no_terms() {
        let m = random_dense(3, 1);
        let x0 = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let u = ControlSignal::zero(2.0, 5).unwrap();
        let e = volterra_terms(&m, &x0, &u, 4, 8).unwrap();
        assert!(e.terms.iter().all(|v| v.norm() == 0.0));
        assert!((e.zeroth.clone() - m.semigroup_apply(2.0, &x0)).norm() < 1e-12);
        assert!((endpoint_exact(&m, &x0, &u).unwrap() - m.semigroup_apply(2.0, &x0)).norm() < 1e-12);
    }

    #[test]
    fn first_term_matches_first_order_kernel_quadrature() {
        let m = random_dense(3, 2);
        let x0 = DVector::from_vec(vec![0.2, 1.0, -0.4]);
        let u = ControlSignal::new(1.0, vec![0.5, -1.0, 2.0]).unwrap();
        let e = volterra_terms(&m, &x0, &u, 1, 16).unwrap();
        let h = u.cell_width();
        let mut direct = DVector::zeros(3);
        for (i, &c) in u.values().iter().enumerate() {
            let rule = GaussRule::new(12, i as f64 * h, (i + 1) as f64 * h);
            for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                direct += kernel_eval(&m, &x0, 1.0, &[s]).unwrap() * (w * c);
            }
        }
        assert!((e.terms[0].clone() - direct).norm() < 1e-12);
    }

    /// Direct k-fold simplex quadrature of the kernels for a piecewise
    /// constant control.
    fn simplex_quadrature(
        m: &BilinearModel<f64>,
        x0: &DVector<f64>,
        u: &ControlSignal,
        k: usize,
        n: usize,
    ) -> DVector<f64> {
        #[allow(clippy::too_many_arguments)]
        fn recurse(
            m: &BilinearModel<f64>,
            x0: &DVector<f64>,
            u: &ControlSignal,
            n: usize,
            upper: f64,
            depth: usize,
            later: &mut Vec<f64>,
            weight: f64,
            acc: &mut DVector<f64>,
        ) {
            if depth == 0 {
                let mut sig = later.clone();
                sig.reverse();
                *acc += kernel_eval(m, x0, u.horizon(), &sig).unwrap() * weight;
                return;
            }
            // split [0, upper] at cell boundaries so the integrand is smooth per piece
            let h = u.cell_width();
            for i in 0..u.cells() {
                let lo = i as f64 * h;
                if lo >= upper {
                    break;
                }
                let hi = ((i + 1) as f64 * h).min(upper);
                let rule = GaussRule::new(n, lo, hi);
                for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                    later.push(s);
                    recurse(m, x0, u, n, s, depth - 1, later, weight * w * u.values()[i], acc);
                    later.pop();
                }
            }
        }
        let mut acc = DVector::zeros(x0.len());
        recurse(m, x0, u, n, u.horizon(), k, &mut vec![], 1.0, &mut acc);
        acc
    }

    #[test]
    fn chain_matches_direct_simplex_quadrature() {
        let m = random_dense(2, 3);
        let x0 = DVector::from_vec(vec![1.0, 0.3]);
        let u = ControlSignal::new(0.8, vec![1.2, -0.7]).unwrap();
        let e = volterra_terms(&m, &x0, &u, 3, DEFAULT_CELL_NODES).unwrap();
        let v2 = simplex_quadrature(&m, &x0, &u, 2, 10);
        assert!(
            (e.terms[1].clone() - &v2).norm() < 1e-11,
            "{}",
            (e.terms[1].clone() - &v2).norm()
        );
        let v3 = simplex_quadrature(&m, &x0, &u, 3, 7);
        assert!(
            (e.terms[2].clone() - &v3).norm() < 1e-10,
            "{}",
            (e.terms[2].clone() - &v3).norm()
        );
    }

    #[test]
    fn terms_are_homogeneous_in_the_control() {
        let m = random_dense(3, 4);
        let x0 = DVector::from_vec(vec![1.0, 0.0, -1.0]);
        let u = ControlSignal::new(1.0, vec![0.3, -0.2, 0.5, 0.1]).unwrap();
        let base = volterra_terms(&m, &x0, &u, 5, 12).unwrap();
        for s in [-1.5, 0.5, 2.0] {
            let scaled = volterra_terms(&m, &x0, &u.scaled(s), 5, 12).unwrap();
            for k in 1..=5 {
                let expect = &base.terms[k - 1] * s.powi(k as i32);
                assert!((scaled.terms[k - 1].clone() - &expect).norm() <= 1e-13 * (1.0 + expect.norm()));
            }
        }
    }

    #[test]
    fn term_and_tail_bounds() {
        let c = GrowthConstants {
            m: 1.0,
            omega: 0.0,
            b_norm: 1.0,
        };
        assert!((term_bound(&c, 1.0, 1.0, 0.5, 2) - 0.25).abs() < 1e-16);
        assert_eq!(term_bound(&c, 1.0, 1.0, 0.0, 3), 0.0);
        assert!((tail_bound(&c, 1.0, 1.0, 0.5, 2).unwrap() - 0.5).abs() < 1e-16);
        assert_eq!(tail_bound(&c, 1.0, 1.0, 0.0, 2).unwrap(), 0.0);
        let t = tail_bound(&c, 2.0, 1.0, 0.9, 5).unwrap();
        assert!((t - 2.0 * 0.9f64.powi(5) / 0.1).abs() < 1e-12);
        assert!(matches!(tail_bound(&c, 1.0, 1.0, 1.0, 2), Err(Error::Divergent { .. })));

        // the scalar example satisfies |V_k| = 1/k! <= 1
        let m = scalar_model(0.0, 1.0);
        let u = ControlSignal::new(1.0, vec![1.0; 2]).unwrap();
        let e = volterra_terms(&m, &DVector::from_element(1, 1.0), &u, 6, 16).unwrap();
        for (k, v) in e.terms.iter().enumerate() {
            assert!(v.norm() <= term_bound(&m.constants(), 1.0, 1.0, u.l2_norm(), k + 1) + 1e-10);
        }
    }

    #[test]
    fn exact_endpoint_scalar_closed_form() {
        let m = scalar_model(-0.4, 0.7);
        let u = ControlSignal::new(1.5, vec![0.8; 6]).unwrap();
        let x = endpoint_exact(&m, &DVector::from_element(1, 2.0), &u).unwrap();
        assert!((x[0] - 2.0 * ((-0.4 + 0.8 * 0.7) * 1.5f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn series_converges_to_exact_endpoint() {
        let m = random_dense(3, 5);
        let x0 = DVector::from_vec(vec![0.5, 0.5, -1.0]);
        let u = ControlSignal::new(0.5, vec![0.4, -0.3, 0.2, 0.6]).unwrap();
        let exact = endpoint_exact(&m, &x0, &u).unwrap();
        let e = volterra_terms(&m, &x0, &u, 10, 16).unwrap();
        let c = m.constants();
        let r = u.l2_norm();
        for k in 1..=9 {
            let err = (e.partial_sum(k) - &exact).norm();
            let tail = tail_bound(&c, x0.norm(), 0.5, r, k + 1).unwrap();
            assert!(err <= tail + 1e-12, "k={k}: {err} > {tail}");
        }
    }

    #[test]
    fn stiff_generator_is_subdivided() {
        let freqs = vec![40.0, 90.0];
        let mut a = DMatrix::zeros(4, 4);
        for (k, &w) in freqs.iter().enumerate() {
            a[(k, 2 + k)] = w;
            a[(2 + k, k)] = -w;
        }
        let b = DMatrix::from_fn(4, 4, |i, j| {
            if i >= 2 && j < 2 {
                0.3 + 0.1 * (i + j) as f64
            } else {
                0.0
            }
        });
        let m = BilinearModel::with_semigroup(a, b, Semigroup::Rotation { frequencies: freqs }, 1.0, 0.0).unwrap();
        let u = ControlSignal::new(1.0, vec![0.7, -0.5]).unwrap();
        let solver = VolterraSolver::new(&m, 1.0, 2, 10, DEFAULT_CELL_NODES).unwrap();
        assert!(solver.substeps() >= 12);
        let x0 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.5]);
        let e = solver.expand(&x0, &u).unwrap();
        let exact = endpoint_exact(&m, &x0, &u).unwrap();
        let tail = tail_bound(&m.constants(), x0.norm(), 1.0, u.l2_norm(), 11).unwrap();
        assert!((e.endpoint() - exact).norm() <= tail + 1e-10);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let m = scalar_model(0.0, 1.0);
        let solver = VolterraSolver::new(&m, 1.0, 4, 2, 4).unwrap();
        let u = ControlSignal::new(1.0, vec![1.0; 3]).unwrap();
        assert!(solver.expand(&DVector::from_element(1, 1.0), &u).is_err());
        assert!(ControlSignal::new(0.0, vec![1.0]).is_err());
        assert!(ControlSignal::new(1.0, vec![]).is_err());
    }

    #[test]
    fn control_norm_is_cached_l2() {
        let u = ControlSignal::new(2.0, vec![1.0, -2.0, 0.0, 3.0]).unwrap();
        assert!((u.l2_norm() - (14.0f64 * 0.5).sqrt()).abs() < 1e-15);
    }
}
