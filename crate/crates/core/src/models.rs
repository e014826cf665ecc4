//! Galerkin truncations of two bilinear PDE control systems.
//!
//! * Euler-Bernoulli beam on `[0, L]`, simply supported, with a control acting
//!   on the segment `[z1, z2]`. The state of mode `n` is `(xi_n, eta_n)` with
//!   `xi_n = omega_n q_n` and `eta_n = q_n'`, so the free dynamics rotate each
//!   pair at frequency `omega_n = a (pi n / L)^2`.
//! * Schrodinger equation on `[0, 1]` with potential `u(t) mu(z)`, in the
//!   Dirichlet eigenbasis `phi_k = sqrt(2) sin(pi k z)`, `lambda_k = pi^2 k^2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_composite, GaussRule};
use crate::volterra::{endpoint_exact, BilinearModel, ControlSignal, Semigroup};

pub const DEFAULT_SCHRODINGER_NODES: usize = 200;
/// Largest entry change allowed when the Schrodinger quadrature is refined.
pub const SCHRODINGER_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub length: f64,
    pub stiffness: f64,
    pub z1: f64,
    pub z2: f64,
    pub n_modes: usize,
}

impl BeamSpec {
    pub fn new(length: f64, stiffness: f64, z1: f64, z2: f64, n_modes: usize) -> Result<Self> {
        let spec = Self {
            length,
            stiffness,
            z1,
            z2,
            n_modes,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Actuator over the whole beam.
    pub fn full_segment(length: f64, stiffness: f64, n_modes: usize) -> Result<Self> {
        Self::new(length, stiffness, 0.0, length, n_modes)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beam length must be positive, got {}",
                self.length
            )));
        }
        if !(self.stiffness > 0.0) || !self.stiffness.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "stiffness a must be positive, got {}",
                self.stiffness
            )));
        }
        if !(0.0 <= self.z1 && self.z1 < self.z2 && self.z2 <= self.length) {
            return Err(Error::InvalidArgument(format!(
                "actuator segment needs 0 <= z1 < z2 <= L, got z1 = {}, z2 = {}, L = {}",
                self.z1, self.z2, self.length
            )));
        }
        if self.n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_modes(&self, n_modes: usize) -> Self {
        Self { n_modes, ..*self }
    }

    fn wavenumber(&self, n: usize) -> f64 {
        PI * n as f64 / self.length
    }

    /// `phi_n(z) = sqrt(2/L) sin(pi n z / L)`.
    pub fn phi(&self, n: usize, z: f64) -> f64 {
        (2.0 / self.length).sqrt() * (self.wavenumber(n) * z).sin()
    }

    pub fn phi_prime(&self, n: usize, z: f64) -> f64 {
        let k = self.wavenumber(n);
        (2.0 / self.length).sqrt() * k * (k * z).cos()
    }

    /// `1/a`, the norm of the control operator for a full-segment actuator.
    pub fn inverse_stiffness(&self) -> f64 {
        1.0 / self.stiffness
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamEigen {
    /// `lambda_n = (pi n / L)^4`.
    pub lambda: f64,
    /// `omega_n = a (pi n / L)^2`.
    pub omega: f64,
}

pub fn beam_eigen(spec: &BeamSpec, n: usize) -> Result<BeamEigen> {
    if n == 0 || n > spec.n_modes {
        return Err(Error::InvalidArgument(format!(
            "mode index {n} outside 1..={}",
            spec.n_modes
        )));
    }
    let k = spec.wavenumber(n);
    Ok(BeamEigen {
        lambda: k.powi(4),
        omega: spec.stiffness * k * k,
    })
}

/// Closed-form coupling matrix `b_nj = -(1/omega_j) <chi phi_j', phi_n'>`,
/// row index `n`, column index `j`, both 1-based in the formulas.
pub fn beam_b_matrix(spec: &BeamSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let (a, l) = (spec.stiffness, spec.length);
    let (z1, z2) = (spec.z1, spec.z2);
    let s = |k: f64, z: f64| (k * PI * z / l).sin();
    Ok(DMatrix::from_fn(spec.n_modes, spec.n_modes, |row, col| {
        let n = (row + 1) as f64;
        let j = (col + 1) as f64;
        if row == col {
            (z1 - z2) / (a * l) + (s(2.0 * n, z1) - s(2.0 * n, z2)) / (2.0 * a * PI * n)
        } else {
            n / (a * PI * j * (j - n)) * (s(j - n, z1) - s(j - n, z2))
                + n / (a * PI * j * (j + n)) * (s(n + j, z1) - s(n + j, z2))
        }
    }))
}

/// The same matrix by composite Gauss-Legendre quadrature of the defining
/// inner product over `[z1, z2]`.
pub fn beam_b_matrix_quadrature(spec: &BeamSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let panels = 4 * spec.n_modes.max(4);
    Ok(DMatrix::from_fn(spec.n_modes, spec.n_modes, |row, col| {
        let (n, j) = (row + 1, col + 1);
        let omega_j = spec.stiffness * spec.wavenumber(j).powi(2);
        let ip = integrate_composite(
            |z| spec.phi_prime(j, z) * spec.phi_prime(n, z),
            spec.z1,
            spec.z2,
            panels,
            16,
        );
        -ip / omega_j
    }))
}

/// State `(xi_1..xi_N, eta_1..eta_N)`, `A = (0 W; -W 0)`, `B = (0 0; b 0)`.
pub fn beam_model(spec: &BeamSpec) -> Result<BilinearModel<f64>> {
    let n = spec.n_modes;
    let b = beam_b_matrix(spec)?;
    let frequencies: Vec<f64> = (1..=n)
        .map(|k| beam_eigen(spec, k).map(|e| e.omega))
        .collect::<Result<_>>()?;
    let mut a_mat = DMatrix::zeros(2 * n, 2 * n);
    let mut b_mat = DMatrix::zeros(2 * n, 2 * n);
    for (k, &w) in frequencies.iter().enumerate() {
        a_mat[(k, n + k)] = w;
        a_mat[(n + k, k)] = -w;
    }
    b_mat.view_mut((n, 0), (n, n)).copy_from(&b);
    BilinearModel::with_semigroup(a_mat, b_mat, Semigroup::Rotation { frequencies }, 1.0, 0.0)
}

/// First mode displaced: `xi_1 = 1`, everything else zero.
pub fn beam_default_x0(spec: &BeamSpec) -> DVector<f64> {
    let mut x = DVector::zeros(2 * spec.n_modes);
    x[0] = 1.0;
    x
}

/// Real dipolar moment on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DipoleMoment {
    /// `mu(z) = z`.
    Linear,
    /// Samples on the uniform grid `z_i = i / (len - 1)`, interpolated linearly.
    Tabulated(Vec<f64>),
}

impl DipoleMoment {
    pub fn validate(&self) -> Result<()> {
        if let DipoleMoment::Tabulated(v) = self {
            if v.len() < 2 || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(
                    "tabulated mu needs at least two finite samples".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            DipoleMoment::Linear => z,
            DipoleMoment::Tabulated(v) => {
                let cells = v.len() - 1;
                let t = (z.clamp(0.0, 1.0) * cells as f64).min(cells as f64);
                let i = (t.floor() as usize).min(cells - 1);
                let f = t - i as f64;
                v[i] * (1.0 - f) + v[i + 1] * f
            }
        }
    }

    /// `|mu|_{L^2(0,1)}`, exact for both variants.
    pub fn l2_norm(&self) -> f64 {
        match self {
            DipoleMoment::Linear => (1.0f64 / 3.0).sqrt(),
            DipoleMoment::Tabulated(v) => {
                let h = 1.0 / (v.len() - 1) as f64;
                v.windows(2)
                    .map(|p| h * (p[0] * p[0] + p[0] * p[1] + p[1] * p[1]) / 3.0)
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Breakpoints of the integrand; quadrature panels never straddle them.
    fn panels(&self) -> Vec<f64> {
        match self {
            DipoleMoment::Linear => vec![0.0, 1.0],
            DipoleMoment::Tabulated(v) => (0..v.len()).map(|i| i as f64 / (v.len() - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerSpec {
    pub mu: DipoleMoment,
    pub n_modes: usize,
    /// Total Gauss-Legendre nodes on `[0, 1]` for the coupling integrals.
    pub quad_nodes: usize,
}

impl SchrodingerSpec {
    pub fn new(mu: DipoleMoment, n_modes: usize) -> Result<Self> {
        let spec = Self {
            mu,
            n_modes,
            quad_nodes: DEFAULT_SCHRODINGER_NODES,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.mu.validate()?;
        if self.n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
        }
        if self.quad_nodes == 0 {
            return Err(Error::InvalidArgument("quad_nodes must be at least 1".into()));
        }
        if !(self.mu.l2_norm() > 0.0) {
            return Err(Error::InvalidArgument("mu must have positive L2 norm".into()));
        }
        Ok(())
    }

    pub fn with_modes(&self, n_modes: usize) -> Self {
        Self {
            n_modes,
            ..self.clone()
        }
    }

    pub fn mu_l2(&self) -> f64 {
        self.mu.l2_norm()
    }
}

/// `lambda_k = pi^2 k^2`.
pub fn schrodinger_eigenvalue(k: usize) -> f64 {
    PI * PI * (k * k) as f64
}

/// `phi_k(z) = sqrt(2) sin(pi k z)`.
pub fn schrodinger_phi(k: usize, z: f64) -> f64 {
    2f64.sqrt() * (PI * k as f64 * z).sin()
}

/// `<mu phi_j, phi_k>` with `nodes` Gauss-Legendre points spread over the
/// breakpoint panels of `mu`.
fn dipole_matrix(spec: &SchrodingerSpec, nodes: usize) -> DMatrix<f64> {
    let breaks = spec.mu.panels();
    let per_panel = nodes.div_ceil(breaks.len() - 1).max(2);
    let rules: Vec<GaussRule> = breaks
        .windows(2)
        .map(|p| GaussRule::new(per_panel, p[0], p[1]))
        .collect();
    let n = spec.n_modes;
    let mut m = DMatrix::zeros(n, n);
    for rule in &rules {
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let phis: Vec<f64> = (1..=n).map(|k| schrodinger_phi(k, z)).collect();
            let wm = w * spec.mu.eval(z);
            for j in 0..n {
                for k in j..n {
                    m[(j, k)] += wm * phis[j] * phis[k];
                }
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            m[(j, k)] = m[(k, j)];
        }
    }
    m
}

/// Real symmetric matrix `<mu phi_j, phi_k>`, with the node-doubling check.
pub fn schrodinger_dipole_matrix(spec: &SchrodingerSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let coarse = dipole_matrix(spec, spec.quad_nodes);
    let fine = dipole_matrix(spec, 2 * spec.quad_nodes);
    let change = (&fine - &coarse).abs().max();
    if change > SCHRODINGER_QUAD_TOL {
        return Err(Error::QuadratureNonConvergence { change });
    }
    Ok(coarse)
}

/// `A = diag(-i lambda_k)`, `B_jk = i <mu phi_j, phi_k>`.
pub fn schrodinger_model(spec: &SchrodingerSpec) -> Result<BilinearModel<Complex64>> {
    let d = schrodinger_dipole_matrix(spec)?;
    let n = spec.n_modes;
    let rates: Vec<Complex64> = (1..=n)
        .map(|k| Complex64::new(0.0, -schrodinger_eigenvalue(k)))
        .collect();
    let a = DMatrix::from_diagonal(&DVector::from_vec(rates.clone()));
    let b = d.map(|v| Complex64::new(0.0, v));
    BilinearModel::with_semigroup(a, b, Semigroup::Diagonal { rates }, 1.0, 0.0)
}

/// Ground state `phi_1`.
pub fn schrodinger_default_x0(spec: &SchrodingerSpec) -> DVector<Complex64> {
    let mut x = DVector::zeros(spec.n_modes);
    x[0] = Complex64::new(1.0, 0.0);
    x
}

/// Endpoint deviation between the `N`-mode and `2N`-mode beam truncations
/// for the default initial state and control `u`.
pub fn beam_truncation_deviation(spec: &BeamSpec, u: &ControlSignal) -> Result<f64> {
    let n = spec.n_modes;
    let fine_spec = spec.with_modes(2 * n);
    let coarse = endpoint_exact(&beam_model(spec)?, &beam_default_x0(spec), u)?;
    let fine = endpoint_exact(&beam_model(&fine_spec)?, &beam_default_x0(&fine_spec), u)?;
    let mut embedded = DVector::zeros(4 * n);
    embedded.rows_mut(0, n).copy_from(&coarse.rows(0, n));
    embedded.rows_mut(2 * n, n).copy_from(&coarse.rows(n, n));
    Ok((fine - embedded).norm())
}

/// Endpoint deviation between the `N`-mode and `2N`-mode Schrodinger
/// truncations for the ground state and control `u`.
pub fn schrodinger_truncation_deviation(spec: &SchrodingerSpec, u: &ControlSignal) -> Result<f64> {
    let n = spec.n_modes;
    let fine_spec = spec.with_modes(2 * n);
    let coarse = endpoint_exact(&schrodinger_model(spec)?, &schrodinger_default_x0(spec), u)?;
    let fine = endpoint_exact(&schrodinger_model(&fine_spec)?, &schrodinger_default_x0(&fine_spec), u)?;
    let mut embedded = DVector::zeros(2 * n);
    embedded.rows_mut(0, n).copy_from(&coarse);
    Ok((fine - embedded).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn beam_eigen_examples() {
        let s = BeamSpec::full_segment(PI, 1.0, 4).unwrap();
        assert!((beam_eigen(&s, 3).unwrap().omega - 9.0).abs() < 1e-12);
        let s1 = BeamSpec::full_segment(1.0, 1.0, 4).unwrap();
        assert!((beam_eigen(&s1, 2).unwrap().lambda - 16.0 * PI.powi(4)).abs() < 1e-9);
        assert!(beam_eigen(&s, 0).is_err());
        assert!(beam_eigen(&s, 5).is_err());
    }

    #[test]
    fn beam_eigenfunctions_orthonormal() {
        let s = BeamSpec::full_segment(2.0, 1.0, 5).unwrap();
        for n in 1..=5 {
            for m in 1..=5 {
                let ip = integrate_composite(|z| s.phi(n, z) * s.phi(m, z), 0.0, 2.0, 8, 16);
                let expect = if n == m { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "({n},{m}) {ip}");
            }
        }
    }

    #[test]
    fn full_segment_b_is_scaled_identity() {
        let s = BeamSpec::full_segment(PI, 2.0, 10).unwrap();
        let b = beam_b_matrix(&s).unwrap();
        assert!((b + DMatrix::identity(10, 10) * 0.5).abs().max() < 1e-14);
        let m = beam_model(&s).unwrap();
        assert!((m.b_norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_form_b_matches_quadrature() {
        let s = BeamSpec::new(1.0, 1.0, 0.25, 0.75, 3).unwrap();
        let (c, q) = (beam_b_matrix(&s).unwrap(), beam_b_matrix_quadrature(&s).unwrap());
        assert!((c[(0, 1)] - q[(0, 1)]).abs() < 1e-10);
        assert!((c[(1, 1)] - q[(1, 1)]).abs() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let l = rng.random_range(0.5..4.0);
            let mut z = [rng.random_range(0.0..l), rng.random_range(0.0..l)];
            z.sort_by(f64::total_cmp);
            let s = BeamSpec::new(l, rng.random_range(0.2..3.0), z[0], z[1], 30).unwrap();
            let d = (beam_b_matrix(&s).unwrap() - beam_b_matrix_quadrature(&s).unwrap())
                .abs()
                .max();
            assert!(d < 1e-9, "{d}");
        }
    }

    #[test]
    fn beam_single_mode_is_rotation() {
        let s = BeamSpec::full_segment(PI, 1.0, 1).unwrap();
        let m = beam_model(&s).unwrap();
        assert_eq!(m.a_matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let t = 0.7;
        let r = m.semigroup_matrix(t);
        let expect = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
        assert!((r - expect).abs().max() < 1e-15);
    }

    #[test]
    fn beam_semigroup_matches_expm_and_is_isometric() {
        let s = BeamSpec::new(PI, 0.8, 0.3, 2.1, 6).unwrap();
        let m = beam_model(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let t = rng.random_range(0.0..10.0);
            let v = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
            let exact = m.semigroup_apply(t, &v);
            let dense = expm(&(m.a_matrix() * t)) * &v;
            assert!((exact.clone() - dense).norm() < 1e-10);
            assert!((exact.norm() / v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn free_beam_conserves_energy() {
        let s = BeamSpec::full_segment(PI, 1.0, 4).unwrap();
        let m = beam_model(&s).unwrap();
        let x0 = DVector::from_vec(vec![1.0, 0.5, 0.0, -0.2, 0.3, 0.0, 0.1, 0.0]);
        let x = endpoint_exact(&m, &x0, &ControlSignal::zero(3.0, 6).unwrap()).unwrap();
        assert!((x.norm() - x0.norm()).abs() < 1e-12);
    }

    #[test]
    fn beam_kernel_matches_dense_products() {
        let s = BeamSpec::new(PI, 1.0, 0.5, 2.0, 3).unwrap();
        let m = beam_model(&s).unwrap();
        let x0 = beam_default_x0(&s);
        let (t, s1, s2) = (1.0, 0.2, 0.65);
        let w = crate::volterra::kernel_eval(&m, &x0, t, &[s1, s2]).unwrap();
        let e = |dt: f64| expm(&(m.a_matrix() * dt));
        let direct = e(t - s2) * m.b_matrix() * e(s2 - s1) * m.b_matrix() * e(s1) * &x0;
        assert!((w - direct).norm() < 1e-12);
    }

    #[test]
    fn schrodinger_examples() {
        let s = SchrodingerSpec::new(DipoleMoment::Linear, 6).unwrap();
        assert_eq!(schrodinger_eigenvalue(3), 9.0 * PI * PI);
        let d = schrodinger_dipole_matrix(&s).unwrap();
        assert!((d[(0, 0)] - 0.5).abs() < 1e-10);
        // <z phi_1, phi_2> = -16 / (9 pi^2)
        assert!((d[(0, 1)] + 16.0 / (9.0 * PI * PI)).abs() < 1e-12);
        let m = schrodinger_model(&s).unwrap();
        let b = m.b_matrix();
        for j in 0..6 {
            for k in 0..6 {
                assert_eq!(b[(j, k)], b[(k, j)]);
                assert_eq!(b[(j, k)].re, 0.0);
            }
        }
        assert!((s.mu_l2() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(m.b_norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn schrodinger_free_evolution_is_phase() {
        let s = SchrodingerSpec::new(DipoleMoment::Linear, 4).unwrap();
        let m = schrodinger_model(&s).unwrap();
        let x0 = schrodinger_default_x0(&s);
        let t = 0.37;
        let x = endpoint_exact(&m, &x0, &ControlSignal::zero(t, 3).unwrap()).unwrap();
        let phase = Complex64::new(0.0, -PI * PI * t).exp();
        assert!((x[0] - phase).norm() < 1e-10);
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schrodinger_norm_conserved_under_control() {
        let s = SchrodingerSpec::new(DipoleMoment::Linear, 8).unwrap();
        let m = schrodinger_model(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x0 = DVector::from_fn(8, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let u = ControlSignal::new(0.5, (0..20).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let x = endpoint_exact(&m, &x0, &u).unwrap();
        assert!((x.norm() - x0.norm()).abs() < 1e-9);
    }

    #[test]
    fn tabulated_mu() {
        let tab = DipoleMoment::Tabulated((0..=10).map(|i| i as f64 / 10.0).collect());
        assert!((tab.l2_norm() - DipoleMoment::Linear.l2_norm()).abs() < 1e-15);
        let s_tab = SchrodingerSpec::new(tab, 5).unwrap();
        let s_lin = SchrodingerSpec::new(DipoleMoment::Linear, 5).unwrap();
        let d = schrodinger_dipole_matrix(&s_tab).unwrap() - schrodinger_dipole_matrix(&s_lin).unwrap();
        assert!(d.abs().max() < 1e-12);
        assert!(DipoleMoment::Tabulated(vec![1.0]).validate().is_err());
    }

    #[test]
    fn under_resolved_quadrature_is_reported() {
        let s = SchrodingerSpec {
            mu: DipoleMoment::Linear,
            n_modes: 20,
            quad_nodes: 8,
        };
        assert!(matches!(
            schrodinger_dipole_matrix(&s),
            Err(Error::QuadratureNonConvergence { .. })
        ));
    }

    #[test]
    fn truncation_deviation_shrinks() {
        let u = ControlSignal::new(0.5, vec![0.8, -0.4, 0.3, 0.1]).unwrap();
        let s = BeamSpec::new(PI, 1.0, 0.4, 1.9, 4).unwrap();
        let d4 = beam_truncation_deviation(&s, &u).unwrap();
        let d8 = beam_truncation_deviation(&s.with_modes(8), &u).unwrap();
        assert!(d8 < d4, "{d8} vs {d4}");
        let q = SchrodingerSpec::new(DipoleMoment::Linear, 4).unwrap();
        let e4 = schrodinger_truncation_deviation(&q, &u).unwrap();
        assert!(e4.is_finite() && e4 < 0.1);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(BeamSpec::new(1.0, 1.0, 0.5, 0.5, 3).is_err());
        assert!(BeamSpec::new(1.0, 0.0, 0.0, 1.0, 3).is_err());
        assert!(BeamSpec::new(1.0, 1.0, 0.0, 1.5, 3).is_err());
        assert!(BeamSpec::new(1.0, 1.0, 0.0, 1.0, 0).is_err());
        assert!(SchrodingerSpec::new(DipoleMoment::Linear, 0).is_err());
        assert!(SchrodingerSpec::new(DipoleMoment::Tabulated(vec![0.0, 0.0]), 2).is_err());
    }
}
