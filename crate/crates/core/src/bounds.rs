//! Closed-form width bounds for reachable sets of bilinear systems.
//!
//! With `q = M |B| sqrt(T) r < 1`, the affine width of the reachable set from
//! `x0` under controls `K` with `|u| <= r` satisfies
//!
//! ```text
//! d_n(R_T(x0)) <= M^2 |B| |x0| sqrt(T) e^{wT} d_n(K)
//!               + M^3 |B|^2 |x0| T e^{wT} r^2 / (1 - q).
//! ```
//!
//! The beam (`M = 1`, `w = 0`, `|B| = 1/a`) and Schrodinger (`|B| = |mu|`)
//! bounds are evaluated from their own formulas so that the specialization
//! identities can be checked.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Theorem3,
    Corollary1,
    Corollary2,
    Pi0Norm,
    FBound,
    Lipschitz,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Theorem3 => "theorem3",
            BoundKind::Corollary1 => "corollary1",
            BoundKind::Corollary2 => "corollary2",
            BoundKind::Pi0Norm => "pi0_norm",
            BoundKind::FBound => "F_bound",
            BoundKind::Lipschitz => "lipschitz",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A bound value split as `affine_term + constant_term`. When the hypothesis
/// fails, `valid` is false and `value`/`constant_term` are unset.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub inputs: Vec<(&'static str, f64)>,
    pub value: Option<f64>,
    pub affine_term: f64,
    pub constant_term: Option<f64>,
    pub valid: bool,
    pub reason: String,
}

impl BoundReport {
    fn valid(kind: BoundKind, inputs: Vec<(&'static str, f64)>, affine_term: f64, constant_term: f64) -> Self {
        Self {
            kind,
            inputs,
            value: Some(affine_term + constant_term),
            affine_term,
            constant_term: Some(constant_term),
            valid: true,
            reason: "hypothesis holds".into(),
        }
    }

    fn invalid(kind: BoundKind, inputs: Vec<(&'static str, f64)>, affine_term: f64, reason: String) -> Self {
        Self {
            kind,
            inputs,
            value: None,
            affine_term,
            constant_term: None,
            valid: false,
            reason,
        }
    }

    pub fn input(&self, name: &str) -> Option<f64> {
        self.inputs.iter().find(|(k, _)| *k == name).map(|&(_, v)| v)
    }
}

fn check_inputs(inputs: &[(&'static str, f64)]) -> Result<()> {
    for &(name, v) in inputs {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite and nonnegative, got {v}"
            )));
        }
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// `|pi0| <= M^2 |B| |x0| sqrt(T) e^{wT}`.
pub fn pi0_norm_bound(m: f64, omega: f64, b_norm: f64, x0_norm: f64, horizon: f64) -> Result<f64> {
    check_positive("T", horizon)?;
    Ok(m * m * b_norm * x0_norm * horizon.sqrt() * (omega * horizon).exp())
}

/// `sup |F| <= M^3 |B|^2 |x0| T e^{wT} r^2 / (1 - q)`, valid when `q < 1`.
pub fn f_bound(m: f64, omega: f64, b_norm: f64, x0_norm: f64, horizon: f64, r: f64) -> Result<BoundReport> {
    let inputs = vec![
        ("M", m),
        ("B_norm", b_norm),
        ("x0_norm", x0_norm),
        ("T", horizon),
        ("r", r),
    ];
    check_inputs(&inputs)?;
    check_positive("T", horizon)?;
    let mut inputs = inputs;
    inputs.push(("omega", omega));
    let q = m * b_norm * horizon.sqrt() * r;
    if !(q < 1.0) {
        return Ok(BoundReport::invalid(
            BoundKind::FBound,
            inputs,
            0.0,
            hypothesis_failure(q),
        ));
    }
    let c = m.powi(3) * b_norm * b_norm * x0_norm * horizon * (omega * horizon).exp() * r * r / (1.0 - q);
    Ok(BoundReport::valid(BoundKind::FBound, inputs, 0.0, c))
}

/// `d_n(pi(K)) <= |pi0| d_n(K) + mu sup_K |x|` for a Lipschitz `F` with `F(0) = 0`.
pub fn lipschitz_report(pi0_norm: f64, lipschitz: f64, d_nk: f64, radius: f64) -> Result<BoundReport> {
    let inputs = vec![
        ("pi0_norm", pi0_norm),
        ("lipschitz", lipschitz),
        ("d_nK", d_nk),
        ("radius", radius),
    ];
    check_inputs(&inputs)?;
    Ok(BoundReport::valid(
        BoundKind::Lipschitz,
        inputs,
        pi0_norm * d_nk,
        lipschitz * radius,
    ))
}

fn hypothesis_failure(q: f64) -> String {
    format!("Theorem 3 hypothesis fails: M |B| sqrt(T) r = {q} >= 1")
}

/// The general bilinear bound.
pub fn theorem3_bound(
    m: f64,
    omega: f64,
    b_norm: f64,
    x0_norm: f64,
    horizon: f64,
    r: f64,
    d_nk: f64,
) -> Result<BoundReport> {
    let mut inputs = vec![
        ("M", m),
        ("B_norm", b_norm),
        ("x0_norm", x0_norm),
        ("T", horizon),
        ("r", r),
        ("d_nK", d_nk),
    ];
    check_inputs(&inputs)?;
    check_positive("T", horizon)?;
    if !omega.is_finite() {
        return Err(Error::InvalidArgument(format!("omega must be finite, got {omega}")));
    }
    inputs.insert(1, ("omega", omega));
    let growth = (omega * horizon).exp();
    let q = m * b_norm * horizon.sqrt() * r;
    let affine = m * m * b_norm * x0_norm * horizon.sqrt() * growth * d_nk;
    if !(q < 1.0) {
        return Ok(BoundReport::invalid(
            BoundKind::Theorem3,
            inputs,
            affine,
            hypothesis_failure(q),
        ));
    }
    let constant = m.powi(3) * b_norm * b_norm * x0_norm * horizon * growth * r * r / (1.0 - q);
    Ok(BoundReport::valid(BoundKind::Theorem3, inputs, affine, constant))
}

/// Beam bound, valid for `T < (a/r)^2`.
pub fn corollary1_bound(a: f64, x0_norm: f64, horizon: f64, r: f64, d_nk: f64) -> Result<BoundReport> {
    let inputs = vec![("a", a), ("x0_norm", x0_norm), ("T", horizon), ("r", r), ("d_nK", d_nk)];
    check_inputs(&inputs)?;
    check_positive("a", a)?;
    check_positive("T", horizon)?;
    let affine = x0_norm * horizon.sqrt() / a * d_nk;
    if r > 0.0 && !(horizon < (a / r).powi(2)) {
        let q = horizon.sqrt() * r / a;
        return Ok(BoundReport::invalid(
            BoundKind::Corollary1,
            inputs,
            affine,
            hypothesis_failure(q),
        ));
    }
    let constant = x0_norm * horizon * r * r / (a * (a - horizon.sqrt() * r));
    Ok(BoundReport::valid(BoundKind::Corollary1, inputs, affine, constant))
}

/// Schrodinger bound, valid for `|mu| sqrt(T) r < 1`.
pub fn corollary2_bound(mu_l2: f64, phi0_norm: f64, horizon: f64, r: f64, d_nk: f64) -> Result<BoundReport> {
    let inputs = vec![
        ("mu_l2", mu_l2),
        ("phi0_norm", phi0_norm),
        ("T", horizon),
        ("r", r),
        ("d_nK", d_nk),
    ];
    check_inputs(&inputs)?;
    check_positive("mu_l2", mu_l2)?;
    check_positive("T", horizon)?;
    let q = mu_l2 * horizon.sqrt() * r;
    let affine = mu_l2 * phi0_norm * horizon.sqrt() * d_nk;
    if !(q < 1.0) {
        return Ok(BoundReport::invalid(
            BoundKind::Corollary2,
            inputs,
            affine,
            hypothesis_failure(q),
        ));
    }
    let constant = mu_l2 * mu_l2 * phi0_norm * horizon * r * r / (1.0 - q);
    Ok(BoundReport::valid(BoundKind::Corollary2, inputs, affine, constant))
}
