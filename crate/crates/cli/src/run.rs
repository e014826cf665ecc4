//! Experiment orchestration and report emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use nwidth_core::models::{
    beam_default_x0, beam_model, beam_truncation_deviation, schrodinger_default_x0, schrodinger_model,
    schrodinger_truncation_deviation, BeamSpec, SchrodingerSpec,
};
use nwidth_core::operators::synthetic::{run_trials, Tally, TrialShape};
use nwidth_core::reachset::{
    compare_report, BoundFamily, CompareOptions, ComparisonReport, ControlSet, PropagationMethod,
};
use nwidth_core::volterra::{BilinearModel, GrowthConstants};
use nwidth_core::widths::{width_profile, SnapshotCloud};
use nwidth_core::Scalar;
use thiserror::Error;

use crate::config::{BoundChoice, ConfigError, Method, RunConfig, Subcommand};

pub const REPORT_HEADER: &str =
    "n,constructive_residual,affine_width_est,linear_width_est,bound,affine_term,constant_term,valid";
pub const WIDTHS_HEADER: &str = "n,linear_width_est,affine_width_est";
pub const SYNTHETIC_HEADER: &str = "check,trials,passed,worst_excess";
pub const HYPOTHESIS_WARNING: &str = "Theorem 3 hypothesis fails";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] nwidth_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Failed assertions, by name.
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Fixed 17-significant-digit scientific format.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn write_file(path: PathBuf, contents: &str, outcome: &mut RunOutcome) -> Result<(), RunError> {
    fs::write(&path, contents).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    outcome.files.push(path);
    Ok(())
}

/// Runs the configured experiment, writing its artifacts into `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    match config.subcommand {
        Subcommand::Beam | Subcommand::Schrodinger => run_reach(config, out_dir),
        Subcommand::Widths => run_widths(config, out_dir),
        Subcommand::Synthetic => run_synthetic(config, out_dir),
    }
}

fn report_name(idx: usize) -> String {
    if idx == 0 {
        "report.csv".into()
    } else {
        format!("report_{idx}.csv")
    }
}

/// The model-specific inputs of one sweep combination.
struct Combination<T: Scalar> {
    model: BilinearModel<T>,
    x0: DVector<T>,
    family: BoundFamily,
    /// `(label, value)` constants for the metadata.
    constants: Vec<(&'static str, f64)>,
    truncation_deviation: f64,
}

fn beam_combination(config: &RunConfig, n_modes: usize, k: &ControlSet) -> Result<Combination<f64>, RunError> {
    let spec = BeamSpec::new(config.length, config.stiffness, config.z1, config.z2, n_modes)?;
    let model = beam_model(&spec)?;
    let full = config.z1 == 0.0 && config.z2 == config.length;
    let family = match (config.bound, full) {
        (BoundChoice::Auto, true) | (BoundChoice::Corollary1, _) => BoundFamily::Corollary1 { a: config.stiffness },
        _ => theorem3_family(model.constants()),
    };
    let mut first = vec![0.0; k.m()];
    first[0] = k.radius();
    let deviation = beam_truncation_deviation(&spec, &k.control(&first)?)?;
    Ok(Combination {
        x0: beam_default_x0(&spec),
        family,
        constants: vec![("1/a", spec.inverse_stiffness())],
        truncation_deviation: deviation,
        model,
    })
}

fn schrodinger_combination(
    config: &RunConfig,
    n_modes: usize,
    k: &ControlSet,
) -> Result<Combination<num_complex::Complex64>, RunError> {
    let spec = SchrodingerSpec {
        mu: config.mu.clone(),
        n_modes,
        quad_nodes: config.quad_nodes,
    };
    spec.validate()?;
    let model = schrodinger_model(&spec)?;
    let family = match config.bound {
        BoundChoice::Theorem3 => theorem3_family(model.constants()),
        _ => BoundFamily::Corollary2 { mu_l2: spec.mu_l2() },
    };
    let mut first = vec![0.0; k.m()];
    first[0] = k.radius();
    let deviation = schrodinger_truncation_deviation(&spec, &k.control(&first)?)?;
    let sigma_q = model.constants().q(k.horizon(), k.radius());
    Ok(Combination {
        x0: schrodinger_default_x0(&spec),
        family,
        constants: vec![("mu_l2", spec.mu_l2()), ("q_sigma_max", sigma_q)],
        truncation_deviation: deviation,
        model,
    })
}

fn theorem3_family(c: GrowthConstants) -> BoundFamily {
    BoundFamily::Theorem3 {
        m: c.m,
        omega: c.omega,
        b_norm: c.b_norm,
    }
}

fn run_reach(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let mut outcome = RunOutcome::default();
    let mut meta = String::new();
    meta.push_str("# nwidth-reach run metadata; the uncommented lines are the resolved configuration\n");
    meta.push_str(&config.render());
    let n_max = config.n.iter().copied().max().unwrap_or(0);
    let method = match config.method {
        Method::Series => PropagationMethod::Series { order: config.order },
        Method::Oracle => PropagationMethod::Oracle,
    };
    let mut idx = 0;
    for &n_modes in &config.n_modes {
        for &horizon in &config.horizon {
            let k = ControlSet::new(
                horizon,
                config.cells,
                config.basis,
                config.m,
                config.r,
                config.sample_count,
                config.seed,
            )?;
            let options = |family| CompareOptions {
                n_max,
                method,
                bound: family,
                selection: config.selection,
            };
            let (report, constants, growth, deviation) = match config.subcommand {
                Subcommand::Beam => {
                    let c = beam_combination(config, n_modes, &k)?;
                    let rep = compare_report(&c.model, &c.x0, &k, &options(c.family))?;
                    (rep, c.constants, c.model.constants(), c.truncation_deviation)
                }
                _ => {
                    let c = schrodinger_combination(config, n_modes, &k)?;
                    let rep = compare_report(&c.model, &c.x0, &k, &options(c.family))?;
                    (rep, c.constants, c.model.constants(), c.truncation_deviation)
                }
            };
            let name = report_name(idx);
            write_file(out_dir.join(&name), &report_csv(&report, &config.n), &mut outcome)?;

            let _ = writeln!(
                meta,
                "# combination {idx}: N_modes = {n_modes}, T = {horizon} -> {name}"
            );
            let _ = writeln!(meta, "#   M = {}", growth.m);
            let _ = writeln!(meta, "#   omega = {}", growth.omega);
            let _ = writeln!(meta, "#   B_norm = {}", growth.b_norm);
            for (label, v) in &constants {
                let _ = writeln!(meta, "#   {label} = {v}");
            }
            let _ = writeln!(meta, "#   bound = {}", report.bound_family);
            let _ = writeln!(meta, "#   q = {}", report.q);
            let _ = writeln!(meta, "#   method = {}", report.method);
            let _ = writeln!(meta, "#   samples = {}", report.samples);
            let budget = report.series_error_budget.map_or("n/a".to_string(), |b| b.to_string());
            let _ = writeln!(meta, "#   series_error_budget = {budget}");
            let _ = writeln!(meta, "#   truncation_deviation(N vs 2N) = {deviation}");
            if !report.all_valid() {
                let w = format!(
                    "{HYPOTHESIS_WARNING} for combination {idx} (q = {} >= 1); rows flagged valid=false",
                    report.q
                );
                let _ = writeln!(meta, "#   warning: {w}");
                outcome.warnings.push(w);
            }
            for v in &report.violations {
                let _ = writeln!(meta, "#   violation: {v}");
                outcome.violations.push(format!("combination {idx}: {v}"));
            }
            let _ = writeln!(meta, "#   status = {}", if report.passed() { "pass" } else { "FAIL" });
            idx += 1;
        }
    }
    write_file(out_dir.join("meta.txt"), &meta, &mut outcome)?;
    Ok(outcome)
}

fn report_csv(report: &ComparisonReport, ns: &[usize]) -> String {
    let mut s = String::new();
    s.push_str(REPORT_HEADER);
    s.push('\n');
    for &n in ns {
        let row = &report.rows[n];
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            row.n,
            fmt_float(row.constructive_residual),
            fmt_float(row.affine_width_est),
            fmt_float(row.linear_width_est),
            fmt_opt(row.bound.value),
            fmt_float(row.bound.affine_term),
            fmt_opt(row.bound.constant_term),
            row.bound.valid
        );
    }
    s
}

fn run_widths(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let mut outcome = RunOutcome::default();
    let points = config.points.iter().map(|p| DVector::from_column_slice(p)).collect();
    let cloud = SnapshotCloud::new(points, "points")?;
    let n_max = config.n.iter().copied().max().unwrap_or(0);
    let profile = width_profile(&cloud, n_max)?;
    let mut s = String::new();
    s.push_str(WIDTHS_HEADER);
    s.push('\n');
    for &n in &config.n {
        let e = &profile.entries[n];
        let _ = writeln!(
            s,
            "{},{},{}",
            n,
            fmt_float(e.linear_estimate),
            fmt_float(e.affine_estimate)
        );
        if e.affine_estimate > e.linear_estimate || e.affine_estimate.is_nan() {
            outcome
                .violations
                .push(format!("affine_width_est <= linear_width_est at n={n}"));
        }
    }
    write_file(out_dir.join("report.csv"), &s, &mut outcome)?;
    Ok(outcome)
}

fn run_synthetic(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let mut outcome = RunOutcome::default();
    let summary = run_trials(config.seed, config.trials, &TrialShape::default())?;
    let mut s = String::new();
    s.push_str(SYNTHETIC_HEADER);
    s.push('\n');
    let rows: [(&str, &Tally); 3] = [
        ("lemma4", &summary.lemma4),
        ("theorem1", &summary.theorem1),
        ("theorem2", &summary.theorem2),
    ];
    for (name, t) in rows {
        let _ = writeln!(s, "{name},{},{},{}", t.trials, t.passed, fmt_float(t.worst_excess));
        if t.passed != t.trials {
            outcome
                .violations
                .push(format!("{name}: {} of {} trials passed", t.passed, t.trials));
        }
    }
    if summary.dimension_violations > 0 {
        outcome.violations.push(format!(
            "theorem2 subspace dimension exceeded n + m in {} trials",
            summary.dimension_violations
        ));
    }
    write_file(out_dir.join("report.csv"), &s, &mut outcome)?;
    let mut meta = String::new();
    meta.push_str("# nwidth-reach run metadata; the uncommented lines are the resolved configuration\n");
    meta.push_str(&config.render());
    let shape = TrialShape::default();
    let _ = writeln!(
        meta,
        "# trial shape: input dim <= {}, output dim <= {}, {} samples, radius {}",
        shape.max_input_dim, shape.max_output_dim, shape.samples, shape.radius
    );
    let _ = writeln!(
        meta,
        "# theorem2 dimension violations = {}",
        summary.dimension_violations
    );
    let _ = writeln!(meta, "# status = {}", if outcome.passed() { "pass" } else { "FAIL" });
    write_file(out_dir.join("meta.txt"), &meta, &mut outcome)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed() {
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_float(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_opt(None), "");
    }
}
