//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment; keys are case-sensitive and
//! may appear once. List values are comma-separated. [`RunConfig::render`]
//! echoes every resolved key so that its output parses back to the same
//! configuration.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use nwidth_core::models::DipoleMoment;
use nwidth_core::reachset::{BasisFamily, DirectionSelection};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

fn line_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Beam,
    Schrodinger,
    Synthetic,
    Widths,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Beam => "beam",
            Subcommand::Schrodinger => "schrodinger",
            Subcommand::Synthetic => "synthetic",
            Subcommand::Widths => "widths",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "beam" => Ok(Subcommand::Beam),
            "schrodinger" => Ok(Subcommand::Schrodinger),
            "synthetic" => Ok(Subcommand::Synthetic),
            "widths" => Ok(Subcommand::Widths),
            _ => Err(format!(
                "unknown subcommand `{s}` (beam, schrodinger, synthetic, widths)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundChoice {
    /// Corollary 1 for a full-segment beam, Corollary 2 for Schrodinger,
    /// the general bound otherwise.
    Auto,
    Theorem3,
    Corollary1,
    Corollary2,
}

impl BoundChoice {
    pub fn name(self) -> &'static str {
        match self {
            BoundChoice::Auto => "auto",
            BoundChoice::Theorem3 => "theorem3",
            BoundChoice::Corollary1 => "corollary1",
            BoundChoice::Corollary2 => "corollary2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    // beam
    pub length: f64,
    pub stiffness: f64,
    pub z1: f64,
    pub z2: f64,
    // schrodinger
    pub mu: DipoleMoment,
    pub quad_nodes: usize,
    // shared model and control set
    pub n_modes: Vec<usize>,
    pub horizon: Vec<f64>,
    pub cells: usize,
    pub basis: BasisFamily,
    pub m: usize,
    pub r: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub n: Vec<usize>,
    pub method: Method,
    pub order: usize,
    pub bound: BoundChoice,
    pub selection: DirectionSelection,
    // widths
    pub points: Vec<Vec<f64>>,
    // synthetic
    pub trials: usize,
    pub out: Option<PathBuf>,
}

pub const KEYS: &[&str] = &[
    "subcommand",
    "L",
    "a",
    "z1",
    "z2",
    "mu",
    "quad_nodes",
    "N_modes",
    "T",
    "cells",
    "basis",
    "m",
    "r",
    "sample_count",
    "seed",
    "n",
    "method",
    "K",
    "bound",
    "selection",
    "points",
    "trials",
    "out",
];

/// Raw `(line, value)` pairs in key order of appearance.
struct Entries(Vec<(String, usize, String)>);

impl Entries {
    fn take(&self, key: &str) -> Option<(usize, &str)> {
        self.0
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, l, v)| (*l, v.as_str()))
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<(usize, T)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(|x| Some((line, x)))
                .map_err(|_| line_err(line, format!("`{key}` expects {what}, got `{v}`"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<(usize, Vec<T>)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                let items = v
                    .split(',')
                    .map(|s| s.trim().parse::<T>())
                    .collect::<Result<Vec<T>, _>>()
                    .map_err(|_| {
                        line_err(
                            line,
                            format!("`{key}` expects a comma-separated list of {what}, got `{v}`"),
                        )
                    })?;
                Ok(Some((line, items)))
            }
        }
    }
}

fn check(cond: bool, line: Option<usize>, message: String) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(match line {
            Some(l) => line_err(l, message),
            None => ConfigError::Invalid(message),
        })
    }
}

/// Parses and validates a configuration. `subcommand` from the command line
/// is used when the file has none, and must agree with it otherwise.
pub fn parse_config(text: &str, subcommand: Option<Subcommand>) -> Result<RunConfig, ConfigError> {
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| line_err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(line_err(line, "missing key before `=`"));
        }
        if !KEYS.contains(&key) {
            return Err(line_err(line, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(line_err(line, format!("missing value for `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(line_err(line, format!("duplicate key `{key}`")));
        }
        entries.push((key.to_string(), line, value.to_string()));
    }
    let e = Entries(entries);

    let sub = match (e.take("subcommand"), subcommand) {
        (Some((line, v)), cli) => {
            let s: Subcommand = v.parse().map_err(|m: String| line_err(line, m))?;
            if let Some(c) = cli {
                check(
                    c == s,
                    Some(line),
                    format!("config says `{}` but the command line says `{}`", s.name(), c.name()),
                )?;
            }
            s
        }
        (None, Some(c)) => c,
        (None, None) => return Err(ConfigError::Missing("subcommand")),
    };

    let pos = |key: &str, v: Option<(usize, f64)>| -> Result<(), ConfigError> {
        if let Some((l, x)) = v {
            check(
                x > 0.0 && x.is_finite(),
                Some(l),
                format!("`{key}` must be positive and finite, got {x}"),
            )?;
        }
        Ok(())
    };

    let length = e.parse::<f64>("L", "a number")?;
    pos("L", length)?;
    let length_v = length.map_or(std::f64::consts::PI, |p| p.1);
    let stiffness = e.parse::<f64>("a", "a number")?;
    pos("a", stiffness)?;
    let z1 = e.parse::<f64>("z1", "a number")?;
    let z2 = e.parse::<f64>("z2", "a number")?;
    let (z1_v, z2_v) = (z1.map_or(0.0, |p| p.1), z2.map_or(length_v, |p| p.1));
    let seg_line = z2.or(z1).map(|p| p.0);
    check(
        0.0 <= z1_v && z1_v < z2_v && z2_v <= length_v,
        seg_line,
        format!("actuator segment needs 0 <= z1 < z2 <= L, got z1 = {z1_v}, z2 = {z2_v}, L = {length_v}"),
    )?;

    let mu = match e.take("mu") {
        None | Some((_, "linear")) => DipoleMoment::Linear,
        Some((line, v)) => {
            let samples = v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| line_err(line, format!("`mu` expects `linear` or a list of samples, got `{v}`")))?;
            let mu = DipoleMoment::Tabulated(samples);
            mu.validate().map_err(|err| line_err(line, err.to_string()))?;
            check(
                mu.l2_norm() > 0.0,
                Some(line),
                "`mu` must not vanish identically".into(),
            )?;
            mu
        }
    };
    let quad_nodes = e.parse::<usize>("quad_nodes", "an integer")?;
    if let Some((l, q)) = quad_nodes {
        check(q >= 2, Some(l), format!("`quad_nodes` must be at least 2, got {q}"))?;
    }

    let n_modes = e.list::<usize>("N_modes", "integers")?;
    if let Some((l, v)) = &n_modes {
        check(
            v.iter().all(|&x| (1..=200).contains(&x)),
            Some(*l),
            "`N_modes` entries must lie in 1..=200".into(),
        )?;
    }
    let horizon = e.list::<f64>("T", "numbers")?;
    if let Some((l, v)) = &horizon {
        check(
            v.iter().all(|&x| x > 0.0 && x.is_finite()),
            Some(*l),
            "`T` entries must be positive".into(),
        )?;
    }
    let cells = e.parse::<usize>("cells", "an integer")?;
    if let Some((l, c)) = cells {
        check(c >= 1, Some(l), "`cells` must be at least 1".into())?;
    }
    let cells_v = cells.map_or(64, |p| p.1);
    let basis = match e.take("basis") {
        None => BasisFamily::Legendre,
        Some((line, v)) => BasisFamily::parse(v).ok_or_else(|| {
            line_err(
                line,
                format!("`basis` expects legendre, fourier or indicator, got `{v}`"),
            )
        })?,
    };
    let m = e.parse::<usize>("m", "an integer")?;
    let m_v = m.map_or(2, |p| p.1);
    check(
        m_v >= 1 && m_v <= cells_v,
        m.map(|p| p.0),
        format!("`m` must lie in 1..=cells ({cells_v}), got {m_v}"),
    )?;
    let r = e.parse::<f64>("r", "a number")?;
    if let Some((l, x)) = r {
        check(
            x >= 0.0 && x.is_finite(),
            Some(l),
            format!("`r` must be nonnegative, got {x}"),
        )?;
    }
    let sample_count = e.parse::<usize>("sample_count", "an integer")?;
    let seed = e.parse::<u64>("seed", "an unsigned integer")?;
    let n = e.list::<usize>("n", "integers")?;
    let method = match e.take("method") {
        None | Some((_, "oracle")) => Method::Oracle,
        Some((_, "series")) => Method::Series,
        Some((line, v)) => return Err(line_err(line, format!("`method` expects series or oracle, got `{v}`"))),
    };
    let order = e.parse::<usize>("K", "an integer")?;
    if let Some((l, k)) = order {
        check(k >= 1, Some(l), "`K` must be at least 1".into())?;
    }
    let bound = match e.take("bound") {
        None | Some((_, "auto")) => BoundChoice::Auto,
        Some((_, "theorem3")) => BoundChoice::Theorem3,
        Some((_, "corollary1")) => BoundChoice::Corollary1,
        Some((_, "corollary2")) => BoundChoice::Corollary2,
        Some((line, v)) => {
            return Err(line_err(
                line,
                format!("`bound` expects auto, theorem3, corollary1 or corollary2, got `{v}`"),
            ))
        }
    };
    let selection = match e.take("selection") {
        None => DirectionSelection::Greedy,
        Some((line, v)) => DirectionSelection::parse(v)
            .ok_or_else(|| line_err(line, format!("`selection` expects greedy or svd, got `{v}`")))?,
    };
    let points = match e.take("points") {
        None => Vec::new(),
        Some((line, v)) => {
            let pts = v
                .split(';')
                .map(|p| {
                    p.split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| line_err(line, "`points` expects `x,y,...; x,y,...`".to_string()))?;
            let dim = pts[0].len();
            check(
                pts.iter().all(|p| p.len() == dim && p.iter().all(|x| x.is_finite())),
                Some(line),
                "`points` must all have the same number of finite coordinates".into(),
            )?;
            pts
        }
    };
    let trials = e.parse::<usize>("trials", "an integer")?;
    if let Some((l, t)) = trials {
        check(t >= 1, Some(l), "`trials` must be at least 1".into())?;
    }
    let out = e.take("out").map(|(_, v)| PathBuf::from(v));

    let stiffness_v = stiffness.map_or(1.0, |p| p.1);
    if matches!(bound, BoundChoice::Corollary1) {
        check(
            sub == Subcommand::Beam && z1_v == 0.0 && z2_v == length_v,
            e.take("bound").map(|p| p.0),
            "corollary1 needs the beam with a full-segment actuator (z1 = 0, z2 = L)".into(),
        )?;
    }
    if matches!(bound, BoundChoice::Corollary2) {
        check(
            sub == Subcommand::Schrodinger,
            e.take("bound").map(|p| p.0),
            "corollary2 needs the schrodinger model".into(),
        )?;
    }

    let horizon_v = match (sub, horizon) {
        (Subcommand::Beam | Subcommand::Schrodinger, None) => return Err(ConfigError::Missing("T")),
        (_, h) => h.map_or_else(Vec::new, |p| p.1),
    };
    let r_v = match (sub, r) {
        (Subcommand::Beam | Subcommand::Schrodinger, None) => return Err(ConfigError::Missing("r")),
        (_, r) => r.map_or(0.0, |p| p.1),
    };
    if sub == Subcommand::Widths && points.is_empty() {
        return Err(ConfigError::Missing("points"));
    }
    let n_default: Vec<usize> = match sub {
        Subcommand::Widths => (0..=points.first().map_or(0, |p| p.len())).collect(),
        _ => (0..=m_v + 1).collect(),
    };
    let n_v = n.map_or(n_default, |p| p.1);

    Ok(RunConfig {
        subcommand: sub,
        length: length_v,
        stiffness: stiffness_v,
        z1: z1_v,
        z2: z2_v,
        mu,
        quad_nodes: quad_nodes.map_or(nwidth_core::models::DEFAULT_SCHRODINGER_NODES, |p| p.1),
        n_modes: n_modes.map_or(vec![8], |p| p.1),
        horizon: horizon_v,
        cells: cells_v,
        basis,
        m: m_v,
        r: r_v,
        sample_count: sample_count.map_or(64, |p| p.1),
        seed: seed.map_or(0, |p| p.1),
        n: n_v,
        method,
        order: order.map_or(nwidth_core::volterra::DEFAULT_SERIES_ORDER, |p| p.1),
        bound,
        selection,
        points,
        trials: trials.map_or(1000, |p| p.1),
        out,
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Every key that applies to the subcommand, with its resolved value.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("subcommand", self.subcommand.name().into());
        match self.subcommand {
            Subcommand::Beam | Subcommand::Schrodinger => {
                if self.subcommand == Subcommand::Beam {
                    kv("L", self.length.to_string());
                    kv("a", self.stiffness.to_string());
                    kv("z1", self.z1.to_string());
                    kv("z2", self.z2.to_string());
                } else {
                    let mu = match &self.mu {
                        DipoleMoment::Linear => "linear".to_string(),
                        DipoleMoment::Tabulated(v) => join(v),
                    };
                    kv("mu", mu);
                    kv("quad_nodes", self.quad_nodes.to_string());
                }
                kv("N_modes", join(&self.n_modes));
                kv("T", join(&self.horizon));
                kv("cells", self.cells.to_string());
                kv("basis", self.basis.name().into());
                kv("m", self.m.to_string());
                kv("r", self.r.to_string());
                kv("sample_count", self.sample_count.to_string());
                kv("seed", self.seed.to_string());
                kv("n", join(&self.n));
                kv(
                    "method",
                    if self.method == Method::Series {
                        "series"
                    } else {
                        "oracle"
                    }
                    .into(),
                );
                kv("K", self.order.to_string());
                kv("bound", self.bound.name().into());
                kv("selection", self.selection.name().into());
            }
            Subcommand::Widths => {
                let pts: Vec<String> = self.points.iter().map(|p| join(p)).collect();
                kv("points", pts.join("; "));
                kv("n", join(&self.n));
            }
            Subcommand::Synthetic => {
                kv("trials", self.trials.to_string());
                kv("seed", self.seed.to_string());
            }
        }
        if let Some(out) = &self.out {
            kv("out", out.display().to_string());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_beam_defaults() {
        let c = parse_config("subcommand=beam\nT=0.25\nr=1.0\n", None).unwrap();
        assert_eq!(c.length, std::f64::consts::PI);
        assert_eq!((c.stiffness, c.z1, c.z2), (1.0, 0.0, std::f64::consts::PI));
        assert_eq!(c.n_modes, vec![8]);
        assert_eq!((c.m, c.seed), (2, 0));
        assert_eq!(c.method, Method::Oracle);
        assert_eq!(c.n, vec![0, 1, 2, 3]);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_config("subcommand = beam\n# note\nT==\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Line { line: 3, .. }), "{err}");
        let err = parse_config("subcommand = beam\nfoo = 1\n", None).unwrap_err();
        assert_eq!(err.to_string(), "line 2: unknown key `foo`");
        let err = parse_config("subcommand = beam\nT = 1\nr = -1\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Line { line: 3, .. }));
        let err = parse_config("subcommand = beam\nT = x\n", None).unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let err = parse_config("subcommand = beam\nT = 1\nT = 2\n", None).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = parse_config("subcommand = beam\nr = 1\n", None).unwrap_err();
        assert_eq!(err, ConfigError::Missing("T"));
        assert!(parse_config("t = 1\n", Some(Subcommand::Beam)).is_err());
    }

    #[test]
    fn subcommand_from_command_line() {
        let c = parse_config("T = 1\nr = 0.5\n", Some(Subcommand::Schrodinger)).unwrap();
        assert_eq!(c.subcommand, Subcommand::Schrodinger);
        assert!(parse_config("subcommand = beam\nT = 1\nr = 0.5\n", Some(Subcommand::Widths)).is_err());
    }

    #[test]
    fn render_round_trips() {
        let texts = [
            "subcommand=beam\nT=0.25, 0.5\nr=1.0\nz1 = 0.3\nz2 = 2.0\nN_modes = 4, 8\nmethod = series\n",
            "subcommand=schrodinger\nT=0.1\nr=0.3\nmu = 0, 0.5, 1.5\nbasis = fourier\nselection = svd\n",
            "subcommand=widths\npoints = 1, 0; 0, 1; -1, 0.25\nout = /tmp/x\n",
            "subcommand=synthetic\ntrials = 10\nseed = 7\n",
        ];
        for t in texts {
            let c = parse_config(t, None).unwrap();
            let again = parse_config(&c.render(), None).unwrap();
            assert_eq!(c, again, "{t}");
        }
    }

    #[test]
    fn corollary_choices_are_checked() {
        assert!(parse_config("subcommand=beam\nT=1\nr=0.5\nz1=0.5\nbound=corollary1\n", None).is_err());
        assert!(parse_config("subcommand=beam\nT=1\nr=0.5\nbound=corollary2\n", None).is_err());
        assert!(parse_config("subcommand=beam\nT=1\nr=0.5\nbound=corollary1\n", None).is_ok());
    }

    #[test]
    fn widths_points() {
        let c = parse_config("subcommand = widths\npoints = 1,2,3; 4,5,6\n", None).unwrap();
        assert_eq!(c.points, vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        assert_eq!(c.n, vec![0, 1, 2, 3]);
        assert!(parse_config("subcommand = widths\npoints = 1,2; 3\n", None).is_err());
        assert_eq!(
            parse_config("subcommand = widths\n", None).unwrap_err(),
            ConfigError::Missing("points")
        );
    }
}
