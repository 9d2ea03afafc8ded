//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Command-line
//! overrides use the same `key=value` syntax and win over the file.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use oscifour_core::reference::{MAX_TOL, MIN_TOL};

use crate::error::{CliError, CliResult};

const KEYS: &[&str] = &[
    "problem",
    "M",
    "d",
    "omega",
    "extra_passes",
    "amplitude",
    "mode",
    "y0",
    "J",
    "epsilon",
    "rescaled",
    "epsilons",
    "orbit",
    "q0",
    "qdot0",
    "j2",
    "t0",
    "time_unit",
    "t_start",
    "t_end",
    "t_count",
    "times",
    "tol",
    "out",
    "coefficients",
    "snapshots",
];

/// Where a value came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("command line"),
        }
    }
}

/// Raw key/value pairs with their origin.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            raw.insert(line, Origin::Line(i + 1))?;
        }
        Ok(raw)
    }

    pub fn apply_override(&mut self, item: &str) -> CliResult<()> {
        self.insert(item, Origin::Override)
    }

    fn insert(&mut self, item: &str, origin: Origin) -> CliResult<()> {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            CliError::config(format!("{origin}: expected `key = value`, got `{item}`"))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::config(format!("{origin}: unknown key `{key}`")));
        }
        self.entries
            .insert(key.to_string(), (value.trim().to_string(), origin));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&(String, Origin)> {
        self.entries.get(key)
    }

    fn parsed<T: FromStr>(&self, key: &str, what: &str) -> CliResult<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, origin)) => v.parse().map(Some).map_err(|_| {
                CliError::config(format!("{origin}: key `{key}` must be {what}, got `{v}`"))
            }),
        }
    }

    fn positive_int(&self, key: &str) -> CliResult<Option<usize>> {
        let v: Option<usize> = self.parsed(key, "a positive integer")?;
        if v == Some(0) {
            let (_, origin) = self.get(key).unwrap();
            return Err(CliError::config(format!(
                "{origin}: key `{key}` must be a positive integer, got `0`"
            )));
        }
        Ok(v)
    }

    fn float(&self, key: &str) -> CliResult<Option<f64>> {
        let v: Option<f64> = self.parsed(key, "a number")?;
        if let Some(x) = v {
            if !x.is_finite() {
                return self.invalid(key, "a finite number");
            }
        }
        Ok(v)
    }

    fn positive_float(&self, key: &str) -> CliResult<Option<f64>> {
        match self.float(key)? {
            Some(x) if x <= 0.0 => self.invalid(key, "positive"),
            v => Ok(v),
        }
    }

    fn list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let Some((v, origin)) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                let s = s.trim();
                match parse_number(s) {
                    Some(x) => Ok(x),
                    None => Err(CliError::config(format!(
                        "{origin}: key `{key}` must be a comma-separated list of numbers, got `{s}`"
                    ))),
                }
            })
            .collect::<CliResult<Vec<_>>>()
            .map(Some)
    }

    fn vector3(&self, key: &str) -> CliResult<Option<[f64; 3]>> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) => match <[f64; 3]>::try_from(v) {
                Ok(a) => Ok(Some(a)),
                Err(_) => self.invalid(key, "three comma-separated numbers"),
            },
        }
    }

    fn invalid<T>(&self, key: &str, what: &str) -> CliResult<T> {
        let (v, origin) = self.get(key).expect("key present");
        Err(CliError::config(format!(
            "{origin}: key `{key}` must be {what}, got `{v}`"
        )))
    }

    fn require<T>(&self, key: &str, v: Option<T>) -> CliResult<T> {
        v.ok_or_else(|| CliError::config(format!("missing required key `{key}`")))
    }
}

/// Accepts plain numbers plus `pi` multiples such as `pi/10` or `0.5*pi`.
fn parse_number(s: &str) -> Option<f64> {
    use std::f64::consts::PI;
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let num = match num.split_once('*') {
        Some((a, "pi")) | Some(("pi", a)) => a.trim().parse::<f64>().ok()? * PI,
        None if num == "pi" => PI,
        _ => return None,
    };
    let v = num / den;
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    LinearTest,
    Nls,
    KeplerJ2,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::LinearTest => "linear-test",
            ProblemKind::Nls => "nls",
            ProblemKind::KeplerJ2 => "kepler-j2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrbitChoice {
    Geostationary,
    Eccentric,
    Custom { q0: [f64; 3], qdot0: [f64; 3] },
}

/// Problem parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    LinearTest {
        amplitude: f64,
        mode: i64,
        y0: f64,
    },
    Nls {
        j: usize,
        epsilon: f64,
        rescaled: bool,
    },
    KeplerJ2 {
        orbit: OrbitChoice,
        j2: f64,
        t0: f64,
    },
}

impl ProblemSpec {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemSpec::LinearTest { .. } => ProblemKind::LinearTest,
            ProblemSpec::Nls { .. } => ProblemKind::Nls,
            ProblemSpec::KeplerJ2 { .. } => ProblemKind::KeplerJ2,
        }
    }

    /// One-line descriptor stored in coefficient files, readable by
    /// [`ProblemSpec::from_descriptor`].
    pub fn descriptor(&self) -> String {
        match self {
            ProblemSpec::LinearTest {
                amplitude,
                mode,
                y0,
            } => {
                format!("problem=linear-test;amplitude={amplitude:?};mode={mode};y0={y0:?}")
            }
            ProblemSpec::Nls {
                j,
                epsilon,
                rescaled,
            } => {
                format!("problem=nls;J={j};epsilon={epsilon:?};rescaled={rescaled}")
            }
            ProblemSpec::KeplerJ2 { orbit, j2, t0 } => {
                let orbit = match orbit {
                    OrbitChoice::Geostationary => "orbit=geostationary".to_string(),
                    OrbitChoice::Eccentric => "orbit=eccentric".to_string(),
                    OrbitChoice::Custom { q0, qdot0 } => format!(
                        "orbit=custom;q0={:?},{:?},{:?};qdot0={:?},{:?},{:?}",
                        q0[0], q0[1], q0[2], qdot0[0], qdot0[1], qdot0[2]
                    ),
                };
                format!("problem=kepler-j2;{orbit};j2={j2:?};t0={t0:?}")
            }
        }
    }

    pub fn from_descriptor(s: &str) -> CliResult<Self> {
        let mut raw = RawConfig::default();
        for item in s.split(';').filter(|p| !p.is_empty()) {
            raw.apply_override(item)
                .map_err(|e| CliError::config(format!("bad problem descriptor `{s}`: {e}")))?;
        }
        Self::from_raw(&raw)
    }

    fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        let kind = match raw.get("problem") {
            None => return Err(CliError::config("missing required key `problem`")),
            Some((v, origin)) => match v.as_str() {
                "linear-test" => ProblemKind::LinearTest,
                "nls" => ProblemKind::Nls,
                "kepler-j2" => ProblemKind::KeplerJ2,
                _ => return Err(CliError::config(format!(
                    "{origin}: key `problem` must be one of linear-test, nls, kepler-j2, got `{v}`"
                ))),
            },
        };
        Ok(match kind {
            ProblemKind::LinearTest => ProblemSpec::LinearTest {
                amplitude: raw.float("amplitude")?.unwrap_or(1.0),
                mode: raw.parsed("mode", "an integer")?.unwrap_or(1),
                y0: raw.float("y0")?.unwrap_or(0.0),
            },
            ProblemKind::Nls => {
                let j = raw.positive_int("J")?.unwrap_or(16);
                if j < 2 {
                    return raw.invalid("J", "at least 2");
                }
                ProblemSpec::Nls {
                    j,
                    epsilon: raw.positive_float("epsilon")?.unwrap_or(1.0),
                    rescaled: raw.parsed("rescaled", "true or false")?.unwrap_or(false),
                }
            }
            ProblemKind::KeplerJ2 => {
                let orbit = match raw.get("orbit").map(|(v, _)| v.as_str()) {
                    None | Some("geostationary") => OrbitChoice::Geostationary,
                    Some("eccentric") => OrbitChoice::Eccentric,
                    Some("custom") => OrbitChoice::Custom {
                        q0: raw.require("q0", raw.vector3("q0")?)?,
                        qdot0: raw.require("qdot0", raw.vector3("qdot0")?)?,
                    },
                    Some(_) => {
                        return raw.invalid("orbit", "one of geostationary, eccentric, custom")
                    }
                };
                ProblemSpec::KeplerJ2 {
                    orbit,
                    j2: raw
                        .float("j2")?
                        .unwrap_or(oscifour_core::problems::kepler::J2),
                    t0: raw.float("t0")?.unwrap_or(0.0),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    /// Time of the solved system (fictitious time for Kepler).
    Problem,
    /// Multiples of `P = 2π/ω`.
    Revolutions,
}

/// Requested output times, before unit conversion.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeSpec {
    Grid { start: f64, end: f64, count: usize },
    List(Vec<f64>),
}

impl TimeSpec {
    /// Times in problem units, sorted and deduplicated.
    pub fn resolve(&self, unit: TimeUnit, omega: f64) -> Vec<f64> {
        let scale = match unit {
            TimeUnit::Problem => 1.0,
            TimeUnit::Revolutions => 2.0 * std::f64::consts::PI / omega,
        };
        let mut times: Vec<f64> = match self {
            TimeSpec::Grid {
                start, count: 1, ..
            } => vec![*start],
            TimeSpec::Grid { start, end, count } => (0..*count)
                .map(|i| start + (end - start) * i as f64 / (*count - 1) as f64)
                .collect(),
            TimeSpec::List(v) => v.clone(),
        };
        for t in &mut times {
            *t *= scale;
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub modes: usize,
    pub degree: usize,
    pub omega: Option<f64>,
    pub extra_passes: usize,
    /// ε values of an NLS ε-study (rescaled form), used by `errors`.
    pub epsilons: Option<Vec<f64>>,
    pub time_unit: TimeUnit,
    pub times: Option<TimeSpec>,
    pub tol: f64,
    pub out: Option<String>,
    pub coefficients: Option<String>,
    pub snapshots: Option<String>,
}

impl RunConfig {
    /// Parses a config file's contents and applies `overrides`.
    pub fn load(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut raw = RawConfig::parse(text)?;
        for o in overrides {
            raw.apply_override(o)?;
        }
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        let problem = ProblemSpec::from_raw(raw)?;
        let modes = raw.require("M", raw.positive_int("M")?)?;
        let degree = raw.require("d", raw.positive_int("d")?)?;
        let omega = raw.positive_float("omega")?;
        let extra_passes = raw
            .parsed("extra_passes", "a non-negative integer")?
            .unwrap_or(0);

        let epsilons = raw.list("epsilons")?;
        if let Some(eps) = &epsilons {
            if problem.kind() != ProblemKind::Nls {
                return raw.invalid("epsilons", "used only with problem = nls");
            }
            if eps.is_empty() || eps.iter().any(|e| *e <= 0.0) {
                return raw.invalid("epsilons", "a list of positive numbers");
            }
        }

        let time_unit = match raw.get("time_unit").map(|(v, _)| v.as_str()) {
            None | Some("problem") => TimeUnit::Problem,
            Some("revolutions") => TimeUnit::Revolutions,
            Some(_) => return raw.invalid("time_unit", "problem or revolutions"),
        };
        let times = match raw.list("times")? {
            Some(list) => {
                if list.iter().any(|t| *t < 0.0) {
                    return raw.invalid("times", "non-negative");
                }
                Some(TimeSpec::List(list))
            }
            None => match raw.float("t_end")? {
                None => None,
                Some(end) => {
                    let start = raw.float("t_start")?.unwrap_or(0.0);
                    if start < 0.0 {
                        return raw.invalid("t_start", "non-negative");
                    }
                    if end < start {
                        return raw.invalid("t_end", "at least t_start");
                    }
                    let count = raw.positive_int("t_count")?.unwrap_or(11);
                    Some(TimeSpec::Grid { start, end, count })
                }
            },
        };
        let tol = raw.positive_float("tol")?.unwrap_or(1e-10);
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            return raw.invalid("tol", &format!("within [{MIN_TOL:e}, {MAX_TOL:e}]"));
        }
        let text = |k: &str| raw.get(k).map(|(v, _)| v.clone());
        Ok(Self {
            problem,
            modes,
            degree,
            omega,
            extra_passes,
            epsilons,
            time_unit,
            times,
            tol,
            out: text("out"),
            coefficients: text("coefficients"),
            snapshots: text("snapshots"),
        })
    }
}
