//! Run configuration: a line-oriented `key = value` format with bracketed
//! section headers.
//!
//! ```text
//! # comment
//! [model]
//! width = pi          # numbers may be written as products/quotients with `pi`
//! mass = 1
//! modes = 1, 2
//!
//! [initial]
//! point = 1.0, 1.0, 2.0, 0.0   # z1, t1, z2, t2
//! ```
//!
//! Parsing happens in two passes: [`parse_document`] checks the syntax and
//! [`RunConfig::from_document`] checks keys, types and ranges. Both report
//! the line of the offending entry.

use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

use crate::integrator::{Scheme, Weighting};
use crate::minkowski::{rapidity_from_velocity, Rapidity, VELOCITY_GUARD};
use crate::wavefield::{ConfigPoint, ModelSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: key.into(),
            message: message.into(),
        }
    }

    fn missing(key: impl Into<String>) -> Self {
        Self {
            line: None,
            key: key.into(),
            message: "required key is missing".into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.key.is_empty()) {
            (Some(l), false) => write!(f, "line {l}: {}: {}", self.key, self.message),
            (Some(l), true) => write!(f, "line {l}: {}", self.message),
            (None, _) => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !s.starts_with(|c: char| c.is_ascii_digit())
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Syntax pass.
pub fn parse_document(text: &str) -> Result<Document, ConfigError> {
    let mut doc = Document::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, "", "unterminated section header"))?
                .trim();
            if !is_identifier(name) {
                return Err(ConfigError::at(line, "", format!("invalid section name `{name}`")));
            }
            if doc.section(name).is_some() {
                return Err(ConfigError::at(line, name, "duplicate section"));
            }
            doc.sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, "", "expected `key = value` or `[section]`"))?;
        let (key, value) = (key.trim(), value.trim());
        let section = doc
            .sections
            .last_mut()
            .ok_or_else(|| ConfigError::at(line, key, "entry appears before any section"))?;
        let path = format!("{}.{key}", section.name);
        if !is_identifier(key) {
            return Err(ConfigError::at(line, path, "invalid key"));
        }
        if value.is_empty() {
            return Err(ConfigError::at(line, path, "missing value"));
        }
        if section.entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::at(line, path, "duplicate key"));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    Ok(doc)
}

/// Parses a real number written as a product/quotient of literals and `pi`,
/// e.g. `0.5`, `pi`, `2*pi`, `-pi/4`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) if rest.trim_start().starts_with(|c: char| c.is_ascii_alphabetic()) => (true, rest),
        _ => (false, s),
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let factor = match token {
            "pi" => std::f64::consts::PI,
            "" => return Err(format!("malformed number `{s}`")),
            t if t.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == '-' || c == '+') => {
                t.parse::<f64>().map_err(|_| format!("malformed number `{s}`"))?
            }
            _ => return Err(format!("malformed number `{s}`")),
        };
        value = if op == '*' { value * factor } else { value / factor };
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    let value = if negative { -value } else { value };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not a finite number"))
    }
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Layout {
    /// One panel per particle, sharing the time axis.
    #[default]
    Panels,
    /// Both world lines on one set of axes.
    Shared,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotSpec {
    /// Label every `stride`-th record.
    pub stride: usize,
    pub width: f64,
    pub height: f64,
    pub layout: Layout,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            stride: 10,
            width: 900.0,
            height: 600.0,
            layout: Layout::Panels,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub count: usize,
    pub weighting: Weighting,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSpec {
    pub epsilons: Vec<f64>,
    pub total_proper_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Wells at rest; `model.rapidity` is always `None` here, see `boost`.
    pub model: ModelSpec,
    pub initial: Option<ConfigPoint>,
    pub epsilon: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub boost: Option<Rapidity>,
    pub ensemble: Option<EnsembleSpec>,
    pub convergence: Option<ConvergenceSpec>,
    pub plot: PlotSpec,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::default(),
            initial: None,
            epsilon: 0.01,
            steps: 500,
            scheme: Scheme::Midpoint,
            boost: None,
            ensemble: None,
            convergence: None,
            plot: PlotSpec::default(),
            output: None,
        }
    }
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("model", &["width", "mass", "modes"]),
    ("initial", &["point"]),
    ("integration", &["epsilon", "steps", "scheme"]),
    ("boost", &["velocity", "rapidity"]),
    ("ensemble", &["count", "weighting", "seed"]),
    ("covariance", &["epsilons", "total_proper_time"]),
    ("plot", &["stride", "width", "height", "layout"]),
    ("output", &["directory"]),
];

struct Field<'a> {
    entry: &'a Entry,
    path: String,
}

impl Field<'_> {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::at(self.entry.line, self.path.clone(), message)
    }

    fn real(&self) -> Result<f64, ConfigError> {
        parse_real(&self.entry.value).map_err(|m| self.err(m))
    }

    fn positive(&self) -> Result<f64, ConfigError> {
        let v = self.real()?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.err("must be positive"))
        }
    }

    fn reals(&self, expected: Option<usize>) -> Result<Vec<f64>, ConfigError> {
        let items = split_list(&self.entry.value);
        if let Some(n) = expected {
            if items.len() != n {
                return Err(self.err(format!("expected {n} comma-separated values, found {}", items.len())));
            }
        }
        items.iter().map(|s| parse_real(s).map_err(|m| self.err(m))).collect()
    }

    fn integer<T: std::str::FromStr>(&self, text: &str) -> Result<T, ConfigError> {
        text.trim()
            .parse::<T>()
            .map_err(|_| self.err(format!("`{}` is not a valid non-negative integer", text.trim())))
    }

    fn count(&self) -> Result<usize, ConfigError> {
        let n: usize = self.integer(&self.entry.value)?;
        if n == 0 {
            return Err(self.err("must be at least 1"));
        }
        Ok(n)
    }

    fn word<T: std::str::FromStr<Err = String>>(&self) -> Result<T, ConfigError> {
        self.entry.value.parse::<T>().map_err(|m| self.err(m))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        Self::from_document(&parse_document(text)?)
    }

    /// Schema pass: every key must be known, typed and in range.
    pub fn from_document(doc: &Document) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut velocity_line = None;
        let mut ensemble_fields = (None, None, None);
        let mut convergence_fields = (None, None);
        for section in &doc.sections {
            let known = SCHEMA
                .iter()
                .find(|(name, _)| *name == section.name)
                .ok_or_else(|| ConfigError::at(section.line, section.name.clone(), "unknown section"))?
                .1;
            for entry in &section.entries {
                let f = Field {
                    entry,
                    path: format!("{}.{}", section.name, entry.key),
                };
                if !known.contains(&entry.key.as_str()) {
                    return Err(f.err("unknown key"));
                }
                match (section.name.as_str(), entry.key.as_str()) {
                    ("model", "width") => cfg.model.width = f.positive()?,
                    ("model", "mass") => {
                        let m = f.real()?;
                        if m < 0.0 {
                            return Err(f.err("must be non-negative"));
                        }
                        cfg.model.mass = m;
                    }
                    ("model", "modes") => {
                        let items = split_list(&entry.value);
                        if items.len() != 2 {
                            return Err(f.err("expected two mode indices"));
                        }
                        let a: u32 = f.integer(items[0])?;
                        let b: u32 = f.integer(items[1])?;
                        if a == 0 || b == 0 {
                            return Err(f.err("mode indices start at 1"));
                        }
                        cfg.model.modes = (a, b);
                    }
                    ("initial", "point") => {
                        let v = f.reals(Some(4))?;
                        cfg.initial = Some(ConfigPoint::new(v[0], v[1], v[2], v[3]));
                    }
                    ("integration", "epsilon") => cfg.epsilon = f.positive()?,
                    ("integration", "steps") => cfg.steps = f.count()?,
                    ("integration", "scheme") => cfg.scheme = f.word()?,
                    ("boost", key) => {
                        if let Some(prev) = velocity_line {
                            return Err(f.err(format!("boost already given on line {prev}")));
                        }
                        velocity_line = Some(entry.line);
                        let x = f.real()?;
                        cfg.boost = Some(if key == "velocity" {
                            if x.abs() >= 1.0 - VELOCITY_GUARD {
                                return Err(f.err("boost velocity must satisfy |v| < 1"));
                            }
                            rapidity_from_velocity(x).map_err(|e| f.err(e.to_string()))?
                        } else {
                            if x.abs() > 20.0 {
                                return Err(f.err("rapidity is out of range"));
                            }
                            Rapidity(x)
                        });
                    }
                    ("ensemble", "count") => ensemble_fields.0 = Some(f.count()?),
                    ("ensemble", "weighting") => ensemble_fields.1 = Some(f.word()?),
                    ("ensemble", "seed") => ensemble_fields.2 = Some(f.integer(&entry.value)?),
                    ("covariance", "epsilons") => {
                        let eps = f.reals(None)?;
                        if eps.len() < 3 {
                            return Err(f.err("need at least three steps"));
                        }
                        if eps.iter().any(|e| *e <= 0.0) || eps.windows(2).any(|w| w[1] >= w[0]) {
                            return Err(f.err("steps must be positive and strictly decreasing"));
                        }
                        convergence_fields.0 = Some(eps);
                    }
                    ("covariance", "total_proper_time") => convergence_fields.1 = Some(f.positive()?),
                    ("plot", "stride") => cfg.plot.stride = f.count()?,
                    ("plot", "width") => cfg.plot.width = f.positive()?,
                    ("plot", "height") => cfg.plot.height = f.positive()?,
                    ("plot", "layout") => {
                        cfg.plot.layout = match entry.value.as_str() {
                            "panels" => Layout::Panels,
                            "shared" => Layout::Shared,
                            other => return Err(f.err(format!("unknown layout `{other}`"))),
                        }
                    }
                    ("output", "directory") => cfg.output = Some(PathBuf::from(&entry.value)),
                    _ => unreachable!("schema and match arms agree"),
                }
            }
            if section.name == "ensemble" {
                cfg.ensemble = Some(EnsembleSpec {
                    count: ensemble_fields.0.ok_or_else(|| ConfigError::missing("ensemble.count"))?,
                    weighting: ensemble_fields.1.unwrap_or_default(),
                    seed: ensemble_fields.2.unwrap_or(0),
                });
            }
            if section.name == "boost" && cfg.boost.is_none() {
                return Err(ConfigError::at(section.line, "boost", "expected `velocity` or `rapidity`"));
            }
        }
        if let (Some(epsilons), total) = convergence_fields {
            cfg.convergence = Some(ConvergenceSpec {
                epsilons,
                total_proper_time: total.ok_or_else(|| ConfigError::missing("covariance.total_proper_time"))?,
            });
        } else if convergence_fields.1.is_some() {
            return Err(ConfigError::missing("covariance.epsilons"));
        }
        if let Some(p) = cfg.initial {
            for (name, v) in [("z1", p.z1), ("z2", p.z2)] {
                if !(v > 0.0 && v < cfg.model.width) {
                    return Err(ConfigError {
                        line: doc.section("initial").map(|s| s.entries[0].line),
                        key: "initial.point".into(),
                        message: format!("{name} = {v} lies outside the well (0, {})", cfg.model.width),
                    });
                }
            }
        }
        Ok(cfg)
    }

    /// `key = value` lines describing the effective configuration.
    pub fn echo(&self) -> Vec<String> {
        let mut out = vec![
            format!("model.width = {}", self.model.width),
            format!("model.mass = {}", self.model.mass),
            format!("model.modes = {}, {}", self.model.modes.0, self.model.modes.1),
        ];
        if let Some(p) = self.initial {
            out.push(format!("initial.point = {}, {}, {}, {}", p.z1, p.t1, p.z2, p.t2));
        }
        out.push(format!("integration.epsilon = {}", self.epsilon));
        out.push(format!("integration.steps = {}", self.steps));
        out.push(format!("integration.scheme = {}", self.scheme));
        if let Some(a) = self.boost {
            out.push(format!("boost.rapidity = {}", a.0));
        }
        if let Some(e) = self.ensemble {
            out.push(format!("ensemble.count = {}", e.count));
            out.push(format!("ensemble.weighting = {}", e.weighting));
            out.push(format!("ensemble.seed = {}", e.seed));
        }
        if let Some(c) = &self.convergence {
            let list: Vec<String> = c.epsilons.iter().map(f64::to_string).collect();
            out.push(format!("covariance.epsilons = {}", list.join(", ")));
            out.push(format!("covariance.total_proper_time = {}", c.total_proper_time));
        }
        out
    }
}
