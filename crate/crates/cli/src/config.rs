//! Run configuration: flat `dotted.key = value` text or JSON.

use std::collections::BTreeMap;
use std::fmt;

use frackpz_core::solvers::{LinearBackend, SolverOptions};
use frackpz_core::{DomainSpec, ProblemParams, SourceSpec};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            key: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l} ({k}): {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Auto,
    Monotone,
    Picard,
    Schauder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Auto,
    Bump,
    Power,
    Torsion,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Ball,
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub dim: usize,
    pub s: f64,
    pub q: f64,
    pub lambda: f64,
    #[serde(with = "frackpz_core::io::extended_f64")]
    pub m: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            dim: 1,
            s: 0.75,
            q: 1.2,
            lambda: 0.0,
            m: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub kind: Shape,
    pub radius: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            kind: Shape::Ball,
            radius: 1.0,
            a: -1.0,
            b: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub tol_inner: f64,
    pub tol_outer: f64,
    pub omega: f64,
    pub max_inner: usize,
    pub max_iterations: usize,
    pub tol_mono_rel: f64,
    pub snapshots: usize,
    pub backend: LinearBackend,
    /// Potential constant `C₁` for the Picard scheme; measured when absent.
    pub c1: Option<f64>,
    /// Gradient constant `C₀` for the Schauder scheme; measured when absent.
    pub c0: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverConfig {
            scheme: Scheme::Auto,
            tol_inner: o.tol_inner,
            tol_outer: o.tol_outer,
            omega: o.omega,
            max_inner: o.max_inner,
            max_iterations: o.max_iterations,
            tol_mono_rel: o.tol_mono_rel,
            snapshots: o.snapshots,
            backend: o.backend,
            c1: None,
            c0: None,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol_inner: self.tol_inner,
            tol_outer: self.tol_outer,
            omega: self.omega,
            max_inner: self.max_inner,
            max_iterations: self.max_iterations,
            tol_mono_rel: self.tol_mono_rel,
            snapshots: self.snapshots,
            backend: self.backend,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupersolutionConfig {
    pub family: Family,
    /// Bump exponent in `(1, 2s)`; defaults to `(1+2s)/2`.
    pub alpha: Option<f64>,
    /// Distance of the power singularity from the origin; defaults to `1.5 R`.
    pub shift: Option<f64>,
}

impl Default for SupersolutionConfig {
    fn default() -> Self {
        SupersolutionConfig {
            family: Family::Auto,
            alpha: None,
            shift: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub count: usize,
    pub bisection_steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lambda_min: 0.0,
            lambda_max: 1.0,
            count: 11,
            bisection_steps: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub samples: usize,
    /// Singular-weight exponent in `(1, 2s)`.
    pub alpha: Option<f64>,
    /// Bootstrap integrability index, `σ > N/(2s-1)`.
    pub sigma: Option<f64>,
    /// Bootstrap starting exponent in `(1, p_*)`.
    pub r1: Option<f64>,
    pub steps: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 10_000,
            alpha: None,
            sigma: None,
            r1: None,
            steps: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub domain: DomainConfig,
    pub grid_n: usize,
    pub source: SourceSpec,
    pub solver: SolverConfig,
    pub supersolution: SupersolutionConfig,
    pub sweep: Option<SweepConfig>,
    pub verify: VerifyConfig,
    pub output_dir: Option<String>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamsConfig::default(),
            domain: DomainConfig::default(),
            grid_n: 128,
            source: SourceSpec::Constant { value: 1.0 },
            solver: SolverConfig::default(),
            supersolution: SupersolutionConfig::default(),
            sweep: None,
            verify: VerifyConfig::default(),
            output_dir: None,
            seed: frackpz_core::diagnostics::DEFAULT_SEED,
        }
    }
}

/// Parsed configuration plus the line each key came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub lines: BTreeMap<String, usize>,
}

impl LoadedConfig {
    fn error_for(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.lines.get(key).copied(),
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    /// Checks every field against the problem invariants and builds the parameters.
    pub fn problem(&self) -> Result<ProblemParams, ConfigError> {
        let c = &self.config;
        let p = &c.params;
        if !(p.s > 0.5 && p.s < 1.0) {
            return Err(self.error_for("params.s", format!("s = {} must lie in (1/2, 1)", p.s)));
        }
        if !(p.q > 1.0) || !p.q.is_finite() {
            return Err(self.error_for("params.q", format!("q = {} must be > 1", p.q)));
        }
        if !(p.lambda >= 0.0) || !p.lambda.is_finite() {
            return Err(self.error_for(
                "params.lambda",
                format!("lambda = {} must be finite and >= 0", p.lambda),
            ));
        }
        if !(p.m >= 1.0) {
            return Err(self.error_for("params.m", format!("m = {} must be >= 1", p.m)));
        }
        if c.grid_n < 8 {
            return Err(self.error_for("grid_n", format!("grid_n = {} must be >= 8", c.grid_n)));
        }
        let domain = match c.domain.kind {
            Shape::Ball => {
                if p.dim == 0 || p.dim > 3 {
                    return Err(self.error_for("params.dim", format!("dim = {} must be 1, 2 or 3", p.dim)));
                }
                DomainSpec::ball(c.domain.radius, p.dim, c.grid_n)
                    .map_err(|e| self.error_for("domain.radius", e.to_string()))?
            }
            Shape::Interval => {
                if p.dim != 1 {
                    return Err(self.error_for("params.dim", "an interval domain needs dim = 1"));
                }
                DomainSpec::interval(c.domain.a, c.domain.b, c.grid_n)
                    .map_err(|e| self.error_for("domain.a", e.to_string()))?
            }
        };
        c.source
            .validate(p.dim)
            .map_err(|e| self.error_for("source.kind", e.to_string()))?;
        let o = &c.solver;
        if !(o.omega > 0.0 && o.omega <= 1.0) {
            return Err(self.error_for("solver.omega", "omega must lie in (0, 1]"));
        }
        for (key, v) in [
            ("solver.tol_inner", o.tol_inner),
            ("solver.tol_outer", o.tol_outer),
            ("solver.tol_mono_rel", o.tol_mono_rel),
        ] {
            if !(v > 0.0) {
                return Err(self.error_for(key, "tolerance must be > 0"));
            }
        }
        if let Some(sw) = &c.sweep {
            if !(sw.lambda_min >= 0.0 && sw.lambda_max >= sw.lambda_min && sw.lambda_max.is_finite()) {
                return Err(self.error_for("sweep.lambda_max", "need 0 <= lambda_min <= lambda_max < inf"));
            }
            if sw.count < 2 {
                return Err(self.error_for("sweep.count", "a sweep needs at least 2 points"));
            }
        }
        ProblemParams::new(p.s, p.q, p.lambda, p.m, domain).map_err(|e| ConfigError {
            line: None,
            key: None,
            message: e.to_string(),
        })
    }
}

/// Scalar value of one `key = value` line.
fn typed_value(raw: &str, line: usize) -> Result<Value, ConfigError> {
    let v = raw.trim();
    if v.starts_with('[') || v.starts_with('{') {
        return serde_json::from_str(v).map_err(|e| ConfigError::at(line, format!("bad JSON value: {e}")));
    }
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        return Ok(Value::String(v[1..v.len() - 1].to_string()));
    }
    match v {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    if let Ok(i) = v.parse::<i64>() {
        return Ok(Value::Number(i.into()));
    }
    if let Ok(x) = v.parse::<f64>() {
        if let Some(n) = Number::from_f64(x) {
            return Ok(Value::Number(n));
        }
    }
    Ok(Value::String(v.to_string()))
}

fn insert(root: &mut Map<String, Value>, key: &str, value: Value, line: usize) -> Result<(), ConfigError> {
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = root;
    for (k, part) in parts.iter().enumerate() {
        if part.is_empty() || !part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::at(line, format!("malformed key {key:?}")));
        }
        if k + 1 == parts.len() {
            if node.contains_key(*part) {
                return Err(ConfigError::at(line, format!("duplicate key {key:?}")));
            }
            node.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        node = match entry {
            Value::Object(m) => m,
            _ => return Err(ConfigError::at(line, format!("{key:?} extends a scalar key"))),
        };
    }
    Ok(())
}

fn parse_key_values(text: &str) -> Result<(Value, BTreeMap<String, usize>), ConfigError> {
    let mut root = Map::new();
    let mut lines = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got {content:?}")))?;
        let key = key.trim();
        if value.trim().is_empty() {
            return Err(ConfigError::at(line, format!("missing value for {key:?}")));
        }
        insert(&mut root, key, typed_value(value, line)?, line)?;
        lines.insert(key.to_string(), line);
    }
    Ok((Value::Object(root), lines))
}

/// Dotted paths of every leaf in a JSON document, for error anchoring.
fn json_lines(text: &str, value: &Value) -> BTreeMap<String, usize> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<String>) {
        if let Value::Object(m) = v {
            for (k, child) in m {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                walk(&path, child, out);
                out.push(path);
            }
        }
    }
    let mut keys = Vec::new();
    walk("", value, &mut keys);
    keys.into_iter()
        .filter_map(|path| {
            let leaf = path.rsplit('.').next().unwrap_or(&path).to_string();
            let needle = format!("\"{leaf}\"");
            text.lines().position(|l| l.contains(&needle)).map(|i| (path, i + 1))
        })
        .collect()
}

/// Parses key-value text, or JSON when the first non-blank character is `{`.
pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let (value, lines) = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| ConfigError::at(e.line(), e.to_string()))?;
        let lines = json_lines(text, &v);
        (v, lines)
    } else {
        parse_key_values(text)?
    };
    let config: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let line = lines.get(&path).copied().or_else(|| {
            lines
                .iter()
                .filter(|(k, _)| k.starts_with(&path) || path.starts_with(k.as_str()))
                .map(|(_, &l)| l)
                .min()
        });
        ConfigError {
            line,
            key: (path != ".").then_some(path),
            message: e.into_inner().to_string(),
        }
    })?;
    Ok(LoadedConfig { config, lines })
}

impl RunConfig {
    pub fn loaded(self) -> LoadedConfig {
        LoadedConfig {
            config: self,
            lines: BTreeMap::new(),
        }
    }
}
