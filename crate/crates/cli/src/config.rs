//! Flat `key = value` run configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use tavis_core::basis::ModelParams;
use tavis_core::observables::TRUNCATION_WARNING;
use tavis_core::{Error, Method, Result};

pub const REQUIRED_KEYS: [&str; 10] = [
    "omega_c_ghz",
    "omega_s_ghz",
    "g_ghz",
    "lambda_ghz",
    "omega_drive_ghz",
    "n_cavity",
    "two_j",
    "dt_ns",
    "n_steps",
    "out",
];

pub const OPTIONAL_KEYS: [&str; 2] = ["method", "stride"];

/// How `simulate` evolves the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMethod {
    Exp,
    Linear,
    Dense,
    Hp,
}

impl RunMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMethod::Exp => "exp",
            RunMethod::Linear => "linear",
            RunMethod::Dense => "dense",
            RunMethod::Hp => "hp",
        }
    }

    /// The split-operator method, if this is one.
    pub fn split_operator(self) -> Option<Method> {
        match self {
            RunMethod::Exp => Some(Method::Exp),
            RunMethod::Linear => Some(Method::Linear),
            RunMethod::Dense | RunMethod::Hp => None,
        }
    }
}

impl fmt::Display for RunMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exp" => Ok(RunMethod::Exp),
            "linear" => Ok(RunMethod::Linear),
            "dense" => Ok(RunMethod::Dense),
            "hp" => Ok(RunMethod::Hp),
            other => Err(format!("unknown method `{other}` (expected exp, linear, dense or hp)")),
        }
    }
}

/// Frequencies as written by the user, in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequenciesGhz {
    pub omega_c: f64,
    pub omega_s: f64,
    pub g: f64,
    pub lambda: f64,
    pub omega_drive: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ghz: FrequenciesGhz,
    /// Internal units (rad/ns).
    pub params: ModelParams,
    pub dt: f64,
    pub n_steps: usize,
    pub method: RunMethod,
    pub stride: usize,
    pub out: PathBuf,
    pub truncation_threshold: f64,
}

impl RunConfig {
    /// Informational remarks about the parameters.
    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.params.is_resonant(1e-12) {
            notes.push(format!(
                "resonant drive: omega_c + omega_s = omega ({} + {} = {} GHz)",
                self.ghz.omega_c, self.ghz.omega_s, self.ghz.omega_drive
            ));
        }
        notes
    }

    /// The configuration in the same text form it was parsed from.
    pub fn to_lines(&self) -> Vec<String> {
        vec![
            format!("omega_c_ghz = {}", self.ghz.omega_c),
            format!("omega_s_ghz = {}", self.ghz.omega_s),
            format!("g_ghz = {}", self.ghz.g),
            format!("lambda_ghz = {}", self.ghz.lambda),
            format!("omega_drive_ghz = {}", self.ghz.omega_drive),
            format!("n_cavity = {}", self.params.n_cavity),
            format!("two_j = {}", self.params.two_j),
            format!("dt_ns = {}", self.dt),
            format!("n_steps = {}", self.n_steps),
            format!("method = {}", self.method),
            format!("stride = {}", self.stride),
            format!("out = {}", self.out.display()),
        ]
    }

    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn parse_value<T: FromStr>(key: &str, e: &Entry<'_>) -> Result<T>
where
    T::Err: fmt::Display,
{
    e.value
        .parse::<T>()
        .map_err(|err| Error::Config(format!("line {}: `{key}`: cannot parse `{}`: {err}", e.line, e.value)))
}

fn parse_finite(key: &str, e: &Entry<'_>) -> Result<f64> {
    let v: f64 = parse_value(key, e)?;
    if !v.is_finite() {
        return Err(Error::Config(format!("line {}: `{key}` must be finite, got {v}", e.line)));
    }
    Ok(v)
}

/// Parse configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: HashMap<&str, Entry<'_>> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line}: expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
            return Err(Error::Config(format!("line {line}: unknown key `{key}`")));
        }
        if let Some(prev) = entries.get(key) {
            return Err(Error::Config(format!(
                "line {line}: `{key}` already set on line {}",
                prev.line
            )));
        }
        entries.insert(key, Entry { line, value });
    }

    let missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| !entries.contains_key(k)).collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!("missing required keys: {}", missing.join(", "))));
    }
    let get = |k: &str| &entries[k];

    let ghz = FrequenciesGhz {
        omega_c: parse_finite("omega_c_ghz", get("omega_c_ghz"))?,
        omega_s: parse_finite("omega_s_ghz", get("omega_s_ghz"))?,
        g: parse_finite("g_ghz", get("g_ghz"))?,
        lambda: parse_finite("lambda_ghz", get("lambda_ghz"))?,
        omega_drive: parse_finite("omega_drive_ghz", get("omega_drive_ghz"))?,
    };
    let n_cavity: usize = parse_value("n_cavity", get("n_cavity"))?;
    let two_j: u32 = parse_value("two_j", get("two_j"))?;
    let dt = parse_finite("dt_ns", get("dt_ns"))?;
    if !(dt > 0.0) {
        return Err(Error::Config(format!("line {}: `dt_ns` must be positive, got {dt}", get("dt_ns").line)));
    }
    let n_steps: usize = parse_value("n_steps", get("n_steps"))?;
    let method = match entries.get("method") {
        Some(e) => e.value.parse::<RunMethod>().map_err(|m| Error::Config(format!("line {}: {m}", e.line)))?,
        None => RunMethod::Linear,
    };
    let stride = match entries.get("stride") {
        Some(e) => {
            let s: usize = parse_value("stride", e)?;
            if s == 0 {
                return Err(Error::Config(format!("line {}: `stride` must be at least 1", e.line)));
            }
            s
        }
        None => 1,
    };
    let out = get("out");
    if out.value.is_empty() {
        return Err(Error::Config(format!("line {}: `out` is empty", out.line)));
    }

    let params = ModelParams::from_ghz(ghz.omega_c, ghz.omega_s, ghz.g, ghz.lambda, ghz.omega_drive, n_cavity, two_j);
    params.validate()?;
    Ok(RunConfig {
        ghz,
        params,
        dt,
        n_steps,
        method,
        stride,
        out: PathBuf::from(out.value),
        truncation_threshold: TRUNCATION_WARNING,
    })
}
