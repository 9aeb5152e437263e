//! Run configuration: a plain `key = value` file (or a JSON object) layered
//! over per-command defaults and under command-line flags.
//!
//! ```text
//! # comments start with '#'
//! seed = 7
//! model = tones
//! freqs = 3, 11
//! snr_db = 20
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Str,
    FloatList,
    Bool,
}

/// Every accepted key, its type and a one-line description.
pub const KEYS: &[(&str, Kind, &str)] = &[
    ("seed", Kind::Int, "base seed; trial t uses stream t of this seed"),
    ("out", Kind::Str, "output directory"),
    ("threads", Kind::Int, "worker threads (0 = all cores)"),
    ("trials", Kind::Int, "Monte Carlo trials"),
    ("M", Kind::Int, "signal dimension"),
    ("L", Kind::Int, "snapshots"),
    ("snr_db", Kind::Float, "SNR in dB (power convention)"),
    ("model", Kind::Str, "white | ar1 | ar | tones | chirp | multipath | graph | heat"),
    ("rho", Kind::Float, "AR(1) coefficient"),
    ("coeffs", Kind::FloatList, "AR coefficients"),
    ("freqs", Kind::FloatList, "tone frequencies in bins"),
    ("amps", Kind::FloatList, "tone amplitudes"),
    ("noise_var", Kind::Float, "model noise variance"),
    ("mu", Kind::Float, "chirp rate"),
    ("graph", Kind::Str, "edge-list file, or K<n>, C<n>, petersen"),
    ("t", Kind::Float, "heat-kernel time"),
    ("group", Kind::Str, "group spec: Z8, Z4xZ2, E2^3, D6, trivial, gen:(0 1 2);(0 1)"),
    ("fast_path", Kind::Bool, "use the FFT estimator for Abelian groups"),
    ("tau", Kind::Float, "sequential GEVP acceptance threshold"),
    ("alpha_gate", Kind::Float, "whiteness gate of the matching pipeline"),
    ("kappa_threshold", Kind::Float, "relative κ̂(2)/κ̂(1) change counted as matched"),
    ("basis", Kind::Str, "natural | transpositions"),
    ("cap", Kind::Int, "group order cap"),
    ("cost", Kind::Str, "cma | mma | ad<M>"),
    ("constellation", Kind::Str, "qpsk | 8psk | bpsk | 16qam"),
    ("step", Kind::Float, "equalizer step size"),
    ("taps", Kind::Int, "equalizer taps (odd)"),
    ("symbols", Kind::Int, "symbols per equalizer run"),
    ("mode", Kind::Str, "plain | stratified"),
    ("strata", Kind::Int, "π strata per round"),
    ("n_total", Kind::Int, "π draw budget"),
];

pub fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, kind, _)| *kind)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }

    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Resolved configuration. `params` holds every key that was set anywhere,
/// including `seed`, so outputs can embed it verbatim.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    pub output_dir: PathBuf,
}

fn typed(key: &str, raw: &str, line: Option<usize>) -> Result<Value, ConfigError> {
    let err = |msg: String| ConfigError { line, message: msg };
    let kind = kind_of(key).ok_or_else(|| err(format!("unknown key '{key}'")))?;
    let float = |s: &str| -> Result<Value, ConfigError> {
        let v: f64 = s.trim().parse().map_err(|_| err(format!("'{key}' expects a number, found '{}'", s.trim())))?;
        Number::from_f64(v).map(Value::Number).ok_or_else(|| err(format!("'{key}' must be finite")))
    };
    Ok(match kind {
        Kind::Int => {
            let v: u64 =
                raw.parse().map_err(|_| err(format!("'{key}' expects a non-negative integer, found '{raw}'")))?;
            Value::from(v)
        }
        Kind::Float => float(raw)?,
        Kind::Str => Value::String(raw.to_string()),
        Kind::Bool => match raw {
            "true" | "1" | "yes" => Value::Bool(true),
            "false" | "0" | "no" => Value::Bool(false),
            _ => return Err(err(format!("'{key}' expects true or false, found '{raw}'"))),
        },
        Kind::FloatList => {
            Value::Array(raw.split(',').filter(|s| !s.trim().is_empty()).map(float).collect::<Result<_, _>>()?)
        }
    })
}

fn check_json(key: &str, v: &Value) -> Result<Value, ConfigError> {
    let kind = kind_of(key).ok_or_else(|| ConfigError::new(format!("unknown key '{key}'")))?;
    let ok = match kind {
        Kind::Int => v.as_u64().is_some(),
        Kind::Float => v.is_number(),
        Kind::Str => v.is_string(),
        Kind::Bool => v.is_boolean(),
        Kind::FloatList => v.as_array().is_some_and(|a| a.iter().all(Value::is_number)),
    };
    if ok {
        Ok(v.clone())
    } else {
        Err(ConfigError::new(format!("'{key}' has the wrong type for {kind:?}")))
    }
}

/// Parses either format. Text whose first non-blank character is '{' is JSON.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, Value>, ConfigError> {
    let mut out = BTreeMap::new();
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| ConfigError::at(e.line(), e.to_string()))?;
        let obj = v.as_object().ok_or_else(|| ConfigError::new("JSON config must be an object"))?;
        for (k, val) in obj {
            out.insert(k.clone(), check_json(k, val)?);
        }
        return Ok(out);
    }
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::at(lineno, format!("expected 'key = value', found '{line}'")))?;
        let key = k.trim();
        if out.contains_key(key) {
            return Err(ConfigError::at(lineno, format!("duplicate key '{key}'")));
        }
        out.insert(key.to_string(), typed(key, v.trim(), Some(lineno))?);
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, Value>, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// An empty or absent file resolves to the defaults with seed 0.
pub fn load_config(path: Option<&Path>, command: &str) -> Result<ExperimentConfig, ConfigError> {
    let params = match path {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    resolve(command, params, BTreeMap::new())
}

/// Layers command-line overrides over file values and fills seed/out.
pub fn resolve(
    command: &str,
    mut file: BTreeMap<String, Value>,
    flags: BTreeMap<String, Value>,
) -> Result<ExperimentConfig, ConfigError> {
    for (k, v) in flags {
        check_json(&k, &v)?;
        file.insert(k, v);
    }
    let seed = file.get("seed").and_then(Value::as_u64).unwrap_or(0);
    file.insert("seed".into(), Value::from(seed));
    let output_dir = PathBuf::from(file.get("out").and_then(Value::as_str).unwrap_or("out"));
    Ok(ExperimentConfig { command: command.to_string(), seed, params: file, output_dir })
}

impl ExperimentConfig {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> f64 {
        self.get(key).and_then(Value::as_f64).unwrap_or(default)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> usize {
        self.get(key).and_then(Value::as_u64).map(|v| v as usize).unwrap_or(default)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).and_then(Value::as_str).unwrap_or(default)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> bool {
        self.get(key).and_then(Value::as_bool).unwrap_or(default)
    }

    pub fn list(&self, key: &str) -> Option<Vec<f64>> {
        self.get(key).and_then(Value::as_array).map(|a| a.iter().filter_map(Value::as_f64).collect())
    }

    /// Records a default so outputs show the value actually used.
    pub fn set_default(&mut self, key: &str, v: Value) {
        self.params.entry(key.to_string()).or_insert(v);
    }

    // The `take_*` readers record the default they fall back to, so the
    // embedded config is the fully resolved one.

    pub fn take_f64(&mut self, key: &str, default: f64) -> f64 {
        self.set_default(key, Value::from(default));
        self.f64_or(key, default)
    }

    pub fn take_usize(&mut self, key: &str, default: usize) -> usize {
        self.set_default(key, Value::from(default as u64));
        self.usize_or(key, default)
    }

    pub fn take_str(&mut self, key: &str, default: &str) -> String {
        self.set_default(key, Value::from(default));
        self.str_or(key, default).to_string()
    }

    pub fn take_bool(&mut self, key: &str, default: bool) -> bool {
        self.set_default(key, Value::from(default));
        self.bool_or(key, default)
    }

    pub fn take_list(&mut self, key: &str, default: &[f64]) -> Vec<f64> {
        self.set_default(key, Value::from(default.to_vec()));
        self.list(key).unwrap_or_else(|| default.to_vec())
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.params {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = resolve("diagnose", parse_config("").unwrap(), BTreeMap::new()).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert_eq!(cfg.f64_or("tau", 0.05), 0.05);
    }

    #[test]
    fn key_value_format() {
        let text = "# run\nseed = 7\n\ntau=0.02   # tighter\nfreqs = 3, 11\nmodel = tones\nfast_path = true\n";
        let p = parse_config(text).unwrap();
        assert_eq!(p["seed"], Value::from(7u64));
        assert_eq!(p["tau"].as_f64(), Some(0.02));
        assert_eq!(p["freqs"], serde_json::json!([3.0, 11.0]));
        assert_eq!(p["model"], "tones");
        assert_eq!(p["fast_path"], true);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config("seed = 1\nbogus = 3\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("unknown key"));
        let e = parse_config("seed = 1\n\ntau = fast\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse_config("seed 1\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = parse_config("tau = 1\ntau = 2\n").unwrap_err();
        assert!(e.message.contains("duplicate"));
        let e = parse_config("{\n  \"seed\": 1,\n  \"tau\": \n}").unwrap_err();
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn json_format() {
        let p = parse_config(r#"{"seed": 3, "freqs": [1, 2.5], "model": "tones"}"#).unwrap();
        assert_eq!(p["seed"], Value::from(3u64));
        assert!(parse_config(r#"{"seed": "x"}"#).is_err());
        assert!(parse_config(r#"{"nope": 1}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("seed = 1\ntau = 0.1\n").unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("seed".to_string(), Value::from(9u64));
        let cfg = resolve("seqgevp", file, flags).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.f64_or("tau", 0.05), 0.1);
    }
}
