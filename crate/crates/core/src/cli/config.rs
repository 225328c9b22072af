//! Flat key/value experiment configuration with per-experiment key sets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value as Json;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    WignerPanels,
    ZenoSpectrum,
    ThresholdScan,
    DichotomicSurvival,
    CoupledSync,
    SyncScan,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::WignerPanels,
        Experiment::ZenoSpectrum,
        Experiment::ThresholdScan,
        Experiment::DichotomicSurvival,
        Experiment::CoupledSync,
        Experiment::SyncScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::WignerPanels => "wigner-panels",
            Experiment::ZenoSpectrum => "zeno-spectrum",
            Experiment::ThresholdScan => "threshold-scan",
            Experiment::DichotomicSurvival => "dichotomic-survival",
            Experiment::CoupledSync => "coupled-sync",
            Experiment::SyncScan => "sync-scan",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                CliError::Usage(format!("unknown experiment '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Str(String),
    Floats(Vec<f64>),
    Ints(Vec<u64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    Str,
    Floats,
    Ints,
}

impl Value {
    fn kind(&self) -> Kind {
        match self {
            Value::Float(_) => Kind::Float,
            Value::Int(_) => Kind::Int,
            Value::Str(_) => Kind::Str,
            Value::Floats(_) => Kind::Floats,
            Value::Ints(_) => Kind::Ints,
        }
    }

    /// JSON form; non-finite floats become the strings `inf`, `-inf`, `nan`.
    pub fn to_json(&self) -> Json {
        fn f(x: f64) -> Json {
            if x.is_finite() {
                Json::from(x)
            } else {
                Json::from(x.to_string())
            }
        }
        match self {
            Value::Float(x) => f(*x),
            Value::Int(n) => Json::from(*n),
            Value::Str(s) => Json::from(s.clone()),
            Value::Floats(v) => Json::Array(v.iter().map(|x| f(*x)).collect()),
            Value::Ints(v) => Json::Array(v.iter().map(|n| Json::from(*n)).collect()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

fn float_of_toml(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(n) => Some(*n as f64),
        toml::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn int_of_toml(v: &toml::Value) -> Option<u64> {
    match v {
        toml::Value::Integer(n) if *n >= 0 => Some(*n as u64),
        // allow 5e4-style counts when they are whole numbers
        toml::Value::Float(x) if *x >= 0.0 && x.fract() == 0.0 && *x < 1.8e19 => Some(*x as u64),
        _ => None,
    }
}

fn coerce(kind: Kind, v: &toml::Value) -> Option<Value> {
    match kind {
        Kind::Float => float_of_toml(v).map(Value::Float),
        Kind::Int => int_of_toml(v).map(Value::Int),
        Kind::Str => v.as_str().map(|s| Value::Str(s.to_string())),
        Kind::Floats => match v {
            toml::Value::Array(a) => a.iter().map(float_of_toml).collect::<Option<Vec<_>>>().map(Value::Floats),
            other => float_of_toml(other).map(|x| Value::Floats(vec![x])),
        },
        Kind::Ints => match v {
            toml::Value::Array(a) => a.iter().map(int_of_toml).collect::<Option<Vec<_>>>().map(Value::Ints),
            other => int_of_toml(other).map(|n| Value::Ints(vec![n])),
        },
    }
}

fn json_to_toml(v: &Json) -> Option<toml::Value> {
    Some(match v {
        Json::Bool(b) => toml::Value::Boolean(*b),
        Json::Number(n) => match n.as_i64() {
            Some(i) => toml::Value::Integer(i),
            None => toml::Value::Float(n.as_f64()?),
        },
        Json::String(s) => toml::Value::String(s.clone()),
        Json::Array(a) => toml::Value::Array(a.iter().map(json_to_toml).collect::<Option<Vec<_>>>()?),
        _ => return None,
    })
}

/// One accepted key with its default.
struct Param {
    key: &'static str,
    default: Value,
    /// Replaces the default under `--paper-scale`.
    paper: Option<Value>,
    help: &'static str,
}

fn p(key: &'static str, default: Value, help: &'static str) -> Param {
    Param { key, default, paper: None, help }
}

fn scaled(key: &'static str, default: u64, paper: u64, help: &'static str) -> Param {
    Param { key, default: Value::Int(default), paper: Some(Value::Int(paper)), help }
}

use Value::{Float as F, Floats as Fs, Int as I, Ints as Is, Str as S};

fn common() -> Vec<Param> {
    vec![
        p("omega_m", F(1.0), "oscillator angular frequency"),
        p("kappa1", F(0.1), "linear gain rate"),
        p("kappa2", F(0.005), "two-excitation loss rate"),
        p("seed", I(20_240_601), "base random seed"),
        p("out_dir", S("out".into()), "output directory"),
    ]
}

fn params_for(e: Experiment) -> Vec<Param> {
    let mut v = common();
    let inf = f64::INFINITY;
    match e {
        Experiment::WignerPanels => v.extend([
            p("dt", F(0.005), "integration step"),
            scaled("n_traj", 50_000, 500_000, "trajectories per row"),
            p("delta_ts", Fs(vec![inf, 10.0, 1.0]), "measurement interval of each row (inf = none)"),
            p("times", Fs(vec![0.0, 60.0, 120.0, 180.0]), "snapshot times"),
            p("h", F(0.1), "histogram pixel side in quadrature units"),
            p("extent", F(10.0), "histogram half-width in quadrature units"),
        ]),
        Experiment::ZenoSpectrum => v.extend([
            p("dt", F(0.005), "integration step"),
            p("n_traj", I(5_000), "trajectories"),
            p("total_time", F(600.0), "evolution time"),
            p("n_values", Is(vec![0, 4, 16, 64, 128, 211, 400, 1000, 4000, 12_000, 120_000]), "measurement counts"),
            p("record_dt", F(0.05), "sampling interval of the mean quadrature"),
        ]),
        Experiment::ThresholdScan => v.extend([
            p("dt", F(0.005), "integration step"),
            p("delta_t", F(0.3), "measurement interval"),
            p("total_time", F(600.0), "evolution time"),
            p(
                "ratios",
                Fs(vec![1e-4, 1.5e-4, 2e-4, 3e-4, 5e-4, 7e-4, 1e-3, 1.5e-3, 2e-3, 3e-3, 5e-3, 7e-3, 1e-2]),
                "kappa2/kappa1 grid",
            ),
            p("repeats", I(10), "single-trajectory spectra averaged per point"),
            p("record_dt", F(0.05), "sampling interval of the quadrature"),
        ]),
        Experiment::DichotomicSurvival => v.extend([
            p("dim", I(50), "Fock-space truncation"),
            p("fock_dt", F(1e-3), "master-equation step"),
            p("steady_dt", F(1e-2), "step used while relaxing to the steady state"),
            p(
                "delta_ts",
                Fs(vec![0.001, 0.002, 0.003, 0.004, 0.005, 0.01, 0.02, 0.04, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0]),
                "measurement intervals",
            ),
            p("total_time", F(2.0), "window for the stay probability"),
            p("n_values", Is(vec![10, 20, 50, 100, 200, 500, 1000]), "measurement counts in the window"),
            p("h", F(0.1), "Wigner grid spacing in quadrature units"),
            p("extent", F(8.0), "Wigner grid half-width in quadrature units"),
        ]),
        Experiment::CoupledSync | Experiment::SyncScan => {
            v.extend([
                p("dt", F(0.02), "integration step"),
                p("mu", F(0.02), "coupling rate"),
                p("delta_omega", F(0.01), "frequency difference omega_1 - omega_2"),
                p("n_traj", I(50_000), "trajectory pairs per repetition"),
                p("total_time", F(200.0), "averaging window T"),
                p("record_dt", F(1.0), "sampling interval of the phase-difference density"),
                p("repetitions", I(20), "independent repetitions M"),
                p("baseline_time", F(400.0), "length of the unmeasured reference run"),
                p("baseline_from", F(200.0), "start of the stationary window of the reference run"),
            ]);
            if e == Experiment::CoupledSync {
                v.push(p("delta_t", F(10.0), "measurement interval"));
            } else {
                v.push(p("delta_ts", Fs(vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]), "measurement intervals"));
            }
        }
    }
    v
}

/// Resolved key/value set for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub values: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    /// Defaults, optionally at paper scale.
    pub fn defaults(experiment: Experiment, paper_scale: bool) -> Self {
        let values = params_for(experiment)
            .into_iter()
            .map(|p| {
                let v = if paper_scale { p.paper.unwrap_or(p.default) } else { p.default };
                (p.key.to_string(), v)
            })
            .collect();
        Self { experiment, values }
    }

    /// Accepted keys with defaults and help text.
    pub fn describe(experiment: Experiment) -> Vec<(&'static str, String, &'static str)> {
        params_for(experiment).into_iter().map(|p| (p.key, p.default.to_string(), p.help)).collect()
    }

    pub fn set_toml(&mut self, key: &str, v: &toml::Value) -> Result<(), CliError> {
        let current = self.values.get(key).ok_or_else(|| {
            CliError::Usage(format!("unknown key '{key}' for experiment {}", self.experiment))
        })?;
        let value = coerce(current.kind(), v)
            .ok_or_else(|| CliError::Usage(format!("invalid value {v} for key '{key}'")))?;
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    /// Apply `key=value`; the value uses TOML syntax, bare words are strings.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, got '{assignment}'")))?;
        let (key, raw) = (key.trim(), raw.trim());
        let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").unwrap_or(toml::Value::String(raw.to_string())),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        self.set_toml(key, &parsed)
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("cannot parse config {}: {e}", path.display())))?;
        for (k, v) in &table {
            if k == "experiment" {
                if v.as_str() != Some(self.experiment.name()) {
                    return Err(CliError::Usage(format!(
                        "config file is for experiment {v}, not {}",
                        self.experiment
                    )));
                }
                continue;
            }
            self.set_toml(k, v)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        let mut m = serde_json::Map::new();
        for (k, v) in &self.values {
            m.insert(k.clone(), v.to_json());
        }
        Json::Object(m)
    }

    /// Rebuild from the JSON produced by [`to_json`](Self::to_json).
    pub fn from_json(experiment: Experiment, json: &Json) -> Result<Self, CliError> {
        let obj = json
            .as_object()
            .ok_or_else(|| CliError::Usage("manifest config must be an object".into()))?;
        let mut cfg = Self::defaults(experiment, false);
        for (k, v) in obj {
            let t = json_to_toml(v).ok_or_else(|| CliError::Usage(format!("unsupported value for '{k}'")))?;
            cfg.set_toml(k, &t)?;
        }
        Ok(cfg)
    }

    fn get(&self, key: &str) -> &Value {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("key '{key}' is not defined for {}", self.experiment))
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            Value::Int(n) => *n as f64,
            other => panic!("key '{key}' is {other}, not a number"),
        }
    }

    pub fn u64(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::Int(n) => *n,
            other => panic!("key '{key}' is {other}, not an integer"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.u64(key) as usize
    }

    pub fn str(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Str(s) => s,
            other => panic!("key '{key}' is {other}, not a string"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::Floats(v) => v,
            other => panic!("key '{key}' is {other}, not a list of numbers"),
        }
    }

    pub fn ints(&self, key: &str) -> &[u64] {
        match self.get(key) {
            Value::Ints(v) => v,
            other => panic!("key '{key}' is {other}, not a list of integers"),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }
}
