use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::WeightScheme;
use crate::error::{ItqdeError, Result};
use crate::model::{build_fermi_hubbard, build_tfim, Boundary, Lattice, ObservableSum, PauliTerm};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Tfim {
        j: f64,
        h: f64,
        sites: usize,
        boundary: Boundary,
    },
    FermiHubbard {
        t: f64,
        u: f64,
        mu: f64,
        lattice: Lattice,
        boundary: Boundary,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<ObservableSum> {
        match self {
            ModelSpec::Tfim { j, h, sites, boundary } => build_tfim(*j, *h, *sites, *boundary),
            ModelSpec::FermiHubbard { t, u, mu, lattice, boundary } => {
                build_fermi_hubbard(*t, *u, *mu, lattice, *boundary)
            }
        }
    }
}

/// Pure starting states for the exact and estimator paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    MaximallyMixed,
    Plus,
    Basis(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Fixed,
    Basis,
    Clifford,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodSpec {
    Exact {
        initial: InitialSpec,
    },
    Estimator {
        initial: InitialSpec,
    },
    Sampled {
        shots: u64,
        ensemble: EnsembleKind,
        ensemble_size: usize,
        /// Basis index of the state used by the `fixed` ensemble.
        fixed_state: usize,
        /// Replace shot noise by exact probabilities.
        exact_probabilities: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSpec {
    Single { value: f64 },
    List { values: Vec<f64> },
    Uniform { min: f64, max: f64, points: usize },
    /// `points` values over `[-margin·max|E|, margin·max|E|]`.
    Spectral { margin: f64, points: usize },
}

impl LambdaSpec {
    pub fn grid(&self, max_abs_energy: f64) -> Vec<f64> {
        let uniform = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                return vec![lo];
            }
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        match self {
            LambdaSpec::Single { value } => vec![*value],
            LambdaSpec::List { values } => values.clone(),
            LambdaSpec::Uniform { min, max, points } => uniform(*min, *max, *points),
            LambdaSpec::Spectral { margin, points } => {
                let r = margin * max_abs_energy;
                uniform(-r, r, *points)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItqdeSpec {
    pub dtau: f64,
    pub m: usize,
    pub scheme: WeightScheme,
    pub lambda: LambdaSpec,
    pub window: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub label: String,
    /// Terms like `"0.5*ZZI"`.
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default = "default_orders")]
    pub gauss_hermite_orders: Vec<usize>,
    /// Operator checks are skipped above this many qubits.
    #[serde(default = "default_operator_qubits")]
    pub max_operator_qubits: usize,
}

fn default_orders() -> Vec<usize> {
    vec![2, 4, 8, 16]
}

fn default_operator_qubits() -> usize {
    8
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            gauss_hermite_orders: default_orders(),
            max_operator_qubits: default_operator_qubits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub model: ModelSpec,
    pub method: MethodSpec,
    pub itqde: ItqdeSpec,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
}

fn bad(path: &str, message: impl Into<String>) -> ItqdeError {
    ItqdeError::config(path, message)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| bad("", e.to_string()))?;
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            bad(&path, e.into_inner().message().to_string())
        })?;
        let cfg = raw.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| bad("", e.to_string()))
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        let it = &self.itqde;
        if !(it.dtau > 0.0 && it.dtau.is_finite()) {
            return Err(bad("itqde.dtau", format!("must be positive, got {}", it.dtau)));
        }
        if it.m == 0 || it.m % 2 == 1 {
            return Err(bad("itqde.m", format!("must be even and positive, got {}", it.m)));
        }
        if let Some(w) = it.window {
            if w == 0 || w > it.m / 2 {
                return Err(bad("itqde.window", format!("must lie in 1..={}, got {w}", it.m / 2)));
            }
        }
        match &it.lambda {
            LambdaSpec::Single { value } if !value.is_finite() => {
                return Err(bad("itqde.lambda.value", "must be finite"));
            }
            LambdaSpec::List { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(bad("itqde.lambda.values", "must be non-empty and finite"));
                }
                if values.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad("itqde.lambda.values", "must be strictly increasing"));
                }
            }
            LambdaSpec::Uniform { min, max, points } => {
                if *points == 0 || !(min.is_finite() && max.is_finite()) || (*points > 1 && max <= min) {
                    return Err(bad("itqde.lambda", "need finite min < max and points >= 1"));
                }
            }
            LambdaSpec::Spectral { margin, points } => {
                if *points == 0 || !(*margin > 0.0 && margin.is_finite()) {
                    return Err(bad("itqde.lambda", "need margin > 0 and points >= 1"));
                }
            }
            _ => {}
        }
        if let MethodSpec::Sampled { shots, ensemble_size, .. } = &self.method {
            if *shots == 0 {
                return Err(bad("method.shots", "must be at least 1"));
            }
            if *ensemble_size == 0 {
                return Err(bad("method.ensemble_size", "must be at least 1"));
            }
        }
        if let MethodSpec::Estimator { initial: InitialSpec::MaximallyMixed } = &self.method {
            return Err(bad("method.initial", "the estimator path needs a pure state"));
        }
        for (i, o) in self.observables.iter().enumerate() {
            if o.label == "H" {
                return Err(bad(&format!("observables[{i}].label"), "\"H\" is reserved"));
            }
            if o.terms.is_empty() {
                return Err(bad(&format!("observables[{i}].terms"), "must not be empty"));
            }
        }
        Ok(())
    }

    /// `H` first, then the configured observables.
    pub fn observables(&self, hamiltonian: &ObservableSum) -> Result<Vec<(String, ObservableSum)>> {
        let n = hamiltonian.qubit_count();
        let mut out = vec![("H".to_string(), hamiltonian.clone())];
        for (i, o) in self.observables.iter().enumerate() {
            let terms = o
                .terms
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    t.parse::<PauliTerm>()
                        .map_err(|e| bad(&format!("observables[{i}].terms[{k}]"), e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let sum = ObservableSum::new(n, terms)
                .map_err(|e| bad(&format!("observables[{i}]"), e.to_string()))?;
            out.push((o.label.clone(), sum));
        }
        Ok(out)
    }
}

// Tagged enums buffer their content during deserialization, which hides the
// field path of an error. Configs are read through these flat forms instead.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
    model: RawModel,
    method: RawMethod,
    itqde: RawItqde,
    #[serde(default)]
    observables: Vec<ObservableSpec>,
    #[serde(default)]
    analysis: AnalysisSpec,
}

#[derive(Deserialize, Clone, Copy, PartialEq)]
#[serde(rename_all = "snake_case")]
enum ModelKind {
    Tfim,
    FermiHubbard,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: ModelKind,
    j: Option<f64>,
    h: Option<f64>,
    sites: Option<usize>,
    t: Option<f64>,
    u: Option<f64>,
    mu: Option<f64>,
    lattice: Option<Lattice>,
    boundary: Option<Boundary>,
}

#[derive(Deserialize, Clone, Copy, PartialEq)]
#[serde(rename_all = "snake_case")]
enum MethodKind {
    Exact,
    Estimator,
    Sampled,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMethod {
    kind: MethodKind,
    initial: Option<InitialSpec>,
    shots: Option<u64>,
    ensemble: Option<EnsembleKind>,
    ensemble_size: Option<usize>,
    fixed_state: Option<usize>,
    exact_probabilities: Option<bool>,
}

#[derive(Deserialize, Clone, Copy, PartialEq)]
#[serde(rename_all = "snake_case")]
enum LambdaKind {
    Single,
    List,
    Uniform,
    Spectral,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLambda {
    kind: LambdaKind,
    value: Option<f64>,
    values: Option<Vec<f64>>,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
    margin: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawItqde {
    dtau: f64,
    m: usize,
    #[serde(default)]
    scheme: WeightScheme,
    lambda: RawLambda,
    #[serde(default)]
    window: Option<usize>,
}

fn need<T>(v: Option<T>, path: &str) -> Result<T> {
    v.ok_or_else(|| bad(path, "missing field"))
}

fn unused(present: &[(&str, bool)], section: &str, kind: &str) -> Result<()> {
    match present.iter().find(|(_, p)| *p) {
        Some((name, _)) => Err(bad(&format!("{section}.{name}"), format!("not used by kind {kind:?}"))),
        None => Ok(()),
    }
}

impl RawConfig {
    fn into_config(self) -> Result<RunConfig> {
        let m = self.model;
        let model = match m.kind {
            ModelKind::Tfim => {
                unused(&[("t", m.t.is_some()), ("u", m.u.is_some()), ("mu", m.mu.is_some()), ("lattice", m.lattice.is_some())], "model", "tfim")?;
                ModelSpec::Tfim {
                    j: need(m.j, "model.j")?,
                    h: need(m.h, "model.h")?,
                    sites: need(m.sites, "model.sites")?,
                    boundary: m.boundary.unwrap_or(Boundary::Open),
                }
            }
            ModelKind::FermiHubbard => {
                unused(&[("j", m.j.is_some()), ("h", m.h.is_some()), ("sites", m.sites.is_some())], "model", "fermi_hubbard")?;
                ModelSpec::FermiHubbard {
                    t: need(m.t, "model.t")?,
                    u: need(m.u, "model.u")?,
                    mu: need(m.mu, "model.mu")?,
                    lattice: need(m.lattice, "model.lattice")?,
                    boundary: m.boundary.unwrap_or(Boundary::Open),
                }
            }
        };
        let me = self.method;
        let sampled_fields = [
            ("shots", me.shots.is_some()),
            ("ensemble", me.ensemble.is_some()),
            ("ensemble_size", me.ensemble_size.is_some()),
            ("fixed_state", me.fixed_state.is_some()),
            ("exact_probabilities", me.exact_probabilities.is_some()),
        ];
        let method = match me.kind {
            MethodKind::Exact => {
                unused(&sampled_fields, "method", "exact")?;
                MethodSpec::Exact { initial: me.initial.unwrap_or(InitialSpec::MaximallyMixed) }
            }
            MethodKind::Estimator => {
                unused(&sampled_fields, "method", "estimator")?;
                MethodSpec::Estimator { initial: need(me.initial, "method.initial")? }
            }
            MethodKind::Sampled => {
                unused(&[("initial", me.initial.is_some())], "method", "sampled")?;
                MethodSpec::Sampled {
                    shots: need(me.shots, "method.shots")?,
                    ensemble: need(me.ensemble, "method.ensemble")?,
                    ensemble_size: need(me.ensemble_size, "method.ensemble_size")?,
                    fixed_state: me.fixed_state.unwrap_or(0),
                    exact_probabilities: me.exact_probabilities.unwrap_or(false),
                }
            }
        };
        let l = self.itqde.lambda;
        let all = [
            ("value", l.value.is_some()),
            ("values", l.values.is_some()),
            ("min", l.min.is_some()),
            ("max", l.max.is_some()),
            ("points", l.points.is_some()),
            ("margin", l.margin.is_some()),
        ];
        let only = |keep: &[&str], kind: &str| {
            let rest: Vec<(&str, bool)> = all.iter().filter(|(n, _)| !keep.contains(n)).copied().collect();
            unused(&rest, "itqde.lambda", kind)
        };
        let lambda = match l.kind {
            LambdaKind::Single => {
                only(&["value"], "single")?;
                LambdaSpec::Single { value: need(l.value, "itqde.lambda.value")? }
            }
            LambdaKind::List => {
                only(&["values"], "list")?;
                LambdaSpec::List { values: need(l.values, "itqde.lambda.values")? }
            }
            LambdaKind::Uniform => {
                only(&["min", "max", "points"], "uniform")?;
                LambdaSpec::Uniform {
                    min: need(l.min, "itqde.lambda.min")?,
                    max: need(l.max, "itqde.lambda.max")?,
                    points: need(l.points, "itqde.lambda.points")?,
                }
            }
            LambdaKind::Spectral => {
                only(&["margin", "points"], "spectral")?;
                LambdaSpec::Spectral {
                    margin: need(l.margin, "itqde.lambda.margin")?,
                    points: need(l.points, "itqde.lambda.points")?,
                }
            }
        };
        Ok(RunConfig {
            name: self.name,
            seed: self.seed,
            output: self.output,
            model,
            method,
            itqde: ItqdeSpec {
                dtau: self.itqde.dtau,
                m: self.itqde.m,
                scheme: self.itqde.scheme,
                lambda,
                window: self.itqde.window,
            },
            observables: self.observables,
            analysis: self.analysis,
        })
    }
}

const TFIM8: &str = r#"
name = "tfim8-mixed"
seed = 1

[model]
kind = "tfim"
j = 1.0
h = 14.0
sites = 8
boundary = "open"

[method]
kind = "exact"
initial = "maximally_mixed"

[itqde]
dtau = 0.4e-5
m = 1000
scheme = "exact_binomial"
lambda = { kind = "spectral", margin = 1.1, points = 200 }
"#;

const FH4: &str = r#"
name = "fh4-mixed"
seed = 1

[model]
kind = "fermi_hubbard"
t = -1.0
u = 2.0
mu = 0.5
lattice = { shape = "rect", rows = 2, cols = 2 }
boundary = "periodic"

[method]
kind = "exact"
initial = "maximally_mixed"

[itqde]
dtau = 0.003
m = 1500
scheme = "exact_binomial"
lambda = { kind = "spectral", margin = 1.1, points = 200 }
"#;

const TFIM2_SAMPLED: &str = r#"
name = "tfim2-sampled"
seed = 2024

[model]
kind = "tfim"
j = 1.0
h = 2.0
sites = 2
boundary = "open"

[method]
kind = "sampled"
shots = 4000
ensemble = "clifford"
ensemble_size = 104

[itqde]
dtau = 0.01
m = 100
scheme = "exact_binomial"
lambda = { kind = "list", values = [-4.5, -1.5, 1.5, 4.5] }
"#;

const TFIM8_PURE: &str = r#"
name = "tfim8-pure"
seed = 1

[model]
kind = "tfim"
j = 1.0
h = 14.0
sites = 8
boundary = "open"

[method]
kind = "exact"
initial = { basis = 0 }

[itqde]
dtau = 0.4e-5
m = 1000
scheme = "exact_binomial"
lambda = { kind = "spectral", margin = 1.1, points = 200 }
"#;

const TFIM3_EST: &str = r#"
name = "tfim3-estimator"
seed = 1

[model]
kind = "tfim"
j = 1.0
h = 2.0
sites = 3
boundary = "open"

[method]
kind = "estimator"
initial = { basis = 0 }

[itqde]
dtau = 0.01
m = 400
scheme = "exact_binomial"
lambda = { kind = "single", value = 0.0 }
"#;

const PRESETS: [(&str, &str); 5] = [
    ("tfim8-mixed", TFIM8),
    ("fh4-mixed", FH4),
    ("tfim2-sampled", TFIM2_SAMPLED),
    ("tfim8-pure", TFIM8_PURE),
    ("tfim3-estimator", TFIM3_EST),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// The TOML text of a preset.
pub fn preset_toml(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| t.trim_start())
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let text = preset_toml(name)
        .ok_or_else(|| bad("preset", format!("unknown preset {name:?}; known: {:?}", preset_names())))?;
    RunConfig::from_toml(text)
}
