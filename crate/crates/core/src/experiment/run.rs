use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::{EnsembleKind, InitialSpec, MethodSpec, RunConfig};
use crate::analysis::{
    crooks_check, discrete_gaussian_operator, generalized_hs_report, hs_integral_operator,
    inversion_alias_sum, invert_itqde_propagator, inversion_times, snap_inversion_m,
    ApproximationRecord, CrooksCheck, GeneralizedHsReport, InversionKernel, Quadrature,
    DEFAULT_HS_ORDER,
};
use crate::assembly::{
    assemble_curve, relative_error, sweep_lambda_with, SpectrumEstimate, SweepOptions, WeightScheme,
};
use crate::error::{ItqdeError, Result};
use crate::model::{eigendecompose, to_dense, DenseHermitian, EigenDecomposition, ObservableSum};
use crate::propagation::{
    evolve_trajectory, maximally_mixed_trajectory, InitialCondition, StateVector, StepPropagator,
    Trajectory, TrajectoryErrors,
};
use crate::sampling::{estimator_trajectory, sample_trajectory, Ensemble, ShotPlan};

/// Everything a run needs before propagation.
pub struct Prepared {
    pub config: RunConfig,
    pub hamiltonian: ObservableSum,
    pub dense: DenseHermitian,
    pub eigen: Arc<EigenDecomposition>,
    pub propagator: StepPropagator,
    pub observables: Vec<(String, ObservableSum)>,
    pub lambdas: Vec<f64>,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let hamiltonian = config.model.build()?;
    let dense = to_dense(&hamiltonian)?;
    let eigen = Arc::new(eigendecompose(&dense)?);
    let propagator = StepPropagator::from_eigen(Arc::clone(&eigen), config.itqde.dtau)?;
    let observables = config.observables(&hamiltonian)?;
    let lambdas = config.itqde.lambda.grid(eigen.max_abs_energy());
    Ok(Prepared {
        config: config.clone(),
        hamiltonian,
        dense,
        eigen,
        propagator,
        observables,
        lambdas,
    })
}

fn pure_state(spec: InitialSpec, qubits: usize) -> Result<Option<StateVector>> {
    Ok(match spec {
        InitialSpec::MaximallyMixed => None,
        InitialSpec::Plus => Some(StateVector::plus(qubits)),
        InitialSpec::Basis(i) => Some(
            StateVector::basis(qubits, i)
                .map_err(|e| ItqdeError::config("method.initial", e.to_string()))?,
        ),
    })
}

pub fn shot_plan(config: &RunConfig, qubits: usize) -> Result<Option<ShotPlan>> {
    let MethodSpec::Sampled { shots, ensemble, ensemble_size, fixed_state, exact_probabilities } =
        &config.method
    else {
        return Ok(None);
    };
    let ensemble = match ensemble {
        EnsembleKind::Fixed => Ensemble::Fixed {
            state: StateVector::basis(qubits, *fixed_state)
                .map_err(|e| ItqdeError::config("method.fixed_state", e.to_string()))?,
        },
        EnsembleKind::Basis => Ensemble::Basis { count: *ensemble_size },
        EnsembleKind::Clifford => Ensemble::Clifford { count: *ensemble_size },
    };
    Ok(Some(ShotPlan {
        shots_per_circuit: *shots,
        seed: config.seed,
        ensemble,
        exact: *exact_probabilities,
    }))
}

pub struct TrajectoryOutput {
    pub trajectory: Trajectory,
    pub errors: Option<TrajectoryErrors>,
    pub circuit_count: Option<u64>,
}

pub fn compute_trajectory(p: &Prepared) -> Result<TrajectoryOutput> {
    let m = p.config.itqde.m;
    let qubits = p.hamiltonian.qubit_count();
    let plain = |trajectory| TrajectoryOutput { trajectory, errors: None, circuit_count: None };
    match &p.config.method {
        MethodSpec::Exact { initial } => Ok(plain(match pure_state(*initial, qubits)? {
            None => maximally_mixed_trajectory(&p.propagator, m, &p.observables)?,
            Some(psi) => evolve_trajectory(&psi, &p.propagator, m, &p.observables)?,
        })),
        MethodSpec::Estimator { initial } => {
            let psi = pure_state(*initial, qubits)?
                .ok_or_else(|| ItqdeError::config("method.initial", "needs a pure state"))?;
            Ok(plain(estimator_trajectory(&psi, &p.propagator, m, &p.observables)?))
        }
        MethodSpec::Sampled { .. } => {
            let plan = shot_plan(&p.config, qubits)?.expect("sampled method");
            let s = sample_trajectory(&p.propagator, m, &p.observables, &plan)?;
            Ok(TrajectoryOutput {
                trajectory: s.trajectory,
                errors: Some(s.errors),
                circuit_count: Some(s.circuit_count),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub ground_energy: f64,
    pub max_abs_energy: f64,
    pub energies: Vec<f64>,
    pub distinct_energies: Vec<f64>,
}

pub(crate) const DISTINCT_TOL: f64 = 1e-9;

impl SpectrumSummary {
    pub fn of(eig: &EigenDecomposition) -> Self {
        Self {
            ground_energy: eig.ground_energy(),
            max_abs_energy: eig.max_abs_energy(),
            energies: eig.energies.clone(),
            distinct_energies: eig.distinct_energies(DISTINCT_TOL),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlateauMatch {
    pub energy: f64,
    pub lambda: f64,
    pub nearest_exact: f64,
    /// `|E_est - E_exact| / |E_0|`.
    pub zeta: f64,
}

/// Each plateau paired with its nearest exact eigenvalue.
pub fn match_plateaus(estimate: &SpectrumEstimate, eig: &EigenDecomposition) -> Result<Vec<PlateauMatch>> {
    let distinct = eig.distinct_energies(DISTINCT_TOL);
    estimate
        .plateaus
        .iter()
        .map(|p| {
            let nearest = distinct
                .iter()
                .copied()
                .min_by(|a, b| (a - p.energy).abs().total_cmp(&(b - p.energy).abs()))
                .expect("non-empty spectrum");
            Ok(PlateauMatch {
                energy: p.energy,
                lambda: p.lambda,
                nearest_exact: nearest,
                zeta: relative_error(p.energy, nearest, eig.ground_energy())?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub operator_checks: Vec<ApproximationRecord>,
    pub crooks: Option<CrooksCheck>,
    pub generalized_hs: Option<GeneralizedHsReport>,
    pub skipped: Option<String>,
}

const CROOKS_TOL: f64 = 1e-3;
const HS_TOL: f64 = 1e-6;

impl AnalysisReport {
    /// Flat `{op, parameters, error_norm, bound, passed}` records.
    pub fn records(&self) -> Vec<ApproximationRecord> {
        let mut out = self.operator_checks.clone();
        if let Some(c) = &self.crooks {
            out.push(ApproximationRecord {
                op: "crooks_like".into(),
                parameters: [("value", c.value), ("exact", c.exact), ("weight_defect", c.weight_defect)]
                    .iter()
                    .map(|(k, v)| (k.to_string(), *v))
                    .collect(),
                error_norm: c.deviation,
                frobenius_error: c.deviation,
                bound: None,
                passed: c.deviation <= CROOKS_TOL,
            });
        }
        if let Some(g) = &self.generalized_hs {
            out.push(ApproximationRecord {
                op: "generalized_hs".into(),
                parameters: [
                    ("order", g.order as f64),
                    ("squared_exponent", g.squared_exponent),
                    ("quarter_sandwich", g.quarter_sandwich),
                ]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
                error_norm: g.printed,
                frobenius_error: g.printed,
                bound: None,
                passed: g.printed <= HS_TOL,
            });
        }
        out
    }
}

/// Leading `cos^m` vs Gaussian gap: `max_E e^{-τE²} τ²E⁴/(3m)`.
fn discrete_gaussian_prediction(eig: &EigenDecomposition, tau: f64, m: usize) -> f64 {
    eig.energies
        .iter()
        .map(|e| (-tau * e * e).exp() * tau * tau * e.powi(4) / (3.0 * m as f64))
        .fold(0.0, f64::max)
}

/// Operator-level checks at the run's `(Δτ, m)` on its Hamiltonian.
pub fn analyze(p: &Prepared, pure: Option<&StateVector>) -> Result<AnalysisReport> {
    let qubits = p.hamiltonian.qubit_count();
    let spec = &p.config.analysis;
    if qubits > spec.max_operator_qubits {
        return Ok(AnalysisReport {
            operator_checks: Vec::new(),
            crooks: None,
            generalized_hs: None,
            skipped: Some(format!(
                "{qubits} qubits exceeds analysis.max_operator_qubits = {}",
                spec.max_operator_qubits
            )),
        });
    }
    let (dtau, m) = (p.config.itqde.dtau, p.config.itqde.m);
    let tau = m as f64 * dtau;
    let mut checks = Vec::new();

    let dg = discrete_gaussian_operator(&p.dense, dtau, m)?;
    checks.push(dg.record(2.0 * discrete_gaussian_prediction(&p.eigen, tau, m) + 1e-12));
    checks.push(hs_integral_operator(&p.dense, tau, Quadrature::Riemann { m })?.record(1e-8));
    for &n in &spec.gauss_hermite_orders {
        checks.push(hs_integral_operator(&p.dense, tau, Quadrature::GaussHermite { n })?.record(0.0));
    }

    let (_, grid) = snap_inversion_m(m);
    let times = inversion_times(tau, grid);
    let k = 1.min(times.len() - 1);
    let inv = invert_itqde_propagator(&p.dense, tau, times[k], grid, InversionKernel::DiscreteHs)?;
    let envelope = p
        .eigen
        .energies
        .iter()
        .map(|&e| inversion_alias_sum(e, tau, k as i64, grid).norm())
        .fold(0.0, f64::max);
    checks.push(inv.record(envelope + 1e-9));

    let crooks = match pure {
        Some(psi) => {
            let t = evolve_trajectory(psi, &p.propagator, m, &[])?;
            Some(crooks_check(&t, &p.eigen)?)
        }
        None => None,
    };
    let ghs_state = pure.cloned().unwrap_or_else(|| StateVector::plus(qubits));
    let generalized_hs = Some(generalized_hs_report(&ghs_state, &p.dense, tau, DEFAULT_HS_ORDER)?);
    Ok(AnalysisReport {
        operator_checks: checks,
        crooks,
        generalized_hs,
        skipped: None,
    })
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    name: &'a str,
    version: &'static str,
    config_sha256: String,
    seed: u64,
    method: &'static str,
    shot_plan: Option<ShotPlan>,
    circuit_count: Option<u64>,
    files: Vec<String>,
    timestamp_unix: u64,
    wall_time_seconds: f64,
}

fn method_name(m: &MethodSpec) -> &'static str {
    match m {
        MethodSpec::Exact { .. } => "exact",
        MethodSpec::Estimator { .. } => "estimator",
        MethodSpec::Sampled { .. } => "sampled",
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub files: Vec<String>,
    pub spectrum: Option<SpectrumEstimate>,
    pub matches: Vec<PlateauMatch>,
}

struct Writer<'a> {
    root: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.put(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

fn output_dir(config: &RunConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(&config.name))
}

fn finish(w: &mut Writer<'_>, config: &RunConfig, extra: (Option<ShotPlan>, Option<u64>), start: Instant) -> Result<()> {
    let mut files = w.files.clone();
    files.sort();
    let manifest = Manifest {
        name: &config.name,
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: config.hash()?,
        seed: config.seed,
        method: method_name(&config.method),
        shot_plan: extra.0,
        circuit_count: extra.1,
        files,
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    w.json("manifest.json", &manifest)
}

fn write_trajectory(w: &mut Writer<'_>, p: &Prepared, out: &TrajectoryOutput) -> Result<()> {
    w.put("config.toml", &p.config.to_toml()?)?;
    w.put("model.jsonl", &p.hamiltonian.to_jsonl())?;
    w.put("trajectory.json", &out.trajectory.to_json()?)?;
    if let Some(e) = &out.errors {
        w.put("errors.json", &e.to_json()?)?;
    }
    w.json("spectrum.json", &SpectrumSummary::of(&p.eigen))
}

/// Writes the sweep files for `traj` into `w`; returns the estimate.
fn write_sweep(
    w: &mut Writer<'_>,
    traj: &Trajectory,
    errors: Option<&TrajectoryErrors>,
    label: &str,
    lambdas: &[f64],
    scheme: WeightScheme,
    window: Option<usize>,
) -> Result<SpectrumEstimate> {
    let est = sweep_lambda_with(traj, label, lambdas, scheme, &SweepOptions { window, errors })?;
    if est.steady_values.iter().all(|v| !v.is_finite()) {
        return Err(ItqdeError::NoSteadyState);
    }
    for (i, &lambda) in lambdas.iter().enumerate() {
        let curve = assemble_curve(traj, label, lambda, scheme)?;
        w.put(&format!("curves/lambda_{i:04}.csv"), &curve.to_csv())?;
    }
    w.put("sweep.csv", &est.to_csv())?;
    w.json("sweep.json", &est)?;
    w.put("plateaus.json", &(est.plateaus_json()? + "\n"))?;
    Ok(est)
}

/// Full pipeline: trajectory, curves, sweep, plateaus, analysis, manifest.
pub fn run(config: &RunConfig, out: Option<&Path>) -> Result<RunSummary> {
    let start = Instant::now();
    let p = prepare(config)?;
    let dir = output_dir(config, out);
    fs::create_dir_all(&dir)?;
    let mut w = Writer { root: &dir, files: Vec::new() };
    let t = compute_trajectory(&p)?;
    write_trajectory(&mut w, &p, &t)?;
    let est = write_sweep(
        &mut w,
        &t.trajectory,
        t.errors.as_ref(),
        "H",
        &p.lambdas,
        config.itqde.scheme,
        config.itqde.window,
    )?;
    let matches = match_plateaus(&est, &p.eigen)?;
    let pure = match &t.trajectory.initial_condition {
        InitialCondition::Pure(psi) => Some(psi.clone()),
        _ => None,
    };
    #[derive(Serialize)]
    struct RunAnalysis<'a> {
        plateau_matches: &'a [PlateauMatch],
        max_zeta: f64,
        #[serde(flatten)]
        report: AnalysisReport,
    }
    let report = analyze(&p, pure.as_ref())?;
    w.json(
        "analysis.json",
        &RunAnalysis {
            max_zeta: matches.iter().map(|m| m.zeta).fold(0.0, f64::max),
            plateau_matches: &matches,
            report,
        },
    )?;
    let plan = shot_plan(config, p.hamiltonian.qubit_count())?;
    finish(&mut w, config, (plan, t.circuit_count), start)?;
    let files = w.files;
    Ok(RunSummary { directory: dir, files, spectrum: Some(est), matches })
}

/// Trajectory files only.
pub fn sample(config: &RunConfig, out: Option<&Path>) -> Result<RunSummary> {
    let start = Instant::now();
    let p = prepare(config)?;
    let dir = output_dir(config, out);
    fs::create_dir_all(&dir)?;
    let mut w = Writer { root: &dir, files: Vec::new() };
    let t = compute_trajectory(&p)?;
    write_trajectory(&mut w, &p, &t)?;
    let plan = shot_plan(config, p.hamiltonian.qubit_count())?;
    finish(&mut w, config, (plan, t.circuit_count), start)?;
    let files = w.files;
    Ok(RunSummary { directory: dir, files, spectrum: None, matches: Vec::new() })
}

/// Sweep over a stored trajectory (and optional errors file) into `out`.
pub fn sweep_files(
    trajectory: &Path,
    errors: Option<&Path>,
    label: &str,
    lambdas: &[f64],
    scheme: WeightScheme,
    window: Option<usize>,
    out: &Path,
) -> Result<SpectrumEstimate> {
    let traj = Trajectory::read(trajectory)?;
    let errs = match errors {
        Some(path) => Some(TrajectoryErrors::from_json(&fs::read_to_string(path)?)?),
        None => None,
    };
    fs::create_dir_all(out)?;
    let mut w = Writer { root: out, files: Vec::new() };
    write_sweep(&mut w, &traj, errs.as_ref(), label, lambdas, scheme, window)
}

/// [`analyze`] on a config alone; the pure state comes from `method.initial`.
pub fn analyze_config(config: &RunConfig) -> Result<AnalysisReport> {
    let p = prepare(config)?;
    let qubits = p.hamiltonian.qubit_count();
    let pure = match &config.method {
        MethodSpec::Exact { initial } | MethodSpec::Estimator { initial } => pure_state(*initial, qubits)?,
        MethodSpec::Sampled { .. } => None,
    };
    analyze(&p, pure.as_ref())
}
