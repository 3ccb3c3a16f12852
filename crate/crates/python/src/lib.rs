//! Python bindings: witness evaluation and optimization, the experiment
//! simulator, inference, bootstrap certification and the command line.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wdepth::bootstrap::{bootstrap_estimates, Basis};
use wdepth::dataset::CountsDataset;
use wdepth::inference::{full_pipeline, PopulationEstimate, Populations};
use wdepth::simulator::{self, analytic_dataset, full_plan, run_campaign};
use wdepth::witness::{self, certify_depth_with, SearchSettings};

create_exception!(pywdepth, WdepthError, PyException);

fn err(e: wdepth::Error) -> PyErr {
    WdepthError::new_err(e.to_string())
}

fn populations(p0: f64, p1: f64, p2: f64, fidelity: f64) -> Populations {
    Populations { p0, p1, p2, fidelity }
}

fn estimate_dict<'py>(py: Python<'py>, e: &PopulationEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("p0", e.p0)?;
    d.set_item("p1", e.p1)?;
    d.set_item("p2", e.p2)?;
    d.set_item("F", e.fidelity)?;
    d.set_item("p0p", e.p0p)?;
    d.set_item("p1p", e.p1p)?;
    d.set_item("p2p", e.p2p)?;
    d.set_item("Fp", e.fidelity_p)?;
    d.set_item("alpha3", e.alpha3)?;
    d.set_item("lambda", e.lambda_poisson)?;
    Ok(d)
}

/// Depth witness `alpha P0 + beta P1 + gamma P2 - |W_N><W_N|` at depth `k`.
#[pyclass(name = "WitnessParams", module = "pywdepth", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyWitnessParams {
    inner: witness::WitnessParams,
}

#[pymethods]
impl PyWitnessParams {
    #[new]
    fn new(alpha: f64, beta: f64, gamma: f64, k: usize, n: usize) -> PyResult<Self> {
        Ok(Self { inner: witness::WitnessParams::new(alpha, beta, gamma, k, n).map_err(err)? })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    /// Admissible block sizes of the bi-separable reduction.
    fn block_sizes(&self) -> Vec<usize> {
        self.inner.l_range().collect()
    }

    fn f_value(&self, l: usize, theta1: f64, theta2: f64) -> PyResult<f64> {
        witness::f_value(&self.inner, &witness::BisepPoint { l, theta1, theta2 }).map_err(err)
    }

    /// Minimum over bi-separable states as `(f_min, l, theta1, theta2)`.
    fn min_f(&self) -> (f64, usize, f64, f64) {
        let m = witness::min_f(&self.inner);
        (m.f_min, m.argmin.l, m.argmin.theta1, m.argmin.theta2)
    }

    #[pyo3(signature = (slack = 1e-3))]
    fn is_feasible(&self, slack: f64) -> bool {
        witness::is_feasible(&self.inner, slack)
    }

    fn value(&self, p0: f64, p1: f64, p2: f64, fidelity: f64) -> f64 {
        witness::witness_value(&self.inner, &populations(p0, p1, p2, fidelity))
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("WitnessParams(alpha={}, beta={}, gamma={}, k={}, n={})", p.alpha, p.beta, p.gamma, p.k, p.n)
    }
}

#[pyfunction]
fn min_depth(n: usize) -> usize {
    witness::min_depth(n)
}

/// Best witness at depth `k` for the given populations, as
/// `(params, value, certifiable)`.
#[pyfunction]
fn optimize_params(
    p0: f64,
    p1: f64,
    p2: f64,
    fidelity: f64,
    k: usize,
    n: usize,
) -> PyResult<(PyWitnessParams, f64, bool)> {
    let o = witness::optimize_params(&populations(p0, p1, p2, fidelity), k, n).map_err(err)?;
    Ok((PyWitnessParams { inner: o.params }, o.value, o.certifiable))
}

/// Forward model of the multiplexed heralded experiment.
#[pyclass(name = "ExperimentModel", module = "pywdepth", skip_from_py_object)]
#[derive(Clone)]
struct PyExperimentModel {
    inner: simulator::ExperimentModel,
}

#[pymethods]
impl PyExperimentModel {
    /// Loss budget of the reference experiment.
    #[staticmethod]
    fn paper_like(n_modes: usize, lambda: f64) -> PyResult<Self> {
        Ok(Self { inner: simulator::ExperimentModel::paper_like(n_modes, lambda).map_err(err)? })
    }

    /// Uniform excitation without dark counts or memory loss.
    #[staticmethod]
    fn ideal(n_modes: usize, lambda: f64, eta: f64) -> PyResult<Self> {
        Ok(Self { inner: simulator::ExperimentModel::ideal(n_modes, lambda, eta).map_err(err)? })
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.n_modes
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn eta(&self) -> Vec<f64> {
        self.inner.eta.clone()
    }

    #[setter]
    fn set_eta(&mut self, eta: Vec<f64>) -> PyResult<()> {
        let mut m = self.inner.clone();
        m.eta = eta;
        m.validate().map_err(err)?;
        self.inner = m;
        Ok(())
    }

    fn with_disorder(&self, phase_amp: f64, weight_amp: f64, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_disorder(phase_amp, weight_amp, seed).map_err(err)? })
    }

    fn tuned_to_fidelity(&self, target: f64, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.tuned_to_fidelity(target, seed).map_err(err)? })
    }

    fn ground_truth<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = simulator::ground_truth(&self.inner);
        let d = estimate_dict(py, &t.estimate())?;
        d.set_item("higher_order_mass", t.higher_order_mass)?;
        d.set_item("herald_probability", t.herald_probability)?;
        d.set_item("mode_overlap", t.mode_overlap)?;
        Ok(d)
    }

    /// Sampled campaign over every configuration; `three_photon_trials`
    /// defaults to `trials`.
    #[pyo3(signature = (seed, trials, three_photon_trials = None))]
    fn simulate(&self, seed: u64, trials: u64, three_photon_trials: Option<u64>) -> PyResult<PyDataset> {
        let mut plan = full_plan(self.inner.n_modes, trials);
        if let Some(t) = three_photon_trials {
            plan.last_mut().expect("plan is never empty").1 = t;
        }
        Ok(PyDataset { inner: run_campaign(&self.inner, &plan, seed, true).map_err(err)? })
    }

    /// Dataset whose frequencies equal the model probabilities.
    fn analytic(&self) -> PyResult<PyDataset> {
        Ok(PyDataset { inner: analytic_dataset(&self.inner).map_err(err)? })
    }
}

/// Photon-count records of one campaign.
#[pyclass(name = "Dataset", module = "pywdepth", frozen)]
struct PyDataset {
    inner: CountsDataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        Ok(Self { inner: CountsDataset::from_jsonl(text).map_err(err)? })
    }

    fn to_jsonl(&self) -> String {
        self.inner.to_jsonl()
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.n_modes()
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    /// Point estimates; the corrected ones are under `"corrected"`.
    fn infer<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = full_pipeline(&self.inner).map_err(err)?;
        let d = estimate_dict(py, &out.estimate)?;
        d.set_item("corrected", estimate_dict(py, &out.corrected)?)?;
        d.set_item("eta", out.calibration.eta.clone())?;
        d.set_item("S", out.s_sum)?;
        d.set_item("warnings", out.warnings.clone())?;
        Ok(d)
    }

    /// Bootstrap fraction of resamples on which `params` is negative.
    #[pyo3(signature = (params, samples, seed, photonic = false))]
    fn confidence(&self, params: &PyWitnessParams, samples: usize, seed: u64, photonic: bool) -> PyResult<f64> {
        let basis = if photonic { Basis::Photonic } else { Basis::SpinWave };
        let r = bootstrap_estimates(&self.inner, samples, seed).map_err(err)?;
        Ok(r.confidence(&params.inner, basis))
    }

    /// Spin-wave depth certificate with bootstrap confidence.
    #[pyo3(signature = (seed, samples = 10_000, min_confidence = 0.0))]
    fn certify<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        samples: usize,
        min_confidence: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let n = self.inner.n_modes();
        let point = full_pipeline(&self.inner).map_err(err)?;
        let r = bootstrap_estimates(&self.inner, samples, seed).map_err(err)?;
        let cert = certify_depth_with(&point.estimate.spin_wave(), n, &SearchSettings::default(), min_confidence, |p| {
            Ok(r.confidence(p, Basis::SpinWave))
        })
        .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("n", n)?;
        d.set_item("k", cert.k)?;
        d.set_item("params", cert.params.map(|inner| PyWitnessParams { inner }))?;
        d.set_item("witness_value", cert.witness_value)?;
        d.set_item("confidence", cert.confidence)?;
        d.set_item("failed", r.failed)?;
        Ok(d)
    }
}

/// Runs the `wdepth` command line and returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let (mut out, mut errs) = (Vec::new(), Vec::new());
    let argv = std::iter::once("wdepth".to_string()).chain(args);
    let code = wdepth::cli::run(argv, &mut out, &mut errs);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&errs).into_owned())
}

#[pymodule]
fn pywdepth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WdepthError", m.py().get_type::<WdepthError>())?;
    m.add_class::<PyWitnessParams>()?;
    m.add_class::<PyExperimentModel>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(min_depth, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_params, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
