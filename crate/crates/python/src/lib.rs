//! Python bindings: instances, the biased tree sampler, emulated search,
//! resource estimates and campaigns.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qtg_core::amplification::{self, AmplificationConfig, BiasPolicy, CycleCosts, QMaxSearch};
use qtg_core::baseline::{exact_optimum, greedy_incumbent, DEFAULT_ORACLE_LIMIT};
use qtg_core::bench::{self, CampaignConfig};
use qtg_core::formats::{self, Format, FormatOptions};
use qtg_core::resources::{self, CostModel, Variant};
use qtg_core::rng::StreamKey;
use qtg_core::sampler::{MassMode, QtgModel, SampleScratch};
use qtg_core::{Bits, Error, KnapsackInstance, Profits, Validation};

fn to_py(err: impl Into<Error>) -> PyErr {
    match err.into() {
        err @ Error::Io { .. } => PyOSError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<PyObject> {
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_bits(bits: &str) -> PyResult<Bits> {
    bits.parse().map_err(to_py)
}

fn bias_policy(bias: Option<f64>, delta: Option<usize>, follow: bool) -> PyResult<BiasPolicy> {
    match (bias, delta, follow) {
        (None, None, true) => Ok(BiasPolicy::FollowIncumbent),
        (Some(b), None, false) => Ok(BiasPolicy::Fixed(b)),
        (None, d, false) => Ok(BiasPolicy::Distance(d.unwrap_or(4))),
        _ => Err(PyValueError::new_err("give at most one of bias, delta and follow")),
    }
}

fn cost_model(path: Option<PathBuf>) -> PyResult<CostModel> {
    path.map_or_else(|| Ok(CostModel::default()), |p| CostModel::load(p).map_err(to_py))
}

/// A validated knapsack instance.
#[pyclass(name = "Instance", module = "qtgsearch", frozen)]
#[derive(Clone)]
struct PyInstance {
    inner: KnapsackInstance,
    known_optimum: Option<u64>,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    #[pyo3(signature = (path, format = "json", orlib_index = None, qkp_layout = "standard"))]
    fn load(path: PathBuf, format: &str, orlib_index: Option<usize>, qkp_layout: &str) -> PyResult<Self> {
        let format: Format = format.parse().map_err(to_py)?;
        let options = FormatOptions { orlib_index, qkp_descriptor: qkp_layout.parse().map_err(to_py)? };
        let loaded = formats::load_instance(path, format, &options).map_err(to_py)?;
        Ok(PyInstance { inner: loaded.instance, known_optimum: loaded.known_optimum })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = formats::from_json(text, "<string>").map_err(to_py)?;
        Ok(PyInstance { inner, known_optimum: None })
    }

    /// Quadratic instance; `profits` is the full symmetric matrix.
    #[staticmethod]
    #[pyo3(signature = (name, weights, capacity, profits, strict = true))]
    fn qkp(name: &str, weights: Vec<u64>, capacity: u64, profits: Vec<Vec<u64>>, strict: bool) -> PyResult<Self> {
        let validation = if strict { Validation::Strict } else { Validation::AllowSlackCapacity };
        let inner = KnapsackInstance::new(name, vec![weights], vec![capacity], Profits::Matrix(profits), validation)
            .map_err(to_py)?;
        Ok(PyInstance { inner, known_optimum: None })
    }

    #[staticmethod]
    #[pyo3(signature = (name, weights, capacities, profits, strict = true))]
    fn mdkp(name: &str, weights: Vec<Vec<u64>>, capacities: Vec<u64>, profits: Vec<u64>, strict: bool) -> PyResult<Self> {
        let validation = if strict { Validation::Strict } else { Validation::AllowSlackCapacity };
        let inner = KnapsackInstance::new(name, weights, capacities, Profits::Vector(profits), validation)
            .map_err(to_py)?;
        Ok(PyInstance { inner, known_optimum: None })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn capacities(&self) -> Vec<u64> {
        self.inner.capacities().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<Vec<u64>> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn known_optimum(&self) -> Option<u64> {
        self.known_optimum
    }

    fn profit(&self, bits: &str) -> PyResult<u64> {
        qtg_core::evaluate_profit(&self.inner, &parse_bits(bits)?).map_err(to_py)
    }

    fn is_feasible(&self, bits: &str) -> PyResult<bool> {
        Ok(qtg_core::check_feasible(&self.inner, &parse_bits(bits)?).map_err(to_py)?.0)
    }

    /// `(profit, bits)` of the greedy density incumbent.
    fn greedy(&self) -> (u64, String) {
        let g = greedy_incumbent(&self.inner);
        (g.profit, g.bits.to_string())
    }

    #[pyo3(signature = (limit = DEFAULT_ORACLE_LIMIT))]
    fn exact_optimum(&self, limit: usize) -> PyResult<(u64, String)> {
        let opt = exact_optimum(&self.inner, limit).map_err(to_py)?;
        Ok((opt.profit(), opt.path.bits.to_string()))
    }

    fn to_json(&self) -> String {
        formats::to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Instance({:?}, {}, n={}, d={})", self.inner.name(), self.inner.kind(), self.inner.n(), self.inner.d())
    }
}

/// Biased branching distribution around an incumbent.
#[pyclass(name = "Model", module = "qtgsearch", frozen)]
struct PyModel {
    instance: KnapsackInstance,
    incumbent: Bits,
    policy: BiasPolicy,
}

impl PyModel {
    fn model(&self) -> PyResult<QtgModel<'_>> {
        let bias = self.policy.bias(self.instance.n()).map_err(to_py)?;
        QtgModel::new(&self.instance, self.incumbent.clone(), bias).map_err(to_py)
    }
}

#[pymethods]
impl PyModel {
    /// `incumbent` is "greedy", "zeros" or a 0/1 string. The bias defaults
    /// to n / 4.
    #[new]
    #[pyo3(signature = (instance, incumbent = "greedy", bias = None, delta = None, follow = false))]
    fn new(instance: &PyInstance, incumbent: &str, bias: Option<f64>, delta: Option<usize>, follow: bool) -> PyResult<Self> {
        let inst = instance.inner.clone();
        let incumbent = match incumbent {
            "greedy" => greedy_incumbent(&inst).bits,
            "zeros" => Bits::zeros(inst.n()),
            bits => parse_bits(bits)?,
        };
        let model = PyModel { instance: inst, incumbent, policy: bias_policy(bias, delta, follow)? };
        model.model()?;
        Ok(model)
    }

    fn path_probability(&self, bits: &str) -> PyResult<f64> {
        self.model()?.path_probability(&parse_bits(bits)?).map_err(to_py)
    }

    /// `draws` samples as `(bits, profit)` pairs.
    #[pyo3(signature = (draws, seed = 0))]
    fn sample(&self, py: Python<'_>, draws: u64, seed: u64) -> PyResult<Vec<(String, u64)>> {
        let model = self.model()?;
        py.allow_threads(|| {
            let key = StreamKey::new(seed, 0);
            let mut scratch = SampleScratch::new(&self.instance);
            Ok((0..draws)
                .map(|i| {
                    let profit = model.sample_into(&mut key.rng(i), &mut scratch);
                    (Bits::from_bools(scratch.bits.clone()).to_string(), profit)
                })
                .collect())
        })
    }

    /// Mass strictly above `threshold`: exact when `samples` is None,
    /// otherwise `(estimate, standard error)` from sampling.
    #[pyo3(signature = (threshold, samples = None, seed = 0, limit = 20))]
    fn success_mass(&self, threshold: i64, samples: Option<u64>, seed: u64, limit: usize) -> PyResult<(f64, Option<f64>)> {
        let mode = match samples {
            Some(samples) => MassMode::MonteCarlo { samples, key: StreamKey::new(seed, 0) },
            None => MassMode::Exact { limit },
        };
        let est = self.model()?.success_mass(threshold, mode).map_err(to_py)?;
        Ok((est.p, est.std_error))
    }
}

#[pyfunction]
fn grover_success_probability(p: f64, j: u64) -> PyResult<f64> {
    amplification::grover_success_probability(p, j).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (cycles, cycle_time_ns = 1.0))]
fn cycles_to_runtime(cycles: u64, cycle_time_ns: f64) -> PyResult<f64> {
    amplification::cycles_to_runtime(cycles, cycle_time_ns).map_err(to_py)
}

#[pyfunction]
fn numbits(x: u64) -> u32 {
    qtg_core::numbits(x)
}

#[pyfunction]
fn qubit_count_qkp(n: u64, capacity: u64, profit_bound: u64) -> u64 {
    resources::qubit_count_qkp(n, capacity, profit_bound)
}

#[pyfunction]
fn qubit_count_mdkp(n: u64, capacities: Vec<u64>, profit_bound: u64) -> u64 {
    resources::qubit_count_mdkp(n, &capacities, profit_bound)
}

/// `(gap, inconsistent)`; raises ValueError for a zero objective.
#[pyfunction]
fn relative_gap(obj: i64, bound: i64) -> PyResult<(f64, bool)> {
    let gap = bench::relative_gap(obj, bound).map_err(to_py)?;
    Ok((gap.value, gap.inconsistent))
}

/// Resource estimate as a dict.
#[pyfunction]
#[pyo3(signature = (instance, variant = "parallel-tree", cost_model = None))]
fn estimate(py: Python<'_>, instance: &PyInstance, variant: &str, cost_model: Option<PathBuf>) -> PyResult<PyObject> {
    let variant: Variant = variant.parse().map_err(to_py)?;
    let est = resources::estimate_qtg(&instance.inner, &self::cost_model(cost_model)?, variant).map_err(to_py)?;
    json_to_py(py, &est.to_json())
}

/// Emulated maximum finding. Returns `(trace, record)`: the trace as
/// `(cycles, profit, bits)` tuples and the per-round record as a dict.
#[pyfunction]
#[pyo3(signature = (
    instance, seed = 0, max_iters = None, bias = None, delta = None, follow = false,
    variant = "parallel-tree", cost_model = None
))]
#[allow(clippy::too_many_arguments)]
fn qmaxsearch(
    py: Python<'_>,
    instance: &PyInstance,
    seed: u64,
    max_iters: Option<u64>,
    bias: Option<f64>,
    delta: Option<usize>,
    follow: bool,
    variant: &str,
    cost_model: Option<PathBuf>,
) -> PyResult<(Vec<(u64, u64, String)>, PyObject)> {
    let variant: Variant = variant.parse().map_err(to_py)?;
    let model = self::cost_model(cost_model)?;
    let est = resources::estimate_qtg(&instance.inner, &model, variant).map_err(to_py)?;
    let config = AmplificationConfig {
        max_grover_iterations: max_iters,
        seed,
        bias_policy: bias_policy(bias, delta, follow)?,
        costs: CycleCosts::from_estimate(&est, &model),
        ..AmplificationConfig::default()
    };
    let (trace, record) = py
        .allow_threads(|| QMaxSearch::new(&instance.inner, config)?.run(seed))
        .map_err(to_py)?;
    let entries = trace
        .entries()
        .iter()
        .map(|e| {
            let bits = e.bits.as_ref().map(|b| b.to_string()).unwrap_or_default();
            (e.timestamp.cycles().unwrap_or_default(), e.profit, bits)
        })
        .collect();
    let record = serde_json::to_string(&record).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((entries, json_to_py(py, &record)?))
}

/// Runs a comparison campaign and returns its summary as a dict.
#[pyfunction]
#[pyo3(signature = (instances, out, format = "json", classical_traces = None, seed = 0, max_iters = None, workers = 1))]
fn run_campaign(
    py: Python<'_>,
    instances: PathBuf,
    out: PathBuf,
    format: &str,
    classical_traces: Option<PathBuf>,
    seed: u64,
    max_iters: Option<u64>,
    workers: usize,
) -> PyResult<PyObject> {
    let mut config = CampaignConfig::new(instances, format.parse().map_err(to_py)?, out);
    config.classical_traces_dir = classical_traces;
    config.seed = seed;
    config.max_grover_iterations = max_iters;
    config.workers = workers;
    let summary = py.allow_threads(|| bench::run_campaign(&config)).map_err(to_py)?;
    let dict = PyDict::new_bound(py);
    dict.set_item("instances", summary.instances)?;
    dict.set_item("failures", summary.failures)?;
    dict.set_item("matched", summary.matched)?;
    dict.set_item("dropped", summary.dropped)?;
    dict.set_item("records", summary.records)?;
    dict.set_item("internal_records", summary.internal_records)?;
    Ok(dict.into_any().unbind())
}

#[pymodule]
fn qtgsearch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(grover_success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(cycles_to_runtime, m)?)?;
    m.add_function(wrap_pyfunction!(numbits, m)?)?;
    m.add_function(wrap_pyfunction!(qubit_count_qkp, m)?)?;
    m.add_function(wrap_pyfunction!(qubit_count_mdkp, m)?)?;
    m.add_function(wrap_pyfunction!(relative_gap, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(qmaxsearch, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    Ok(())
}
