//! Python bindings: unitaries, training samples, ansatz circuits, the
//! closed-form bounds and the experiment runners.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use qlandscape::bounds;
use qlandscape::harness::{self, ExperimentConfig};
use qlandscape::losses;
use qlandscape::optimize::{radius_sweep, OptimizerSettings};
use qlandscape::pqc::{self, AnsatzFamily, AnsatzSpec, CircuitLoss, ParameterVector};
use qlandscape::qcore::{haar_random_unitary, CMatrix, Complex64, UnitaryMatrix};
use qlandscape::samples::{self, TrainingSample};
use qlandscape::seed::rng_from_seed;

fn py_err(e: qlandscape::Error) -> PyErr {
    match e {
        qlandscape::Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for qlandscape::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

#[pyclass(name = "Unitary", from_py_object)]
#[derive(Clone)]
struct PyUnitary {
    inner: UnitaryMatrix,
}

#[pymethods]
impl PyUnitary {
    /// Build from a list of rows of complex numbers.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err("rows must form a square matrix"));
        }
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        Ok(Self { inner: UnitaryMatrix::from_rows(d, &flat).py()? })
    }

    #[staticmethod]
    fn identity(d: usize) -> Self {
        Self { inner: UnitaryMatrix::identity(d) }
    }

    #[staticmethod]
    fn haar(d: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: haar_random_unitary(d, &mut rng_from_seed(seed)).py()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        let m: &CMatrix = self.inner.matrix();
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
    }

    fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    /// `self · other`.
    fn compose(&self, other: &PyUnitary) -> PyResult<Self> {
        Ok(Self { inner: self.inner.compose(&other.inner).py()? })
    }

    fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    fn __repr__(&self) -> String {
        format!("Unitary(dim={})", self.inner.dim())
    }
}

#[pyclass(name = "Sample", from_py_object)]
#[derive(Clone)]
struct PySample {
    inner: TrainingSample,
}

#[pymethods]
impl PySample {
    /// `|psi_x> ⊗ |psi_r>`.
    #[staticmethod]
    fn separable(psi_x: Vec<Complex64>, psi_r: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self { inner: samples::make_separable(&psi_x, &psi_r).py()? })
    }

    /// `|0> ⊗ |0>` in dimension `d`.
    #[staticmethod]
    fn zero(d: usize) -> PyResult<Self> {
        Ok(Self { inner: samples::zero_separable(d).py()? })
    }

    #[staticmethod]
    fn max_entangled(d: usize) -> PyResult<Self> {
        Ok(Self { inner: samples::make_max_entangled(d, None).py()? })
    }

    /// Schmidt spectrum `c` (summing to 1) in computational bases.
    #[staticmethod]
    fn nme(c: Vec<f64>, d: usize) -> PyResult<Self> {
        Ok(Self { inner: samples::make_nme(&c, d).py()? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    #[getter]
    fn schmidt_rank(&self) -> usize {
        samples::schmidt_rank(&self.inner)
    }

    #[getter]
    fn entropy(&self) -> f64 {
        samples::entanglement_entropy(&self.inner)
    }

    /// Squared Schmidt coefficients, descending.
    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.schmidt().squared()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.state().amplitudes().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Sample(kind={}, rank={})", self.kind(), self.schmidt_rank())
    }
}

#[pyclass(name = "Ansatz", from_py_object)]
#[derive(Clone)]
struct PyAnsatz {
    inner: AnsatzSpec,
}

#[pymethods]
impl PyAnsatz {
    #[new]
    fn new(family: &str, qubits: usize, layers: usize) -> PyResult<Self> {
        let family: AnsatzFamily = family.parse().py()?;
        Ok(Self { inner: AnsatzSpec::new(family, qubits, layers).py()? })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family.as_str()
    }

    #[getter]
    fn qubits(&self) -> usize {
        self.inner.qubits
    }

    #[getter]
    fn layers(&self) -> usize {
        self.inner.layers
    }

    #[getter]
    fn param_count(&self) -> usize {
        pqc::param_count(&self.inner)
    }

    fn unitary(&self, theta: Vec<f64>) -> PyResult<PyUnitary> {
        Ok(PyUnitary { inner: pqc::build_unitary(&self.inner, &ParameterVector(theta)).py()? })
    }

    fn loss(&self, target: &PyUnitary, sample: &PySample, theta: Vec<f64>) -> PyResult<f64> {
        CircuitLoss::new(&self.inner, &target.inner, &sample.inner).py()?.loss(&theta).py()
    }

    /// Central finite-difference gradient of the loss.
    fn gradient(&self, target: &PyUnitary, sample: &PySample, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        pqc::loss_gradient(&self.inner, &ParameterVector(theta), &target.inner, &sample.inner).py()
    }

    #[pyo3(signature = (pairs = 5000, bins = 75, seed = 0))]
    fn expressivity(&self, pairs: usize, bins: usize, seed: u64) -> PyResult<f64> {
        Ok(pqc::expressivity(&self.inner, pairs, bins, &mut rng_from_seed(seed)).py()?.kl_divergence)
    }

    /// `(radius, raw_min_loss, envelope_min_loss)` per radius.
    #[pyo3(signature = (target, sample, theta0, radii, seed = 0, restarts = 3))]
    fn radius_sweep(
        &self,
        py: Python<'_>,
        target: &PyUnitary,
        sample: &PySample,
        theta0: Vec<f64>,
        radii: Vec<f64>,
        seed: u64,
        restarts: usize,
    ) -> PyResult<Vec<(f64, f64, f64)>> {
        let obj = CircuitLoss::new(&self.inner, &target.inner, &sample.inner).py()?;
        let settings = OptimizerSettings { seed, restarts, ..OptimizerSettings::default() };
        let theta0 = ParameterVector(theta0);
        let curve = py.detach(|| radius_sweep(&obj, &theta0, &radii, &settings)).py()?;
        Ok(curve.points.iter().map(|p| (p.radius, p.raw_min_loss, p.envelope_min_loss)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Ansatz({}, qubits={}, layers={})", self.family(), self.inner.qubits, self.inner.layers)
    }
}

/// `(loss, fidelity, bures_angle)`.
#[pyfunction]
fn sample_loss(u: &PyUnitary, v: &PyUnitary, sample: &PySample) -> PyResult<(f64, f64, f64)> {
    let l = losses::sample_loss(&u.inner, &v.inner, &sample.inner).py()?;
    Ok((l.loss, l.fidelity, l.bures_angle))
}

#[pyfunction]
fn maxent_loss_from_trace(u: &PyUnitary, v: &PyUnitary) -> PyResult<f64> {
    Ok(losses::maxent_loss_from_trace(&u.inner, &v.inner).py()?.loss)
}

#[pyfunction]
fn frobenius_phase_distance(u: &PyUnitary, v: &PyUnitary) -> PyResult<f64> {
    losses::frobenius_phase_distance(&u.inner, &v.inner).py()
}

#[pyfunction]
fn qnfl_lower_bound(d: usize, r: usize, t: usize) -> PyResult<f64> {
    losses::qnfl_lower_bound(d, r, t).py()
}

#[pyfunction]
fn min_distance_separable(f_v: f64, f_w: f64) -> PyResult<f64> {
    bounds::min_distance_separable(f_v, f_w).py()
}

#[pyfunction]
fn min_distance_entangled_lb(f_v: f64, f_w: f64, d: usize) -> PyResult<f64> {
    bounds::min_distance_entangled_lb(f_v, f_w, d).py()
}

#[pyfunction]
fn construct_min_distance_operator(u: &PyUnitary, v: &PyUnitary, sample: &PySample, f_w: f64) -> PyResult<PyUnitary> {
    Ok(PyUnitary { inner: bounds::construct_min_distance_operator(&u.inner, &v.inner, &sample.inner, f_w).py()? })
}

/// `(max_fidelity, beta, threshold_radius)`.
#[pyfunction]
fn ball_max_fidelity_separable(f_v: f64, radius: f64) -> PyResult<(f64, f64, f64)> {
    let g = bounds::ball_max_fidelity_separable(f_v, radius).py()?;
    Ok((g.max_fidelity, g.beta, g.threshold_radius))
}

#[pyfunction]
fn ball_max_fidelity_entangled_ub(f_v: f64, radius: f64, d: usize) -> PyResult<(f64, f64, f64)> {
    let g = bounds::ball_max_fidelity_entangled_ub(f_v, radius, d).py()?;
    Ok((g.max_fidelity, g.beta, g.threshold_radius))
}

#[pyfunction]
fn improvement_separable(f_v: f64, radius: f64) -> PyResult<f64> {
    Ok(bounds::improvement_separable(f_v, radius).py()?.value)
}

#[pyfunction]
fn improvement_entangled_ub(f_v: f64, radius: f64, d: usize) -> PyResult<f64> {
    Ok(bounds::improvement_entangled_ub(f_v, radius, d).py()?.value)
}

#[pyfunction]
fn improvement_ratio_bound(loss: f64, radius: f64, qubits: u32) -> PyResult<f64> {
    bounds::improvement_ratio_bound(loss, radius, qubits).py()
}

#[pyfunction]
fn haar_bin_probability(a: f64, b: f64, d: usize) -> PyResult<f64> {
    pqc::haar_bin_probability(a, b, d).py()
}

#[pyfunction]
fn nme_coefficient_families(d: usize) -> Vec<Vec<f64>> {
    samples::nme_coefficient_families(d)
}

/// Loss matrix of the single-qubit landscape; `kind` is `separable` or `max_entangled`.
#[pyfunction]
#[pyo3(signature = (resolution = 101, kind = "separable"))]
fn landscape_grid(resolution: usize, kind: &str) -> PyResult<Vec<Vec<f64>>> {
    let kind = match kind {
        "separable" => samples::SampleKind::Separable,
        "max_entangled" => samples::SampleKind::MaxEntangled,
        other => return Err(PyValueError::new_err(format!("unknown sample kind '{other}'"))),
    };
    Ok(harness::landscape_grid(resolution, kind).py()?.losses)
}

fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// Run a sweep experiment from a config dict; returns a list of record dicts.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (config,))?.extract()?;
    let c = ExperimentConfig::from_json_str(&text).py()?;
    let recs = py.detach(|| harness::run_experiment(&c)).py()?;
    to_python(py, &recs)
}

#[pyfunction]
#[pyo3(signature = (dims = vec![2, 4, 8], trials = 100, seed = 0))]
fn verify_bounds(py: Python<'_>, dims: Vec<usize>, trials: usize, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let r = py.detach(|| harness::verify_bounds(&dims, trials, seed)).py()?;
    to_python(py, &r)
}

#[pymodule]
#[pyo3(name = "qlandscape")]
fn qlandscape_native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUnitary>()?;
    m.add_class::<PySample>()?;
    m.add_class::<PyAnsatz>()?;
    m.add_function(wrap_pyfunction!(sample_loss, m)?)?;
    m.add_function(wrap_pyfunction!(maxent_loss_from_trace, m)?)?;
    m.add_function(wrap_pyfunction!(frobenius_phase_distance, m)?)?;
    m.add_function(wrap_pyfunction!(qnfl_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(min_distance_separable, m)?)?;
    m.add_function(wrap_pyfunction!(min_distance_entangled_lb, m)?)?;
    m.add_function(wrap_pyfunction!(construct_min_distance_operator, m)?)?;
    m.add_function(wrap_pyfunction!(ball_max_fidelity_separable, m)?)?;
    m.add_function(wrap_pyfunction!(ball_max_fidelity_entangled_ub, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_separable, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_entangled_ub, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_ratio_bound, m)?)?;
    m.add_function(wrap_pyfunction!(haar_bin_probability, m)?)?;
    m.add_function(wrap_pyfunction!(nme_coefficient_families, m)?)?;
    m.add_function(wrap_pyfunction!(landscape_grid, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bounds, m)?)?;
    Ok(())
}
