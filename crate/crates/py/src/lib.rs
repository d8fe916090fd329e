//! Python module `weavefuse`.
//!
//! Vectors are lists of floats or complex numbers, subsets are lists of
//! 1-based indices taken from the first family, and reports come back as
//! plain dicts.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use weavefuse::catalog;
use weavefuse::document::FrameSpecDocument;
use weavefuse::erasure::{self, ErasureModel, Estimator};
use weavefuse::hilbert::{FieldTag, Vector, C64};
use weavefuse::phase::{self, SearchBudget};
use weavefuse::weaving::{self, SigmaMode, SubsetSelector};

fn err(e: weavefuse::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn mode(samples: Option<usize>, seed: u64) -> SigmaMode {
    match samples {
        Some(count) => SigmaMode::Sampled { count, seed },
        None => SigmaMode::Exact,
    }
}

#[pyclass(name = "WeavingPair", module = "weavefuse", frozen)]
struct PyWeavingPair {
    inner: weaving::WeavingPair,
}

impl PyWeavingPair {
    fn vector(&self, coords: Vec<C64>) -> PyResult<Vector> {
        let field = self.inner.field();
        if field == FieldTag::Real && coords.iter().any(|z| z.im != 0.0) {
            return Err(PyValueError::new_err("complex coordinates for a real pair"));
        }
        Vector::from_coords(DVector::from_vec(coords), field).map_err(err)
    }

    fn sigma(&self, indices: Vec<usize>) -> PyResult<SubsetSelector> {
        SubsetSelector::from_indices(self.inner.len(), &indices).map_err(err)
    }
}

#[pymethods]
impl PyWeavingPair {
    /// Parses a JSON frame specification.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = FrameSpecDocument::parse(text).and_then(|d| d.to_pair()).map_err(err)?;
        Ok(PyWeavingPair { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = weavefuse::document::load_spec(path).map_err(err)?;
        Ok(PyWeavingPair { inner })
    }

    /// One of `example_2_1`, `example_2_2`, `example_3_2`, `example_3_3`,
    /// `example_r3`.
    #[staticmethod]
    fn example(name: &str) -> PyResult<Self> {
        let inner = match name {
            "example_2_1" => catalog::example_2_1(6),
            "example_2_2" => catalog::example_2_2(),
            "example_3_2" => catalog::example_3_2(),
            "example_3_3" => catalog::example_3_3(),
            "example_r3" => catalog::example_r3(),
            other => return Err(PyValueError::new_err(format!("unknown example {other}"))),
        };
        Ok(PyWeavingPair { inner })
    }

    /// The same family twice, `m / n` copies of the wrapped coordinate planes.
    #[staticmethod]
    fn tight_family(n: usize, m: usize) -> PyResult<Self> {
        Ok(PyWeavingPair {
            inner: erasure::tight_family(n, m).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        FrameSpecDocument::from_pair(&self.inner).to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn field(&self) -> &'static str {
        match self.inner.field() {
            FieldTag::Real => "real",
            FieldTag::Complex => "complex",
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("WeavingPair(field={}, dim={}, members={})", self.field(), self.dim(), self.inner.len())
    }

    #[pyo3(signature = (samples=None, seed=0))]
    fn bounds(&self, py: Python<'_>, samples: Option<usize>, seed: u64) -> PyResult<Py<PyAny>> {
        to_py(py, &weaving::universal_bounds(&self.inner, mode(samples, seed)).map_err(err)?)
    }

    fn sigma_bounds(&self, sigma: Vec<usize>) -> PyResult<(f64, f64)> {
        let b = weaving::sigma_bounds(&self.inner, &self.sigma(sigma)?).map_err(err)?;
        Ok((b.lower, b.upper))
    }

    #[pyo3(signature = (tol=1e-10, samples=None, seed=0))]
    fn is_weaving(&self, py: Python<'_>, tol: f64, samples: Option<usize>, seed: u64) -> PyResult<Py<PyAny>> {
        to_py(py, &weaving::is_weaving(&self.inner, tol, mode(samples, seed)).map_err(err)?)
    }

    #[pyo3(signature = (samples=None, seed=0, starts=64, max_iters=400))]
    fn is_phase_retrievable(
        &self,
        py: Python<'_>,
        samples: Option<usize>,
        seed: u64,
        starts: usize,
        max_iters: usize,
    ) -> PyResult<Py<PyAny>> {
        let budget = SearchBudget {
            starts,
            max_iters,
            seed,
            ..SearchBudget::default()
        };
        let verdict = py.detach(|| phase::is_phase_retrievable(&self.inner, mode(samples, seed), &budget));
        to_py(py, &verdict.map_err(err)?)
    }

    #[pyo3(signature = (tol=1e-10))]
    fn complement_property(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &phase::complement_property_of_pair(&self.inner, tol).map_err(err)?)
    }

    /// Measurements `w_i ||P_i f||` of the woven family.
    fn gamma(&self, sigma: Vec<usize>, f: Vec<C64>) -> PyResult<Vec<f64>> {
        let g = phase::gamma(&self.inner, &self.sigma(sigma)?, &self.vector(f)?).map_err(err)?;
        Ok(g.0)
    }

    /// Dimension of the phase-lift kernel at `sigma`.
    #[pyo3(signature = (sigma, tol=1e-10))]
    fn lift_kernel_dim(&self, sigma: Vec<usize>, tol: f64) -> PyResult<usize> {
        let lift = phase::phase_lift_matrix(&self.inner, &self.sigma(sigma)?).map_err(err)?;
        Ok(phase::lift_kernel(&lift, tol).kernel_dim)
    }

    #[pyo3(signature = (sigma, samples=10_000, seed=0))]
    fn alpha_estimate(&self, py: Python<'_>, sigma: Vec<usize>, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
        let sigma = self.sigma(sigma)?;
        let estimate = py.detach(|| phase::alpha_estimate(&self.inner, &sigma, samples, seed));
        to_py(py, &estimate.map_err(err)?)
    }

    /// Maps every subspace through the unitary `q`, given as rows.
    fn transport(&self, q: Vec<Vec<C64>>) -> PyResult<Self> {
        let n = q.len();
        if q.iter().any(|row| row.len() != n) {
            return Err(PyValueError::new_err("unitary must be square"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
        Ok(PyWeavingPair {
            inner: phase::transport(&self.inner, &m).map_err(err)?,
        })
    }

    /// Monte Carlo reconstruction under erasure. `estimator` is `corrected`,
    /// `halving` or a float scale.
    #[pyo3(signature = (f, sigma=Vec::new(), keep_prob=0.5, trials=10_000, seed=0, estimator=None))]
    #[allow(clippy::too_many_arguments)]
    fn simulate_erasure(
        &self,
        py: Python<'_>,
        f: Vec<C64>,
        sigma: Vec<usize>,
        keep_prob: f64,
        trials: usize,
        seed: u64,
        estimator: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Py<PyAny>> {
        let estimator = match estimator {
            None => Estimator::Corrected,
            Some(obj) => match obj.extract::<String>() {
                Ok(s) if s == "corrected" => Estimator::Corrected,
                Ok(s) if s == "halving" => Estimator::halving(self.inner.len()),
                Ok(s) => return Err(PyValueError::new_err(format!("unknown estimator {s}"))),
                Err(_) => Estimator::Averaging { scale: obj.extract()? },
            },
        };
        let sigma = self.sigma(sigma)?;
        let f = self.vector(f)?;
        let model = ErasureModel::new(keep_prob, seed).map_err(err)?;
        let report = py.detach(|| erasure::simulate(&self.inner, &sigma, &f, &model, estimator, trials));
        to_py(py, &report.map_err(err)?)
    }
}

/// `min over unimodular u of ||f - u g||`.
#[pyfunction]
fn phase_distance(f: Vec<C64>, g: Vec<C64>) -> PyResult<f64> {
    let field = if f.iter().chain(&g).all(|z| z.im == 0.0) { FieldTag::Real } else { FieldTag::Complex };
    let v = |c: Vec<C64>| Vector::from_coords(DVector::from_vec(c), field).map_err(err);
    phase::phase_distance(&v(f)?, &v(g)?).map_err(err)
}

/// Tight-family erasure sweep over `n` in `dims` and `m = factor * n`.
#[pyfunction]
#[pyo3(signature = (dims=vec![2, 4, 8], m_factors=vec![8, 32, 128], trials=10_000, seed=0))]
fn scaling_experiment(
    py: Python<'_>,
    dims: Vec<usize>,
    m_factors: Vec<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let table = py.detach(|| erasure::scaling_experiment(&erasure::sweep_cells(&dims, &m_factors), trials, seed));
    to_py(py, &table.map_err(err)?)
}

#[pymodule]
#[pyo3(name = "weavefuse")]
fn weavefuse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeavingPair>()?;
    m.add_function(wrap_pyfunction!(phase_distance, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
