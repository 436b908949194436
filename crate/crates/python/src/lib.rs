//! Python bindings: `import pyselfsim`.

use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use selfsim::boxoracle::{builtin_set, count_boxes};
use selfsim::corpus::{builtin, builtins as corpus_builtins};
use selfsim::entropy::{cube_count, entropy_with, verify_theorem_with, word_count, DEFAULT_SANDWICH_DEPTH};
use selfsim::ggdc::{build_ggdc, GgdcGraph};
use selfsim::kernel::{compute_kernel, KernelJson, KernelPresentation};
use selfsim::render::{level_approximation, render_pgm, render_svg, SvgOptions};
use selfsim::saturate::saturate;
use selfsim::specdsl::load;
use selfsim::spectral::{spectral_radius_with, DimensionResult, SpectralOptions};
use selfsim::{Error, ErrorKind};

create_exception!(pyselfsim, SelfsimError, PyException);
create_exception!(pyselfsim, SpecError, SelfsimError);
create_exception!(pyselfsim, BudgetError, SelfsimError);
create_exception!(pyselfsim, ToleranceError, SelfsimError);
create_exception!(pyselfsim, VerificationError, SelfsimError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.kind() {
        ErrorKind::Spec => SpecError::new_err(msg),
        ErrorKind::Budget => BudgetError::new_err(msg),
        ErrorKind::Tolerance => ToleranceError::new_err(msg),
        ErrorKind::Verification => VerificationError::new_err(msg),
    }
}

fn options(tol: f64) -> PyResult<SpectralOptions> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SpecError::new_err(format!("tolerance must be positive, got {tol}")));
    }
    Ok(SpectralOptions::with_tol(tol))
}

/// A certified enclosure of log_k ρ, with the ρ enclosure as exact rationals.
#[pyclass(frozen, module = "pyselfsim")]
struct Dimension {
    #[pyo3(get)]
    value: f64,
    #[pyo3(get)]
    lower: f64,
    #[pyo3(get)]
    upper: f64,
    /// `"p/q"` strings.
    #[pyo3(get)]
    rho_lower: String,
    #[pyo3(get)]
    rho_upper: String,
    #[pyo3(get)]
    certified: bool,
}

impl From<&DimensionResult> for Dimension {
    fn from(d: &DimensionResult) -> Self {
        Dimension {
            value: d.dimension.value,
            lower: d.dimension.lower,
            upper: d.dimension.upper,
            rho_lower: d.rho.lower.to_string(),
            rho_upper: d.rho.upper.to_string(),
            certified: d.rho.certified,
        }
    }
}

#[pymethods]
impl Dimension {
    fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    fn __repr__(&self) -> String {
        format!("Dimension({} in [{}, {}])", self.value, self.lower, self.upper)
    }
}

/// The k-kernel of a saturated set with its subdivision matrix.
#[pyclass(frozen, module = "pyselfsim")]
struct Kernel {
    inner: KernelPresentation,
}

#[pymethods]
impl Kernel {
    /// Parses `.kss` source, saturates it and builds the kernel.
    #[staticmethod]
    fn from_kss(text: &str) -> PyResult<Self> {
        let a = load(text).map_err(py_err)?;
        let inner = compute_kernel(&saturate(&a)).map_err(py_err)?;
        Ok(Kernel { inner })
    }

    #[staticmethod]
    fn from_builtin(name: &str) -> PyResult<Self> {
        let b = builtin(name).map_err(py_err)?;
        let inner = compute_kernel(&saturate(&b.automaton().map_err(py_err)?)).map_err(py_err)?;
        Ok(Kernel { inner })
    }

    /// Reads a kernel export. Use `closure_violations` before trusting it.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let j: KernelJson = serde_json::from_str(text).map_err(|e| py_err(e.into()))?;
        let inner = KernelPresentation::from_json(&j).map_err(py_err)?;
        Ok(Kernel { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner.to_json()).expect("serializable")
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.k()
    }

    #[getter]
    fn d(&self) -> u32 {
        self.inner.d()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels()
    }

    /// Row-major subdivision matrix A.
    fn matrix(&self) -> Vec<Vec<BigUint>> {
        self.inner.matrix().pow_big(1)
    }

    fn matrix_power(&self, p: u32) -> Vec<Vec<BigUint>> {
        self.inner.matrix().pow_big(p)
    }

    /// `(digits, target)` pairs leaving element `j`.
    fn transitions(&self, j: usize) -> PyResult<Vec<(Vec<u32>, usize)>> {
        self.inner.element(j).map_err(py_err)?;
        let ab = self.inner.alphabet();
        Ok(self
            .inner
            .transitions(j)
            .iter()
            .map(|&(b, t)| (ab.decode(b).0, t))
            .collect())
    }

    fn closure_violations(&self) -> Vec<String> {
        self.inner.closure_violations()
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn dimension(&self, tol: f64) -> PyResult<Dimension> {
        let rho = spectral_radius_with(self.inner.matrix(), &options(tol)?).map_err(py_err)?;
        Ok(Dimension::from(&DimensionResult::new(rho, self.inner.k(), self.inner.d())))
    }

    /// Entropy enclosure, computed from the counting automaton.
    #[pyo3(signature = (tol = 1e-9))]
    fn entropy(&self, tol: f64) -> PyResult<Dimension> {
        let e = entropy_with(&self.inner, &options(tol)?, 1).map_err(py_err)?;
        Ok(Dimension::from(&DimensionResult::new(e.rho, self.inner.k(), self.inner.d())))
    }

    /// Number of length-p words, P(p).
    fn word_count(&self, p: u32) -> BigUint {
        word_count(&self.inner, p)
    }

    /// Level-p cubes meeting element `i`.
    fn cube_count(&self, i: usize, p: u32) -> PyResult<BigUint> {
        cube_count(&self.inner, i, p).map_err(py_err)
    }

    /// Raises `VerificationError` when dimension and entropy disagree.
    #[pyo3(signature = (tol = 1e-9, depth = DEFAULT_SANDWICH_DEPTH))]
    fn verify(&self, tol: f64, depth: u32) -> PyResult<f64> {
        let r = verify_theorem_with(&self.inner, &options(tol)?, depth).map_err(py_err)?;
        Ok(r.gelfand_gap)
    }

    fn ggdc(&self) -> Ggdc {
        Ggdc {
            inner: build_ggdc(&self.inner),
        }
    }

    #[pyo3(signature = (p, element = 0))]
    fn render_svg(&self, p: u32, element: usize) -> PyResult<String> {
        let c = level_approximation(&self.inner, element, p).map_err(py_err)?;
        render_svg(&c, &SvgOptions::default()).map_err(py_err)
    }

    #[pyo3(signature = (p, resolution, element = 0))]
    fn render_pgm<'py>(&self, py: Python<'py>, p: u32, resolution: u64, element: usize) -> PyResult<Bound<'py, PyBytes>> {
        let c = level_approximation(&self.inner, element, p).map_err(py_err)?;
        let bytes = render_pgm(&c, resolution).map_err(py_err)?;
        Ok(PyBytes::new(py, &bytes))
    }

    fn __repr__(&self) -> String {
        format!("Kernel(k={}, d={}, elements={})", self.inner.k(), self.inner.d(), self.inner.len())
    }
}

/// The graph-directed construction of a kernel.
#[pyclass(frozen, module = "pyselfsim")]
struct Ggdc {
    inner: GgdcGraph,
}

#[pymethods]
impl Ggdc {
    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.vertices.iter().map(|v| v.label()).collect()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges.clone()
    }

    /// Violated axioms; empty when the construction is sound.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().all()
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot()
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn dimension(&self, tol: f64) -> PyResult<Dimension> {
        let rho = spectral_radius_with(&self.inner.adjacency(), &options(tol)?).map_err(py_err)?;
        Ok(Dimension::from(&DimensionResult::new(rho, self.inner.k, self.inner.d)))
    }
}

/// Names of the shipped sets.
#[pyfunction]
fn builtins() -> Vec<String> {
    corpus_builtins().iter().map(|b| b.name.clone()).collect()
}

/// Closed-cube count N_p from the geometric oracle.
#[pyfunction]
fn box_count(name: &str, p: u32) -> PyResult<BigUint> {
    let s = builtin_set(name).map_err(py_err)?;
    Ok(count_boxes(&s, p).map_err(py_err)?.count)
}

#[pymodule]
fn pyselfsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<Kernel>()?;
    m.add_class::<Ggdc>()?;
    m.add_class::<Dimension>()?;
    m.add_function(wrap_pyfunction!(builtins, m)?)?;
    m.add_function(wrap_pyfunction!(box_count, m)?)?;
    m.add("SelfsimError", py.get_type::<SelfsimError>())?;
    m.add("SpecError", py.get_type::<SpecError>())?;
    m.add("BudgetError", py.get_type::<BudgetError>())?;
    m.add("ToleranceError", py.get_type::<ToleranceError>())?;
    m.add("VerificationError", py.get_type::<VerificationError>())?;
    Ok(())
}
