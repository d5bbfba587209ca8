//! Python bindings: `import nevpick`.
//!
//! Complex numbers cross as Python `complex`, matrices as lists of rows.
//! Invalid input raises `ValueError`; numerical failures raise
//! `ArithmeticError` and internal assertion failures `RuntimeError`.

use nevpick_core::cstar::envelope_report;
use nevpick_core::feasibility::{feasibility_sweep, matrix_pick_sweep};
use nevpick_core::gap::{gap_search_seeds, GapConfig};
use nevpick_core::ideal::{construct_interpolant, ConstrainedFunction};
use nevpick_core::lattice::{canonical_form, join, meet, CanonicalForm, InvariantSubspace};
use nevpick_core::linalg::CMatrix;
use nevpick_core::modelspace::{grammian as gram_rep, model_space_labels};
use nevpick_core::quotient::{build_compression, is_contraction, quotient_norm as exact_norm};
use nevpick_core::{
    Analytic, DerivativeKernelLabel, Error, InterpolationProblem, QuotientElement, SearchConfig, Targets,
};
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::AmbiguousMatch { .. }
        | Error::NearDependentBasis { .. }
        | Error::Unsupported(_)
        | Error::DimensionMismatch { .. }
        | Error::InfeasibleByStructure(_) => PyValueError::new_err(e.to_string()),
        Error::Separation { .. } | Error::RankTolerance(_) | Error::BudgetExhausted(_) => {
            PyArithmeticError::new_err(e.to_string())
        }
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn from_rows(rows: &[Vec<Complex64>]) -> PyResult<CMatrix> {
    let k = rows.len();
    if k == 0 || rows.iter().any(|r| r.len() != k) {
        return Err(PyValueError::new_err("matrix targets must be nonempty square lists of rows"));
    }
    Ok(CMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

#[derive(FromPyObject)]
enum ZeroSpec {
    WithMult((Complex64, u32)),
    Simple(Complex64),
}

fn zero_list(zeros: Vec<ZeroSpec>) -> Vec<(Complex64, u32)> {
    zeros
        .into_iter()
        .map(|z| match z {
            ZeroSpec::WithMult(p) => p,
            ZeroSpec::Simple(a) => (a, 1),
        })
        .collect()
}

#[derive(FromPyObject)]
enum TargetSpec {
    Scalar(Vec<Complex64>),
    Matrix(Vec<Vec<Vec<Complex64>>>),
}

/// Finite Blaschke product. `zeros` holds points or `(point, multiplicity)` pairs.
#[pyclass(name = "BlaschkeProduct", module = "nevpick", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBlaschke(nevpick_core::BlaschkeProduct);

#[pymethods]
impl PyBlaschke {
    #[new]
    fn new(zeros: Vec<ZeroSpec>) -> PyResult<Self> {
        nevpick_core::BlaschkeProduct::new(zero_list(zeros)).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn monomial(n: u32) -> Self {
        Self(nevpick_core::BlaschkeProduct::monomial(n))
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    #[getter]
    fn zeros(&self) -> Vec<(Complex64, u32)> {
        self.0.zeros().iter().map(|z| (z.alpha, z.mult)).collect()
    }

    #[pyo3(signature = (z, deriv=0))]
    fn evaluate(&self, z: Complex64, deriv: usize) -> PyResult<Complex64> {
        self.0.evaluate(z, deriv).map_err(to_py)
    }

    fn __call__(&self, z: Complex64) -> PyResult<Complex64> {
        self.evaluate(z, 0)
    }

    fn gcd(&self, other: &Self) -> PyResult<Self> {
        self.0.gcd(&other.0).map(Self).map_err(to_py)
    }

    fn lcm(&self, other: &Self) -> PyResult<Self> {
        self.0.lcm(&other.0).map(Self).map_err(to_py)
    }

    fn divides(&self, other: &Self) -> PyResult<bool> {
        self.0.divides(&other.0).map_err(to_py)
    }

    fn same_zeros(&self, other: &Self) -> PyResult<bool> {
        self.0.same_zeros(&other.0).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("BlaschkeProduct({})", self.0)
    }
}

/// Interpolation data for `H∞_B`. Nodes at zeros of `B` are stored first.
#[pyclass(name = "Problem", module = "nevpick", frozen)]
struct PyProblem(InterpolationProblem);

#[pymethods]
impl PyProblem {
    #[new]
    fn new(b: &PyBlaschke, nodes: Vec<Complex64>, targets: TargetSpec) -> PyResult<Self> {
        let targets = match targets {
            TargetSpec::Scalar(t) => Targets::Scalar(t),
            TargetSpec::Matrix(ms) => Targets::Matrix(ms.iter().map(|m| from_rows(m)).collect::<PyResult<_>>()?),
        };
        InterpolationProblem::new(b.0.clone(), nodes, targets).map(Self).map_err(to_py)
    }

    #[getter]
    fn blaschke(&self) -> PyBlaschke {
        PyBlaschke(self.0.blaschke().clone())
    }

    #[getter]
    fn nodes(&self) -> Vec<Complex64> {
        self.0.nodes().to_vec()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn r(&self) -> usize {
        self.0.r()
    }

    #[getter]
    fn block_size(&self) -> usize {
        self.0.block_size()
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(m={}, n={}, r={}, block_size={})",
            self.0.m(),
            self.0.n(),
            self.0.r(),
            self.0.block_size()
        )
    }
}

/// `λ + Σ_k Σ_j h[k][j] z^j B^(k+1)`.
#[pyclass(name = "Interpolant", module = "nevpick", frozen)]
struct PyInterpolant {
    function: ConstrainedFunction,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    separation: f64,
}

#[pymethods]
impl PyInterpolant {
    #[getter]
    fn constant(&self) -> Complex64 {
        self.function.lambda
    }

    #[getter]
    fn h(&self) -> Vec<Vec<Complex64>> {
        self.function.h.clone()
    }

    fn __call__(&self, z: Complex64) -> Complex64 {
        self.function.eval(z)
    }

    /// `f^(order)(z)`.
    fn derivative(&self, z: Complex64, order: usize) -> Complex64 {
        self.function.jet(z, order).derivative(order)
    }
}

fn search_config(seed: u64, grid_resolution: Option<usize>, restarts: Option<usize>) -> SearchConfig {
    let d = SearchConfig::with_seed(seed);
    SearchConfig {
        grid_resolution: grid_resolution.unwrap_or(d.grid_resolution),
        restarts: restarts.unwrap_or(d.restarts),
        ..d
    }
}

/// Pick-matrix sweep over the unit sphere of the model space.
#[pyfunction]
#[pyo3(signature = (problem, seed=0, grid_resolution=None, restarts=None))]
fn feasibility<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    seed: u64,
    grid_resolution: Option<usize>,
    restarts: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = search_config(seed, grid_resolution, restarts);
    let p = &problem.0;
    let sweep = py
        .detach(|| match p.targets() {
            Targets::Scalar(_) => feasibility_sweep(p, &cfg),
            Targets::Matrix(_) => matrix_pick_sweep(p, &cfg),
        })
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("verdict", sweep.kind.as_str())?;
    out.set_item("feasible", sweep.feasible)?;
    out.set_item("min_lambda", sweep.min_lambda)?;
    out.set_item("margin", sweep.margin)?;
    out.set_item("necessary_only", sweep.necessary_only)?;
    out.set_item("converged", sweep.converged)?;
    out.set_item("worst_v", sweep.worst_v.coeffs.iter().copied().collect::<Vec<_>>())?;
    Ok(out)
}

fn data_class(p: &InterpolationProblem) -> PyResult<QuotientElement> {
    let blocks = p.targets().as_blocks();
    let r = p.r();
    if r == 0 {
        return Err(to_py(Error::Unsupported("exact quotient norms need a node at a zero of B".into())));
    }
    if (1..r).any(|j| (&blocks[j] - &blocks[0]).norm() > 1e-9 * blocks[0].norm().max(1.0)) {
        return Err(PyValueError::new_err("targets at the zeros of B differ"));
    }
    QuotientElement::matrix(blocks[0].clone(), blocks[r..].to_vec()).map_err(to_py)
}

/// Exact norm of the data class in `H∞_B / I`.
#[pyfunction]
fn quotient_norm(problem: &PyProblem) -> PyResult<f64> {
    let comp = build_compression(&problem.0).map_err(to_py)?;
    exact_norm(&data_class(&problem.0)?, &comp).map_err(to_py)
}

/// `Q - D Q D^* >= 0` at threshold `tau_psd`; returns `(contraction, margin)`.
#[pyfunction]
#[pyo3(signature = (problem, tau_psd=1e-9))]
fn contraction(problem: &PyProblem, tau_psd: f64) -> PyResult<(bool, f64)> {
    let comp = build_compression(&problem.0).map_err(to_py)?;
    let report = is_contraction(&data_class(&problem.0)?, &comp, tau_psd).map_err(to_py)?;
    Ok((report.contraction, report.margin))
}

/// Dimensions of the C*-algebra generated by the compressed quotient and of
/// its commutant.
#[pyfunction]
fn envelope<'py>(py: Python<'py>, problem: &PyProblem) -> PyResult<Bound<'py, PyDict>> {
    let r = envelope_report(&problem.0).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("d", r.d)?;
    out.set_item("algebra_dim", r.algebra_dim)?;
    out.set_item("commutant_dim", r.commutant_dim)?;
    out.set_item("full", r.is_full)?;
    out.set_item("prediction", r.predicted_full)?;
    out.set_item("agreement", r.agreement)?;
    out.set_item("warnings", r.warnings)?;
    Ok(out)
}

/// An interpolant in `H∞_B` for scalar data (no norm control).
#[pyfunction]
#[pyo3(signature = (problem, seed=0))]
fn construct(problem: &PyProblem, seed: u64) -> PyResult<PyInterpolant> {
    let h = construct_interpolant(&problem.0, seed).map_err(to_py)?;
    Ok(PyInterpolant {
        function: h.function,
        residual: h.residual,
        separation: h.separation,
    })
}

/// Grammian of the derivative kernels at the zeros of `B` followed by the
/// Szegő kernels of the free nodes.
#[pyfunction]
fn grammian(problem: &PyProblem) -> PyResult<Vec<Vec<Complex64>>> {
    let p = &problem.0;
    let mut labels = model_space_labels(p.blaschke());
    labels.extend(p.free_nodes().iter().map(|&z| DerivativeKernelLabel::new(z, 0)));
    Ok(rows(&gram_rep(&labels).map_err(to_py)?.q))
}

fn subspace(psi: Vec<ZeroSpec>, v: Vec<Vec<Complex64>>, n: u32) -> PyResult<InvariantSubspace> {
    let psi = nevpick_core::BlaschkeProduct::new(zero_list(psi)).map_err(to_py)?;
    InvariantSubspace::new(psi, v, n).map_err(to_py)
}

fn canonical_dict<'py>(py: Python<'py>, f: &CanonicalForm) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("phi", PyBlaschke(f.phi.clone()))?;
    out.set_item("theta", PyBlaschke(f.theta.clone()))?;
    out.set_item("w_basis", f.w_basis.clone())?;
    Ok(out)
}

/// Canonical form `φ (W ⊕ z^N H^2)` of `ψ (V ⊕ z^N H^2)`.
#[pyfunction(name = "canonical_form")]
fn py_canonical_form<'py>(
    py: Python<'py>,
    psi: Vec<ZeroSpec>,
    v: Vec<Vec<Complex64>>,
    n: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let f = canonical_form(&subspace(psi, v, n)?).map_err(to_py)?;
    canonical_dict(py, &f)
}

type SubspaceSpec = (Vec<ZeroSpec>, Vec<Vec<Complex64>>);

/// Meet and join of two subspaces `(psi, V)` sharing the exponent `n`.
#[pyfunction]
fn meet_join<'py>(py: Python<'py>, a: SubspaceSpec, b: SubspaceSpec, n: u32) -> PyResult<Bound<'py, PyDict>> {
    let a = subspace(a.0, a.1, n)?;
    let b = subspace(b.0, b.1, n)?;
    let m = meet(&a, &b).map_err(to_py)?;
    let j = join(&a, &b).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("meet", canonical_dict(py, &m.canonical)?)?;
    out.set_item("meet_bounds_hold", m.bounds_hold)?;
    out.set_item("join", canonical_dict(py, &j.canonical)?)?;
    out.set_item("join_law_holds", j.law_holds)?;
    Ok(out)
}

/// Random matrix data on the template's nodes that passes the Pick sweep
/// with quotient norm above 1. Returns `None` when every seed runs out.
#[pyfunction]
#[pyo3(signature = (template, seeds, budget=1000))]
fn gap_search<'py>(
    py: Python<'py>,
    template: &PyProblem,
    seeds: Vec<u64>,
    budget: usize,
) -> PyResult<Option<Bound<'py, PyDict>>> {
    let cfg = GapConfig {
        budget,
        ..GapConfig::default()
    };
    let t = &template.0;
    let (found, _) = py.detach(|| gap_search_seeds(t, &seeds, &cfg)).map_err(to_py)?;
    let Some(inst) = found else {
        return Ok(None);
    };
    let out = PyDict::new(py);
    out.set_item("seed", inst.seed)?;
    out.set_item("attempt", inst.attempt)?;
    out.set_item("targets", inst.targets.iter().map(rows).collect::<Vec<_>>())?;
    out.set_item("quotient_norm", inst.verified.quotient_norm)?;
    out.set_item("sweep_margin", inst.verified.sweep_margin)?;
    out.set_item("contraction_margin", inst.verified.contraction_margin)?;
    Ok(Some(out))
}

#[pymodule]
fn nevpick(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBlaschke>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyInterpolant>()?;
    m.add_function(wrap_pyfunction!(feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_norm, m)?)?;
    m.add_function(wrap_pyfunction!(contraction, m)?)?;
    m.add_function(wrap_pyfunction!(envelope, m)?)?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(grammian, m)?)?;
    m.add_function(wrap_pyfunction!(py_canonical_form, m)?)?;
    m.add_function(wrap_pyfunction!(meet_join, m)?)?;
    m.add_function(wrap_pyfunction!(gap_search, m)?)?;
    Ok(())
}
