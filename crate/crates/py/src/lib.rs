//! Python bindings. Matrices cross the boundary as lists of rows of complex
//! numbers; anything convertible with `complex()` is accepted, including
//! numpy arrays.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use nospill_core::driver::{self, AppError, SolveOptions};
use nospill_core::format::{self, DeltaFile, FileError, FileStructure, PairsFile, PencilFile, ProblemFile};
use nospill_core::numerics::{diag, eig_pencil, CMatrix, Eigenvalue};
use nospill_core::pencil::{classify_structure, DeflatingPair, Star, StructuredPencil};
use nospill_core::random::{RandomClass, RandomSpec};
use nospill_core::reproduce::ExampleId;
use nospill_core::shh::{shh_gramian, shh_update, ShhPencil};
use nospill_core::update_structured::{gramian_g, solve_core, solve_core_parametrized, structured_update, t_family, CoreSolution};
use nospill_core::update_unstructured::{general_solution, theorem41_update, UpdateProblem, UpdateResult};

create_exception!(nospill, NospillError, PyValueError, "A numerical precondition failed.");
create_exception!(nospill, FormatError, PyValueError, "An input file or document is malformed.");

fn math_err(e: nospill_core::Error) -> PyErr {
    NospillError::new_err(e.to_string())
}

fn file_err(e: FileError) -> PyErr {
    FormatError::new_err(e.to_string())
}

fn app_err(e: AppError) -> PyErr {
    match e {
        AppError::File(f) => file_err(f),
        AppError::Math { source } => math_err(source),
    }
}

type Rows = Vec<Vec<Complex64>>;

fn to_matrix(name: &str, rows: &Rows) -> PyResult<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(FormatError::new_err(format!("{name} is empty")));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(FormatError::new_err(format!("{name} has rows of different lengths")));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn from_matrix(a: &CMatrix) -> Rows {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

/// A diagonal `Λ` may be passed as a flat list of eigenvalues.
#[derive(FromPyObject)]
enum LambdaArg {
    Matrix(Rows),
    Values(Vec<Complex64>),
}

fn to_lambda(name: &str, l: &LambdaArg) -> PyResult<CMatrix> {
    match l {
        LambdaArg::Matrix(rows) => to_matrix(name, rows),
        LambdaArg::Values(v) if v.is_empty() => Err(FormatError::new_err(format!("{name} is empty"))),
        LambdaArg::Values(v) => Ok(diag(v)),
    }
}

/// Result of an update: `(ΔM, ΔK)` with its provenance and residuals.
#[pyclass(name = "Update", module = "nospill", frozen)]
struct PyUpdate {
    inner: UpdateResult,
}

#[pymethods]
impl PyUpdate {
    #[getter]
    fn delta_m(&self) -> Rows {
        from_matrix(&self.inner.delta_m)
    }

    #[getter]
    fn delta_k(&self) -> Rows {
        from_matrix(&self.inner.delta_k)
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.provenance.method.clone()
    }

    /// Scaled residual of the targets on the updated pencil.
    #[getter]
    fn target_residual(&self) -> f64 {
        self.inner.report.target.rel
    }

    /// Scaled residual of the fixed pair, when it was known.
    #[getter]
    fn spillover_residual(&self) -> Option<f64> {
        self.inner.report.spillover.map(|s| s.rel)
    }

    /// Structure the updated pencil carries, if any.
    #[getter]
    fn result_structure(&self) -> Option<&'static str> {
        self.inner.provenance.result_tag.map(|t| t.name())
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.inner.provenance.notes.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Update(method={:?}, n={}, target_residual={:.3e})",
            self.inner.provenance.method,
            self.inner.delta_m.nrows(),
            self.inner.report.target.rel
        )
    }
}

enum Kind {
    Plain(StructuredPencil),
    Shh(ShhPencil),
}

/// A pencil `λM + K` with a structure tag such as `"hermitian"`,
/// `"t-odd"`, `"star-shh"` or `"unstructured"`.
#[pyclass(name = "Pencil", module = "nospill", frozen)]
struct PyPencil {
    kind: Kind,
    structure: String,
}

impl PyPencil {
    fn mk(&self) -> (&CMatrix, &CMatrix) {
        match &self.kind {
            Kind::Plain(l) => (&l.m, &l.k),
            Kind::Shh(l) => (&l.m, &l.k),
        }
    }

    fn core(&self, g: &CMatrix, lc: &CMatrix, la: &CMatrix, t: f64, mhat: Option<Rows>, z: Option<(Rows, Rows)>) -> PyResult<CoreSolution> {
        let core = match (mhat, z) {
            (Some(_), Some(_)) => return Err(PyValueError::new_err("give either Mhat or (Z1, Z2), not both")),
            (Some(mh), None) => solve_core(g, lc, la, &to_matrix("Mhat", &mh)?),
            (None, Some((z1, z2))) => solve_core_parametrized(g, lc, la, &to_matrix("Z1", &z1)?, &to_matrix("Z2", &z2)?),
            (None, None) => t_family(g, lc, la, t),
        };
        core.map_err(math_err)
    }
}

#[pymethods]
impl PyPencil {
    #[new]
    #[pyo3(signature = (m, k, structure = "unstructured"))]
    fn new(m: Rows, k: Rows, structure: &str) -> PyResult<Self> {
        let (m, k) = (to_matrix("M", &m)?, to_matrix("K", &k)?);
        let kind = match FileStructure::parse(structure).map_err(file_err)? {
            FileStructure::Tag(tag) => Kind::Plain(StructuredPencil::new(m, k, tag).map_err(math_err)?),
            FileStructure::StarShh => Kind::Shh(ShhPencil::new(m, k, Star::Conj).map_err(math_err)?),
            FileStructure::TShh => Kind::Shh(ShhPencil::new(m, k, Star::Trans).map_err(math_err)?),
        };
        Ok(Self { kind, structure: structure.to_string() })
    }

    #[getter]
    fn m(&self) -> Rows {
        from_matrix(self.mk().0)
    }

    #[getter]
    fn k(&self) -> Rows {
        from_matrix(self.mk().1)
    }

    #[getter]
    fn structure(&self) -> &str {
        &self.structure
    }

    #[getter]
    fn n(&self) -> usize {
        self.mk().0.nrows()
    }

    /// Eigenvalues of `λM + K`; infinite ones are `None`.
    fn eigenvalues(&self) -> PyResult<Vec<Option<Complex64>>> {
        let (m, k) = self.mk();
        let eigs = eig_pencil(m, k).map_err(math_err)?;
        Ok(eigs
            .into_iter()
            .map(|e| match e.value {
                Eigenvalue::Finite(z) => Some(z),
                Eigenvalue::Infinite => None,
            })
            .collect())
    }

    /// Names of every `(⋆, ε₁, ε₂)` structure the matrices satisfy.
    fn classify(&self) -> PyResult<Vec<&'static str>> {
        let (m, k) = self.mk();
        let tags = classify_structure(m, k).map_err(math_err)?;
        Ok(tags.into_iter().map(|t| t.name()).collect())
    }

    /// No-spillover update moving `Λ_c` to `Λ_a` along `X_c`. The core is
    /// `M̂ = tG` unless `mhat` or `(z1, z2)` is given.
    #[pyo3(signature = (xc, lambda_c, lambda_a, t = 0.0, mhat = None, z1 = None, z2 = None))]
    #[allow(clippy::too_many_arguments)]
    fn update(
        &self,
        xc: Rows,
        lambda_c: LambdaArg,
        lambda_a: LambdaArg,
        t: f64,
        mhat: Option<Rows>,
        z1: Option<Rows>,
        z2: Option<Rows>,
    ) -> PyResult<PyUpdate> {
        let xc = to_matrix("Xc", &xc)?;
        let lc = to_lambda("Lambda_c", &lambda_c)?;
        let la = to_lambda("Lambda_a", &lambda_a)?;
        let z = match (z1, z2) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(PyValueError::new_err("z1 and z2 must be given together")),
        };
        let inner = match &self.kind {
            Kind::Plain(l) => {
                let (g, _) = gramian_g(l, &xc).map_err(math_err)?;
                let core = self.core(&g, &lc, &la, t, mhat, z)?;
                structured_update(l, &xc, &lc, &la, &core)
            }
            Kind::Shh(l) => {
                let (g, _) = shh_gramian(l, &xc).map_err(math_err)?;
                let core = self.core(&g, &lc, &la, t, mhat, z)?;
                shh_update(l, &xc, &lc, &la, &core)
            }
        }
        .map_err(math_err)?;
        Ok(PyUpdate { inner })
    }

    /// Update with a known fixed pair `(X_f, Λ_f)`. Uses the explicit
    /// annihilator form when `mtilde` is given, else the general solution
    /// with free parameter `z` (minimum norm when omitted).
    #[pyo3(signature = (xc, lambda_c, lambda_a, xf, lambda_f, xa = None, mtilde = None, z = None))]
    #[allow(clippy::too_many_arguments)]
    fn update_with_fixed(
        &self,
        xc: Rows,
        lambda_c: LambdaArg,
        lambda_a: LambdaArg,
        xf: Rows,
        lambda_f: LambdaArg,
        xa: Option<Rows>,
        mtilde: Option<Rows>,
        z: Option<Rows>,
    ) -> PyResult<PyUpdate> {
        let (m, k) = self.mk();
        let l = StructuredPencil::unstructured(m.clone(), k.clone()).map_err(math_err)?;
        let xc = to_matrix("Xc", &xc)?;
        let change = DeflatingPair::new(xc.clone(), to_lambda("Lambda_c", &lambda_c)?).map_err(math_err)?;
        let fixed = DeflatingPair::new(to_matrix("Xf", &xf)?, to_lambda("Lambda_f", &lambda_f)?).map_err(math_err)?;
        let xa = match xa {
            Some(x) => to_matrix("Xa", &x)?,
            None => xc,
        };
        let problem = UpdateProblem::new(change, xa, to_lambda("Lambda_a", &lambda_a)?, Some(fixed)).map_err(math_err)?;
        let inner = match (mtilde, z) {
            (Some(mt), None) => theorem41_update(&l, &problem, &to_matrix("Mtilde", &mt)?),
            (None, z) => {
                let z = z.map(|z| to_matrix("Z", &z)).transpose()?;
                general_solution(&l, &problem, z.as_ref())
            }
            (Some(_), Some(_)) => return Err(PyValueError::new_err("give either mtilde or z, not both")),
        }
        .map_err(math_err)?;
        Ok(PyUpdate { inner })
    }

    fn __repr__(&self) -> String {
        format!("Pencil(n={}, structure={:?})", self.n(), self.structure)
    }
}

/// Solves a problem document (JSON text) and returns the solution document.
#[pyfunction]
#[pyo3(signature = (problem, unstructured = false, quadratic = false, tol = None))]
fn solve(problem: &str, unstructured: bool, quadratic: bool, tol: Option<f64>) -> PyResult<String> {
    let p: ProblemFile = format::parse(problem).map_err(file_err)?;
    let solved = driver::solve(&p, SolveOptions { unstructured, quadratic, tol }).map_err(app_err)?;
    Ok(format::emit(&solved.file()))
}

/// Certifies an update document against a pencil document and one or more
/// pairs documents; returns the certificate as JSON text.
#[pyfunction]
#[pyo3(signature = (pencil, delta, pairs, tol = None))]
fn verify(pencil: &str, delta: &str, pairs: Vec<String>, tol: Option<f64>) -> PyResult<String> {
    let pencil: PencilFile = format::parse(pencil).map_err(file_err)?;
    let delta: DeltaFile = format::parse(delta).map_err(file_err)?;
    let mut merged = PairsFile { format: format::FORMAT_VERSION, ..PairsFile::default() };
    for p in &pairs {
        merged = merged.merge(format::parse(p).map_err(file_err)?);
    }
    let cert = driver::verify(&pencil, &delta, &merged, tol).map_err(app_err)?;
    Ok(format::emit(&cert))
}

/// A seeded random problem and its hidden fixed pair, both as JSON text.
#[pyfunction]
#[pyo3(signature = (seed, n, p, class_name, definite = false))]
fn random_problem(seed: u64, n: usize, p: usize, class_name: &str, definite: bool) -> PyResult<(String, String)> {
    let class = RandomClass::parse(class_name).ok_or_else(|| PyValueError::new_err(format!("unknown class {class_name:?}")))?;
    let (problem, hidden) = driver::random_files(&RandomSpec { seed, n, p, class, definite }).map_err(app_err)?;
    Ok((format::emit(&problem), format::emit(&hidden)))
}

/// Reruns a worked example (`herm-6.1`, `odd-6.2`, `even-6.3`, `shh-7`) and
/// returns its report as JSON text.
#[pyfunction]
fn reproduce(example: &str) -> PyResult<String> {
    let id = ExampleId::parse(example).ok_or_else(|| PyValueError::new_err(format!("unknown example {example:?}")))?;
    let r = nospill_core::reproduce::reproduce(id).map_err(math_err)?;
    Ok(format::emit(&r))
}

#[pymodule]
fn nospill(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("NospillError", m.py().get_type::<NospillError>())?;
    m.add("FormatError", m.py().get_type::<FormatError>())?;
    m.add_class::<PyPencil>()?;
    m.add_class::<PyUpdate>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(random_problem, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
