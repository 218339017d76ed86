//! Python bindings for the korbit workbench: load models, query orbit
//! invariants and geometry, work with expressions, build gamma matrices and
//! run the full report pipelines.

use korbit_core::expr::{self, Expr as CoreExpr, Var, VarKind};
use korbit_core::fields;
use korbit_core::model::{self, LoadedModel};
use korbit_core::orbits;
use korbit_core::ratio::{parse_rational, Q};
use korbit_core::report::{self, Command, RunConfig};
use korbit_core::{clifford, geometry, liealg};
use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::path::PathBuf;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_command(name: &str) -> PyResult<Command> {
    Ok(match name {
        "validate" => Command::Validate,
        "geometry" => Command::Geometry,
        "orbits" => Command::Orbits,
        "casimirs" => Command::Casimirs,
        "defect" => Command::Defect,
        "lrep" => Command::Lrep,
        "clifford" => Command::Clifford,
        "fields" => Command::Fields,
        "semt" => Command::Semt,
        other => return Err(value_err(format!("unknown command `{other}`"))),
    })
}

fn rationals_from_py(values: Vec<String>) -> PyResult<Vec<Q>> {
    values.iter().map(|s| parse_rational(s).map_err(value_err)).collect()
}

/// A loaded model file: Lie algebra plus optional metric, transition and
/// polarization sections.
#[pyclass]
struct LieAlgebra {
    loaded: LoadedModel,
    origin: PathBuf,
}

#[pymethods]
impl LieAlgebra {
    /// Load a model JSON file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let loaded = model::load_model(std::path::Path::new(path))
            .map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(LieAlgebra { loaded, origin: PathBuf::from(path) })
    }

    /// Parse a model from a JSON string.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(value_err)?;
        let loaded = model::parse_model(&doc).map_err(value_err)?;
        Ok(LieAlgebra { loaded, origin: PathBuf::from("<memory>") })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.loaded.model.dim
    }

    #[getter]
    fn name(&self) -> String {
        self.loaded.model.name.clone()
    }

    /// Violated identities as human-readable strings; empty means valid.
    fn validate(&self) -> Vec<String> {
        liealg::validate_algebra(&self.loaded.model)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    /// Killing form as rational strings.
    fn killing_form(&self) -> Vec<Vec<String>> {
        liealg::killing_form(&self.loaded.model)
            .iter()
            .map(|row| row.iter().map(|x| x.to_string()).collect())
            .collect()
    }

    fn ad_traces(&self) -> Vec<String> {
        liealg::ad_trace_vector(&self.loaded.model)
            .iter()
            .map(|x| x.to_string())
            .collect()
    }

    /// Adjoint matrix of the 1-based basis element.
    fn adjoint(&self, x: usize) -> PyResult<Vec<Vec<String>>> {
        if x == 0 {
            return Err(value_err("basis indices are 1-based"));
        }
        let ad = liealg::adjoint_matrix(&self.loaded.model, x - 1).map_err(value_err)?;
        Ok(ad.m.iter().map(|row| row.iter().map(|v| v.to_string()).collect()).collect())
    }

    /// Rank of the Kirillov matrix at a covector of rational strings.
    fn orbit_rank(&self, lambda: Vec<String>) -> PyResult<usize> {
        let lam = rationals_from_py(lambda)?;
        if lam.len() != self.loaded.model.dim {
            return Err(value_err("covector length must equal dim"));
        }
        Ok(orbits::orbit_rank(&self.loaded.model, &lam))
    }

    #[pyo3(signature = (seed = None))]
    fn algebra_index(&self, seed: Option<u64>) -> usize {
        orbits::algebra_index(&self.loaded.model, seed.unwrap_or(orbits::DEFAULT_SEED))
    }

    /// Strata as (s, orbit_dim) pairs, sorted by s.
    #[pyo3(signature = (seed = None))]
    fn strata(&self, seed: Option<u64>) -> Vec<(usize, usize)> {
        orbits::stratify(&self.loaded.model, seed.unwrap_or(orbits::DEFAULT_SEED))
            .iter()
            .map(|s| (s.s, s.orbit_dim))
            .collect()
    }

    /// Canonical polynomial Casimir basis up to the degree, as strings.
    fn casimirs(&self, max_degree: u32) -> PyResult<Vec<String>> {
        let cs = orbits::find_casimirs(&self.loaded.model, max_degree, max_degree)
            .map_err(value_err)?;
        Ok(cs.iter().map(|c| c.to_string()).collect())
    }

    #[pyo3(signature = (seed = None))]
    fn defect(&self, seed: Option<u64>) -> i64 {
        orbits::defect(&self.loaded.model, seed.unwrap_or(orbits::DEFAULT_SEED)).defect
    }

    /// Signed scalar curvature (paper convention) as a rational string;
    /// needs the metric section.
    fn scalar_curvature(&self) -> PyResult<String> {
        let g = self
            .loaded
            .metric
            .as_ref()
            .ok_or_else(|| value_err("model has no `metric` section"))?;
        geometry::check_metric_invariance(&self.loaded.model, g)
            .map_err(|w| value_err(format!("metric not invariant ({} witnesses)", w.len())))?;
        let metric = geometry::build_form_b(&self.loaded.model, g).map_err(value_err)?;
        let conn = geometry::christoffel(&self.loaded.model, &metric);
        let curv = geometry::riemann(&self.loaded.model, &conn, &metric);
        Ok(curv.scalar.to_string())
    }

    /// Run a workbench command and return the JSON report as a string.
    /// `config_json` supplies the fields/semt config document inline.
    #[pyo3(signature = (command, config_json = None, tol = 1e-9, seed = None, max_degree = 4))]
    fn report(
        &self,
        command: &str,
        config_json: Option<&str>,
        tol: f64,
        seed: Option<u64>,
        max_degree: u32,
    ) -> PyResult<String> {
        let cmd = parse_command(command)?;
        let config = match config_json {
            None => report::CommandConfig::None,
            Some(text) => {
                let doc: serde_json::Value = serde_json::from_str(text).map_err(value_err)?;
                match cmd {
                    Command::Casimirs => report::CommandConfig::Casimirs(
                        model::parse_casimirs_config(&doc).map_err(value_err)?,
                    ),
                    _ => report::CommandConfig::Fields(Box::new(
                        model::parse_field_config(&doc).map_err(value_err)?,
                    )),
                }
            }
        };
        let cfg = RunConfig {
            command: cmd,
            model_path: self.origin.clone(),
            config_path: None,
            tol,
            seed: seed.unwrap_or(orbits::DEFAULT_SEED),
            max_degree,
        };
        let outcome = report::run_loaded(&cfg, &self.loaded, &config).map_err(value_err)?;
        Ok(outcome.to_json_string())
    }
}

/// Symbolic expression over q/p/l variables.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Expr {
    inner: CoreExpr,
}

fn var_from_name(name: &str) -> PyResult<Var> {
    let bytes = name.as_bytes();
    if bytes.len() == 2 && (b'1'..=b'9').contains(&bytes[1]) {
        let kind = match bytes[0] {
            b'q' => Some(VarKind::Q),
            b'p' => Some(VarKind::P),
            b'l' => Some(VarKind::L),
            _ => None,
        };
        if let Some(kind) = kind {
            return Ok(Var::new(kind, bytes[1] - b'0'));
        }
    }
    Err(value_err(format!("unknown variable `{name}` (expected q1..q9, p1..p9, l1..l9)")))
}

#[pymethods]
impl Expr {
    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr({})", self.inner)
    }

    /// Symbolic derivative with respect to a variable name like "q1".
    fn diff(&self, var: &str) -> PyResult<Expr> {
        let v = var_from_name(var)?;
        Ok(Expr { inner: expr::differentiate(&self.inner, v) })
    }

    /// Evaluate with a {"q1": value, ...} binding; values may be complex.
    fn eval(&self, bindings: &Bound<'_, PyDict>) -> PyResult<Complex64> {
        let mut b = expr::Binding::new();
        for (k, v) in bindings.iter() {
            let name: String = k.extract()?;
            let z: Complex64 = v.extract()?;
            b.set(var_from_name(&name)?, z);
        }
        expr::evaluate(&self.inner, &b).map_err(value_err)
    }

    /// Poisson bracket with another expression over the first `n_pairs`
    /// canonical pairs.
    fn poisson(&self, other: &Expr, n_pairs: usize) -> Expr {
        Expr { inner: expr::poisson_bracket(&self.inner, &other.inner, n_pairs) }
    }
}

/// Parse an expression string (grammar: rational constants, i, q/p/l
/// variables, + - * / ^, exp/sin/cos).
#[pyfunction]
fn parse(text: &str) -> PyResult<Expr> {
    expr::parse(text).map(|inner| Expr { inner }).map_err(value_err)
}

/// Conformal coupling and frequency: returns `(zeta, omega)` with
/// `zeta = (n-1)/(4n)` and `omega = sqrt(Lambda^2 + zeta R + m^2)`.
#[pyfunction]
#[pyo3(name = "kg_dispersion")]
fn kg_dispersion_py(big_lambda: f64, scalar_curvature: f64, mass: f64, n: u32) -> PyResult<(f64, f64)> {
    fields::kg_dispersion(big_lambda, scalar_curvature, mass, n).map_err(value_err)
}

/// Gamma matrices for a symmetric nondegenerate bilinear form, as nested
/// lists of complex numbers; size `2^floor(k/2)` for a `k`-dim form.
#[pyfunction]
fn gamma_matrices(form: Vec<Vec<f64>>) -> PyResult<Vec<Vec<Vec<Complex64>>>> {
    let k = form.len();
    if form.iter().any(|row| row.len() != k) {
        return Err(value_err("form must be square"));
    }
    let m = nalgebra_matrix(&form);
    let gens = clifford::build_generators(&m).map_err(value_err)?;
    Ok(gens
        .iter()
        .map(|g| {
            (0..g.nrows())
                .map(|r| (0..g.ncols()).map(|c| g[(r, c)]).collect())
                .collect()
        })
        .collect())
}

fn nalgebra_matrix(rows: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let n = rows.len();
    nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

#[pymodule]
fn korbit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<LieAlgebra>()?;
    m.add_class::<Expr>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(kg_dispersion_py, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_matrices, m)?)?;
    m.add("DEFAULT_SEED", orbits::DEFAULT_SEED)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
