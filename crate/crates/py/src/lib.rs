//! Python bindings: `import poe_equity`.

use poe_core::bounds;
use poe_core::doubly;
use poe_core::generators;
use poe_core::io::{instance_from_json, instance_to_json, SolveReport};
use poe_core::model::{is_ef1, is_eq1, wasted_goods, Allocation};
use poe_core::oracle;
use poe_core::solver;
use poe_core::welfare::{p_mean as core_p_mean, PParam};
use poe_core::{Error, Instance, PoeValue};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(poe_equity, PoeError, PyException);
create_exception!(poe_equity, BudgetError, PoeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } => BudgetError::new_err(e.to_string()),
        _ => PoeError::new_err(e.to_string()),
    }
}

fn parse_p(text: &str) -> Result<PParam, Error> {
    text.parse()
}

/// Accepts ints, floats with exact decimal text, or strings such as "nash".
fn p_from_py(obj: &Bound<'_, PyAny>) -> PyResult<PParam> {
    parse_p(&obj.str()?.to_string()).map_err(to_py)
}

fn p_list(obj: Option<&Bound<'_, PyAny>>) -> PyResult<Vec<PParam>> {
    match obj {
        None => Ok(PParam::standard_grid()),
        Some(o) => o.try_iter()?.map(|x| p_from_py(&x?)).collect(),
    }
}

fn owners(alloc: &Allocation) -> Vec<i64> {
    alloc.to_owner_array()
}

/// Float form of a PoE value; exact text alongside when available.
fn poe_pair(v: &PoeValue) -> (f64, Option<String>) {
    (v.to_f64(), (!matches!(v, PoeValue::Float(_))).then(|| v.to_string()))
}

#[pyclass(name = "Instance", module = "poe_equity", frozen)]
struct PyInstance {
    inner: Instance,
}

impl PyInstance {
    fn alloc(&self, owner: Vec<i64>) -> PyResult<Allocation> {
        Allocation::from_owner_array(self.inner.n(), &owner).map_err(to_py)
    }
}

fn wrap(r: Result<Instance, Error>) -> PyResult<PyInstance> {
    r.map(|inner| PyInstance { inner }).map_err(to_py)
}

#[pymethods]
impl PyInstance {
    /// Binary additive instance from 0/1 rows, one per agent.
    #[new]
    fn new(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        wrap(Instance::from_additive_rows(&rows))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        wrap(instance_from_json(text).map(|(i, _)| i))
    }

    #[pyo3(signature = (name=None))]
    fn to_json(&self, name: Option<&str>) -> String {
        instance_to_json(&self.inner, name)
    }

    #[staticmethod]
    fn lower_bound(r: usize, w: usize) -> PyResult<Self> {
        wrap(generators::gen_lower_bound_instance(r, w))
    }

    #[staticmethod]
    fn submodular_lower_bound(k: usize) -> PyResult<Self> {
        wrap(generators::gen_submodular_lb_instance(k))
    }

    #[staticmethod]
    #[pyo3(signature = (n, m, w, wc, seed=0))]
    fn doubly_normalised(n: usize, m: usize, w: usize, wc: usize, seed: u64) -> PyResult<Self> {
        wrap(generators::gen_doubly_normalised(n, m, w, wc, seed))
    }

    #[staticmethod]
    fn example1() -> Self {
        PyInstance { inner: generators::example1() }
    }

    #[staticmethod]
    fn remark_3x4() -> Self {
        PyInstance { inner: generators::remark_3x4() }
    }

    #[staticmethod]
    fn unnormalised_pair(k: usize) -> PyResult<Self> {
        wrap(generators::unnormalised_pair(k))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    /// Common value of the grand bundle, or `None`.
    #[getter]
    fn normalisation(&self) -> Option<u32> {
        self.inner.normalisation()
    }

    #[getter]
    fn num_types(&self) -> usize {
        self.inner.num_types()
    }

    #[getter]
    fn is_additive(&self) -> bool {
        self.inner.is_additive()
    }

    /// Agent values under an owner array (`-1` for unassigned).
    fn values(&self, owner: Vec<i64>) -> PyResult<Vec<u32>> {
        Ok(self.inner.values(&self.alloc(owner)?))
    }

    fn is_eq1(&self, owner: Vec<i64>) -> PyResult<bool> {
        is_eq1(&self.inner, &self.alloc(owner)?).map_err(to_py)
    }

    fn is_ef1(&self, owner: Vec<i64>) -> PyResult<bool> {
        is_ef1(&self.inner, &self.alloc(owner)?).map_err(to_py)
    }

    fn wasted_goods(&self, owner: Vec<i64>) -> PyResult<Vec<usize>> {
        wasted_goods(&self.inner, &self.alloc(owner)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, m={}, types={})", self.inner.n(), self.inner.m(), self.inner.num_types())
    }
}

#[pyclass(name = "SolveResult", module = "poe_equity", frozen)]
struct PySolveResult {
    report: SolveReport,
    res: solver::SolveResult,
}

#[pymethods]
impl PySolveResult {
    /// Nash-optimal clean allocation as an owner array.
    #[getter]
    fn a_star(&self) -> Vec<i64> {
        owners(&self.res.a_star)
    }

    /// Best EQ1 allocation as an owner array.
    #[getter]
    fn b(&self) -> Vec<i64> {
        owners(&self.res.b)
    }

    #[getter]
    fn l(&self) -> u32 {
        self.res.l
    }

    #[getter]
    fn i_l(&self) -> usize {
        self.res.i_l
    }

    /// `[(p, float, exact text or None)]` in request order.
    #[getter]
    fn poe(&self) -> Vec<(String, f64, Option<String>)> {
        self.res
            .poe
            .iter()
            .map(|(p, v)| {
                let (x, exact) = poe_pair(v);
                (p.to_string(), x, exact)
            })
            .collect()
    }

    fn poe_for(&self, p: &Bound<'_, PyAny>) -> PyResult<Option<f64>> {
        Ok(self.res.poe_for(&p_from_py(p)?).map(PoeValue::to_f64))
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.res.warnings.clone()
    }

    fn to_json(&self) -> String {
        self.report.to_json()
    }
}

/// Solve for A*, B and the PoE at each exponent (default grid when omitted).
#[pyfunction]
#[pyo3(signature = (instance, p=None))]
fn solve(instance: &PyInstance, p: Option<&Bound<'_, PyAny>>) -> PyResult<PySolveResult> {
    let grid = p_list(p)?;
    let res = solver::solve(&instance.inner, &grid).map_err(to_py)?;
    Ok(PySolveResult { report: SolveReport::new(&instance.inner, &res), res })
}

/// Exhaustive search: `[(p, float, exact text or None)]` for the true PoE.
#[pyfunction]
#[pyo3(signature = (instance, p=None, budget=oracle::DEFAULT_BUDGET))]
fn oracle_poe(
    instance: &PyInstance,
    p: Option<&Bound<'_, PyAny>>,
    budget: u64,
) -> PyResult<Vec<(String, f64, Option<String>)>> {
    let grid = p_list(p)?;
    let res = oracle::enumerate(&instance.inner, &grid, budget).map_err(to_py)?;
    Ok(res
        .entries
        .iter()
        .map(|e| {
            let (x, exact) = poe_pair(&e.exact_poe);
            (e.p.to_string(), x, exact)
        })
        .collect())
}

/// p-mean over positive agents; `None` when fewer than `len(values)` are positive.
#[pyfunction]
fn p_mean(values: Vec<u32>, p: &Bound<'_, PyAny>) -> PyResult<Option<f64>> {
    let p = p_from_py(p)?;
    let positive = values.iter().filter(|&&v| v > 0).count();
    match core_p_mean(&values, &p, positive) {
        Ok(v) => Ok(Some(v.to_f64())),
        Err(Error::Domain(_)) => Ok(None),
        Err(e) => Err(to_py(e)),
    }
}

#[pyfunction]
fn poe_lower_bound(p: &Bound<'_, PyAny>, r: usize) -> PyResult<Option<f64>> {
    match bounds::poe_lower_bound(&p_from_py(p)?, r) {
        Ok(x) => Ok(Some(x)),
        Err(Error::Domain(_)) => Ok(None),
        Err(e) => Err(to_py(e)),
    }
}

#[pyfunction]
fn poe_upper_bound(p: &Bound<'_, PyAny>, r: usize) -> PyResult<f64> {
    bounds::poe_upper_bound(&p_from_py(p)?, r).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p=None, r_max=64))]
fn bound_table_csv(p: Option<&Bound<'_, PyAny>>, r_max: usize) -> PyResult<String> {
    let rows = bounds::bound_table(&p_list(p)?, 2..=r_max).map_err(to_py)?;
    Ok(bounds::bound_table_csv(&rows))
}

/// Lottery over EQ1 allocations: `[(weight "a/b", owner array)]`.
#[pyfunction]
fn randomized_allocation(instance: &PyInstance) -> PyResult<Vec<(String, Vec<i64>)>> {
    let lottery = doubly::randomized_allocation(&instance.inner).map_err(to_py)?;
    Ok(lottery.iter().map(|(w, a)| (w.to_string(), owners(a))).collect())
}

#[pymodule]
fn poe_equity(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_poe, m)?)?;
    m.add_function(wrap_pyfunction!(p_mean, m)?)?;
    m.add_function(wrap_pyfunction!(poe_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(poe_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bound_table_csv, m)?)?;
    m.add_function(wrap_pyfunction!(randomized_allocation, m)?)?;
    m.add("PoeError", m.py().get_type::<PoeError>())?;
    m.add("BudgetError", m.py().get_type::<BudgetError>())?;
    Ok(())
}
