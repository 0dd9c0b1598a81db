//! Python bindings: `import cardguess`.

use std::str::FromStr;

use cardguess::asymptotics::{self, Admissibility};
use cardguess::exact::{self, ExactOptions, Precision};
use cardguess::indep::{self, BinomialSpec, SurrogateMode};
use cardguess::{birthday, mc, Error, RngStream, Strategy};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(cardguess, CapacityError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    if e.is_capacity() {
        CapacityError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse_strategy(name: &str) -> PyResult<Strategy> {
    Strategy::from_str(name).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A deck of `n` types with `m` copies each.
#[pyclass(frozen, eq, hash, from_py_object, module = "cardguess")]
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeckSpec {
    inner: cardguess::DeckSpec,
}

#[pymethods]
impl DeckSpec {
    #[new]
    fn new(n: u64, m: u64) -> PyResult<Self> {
        cardguess::DeckSpec::new(n, m)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> u64 {
        self.inner.m()
    }

    #[getter]
    fn total(&self) -> u64 {
        self.inner.total()
    }

    fn __repr__(&self) -> String {
        format!("DeckSpec(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "cardguess")]
#[derive(Clone)]
pub struct ScoreSummary {
    mean: f64,
    stderr: f64,
    reps: u64,
    seed: u64,
    strategy: String,
}

#[pymethods]
impl ScoreSummary {
    fn __repr__(&self) -> String {
        format!(
            "ScoreSummary(mean={}, stderr={}, reps={}, seed={}, strategy='{}')",
            self.mean, self.stderr, self.reps, self.seed, self.strategy
        )
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "cardguess")]
#[derive(Clone)]
pub struct ExactValue {
    value: f64,
    /// `"p/q"` in rational mode, otherwise `None`.
    fraction: Option<String>,
    method: String,
}

#[pymethods]
impl ExactValue {
    fn __repr__(&self) -> String {
        match &self.fraction {
            Some(f) => format!("ExactValue({f}, method='{}')", self.method),
            None => format!("ExactValue({}, method='{}')", self.value, self.method),
        }
    }
}

/// Monte Carlo estimate of the expected score.
#[pyfunction]
#[pyo3(signature = (deck, reps, seed = 0, strategy = "greedy", workers = 1))]
fn estimate_score(
    py: Python<'_>,
    deck: DeckSpec,
    reps: u64,
    seed: u64,
    strategy: &str,
    workers: usize,
) -> PyResult<ScoreSummary> {
    let strategy = parse_strategy(strategy)?;
    let s = py
        .detach(|| mc::estimate_score(deck.inner, strategy, reps, seed, workers))
        .map_err(to_py)?;
    Ok(ScoreSummary {
        mean: s.mean,
        stderr: s.stderr,
        reps: s.reps,
        seed: s.seed,
        strategy: strategy.id().to_string(),
    })
}

/// Score of one game played on replication stream `stream`.
#[pyfunction]
#[pyo3(signature = (deck, seed = 0, stream = 0, strategy = "greedy"))]
fn play_game(deck: DeckSpec, seed: u64, stream: u64, strategy: &str) -> PyResult<u64> {
    let strategy = parse_strategy(strategy)?;
    Ok(mc::play_game(
        deck.inner,
        strategy,
        &mut RngStream::new(seed, stream),
    ))
}

fn options(rational: bool) -> ExactOptions {
    ExactOptions {
        precision: if rational {
            Precision::Rational
        } else {
            Precision::Float
        },
        ..ExactOptions::default()
    }
}

fn wrap(v: exact::ExactValue) -> ExactValue {
    ExactValue {
        value: v.value,
        fraction: v.rational.map(|r| r.to_string()),
        method: v.method.id().to_string(),
    }
}

/// Exact expected optimal score, by the state DP or by linearity.
#[pyfunction]
#[pyo3(signature = (deck, rational = false, method = "dp"))]
fn exact_value(
    py: Python<'_>,
    deck: DeckSpec,
    rational: bool,
    method: &str,
) -> PyResult<ExactValue> {
    let opts = options(rational);
    let v = py.detach(|| match method {
        "dp" => exact::exact_value_dp(deck.inner, &opts),
        "linearity" => exact::score_decomposition(deck.inner, &opts).map(|(_, v)| v),
        other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
    });
    v.map(wrap).map_err(to_py)
}

/// Rows `(t, p, E[max remaining], E[max]/t)` for `t = 1..nm`.
#[pyfunction]
fn max_profile(py: Python<'_>, deck: DeckSpec) -> PyResult<Vec<(u64, f64, f64, f64)>> {
    let (profile, _) = py
        .detach(|| exact::score_decomposition(deck.inner, &ExactOptions::default()))
        .map_err(to_py)?;
    Ok(profile.rows().collect())
}

/// Expected maximum of `n` independent `Bin(m, p)` variables.
#[pyfunction]
fn indep_max_expectation(n: u64, m: u64, p: f64) -> PyResult<f64> {
    let b = BinomialSpec::new(n, m, p).map_err(to_py)?;
    Ok(indep::indep_max_expectation(&b))
}

/// Independent-binomial surrogate score; `mode` is "exact" or "quadrature".
#[pyfunction]
#[pyo3(signature = (deck, mode = "exact", grid_size = 512))]
fn s_tilde(py: Python<'_>, deck: DeckSpec, mode: &str, grid_size: usize) -> PyResult<f64> {
    let mode = match mode {
        "exact" => SurrogateMode::ExactSum,
        "quadrature" => SurrogateMode::Quadrature,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    py.detach(|| indep::s_tilde(deck.inner, mode, grid_size, indep::DEFAULT_EXACT_CAP))
        .map(|v| v.value)
        .map_err(to_py)
}

/// Remaining counts with `t` cards left, sampled from their exact joint law.
#[pyfunction]
#[pyo3(signature = (deck, t, seed = 0, stream = 0))]
fn conditional_sample(deck: DeckSpec, t: u64, seed: u64, stream: u64) -> PyResult<Vec<u64>> {
    indep::conditional_sampler(deck.inner, t, &mut RngStream::new(seed, stream)).map_err(to_py)
}

#[pyfunction]
fn feller_gap(n: u64, m: u64, p: f64) -> PyResult<f64> {
    indep::feller_gap(n, m, p).map_err(to_py)
}

/// `{"dg": .., "ho": .., "main": .., "admissible": ..}`.
#[pyfunction]
#[pyo3(signature = (deck, c = 1.0, epsilon = 0.1))]
fn asymptotic_estimates(
    py: Python<'_>,
    deck: DeckSpec,
    c: f64,
    epsilon: f64,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let [dg, ho, main] = asymptotics::all_estimates(deck.inner, &Admissibility { c, epsilon });
    let d = pyo3::types::PyDict::new(py);
    d.set_item("dg", dg.value)?;
    d.set_item("ho", ho.value)?;
    d.set_item("main", main.value)?;
    d.set_item("admissible", main.admissible.unwrap_or(false))?;
    Ok(d.unbind())
}

#[pyfunction]
fn chernoff_bound(n: u64, m: u64, p: f64, theta: f64) -> PyResult<f64> {
    asymptotics::chernoff_bound(n, m, p, theta).map_err(to_py)
}

/// `(E[T], E[T^2])` for the reset chain on `{1..n}`.
#[pyfunction]
fn return_time_moments(n: u64) -> PyResult<(f64, f64)> {
    birthday::return_time_moments(n)
        .map(|s| (s.et, s.et2))
        .map_err(to_py)
}

/// `(returns to 1, renewal ratio)` over `steps` simulated steps.
#[pyfunction]
#[pyo3(signature = (n, steps, seed = 0))]
fn simulate_excursions(n: u64, steps: u64, seed: u64) -> PyResult<(u64, f64)> {
    let s = birthday::simulate_excursions(n, steps, &mut RngStream::new(seed, 0)).map_err(to_py)?;
    Ok((
        s.excursions.unwrap_or(0),
        s.renewal_ratio().unwrap_or(f64::NAN),
    ))
}

#[pymodule]
#[pyo3(name = "cardguess")]
fn cardguess_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CapacityError", m.py().get_type::<CapacityError>())?;
    m.add_class::<DeckSpec>()?;
    m.add_class::<ScoreSummary>()?;
    m.add_class::<ExactValue>()?;
    m.add_function(wrap_pyfunction!(estimate_score, m)?)?;
    m.add_function(wrap_pyfunction!(play_game, m)?)?;
    m.add_function(wrap_pyfunction!(exact_value, m)?)?;
    m.add_function(wrap_pyfunction!(max_profile, m)?)?;
    m.add_function(wrap_pyfunction!(indep_max_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(s_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_sample, m)?)?;
    m.add_function(wrap_pyfunction!(feller_gap, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_bound, m)?)?;
    m.add_function(wrap_pyfunction!(return_time_moments, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_excursions, m)?)?;
    Ok(())
}
