//! Python bindings for `cardguess`.
//!
//! Exact rationals come back as `fractions.Fraction`, big integers as `int`.

use cardguess::asym::{self, AsymSeries, Evaluator, Parity};
use cardguess::exactnum::Rational;
use cardguess::{genfun, mc, shuffle, strategy, Error, Limits};
use num_bigint::{BigInt, BigUint};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(cardguess_py, LimitExceededError, PyException);
create_exception!(cardguess_py, InfeasibleError, PyException);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::InvalidArgument(_) | Error::InvalidPermutation(_) => PyValueError::new_err(msg),
        Error::LimitExceeded { .. } | Error::NoConvergence { .. } => LimitExceededError::new_err(msg),
        Error::UnreachableDeck { .. } | Error::InfeasiblePrefix { .. } | Error::Degenerate => {
            InfeasibleError::new_err(msg)
        }
        _ => PyRuntimeError::new_err(msg),
    }
}

fn fraction<'py>(py: Python<'py>, x: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((x.numer().clone(), x.denom().clone()))
}

fn fractions<'py>(py: Python<'py>, xs: &[Rational]) -> PyResult<Vec<Bound<'py, PyAny>>> {
    xs.iter().map(|x| fraction(py, x)).collect()
}

fn limits(max_n: Option<usize>) -> Limits {
    let mut l = Limits::from_env();
    if let Some(n) = max_n {
        l.k_shuffle_max_n = n;
    }
    l
}

/// A deck ordering of `1..=n`, top card first.
#[pyclass(name = "Permutation", eq, frozen, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPermutation(shuffle::Permutation);

#[pymethods]
impl PyPermutation {
    #[new]
    fn new(cards: Vec<u16>) -> PyResult<Self> {
        shuffle::Permutation::new(cards).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(shuffle::Permutation::identity(n))
    }

    #[getter]
    fn cards(&self) -> Vec<u16> {
        self.0.cards().to_vec()
    }

    fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    fn descents(&self) -> usize {
        self.0.descents()
    }

    fn rising_sequences(&self) -> usize {
        self.0.rising_sequences()
    }

    /// Number of ways `k` riffle shuffles of the sorted deck produce this order.
    fn multiplicity(&self, k: u32) -> BigUint {
        shuffle::multiplicity(&self.0, k)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Permutation({:?})", self.0.cards())
    }
}

/// The longer-pile guessing rule for a once-shuffled deck.
#[pyclass(name = "GuessState")]
struct PyGuessState(strategy::GuessState);

#[pymethods]
impl PyGuessState {
    #[new]
    fn new(n: usize) -> Self {
        Self(strategy::GuessState::new(n))
    }

    fn guess(&self) -> Option<u16> {
        self.0.guess()
    }

    fn observe(&mut self, card: u16) -> PyResult<()> {
        self.0.observe(card).map_err(to_py)
    }

    #[getter]
    fn revealed(&self) -> Vec<u16> {
        self.0.revealed().to_vec()
    }

    fn split_lengths(&self) -> Option<(usize, usize)> {
        self.0.split_lengths()
    }
}

/// Exact posterior over the next card after `k` shuffles.
#[pyclass(name = "BayesOracle", frozen)]
struct PyBayesOracle(strategy::BayesOracle);

#[pymethods]
impl PyBayesOracle {
    #[new]
    #[pyo3(signature = (n, k, *, max_n=None))]
    fn new(py: Python<'_>, n: usize, k: u32, max_n: Option<usize>) -> PyResult<Self> {
        let l = limits(max_n);
        py.detach(|| strategy::BayesOracle::new(n, k, &l)).map(Self).map_err(to_py)
    }

    /// `{card: Fraction}` for the cards that can come next.
    fn pmf<'py>(&self, py: Python<'py>, revealed: Vec<u16>) -> PyResult<Bound<'py, PyDict>> {
        let pmf = self.0.pmf(&revealed).map_err(to_py)?;
        pmf_dict(py, &pmf)
    }

    fn best_guess(&self, revealed: Vec<u16>) -> PyResult<Option<u16>> {
        let state = self.0.state_of(&revealed).map_err(to_py)?;
        Ok(self.0.best_guess(state))
    }

    fn expected_correct<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.expected_correct())
    }

    #[getter]
    fn total(&self) -> BigUint {
        self.0.total().clone()
    }
}

fn pmf_dict<'py>(py: Python<'py>, pmf: &strategy::NextCardPmf) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for e in &pmf.entries {
        d.set_item(e.card, fraction(py, &e.prob)?)?;
    }
    Ok(d)
}

/// Truncated asymptotic expansion of a moment in the deck size `n`.
#[pyclass(name = "Series", frozen)]
struct PySeries(AsymSeries);

#[pymethods]
impl PySeries {
    /// Value of the known terms at a concrete `n`.
    fn evaluate(&self, n: u64) -> f64 {
        let mut ev = Evaluator::new(256);
        let v = ev.series_at(&self.0, n);
        ev.to_f64(&v)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn is_exact(&self) -> bool {
        self.0.is_exact()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Series({})", self.0)
    }
}

/// Coefficients of `D_n(q)`, lowest degree first.
#[pyfunction]
fn d_poly(n: usize) -> Vec<BigInt> {
    genfun::d_poly(n).coeffs().to_vec()
}

/// `{"factorial", "raw", "central"}` exact moment lists up to order `r_max`.
#[pyfunction]
#[pyo3(signature = (n, r_max=4))]
fn exact_moments<'py>(py: Python<'py>, n: usize, r_max: usize) -> PyResult<Bound<'py, PyDict>> {
    let t = genfun::exact_moments(n, r_max).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("factorial", fractions(py, &t.factorial)?)?;
    d.set_item("raw", fractions(py, &t.raw)?)?;
    d.set_item("central", fractions(py, &t.central)?)?;
    Ok(d)
}

#[pyfunction]
fn exact_skewness(n: usize) -> PyResult<f64> {
    genfun::exact_skewness(n).map(|s| s.value).map_err(to_py)
}

/// `[(cards, multiplicity)]` over every order reachable with `k` shuffles.
#[pyfunction]
#[pyo3(signature = (n, k, *, max_n=None))]
fn enumerate_k_shuffles(py: Python<'_>, n: usize, k: u32, max_n: Option<usize>) -> PyResult<Vec<(Vec<u16>, BigUint)>> {
    let l = limits(max_n);
    let dist = py
        .detach(|| if k == 1 { shuffle::enumerate_one_shuffle(n, &l) } else { shuffle::enumerate_k_shuffles(n, k, &l) })
        .map_err(to_py)?;
    Ok(dist.entries().iter().map(|(p, w)| (p.cards().to_vec(), w.clone())).collect())
}

#[pyfunction]
fn sample_gsr(n: usize, k: u32, seed: u64) -> PyResult<PyPermutation> {
    shuffle::sample_gsr(n, k, seed).map(PyPermutation).map_err(to_py)
}

#[pyfunction]
fn correct_guesses_one_shuffle(deck: &PyPermutation) -> PyResult<usize> {
    strategy::correct_guesses_one_shuffle(&deck.0).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, k, revealed, *, max_n=None))]
fn bayes_next_pmf<'py>(
    py: Python<'py>,
    n: usize,
    k: u32,
    revealed: Vec<u16>,
    max_n: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let l = limits(max_n);
    let pmf = py.detach(|| strategy::bayes_next_pmf(n, k, &revealed, &l)).map_err(to_py)?;
    pmf_dict(py, &pmf)
}

/// First single-card state where the longer-pile rule loses to the Bayes
/// guess, as a dict, or `None`.
#[pyfunction]
#[pyo3(signature = (k, n_max, *, max_n=None))]
fn find_min_counterexample<'py>(
    py: Python<'py>,
    k: u32,
    n_max: usize,
    max_n: Option<usize>,
) -> PyResult<Option<Bound<'py, PyDict>>> {
    let l = limits(max_n);
    let Some(c) = py.detach(|| strategy::find_min_counterexample(k, n_max, &l)).map_err(to_py)? else {
        return Ok(None);
    };
    let d = PyDict::new(py);
    d.set_item("n", c.n)?;
    d.set_item("k", c.k)?;
    d.set_item("revealed", c.revealed.clone())?;
    d.set_item("greedy_card", c.greedy_card)?;
    d.set_item("bayes_card", c.bayes_card)?;
    d.set_item("pmf", pmf_dict(py, &c.pmf)?)?;
    Ok(Some(d))
}

#[pyfunction]
#[pyo3(signature = (n, k, *, max_n=None))]
fn expected_correct<'py>(py: Python<'py>, n: usize, k: u32, max_n: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let l = limits(max_n);
    let e = py.detach(|| strategy::expected_correct(n, k, &l)).map_err(to_py)?;
    fraction(py, &e)
}

/// Fewest shuffles bringing the expected score within `threshold` (e.g.
/// `"5%"` or `"1/20"`) of the uniform-deck score.
#[pyfunction]
#[pyo3(signature = (n, threshold, *, max_n=None))]
fn shuffles_needed(py: Python<'_>, n: usize, threshold: &str, max_n: Option<usize>) -> PyResult<u32> {
    let t = strategy::parse_threshold(threshold).map_err(to_py)?;
    let l = limits(max_n);
    py.detach(|| strategy::shuffles_needed(n, &t, &l)).map_err(to_py)
}

/// Factorial moment `E[(X)_r]` (or the central moment) as a series in `n`.
#[pyfunction]
#[pyo3(signature = (r, parity, order=asym::DEFAULT_ORDER, central=false))]
fn moment_series(r: u32, parity: &str, order: u32, central: bool) -> PyResult<PySeries> {
    let parity: Parity = parity.parse().map_err(to_py)?;
    let s = if central {
        asym::central_moment_series(r, parity, order)
    } else {
        asym::moment_series(r, parity, order)
    };
    s.map(PySeries).map_err(to_py)
}

#[pyfunction]
fn central_binomial_series(order: u32) -> PyResult<PySeries> {
    asym::central_binomial_series(order).map(PySeries).map_err(to_py)
}

#[pyfunction]
fn skewness_limit() -> PyResult<f64> {
    asym::skewness_limit().map(|s| s.value).map_err(to_py)
}

/// Histogram of correct guesses over `trials` sampled decks.
#[pyfunction]
#[pyo3(signature = (n, k, trials, seed=0, *, max_n=None))]
fn simulate(py: Python<'_>, n: usize, k: u32, trials: u64, seed: u64, max_n: Option<usize>) -> PyResult<Vec<u64>> {
    let l = limits(max_n);
    py.detach(|| mc::run_simulation(n, k, trials, seed, &l)).map(|h| h.counts).map_err(to_py)
}

#[pymodule]
pub fn cardguess_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LimitExceededError", m.py().get_type::<LimitExceededError>())?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_class::<PyPermutation>()?;
    m.add_class::<PyGuessState>()?;
    m.add_class::<PyBayesOracle>()?;
    m.add_class::<PySeries>()?;
    m.add_function(wrap_pyfunction!(d_poly, m)?)?;
    m.add_function(wrap_pyfunction!(exact_moments, m)?)?;
    m.add_function(wrap_pyfunction!(exact_skewness, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_k_shuffles, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gsr, m)?)?;
    m.add_function(wrap_pyfunction!(correct_guesses_one_shuffle, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_next_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(find_min_counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(expected_correct, m)?)?;
    m.add_function(wrap_pyfunction!(shuffles_needed, m)?)?;
    m.add_function(wrap_pyfunction!(moment_series, m)?)?;
    m.add_function(wrap_pyfunction!(central_binomial_series, m)?)?;
    m.add_function(wrap_pyfunction!(skewness_limit, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
