use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn with_module(code: &str) {
    Python::attach(|py| {
        let m = PyModule::new(py, "cardguess_py").unwrap();
        cardguess_py::cardguess_py(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("cg", m).unwrap();
        let code = std::ffi::CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn generating_function_and_moments() {
    with_module(
        r#"
from fractions import Fraction
assert cg.d_poly(4) == [0, 0, 5, 6, 5]
m = cg.exact_moments(2, 2)
assert m["factorial"][1] == Fraction(7, 4)
"#,
    );
}

#[test]
fn permutations_and_strategy() {
    with_module(
        r#"
p = cg.Permutation([2, 3, 1])
assert p.rising_sequences() == 2 and p.multiplicity(2) == 10
assert cg.Permutation.identity(3).multiplicity(2) == 20
assert cg.correct_guesses_one_shuffle(cg.Permutation([1, 3, 2])) == 2
try:
    cg.Permutation([1, 1])
except ValueError:
    pass
else:
    raise AssertionError("duplicate cards accepted")
g = cg.GuessState(4)
assert g.guess() == 1
g.observe(3)
assert g.split_lengths() == (2, 1)
"#,
    );
}

#[test]
fn bayes_and_limits() {
    with_module(
        r#"
from fractions import Fraction
pmf = cg.bayes_next_pmf(10, 2, [5])
assert pmf[1] == Fraction(31752, 105336) and pmf[1] > pmf[6]
assert cg.find_min_counterexample(2, 9) is None
assert cg.expected_correct(3, 2) == Fraction(67, 32)
assert cg.shuffles_needed(2, "5%") == 3
try:
    cg.enumerate_k_shuffles(5, 2, max_n=4)
except cg.LimitExceededError:
    pass
else:
    raise AssertionError("limit not enforced")
"#,
    );
}

#[test]
fn series_and_simulation() {
    with_module(
        r#"
s = cg.moment_series(1, "odd", 5)
assert str(s).startswith("n/2 + sqrt(2n/pi) - 1/2")
assert abs(s.evaluate(151) - float(cg.exact_moments(151, 1)["factorial"][1])) < 1e-6
assert 0.48 < cg.skewness_limit() < 0.49
counts = cg.simulate(4, 1, 1000, 3)
assert sum(counts) == 1000 and counts[0] == counts[1] == 0
assert counts == cg.simulate(4, 1, 1000, 3)
"#,
    );
}
