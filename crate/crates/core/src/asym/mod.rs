//! Truncated asymptotic series in half-integer powers of `n` with exact
//! coefficients in `Q[sqrt 2, pi^{1/2}, pi^{-1/2}]`, and the moment
//! expansions built from them.

mod moments;
mod numeric;
mod recurrence;
mod render;
mod series;
mod symcoeff;

pub use moments::{
    central_moment_series, g_closed_form, g_series, moment_series, skewness_limit, GClosedForm, SkewnessLimit,
    DEFAULT_MAX_R, DEFAULT_ORDER,
};
pub use numeric::Evaluator;
pub use recurrence::{
    central_binomial_series, log_factorial_series, series_from_two_term_recurrence, solve_parity_step2, Leading,
};
pub use series::{AsymSeries, Parity, Prefactor, TermJson};
pub use symcoeff::SymCoeff;
