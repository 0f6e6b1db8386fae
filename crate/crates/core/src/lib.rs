//! Exact analysis of the card-guessing game with complete feedback after
//! riffle shuffles.
//!
//! * [`exactnum`]: big-integer and rational kernels, q-polynomials.
//! * [`shuffle`]: GSR shuffle distributions, rising sequences, sampling.
//! * [`strategy`]: optimal one-shuffle play, Bayes guesses for `k` shuffles,
//!   and the shuffle-count randomness indicator.
//! * [`genfun`]: generating functions `F`, `G`, `D` and exact moments.
//! * [`asym`]: asymptotic series in half-integer powers of `n`.
//! * [`mc`]: Monte Carlo harness checked against the exact results.
//! * [`cli`]: the `cardguess` command-line surface.

pub mod asym;
pub mod cli;
pub mod error;
pub mod exactnum;
pub mod genfun;
pub mod limits;
pub mod mc;
pub mod shuffle;
pub mod strategy;

pub use error::{Error, Result};
pub use limits::Limits;
