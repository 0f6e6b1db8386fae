use crate::error::{Error, Result};

/// Environment variable overriding the default k-shuffle enumeration limit.
pub const ENV_MAX_N: &str = "CARDGUESS_MAX_N";

/// Budgets for exhaustive computations. Exceeding one is an error, never a
/// silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest deck for the interleaving enumeration of a single shuffle.
    pub one_shuffle_max_n: usize,
    /// Largest deck for anything that walks the permutations of `1..=n`.
    pub k_shuffle_max_n: usize,
    /// Largest shuffle count tried when searching for convergence.
    pub max_k: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            one_shuffle_max_n: 20,
            k_shuffle_max_n: 10,
            max_k: 64,
        }
    }
}

impl Limits {
    /// Defaults, with `k_shuffle_max_n` taken from `CARDGUESS_MAX_N` if set.
    pub fn from_env() -> Self {
        let mut limits = Self::default();
        if let Some(n) = std::env::var(ENV_MAX_N).ok().and_then(|v| v.trim().parse().ok()) {
            limits.k_shuffle_max_n = n;
        }
        limits
    }

    pub(crate) fn check_one_shuffle(&self, n: usize) -> Result<()> {
        if n > self.one_shuffle_max_n {
            return Err(Error::LimitExceeded {
                what: "one-shuffle enumeration",
                n,
                limit: self.one_shuffle_max_n,
            });
        }
        Ok(())
    }

    pub(crate) fn check_k_shuffle(&self, n: usize) -> Result<()> {
        if n > self.k_shuffle_max_n {
            return Err(Error::LimitExceeded {
                what: "k-shuffle enumeration",
                n,
                limit: self.k_shuffle_max_n,
            });
        }
        Ok(())
    }
}
