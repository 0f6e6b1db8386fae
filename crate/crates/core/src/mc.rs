//! Monte Carlo play against sampled riffle shuffles.
//!
//! Trials run in fixed-size chunks; chunk `i` draws from its own ChaCha
//! stream, so a histogram depends only on `(n, k, trials, seed)` and not on
//! how the chunks are spread over threads.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::exactnum::{fraction_string, Rational};
use crate::limits::Limits;
use crate::shuffle::sample_gsr_with;
use crate::strategy::{correct_guesses_one_shuffle, BayesOracle, PrefixState};

const CHUNK: u64 = 1 << 14;

/// Tally of correct guesses over independent trials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub n: usize,
    pub k: u32,
    pub trials: u64,
    pub seed: u64,
    /// `counts[i]` = trials with exactly `i` correct guesses.
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_counts(n: usize, k: u32, seed: u64, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n + 1 {
            return Err(Error::InvalidArgument(format!("expected {} bins, got {}", n + 1, counts.len())));
        }
        let trials = counts.iter().sum();
        Ok(Self { n, k, trials, seed, counts })
    }

    pub fn probability(&self, value: usize) -> Rational {
        Rational::new(BigInt::from(self.counts[value]), BigInt::from(self.trials))
    }

    /// `value,count,probability` rows for `0..=n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count,probability\n");
        for (v, c) in self.counts.iter().enumerate() {
            writeln!(out, "{v},{c},{}", fraction_string(&self.probability(v))).expect("writing to a String");
        }
        out
    }
}

enum Player {
    OneShuffle,
    Bayes(BayesOracle),
}

impl Player {
    fn play(&self, deck: &[u16]) -> usize {
        match self {
            Player::OneShuffle => {
                let deck = crate::shuffle::Permutation::from_vec_unchecked(deck.to_vec());
                correct_guesses_one_shuffle(&deck).expect("sampled one-shuffle decks are reachable")
            }
            Player::Bayes(oracle) => {
                let mut state = PrefixState::EMPTY;
                let mut correct = 0;
                for &card in deck {
                    if oracle.best_guess(state) == Some(card) {
                        correct += 1;
                    }
                    state = state.push(card);
                }
                correct
            }
        }
    }
}

/// Plays `trials` sampled decks: the one-shuffle rule for `k <= 1`, per-step
/// Bayes guesses for `k >= 2`.
pub fn run_simulation(n: usize, k: u32, trials: u64, seed: u64, limits: &Limits) -> Result<Histogram> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("deck size must be at least 1".into()));
    }
    if n > u16::MAX as usize {
        return Err(Error::LimitExceeded { what: "simulated deck", n, limit: u16::MAX as usize });
    }
    let player = if k <= 1 {
        Player::OneShuffle
    } else {
        Player::Bayes(BayesOracle::new(n, k, limits)?)
    };
    let chunks = trials.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let size = CHUNK.min(trials - chunk * CHUNK);
            let mut counts = vec![0u64; n + 1];
            for _ in 0..size {
                let deck = sample_gsr_with(n, k, &mut rng);
                counts[player.play(deck.cards())] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(Histogram { n, k, trials, seed, counts })
}

/// Sample mean, unbiased variance and moment skewness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    /// `m3 / m2^{3/2}` with central sample moments; NaN when all trials agree.
    pub skewness: f64,
}

pub fn summarize(h: &Histogram) -> Result<Summary> {
    if h.trials < 2 {
        return Err(Error::InvalidArgument("summary statistics need at least two trials".into()));
    }
    let t = h.trials as f64;
    let mean = h.counts.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum::<f64>() / t;
    let central = |p: i32| {
        h.counts
            .iter()
            .enumerate()
            .map(|(v, &c)| (v as f64 - mean).powi(p) * c as f64)
            .sum::<f64>()
            / t
    };
    let m2 = central(2);
    let m3 = central(3);
    Ok(Summary {
        mean,
        variance: m2 * t / (t - 1.0),
        skewness: if m2 > 0.0 { m3 / m2.powf(1.5) } else { f64::NAN },
    })
}

/// Pearson goodness-of-fit against an exact distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Bins with zero expected probability must be empty; a hit there gives
/// `p = 0`.
pub fn chi_square(h: &Histogram, expected: &[Rational]) -> Result<ChiSquareTest> {
    if expected.len() != h.counts.len() {
        return Err(Error::InvalidArgument("expected distribution has the wrong length".into()));
    }
    let t = h.trials as f64;
    let mut statistic = 0.0;
    let mut bins = 0usize;
    for (p, &c) in expected.iter().zip(&h.counts) {
        let p = crate::exactnum::rational_to_f64(p);
        if p == 0.0 {
            if c > 0 {
                statistic = f64::INFINITY;
            }
            continue;
        }
        bins += 1;
        let e = p * t;
        statistic += (c as f64 - e).powi(2) / e;
    }
    let degrees_of_freedom = bins.saturating_sub(1);
    let p_value = if statistic.is_infinite() {
        0.0
    } else if degrees_of_freedom == 0 {
        1.0
    } else {
        ChiSquared::new(degrees_of_freedom as f64).expect("positive degrees of freedom").sf(statistic)
    };
    Ok(ChiSquareTest { statistic, degrees_of_freedom, p_value })
}

/// Exact correct-guess distribution after one shuffle.
pub fn one_shuffle_distribution(n: usize) -> Vec<Rational> {
    let d = crate::genfun::d_poly(n);
    let total = crate::exactnum::pow2(n as u64);
    (0..=n).map(|i| Rational::new(d.coeff(i).clone(), total.clone())).collect()
}
