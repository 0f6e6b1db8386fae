//! Guessing strategies and their exact evaluation.
//!
//! After one shuffle the deck is two interleaved increasing piles and the
//! optimal play is known in closed form ([`GuessState`]). After `k >= 2`
//! shuffles we condition the exact deck distribution on the revealed cards
//! and guess the most likely next card ([`BayesOracle`]).
//!
//! The weight of every completion of a revealed prefix depends only on
//! the set of revealed cards and on how many descents of the inverse
//! permutation they already force, so all conditional weights come from a
//! table indexed by (revealed set, forced descents).

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{binom, fraction_serde, fraction_string, parse_rational, Rational};
use crate::limits::Limits;
use crate::shuffle::{multiplicity_for, Permutation};

/// Hard cap for the subset table (2^n rows).
const TABLE_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Everything revealed so far is `1..next`.
    Ascending { next: u16 },
    /// The cut is known: the top pile still holds `top_next..top_end`, the
    /// bottom pile `bottom_next..=n`.
    Split { top_next: u16, top_end: u16, bottom_next: u16 },
}

/// Bookkeeping for optimal play after a single riffle shuffle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessState {
    n: usize,
    revealed: Vec<u16>,
    phase: Phase,
}

impl GuessState {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            revealed: Vec::new(),
            phase: Phase::Ascending { next: 1 },
        }
    }

    pub fn revealed(&self) -> &[u16] {
        &self.revealed
    }

    /// Lengths `(a, b)` of the top and bottom piles once the cut is known.
    pub fn split_lengths(&self) -> Option<(usize, usize)> {
        match self.phase {
            Phase::Ascending { .. } => None,
            Phase::Split { top_next, top_end, bottom_next } => Some((
                (top_end - top_next) as usize,
                self.n + 1 - bottom_next as usize,
            )),
        }
    }

    /// Head of the longer pile, the lower card on ties; `None` once the
    /// deck is exhausted.
    pub fn guess(&self) -> Option<u16> {
        if self.revealed.len() >= self.n {
            return None;
        }
        match self.phase {
            Phase::Ascending { next } => Some(next),
            Phase::Split { top_next, bottom_next, .. } => {
                let (a, b) = self.split_lengths().expect("split phase");
                Some(if a >= b && a > 0 { top_next } else { bottom_next })
            }
        }
    }

    pub fn observe(&mut self, card: u16) -> Result<()> {
        let n = self.n as u16;
        let unreachable = || Error::InvalidArgument(format!("card {card} cannot come next after one shuffle"));
        if card == 0 || card > n || self.revealed.len() >= self.n {
            return Err(unreachable());
        }
        self.phase = match self.phase {
            Phase::Ascending { next } if card == next => Phase::Ascending { next: next + 1 },
            Phase::Ascending { next } if card > next => Phase::Split {
                top_next: next,
                top_end: card,
                bottom_next: card + 1,
            },
            Phase::Split { top_next, top_end, bottom_next } if card == top_next && top_next < top_end => {
                Phase::Split { top_next: top_next + 1, top_end, bottom_next }
            }
            Phase::Split { top_next, top_end, bottom_next } if card == bottom_next && bottom_next <= n => {
                Phase::Split { top_next, top_end, bottom_next: bottom_next + 1 }
            }
            _ => return Err(unreachable()),
        };
        self.revealed.push(card);
        Ok(())
    }
}

/// Correct guesses scored by optimal one-shuffle play on `deck`.
pub fn correct_guesses_one_shuffle(deck: &Permutation) -> Result<usize> {
    let rising = deck.rising_sequences();
    if rising > 2 {
        return Err(Error::UnreachableDeck { rising });
    }
    let mut state = GuessState::new(deck.len());
    let mut correct = 0;
    for &card in deck.cards() {
        if state.guess() == Some(card) {
            correct += 1;
        }
        state.observe(card)?;
    }
    Ok(correct)
}

/// Probability that the next card heads the pile of length `a`.
pub fn next_from_split(a: usize, b: usize) -> Result<Rational> {
    if a + b == 0 {
        return Err(Error::InvalidArgument("both piles are empty".into()));
    }
    Ok(Rational::new(BigInt::from(a), BigInt::from(a + b)))
}

/// One card of a [`NextCardPmf`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmfEntry {
    pub card: u16,
    /// Total multiplicity of decks continuing with this card.
    #[serde(with = "biguint_string")]
    pub weight: BigUint,
    /// Reduced probability.
    #[serde(with = "fraction_serde")]
    pub prob: Rational,
    /// `weight/denominator_weight` before reduction.
    pub fraction: String,
}

/// Exact conditional distribution of the next card.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextCardPmf {
    pub n: usize,
    pub k: u32,
    pub revealed: Vec<u16>,
    #[serde(with = "biguint_string")]
    pub denominator_weight: BigUint,
    pub entries: Vec<PmfEntry>,
}

impl NextCardPmf {
    fn from_weights(n: usize, k: u32, revealed: Vec<u16>, weights: Vec<(u16, BigUint)>) -> Result<Self> {
        let total: BigUint = weights.iter().map(|(_, w)| w).sum();
        if total.is_zero() {
            return Err(Error::InfeasiblePrefix { n, k, prefix: revealed });
        }
        let den = BigInt::from(total.clone());
        let entries = weights
            .into_iter()
            .map(|(card, weight)| PmfEntry {
                card,
                prob: Rational::new(BigInt::from(weight.clone()), den.clone()),
                fraction: format!("{weight}/{total}"),
                weight,
            })
            .collect();
        Ok(Self {
            n,
            k,
            revealed,
            denominator_weight: total,
            entries,
        })
    }

    pub fn prob(&self, card: u16) -> Rational {
        self.entries
            .iter()
            .find(|e| e.card == card)
            .map(|e| e.prob.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Most likely card, the lowest one on ties.
    pub fn argmax(&self) -> u16 {
        let mut best: Option<&PmfEntry> = None;
        for e in &self.entries {
            if best.is_none_or(|b| e.weight > b.weight) {
                best = Some(e);
            }
        }
        best.expect("a pmf always has an entry").card
    }
}

pub(crate) mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Distribution of the first card after one shuffle.
pub fn first_card_pmf(n: usize) -> Result<NextCardPmf> {
    if n == 0 {
        return Err(Error::InvalidArgument("deck size must be at least 1".into()));
    }
    let weights = (1..=n as u16)
        .map(|m| {
            let w = if m == 1 {
                (BigUint::one() << (n - 1)) + 1u32
            } else {
                binom(n as u64 - 1, m as i64 - 1).to_biguint().expect("non-negative")
            };
            (m, w)
        })
        .collect();
    NextCardPmf::from_weights(n, 1, Vec::new(), weights)
}

/// Conditional deck weights after `k` shuffles, keyed by revealed set.
#[derive(Debug, Clone)]
pub struct BayesOracle {
    n: usize,
    k: u32,
    /// `by_m[m]` = multiplicity of a deck with `m` rising sequences.
    by_m: Vec<BigUint>,
    /// `weights[mask][d]`: total multiplicity of decks extending any prefix
    /// with revealed set `mask` that already forces `d` inverse descents.
    weights: Vec<Vec<BigUint>>,
}

/// Revealed set and forced-descent count of a prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixState {
    pub mask: u32,
    pub descents: usize,
}

impl PrefixState {
    pub const EMPTY: Self = Self { mask: 0, descents: 0 };

    pub fn contains(&self, card: u16) -> bool {
        self.mask >> (card - 1) & 1 == 1
    }

    /// Appending `card` adds an inverse descent exactly when `card + 1`
    /// already sits above it.
    pub fn push(&self, card: u16) -> Self {
        let forced = (self.mask >> card & 1) as usize;
        Self {
            mask: self.mask | 1 << (card - 1),
            descents: self.descents + forced,
        }
    }
}

impl BayesOracle {
    pub fn new(n: usize, k: u32, limits: &Limits) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("deck size must be at least 1".into()));
        }
        limits.check_k_shuffle(n)?;
        if n > TABLE_MAX_N {
            return Err(Error::LimitExceeded { what: "conditional weight table", n, limit: TABLE_MAX_N });
        }
        let by_m: Vec<BigUint> = (0..=n).map(|m| multiplicity_for(n, k, m.max(1))).collect();
        let full = (1usize << n) - 1;
        // completions[mask][d]: orderings of the missing cards that add d descents.
        let mut completions = vec![vec![0u64; n]; full + 1];
        completions[full][0] = 1;
        for mask in (0..full).rev() {
            let state = PrefixState { mask: mask as u32, descents: 0 };
            let mut row = vec![0u64; n];
            for c in 1..=n as u16 {
                if state.contains(c) {
                    continue;
                }
                let next = state.push(c);
                let child = &completions[next.mask as usize];
                for d in 0..n - next.descents {
                    row[d + next.descents] += child[d];
                }
            }
            completions[mask] = row;
        }
        let weights = completions
            .iter()
            .map(|row| {
                (0..n)
                    .map(|d0| {
                        let mut w = BigUint::zero();
                        for (extra, &count) in row.iter().enumerate() {
                            let m = 1 + d0 + extra;
                            if count != 0 && m <= n {
                                w += &by_m[m] * count;
                            }
                        }
                        w
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n, k, by_m, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Total multiplicity of all decks, `2^{kn}`.
    pub fn total(&self) -> &BigUint {
        &self.weights[0][0]
    }

    pub fn multiplicity_by_rising(&self, m: usize) -> &BigUint {
        &self.by_m[m]
    }

    /// Total multiplicity of decks extending a prefix in `state`.
    pub fn weight(&self, state: PrefixState) -> &BigUint {
        &self.weights[state.mask as usize][state.descents]
    }

    pub fn state_of(&self, revealed: &[u16]) -> Result<PrefixState> {
        let mut state = PrefixState::EMPTY;
        for &c in revealed {
            if c == 0 || c as usize > self.n || state.contains(c) {
                return Err(Error::InvalidArgument(format!(
                    "revealed cards {revealed:?} are not distinct members of 1..={}",
                    self.n
                )));
            }
            state = state.push(c);
        }
        Ok(state)
    }

    /// Weight of every unrevealed card as the next one.
    pub fn next_weights(&self, state: PrefixState) -> Vec<(u16, BigUint)> {
        (1..=self.n as u16)
            .filter(|&c| !state.contains(c))
            .map(|c| (c, self.weight(state.push(c)).clone()))
            .collect()
    }

    /// Most likely next card, lowest on ties; `None` for an infeasible
    /// or complete prefix.
    pub fn best_guess(&self, state: PrefixState) -> Option<u16> {
        let mut best: Option<(u16, &BigUint)> = None;
        for c in 1..=self.n as u16 {
            if state.contains(c) {
                continue;
            }
            let w = self.weight(state.push(c));
            if !w.is_zero() && best.is_none_or(|(_, bw)| w > bw) {
                best = Some((c, w));
            }
        }
        best.map(|(c, _)| c)
    }

    pub fn pmf(&self, revealed: &[u16]) -> Result<NextCardPmf> {
        if revealed.len() >= self.n {
            return Err(Error::InvalidArgument("no cards left to guess".into()));
        }
        let state = self.state_of(revealed)?;
        NextCardPmf::from_weights(self.n, self.k, revealed.to_vec(), self.next_weights(state))
    }

    /// Expected correct guesses under Bayes-greedy play.
    pub fn expected_correct(&self) -> Rational {
        let n = self.n;
        let full = (1usize << n) - 1;
        // reach[mask][d]: number of orderings of `mask` forcing d descents.
        let mut reach = vec![vec![0u64; n]; full + 1];
        reach[0][0] = 1;
        let mut best_total = BigUint::zero();
        for mask in 0..full {
            for d in 0..n {
                let count = reach[mask][d];
                if count == 0 {
                    continue;
                }
                let state = PrefixState { mask: mask as u32, descents: d };
                let mut best = BigUint::zero();
                for c in 1..=n as u16 {
                    if state.contains(c) {
                        continue;
                    }
                    let next = state.push(c);
                    reach[next.mask as usize][next.descents] += count;
                    let w = self.weight(next);
                    if *w > best {
                        best = w.clone();
                    }
                }
                best_total += best * count;
            }
        }
        Rational::new(BigInt::from(best_total), BigInt::from(self.total().clone()))
    }
}

/// Exact conditional distribution of the next card after `k` shuffles.
pub fn bayes_next_pmf(n: usize, k: u32, revealed: &[u16], limits: &Limits) -> Result<NextCardPmf> {
    BayesOracle::new(n, k, limits)?.pmf(revealed)
}

/// Guess from one-shuffle play for a prefix, or `None` if the prefix
/// cannot come from one shuffle.
pub fn one_shuffle_guess(n: usize, revealed: &[u16]) -> Option<u16> {
    let mut state = GuessState::new(n);
    for &c in revealed {
        state.observe(c).ok()?;
    }
    state.guess()
}

/// A state where the longer-pile rule and the Bayes guess disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n: usize,
    pub k: u32,
    pub revealed: Vec<u16>,
    pub greedy_card: u16,
    pub bayes_card: u16,
    pub pmf: NextCardPmf,
}

/// Scans decks `2..=n_max` over single-card prefixes for the first state
/// where the one-shuffle rule is not the Bayes guess.
pub fn find_min_counterexample(k: u32, n_max: usize, limits: &Limits) -> Result<Option<Counterexample>> {
    limits.check_k_shuffle(n_max)?;
    for n in 2..=n_max {
        let oracle = BayesOracle::new(n, k, limits)?;
        for c in 1..=n as u16 {
            let revealed = [c];
            let pmf = match oracle.pmf(&revealed) {
                Ok(p) => p,
                Err(Error::InfeasiblePrefix { .. }) => continue,
                Err(e) => return Err(e),
            };
            let greedy = one_shuffle_guess(n, &revealed).expect("single-card prefixes are one-shuffle states");
            let bayes = pmf.argmax();
            if greedy != bayes {
                return Ok(Some(Counterexample {
                    n,
                    k,
                    revealed: revealed.to_vec(),
                    greedy_card: greedy,
                    bayes_card: bayes,
                    pmf,
                }));
            }
        }
    }
    Ok(None)
}

/// `e_k`: expected correct guesses under per-step Bayes play after `k`
/// shuffles.
pub fn expected_correct(n: usize, k: u32, limits: &Limits) -> Result<Rational> {
    if k == 0 {
        if n == 0 {
            return Err(Error::InvalidArgument("deck size must be at least 1".into()));
        }
        return Ok(Rational::from_integer(BigInt::from(n)));
    }
    Ok(BayesOracle::new(n, k, limits)?.expected_correct())
}

/// `H_n`, the expectation for a uniformly random deck.
pub fn harmonic_expectation(n: usize) -> Rational {
    (1..=n).map(|i| Rational::new(BigInt::one(), BigInt::from(i))).sum()
}

/// One row of the randomness table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub k: u32,
    #[serde(with = "fraction_serde")]
    pub expected: Rational,
    /// `|e_k - H_n| / H_n`.
    #[serde(with = "fraction_serde")]
    pub relative_residual: Rational,
}

/// `e_0, e_1, ...` up to the first `k` whose relative residual against
/// `H_n` falls below `threshold`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub n: usize,
    #[serde(with = "fraction_serde")]
    pub threshold: Rational,
    #[serde(with = "fraction_serde")]
    pub harmonic: Rational,
    pub rows: Vec<IndicatorRow>,
    pub shuffles_needed: u32,
}

pub fn randomness_report(n: usize, threshold: &Rational, limits: &Limits) -> Result<RandomnessReport> {
    if !threshold.is_positive() {
        return Err(Error::InvalidArgument("threshold must be positive".into()));
    }
    let harmonic = harmonic_expectation(n);
    let mut rows = Vec::new();
    for k in 0..=limits.max_k {
        let expected = expected_correct(n, k, limits)?;
        let relative_residual = (&expected - &harmonic).abs() / &harmonic;
        let done = relative_residual < *threshold;
        rows.push(IndicatorRow { k, expected, relative_residual });
        if done {
            return Ok(RandomnessReport {
                n,
                threshold: threshold.clone(),
                harmonic,
                rows,
                shuffles_needed: k,
            });
        }
    }
    Err(Error::NoConvergence { k_max: limits.max_k })
}

/// Smallest `k` with `|e_k - H_n| / H_n < threshold`.
pub fn shuffles_needed(n: usize, threshold: &Rational, limits: &Limits) -> Result<u32> {
    randomness_report(n, threshold, limits).map(|r| r.shuffles_needed)
}

/// Parses a threshold such as `5%` or `1/20`.
pub fn parse_threshold(s: &str) -> Result<Rational> {
    parse_rational(s)
        .filter(|t| t.is_positive())
        .ok_or_else(|| Error::InvalidArgument(format!("bad threshold {s:?}")))
}

/// `prob` rendered as `num/den`.
pub fn render_prob(p: &Rational) -> String {
    fraction_string(p)
}
