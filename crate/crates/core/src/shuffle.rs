//! Gilbert-Shannon-Reeds riffle shuffles: exact deck distributions after one
//! or `k` shuffles, rising sequences, and seeded sampling.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::binom_big;
use crate::limits::Limits;

/// A deck ordering, top card first. Cards are `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u16>", into = "Vec<u16>")]
pub struct Permutation(Box<[u16]>);

impl Permutation {
    pub fn new(cards: Vec<u16>) -> Result<Self> {
        let n = cards.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty deck".into()));
        }
        let mut seen = vec![false; n + 1];
        for &c in &cards {
            let c = c as usize;
            if c == 0 || c > n || seen[c] {
                return Err(Error::InvalidPermutation(format!(
                    "{cards:?} is not a permutation of 1..={n}"
                )));
            }
            seen[c] = true;
        }
        Ok(Self(cards.into_boxed_slice()))
    }

    /// Caller guarantees `cards` is a bijection on `1..=len`.
    pub(crate) fn from_vec_unchecked(cards: Vec<u16>) -> Self {
        debug_assert!(Self::new(cards.clone()).is_ok());
        Self(cards.into_boxed_slice())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_vec_unchecked((1..=n as u16).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn cards(&self) -> &[u16] {
        &self.0
    }

    /// `inverse[c - 1]` is the (1-based) position of card `c`.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u16; self.len()];
        for (pos, &c) in self.0.iter().enumerate() {
            inv[c as usize - 1] = pos as u16 + 1;
        }
        Self::from_vec_unchecked(inv)
    }

    pub fn descents(&self) -> usize {
        self.0.windows(2).filter(|w| w[0] > w[1]).count()
    }

    /// Number of rising sequences, i.e. `1 + descents(inverse)`.
    pub fn rising_sequences(&self) -> usize {
        let mut pos = vec![0usize; self.len() + 1];
        for (i, &c) in self.0.iter().enumerate() {
            pos[c as usize] = i;
        }
        1 + (1..self.len()).filter(|&v| pos[v + 1] < pos[v]).count()
    }
}

impl TryFrom<Vec<u16>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<u16>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<u16> {
    fn from(p: Permutation) -> Self {
        p.0.into_vec()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Number of rising sequences of `p`.
pub fn rising_sequences(p: &Permutation) -> usize {
    p.rising_sequences()
}

/// The inverse permutation split into its maximal ascending runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseRuns {
    pub inverse: Permutation,
    /// Index into `inverse` where each run starts; the first entry is 0.
    pub run_starts: Vec<usize>,
}

impl InverseRuns {
    pub fn runs(&self) -> Vec<&[u16]> {
        let cards = self.inverse.cards();
        let mut out = Vec::with_capacity(self.run_starts.len());
        for (i, &start) in self.run_starts.iter().enumerate() {
            let end = self.run_starts.get(i + 1).copied().unwrap_or(cards.len());
            out.push(&cards[start..end]);
        }
        out
    }
}

pub fn inverse_and_runs(p: &Permutation) -> InverseRuns {
    let inverse = p.inverse();
    let mut run_starts = vec![0];
    for (i, w) in inverse.cards().windows(2).enumerate() {
        if w[0] > w[1] {
            run_starts.push(i + 1);
        }
    }
    InverseRuns { inverse, run_starts }
}

/// `C(n + 2^k - m, n)` for a deck of `n` cards with `m` rising sequences,
/// zero when `m > 2^k`.
pub fn multiplicity_for(n: usize, k: u32, m: usize) -> BigUint {
    let x = BigUint::one() << k as usize;
    let m = BigUint::from(m);
    if m > x {
        return BigUint::zero();
    }
    binom_big(&(x + BigUint::from(n) - m), n as u64)
}

/// Number of `k`-shuffle histories that produce `p`.
pub fn multiplicity(p: &Permutation, k: u32) -> BigUint {
    multiplicity_for(p.len(), k, p.rising_sequences())
}

/// Exact distribution of the deck after `k` shuffles: every reachable
/// permutation with its integer multiplicity. Entries are sorted
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeckDistribution {
    pub n: usize,
    pub k: u32,
    entries: Vec<(Permutation, BigUint)>,
    total: BigUint,
}

impl DeckDistribution {
    fn from_entries(n: usize, k: u32, mut entries: Vec<(Permutation, BigUint)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let total = entries.iter().map(|(_, m)| m).sum();
        Self { n, k, entries, total }
    }

    pub fn entries(&self) -> &[(Permutation, BigUint)] {
        &self.entries
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, p: &Permutation) -> Option<&BigUint> {
        self.entries
            .binary_search_by(|(q, _)| q.cmp(p))
            .ok()
            .map(|i| &self.entries[i].1)
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionJson {
    n: usize,
    k: u32,
    total: String,
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    perm: Permutation,
    mult: String,
}

impl Serialize for DeckDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistributionJson {
            n: self.n,
            k: self.k,
            total: self.total.to_string(),
            entries: self
                .entries
                .iter()
                .map(|(p, m)| EntryJson {
                    perm: p.clone(),
                    mult: m.to_string(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DeckDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DistributionJson::deserialize(d)?;
        let mut entries = Vec::with_capacity(raw.entries.len());
        for e in raw.entries {
            let m: BigUint = e.mult.parse().map_err(D::Error::custom)?;
            entries.push((e.perm, m));
        }
        let dist = Self::from_entries(raw.n, raw.k, entries);
        let total: BigUint = raw.total.parse().map_err(D::Error::custom)?;
        if total != dist.total {
            return Err(D::Error::custom("total does not match the entries"));
        }
        Ok(dist)
    }
}

/// Interleaves the top `t` cards of `deck` with the rest: the cards of the
/// top pile go to the positions whose bit is set in `mask`.
fn interleave_by_mask(deck: &[u16], mask: u64) -> Vec<u16> {
    let t = mask.count_ones() as usize;
    let (mut top, mut bottom) = (0, t);
    (0..deck.len())
        .map(|pos| {
            if mask >> pos & 1 == 1 {
                top += 1;
                deck[top - 1]
            } else {
                bottom += 1;
                deck[bottom - 1]
            }
        })
        .collect()
}

/// Every cut `t` and every interleaving of `[1..t]` with `[t+1..n]`,
/// tallied by resulting deck.
pub fn enumerate_one_shuffle(n: usize, limits: &Limits) -> Result<DeckDistribution> {
    if n == 0 {
        return Err(Error::InvalidArgument("deck size must be at least 1".into()));
    }
    limits.check_one_shuffle(n)?;
    if n > 40 {
        return Err(Error::LimitExceeded {
            what: "one-shuffle enumeration",
            n,
            limit: 40,
        });
    }
    let identity: Vec<u16> = (1..=n as u16).collect();
    let mut counts: HashMap<Vec<u16>, u64> = HashMap::new();
    // Each mask picks the positions of the top pile, which fixes both the
    // cut (its popcount) and the interleaving.
    for mask in 0..(1u64 << n) {
        *counts.entry(interleave_by_mask(&identity, mask)).or_default() += 1;
    }
    let entries = counts
        .into_iter()
        .map(|(p, c)| (Permutation::from_vec_unchecked(p), BigUint::from(c)))
        .collect();
    Ok(DeckDistribution::from_entries(n, 1, entries))
}

/// Advances `a` to the next permutation in lexicographic order.
pub(crate) fn next_permutation(a: &mut [u16]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Walks `S_n` and weights each permutation by its `k`-shuffle
/// multiplicity; zero-weight permutations are dropped.
pub fn enumerate_k_shuffles(n: usize, k: u32, limits: &Limits) -> Result<DeckDistribution> {
    if n == 0 {
        return Err(Error::InvalidArgument("deck size must be at least 1".into()));
    }
    limits.check_k_shuffle(n)?;
    let by_m: Vec<BigUint> = (0..=n).map(|m| multiplicity_for(n, k, m.max(1))).collect();
    let mut cards: Vec<u16> = (1..=n as u16).collect();
    let mut entries = Vec::new();
    loop {
        let p = Permutation::from_vec_unchecked(cards.clone());
        let mult = &by_m[p.rising_sequences()];
        if !mult.is_zero() {
            entries.push((p, mult.clone()));
        }
        if !next_permutation(&mut cards) {
            break;
        }
    }
    // Already lexicographic; from_entries re-sorts cheaply.
    Ok(DeckDistribution::from_entries(n, k, entries))
}

/// `(2^{kn}, sum_m A(n, m-1) C(n + 2^k - m, n))`.
pub fn worpitzky_total(n: usize, k: u32) -> (BigUint, BigUint) {
    let lhs = BigUint::one() << (k as usize * n);
    let row = crate::exactnum::eulerian_row(n);
    let rhs = row
        .iter()
        .enumerate()
        .map(|(r, a)| a.to_biguint().expect("Eulerian numbers are non-negative") * multiplicity_for(n, k, r + 1))
        .sum();
    (lhs, rhs)
}

/// One GSR riffle shuffle of `deck` in place: binomial cut, then cards
/// dropped from a pile with probability proportional to its size.
pub fn riffle<R: Rng + ?Sized>(deck: &mut Vec<u16>, rng: &mut R) {
    let n = deck.len();
    let t = Binomial::new(n as u64, 0.5).expect("p = 1/2 is valid").sample(rng) as usize;
    let mut out = Vec::with_capacity(n);
    let (mut top, mut bottom) = (0usize, t);
    while out.len() < n {
        let a = t - top;
        let b = n - bottom;
        if rng.random_range(0..a + b) < a {
            out.push(deck[top]);
            top += 1;
        } else {
            out.push(deck[bottom]);
            bottom += 1;
        }
    }
    *deck = out;
}

/// `k` riffle shuffles of `1..=n` driven by `rng`.
pub fn sample_gsr_with<R: Rng + ?Sized>(n: usize, k: u32, rng: &mut R) -> Permutation {
    let mut deck: Vec<u16> = (1..=n as u16).collect();
    for _ in 0..k {
        riffle(&mut deck, rng);
    }
    Permutation::from_vec_unchecked(deck)
}

/// Seeded sample of the deck after `k` GSR shuffles.
pub fn sample_gsr(n: usize, k: u32, seed: u64) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::InvalidArgument("deck size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_gsr_with(n, k, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use std::collections::BTreeMap;

    fn perm(c: &[u16]) -> Permutation {
        Permutation::new(c.to_vec()).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    /// Composes all 2^{kn} mask sequences directly.
    fn compose_oracle(n: usize, k: u32) -> BTreeMap<Permutation, BigUint> {
        let mut decks: Vec<Vec<u16>> = vec![(1..=n as u16).collect()];
        for _ in 0..k {
            let mut next = Vec::with_capacity(decks.len() << n);
            for d in &decks {
                for mask in 0..(1u64 << n) {
                    next.push(interleave_by_mask(d, mask));
                }
            }
            decks = next;
        }
        let mut out = BTreeMap::new();
        for d in decks {
            *out.entry(perm(&d)).or_insert_with(BigUint::zero) += 1u32;
        }
        out
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![2, 1, 3]).is_ok());
    }

    #[test]
    fn one_shuffle_small_decks() {
        let lim = Limits::default();
        let d1 = enumerate_one_shuffle(1, &lim).unwrap();
        assert_eq!(d1.entries(), &[(perm(&[1]), big(2))]);

        let d2 = enumerate_one_shuffle(2, &lim).unwrap();
        assert_eq!(d2.entries(), &[(perm(&[1, 2]), big(3)), (perm(&[2, 1]), big(1))]);

        let d3 = enumerate_one_shuffle(3, &lim).unwrap();
        assert_eq!(d3.get(&perm(&[1, 2, 3])), Some(&big(4)));
        for p in [[1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2]] {
            assert_eq!(d3.get(&perm(&p)), Some(&big(1)));
        }
        assert_eq!(d3.get(&perm(&[3, 2, 1])), None);
        assert_eq!(d3.len(), 5);
        assert_eq!(*d3.total(), big(8));
    }

    #[test]
    fn one_shuffle_structure() {
        let lim = Limits::default();
        for n in 1..=12usize {
            let d = enumerate_one_shuffle(n, &lim).unwrap();
            assert_eq!(*d.total(), BigUint::one() << n);
            assert_eq!(d.get(&Permutation::identity(n)), Some(&big(n as u64 + 1)));
            // 2^n - n - 1 permutations with two rising sequences, each once.
            assert_eq!(d.len(), (1usize << n) - n);
            for (p, m) in d.entries() {
                if p.rising_sequences() == 2 {
                    assert_eq!(*m, big(1));
                }
            }
        }
    }

    #[test]
    fn one_shuffle_limit() {
        let lim = Limits { one_shuffle_max_n: 5, ..Limits::default() };
        assert!(matches!(enumerate_one_shuffle(6, &lim), Err(Error::LimitExceeded { .. })));
    }

    #[test]
    fn rising_sequence_examples() {
        assert_eq!(rising_sequences(&Permutation::identity(10)), 1);
        assert_eq!(rising_sequences(&perm(&[5, 3, 4, 6, 1, 7, 2, 8, 9, 10])), 3);
        assert_eq!(rising_sequences(&perm(&[3, 2, 1])), 3);
    }

    #[test]
    fn inverse_runs_examples() {
        let r = inverse_and_runs(&perm(&[5, 3, 4, 6, 1, 7, 2, 8, 9, 10]));
        assert_eq!(r.inverse, perm(&[5, 7, 2, 3, 1, 4, 6, 8, 9, 10]));
        assert_eq!(r.runs(), vec![&[5, 7][..], &[2, 3][..], &[1, 4, 6, 8, 9, 10][..]]);

        let r = inverse_and_runs(&Permutation::identity(4));
        assert_eq!(r.inverse, Permutation::identity(4));
        assert_eq!(r.runs().len(), 1);

        let r = inverse_and_runs(&perm(&[2, 1]));
        assert_eq!(r.inverse, perm(&[2, 1]));
        assert_eq!(r.runs().len(), 2);
    }

    #[test]
    fn rising_sequences_equal_inverse_runs_exhaustive() {
        for n in 1..=7usize {
            let mut cards: Vec<u16> = (1..=n as u16).collect();
            loop {
                let p = perm(&cards);
                let runs = inverse_and_runs(&p);
                assert_eq!(p.rising_sequences(), 1 + runs.inverse.descents());
                assert_eq!(p.rising_sequences(), runs.runs().len());
                if !next_permutation(&mut cards) {
                    break;
                }
            }
        }
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(&perm(&[1, 2, 3]), 2), big(20));
        assert_eq!(multiplicity(&perm(&[3, 2, 1]), 2), big(4));
        assert_eq!(multiplicity(&perm(&[3, 2, 1]), 1), big(0));
        assert_eq!(multiplicity(&perm(&[1, 3, 2]), 2), big(10));
    }

    #[test]
    fn k_shuffle_example() {
        let d = enumerate_k_shuffles(3, 2, &Limits::default()).unwrap();
        assert_eq!(d.get(&perm(&[1, 2, 3])), Some(&big(20)));
        for p in [[1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2]] {
            assert_eq!(d.get(&perm(&p)), Some(&big(10)));
        }
        assert_eq!(d.get(&perm(&[3, 2, 1])), Some(&big(4)));
        assert_eq!(*d.total(), big(64));
        assert_eq!(*enumerate_k_shuffles(4, 2, &Limits::default()).unwrap().total(), big(256));
    }

    #[test]
    fn k_shuffle_totals() {
        for n in 1..=8usize {
            for k in 0..=3u32 {
                let d = enumerate_k_shuffles(n, k, &Limits::default()).unwrap();
                assert_eq!(*d.total(), BigUint::one() << (k as usize * n), "n={n} k={k}");
                assert!(d.entries().iter().all(|(_, m)| !m.is_zero()));
            }
        }
    }

    #[test]
    fn k_equals_one_matches_interleaving_enumeration() {
        let lim = Limits::default();
        for n in 1..=10usize {
            let a = enumerate_one_shuffle(n, &lim).unwrap();
            let b = enumerate_k_shuffles(n, 1, &lim).unwrap();
            assert_eq!(a, b, "n = {n}");
        }
    }

    #[test]
    fn k_shuffle_formula_matches_composition() {
        for (n, k) in [(2, 2), (3, 2), (4, 2), (5, 2), (6, 2), (3, 3), (4, 3)] {
            let oracle = compose_oracle(n, k);
            let d = enumerate_k_shuffles(n, k, &Limits::default()).unwrap();
            let got: BTreeMap<_, _> = d.entries().iter().cloned().collect();
            assert_eq!(got, oracle, "n={n} k={k}");
        }
    }

    #[test]
    fn positive_multiplicity_iff_few_rising_sequences() {
        for n in 1..=6usize {
            let mut cards: Vec<u16> = (1..=n as u16).collect();
            loop {
                let p = perm(&cards);
                for k in 0..=3u32 {
                    let positive = !multiplicity(&p, k).is_zero();
                    assert_eq!(positive, p.rising_sequences() <= 1 << k);
                }
                if !next_permutation(&mut cards) {
                    break;
                }
            }
        }
    }

    #[test]
    fn k_shuffle_limit() {
        let lim = Limits { k_shuffle_max_n: 6, ..Limits::default() };
        assert!(matches!(enumerate_k_shuffles(7, 1, &lim), Err(Error::LimitExceeded { .. })));
    }

    #[test]
    fn worpitzky_examples() {
        assert_eq!(worpitzky_total(3, 2), (big(64), big(64)));
        assert_eq!(worpitzky_total(2, 1), (big(4), big(4)));
        assert_eq!(worpitzky_total(5, 0), (big(1), big(1)));
        for n in 1..=12 {
            for k in 0..=5 {
                let (l, r) = worpitzky_total(n, k);
                assert_eq!(l, r);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let a = sample_gsr(12, 3, 99).unwrap();
        let b = sample_gsr(12, 3, 99).unwrap();
        assert_eq!(a, b);
        let mut cards = a.cards().to_vec();
        cards.sort_unstable();
        assert_eq!(cards, (1..=12).collect::<Vec<u16>>());
        assert_eq!(sample_gsr(5, 0, 1).unwrap(), Permutation::identity(5));
    }

    #[test]
    fn sampled_two_card_identity_rate() {
        let trials = 100_000u64;
        let hits = (0..trials)
            .filter(|&s| sample_gsr(2, 1, s).unwrap() == Permutation::identity(2))
            .count() as f64;
        let p = 0.75;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits / trials as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn sampled_four_card_deck_matches_exact_distribution() {
        let exact = enumerate_one_shuffle(4, &Limits::default()).unwrap();
        let trials = 1_000_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts: HashMap<Permutation, u64> = HashMap::new();
        for _ in 0..trials {
            *counts.entry(sample_gsr_with(4, 1, &mut rng)).or_default() += 1;
        }
        assert_eq!(counts.len(), exact.len());
        let total = 16.0;
        let stat: f64 = exact
            .entries()
            .iter()
            .map(|(p, m)| {
                let expected = trials as f64 * num_traits::ToPrimitive::to_f64(m).unwrap() / total;
                let observed = *counts.get(p).unwrap_or(&0) as f64;
                (observed - expected).powi(2) / expected
            })
            .sum();
        let dof = exact.len() as f64 - 1.0;
        let chi = statrs::distribution::ChiSquared::new(dof).unwrap();
        let p_value = 1.0 - statrs::distribution::ContinuousCDF::cdf(&chi, stat);
        assert!(p_value > 0.001, "chi2 = {stat}, p = {p_value}");
    }

    #[test]
    fn distribution_json_round_trip() {
        let d = enumerate_k_shuffles(3, 2, &Limits::default()).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.starts_with(r#"{"n":3,"k":2,"total":"64","entries":[{"perm":[1,2,3],"mult":"20"}"#));
        let back: DeckDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
