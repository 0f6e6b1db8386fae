use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::symcoeff::SymCoeff;
use crate::error::{Error, Result};
use crate::exactnum::{fraction_string, parse_rational, Rational};

/// Optional exponential factor in front of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prefactor {
    One,
    /// `2^n`.
    Pow2,
}

/// Parity of the deck size a series is valid for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(n: u64) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            _ => Err(Error::InvalidArgument(format!("parity must be odd or even, got {s:?}"))),
        }
    }
}

/// Truncated series `prefactor * sum_p c_p n^{p/2}` with exact constant
/// coefficients.
///
/// `floor` is the lowest half-power known exactly: everything below it
/// has been discarded. `None` means the series is exact (a finite sum).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymSeries {
    prefactor: Prefactor,
    terms: BTreeMap<i32, SymCoeff>,
    floor: Option<i32>,
    remainder_dropped: bool,
}

fn max_floor(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl AsymSeries {
    pub fn zero(prefactor: Prefactor) -> Self {
        Self {
            prefactor,
            terms: BTreeMap::new(),
            floor: None,
            remainder_dropped: false,
        }
    }

    /// `c n^{p/2}`, exact.
    pub fn monomial(prefactor: Prefactor, p: i32, c: SymCoeff) -> Self {
        let mut s = Self::zero(prefactor);
        s.add_term(p, c);
        s
    }

    pub fn constant(c: SymCoeff) -> Self {
        Self::monomial(Prefactor::One, 0, c)
    }

    /// `sum_d coeffs[d] n^d`, exact.
    pub fn polynomial(prefactor: Prefactor, coeffs: &[Rational]) -> Self {
        let mut s = Self::zero(prefactor);
        for (d, c) in coeffs.iter().enumerate() {
            s.add_term(2 * d as i32, SymCoeff::rational(c.clone()));
        }
        s
    }

    /// Builds a series from `(half_power, coefficient)` pairs.
    pub fn from_terms<I>(prefactor: Prefactor, terms: I, floor: Option<i32>) -> Self
    where
        I: IntoIterator<Item = (i32, SymCoeff)>,
    {
        let mut s = Self::zero(prefactor);
        for (p, c) in terms {
            s.add_term(p, c);
        }
        s.truncate_opt(floor);
        s
    }

    fn add_term(&mut self, p: i32, c: SymCoeff) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(p).or_default();
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn prefactor(&self) -> Prefactor {
        self.prefactor
    }

    /// Same coefficients under another prefactor, e.g. after dividing by `2^n`.
    pub fn with_prefactor(mut self, prefactor: Prefactor) -> Self {
        self.prefactor = prefactor;
        self
    }

    pub fn floor(&self) -> Option<i32> {
        self.floor
    }

    /// Truncation order `K`: terms below `n^{-K}` are unknown.
    pub fn order(&self) -> Option<Rational> {
        self.floor.map(|f| Rational::new(BigInt::from(-f), BigInt::from(2)))
    }

    pub fn is_exact(&self) -> bool {
        self.floor.is_none()
    }

    /// True when a part exponentially smaller than the prefactor was dropped.
    pub fn remainder_dropped(&self) -> bool {
        self.remainder_dropped
    }

    pub fn mark_remainder_dropped(mut self) -> Self {
        self.remainder_dropped = true;
        self
    }

    /// `(half_power, coefficient)` in decreasing powers.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &SymCoeff)> {
        self.terms.iter().rev().map(|(p, c)| (*p, c))
    }

    pub fn coeff(&self, p: i32) -> SymCoeff {
        self.terms.get(&p).cloned().unwrap_or_default()
    }

    /// Highest half-power with a nonzero coefficient.
    pub fn top(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Bound on the half-power of the whole series, known part or not.
    fn magnitude(&self) -> Option<i32> {
        match (self.top(), self.floor) {
            (Some(t), Some(f)) => Some(t.max(f - 1)),
            (Some(t), None) => Some(t),
            (None, Some(f)) => Some(f - 1),
            (None, None) => None,
        }
    }

    fn truncate_opt(&mut self, floor: Option<i32>) {
        self.floor = max_floor(self.floor, floor);
        if let Some(f) = self.floor {
            self.terms = self.terms.split_off(&f);
        }
    }

    /// Discards every term below `n^{floor/2}`.
    pub fn truncate(mut self, floor: i32) -> Self {
        self.truncate_opt(Some(floor));
        self
    }

    /// Truncates to order `K`, i.e. half-power floor `-2K`.
    pub fn truncate_order(self, k: u32) -> Self {
        self.truncate(-2 * k as i32)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.prefactor != other.prefactor {
            return Err(Error::PrefactorMismatch);
        }
        let mut out = self.clone();
        for (p, c) in other.terms() {
            out.add_term(p, c.clone());
        }
        out.remainder_dropped |= other.remainder_dropped;
        out.truncate_opt(other.floor);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&SymCoeff::integer(-1))
    }

    pub fn scale(&self, c: &SymCoeff) -> Self {
        let mut out = Self {
            terms: BTreeMap::new(),
            ..self.clone()
        };
        for (p, x) in self.terms() {
            out.add_term(p, x * c);
        }
        out
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        self.scale(&SymCoeff::rational(c.clone()))
    }

    /// Product; precision is limited by the coarser factor.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let prefactor = match (self.prefactor, other.prefactor) {
            (Prefactor::Pow2, Prefactor::Pow2) => return Err(Error::UnrepresentableProduct),
            (Prefactor::One, p) | (p, Prefactor::One) => p,
        };
        let exact_zero = |s: &Self| s.is_zero() && s.is_exact();
        if exact_zero(self) || exact_zero(other) {
            return Ok(Self::zero(prefactor));
        }
        let bound = |f: Option<i32>, m: Option<i32>| match (f, m) {
            (Some(f), Some(m)) => Some(f + m),
            _ => None,
        };
        let floor = max_floor(bound(self.floor, other.magnitude()), bound(other.floor, self.magnitude()));
        let mut out = Self::zero(prefactor);
        for (p, a) in self.terms() {
            for (q, b) in other.terms() {
                if floor.is_none_or(|f| p + q >= f) {
                    out.add_term(p + q, a * b);
                }
            }
        }
        out.remainder_dropped = self.remainder_dropped || other.remainder_dropped;
        out.truncate_opt(floor);
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut out = Self::constant(SymCoeff::one());
        if e > 0 && self.prefactor == Prefactor::Pow2 {
            if e > 1 {
                return Err(Error::UnrepresentableProduct);
            }
            return Ok(self.clone());
        }
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// The series of `f(n - c)` as a function of `n`, expanded down to
    /// `floor`. Each `n^{p/2}` becomes `n^{p/2} (1 - c/n)^{p/2}`; a `2^n`
    /// prefactor contributes `2^{-c}`.
    pub fn shift(&self, c: i64, floor: i32) -> Self {
        let polynomial = self.is_exact() && self.terms.keys().all(|&p| p >= 0 && p % 2 == 0);
        let mut out = Self {
            terms: BTreeMap::new(),
            ..self.clone()
        };
        let cr = Rational::from_integer(BigInt::from(c));
        let pre = match self.prefactor {
            Prefactor::One => Rational::one(),
            Prefactor::Pow2 => pow2_rational(-c),
        };
        for (p, x) in self.terms() {
            let s = Rational::new(BigInt::from(p), BigInt::from(2));
            let mut binom = Rational::one();
            let mut neg_c_pow = Rational::one();
            let mut i = 0i32;
            while p - 2 * i >= floor || (polynomial && p - 2 * i >= 0) {
                if binom.is_zero() {
                    break;
                }
                out.add_term(p - 2 * i, x.scale(&(&binom * &neg_c_pow * &pre)));
                binom = binom * (&s - Rational::from_integer(BigInt::from(i))) / Rational::from_integer(BigInt::from(i + 1));
                neg_c_pow *= -&cr;
                i += 1;
            }
        }
        if !polynomial {
            out.truncate_opt(Some(floor));
        }
        out
    }

    /// The series of `f(2^e n)`.
    pub fn rescale_pow2(&self, e: i32) -> Self {
        assert!(self.prefactor == Prefactor::One, "rescaling changes a 2^n prefactor");
        let mut out = Self {
            terms: BTreeMap::new(),
            ..self.clone()
        };
        for (p, x) in self.terms() {
            out.add_term(p, x * &SymCoeff::term(e * p, 0, Rational::one()));
        }
        out
    }

    /// `exp(self)` for a series that decays, down to `floor`.
    pub fn exp(&self, floor: i32) -> Result<Self> {
        if self.prefactor != Prefactor::One || self.top().is_some_and(|t| t >= 0) {
            return Err(Error::ShapeMismatch("exp needs a decaying series without prefactor".into()));
        }
        let mut out = Self::constant(SymCoeff::one());
        let mut power = Self::constant(SymCoeff::one());
        let mut j = 1u32;
        while let Some(t) = self.top() {
            power = power.mul(self)?.truncate(floor);
            if power.is_zero() || t * (j as i32) < floor {
                break;
            }
            let fact: BigInt = (1..=j).map(BigInt::from).product();
            out = out.add(&power.scale_rational(&Rational::new(BigInt::one(), fact)))?;
            j += 1;
        }
        Ok(out.truncate(floor))
    }

    /// `(half_power, coefficient)` of the rational part, convenient for tests.
    pub fn rational_coeffs(&self) -> Vec<(i32, Rational)> {
        self.terms()
            .filter_map(|(p, c)| c.as_rational().map(|r| (p, r)))
            .collect()
    }

    pub fn json_terms(&self) -> Vec<TermJson> {
        let mut out = Vec::new();
        for (p, c) in self.terms() {
            for (a, b, x) in c.iter() {
                out.push(TermJson {
                    pow2: a,
                    pow_inv_pi: b,
                    n_half_pow: p,
                    coef: fraction_string(x),
                });
            }
        }
        out
    }
}

pub(crate) fn pow2_rational(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

impl fmt::Display for AsymSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::series(self))
    }
}

/// One term `coef * 2^{pow2/2} * pi^{-powInvPi/2} * n^{nHalfPow/2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TermJson {
    pub pow2: i32,
    pub pow_inv_pi: i32,
    pub n_half_pow: i32,
    pub coef: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SeriesJson {
    prefactor: String,
    floor_half_pow: Option<i32>,
    remainder_dropped: bool,
    terms: Vec<TermJson>,
}

impl Serialize for AsymSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            prefactor: match self.prefactor {
                Prefactor::One => "1".into(),
                Prefactor::Pow2 => "2^n".into(),
            },
            floor_half_pow: self.floor,
            remainder_dropped: self.remainder_dropped,
            terms: self.json_terms(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AsymSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SeriesJson::deserialize(d)?;
        let prefactor = match raw.prefactor.as_str() {
            "1" => Prefactor::One,
            "2^n" => Prefactor::Pow2,
            other => return Err(D::Error::custom(format!("unknown prefactor {other:?}"))),
        };
        let mut terms = Vec::new();
        for t in raw.terms {
            let c = parse_rational(&t.coef).ok_or_else(|| D::Error::custom(format!("bad coefficient {:?}", t.coef)))?;
            terms.push((t.n_half_pow, SymCoeff::term(t.pow2, t.pow_inv_pi, c)));
        }
        let mut s = AsymSeries::from_terms(prefactor, terms, raw.floor_half_pow);
        s.remainder_dropped = raw.remainder_dropped;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn q(n: i64, d: i64) -> SymCoeff {
        SymCoeff::frac(n, d)
    }

    #[test]
    fn adding_zero() {
        let s = AsymSeries::from_terms(Prefactor::One, [(2, q(1, 2)), (1, SymCoeff::sqrt_2_over_pi())], Some(-4));
        assert_eq!(s.add(&AsymSeries::zero(Prefactor::One)).unwrap(), s);
    }

    #[test]
    fn half_powers_cancel() {
        let a = AsymSeries::monomial(Prefactor::One, 1, SymCoeff::one());
        let b = AsymSeries::monomial(Prefactor::One, -1, SymCoeff::one());
        assert_eq!(a.mul(&b).unwrap(), AsymSeries::constant(SymCoeff::one()));
    }

    #[test]
    fn difference_of_squares() {
        let a = AsymSeries::from_terms(Prefactor::One, [(0, q(1, 1)), (-2, q(-1, 8))], Some(-8));
        let b = AsymSeries::from_terms(Prefactor::One, [(0, q(1, 1)), (-2, q(1, 8))], Some(-8));
        let p = a.mul(&b).unwrap();
        assert_eq!(p.rational_coeffs(), vec![(0, r(1, 1)), (-4, r(-1, 64))]);
        assert_eq!(p.order(), Some(r(4, 1)));
    }

    #[test]
    fn prefactor_rules() {
        let two_n = AsymSeries::monomial(Prefactor::Pow2, 0, SymCoeff::one());
        let one = AsymSeries::constant(SymCoeff::one());
        assert!(matches!(two_n.add(&one), Err(Error::PrefactorMismatch)));
        assert!(matches!(two_n.mul(&two_n), Err(Error::UnrepresentableProduct)));
        assert_eq!(two_n.mul(&one).unwrap(), two_n);
    }

    #[test]
    fn precision_tracks_leading_powers() {
        // (n + O(1/n)) * (n + O(1/n)) is only known down to n^0.
        let a = AsymSeries::from_terms(Prefactor::One, [(2, q(1, 1))], Some(-1));
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.floor(), Some(1));
        assert_eq!(sq.rational_coeffs(), vec![(4, r(1, 1))]);
    }

    #[test]
    fn shift_of_polynomial_is_exact() {
        // (n - 1)^2 = n^2 - 2n + 1.
        let s = AsymSeries::polynomial(Prefactor::One, &[r(0, 1), r(0, 1), r(1, 1)]).shift(1, -10);
        assert!(s.is_exact());
        assert_eq!(s.rational_coeffs(), vec![(4, r(1, 1)), (2, r(-2, 1)), (0, r(1, 1))]);
    }

    #[test]
    fn shift_of_half_power() {
        // sqrt(n - 2) = sqrt(n) (1 - 1/n - 1/(2n^2) - ...).
        let s = AsymSeries::monomial(Prefactor::One, 1, SymCoeff::one()).shift(2, -5);
        assert_eq!(s.rational_coeffs(), vec![(1, r(1, 1)), (-1, r(-1, 1)), (-3, r(-1, 2)), (-5, r(-1, 2))]);
        let two_n = AsymSeries::monomial(Prefactor::Pow2, 0, SymCoeff::one()).shift(2, -5);
        assert_eq!(two_n.rational_coeffs(), vec![(0, r(1, 4))]);
    }

    #[test]
    fn shift_round_trip() {
        let s = AsymSeries::from_terms(
            Prefactor::One,
            [(3, q(2, 1)), (1, SymCoeff::sqrt_2_over_pi()), (-2, q(5, 7))],
            Some(-12),
        );
        let back = s.shift(3, -12).shift(-3, -12);
        assert_eq!(back, s);
    }

    #[test]
    fn rescale() {
        // f(n) = 1/n, f(n/2) = 2/n.
        let s = AsymSeries::monomial(Prefactor::One, -2, SymCoeff::one()).rescale_pow2(-1);
        assert_eq!(s.rational_coeffs(), vec![(-2, r(2, 1))]);
    }

    #[test]
    fn exponential() {
        // exp(1/n) = 1 + 1/n + 1/(2n^2) + 1/(6n^3).
        let x = AsymSeries::monomial(Prefactor::One, -2, SymCoeff::one());
        let e = x.exp(-6).unwrap();
        assert_eq!(e.rational_coeffs(), vec![(0, r(1, 1)), (-2, r(1, 1)), (-4, r(1, 2)), (-6, r(1, 6))]);
    }

    #[test]
    fn json_round_trip() {
        let s = AsymSeries::from_terms(
            Prefactor::One,
            [(2, q(1, 2)), (1, SymCoeff::sqrt_2_over_pi()), (-2, SymCoeff::inv_pi().scale(&r(11, 12)))],
            Some(-4),
        )
        .mark_remainder_dropped();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains(r#"{"pow2":1,"powInvPi":1,"nHalfPow":1,"coef":"1/1"}"#));
        let back: AsymSeries = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
