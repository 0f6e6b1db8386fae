//! Exact arithmetic kernel: binomials, falling factorials, Bernoulli,
//! Stirling and Eulerian numbers, plus q-polynomials with big-integer
//! coefficients.
//!
//! Everything here is arbitrary precision; nothing rounds.

mod qpoly;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use qpoly::QPoly;

/// Exact fraction in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binom(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    BigInt::from(acc)
}

/// `C(top, k)` for a big `top`. Used where the upper index is `n + 2^k - m`.
pub fn binom_big(top: &BigUint, k: u64) -> BigUint {
    if BigUint::from(k) > *top {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= top - BigUint::from(i);
        acc /= i + 1;
    }
    acc
}

/// Falling factorial `a (a-1) ... (a-r+1)`; the empty product is 1.
pub fn falling(a: i64, r: u32) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..r as i64 {
        let f = a - j;
        if f == 0 {
            return BigInt::zero();
        }
        acc *= f;
    }
    acc
}

/// Falling factorial with a big base.
pub fn falling_big(a: &BigInt, r: u32) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..r {
        acc *= a - BigInt::from(j);
    }
    acc
}

/// Bernoulli numbers `B_0..=B_max` with `B_1 = -1/2`.
pub fn bernoulli_table(max: usize) -> Vec<Rational> {
    // sum_{j=0}^{m} C(m+1, j) B_j = 0
    let mut table: Vec<Rational> = Vec::with_capacity(max + 1);
    table.push(Rational::one());
    for m in 1..=max {
        let mut acc = Rational::zero();
        for (j, b) in table.iter().enumerate() {
            acc += Rational::from_integer(binom(m as u64 + 1, j as i64)) * b;
        }
        table.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    table
}

/// `B_k` with the `B_1 = -1/2` convention.
pub fn bernoulli(k: usize) -> Rational {
    if k > 1 && k % 2 == 1 {
        return Rational::zero();
    }
    bernoulli_table(k).pop().expect("table is non-empty")
}

/// Stirling numbers of the second kind, rows `0..=max`.
pub fn stirling2_table(max: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for r in 1..=max {
        let prev = &rows[r - 1];
        let mut row = vec![BigInt::zero(); r + 1];
        for i in 1..=r {
            let keep = if i < prev.len() { &prev[i] * i } else { BigInt::zero() };
            row[i] = keep + &prev[i - 1];
        }
        rows.push(row);
    }
    rows
}

/// `{r over i}`: ways to split an `r`-set into `i` non-empty blocks.
pub fn stirling2(r: usize, i: usize) -> BigInt {
    if i > r {
        return BigInt::zero();
    }
    stirling2_table(r).swap_remove(r).swap_remove(i)
}

/// Eulerian number `A(n, r)`: permutations of length `n` with `r` descents.
pub fn eulerian(n: usize, r: usize) -> BigInt {
    if r >= n.max(1) {
        return BigInt::zero();
    }
    eulerian_row(n).swap_remove(r)
}

/// The full row `A(n, 0..n)`.
pub fn eulerian_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for len in 2..=n {
        let mut next = vec![BigInt::zero(); len];
        for r in 0..len {
            let mut v = BigInt::zero();
            if r < row.len() {
                v += &row[r] * (r + 1);
            }
            if r >= 1 && r - 1 < row.len() {
                v += &row[r - 1] * (len - r);
            }
            next[r] = v;
        }
        row = next;
    }
    row
}

/// `r`-th derivative of `p` at `q = 1`, as `sum_i a_i (i)_r`.
pub fn qpoly_deriv_at1(p: &QPoly, r: u32) -> BigInt {
    p.deriv_at1(r)
}

/// Renders a rational as `num/den`, always with an explicit denominator.
pub fn fraction_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `num/den`, a bare integer, a decimal such as `0.05`, or a
/// percentage such as `5%`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some(pct) = s.strip_suffix('%') {
        return parse_rational(pct).map(|v| v / Rational::from_integer(BigInt::from(100)));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let whole: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_val: BigInt = frac.parse().ok()?;
        let mag = Rational::new(whole * &scale + frac_val, scale);
        return Some(if negative { -mag } else { mag });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Converts a big rational to the nearest `f64`, handling magnitudes that
/// overflow a plain numerator/denominator conversion.
pub fn rational_to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let num = x.numer().abs();
    let den = x.denom().clone();
    let shift = num.bits() as i64 - den.bits() as i64;
    // Scale into a 64-bit-significant quotient, then re-apply the exponent.
    let (n2, d2) = if shift > 60 {
        (num, den << (shift - 60) as usize)
    } else {
        (num << (60 - shift) as usize, den)
    };
    let q: BigInt = n2 / d2;
    let mant = num_traits::ToPrimitive::to_f64(&q).unwrap_or(f64::NAN);
    let v = mant * 2f64.powi((shift - 60) as i32);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// `2^e` as a big integer.
pub fn pow2(e: u64) -> BigInt {
    BigInt::one() << e as usize
}



/// Serde adapter writing a [`Rational`] as a `"num/den"` string.
pub mod fraction_serde {
    use super::{fraction_string, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fraction_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).ok_or_else(|| serde::de::Error::custom(format!("bad fraction {raw:?}")))
    }

    /// The same adapter for sequences.
    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&fraction_string(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .into_iter()
                .map(|raw| {
                    parse_rational(&raw)
                        .ok_or_else(|| serde::de::Error::custom(format!("bad fraction {raw:?}")))
                })
                .collect()
        }
    }
}
