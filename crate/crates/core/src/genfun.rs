//! Counting generating functions for the one-shuffle game and the exact
//! moments they encode.
//!
//! `D_n(q)` counts shuffle outcomes by number of correct guesses under the
//! optimal strategy; `F(m, n; q)` is the contribution of a state with two
//! known piles of sizes `m` and `n`; `G_n(q)` collects the first-card cases.
//! Derivatives at `q = 1` are computed twice: from the materialised
//! polynomials and from the parity-split binomial sums, so each route can
//! check the other.

use std::fmt::Write as _;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{self, binom, falling, fraction_serde, fraction_string, pow2, QPoly, Rational};

/// Default depth of moment tables.
pub const DEFAULT_R_MAX: usize = 12;

/// `F(m, n; q)` in closed form; symmetric in its arguments.
pub fn f_closed(m: usize, n: usize) -> QPoly {
    let (m, n) = if m < n { (n, m) } else { (m, n) };
    let total = (m + n) as u64;
    let mut coeffs = vec![BigInt::zero(); m + n + 1];
    for i in 0..=n {
        coeffs[m + n - i] = binom(total, i as i64) - binom(total, i as i64 - 1);
    }
    QPoly::from_coeffs(coeffs)
}

/// `G_n(q) = q^n + sum_{i=0}^{n-2} F(n-1-i, i; q)`.
pub fn g_poly(n: usize) -> QPoly {
    assert!(n >= 1, "G_n is defined for n >= 1");
    let mut g = QPoly::monomial(n, BigInt::one());
    for i in 0..n.saturating_sub(1) {
        g += &f_closed(n - 1 - i, i);
    }
    g
}

static D_CACHE: RwLock<Vec<QPoly>> = RwLock::new(Vec::new());

/// `D_n(q) = q D_{n-1}(q) + G_n(q)` with `D_0 = 1`. Memoised across calls.
pub fn d_poly(n: usize) -> QPoly {
    if let Some(p) = D_CACHE.read().expect("cache lock").get(n) {
        return p.clone();
    }
    let mut cache = D_CACHE.write().expect("cache lock");
    if cache.is_empty() {
        cache.push(QPoly::one());
    }
    while cache.len() <= n {
        let i = cache.len();
        let next = &cache[i - 1].shift(1) + &g_poly(i);
        cache.push(next);
    }
    cache[n].clone()
}

/// `C(N, i) - C(N, i-1)` for `i = 0..=upto`, built incrementally.
fn ballot_row(big_n: u64, upto: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(upto + 1);
    let mut prev = BigInt::zero();
    let mut cur = BigInt::one();
    for i in 0..=upto as u64 {
        out.push(&cur - &prev);
        prev = cur.clone();
        cur = if i < big_n {
            cur * (big_n - i) / (i + 1)
        } else {
            BigInt::zero()
        };
    }
    out
}

/// `G_n^{(r)}(1)` from the parity-split binomial sums, without building
/// `G_n(q)`.
pub fn g_deriv_closed(r: u32, n: usize) -> BigInt {
    assert!(n >= 1, "G_n is defined for n >= 1");
    let k = (n / 2) as i64;
    if n.is_multiple_of(2) {
        let ballot = ballot_row(2 * k as u64 - 1, k as usize - 1);
        let sum: BigInt = (0..k)
            .map(|i| (k - i) * &ballot[i as usize] * falling(2 * k - 1 - i, r))
            .sum();
        falling(2 * k, r) - falling(2 * k - 1, r) + 2 * sum
    } else {
        // 2 (k + 1/2 - i) = 2k + 1 - 2i keeps everything integral.
        let ballot = ballot_row(2 * k as u64, k as usize);
        let sum: BigInt = (0..=k)
            .map(|i| (2 * k + 1 - 2 * i) * &ballot[i as usize] * falling(2 * k - i, r))
            .sum();
        falling(2 * k + 1, r) - falling(2 * k, r) + sum
    }
}

/// `D_n^{(j)}(1)` for `j = 0..=r_max`, via
/// `D_n^{(j)} = D_{n-1}^{(j)} + j D_{n-1}^{(j-1)} + G_n^{(j)}`.
pub fn d_deriv_column(r_max: usize, n: usize) -> Vec<BigInt> {
    let mut col: Vec<BigInt> = (0..=r_max).map(|j| if j == 0 { BigInt::one() } else { BigInt::zero() }).collect();
    for i in 1..=n {
        let prev = col.clone();
        col[0] = pow2(i as u64);
        for j in 1..=r_max {
            col[j] = &prev[j] + j * &prev[j - 1] + g_deriv_closed(j as u32, i);
        }
    }
    col
}

/// `D_n^{(r)}(1)` by the derivative recurrence, seeded with `D_n(1) = 2^n`.
pub fn d_deriv_at1(r: u32, n: usize) -> BigInt {
    d_deriv_column(r as usize, n).swap_remove(r as usize)
}

/// Factorial, raw and central moments of the number of correct guesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentTable {
    pub n: usize,
    /// `E[(X)_r]`.
    #[serde(with = "fraction_serde::vec")]
    pub factorial: Vec<Rational>,
    /// `E[X^r]`.
    #[serde(with = "fraction_serde::vec")]
    pub raw: Vec<Rational>,
    /// `E[(X - mu)^r]`.
    #[serde(with = "fraction_serde::vec")]
    pub central: Vec<Rational>,
}

impl MomentTable {
    pub fn mean(&self) -> &Rational {
        &self.factorial[1]
    }

    pub fn variance(&self) -> &Rational {
        &self.central[2]
    }
}

/// Converts factorial moments into raw and central moments.
pub fn moments_from_factorial(n: usize, factorial: Vec<Rational>) -> MomentTable {
    let r_max = factorial.len() - 1;
    let stirling = exactnum::stirling2_table(r_max);
    let raw: Vec<Rational> = stirling
        .iter()
        .map(|row| {
            row.iter()
                .zip(&factorial)
                .map(|(s, f)| Rational::from_integer(s.clone()) * f)
                .sum()
        })
        .collect();
    let mu = if r_max >= 1 { raw[1].clone() } else { Rational::zero() };
    let central = (0..=r_max)
        .map(|r| {
            let mut acc = Rational::zero();
            let mut neg_mu_pow = Rational::one();
            // j runs downward so (-mu)^{r-j} builds up incrementally.
            for j in (0..=r).rev() {
                acc += Rational::from_integer(binom(r as u64, j as i64)) * &neg_mu_pow * &raw[j];
                neg_mu_pow *= -&mu;
            }
            acc
        })
        .collect();
    MomentTable { n, factorial, raw, central }
}

/// Exact moments for a concrete deck size.
pub fn exact_moments(n: usize, r_max: usize) -> Result<MomentTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("deck size must be at least 1".into()));
    }
    let total = pow2(n as u64);
    let factorial = d_deriv_column(r_max, n)
        .into_iter()
        .map(|d| Rational::new(d, total.clone()))
        .collect();
    Ok(moments_from_factorial(n, factorial))
}

/// Skewness `m3 / m2^{3/2}` with the exact moments it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Skewness {
    pub m2: Rational,
    pub m3: Rational,
    pub value: f64,
}

pub fn exact_skewness(n: usize) -> Result<Skewness> {
    if n < 2 {
        return Err(Error::Degenerate);
    }
    let table = exact_moments(n, 3)?;
    let m2 = table.central[2].clone();
    let m3 = table.central[3].clone();
    if m2.is_zero() {
        return Err(Error::Degenerate);
    }
    let value = exactnum::rational_to_f64(&m3) / exactnum::rational_to_f64(&m2).powf(1.5);
    Ok(Skewness { m2, m3, value })
}

/// `correct_guesses,count,probability` rows for `0..=n`.
pub fn d_poly_csv(n: usize) -> String {
    let d = d_poly(n);
    let total = pow2(n as u64);
    let mut out = String::from("correct_guesses,count,probability\n");
    for i in 0..=n {
        let c = d.coeff(i);
        let p = Rational::new(c.clone(), total.clone());
        writeln!(out, "{i},{c},{}", fraction_string(&p)).expect("writing to a String");
    }
    out
}

/// True when every coefficient of `D_n` is non-negative.
pub fn d_poly_is_distribution(n: usize) -> bool {
    let d = d_poly(n);
    d.has_nonnegative_coeffs() && !d.coeffs().iter().any(|c| c.is_negative())
}
