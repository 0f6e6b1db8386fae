//! Stirling-type expansions and series solutions of linear recurrences.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::series::{AsymSeries, Parity, Prefactor};
use super::symcoeff::SymCoeff;
use crate::error::{Error, Result};
use crate::exactnum::{bernoulli, Rational};

/// `ln n! - (n ln n - n + ln(2 pi n)/2)` as
/// `sum_{i=1}^{floor(K/2)+1} B_{2i} / (2i (2i-1) n^{2i-1})`.
pub fn log_factorial_series(k: u32) -> Result<AsymSeries> {
    if k < 1 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let last = k as i32 / 2 + 1;
    let terms = (1..=last).map(|i| {
        let c = bernoulli(2 * i as usize) / Rational::from_integer(BigInt::from(2 * i * (2 * i - 1)));
        (-2 * (2 * i - 1), SymCoeff::rational(c))
    });
    // The next term sits at n^{-(2 last + 1)}; everything above it is known.
    Ok(AsymSeries::from_terms(Prefactor::One, terms, Some(-2 * (2 * last + 1) + 1)))
}

/// `C(2n, n) sqrt(pi n) / 4^n = 1 - 1/(8n) + 1/(128 n^2) + ...` to order `K`.
pub fn central_binomial_series(k: u32) -> Result<AsymSeries> {
    let floor = -2 * k as i32;
    if k == 0 {
        return Ok(AsymSeries::constant(SymCoeff::one()).truncate(0));
    }
    // ln C(2n,n) + ln sqrt(pi n) - n ln 4 = L(2n) - 2 L(n).
    let l = log_factorial_series(k)?;
    let exponent = l.rescale_pow2(1).sub(&l.scale_rational(&Rational::from_integer(2.into())))?;
    exponent.exp(floor)
}

/// Leading behaviour `ratio^n n^exponent` of a recurrence solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leading {
    pub ratio: Rational,
    pub exponent: Rational,
}

/// Truncated power series in `x = 1/n`.
fn x_poly(coeffs_in_n: &[i64], deg: usize, len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (d, &c) in coeffs_in_n.iter().enumerate() {
        if deg - d < len {
            out[deg - d] = Rational::from_integer(BigInt::from(c));
        }
    }
    out
}

/// `(1 + x)^s` to `len` terms.
fn binomial_series(s: &Rational, len: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(len);
    let mut c = Rational::one();
    for i in 0..len {
        out.push(c.clone());
        c = c * (s - Rational::from_integer(BigInt::from(i))) / Rational::from_integer(BigInt::from(i + 1));
    }
    out
}

fn mul_trunc(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let len = a.len().min(b.len());
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Solves `p0(n) f(n) + p1(n) f(n+1) = 0` with the ansatz
/// `f(n) = ratio^n n^exponent (1 + a_1/n + a_2/n^2 + ...)` and returns the
/// bracket to order `K`.
///
/// Polynomials are given low degree first. Powers of `1/n` are collected
/// after expanding `(n+1)^{exponent-j}`, and each order is required to
/// cancel; the unknown `a_j` enter triangularly.
pub fn series_from_two_term_recurrence(p0: &[i64], p1: &[i64], leading: &Leading, k: u32) -> Result<AsymSeries> {
    let deg = p0.len().max(p1.len()).saturating_sub(1);
    let k = k as usize;
    // a_K is fixed a few orders after K appears; leave room for that.
    let orders = k + deg + 3;
    let p0x = x_poly(p0, deg, orders);
    let p1x: Vec<Rational> = x_poly(p1, deg, orders).into_iter().map(|c| c * &leading.ratio).collect();
    // c[j] = coefficients of x^j [P0(x) + ratio P1(x) (1+x)^{exponent-j}].
    let coeff_of: Vec<Vec<Rational>> = (0..orders)
        .map(|j| {
            let s = &leading.exponent - Rational::from_integer(BigInt::from(j));
            let shifted = mul_trunc(&p1x, &binomial_series(&s, orders));
            p0x.iter().zip(shifted).map(|(a, b)| a + b).collect()
        })
        .collect();
    let mut a: Vec<Option<Rational>> = vec![None; orders];
    a[0] = Some(Rational::one());
    for t in 0..orders {
        let mut residual = Rational::zero();
        let mut unknown: Vec<(usize, Rational)> = Vec::new();
        for j in 0..=t {
            let c = &coeff_of[j][t - j];
            if c.is_zero() {
                continue;
            }
            match &a[j] {
                Some(v) => residual += c * v,
                None => unknown.push((j, c.clone())),
            }
        }
        match unknown.as_slice() {
            [] if !residual.is_zero() => {
                return Err(Error::InconsistentSystem(format!(
                    "order {t} leaves residual {residual}; the supplied leading behaviour is wrong"
                )))
            }
            [] => {}
            [(j, c)] => a[*j] = Some(-residual / c),
            _ => {
                return Err(Error::InconsistentSystem(format!(
                    "order {t} couples {} unknown coefficients",
                    unknown.len()
                )))
            }
        }
        if a[..=k].iter().all(Option::is_some) {
            break;
        }
    }
    let mut terms = Vec::new();
    for (j, v) in a.iter().enumerate().take(k + 1) {
        let v = v.clone().ok_or_else(|| {
            Error::InconsistentSystem(format!("coefficient a_{j} is never determined"))
        })?;
        terms.push((-2 * j as i32, SymCoeff::rational(v)));
    }
    Ok(AsymSeries::from_terms(Prefactor::One, terms, Some(-2 * k as i32)))
}

/// Solves `f(n) - f(n-2) = rhs(n)` by undetermined coefficients.
///
/// With `rhs = 2^n h(n)` and `f = 2^n g(n)` this is
/// `g(n) - g(n-2)/4 = h(n)`. An ansatz with the same top power as `h`
/// cancels the leading term (its coefficient divides by `3/4`); repeating
/// on the residual covers both the `(an + b) 2^n` and the
/// `2^n (a_0 sqrt(n) + a_1/sqrt(n) + ...)` shapes. A right-hand side with
/// no `2^n` factor must be a polynomial; it is dropped and flagged, being
/// exponentially small next to the `2^n` part. The homogeneous solution
/// (a constant per parity) is dropped for the same reason, so `parity`
/// only labels the result.
pub fn solve_parity_step2(rhs: &AsymSeries, _parity: Parity, k: u32) -> Result<AsymSeries> {
    let floor = -2 * k as i32;
    match rhs.prefactor() {
        Prefactor::One => {
            let polynomial = rhs.is_exact() && rhs.terms().all(|(p, _)| p >= 0 && p % 2 == 0);
            if !polynomial {
                return Err(Error::ShapeMismatch(
                    "right-hand side without a 2^n factor must be a polynomial in n".into(),
                ));
            }
            Ok(AsymSeries::zero(Prefactor::Pow2).truncate(floor).mark_remainder_dropped())
        }
        Prefactor::Pow2 => {
            let three_quarters = Rational::new(3.into(), 4.into());
            let quarter = Rational::new(1.into(), 4.into());
            let mut solution = AsymSeries::zero(Prefactor::One);
            let mut residual = rhs.clone().with_prefactor(Prefactor::One).truncate(floor);
            while let Some(p) = residual.top() {
                let c = residual.coeff(p).scale(&(Rational::one() / &three_quarters));
                let term = AsymSeries::monomial(Prefactor::One, p, c);
                let applied = term.sub(&term.shift(2, floor).scale_rational(&quarter))?;
                residual = residual.sub(&applied)?;
                solution = solution.add(&term)?;
            }
            let mut out = solution.with_prefactor(Prefactor::Pow2);
            out = out.truncate(residual.floor().unwrap_or(floor).max(floor));
            if rhs.remainder_dropped() {
                out = out.mark_remainder_dropped();
            }
            Ok(out)
        }
    }
}
