//! Asymptotic series for the moments of the number of correct guesses.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::numeric::Evaluator;
use super::recurrence::{central_binomial_series, solve_parity_step2};
use super::series::{AsymSeries, Parity, Prefactor};
use super::symcoeff::SymCoeff;
use crate::error::{Error, Result};
use crate::exactnum::{binom, pow2, stirling2_table, Rational};
use crate::genfun::g_deriv_closed;

/// Largest moment order served by default.
pub const DEFAULT_MAX_R: u32 = 4;

/// Default truncation order.
pub const DEFAULT_ORDER: u32 = 8;

/// `G_n^{(r)}(1) = A(k) 4^k + B(k) C(2k, k) + C(k)` with `k = floor(n/2)`
/// and polynomial `A`, `B`, `C` (coefficients low degree first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GClosedForm {
    pub r: u32,
    pub parity: Parity,
    pub four_pow: Vec<Rational>,
    pub central: Vec<Rational>,
    pub polynomial: Vec<Rational>,
}

fn n_of(k: u64, parity: Parity) -> usize {
    match parity {
        Parity::Even => 2 * k as usize,
        Parity::Odd => 2 * k as usize + 1,
    }
}

fn eval_poly(c: &[Rational], k: u64) -> Rational {
    let x = Rational::from_integer(BigInt::from(k));
    c.iter().rev().fold(Rational::zero(), |acc, a| acc * &x + a)
}

impl GClosedForm {
    pub fn eval(&self, k: u64) -> Rational {
        eval_poly(&self.four_pow, k) * Rational::from_integer(pow2(2 * k))
            + eval_poly(&self.central, k) * Rational::from_integer(binom(2 * k, k as i64))
            + eval_poly(&self.polynomial, k)
    }
}

/// Gaussian elimination over the rationals; `None` if singular.
#[allow(clippy::needless_range_loop)]
fn solve_linear(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let size = rhs.len();
    for col in 0..size {
        let pivot = (col..size).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = Rational::one() / &m[col][col];
        for c in col..size {
            m[col][c] = &m[col][c] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..size {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..size {
                let sub = &f * &m[col][c];
                m[r][c] -= sub;
            }
            let sub = &f * &rhs[col];
            rhs[r] -= sub;
        }
    }
    Some(rhs)
}

static G_FORMS: Mutex<Vec<((u32, Parity), GClosedForm)>> = Mutex::new(Vec::new());

/// Closed form of `G_n^{(r)}(1)` for one parity, found by fitting the
/// three-polynomial shape to exact values and confirming it on further
/// deck sizes.
pub fn g_closed_form(r: u32, parity: Parity) -> Result<GClosedForm> {
    if let Some((_, f)) = G_FORMS.lock().expect("cache lock").iter().find(|(key, _)| *key == (r, parity)) {
        return Ok(f.clone());
    }
    let deg = r as usize + 2;
    let unknowns = 3 * (deg + 1);
    let extra = 8;
    let row = |k: u64| -> Vec<Rational> {
        let four = Rational::from_integer(pow2(2 * k));
        let cb = Rational::from_integer(binom(2 * k, k as i64));
        let mut out = Vec::with_capacity(unknowns);
        for base in [four, cb, Rational::one()] {
            let mut kp = Rational::one();
            for _ in 0..=deg {
                out.push(&base * &kp);
                kp *= Rational::from_integer(BigInt::from(k));
            }
        }
        out
    };
    let value = |k: u64| Rational::from_integer(g_deriv_closed(r, n_of(k, parity)));
    for k0 in 1..=4u64 {
        let ks: Vec<u64> = (k0..k0 + unknowns as u64).collect();
        let Some(sol) = solve_linear(ks.iter().map(|&k| row(k)).collect(), ks.iter().map(|&k| value(k)).collect())
        else {
            continue;
        };
        let form = GClosedForm {
            r,
            parity,
            four_pow: sol[..=deg].to_vec(),
            central: sol[deg + 1..2 * (deg + 1)].to_vec(),
            polynomial: sol[2 * (deg + 1)..].to_vec(),
        };
        let last = k0 + (unknowns + extra) as u64;
        if (k0..last).all(|k| form.eval(k) == value(k)) {
            G_FORMS.lock().expect("cache lock").push(((r, parity), form.clone()));
            return Ok(form);
        }
    }
    Err(Error::InconsistentSystem(format!("no closed form of the expected shape for r = {r}")))
}

/// `C(n, n/2)` for even `n` as `2^n sqrt(2/pi) n^{-1/2} S(n/2)`.
fn central_binomial_in_n(floor: i32) -> Result<AsymSeries> {
    let order = (1 - floor).max(0) as u32 / 2 + 1;
    let s = central_binomial_series(order)?.rescale_pow2(-1);
    let lead = AsymSeries::monomial(Prefactor::Pow2, -1, SymCoeff::sqrt_2_over_pi());
    Ok(lead.mul(&s)?.truncate(floor))
}

/// `sum_d c_d (n/2)^d`.
fn poly_in_half_n(c: &[Rational], prefactor: Prefactor) -> AsymSeries {
    let halved: Vec<Rational> = c
        .iter()
        .enumerate()
        .map(|(d, x)| x / Rational::from_integer(pow2(d as u64)))
        .collect();
    AsymSeries::polynomial(prefactor, &halved)
}

/// `G_n^{(r)}(1)` as a `2^n` series valid for deck sizes of `parity`.
pub fn g_series(r: u32, parity: Parity, floor: i32) -> Result<AsymSeries> {
    let form = g_closed_form(r, parity)?;
    let deg = form.central.len() as i32;
    // Written in m = 2k: 4^k = 2^m and C(2k, k) = C(m, m/2).
    let cb = central_binomial_in_n(floor - 2 * deg - 2)?;
    let in_m = poly_in_half_n(&form.four_pow, Prefactor::Pow2)
        .add(&poly_in_half_n(&form.central, Prefactor::One).mul(&cb)?)?
        .truncate(floor);
    let mut out = match parity {
        Parity::Even => in_m,
        Parity::Odd => in_m.shift(1, floor),
    };
    if form.polynomial.iter().any(|c| !c.is_zero()) {
        out = out.mark_remainder_dropped();
    }
    Ok(out)
}

/// `D_n^{(r)}(1)` as `2^n` series for both parities, orders `0..=r_max`.
fn derivative_chain(r_max: u32, k: u32) -> Result<Vec<[AsymSeries; 2]>> {
    let floor = -2 * k as i32;
    let idx = |p: Parity| match p {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let base = AsymSeries::monomial(Prefactor::Pow2, 0, SymCoeff::one());
    let mut chain = vec![[base.clone(), base]];
    for r in 1..=r_max {
        let g = [g_series(r, Parity::Even, floor)?, g_series(r, Parity::Odd, floor)?];
        let prev = &chain[r as usize - 1];
        let mut next = Vec::with_capacity(2);
        for parity in [Parity::Even, Parity::Odd] {
            let (same, opp) = (idx(parity), idx(parity.flip()));
            // D_n - D_{n-2} = r (D'_{n-1} + D'_{n-2}) + G_n + G_{n-1}.
            let lower = prev[opp].shift(1, floor).add(&prev[same].shift(2, floor))?;
            let rhs = lower
                .scale_rational(&Rational::from_integer(BigInt::from(r)))
                .add(&g[same])?
                .add(&g[opp].shift(1, floor))?;
            next.push(solve_parity_step2(&rhs, parity, k)?);
        }
        chain.push([next[0].clone(), next[1].clone()]);
    }
    Ok(chain)
}

fn check_r(r: u32) -> Result<()> {
    if r == 0 || r > DEFAULT_MAX_R {
        return Err(Error::InvalidArgument(format!("moment order must be in 1..={DEFAULT_MAX_R}, got {r}")));
    }
    Ok(())
}

/// Retries with extra working depth until the result is known to order `K`.
fn to_order<F>(k: u32, mut build: F) -> Result<AsymSeries>
where
    F: FnMut(u32) -> Result<AsymSeries>,
{
    let target = -2 * k as i32;
    for extra in [2u32, 6, 12] {
        let s = build(k + extra)?.truncate(target);
        if s.floor() == Some(target) {
            return Ok(s);
        }
    }
    Err(Error::InconsistentSystem(format!("could not reach order {k}")))
}

/// Factorial moments `E[(X)_i]`, `i = 0..=r`, at working order `k`.
fn factorial_series(r: u32, parity: Parity, k: u32) -> Result<Vec<AsymSeries>> {
    let slot = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    Ok(derivative_chain(r, k)?
        .into_iter()
        .map(|pair| pair[slot].clone().with_prefactor(Prefactor::One))
        .collect())
}

/// `E[(X)_r] = D_n^{(r)}(1) / 2^n` for deck sizes of `parity`, to order `K`.
pub fn moment_series(r: u32, parity: Parity, k: u32) -> Result<AsymSeries> {
    check_r(r)?;
    to_order(k, |work| Ok(factorial_series(r, parity, work)?.swap_remove(r as usize)))
}

/// `E[(X - mu)^r]` for deck sizes of `parity`, to order `K`.
pub fn central_moment_series(r: u32, parity: Parity, k: u32) -> Result<AsymSeries> {
    check_r(r)?;
    to_order(k, |work| {
        let factorial = factorial_series(r, parity, work + r)?;
        let stirling = stirling2_table(r as usize);
        let raw: Vec<AsymSeries> = (0..=r as usize)
            .map(|j| {
                (0..=j).try_fold(AsymSeries::zero(Prefactor::One), |acc, i| {
                    acc.add(&factorial[i].scale_rational(&Rational::from_integer(stirling[j][i].clone())))
                })
            })
            .collect::<Result<_>>()?;
        let neg_mu = raw[1].neg();
        let mut acc = AsymSeries::zero(Prefactor::One);
        for (j, raw_j) in raw.iter().enumerate() {
            let c = Rational::from_integer(binom(r as u64, j as i64));
            let term = neg_mu.pow(r - j as u32)?.mul(raw_j)?.scale_rational(&c);
            acc = acc.add(&term)?;
        }
        Ok(acc)
    })
}

/// Limit of the skewness `m3 / m2^{3/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewnessLimit {
    /// Coefficient of `n^{3/2}` in `E[(X - mu)^3]`.
    #[serde(with = "sym_string")]
    pub numerator: SymCoeff,
    /// Coefficient of `n` in `E[(X - mu)^2]`.
    #[serde(with = "sym_string")]
    pub denominator_base: SymCoeff,
    pub value: f64,
}

mod sym_string {
    use super::SymCoeff;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &SymCoeff, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(_d: D) -> Result<SymCoeff, D::Error> {
        let _ = String::deserialize(_d)?;
        Err(serde::de::Error::custom("symbolic constants are output only"))
    }
}

static SKEW: Mutex<Option<SkewnessLimit>> = Mutex::new(None);

pub fn skewness_limit() -> Result<SkewnessLimit> {
    if let Some(s) = SKEW.lock().expect("cache lock").clone() {
        return Ok(s);
    }
    let m2 = central_moment_series(2, Parity::Even, 1)?;
    let m3 = central_moment_series(3, Parity::Even, 1)?;
    let numerator = m3.coeff(3);
    let denominator_base = m2.coeff(2);
    let mut ev = Evaluator::new(128);
    let num = ev.sym(&numerator);
    let base = ev.sym(&denominator_base);
    let den = ev.sqrt(&base).mul(&base, ev.bits(), astro_float::RoundingMode::ToEven);
    let ratio = num.div(&den, ev.bits(), astro_float::RoundingMode::ToEven);
    let value = ev.to_f64(&ratio);
    let out = SkewnessLimit { numerator, denominator_base, value };
    *SKEW.lock().expect("cache lock") = Some(out.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{d_deriv_at1, exact_moments};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn s2p() -> SymCoeff {
        SymCoeff::sqrt_2_over_pi()
    }

    fn q(n: i64, d: i64) -> SymCoeff {
        SymCoeff::frac(n, d)
    }

    #[test]
    fn first_derivative_closed_form() {
        let even = g_closed_form(1, Parity::Even).unwrap();
        assert_eq!(even.four_pow[..2], [r(-1, 2), r(1, 2)]);
        assert_eq!(even.central[..2], [r(0, 1), r(1, 1)]);
        assert_eq!(even.polynomial[0], r(1, 1));
        let odd = g_closed_form(1, Parity::Odd).unwrap();
        assert_eq!(odd.four_pow[..2], [r(-1, 2), r(1, 1)]);
        assert_eq!(odd.central[..2], [r(1, 2), r(2, 1)]);
    }

    #[test]
    fn closed_forms_reproduce_exact_values() {
        for r in 1..=DEFAULT_MAX_R {
            for parity in [Parity::Even, Parity::Odd] {
                let f = g_closed_form(r, parity).unwrap();
                for k in 0..40u64 {
                    if n_of(k, parity) == 0 {
                        continue;
                    }
                    assert_eq!(
                        f.eval(k),
                        Rational::from_integer(g_deriv_closed(r, n_of(k, parity))),
                        "r={r} {parity:?} k={k}"
                    );
                }
            }
        }
    }

    fn tail(s: &AsymSeries, from: i32, count: i32) -> Vec<Rational> {
        (0..count).map(|i| s.coeff(from - 2 * i).coeff(1, 1)).collect()
    }

    #[test]
    fn first_moment() {
        let odd = moment_series(1, Parity::Odd, 5).unwrap();
        assert_eq!(odd.coeff(2), q(1, 2));
        assert_eq!(odd.coeff(1), s2p());
        assert_eq!(odd.coeff(0), q(-1, 2));
        assert_eq!(
            tail(&odd, -1, 5),
            [r(-3, 4), r(-53, 96), r(-443, 384), r(-75949, 18432), r(-4621519, 221184)]
        );
        let even = moment_series(1, Parity::Even, 5).unwrap();
        assert_eq!(
            tail(&even, -1, 5),
            [r(-3, 4), r(-49, 96), r(-439, 384), r(-76709, 18432), r(-4628519, 221184)]
        );
        assert!(odd.remainder_dropped());
        assert_eq!(odd.order(), Some(r(5, 1)));
    }

    #[test]
    fn second_factorial_moment() {
        for (parity, t) in [
            (Parity::Odd, [r(-11, 4), r(-5, 96), r(-1753, 1152), r(-13733, 2048)]),
            (Parity::Even, [r(-11, 4), r(-1, 96), r(-1901, 1152), r(-13917, 2048)]),
        ] {
            let s = moment_series(2, parity, 5).unwrap();
            assert_eq!(s.coeff(4), q(1, 4));
            assert_eq!(s.coeff(3), s2p());
            assert_eq!(s.coeff(2), q(-1, 4));
            assert_eq!(tail(&s, 1, 4), t);
        }
    }

    #[test]
    fn third_factorial_moment() {
        for (parity, t) in [
            (Parity::Odd, [r(763, 128), r(-2681, 1536), r(-443239, 73728)]),
            (Parity::Even, [r(767, 128), r(-3085, 1536), r(-413903, 73728)]),
        ] {
            let s = moment_series(3, parity, 4).unwrap();
            assert_eq!(s.coeff(6), q(1, 8));
            assert_eq!(s.coeff(5), s2p().scale(&r(3, 4)));
            assert_eq!(s.coeff(3), s2p().scale(&r(-65, 16)));
            assert_eq!(s.coeff(2), q(-13, 8));
            assert_eq!(tail(&s, 1, 3), t);
        }
    }

    #[test]
    fn variance_even() {
        let m2 = central_moment_series(2, Parity::Even, 2).unwrap();
        assert_eq!(m2.coeff(2), &q(3, 4) + &SymCoeff::inv_pi().scale(&r(-2, 1)));
        assert_eq!(m2.coeff(0), &q(-3, 4) + &SymCoeff::inv_pi().scale(&r(3, 1)));
        assert_eq!(m2.coeff(-1), s2p().scale(&r(-1, 1)));
        assert_eq!(m2.coeff(-2).coeff(0, 2), r(11, 12));
        assert!(m2.coeff(1).is_zero());
    }

    #[test]
    fn third_central_moment_even() {
        let m3 = central_moment_series(3, Parity::Even, 1).unwrap();
        let inv_pi = SymCoeff::inv_pi();
        let bracket = |rat: Rational, pi_part: Rational| &(&s2p() * &SymCoeff::rational(rat)) + &(&s2p() * &inv_pi.scale(&pi_part));
        assert_eq!(m3.coeff(3), bracket(r(-5, 4), r(4, 1)));
        assert_eq!(m3.coeff(1), bracket(r(43, 16), r(-9, 1)));
        let constant = &(&s2p() * &SymCoeff::sqrt_2pi().scale(&r(-3, 4))) + &(&s2p() * &s2p().scale(&r(3, 1)));
        assert_eq!(m3.coeff(0), constant);
        assert_eq!(m3.coeff(-1), bracket(r(-241, 128), r(5, 8)));
    }

    #[test]
    fn first_central_moment_vanishes() {
        for parity in [Parity::Even, Parity::Odd] {
            let m1 = central_moment_series(1, parity, 6).unwrap();
            assert!(m1.is_zero());
        }
    }

    #[test]
    fn skewness_limit_value() {
        let s = skewness_limit().unwrap();
        assert_eq!(s.numerator, &s2p() * &(&SymCoeff::inv_pi().scale(&r(4, 1)) + &q(-5, 4)));
        assert_eq!(s.denominator_base, &q(3, 4) + &SymCoeff::inv_pi().scale(&r(-2, 1)));
        let pi = std::f64::consts::PI;
        let expected = (4.0 / pi - 1.25) * (2.0 / pi).sqrt() / (0.75 - 2.0 / pi).powf(1.5);
        assert!((s.value - expected).abs() < 1e-12);
        assert!((s.value - 0.486).abs() < 1e-3);
        // Odd decks share the leading behaviour.
        let m3 = central_moment_series(3, Parity::Odd, 1).unwrap();
        assert_eq!(m3.coeff(3), s.numerator);
    }

    #[test]
    fn recurrence_cancels_for_first_derivative() {
        for parity in [Parity::Odd, Parity::Even] {
            let k = 8;
            let floor = -2 * k as i32;
            let chain = derivative_chain(1, k).unwrap();
            let (same, opp) = match parity {
                Parity::Even => (0, 1),
                Parity::Odd => (1, 0),
            };
            let d = &chain[1][same];
            let rhs = chain[0][opp]
                .shift(1, floor)
                .add(&chain[0][same].shift(2, floor))
                .unwrap()
                .add(&g_series(1, parity, floor).unwrap())
                .unwrap()
                .add(&g_series(1, parity.flip(), floor).unwrap().shift(1, floor))
                .unwrap();
            let residual = d.sub(&d.shift(2, floor)).unwrap().sub(&rhs).unwrap();
            assert!(residual.is_zero(), "{residual}");
        }
    }

    #[test]
    fn odd_first_derivative_display() {
        // (n-1) 2^{n-1} + 2^n sqrt(2n/pi) (1 - 3/(4n) - ...).
        let chain = derivative_chain(1, 6).unwrap();
        let d = &chain[1][1];
        assert_eq!(d.coeff(2), q(1, 2));
        assert_eq!(d.coeff(0), q(-1, 2));
        assert_eq!(d.coeff(1), s2p());
        assert_eq!(d.coeff(-1), s2p().scale(&r(-3, 4)));
    }

    fn relative_error_at(n: u64, s: &AsymSeries, exact: &Rational) -> f64 {
        let mut ev = Evaluator::new(256);
        let v = ev.series_at(s, n);
        ev.relative_error(&v, exact)
    }

    #[test]
    fn first_moment_converges_to_exact() {
        let n = 151u64;
        let exact = Rational::new(d_deriv_at1(1, n as usize), pow2(n));
        let errs: Vec<f64> = [3u32, 6, 9]
            .iter()
            .map(|&k| relative_error_at(n, &moment_series(1, Parity::Odd, k).unwrap(), &exact))
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-6);
    }

    #[test]
    fn variance_series_matches_exact_variance() {
        let exact = exact_moments(200, 2).unwrap().central[2].clone();
        let s = central_moment_series(2, Parity::Even, 4).unwrap();
        assert!(relative_error_at(200, &s, &exact) < 0.01);
    }

    #[test]
    fn order_limits() {
        assert!(moment_series(0, Parity::Odd, 3).is_err());
        assert!(moment_series(DEFAULT_MAX_R + 1, Parity::Odd, 3).is_err());
    }
}
