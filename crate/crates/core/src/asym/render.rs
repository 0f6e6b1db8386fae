//! Human-readable rendering of constants and series.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::series::{AsymSeries, Prefactor};
use crate::exactnum::Rational;

fn power(base: &str, e: i32) -> String {
    if e == 1 {
        base.to_string()
    } else {
        format!("{base}^{e}")
    }
}

/// Splits a half-exponent into its square-root part and an integer power.
fn split_half(e: i32) -> (i32, i32) {
    let odd = e.rem_euclid(2);
    (e.signum() * odd, (e - e.signum() * odd) / 2)
}

fn join_tokens(tokens: &[String]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        let after_digit = out.chars().last().is_some_and(|c| c.is_ascii_digit());
        if i > 0 && !after_digit {
            out.push(' ');
        }
        out.push_str(t);
    }
    out
}

fn over(den: &[String]) -> String {
    match den.len() {
        0 => String::new(),
        1 => format!("/{}", den[0]),
        _ => format!("/({})", den.join(" ")),
    }
}

/// `c 2^{a/2} pi^{-b/2} n^{p/2}` for `c >= 0`, e.g. `sqrt(2n/pi)`,
/// `53/96/n`, `11/12/(pi n)`.
pub(crate) fn monomial(c: Rational, a: i32, b: i32, p: i32) -> String {
    let mut sqrt_num = Vec::new();
    let mut sqrt_den = Vec::new();
    let mut num = Vec::new();
    let mut den = Vec::new();
    if a.rem_euclid(2) == 1 {
        sqrt_num.push("2".to_string());
    }
    // pi carries exponent -b/2.
    let (pi_odd, pi_whole) = split_half(b);
    match pi_odd {
        1 => sqrt_den.push("pi".to_string()),
        -1 => sqrt_num.push("pi".to_string()),
        _ => {}
    }
    if pi_whole > 0 {
        den.push(power("pi", pi_whole));
    } else if pi_whole < 0 {
        num.push(power("pi", -pi_whole));
    }
    let (n_odd, n_whole) = split_half(p);
    match n_odd {
        1 => sqrt_num.push("n".to_string()),
        -1 => sqrt_den.push("n".to_string()),
        _ => {}
    }
    if n_whole > 0 {
        num.push(power("n", n_whole));
    } else if n_whole < 0 {
        den.push(power("n", -n_whole));
    }
    let mut factors = Vec::new();
    if !sqrt_num.is_empty() || !sqrt_den.is_empty() {
        let top = if sqrt_num.is_empty() { "1".to_string() } else { join_tokens(&sqrt_num) };
        factors.push(format!("sqrt({top}{})", over(&sqrt_den)));
    }
    factors.extend(num);
    let numer = c.numer().abs();
    let mut out = if factors.is_empty() {
        numer.to_string()
    } else if numer.is_one() {
        factors.join("*")
    } else if factors[0].starts_with("sqrt") {
        format!("{numer}*{}", factors.join("*"))
    } else {
        format!("{numer}{}", factors.join("*"))
    };
    if *c.denom() != BigInt::one() {
        out.push_str(&format!("/{}", c.denom()));
    }
    out.push_str(&over(&den));
    out
}

struct Item {
    p: i32,
    negative: bool,
    text: String,
}

/// Display form: terms in decreasing powers of `n`, with each irrational
/// constant's tail gathered into one bracket.
pub(crate) fn series(s: &AsymSeries) -> String {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(i32, i32), Vec<(i32, Rational)>> = BTreeMap::new();
    for (p, coeff) in s.terms() {
        for (a, b, c) in coeff.iter() {
            groups.entry((a, b)).or_default().push((p, c.clone()));
        }
    }
    let inexact = s.floor().is_some();
    let mut items = Vec::new();
    let mut bracketed = false;
    for ((a, b), mut terms) in groups {
        terms.sort_by_key(|t| std::cmp::Reverse(t.0));
        let (p0, c0) = &terms[0];
        items.push(Item {
            p: *p0,
            negative: c0.is_negative(),
            text: monomial(c0.abs(), a, b, *p0),
        });
        let rest = &terms[1..];
        if rest.len() == 1 {
            let (p, c) = &rest[0];
            items.push(Item { p: *p, negative: c.is_negative(), text: monomial(c.abs(), a, b, *p) });
        } else if rest.len() > 1 {
            let (p1, c1) = &rest[0];
            let flip = c1.is_negative();
            let mut inner = String::new();
            for (i, (p, c)) in rest.iter().enumerate() {
                let c = if flip { -c } else { c.clone() };
                if i == 0 {
                    inner.push_str(if c.is_negative() { "-" } else { "" });
                } else {
                    inner.push_str(if c.is_negative() { " - " } else { " + " });
                }
                inner.push_str(&monomial(c.abs(), 0, 0, p - p1));
            }
            if inexact {
                inner.push_str(" + ...");
                bracketed = true;
            }
            let lead = monomial(Rational::one(), a, b, *p1);
            items.push(Item { p: *p1, negative: flip, text: format!("{lead}*({inner})") });
        }
    }
    items.sort_by_key(|i| std::cmp::Reverse(i.p));
    let mut out = String::new();
    for (i, item) in items.iter().enumerate() {
        if i == 0 {
            out.push_str(if item.negative { "-" } else { "" });
        } else {
            out.push_str(if item.negative { " - " } else { " + " });
        }
        out.push_str(&item.text);
    }
    if items.is_empty() {
        out.push('0');
    }
    if let (Some(floor), false) = (s.floor(), bracketed) {
        out.push_str(&format!(" + O({})", monomial(Rational::one(), 0, 0, floor)));
    }
    match s.prefactor() {
        Prefactor::One => out,
        Prefactor::Pow2 => format!("2^n*({out})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn monomials() {
        assert_eq!(monomial(r(1, 1), 1, 1, 1), "sqrt(2n/pi)");
        assert_eq!(monomial(r(1, 1), 1, 1, -1), "sqrt(2/(pi n))");
        assert_eq!(monomial(r(1, 2), 0, 0, 2), "n/2");
        assert_eq!(monomial(r(53, 96), 0, 0, -2), "53/96/n");
        assert_eq!(monomial(r(11, 12), 0, 2, -2), "11/12/(pi n)");
        assert_eq!(monomial(r(3, 1), 0, 0, 4), "3n^2");
        assert_eq!(monomial(r(1, 1), 0, 0, 0), "1");
        assert_eq!(monomial(r(1, 1), 0, 0, -1), "sqrt(1/n)");
        assert_eq!(monomial(r(3, 4), 1, 1, 3), "3*sqrt(2n/pi)*n/4");
    }
}
