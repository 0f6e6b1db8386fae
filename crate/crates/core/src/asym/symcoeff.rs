use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactnum::Rational;

/// Exact constant `sum c_{a,b} 2^{a/2} pi^{-b/2}`.
///
/// Even powers of two are folded into the rational coefficient, so every
/// key has `a` in `{0, 1}`. Since `pi` is transcendental over `Q(sqrt 2)`,
/// the canonical form makes structural equality coincide with equality of
/// the real numbers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymCoeff {
    terms: BTreeMap<(i32, i32), Rational>,
}

impl SymCoeff {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn rational(c: Rational) -> Self {
        Self::term(0, 0, c)
    }

    pub fn integer(c: i64) -> Self {
        Self::rational(Rational::from_integer(BigInt::from(c)))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Self::rational(Rational::new(num.into(), den.into()))
    }

    /// `c 2^{a/2} pi^{-b/2}`.
    pub fn term(a: i32, b: i32, c: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(a, b, c);
        out
    }

    /// `sqrt(2/pi)`.
    pub fn sqrt_2_over_pi() -> Self {
        Self::term(1, 1, Rational::one())
    }

    /// `1/pi`.
    pub fn inv_pi() -> Self {
        Self::term(0, 2, Rational::one())
    }

    /// `sqrt(2 pi)`.
    pub fn sqrt_2pi() -> Self {
        Self::term(1, -1, Rational::one())
    }

    fn add_term(&mut self, a: i32, b: i32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let (half, odd) = a.div_mod_floor(&2);
        let c = c * pow2_rational(half);
        let slot = self.terms.entry((odd, b)).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(odd, b));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if it is rational.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    /// `(a, b, c)` triples in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, &Rational)> {
        self.terms.iter().map(|(&(a, b), c)| (a, b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `2^{a/2} pi^{-b/2}` after canonicalising `a`.
    pub fn coeff(&self, a: i32, b: i32) -> Rational {
        let (half, odd) = a.div_mod_floor(&2);
        self.terms
            .get(&(odd, b))
            .map(|c| c / pow2_rational(half))
            .unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    /// Value in double precision.
    pub fn approx(&self) -> f64 {
        self.iter()
            .map(|(a, b, c)| {
                crate::exactnum::rational_to_f64(c)
                    * 2f64.powf(a as f64 / 2.0)
                    * std::f64::consts::PI.powf(-(b as f64) / 2.0)
            })
            .sum()
    }
}

fn pow2_rational(e: i32) -> Rational {
    let p = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

impl From<Rational> for SymCoeff {
    fn from(c: Rational) -> Self {
        Self::rational(c)
    }
}

impl Add for &SymCoeff {
    type Output = SymCoeff;
    fn add(self, rhs: &SymCoeff) -> SymCoeff {
        let mut out = self.clone();
        for (a, b, c) in rhs.iter() {
            out.add_term(a, b, c.clone());
        }
        out
    }
}

impl Sub for &SymCoeff {
    type Output = SymCoeff;
    fn sub(self, rhs: &SymCoeff) -> SymCoeff {
        self + &-rhs
    }
}

impl Neg for &SymCoeff {
    type Output = SymCoeff;
    fn neg(self) -> SymCoeff {
        SymCoeff {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl Mul for &SymCoeff {
    type Output = SymCoeff;
    fn mul(self, rhs: &SymCoeff) -> SymCoeff {
        let mut out = SymCoeff::zero();
        for (a1, b1, c1) in self.iter() {
            for (a2, b2, c2) in rhs.iter() {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for SymCoeff {
            type Output = SymCoeff;
            fn $m(self, rhs: SymCoeff) -> SymCoeff {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for SymCoeff {
    type Output = SymCoeff;
    fn neg(self) -> SymCoeff {
        -&self
    }
}

impl fmt::Display for SymCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (a, b, c) in self.iter() {
            let body = super::render::monomial(c.abs(), a, b, 0);
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            f.write_str(&body)?;
            first = false;
        }
        Ok(())
    }
}
