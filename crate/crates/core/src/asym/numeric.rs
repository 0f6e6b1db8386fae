//! Multi-precision evaluation of constants and truncated series.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use super::series::{AsymSeries, Prefactor};
use super::symcoeff::SymCoeff;
use crate::exactnum::Rational;

const RM: RoundingMode = RoundingMode::ToEven;

/// Evaluates exact objects in binary floating point with a fixed precision.
pub struct Evaluator {
    bits: usize,
    cc: Consts,
    sqrt2: BigFloat,
    sqrt_pi: BigFloat,
}

impl Evaluator {
    pub fn new(bits: usize) -> Self {
        let mut cc = Consts::new().expect("constant cache");
        let pi = cc.pi(bits, RM);
        let sqrt2 = BigFloat::from_u8(2, bits).sqrt(bits, RM);
        let sqrt_pi = pi.sqrt(bits, RM);
        Self { bits, cc, sqrt2, sqrt_pi }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn integer(&mut self, x: &num_bigint::BigInt) -> BigFloat {
        BigFloat::parse(&x.to_string(), Radix::Dec, self.bits, RM, &mut self.cc)
    }

    pub fn rational(&mut self, x: &Rational) -> BigFloat {
        let num = self.integer(x.numer());
        let den = self.integer(x.denom());
        num.div(&den, self.bits, RM)
    }

    pub fn sym(&mut self, c: &SymCoeff) -> BigFloat {
        let p = self.bits;
        let mut acc = BigFloat::from_u8(0, p);
        for (a, b, x) in c.iter() {
            let mut v = self.rational(x);
            if a == 1 {
                v = v.mul(&self.sqrt2, p, RM);
            }
            if b != 0 {
                let pw = self.sqrt_pi.powi(b.unsigned_abs() as usize, p, RM);
                v = if b > 0 { v.div(&pw, p, RM) } else { v.mul(&pw, p, RM) };
            }
            acc = acc.add(&v, p, RM);
        }
        acc
    }

    /// The known part of `s` at a concrete `n`.
    pub fn series_at(&mut self, s: &AsymSeries, n: u64) -> BigFloat {
        let p = self.bits;
        let sqrt_n = BigFloat::from_u64(n, p).sqrt(p, RM);
        let mut acc = BigFloat::from_u8(0, p);
        for (half, c) in s.terms() {
            let pw = sqrt_n.powi(half.unsigned_abs() as usize, p, RM);
            let c = self.sym(c);
            let term = if half >= 0 { c.mul(&pw, p, RM) } else { c.div(&pw, p, RM) };
            acc = acc.add(&term, p, RM);
        }
        if s.prefactor() == Prefactor::Pow2 {
            let two_n = BigFloat::from_u8(2, p).powi(n as usize, p, RM);
            acc = acc.mul(&two_n, p, RM);
        }
        acc
    }

    pub fn sqrt(&self, x: &BigFloat) -> BigFloat {
        x.sqrt(self.bits, RM)
    }

    pub fn to_f64(&mut self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        x.format(Radix::Dec, RM, &mut self.cc)
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::NAN)
    }

    /// `|approx - exact| / |exact|`.
    pub fn relative_error(&mut self, approx: &BigFloat, exact: &Rational) -> f64 {
        let e = self.rational(exact);
        let diff = approx.sub(&e, self.bits, RM).abs();
        let rel = diff.div(&e.abs(), self.bits, RM);
        self.to_f64(&rel)
    }
}
