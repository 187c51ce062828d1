//! Thin wrapper over `astro-float` binding a precision and rounding mode
//! to each value, so arithmetic reads like ordinary expressions.

use astro_float::{BigFloat, Consts, RoundingMode, Sign, WORD_BIT_SIZE};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Minimum mantissa width accepted for big-float trajectories.
pub const MIN_BIG_BITS: usize = 64;

/// An arbitrary-precision real carrying its working precision in bits.
#[derive(Clone, Debug)]
pub struct BigReal {
    value: BigFloat,
    prec: usize,
}

impl BigReal {
    pub fn from_f64(x: f64, bits: usize) -> BigReal {
        BigReal { value: BigFloat::from_f64(x, bits.max(MIN_BIG_BITS)), prec: bits.max(MIN_BIG_BITS) }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn raw(&self) -> &BigFloat {
        &self.value
    }

    fn wrap(&self, value: BigFloat) -> BigReal {
        BigReal { value, prec: self.prec }
    }

    pub fn add(&self, o: &BigReal) -> BigReal {
        self.wrap(self.value.add(&o.value, self.prec, RM))
    }

    pub fn sub(&self, o: &BigReal) -> BigReal {
        self.wrap(self.value.sub(&o.value, self.prec, RM))
    }

    pub fn mul(&self, o: &BigReal) -> BigReal {
        self.wrap(self.value.mul(&o.value, self.prec, RM))
    }

    pub fn div(&self, o: &BigReal) -> BigReal {
        self.wrap(self.value.div(&o.value, self.prec, RM))
    }

    pub fn recip(&self) -> BigReal {
        self.wrap(self.value.reciprocal(self.prec, RM))
    }

    pub fn neg(&self) -> BigReal {
        self.wrap(self.value.neg())
    }

    pub fn abs(&self) -> BigReal {
        let mut v = self.value.clone();
        v.set_sign(Sign::Pos);
        self.wrap(v)
    }

    pub fn ln(&self, cc: &mut Consts) -> BigReal {
        self.wrap(self.value.ln(self.prec, RM, cc))
    }

    /// Exact scaling by 2^k via the exponent field.
    pub fn mul_pow2(&self, k: i64) -> Result<BigReal> {
        if self.value.is_zero() {
            return Ok(self.clone());
        }
        let e = self
            .value
            .exponent()
            .ok_or_else(|| Error::Numerical("mul_pow2 on non-finite big float".into()))?;
        let shifted = i64::from(e) + k;
        let new_e = i32::try_from(shifted)
            .map_err(|_| Error::Numerical(format!("big float exponent overflow: {shifted}")))?;
        let mut v = self.value.clone();
        v.set_exponent(new_e);
        Ok(self.wrap(v))
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }

    /// Nearest-below f64 (mantissa truncation), saturating on overflow.
    pub fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.value.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _bits, sign, e, _inexact)) = self.value.as_raw_parts() else {
            return f64::NAN;
        };
        // Mantissa words are little-endian; the value is frac * 2^e with
        // frac in [0.5, 1). Two words are enough for an f64 mantissa.
        let mut frac = 0.0f64;
        for (i, &word) in words.iter().rev().take(2).enumerate() {
            frac += word as f64 * super::extreal_exp2i(-(WORD_BIT_SIZE as i64) * (i as i64 + 1));
        }
        if frac == 0.0 {
            return 0.0;
        }
        let sgn = if sign == Sign::Neg { -1.0 } else { 1.0 };
        let e = i64::from(e);
        if e > 1025 {
            return sgn * f64::INFINITY;
        }
        if e < -1080 {
            return sgn * 0.0;
        }
        let half = e / 2;
        sgn * frac * super::extreal_exp2i(half) * super::extreal_exp2i(e - half)
    }

    pub fn partial_cmp(&self, o: &BigReal) -> Option<std::cmp::Ordering> {
        self.value.cmp(&o.value).map(|s| s.cmp(&0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_roundtrip() {
        for x in [0.5, -0.375, 1.0, 3.5e-7, -123456.75, 1e300, 2.2250738585072014e-308] {
            let b = BigReal::from_f64(x, 128);
            assert_eq!(b.to_f64(), x, "roundtrip {x}");
        }
        assert_eq!(BigReal::from_f64(0.0, 128).to_f64(), 0.0);
    }

    #[test]
    fn arithmetic_matches_f64_on_exact_values() {
        let a = BigReal::from_f64(0.5, 192);
        let b = BigReal::from_f64(0.375, 192);
        assert_eq!(a.add(&b).to_f64(), 0.875);
        assert_eq!(a.mul(&b).to_f64(), 0.1875);
        assert_eq!(a.sub(&b).to_f64(), 0.125);
        assert_eq!(b.div(&a).to_f64(), 0.75);
        assert_eq!(a.recip().to_f64(), 2.0);
    }

    #[test]
    fn ln_matches_f64() {
        let mut cc = Consts::new().expect("constants cache");
        let x = BigReal::from_f64(0.25, 256);
        let l = x.ln(&mut cc).to_f64();
        assert!((l - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn pow2_scaling_is_exact() {
        let x = BigReal::from_f64(0.75, 128);
        let y = x.mul_pow2(10).unwrap();
        assert_eq!(y.to_f64(), 768.0);
        assert_eq!(y.mul_pow2(-10).unwrap().to_f64(), 0.75);
    }

    #[test]
    fn ordering() {
        let a = BigReal::from_f64(1.0, 64);
        let b = BigReal::from_f64(2.0, 64);
        assert_eq!(a.partial_cmp(&b), Some(std::cmp::Ordering::Less));
        assert_eq!(b.partial_cmp(&a), Some(std::cmp::Ordering::Greater));
        assert_eq!(a.partial_cmp(&a), Some(std::cmp::Ordering::Equal));
    }
}
