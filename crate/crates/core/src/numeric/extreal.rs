//! Extended-range reals: an f64 mantissa with a separate binary exponent.
//!
//! Values are stored as `mantissa * 2^exp2` with `0.5 <= |mantissa| < 1`.
//! This keeps 53 bits of relative precision while the exponent ranges over
//! `i64`, far beyond what f64 can represent. Scaling by a power of two is
//! exact, which is what the super-attractor analysis relies on: the shifted
//! log-deviation doubles per step by an exponent increment alone.

use std::cmp::Ordering;
use std::fmt;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal {
    mantissa: f64,
    exp2: i64,
}

/// Split a finite nonzero f64 into `(m, e)` with `x = m * 2^e`, `0.5 <= |m| < 1`.
fn frexp(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite() && x != 0.0);
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    if exp_field == 0 {
        // Subnormal: renormalize by scaling up first.
        let (m, e) = frexp(x * f64::powi(2.0, 64));
        return (m, e - 64);
    }
    let e = exp_field - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e)
}

/// 2^k as f64, exact for |k| <= 1023, saturating to 0 / inf outside the range.
pub(crate) fn exp2i(k: i64) -> f64 {
    if k > 1023 {
        f64::INFINITY
    } else if k < -1074 {
        0.0
    } else if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        // Subnormal range: assemble in two exact steps.
        f64::from_bits(1u64 << 52) * exp2i(k + 1022 - 52)
    }
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal { mantissa: 0.0, exp2: 0 };
    pub const NEG_INFINITY: ExtReal = ExtReal { mantissa: f64::NEG_INFINITY, exp2: 0 };

    pub fn from_f64(x: f64) -> ExtReal {
        if x == 0.0 {
            ExtReal::ZERO
        } else if !x.is_finite() {
            ExtReal { mantissa: x, exp2: 0 }
        } else {
            let (m, e) = frexp(x);
            ExtReal { mantissa: m, exp2: e }
        }
    }

    fn normalized(raw: f64, exp2: i64) -> ExtReal {
        if raw == 0.0 || !raw.is_finite() {
            ExtReal::from_f64(raw)
        } else {
            let (m, e) = frexp(raw);
            ExtReal { mantissa: m, exp2: exp2 + e }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.is_finite()
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    /// Exact scaling by 2^k.
    pub fn mul_pow2(self, k: i64) -> ExtReal {
        if self.is_zero() || !self.is_finite() {
            self
        } else {
            ExtReal { mantissa: self.mantissa, exp2: self.exp2 + k }
        }
    }

    pub fn neg(self) -> ExtReal {
        ExtReal { mantissa: -self.mantissa, exp2: self.exp2 }
    }

    pub fn abs(self) -> ExtReal {
        ExtReal { mantissa: self.mantissa.abs(), exp2: self.exp2 }
    }

    pub fn add(self, other: ExtReal) -> ExtReal {
        if self.is_zero() || !other.is_finite() {
            return other;
        }
        if other.is_zero() || !self.is_finite() {
            return self;
        }
        let (hi, lo) = if self.exp2 >= other.exp2 { (self, other) } else { (other, self) };
        let d = hi.exp2 - lo.exp2;
        if d > 120 {
            return hi;
        }
        ExtReal::normalized(hi.mantissa + lo.mantissa * exp2i(-d), hi.exp2)
    }

    pub fn sub(self, other: ExtReal) -> ExtReal {
        self.add(other.neg())
    }

    pub fn mul(self, other: ExtReal) -> ExtReal {
        if !self.is_finite() || !other.is_finite() {
            return ExtReal::from_f64(self.mantissa * other.mantissa);
        }
        ExtReal::normalized(self.mantissa * other.mantissa, self.exp2 + other.exp2)
    }

    pub fn div(self, other: ExtReal) -> ExtReal {
        ExtReal::normalized(self.mantissa / other.mantissa, self.exp2 - other.exp2)
    }

    /// Nearest f64, saturating to 0 or +/-inf when out of range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() || !self.is_finite() {
            return self.mantissa;
        }
        if self.exp2 > 1025 {
            return f64::INFINITY * self.mantissa.signum();
        }
        if self.exp2 < -1080 {
            return 0.0 * self.mantissa.signum();
        }
        // Split the scaling so each factor stays in range.
        let half = self.exp2 / 2;
        self.mantissa * exp2i(half) * exp2i(self.exp2 - half)
    }

    /// Base-10 logarithm of the magnitude; `-inf` for zero.
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.exp2 as f64 * LOG10_2 + self.mantissa.abs().log10()
    }

    /// Decimal scientific form usable even when the value overflows f64.
    pub fn to_scientific_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        if !self.is_finite() {
            return format!("{}", self.mantissa);
        }
        let l10 = self.log10_abs();
        let e10 = l10.floor();
        let digits = 10f64.powf(l10 - e10);
        let sign = if self.mantissa < 0.0 { "-" } else { "" };
        format!("{sign}{digits:.12}e{e10:+}")
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        if !self.is_finite() || !other.is_finite() {
            return self.to_f64().partial_cmp(&other.to_f64());
        }
        let sa = if self.is_zero() { 0 } else if self.mantissa > 0.0 { 1 } else { -1 };
        let sb = if other.is_zero() { 0 } else if other.mantissa > 0.0 { 1 } else { -1 };
        if sa != sb {
            return sa.partial_cmp(&sb);
        }
        if sa == 0 {
            return Some(Ordering::Equal);
        }
        match (self.exp2.cmp(&other.exp2), sa > 0) {
            (Ordering::Equal, _) => self.mantissa.partial_cmp(&other.mantissa),
            (ord, true) => Some(ord),
            (ord, false) => Some(ord.reverse()),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() {
            write!(f, "{v}")
        } else {
            write!(f, "{}", self.to_scientific_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_representable() {
        for x in [1.0, -0.5, 3.141592653589793, 1e-300, -2.5e307, 4.9e-324] {
            assert_eq!(ExtReal::from_f64(x).to_f64(), x, "roundtrip {x}");
        }
        assert_eq!(ExtReal::ZERO.to_f64(), 0.0);
    }

    #[test]
    fn pow2_scaling_is_exact() {
        let v = ExtReal::from_f64(-0.6931471805599453);
        let doubled = v.mul_pow2(1);
        assert_eq!(doubled.mantissa(), v.mantissa());
        assert_eq!(doubled.exp2(), v.exp2() + 1);
        assert_eq!(doubled.to_f64(), -2.0 * 0.6931471805599453);
        // Far beyond f64 exponent range the representation stays exact.
        let huge = v.mul_pow2(1_000_000);
        assert_eq!(huge.mul_pow2(-1_000_000), v);
    }

    #[test]
    fn addition_matches_f64_in_range() {
        let a = ExtReal::from_f64(1.5);
        let b = ExtReal::from_f64(-0.7);
        assert_eq!(a.add(b).to_f64(), 1.5 + (-0.7));
        // Small term beyond alignment range is dropped.
        let tiny = ExtReal::from_f64(1.0).mul_pow2(-400);
        assert_eq!(a.add(tiny), a);
    }

    #[test]
    fn ordering_matches_f64() {
        let xs = [-3.0, -0.2, 0.0, 0.1, 2.0, 1e20];
        for &x in &xs {
            for &y in &xs {
                let ord = x.partial_cmp(&y);
                assert_eq!(ExtReal::from_f64(x).partial_cmp(&ExtReal::from_f64(y)), ord);
            }
        }
    }

    #[test]
    fn scientific_string_for_huge_magnitudes() {
        // -0.5 * 2^4000 has log10 ~ 1203.9.
        let v = ExtReal::from_f64(-0.5).mul_pow2(4000);
        let s = v.to_scientific_string();
        assert!(s.starts_with('-'));
        assert!(s.ends_with("e+1203"), "got {s}");
    }

    #[test]
    fn subnormal_f64_roundtrip() {
        let x = 1e-310;
        let v = ExtReal::from_f64(x);
        assert_eq!(v.to_f64(), x);
        assert!(v.mantissa().abs() >= 0.5 && v.mantissa().abs() < 1.0);
    }
}
