//! The r = 2 regime: doubly exponential collapse onto the interior fixed
//! point 1/2.
//!
//! The deviation has the closed form
//! `x_n - 1/2 = -(1/2) * (2*(x_0 - 1/2))^(2^n)` for n >= 1, so its
//! logarithm is `2^n * ln|2*x_0 - 1| - ln 2`. The `2^n` factor overflows
//! f64 near n ~ 1034; storing the shifted logarithm as an [`ExtReal`]
//! (mantissa times power of two) keeps it exact for any n of interest and
//! makes the per-step doubling law an exact identity on the representation.

use astro_float::Consts;

use crate::error::{Error, Result};
use crate::numeric::{BigReal, ExtReal};

/// Largest n accepted by the high-precision iteration oracle. Past this,
/// the required mantissa width exceeds 4096 bits while the closed form
/// stays exact, so a bigger oracle adds nothing.
pub const ORACLE_MAX_N: u64 = 12;

/// Log-domain deviation of the orbit from the fixed point 1/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDeviation {
    pub n: u64,
    /// `ln|x_n - 1/2|`; extended-range, immune to overflow/underflow.
    pub log_abs_dev: ExtReal,
    /// Sign of `x_n - 1/2`: -1 for every n >= 1 off the fixed point, 0 on it.
    pub sign: i8,
    /// `log_abs_dev + ln 2 = 2^n * ln|2*x_0 - 1|`, held exactly.
    shifted: ExtReal,
}

impl LogDeviation {
    /// The shifted logarithm, which doubles exactly each step.
    pub fn shifted(&self) -> ExtReal {
        self.shifted
    }

    /// `x_n` reconstructed in f64, when representable.
    pub fn to_value(&self) -> f64 {
        if self.sign == 0 {
            return 0.5;
        }
        0.5 + f64::from(self.sign) * self.log_abs_dev.to_f64().exp()
    }
}

fn require_unit_interval(x0: f64) -> Result<()> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::domain(format!("initial state must lie in (0, 1), got {x0}")));
    }
    Ok(())
}

/// `ln|2*x_0 - 1|` (f64; the argument is exact for x0 in [0.25, 1)).
fn log_abs_scaled(x0: f64) -> f64 {
    (2.0 * x0 - 1.0).abs().ln()
}

/// Closed-form log deviation after n steps of the r = 2 map.
pub fn exact_deviation(x0: f64, n: u64) -> Result<LogDeviation> {
    require_unit_interval(x0)?;
    let ln2 = ExtReal::from_f64(std::f64::consts::LN_2);
    if x0 == 0.5 {
        return Ok(LogDeviation {
            n,
            log_abs_dev: ExtReal::NEG_INFINITY,
            sign: 0,
            shifted: ExtReal::NEG_INFINITY,
        });
    }
    if n == 0 {
        let log_abs_dev = ExtReal::from_f64((x0 - 0.5).abs().ln());
        return Ok(LogDeviation {
            n,
            log_abs_dev,
            sign: if x0 > 0.5 { 1 } else { -1 },
            shifted: log_abs_dev.add(ln2),
        });
    }
    let shifted = ExtReal::from_f64(log_abs_scaled(x0)).mul_pow2(n as i64);
    Ok(LogDeviation { n, log_abs_dev: shifted.sub(ln2), sign: -1, shifted })
}

/// The non-constant decay rate `(2^n / n) * |ln|2*x_0 - 1||`, extended-range.
pub fn decay_rate(x0: f64, n: u64) -> Result<ExtReal> {
    require_unit_interval(x0)?;
    if x0 == 0.5 {
        return Err(Error::domain(
            "decay rate is undefined at x0 = 1/2 (deviation identically zero)",
        ));
    }
    if n == 0 {
        return Err(Error::domain("decay rate requires n >= 1"));
    }
    Ok(ExtReal::from_f64(log_abs_scaled(x0).abs() / n as f64).mul_pow2(n as i64))
}

/// `ln` of the decay rate, computed directly in log space:
/// `n*ln 2 + ln|ln|2*x_0 - 1|| - ln n`.
pub fn log_decay_rate(x0: f64, n: u64) -> Result<f64> {
    require_unit_interval(x0)?;
    if x0 == 0.5 || n == 0 {
        return Err(Error::domain("log decay rate needs x0 != 1/2 and n >= 1"));
    }
    let nf = n as f64;
    Ok(nf * std::f64::consts::LN_2 + log_abs_scaled(x0).abs().ln() - nf.ln())
}

/// Cross-validate the closed form against direct iteration of
/// `x -> 2x(1-x)` at `bits` of precision; returns the maximum relative
/// error on `ln|x_n - 1/2|` over n = 1..=n_max.
pub fn validate_against_iteration(x0: f64, n_max: u64, bits: usize) -> Result<f64> {
    require_unit_interval(x0)?;
    if n_max == 0 || n_max > ORACLE_MAX_N {
        return Err(Error::domain(format!(
            "oracle iteration count must lie in 1..={ORACLE_MAX_N}, got {n_max}"
        )));
    }
    // The deviation magnitude is ~2^(-2^n): below this many bits the
    // subtraction x_n - 1/2 loses the entire signal.
    let needed = (1usize << n_max) + 64;
    if bits < needed {
        return Err(Error::InsufficientPrecision { needed, got: bits });
    }
    if x0 == 0.5 {
        return Ok(0.0);
    }
    let mut cc = Consts::new().map_err(|e| Error::Numerical(format!("constants cache: {e:?}")))?;
    let one = BigReal::from_f64(1.0, bits);
    let two = BigReal::from_f64(2.0, bits);
    let half = BigReal::from_f64(0.5, bits);
    // ln|2*x_0 - 1| at full precision; scaling by 2^n is exact.
    let scaled0 = two.mul(&BigReal::from_f64(x0, bits)).sub(&one).abs();
    let log_scaled0 = scaled0.ln(&mut cc);
    let ln2 = two.ln(&mut cc);

    let mut x = BigReal::from_f64(x0, bits);
    let mut max_rel: f64 = 0.0;
    for n in 1..=n_max {
        let brake = one.sub(&x);
        x = two.mul(&x.mul(&brake));
        let measured = x.sub(&half).abs().ln(&mut cc);
        let exact = log_scaled0.mul_pow2(n as i64)?.sub(&ln2);
        let rel = measured.sub(&exact).div(&exact).abs().to_f64();
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}

/// Effective growth parameter `2 - r` of the map rewritten around the
/// interior fixed point; strictly contracting for r in (1, 3).
pub fn effective_r(r: f64) -> Result<f64> {
    if !(r > 1.0 && r <= 3.0) {
        return Err(Error::domain(format!("effective parameter defined for r in (1, 3], got {r}")));
    }
    Ok(2.0 - r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn exact_deviation_hand_cases() {
        // x0 = 0.25, n = 1: ln|x_1 - 1/2| = -3 ln 2, so x_1 = 0.375.
        let d = exact_deviation(0.25, 1).unwrap();
        assert!((d.log_abs_dev.to_f64() + 3.0 * LN_2).abs() < 1e-15);
        assert_eq!(d.sign, -1);
        assert!((d.to_value() - 0.375).abs() < 1e-16);

        // n = 2: x_2 = 1/2 - 2^-5 = 0.46875 = 2*0.375*0.625.
        let d = exact_deviation(0.25, 2).unwrap();
        assert!((d.log_abs_dev.to_f64() + 5.0 * LN_2).abs() < 1e-15);
        assert!((d.to_value() - 0.46875).abs() < 1e-16);
        assert_eq!(2.0 * 0.375 * 0.625, 0.46875);

        // On the fixed point the deviation vanishes for every n.
        let d = exact_deviation(0.5, 7).unwrap();
        assert_eq!(d.sign, 0);
        assert_eq!(d.to_value(), 0.5);
    }

    #[test]
    fn exact_deviation_n0_and_domain() {
        let d = exact_deviation(0.8, 0).unwrap();
        assert_eq!(d.sign, 1);
        assert!((d.log_abs_dev.to_f64() - 0.3f64.ln()).abs() < 1e-15);
        assert!(exact_deviation(0.0, 3).is_err());
        assert!(exact_deviation(1.0, 3).is_err());
        assert!(exact_deviation(-0.25, 3).is_err());
    }

    #[test]
    fn deviation_never_overflows_at_huge_n() {
        let d = exact_deviation(0.25, 1_000_000).unwrap();
        assert!(d.log_abs_dev.is_finite());
        assert_eq!(d.shifted().exp2(), 1_000_000 + ExtReal::from_f64(-LN_2).exp2());
        // Far beyond f64: the f64 view saturates but the value is intact.
        assert_eq!(d.log_abs_dev.to_f64(), f64::NEG_INFINITY);
        assert!(d.log_abs_dev.to_scientific_string().starts_with('-'));
    }

    #[test]
    fn doubling_law_is_exact_on_the_representation() {
        for x0 in [0.1, 0.25, 0.4, 0.6, 0.75, 0.9] {
            for n in 1..200u64 {
                let a = exact_deviation(x0, n).unwrap();
                let b = exact_deviation(x0, n + 1).unwrap();
                assert_eq!(b.shifted(), a.shifted().mul_pow2(1));
            }
        }
    }

    #[test]
    fn decay_rate_hand_cases() {
        // x0 = 0.25: rate(3) = 8 ln2 / 3, rate(1) = 2 ln 2.
        let r3 = decay_rate(0.25, 3).unwrap().to_f64();
        assert!((r3 - 8.0 * LN_2 / 3.0).abs() < 1e-15);
        let r1 = decay_rate(0.25, 1).unwrap().to_f64();
        assert!((r1 - 2.0 * LN_2).abs() < 1e-15);
        // Rate blows up as x0 -> 1/2 at fixed n.
        let near = decay_rate(0.5 + 1e-15, 3).unwrap().to_f64();
        assert!(near > 80.0);
        assert!(decay_rate(0.5, 3).is_err());
        assert!(decay_rate(0.25, 0).is_err());
    }

    #[test]
    fn decay_rate_monotone_from_two() {
        let mut prev = decay_rate(0.3, 2).unwrap();
        for n in 3..500 {
            let cur = decay_rate(0.3, n).unwrap();
            assert!(cur > prev, "rate not increasing at n = {n}");
            prev = cur;
        }
        // n = 1 and n = 2 tie: 2^1/1 = 2^2/2.
        assert_eq!(decay_rate(0.3, 1).unwrap(), decay_rate(0.3, 2).unwrap());
    }

    #[test]
    fn log_decay_rate_matches_extended_value() {
        for (x0, n) in [(0.25, 5u64), (0.9, 40), (0.1, 900)] {
            let direct = log_decay_rate(x0, n).unwrap();
            let via_ext = decay_rate(x0, n).unwrap();
            // Compare in log10 to stay in range.
            assert!((via_ext.log10_abs() - direct / std::f64::consts::LN_10).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        let err = validate_against_iteration(0.25, 8, 1024).unwrap();
        assert!(err <= 1e-9, "relative log error {err}");
        let err = validate_against_iteration(0.9, 8, 1024).unwrap();
        assert!(err <= 1e-9, "relative log error {err}");
        assert_eq!(validate_against_iteration(0.5, 8, 1024).unwrap(), 0.0);
    }

    #[test]
    fn oracle_rejects_insufficient_precision() {
        assert!(matches!(
            validate_against_iteration(0.25, 10, 512),
            Err(Error::InsufficientPrecision { needed: 1088, .. })
        ));
        assert!(validate_against_iteration(0.25, 13, 1 << 14).is_err());
    }

    #[test]
    fn effective_r_cases() {
        assert_eq!(effective_r(2.0).unwrap(), 0.0);
        assert_eq!(effective_r(1.5).unwrap(), 0.5);
        // Boundary: |r_eff| = 1, no longer strictly contracting.
        assert_eq!(effective_r(3.0).unwrap(), -1.0);
        assert!(effective_r(1.0).is_err());
        for r in [1.25, 1.75, 2.5, 2.95] {
            assert!(effective_r(r).unwrap().abs() < 1.0);
        }
    }
}
