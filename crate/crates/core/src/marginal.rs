//! The r = 1 regime: inverse-power decay to the zero fixed point.
//!
//! Writing the recursion as a telescoping sum converts the orbit into an
//! exact four-term split of `1/lambda_n`, from which everything else
//! follows: two-sided closed-form envelopes, logarithmic and constant
//! bounds on the partial sums, and the limit `n*lambda_n -> 1/beta`
//! independent of the initial state.

use crate::error::{Error, Result};
use crate::map::{MapParams, Trajectory};
use crate::numeric::fit::{fit_linear_log, LogLinearFit};
use crate::numeric::{Accumulator, BigReal};

/// Exact split of `1/lambda_n` into initial, linear, and two sum terms:
/// `1/lambda_n = 1/lambda_0 + beta*n + beta^2*s1 + beta^3*s_ge2`.
#[derive(Clone, Copy, Debug)]
pub struct TelescopingDecomposition {
    pub lambda0: f64,
    pub n: usize,
    pub beta: f64,
    /// `beta * n`.
    pub linear_term: f64,
    /// `sum_{k<n} lambda_k`.
    pub s1: f64,
    /// `sum_{k<n} lambda_k^2 / (1 - beta*lambda_k)`.
    pub s_ge2: f64,
    /// `sum_{k<n} lambda_k^2`.
    pub s2: f64,
}

/// Closed-form lower/upper sequences that sandwich the orbit.
#[derive(Clone, Debug)]
pub struct EnvelopePair {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub beta: f64,
    pub lambda0: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct EnvelopeCheck {
    pub holds: bool,
    pub first_violation: Option<usize>,
    /// Minimum of `lambda_n - lower_n` over the orbit.
    pub min_lower_gap: f64,
    /// Minimum of `upper_n - lambda_n` over the orbit.
    pub min_upper_gap: f64,
}

/// The normalized residual `1/(n*lambda_n) - beta` and its bound terms.
#[derive(Clone, Copy, Debug)]
pub struct ResidualBounds {
    pub n: usize,
    /// `1/(n*lambda_n) - beta`; nonnegative for every orbit in range.
    pub lhs: f64,
    /// Sum-term bound: covers the `beta^2 s1 + beta^3 s_ge2` part only.
    pub rhs_bound: f64,
    /// `1/(n*lambda_0)`, the initial-state term of the exact split. The
    /// full residual obeys `lhs <= rhs_bound + initial_term`.
    pub initial_term: f64,
}

impl ResidualBounds {
    /// The inequality that holds for every n >= 1: both sum terms are
    /// covered by `rhs_bound` and the initial term appears verbatim.
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs >= 0.0 && self.lhs <= self.rhs_bound + self.initial_term + slack
    }
}

#[derive(Clone, Debug)]
pub struct LimitEstimate {
    /// `(n, n*lambda_n)` at the checkpoints; increasing, below `1/beta`.
    pub products: Vec<(u64, f64)>,
    /// Reciprocal slope of the tail fit; converges to `1/beta`.
    pub extrapolated_limit: f64,
    /// Fitted coefficient of the logarithmic correction (reported, not asserted).
    pub log_coeff: f64,
    /// Fitted constant offset (reported, not asserted).
    pub offset: f64,
}

fn marginal_params(traj: &Trajectory) -> Result<(f64, f64)> {
    let p = traj.params();
    if p.r() != 1.0 {
        return Err(Error::domain(format!("marginal analysis requires r = 1, got {}", p.r())));
    }
    let beta = p.beta();
    let lambda0 = traj.x0();
    Ok((beta, lambda0))
}

fn require_interior(beta: f64, lambda0: f64) -> Result<()> {
    if !(lambda0 > 0.0 && beta * lambda0 < 1.0) {
        return Err(Error::domain(format!(
            "lambda0 must lie in (0, 1/beta); got lambda0 = {lambda0}, beta = {beta}"
        )));
    }
    Ok(())
}

/// Maximum relative deviation of `lambda_k / lambda_{k+1}` from
/// `1/(1 - beta*lambda_k)` over the orbit.
pub fn ratio_identity_check(traj: &Trajectory) -> Result<f64> {
    let (beta, _) = marginal_params(traj)?;
    let mut max_dev: f64 = 0.0;
    for k in 0..traj.len().saturating_sub(1) {
        let lk = traj.value(k);
        let lk1 = traj.value(k + 1);
        if lk1 == 0.0 {
            return Err(Error::domain(format!(
                "orbit reaches the zero fixed point at step {} (endpoint initial state)",
                k + 1
            )));
        }
        let expected = 1.0 / (1.0 - beta * lk);
        let dev = (lk / lk1 - expected).abs() / expected;
        max_dev = max_dev.max(dev);
    }
    Ok(max_dev)
}

/// The four-term split of `1/lambda_n`, accumulated at the trajectory's
/// precision (compensated in double mode by default).
pub fn decompose(traj: &Trajectory, n: usize) -> Result<TelescopingDecomposition> {
    let (beta, lambda0) = marginal_params(traj)?;
    if n >= traj.len() {
        return Err(Error::domain(format!(
            "decomposition at n = {n} needs {} states, trajectory has {}",
            n + 1,
            traj.len()
        )));
    }
    if let Some(big) = traj.big_values() {
        let bits = big[0].prec();
        let beta_big = BigReal::from_f64(beta, bits);
        let one = BigReal::from_f64(1.0, bits);
        let mut s1 = BigReal::from_f64(0.0, bits);
        let mut s2 = BigReal::from_f64(0.0, bits);
        let mut s_ge2 = BigReal::from_f64(0.0, bits);
        for x in &big[..n] {
            let sq = x.mul(x);
            s1 = s1.add(x);
            s2 = s2.add(&sq);
            s_ge2 = s_ge2.add(&sq.div(&one.sub(&beta_big.mul(x))));
        }
        Ok(TelescopingDecomposition {
            lambda0,
            n,
            beta,
            linear_term: beta * n as f64,
            s1: s1.to_f64(),
            s_ge2: s_ge2.to_f64(),
            s2: s2.to_f64(),
        })
    } else {
        let values = traj.values_f64().expect("double trajectory");
        let compensated = traj.precision().compensated_sums();
        let mut s1 = Accumulator::new(compensated);
        let mut s2 = Accumulator::new(compensated);
        let mut s_ge2 = Accumulator::new(compensated);
        for &x in &values[..n] {
            s1.add(x);
            s2.add(x * x);
            s_ge2.add(x * x / (1.0 - beta * x));
        }
        Ok(TelescopingDecomposition {
            lambda0,
            n,
            beta,
            linear_term: beta * n as f64,
            s1: s1.value(),
            s_ge2: s_ge2.value(),
            s2: s2.value(),
        })
    }
}

/// Relative error of the orbit value against its telescoping reconstruction
/// `lambda_0 / (1 + beta*lambda_0*n + beta^2*lambda_0*s1 + beta^3*lambda_0*s_ge2)`.
pub fn reconstruction_rel_error(traj: &Trajectory, n: usize) -> Result<f64> {
    let (beta, _) = marginal_params(traj)?;
    if n >= traj.len() {
        return Err(Error::domain(format!(
            "reconstruction at n = {n} needs {} states, trajectory has {}",
            n + 1,
            traj.len()
        )));
    }
    if let Some(big) = traj.big_values() {
        let bits = big[0].prec();
        let beta_big = BigReal::from_f64(beta, bits);
        let one = BigReal::from_f64(1.0, bits);
        let lambda0 = &big[0];
        let mut s1 = BigReal::from_f64(0.0, bits);
        let mut s_ge2 = BigReal::from_f64(0.0, bits);
        for x in &big[..n] {
            let sq = x.mul(x);
            s1 = s1.add(x);
            s_ge2 = s_ge2.add(&sq.div(&one.sub(&beta_big.mul(x))));
        }
        let bl = beta_big.mul(lambda0);
        let n_big = BigReal::from_f64(n as f64, bits);
        let denom = one
            .add(&bl.mul(&n_big))
            .add(&beta_big.mul(&bl).mul(&s1))
            .add(&beta_big.mul(&beta_big).mul(&bl).mul(&s_ge2));
        let recon = lambda0.div(&denom);
        let rel = recon.sub(&big[n]).div(&big[n]);
        Ok(rel.abs().to_f64())
    } else {
        let d = decompose(traj, n)?;
        let bl = beta * d.lambda0;
        let denom = 1.0 + bl * n as f64 + beta * bl * d.s1 + beta * beta * bl * d.s_ge2;
        let recon = d.lambda0 / denom;
        let actual = traj.value(n);
        Ok(((recon - actual) / actual).abs())
    }
}

/// Lower envelope `lambda_0 * (1 - q) / (1 + q*(n-1))` with `q = beta*lambda_0`.
///
/// Algebraically identical to `lambda_0 / (1 + n*q/(1-q))`; this form makes
/// the n = 1 value evaluate exactly like one map step.
pub fn lower_envelope(beta: f64, lambda0: f64, n: u64) -> f64 {
    if n == 0 {
        return lambda0;
    }
    let q = beta * lambda0;
    lambda0 * (1.0 - q) / (1.0 + q * (n - 1) as f64)
}

/// Upper envelope `lambda_0 / (1 + beta*lambda_0*n)`, the continuum solution
/// sampled at integer times.
pub fn upper_envelope(beta: f64, lambda0: f64, n: u64) -> f64 {
    lambda0 / (1.0 + beta * lambda0 * n as f64)
}

/// The continuum decay law `lambda(t) = lambda_0 / (1 + beta*lambda_0*t)`.
pub fn continuum_comparison(beta: f64, lambda0: f64, t: f64) -> f64 {
    lambda0 / (1.0 + beta * lambda0 * t)
}

/// Both envelopes tabulated for n = 0..=n_max. No iteration is performed.
pub fn envelopes(beta: f64, lambda0: f64, n_max: usize) -> Result<EnvelopePair> {
    require_interior(beta, lambda0)?;
    let lower = (0..=n_max as u64).map(|n| lower_envelope(beta, lambda0, n)).collect();
    let upper = (0..=n_max as u64).map(|n| upper_envelope(beta, lambda0, n)).collect();
    Ok(EnvelopePair { lower, upper, beta, lambda0 })
}

/// Check `lower_n - slack <= lambda_n <= upper_n + slack` along the whole
/// trajectory, with the slack taken from the trajectory's precision policy.
pub fn verify_envelopes(traj: &Trajectory) -> Result<EnvelopeCheck> {
    let (beta, lambda0) = marginal_params(traj)?;
    require_interior(beta, lambda0)?;
    let policy = *traj.precision();
    let mut check = EnvelopeCheck {
        holds: true,
        first_violation: None,
        min_lower_gap: f64::INFINITY,
        min_upper_gap: f64::INFINITY,
    };
    for n in 0..traj.len() {
        let x = traj.value(n);
        let lo = lower_envelope(beta, lambda0, n as u64);
        let hi = upper_envelope(beta, lambda0, n as u64);
        check.min_lower_gap = check.min_lower_gap.min(x - lo);
        check.min_upper_gap = check.min_upper_gap.min(hi - x);
        if x < lo - policy.slack(lo) || x > hi + policy.slack(hi) {
            check.holds = false;
            if check.first_violation.is_none() {
                check.first_violation = Some(n);
            }
        }
    }
    Ok(check)
}

/// Logarithmic bound on the first partial sum:
/// `s1(n) <= lambda_0 * (1 + ln(1 + beta*lambda_0*n) / (beta*lambda_0))`.
pub fn s1_upper_bound(beta: f64, lambda0: f64, n: u64) -> Result<f64> {
    require_interior(beta, lambda0)?;
    let q = beta * lambda0;
    Ok(lambda0 * (1.0 + (1.0 + q * n as f64).ln() / q))
}

/// Constant bound on the geometric-tail sum:
/// `s_ge2 <= lambda_0 / (1 - beta*lambda_0) * (lambda_0 + 1/beta)`.
pub fn s_ge2_upper_bound(beta: f64, lambda0: f64) -> Result<f64> {
    require_interior(beta, lambda0)?;
    Ok(lambda0 / (1.0 - beta * lambda0) * (lambda0 + 1.0 / beta))
}

/// The residual `1/(n*lambda_n) - beta` with its sum-term bound.
pub fn residual(traj: &Trajectory, n: usize) -> Result<ResidualBounds> {
    let (beta, lambda0) = marginal_params(traj)?;
    require_interior(beta, lambda0)?;
    if n < 1 {
        return Err(Error::domain("residual requires n >= 1"));
    }
    if n >= traj.len() {
        return Err(Error::domain(format!(
            "residual at n = {n} needs {} states, trajectory has {}",
            n + 1,
            traj.len()
        )));
    }
    let nf = n as f64;
    let lhs = 1.0 / (nf * traj.value(n)) - beta;
    let q = beta * lambda0;
    let rhs_bound = beta * beta * lambda0 / nf * (1.0 + (1.0 + q * nf).ln() / q)
        + beta.powi(3) * lambda0 / (nf * (1.0 - q)) * (lambda0 + 1.0 / beta);
    Ok(ResidualBounds { n, lhs, rhs_bound, initial_term: 1.0 / (nf * lambda0) })
}

/// Default checkpoint schedule: powers of two from 2^10 through 2^20.
pub fn default_checkpoints() -> Vec<u64> {
    (10..=20).map(|k| 1u64 << k).collect()
}

/// Estimate `lim n*lambda_n` by fitting `1/lambda_n ~ beta*n + c*ln n + d`
/// over the checkpoints and reporting the reciprocal slope.
pub fn limit_estimate(beta: f64, lambda0: f64, checkpoints: &[u64]) -> Result<LimitEstimate> {
    require_interior(beta, lambda0)?;
    if checkpoints.len() < 3 {
        return Err(Error::domain(format!(
            "limit estimation needs at least 3 checkpoints, got {}",
            checkpoints.len()
        )));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 {
        return Err(Error::domain("checkpoints must be strictly increasing and positive"));
    }
    let params = MapParams::verhulst(1.0, beta)?;
    let n_max = *checkpoints.last().unwrap();
    let mut products = Vec::with_capacity(checkpoints.len());
    let mut recips = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    let mut lambda = lambda0;
    for n in 1..=n_max {
        lambda = params.step(lambda);
        if n == checkpoints[next] {
            products.push((n, n as f64 * lambda));
            recips.push(1.0 / lambda);
            next += 1;
            if next == checkpoints.len() {
                break;
            }
        }
    }
    let xs: Vec<f64> = checkpoints.iter().map(|&n| n as f64).collect();
    let LogLinearFit { slope, log_coeff, offset } = fit_linear_log(&xs, &recips)
        .ok_or_else(|| Error::Numerical("degenerate tail fit".into()))?;
    Ok(LimitEstimate { products, extrapolated_limit: 1.0 / slope, log_coeff, offset })
}

/// Streaming scan state at step n: the current value and the partial sums
/// over k < n.
#[derive(Clone, Copy, Debug)]
pub struct ScanState {
    pub n: u64,
    pub lambda: f64,
    pub s1: f64,
    pub s2: f64,
    pub s_ge2: f64,
}

/// Streaming decomposition scan for long sweeps; avoids materializing the
/// orbit. Always accumulates with compensation.
pub struct SumScan {
    beta: f64,
    lambda: f64,
    n: u64,
    s1: crate::numeric::KahanSum,
    s2: crate::numeric::KahanSum,
    s_ge2: crate::numeric::KahanSum,
}

impl SumScan {
    pub fn new(beta: f64, lambda0: f64) -> Result<SumScan> {
        require_interior(beta, lambda0)?;
        Ok(SumScan {
            beta,
            lambda: lambda0,
            n: 0,
            s1: Default::default(),
            s2: Default::default(),
            s_ge2: Default::default(),
        })
    }
}

impl Iterator for SumScan {
    type Item = ScanState;

    fn next(&mut self) -> Option<ScanState> {
        let state = ScanState {
            n: self.n,
            lambda: self.lambda,
            s1: self.s1.value(),
            s2: self.s2.value(),
            s_ge2: self.s_ge2.value(),
        };
        let x = self.lambda;
        self.s1.add(x);
        self.s2.add(x * x);
        self.s_ge2.add(x * x / (1.0 - self.beta * x));
        self.lambda = x * (1.0 - self.beta * x);
        self.n += 1;
        Some(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::iterate;

    fn marginal_traj(beta: f64, lambda0: f64, n: u64) -> Trajectory {
        let p = MapParams::verhulst(1.0, beta).unwrap();
        iterate(&p, lambda0, n, PrecisionPolicy::default()).unwrap()
    }

    #[test]
    fn ratio_identity_hand_case() {
        // lambda_0/lambda_1 = 2 = 1/(1 - 0.5) exactly in dyadic arithmetic.
        let t = marginal_traj(1.0, 0.5, 1);
        assert_eq!(ratio_identity_check(&t).unwrap(), 0.0);
    }

    #[test]
    fn ratio_identity_stays_at_rounding_level() {
        let t = marginal_traj(1.0, 0.5, 1000);
        assert!(ratio_identity_check(&t).unwrap() <= 1e-13);
    }

    #[test]
    fn ratio_identity_rejects_endpoint_collapse() {
        let t = marginal_traj(1.0, 1.0, 1);
        assert!(ratio_identity_check(&t).is_err());
    }

    #[test]
    fn decompose_hand_cases() {
        let t = marginal_traj(1.0, 0.5, 2);
        let d = decompose(&t, 1).unwrap();
        assert_eq!(d.linear_term, 1.0);
        assert_eq!(d.s1, 0.5);
        assert_eq!(d.s_ge2, 0.5);
        assert_eq!(d.s2, 0.25);
        // 1/lambda_1 = 4 = 2 + 1 + 0.5 + 0.5.
        assert_eq!(1.0 / t.value(1), 2.0 + d.linear_term + d.s1 + d.s_ge2);

        let d = decompose(&t, 2).unwrap();
        assert_eq!(d.s1, 0.75);
        assert!((d.s_ge2 - (0.5 + 0.0625 / 0.75)).abs() < 1e-15);
        assert!((1.0 / t.value(2) - 16.0 / 3.0).abs() < 1e-14);

        // n = 0: empty sums reproduce 1/lambda_0.
        let d = decompose(&t, 0).unwrap();
        assert_eq!((d.s1, d.s2, d.s_ge2, d.linear_term), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn reconstruction_is_tight_in_double() {
        let t = marginal_traj(1.0, 0.5, 10_000);
        assert!(reconstruction_rel_error(&t, 10_000).unwrap() <= 1e-12);
    }

    #[test]
    fn envelope_hand_cases() {
        let e = envelopes(1.0, 0.5, 1).unwrap();
        assert_eq!(e.lower[1], 0.25);
        assert!((e.upper[1] - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(e.lower[0], 0.5);
        assert_eq!(e.upper[0], 0.5);
    }

    #[test]
    fn envelope_large_n_normalization() {
        // upper*(beta*n) -> 1 and lower*(beta*n) -> 1 - beta*lambda0.
        let (beta, lambda0) = (2.0, 0.25);
        let n = 1u64 << 40;
        let hi = upper_envelope(beta, lambda0, n) * beta * n as f64;
        let lo = lower_envelope(beta, lambda0, n) * beta * n as f64;
        assert!((hi - 1.0).abs() < 1e-9);
        assert!((lo - 0.5).abs() < 1e-9);
    }

    #[test]
    fn envelopes_reject_degenerate_domain() {
        assert!(envelopes(1.0, 1.0, 10).is_err());
        assert!(envelopes(2.0, 0.5, 10).is_err());
        assert!(envelopes(1.0, -0.1, 10).is_err());
    }

    #[test]
    fn sandwich_holds_with_equality_at_first_step() {
        let t = marginal_traj(1.0, 0.5, 100_000);
        let c = verify_envelopes(&t).unwrap();
        assert!(c.holds, "first violation: {:?}", c.first_violation);
        // Lower envelope is attained at n = 1.
        assert_eq!(lower_envelope(1.0, 0.5, 1), t.value(1));

        let t = marginal_traj(1.0, 0.9, 100_000);
        assert!(verify_envelopes(&t).unwrap().holds);
    }

    #[test]
    fn sum_bound_hand_cases() {
        // s_ge2 bound at beta=1, lambda0=0.5: (0.5/0.5)*(0.5+1) = 1.5.
        assert_eq!(s_ge2_upper_bound(1.0, 0.5).unwrap(), 1.5);
        // s1 bound at n=1: 0.5*(1 + ln(1.5)/0.5) = 0.5 + ln 1.5.
        let b = s1_upper_bound(1.0, 0.5, 1).unwrap();
        assert!((b - (0.5 + 1.5f64.ln())).abs() < 1e-15);
        assert!(b >= 0.5);
        // n = 0 bound degenerates to lambda0.
        assert_eq!(s1_upper_bound(1.0, 0.5, 0).unwrap(), 0.5);
    }

    #[test]
    fn residual_hand_case() {
        let t = marginal_traj(1.0, 0.5, 16);
        let r = residual(&t, 1).unwrap();
        assert_eq!(r.lhs, 3.0);
        // Direct evaluation of the sum-term bound at n = 1.
        assert!((r.rhs_bound - 2.4054651081081644).abs() < 1e-15);
        // The sum-term bound alone does not cover the initial-state term...
        assert!(r.lhs > r.rhs_bound);
        // ...but the full split inequality holds.
        assert!(r.holds(0.0));
    }

    #[test]
    fn residual_holds_along_orbit() {
        let t = marginal_traj(1.0, 0.5, 10_000);
        for n in [1usize, 2, 3, 10, 100, 5000, 10_000] {
            let r = residual(&t, n).unwrap();
            let slack = t.precision().slack(r.rhs_bound + r.initial_term);
            assert!(r.holds(slack), "n = {n}: {r:?}");
        }
    }

    #[test]
    fn residual_vanishes_for_small_initial_state() {
        let t = marginal_traj(1.0, 1e-9, 4);
        let r = residual(&t, 2).unwrap();
        assert!(r.lhs.abs() < 1e-3);
        assert!(r.rhs_bound < 1e-8);
    }

    #[test]
    fn limit_estimate_checkpoints_validation() {
        assert!(limit_estimate(1.0, 0.5, &[8, 16]).is_err());
        assert!(limit_estimate(1.0, 0.5, &[8, 8, 16]).is_err());
        assert!(limit_estimate(1.0, 1.5, &[8, 16, 32]).is_err());
    }

    #[test]
    fn limit_estimate_small_run() {
        let cps: Vec<u64> = (8..=14).map(|k| 1u64 << k).collect();
        let est = limit_estimate(1.0, 0.5, &cps).unwrap();
        assert!((est.extrapolated_limit - 1.0).abs() < 1e-4);
        // Products increase strictly and stay below 1/beta.
        for w in est.products.windows(2) {
            assert!(w[0].1 < w[1].1);
        }
        assert!(est.products.iter().all(|&(_, p)| p < 1.0));
    }

    #[test]
    fn continuum_comparison_cases() {
        assert_eq!(continuum_comparison(1.0, 1.0, 1.0), 0.5);
        assert_eq!(continuum_comparison(1.0, 0.7, 0.0), 0.7);
        // The upper envelope is the continuum law at integer times.
        assert_eq!(continuum_comparison(1.0, 0.5, 17.0), upper_envelope(1.0, 0.5, 17));
    }

    #[test]
    fn scan_matches_decompose() {
        let t = marginal_traj(1.0, 0.5, 64);
        let state = SumScan::new(1.0, 0.5).unwrap().nth(64).unwrap();
        let d = decompose(&t, 64).unwrap();
        assert_eq!(state.s1, d.s1);
        assert_eq!(state.s2, d.s2);
        assert_eq!(state.s_ge2, d.s_ge2);
        assert_eq!(state.lambda, t.value(64));
    }

    #[test]
    fn big_float_reconstruction_is_tight() {
        let p = MapParams::verhulst(1.0, 1.0).unwrap();
        let t = iterate(&p, 0.5, 64, PrecisionPolicy::big_float(256).unwrap()).unwrap();
        // Only the last-place rounding of the 256-bit sums survives.
        assert!(reconstruction_rel_error(&t, 64).unwrap() <= 2f64.powi(-236));
    }
}
