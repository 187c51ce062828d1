//! The 0 < r < 1 regime: exponential decay to zero with rate ln r.
//!
//! The orbit is bounded above by `r^n * lambda_0`, but the bound alone says
//! nothing about the actual rate. Telescoping the logarithm of the
//! recursion splits `ln(lambda_n)/n` into `ln r` plus corrections whose sum
//! stays bounded, which pins the rate exactly. Iteration switches to a
//! log-domain recursion once values approach the f64 underflow threshold.

use crate::error::{Error, Result};
use crate::map::Trajectory;
use crate::numeric::fit::fit_inverse;
use crate::numeric::KahanSum;

/// Linear-domain values below this switch the recursion to log domain.
pub const LOG_DOMAIN_SWITCH: f64 = 1e-300;

/// Log-telescoping rate analysis at step n.
#[derive(Clone, Copy, Debug)]
pub struct RateAnalysis {
    pub r: f64,
    pub lambda0: f64,
    pub n: usize,
    /// `ln(lambda_n) / n`.
    pub log_rate: f64,
    /// `sum_{k<n} ln(1 - lambda_k)`.
    pub s_log: f64,
    /// Uniform bound `|ln(1 - lambda_0)| / (1 - r)` on `|s_log|`.
    pub s_log_bound: f64,
}

impl RateAnalysis {
    /// Absolute defect of `log_rate = ln r + ln(lambda_0)/n + s_log/n`.
    pub fn identity_gap(&self) -> f64 {
        let nf = self.n as f64;
        (self.log_rate - (self.r.ln() + self.lambda0.ln() / nf + self.s_log / nf)).abs()
    }

    pub fn bound_holds(&self) -> bool {
        self.s_log.abs() <= self.s_log_bound
    }
}

fn require_subcritical(r: f64, lambda0: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("subcritical analysis requires r in (0, 1), got {r}")));
    }
    if !(lambda0 > 0.0 && lambda0 < 1.0) {
        return Err(Error::domain(format!("initial state must lie in (0, 1), got {lambda0}")));
    }
    Ok(())
}

/// Exponential envelope `r^n * lambda_0`, evaluated as `exp(n ln r) * lambda_0`.
pub fn exp_upper_bound(r: f64, lambda0: f64, n: u64) -> Result<f64> {
    require_subcritical(r, lambda0)?;
    Ok((n as f64 * r.ln()).exp() * lambda0)
}

/// Log-telescoping analysis of a stored trajectory (`r` in (0,1), states in (0,1)).
pub fn rate_analysis(traj: &Trajectory, n: usize) -> Result<RateAnalysis> {
    let r = traj.params().r();
    let lambda0 = traj.x0();
    require_subcritical(r, lambda0)?;
    if n < 1 || n >= traj.len() {
        return Err(Error::domain(format!(
            "rate analysis needs 1 <= n < {} (got n = {n})",
            traj.len()
        )));
    }
    let mut s_log = KahanSum::new();
    for k in 0..n {
        let x = traj.value(k);
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::domain(format!("iterate {k} = {x} is outside (0, 1)")));
        }
        s_log.add((-x).ln_1p());
    }
    Ok(RateAnalysis {
        r,
        lambda0,
        n,
        log_rate: traj.value(n).ln() / n as f64,
        s_log: s_log.value(),
        s_log_bound: (1.0 - lambda0).ln().abs() / (1.0 - r),
    })
}

/// Chord bound for the positive convex function `g(x) = -ln(1-x)`:
/// `g(x) <= (x/lambda_0) * g(lambda_0)` for every grid point in [0, lambda_0].
pub fn convexity_bound_check(lambda0: f64, grid: &[f64]) -> Result<bool> {
    if !(lambda0 > 0.0 && lambda0 < 1.0) {
        return Err(Error::domain(format!("chord endpoint must lie in (0, 1), got {lambda0}")));
    }
    if grid.iter().any(|&x| !(0.0..=lambda0).contains(&x)) {
        return Err(Error::domain("grid points must lie in [0, lambda0]"));
    }
    let chord_slope = -(1.0 - lambda0).ln();
    Ok(grid.iter().all(|&x| -(1.0 - x).ln() <= x / lambda0 * chord_slope))
}

/// Orbit that carries `ln(lambda_n)` exactly through the underflow range.
pub struct LogOrbit {
    r: f64,
    ln_r: f64,
    state: LogOrbitState,
}

enum LogOrbitState {
    Linear(f64),
    Log(f64),
}

/// One orbit sample: the step index is implicit in the iteration count.
#[derive(Clone, Copy, Debug)]
pub struct LogSample {
    /// `ln(lambda_n)`.
    pub ln_lambda: f64,
    /// `lambda_n`, or 0 once it underflows f64.
    pub lambda: f64,
}

impl LogOrbit {
    pub fn new(r: f64, lambda0: f64) -> Result<LogOrbit> {
        require_subcritical(r, lambda0)?;
        Ok(LogOrbit { r, ln_r: r.ln(), state: LogOrbitState::Linear(lambda0) })
    }
}

impl Iterator for LogOrbit {
    type Item = LogSample;

    fn next(&mut self) -> Option<LogSample> {
        match self.state {
            LogOrbitState::Linear(x) => {
                let next = self.r * (x * (1.0 - x));
                self.state = if next < LOG_DOMAIN_SWITCH {
                    LogOrbitState::Log(self.ln_r + x.ln() + (-x).ln_1p())
                } else {
                    LogOrbitState::Linear(next)
                };
                Some(LogSample { ln_lambda: x.ln(), lambda: x })
            }
            LogOrbitState::Log(ll) => {
                let x = if ll > -745.0 { ll.exp() } else { 0.0 };
                self.state = LogOrbitState::Log(self.ln_r + ll + (-x).ln_1p());
                Some(LogSample { ln_lambda: ll, lambda: x })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RateLimitEstimate {
    /// `(n, ln(lambda_n)/n)` at the checkpoints.
    pub rates: Vec<(u64, f64)>,
    /// Fitted limit of the rates; converges to `ln r`.
    pub extrapolated: f64,
    /// Fitted coefficient of the `1/n` correction (reported, not asserted).
    pub inv_n_coeff: f64,
}

/// Default checkpoint schedule: powers of two from 2^6 through 2^13.
pub fn default_checkpoints() -> Vec<u64> {
    (6..=13).map(|k| 1u64 << k).collect()
}

/// Estimate `lim ln(lambda_n)/n` by fitting `rate ~ a + c/n` over the
/// checkpoints; the recursion runs in log domain once values get tiny.
pub fn rate_limit_estimate(r: f64, lambda0: f64, checkpoints: &[u64]) -> Result<RateLimitEstimate> {
    require_subcritical(r, lambda0)?;
    if checkpoints.len() < 2 {
        return Err(Error::domain("rate estimation needs at least 2 checkpoints"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 {
        return Err(Error::domain("checkpoints must be strictly increasing and positive"));
    }
    let mut rates = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for (n, sample) in LogOrbit::new(r, lambda0)?.enumerate() {
        if n as u64 == checkpoints[next] {
            rates.push((n as u64, sample.ln_lambda / n as f64));
            next += 1;
            if next == checkpoints.len() {
                break;
            }
        }
    }
    let xs: Vec<f64> = rates.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = rates.iter().map(|&(_, rate)| rate).collect();
    let (extrapolated, inv_n_coeff) =
        fit_inverse(&xs, &ys).ok_or_else(|| Error::Numerical("degenerate rate fit".into()))?;
    Ok(RateLimitEstimate { rates, extrapolated, inv_n_coeff })
}

/// The exact difference factorization `f(x) - f(y) = r*(x-y)*(1-(x+y))`,
/// which yields the contraction bound `|f(x)-f(y)| <= r*|x-y|` on [0,1].
pub fn lipschitz_factor(r: f64, x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::domain(format!("contraction factor needs x, y in [0, 1], got {x}, {y}")));
    }
    if !(r > 0.0) {
        return Err(Error::domain(format!("growth parameter must be positive, got {r}")));
    }
    Ok(r * (x - y) * (1.0 - (x + y)))
}
