//! The discrete map, its parameter domains, precision policy, and raw
//! trajectory generation.
//!
//! Everything downstream consumes trajectories produced here, so the step
//! evaluation order is fixed: the brake factor `(1 - beta*x)` is computed
//! first, then the two multiplications. All modes and both forms share that
//! order, which makes cross-module comparisons bit-exact.

use crate::error::{Error, Result};
use crate::numeric::BigReal;

/// Hard cap on iteration counts unless explicitly overridden.
pub const DEFAULT_ITERATION_CAP: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapForm {
    /// `x -> r*x*(1-x)`; the brake scale is fixed to 1.
    XForm,
    /// `lambda -> r*lambda*(1-beta*lambda)` with a free brake scale.
    VerhulstForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapParams {
    r: f64,
    beta: f64,
    form: MapForm,
}

impl MapParams {
    /// `x -> r*x*(1-x)`.
    pub fn x_form(r: f64) -> Result<MapParams> {
        Self::validate(r, 1.0)?;
        Ok(MapParams { r, beta: 1.0, form: MapForm::XForm })
    }

    /// `lambda -> r*lambda*(1-beta*lambda)`.
    pub fn verhulst(r: f64, beta: f64) -> Result<MapParams> {
        Self::validate(r, beta)?;
        Ok(MapParams { r, beta, form: MapForm::VerhulstForm })
    }

    fn validate(r: f64, beta: f64) -> Result<()> {
        if !r.is_finite() || !beta.is_finite() {
            return Err(Error::NonFinite("map parameters".into()));
        }
        if r <= 0.0 {
            return Err(Error::domain(format!("growth parameter r must be positive, got {r}")));
        }
        if beta <= 0.0 {
            return Err(Error::domain(format!("brake scale beta must be positive, got {beta}")));
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn form(&self) -> MapForm {
        self.form
    }

    /// One step of the map at double precision.
    #[inline]
    pub fn step(&self, x: f64) -> f64 {
        let brake = 1.0 - self.beta * x;
        self.r * (x * brake)
    }

    /// One step at big-float precision, same evaluation order.
    pub fn step_big(&self, x: &BigReal) -> BigReal {
        let bits = x.prec();
        let one = BigReal::from_f64(1.0, bits);
        let beta = BigReal::from_f64(self.beta, bits);
        let r = BigReal::from_f64(self.r, bits);
        let brake = one.sub(&beta.mul(x));
        r.mul(&x.mul(&brake))
    }

    /// The fixed points: `{0, (r-1)/(r*beta)}`, collapsing to `{0}` at r = 1.
    pub fn fixed_points(&self) -> Vec<f64> {
        if self.r == 1.0 {
            vec![0.0]
        } else {
            let mut pts = vec![0.0, (self.r - 1.0) / (self.r * self.beta)];
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts
        }
    }

    /// The nonzero fixed point `(r-1)/(r*beta)`.
    pub fn interior_fixed_point(&self) -> f64 {
        (self.r - 1.0) / (self.r * self.beta)
    }
}

/// One step of the map; free-function form of [`MapParams::step`].
#[inline]
pub fn step(params: &MapParams, x: f64) -> f64 {
    params.step(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionMode {
    /// Plain binary64 iteration.
    Double,
    /// Binary64 iteration with compensated series accumulation downstream.
    DoubleCompensated,
    /// Arbitrary-precision iteration with the given mantissa width.
    BigFloat { bits: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Summation {
    Naive,
    Compensated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub mode: PrecisionMode,
    pub summation: Summation,
}

impl Default for PrecisionPolicy {
    /// Double precision with compensated accumulation.
    fn default() -> Self {
        PrecisionPolicy { mode: PrecisionMode::DoubleCompensated, summation: Summation::Compensated }
    }
}

impl PrecisionPolicy {
    pub fn double() -> PrecisionPolicy {
        PrecisionPolicy { mode: PrecisionMode::Double, summation: Summation::Compensated }
    }

    pub fn double_naive() -> PrecisionPolicy {
        PrecisionPolicy { mode: PrecisionMode::Double, summation: Summation::Naive }
    }

    pub fn big_float(bits: usize) -> Result<PrecisionPolicy> {
        if bits < crate::numeric::big::MIN_BIG_BITS {
            return Err(Error::domain(format!(
                "big-float precision must be at least {} bits, got {bits}",
                crate::numeric::big::MIN_BIG_BITS
            )));
        }
        Ok(PrecisionPolicy { mode: PrecisionMode::BigFloat { bits }, summation: Summation::Naive })
    }

    /// Whether series accumulated from trajectories use compensation.
    pub fn compensated_sums(&self) -> bool {
        matches!(self.mode, PrecisionMode::DoubleCompensated)
            || self.summation == Summation::Compensated
    }

    pub fn big_bits(&self) -> Option<usize> {
        match self.mode {
            PrecisionMode::BigFloat { bits } => Some(bits),
            _ => None,
        }
    }

    /// Slack factor for inequality checks: 4 units in the last place of the
    /// working precision, scaled by magnitude. Exact real-arithmetic
    /// inequalities are asserted up to this allowance.
    pub fn slack(&self, magnitude: f64) -> f64 {
        match self.mode {
            PrecisionMode::BigFloat { .. } => 0.0,
            _ => 4.0 * f64::EPSILON * magnitude.abs(),
        }
    }
}

#[derive(Clone, Debug)]
enum TrajectoryValues {
    Double(Vec<f64>),
    Big(Vec<BigReal>),
}

/// An immutable finite orbit plus the policy that produced it.
#[derive(Clone, Debug)]
pub struct Trajectory {
    params: MapParams,
    precision: PrecisionPolicy,
    values: TrajectoryValues,
}

impl Trajectory {
    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn precision(&self) -> &PrecisionPolicy {
        &self.precision
    }

    /// Number of stored states (`n` iterations produce `n + 1` states).
    pub fn len(&self) -> usize {
        match &self.values {
            TrajectoryValues::Double(v) => v.len(),
            TrajectoryValues::Big(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x0(&self) -> f64 {
        self.value(0)
    }

    /// State k as f64 (rounded view in big-float mode).
    pub fn value(&self, k: usize) -> f64 {
        match &self.values {
            TrajectoryValues::Double(v) => v[k],
            TrajectoryValues::Big(v) => v[k].to_f64(),
        }
    }

    pub fn values_f64(&self) -> Option<&[f64]> {
        match &self.values {
            TrajectoryValues::Double(v) => Some(v),
            TrajectoryValues::Big(_) => None,
        }
    }

    pub fn big_values(&self) -> Option<&[BigReal]> {
        match &self.values {
            TrajectoryValues::Big(v) => Some(v),
            TrajectoryValues::Double(_) => None,
        }
    }

    pub fn iter_f64(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.value(k))
    }
}

/// Iterate the map `n` times from `x0` under the default cap.
pub fn iterate(params: &MapParams, x0: f64, n: u64, precision: PrecisionPolicy) -> Result<Trajectory> {
    iterate_with_cap(params, x0, n, precision, DEFAULT_ITERATION_CAP)
}

/// Iterate with an explicit cap override.
pub fn iterate_with_cap(
    params: &MapParams,
    x0: f64,
    n: u64,
    precision: PrecisionPolicy,
    cap: u64,
) -> Result<Trajectory> {
    if !x0.is_finite() {
        return Err(Error::NonFinite("initial state x0".into()));
    }
    if n > cap {
        return Err(Error::IterationCap { requested: n, cap });
    }
    let values = match precision.mode {
        PrecisionMode::Double | PrecisionMode::DoubleCompensated => {
            let mut v = Vec::with_capacity(n as usize + 1);
            let mut x = x0;
            v.push(x);
            for _ in 0..n {
                x = params.step(x);
                v.push(x);
            }
            TrajectoryValues::Double(v)
        }
        PrecisionMode::BigFloat { bits } => {
            PrecisionPolicy::big_float(bits)?;
            let mut v = Vec::with_capacity(n as usize + 1);
            let mut x = BigReal::from_f64(x0, bits);
            v.push(x.clone());
            for _ in 0..n {
                x = params.step_big(&x);
                v.push(x.clone());
            }
            TrajectoryValues::Big(v)
        }
    };
    Ok(Trajectory { params: *params, precision, values })
}

/// Infinite double-precision orbit, yielding `x0` first.
pub struct Orbit {
    params: MapParams,
    next: f64,
}

impl Iterator for Orbit {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let current = self.next;
        self.next = self.params.step(current);
        Some(current)
    }
}

pub fn orbit(params: &MapParams, x0: f64) -> Orbit {
    Orbit { params: *params, next: x0 }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convergence {
    pub converged: bool,
    pub limit_point: f64,
    pub steps: u64,
}

/// Iterate until `|x_n - x*|` < tol against the interior fixed point
/// `(r-1)/(r*beta)`, or until `n_max` steps have been taken.
///
/// Requires `r` strictly inside (1, 3); the initial state may sit anywhere
/// in (-1, 1) although only (0, 1) is exercised by the verification suite.
pub fn empirical_convergence(
    params: &MapParams,
    x0: f64,
    tol: f64,
    n_max: u64,
) -> Result<Convergence> {
    let r = params.r();
    if !(r > 1.0 && r < 3.0) {
        return Err(Error::domain(format!("convergence check requires r in (1, 3), got {r}")));
    }
    if !(x0 > -1.0 && x0 < 1.0) {
        return Err(Error::domain(format!("initial state must lie in (-1, 1), got {x0}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let target = params.interior_fixed_point();
    let mut x = x0;
    for step_count in 0..=n_max {
        if (x - target).abs() < tol {
            return Ok(Convergence { converged: true, limit_point: x, steps: step_count });
        }
        if step_count < n_max {
            x = params.step(x);
        }
    }
    Ok(Convergence { converged: false, limit_point: x, steps: n_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        let marginal = MapParams::verhulst(1.0, 1.0).unwrap();
        assert_eq!(marginal.step(0.5), 0.25);
        assert_eq!(marginal.step(0.0), 0.0);
        // The brake endpoint maps straight onto the zero fixed point.
        assert_eq!(marginal.step(1.0), 0.0);
        let super_attracting = MapParams::x_form(2.0).unwrap();
        assert_eq!(super_attracting.step(0.25), 0.375);
    }

    #[test]
    fn iterate_examples() {
        let p = MapParams::verhulst(1.0, 1.0).unwrap();
        let t = iterate(&p, 0.5, 2, PrecisionPolicy::default()).unwrap();
        assert_eq!(t.values_f64().unwrap(), &[0.5, 0.25, 0.1875]);

        let p = MapParams::x_form(0.5).unwrap();
        let t = iterate(&p, 0.5, 1, PrecisionPolicy::default()).unwrap();
        assert_eq!(t.values_f64().unwrap(), &[0.5, 0.125]);

        let p = MapParams::x_form(3.7).unwrap();
        let t = iterate(&p, 0.0, 5, PrecisionPolicy::default()).unwrap();
        assert!(t.iter_f64().all(|x| x == 0.0));
    }

    #[test]
    fn iterate_rejects_bad_inputs() {
        let p = MapParams::x_form(1.0).unwrap();
        assert!(matches!(
            iterate(&p, f64::NAN, 1, PrecisionPolicy::default()),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            iterate(&p, 0.5, DEFAULT_ITERATION_CAP + 1, PrecisionPolicy::default()),
            Err(Error::IterationCap { .. })
        ));
        // The cap is an override, not a constant.
        assert!(iterate_with_cap(&p, 0.5, 8, PrecisionPolicy::default(), 8).is_ok());
        assert!(iterate_with_cap(&p, 0.5, 9, PrecisionPolicy::default(), 8).is_err());
    }

    #[test]
    fn fixed_points_examples() {
        let p = MapParams::x_form(2.0).unwrap();
        assert_eq!(p.fixed_points(), vec![0.0, 0.5]);
        let p = MapParams::x_form(1.0).unwrap();
        assert_eq!(p.fixed_points(), vec![0.0]);
        let p = MapParams::x_form(3.0).unwrap();
        let pts = p.fixed_points();
        assert_eq!(pts[0], 0.0);
        assert!((pts[1] - 2.0 / 3.0).abs() < 1e-15);
        // Verhulst scaling divides the interior point by beta.
        let p = MapParams::verhulst(2.0, 4.0).unwrap();
        assert_eq!(p.fixed_points(), vec![0.0, 0.125]);
    }

    #[test]
    fn params_validation() {
        assert!(MapParams::x_form(0.0).is_err());
        assert!(MapParams::verhulst(1.0, -2.0).is_err());
        assert!(MapParams::verhulst(f64::INFINITY, 1.0).is_err());
        assert!(PrecisionPolicy::big_float(32).is_err());
        assert!(PrecisionPolicy::big_float(64).is_ok());
    }

    #[test]
    fn big_float_iteration_matches_double_on_dyadic_inputs() {
        // With dyadic parameters every product below 256 bits is exact, so
        // the rounded big-float view equals the double trajectory.
        let p = MapParams::verhulst(1.0, 1.0).unwrap();
        let d = iterate(&p, 0.5, 6, PrecisionPolicy::default()).unwrap();
        let b = iterate(&p, 0.5, 6, PrecisionPolicy::big_float(256).unwrap()).unwrap();
        for k in 0..=6 {
            assert_eq!(d.value(k), b.value(k), "state {k}");
        }
        assert!(b.big_values().is_some());
        assert!(b.values_f64().is_none());
    }

    #[test]
    fn orbit_streams_the_same_values() {
        let p = MapParams::x_form(2.5).unwrap();
        let t = iterate(&p, 0.2, 16, PrecisionPolicy::default()).unwrap();
        let streamed: Vec<f64> = orbit(&p, 0.2).take(17).collect();
        assert_eq!(t.values_f64().unwrap(), streamed.as_slice());
    }

    #[test]
    fn convergence_examples() {
        let p = MapParams::x_form(1.5).unwrap();
        let c = empirical_convergence(&p, 0.2, 1e-8, 10_000).unwrap();
        assert!(c.converged);
        assert!((c.limit_point - 1.0 / 3.0).abs() < 1e-8);

        let p = MapParams::x_form(2.5).unwrap();
        let c = empirical_convergence(&p, 0.9, 1e-8, 10_000).unwrap();
        assert!(c.converged);
        assert!((c.limit_point - 0.6).abs() < 1e-8);

        // Starting on the fixed point converges at step zero.
        let p = MapParams::x_form(2.9).unwrap();
        let c = empirical_convergence(&p, p.interior_fixed_point(), 1e-12, 1).unwrap();
        assert!(c.converged);
        assert_eq!(c.steps, 0);
    }

    #[test]
    fn convergence_domain_errors() {
        let p = MapParams::x_form(3.5).unwrap();
        assert!(empirical_convergence(&p, 0.5, 1e-8, 100).is_err());
        let p = MapParams::x_form(2.0).unwrap();
        assert!(empirical_convergence(&p, 1.5, 1e-8, 100).is_err());
        assert!(empirical_convergence(&p, 0.5, 0.0, 100).is_err());
    }

    #[test]
    fn convergence_not_reached_is_reported() {
        let p = MapParams::x_form(2.9).unwrap();
        let c = empirical_convergence(&p, 0.1, 1e-12, 3).unwrap();
        assert!(!c.converged);
        assert_eq!(c.steps, 3);
    }
}
