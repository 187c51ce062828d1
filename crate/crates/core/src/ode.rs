//! Adaptive embedded Runge-Kutta 5(4) integration (Dormand-Prince) for
//! scalar autonomous right-hand sides, with fourth-order dense output.
//!
//! The scalar specialization is deliberate: every flow in this crate is a
//! one-dimensional autonomous ODE, and a scalar kernel keeps the stepper,
//! the dense interpolant, and the event location easy to audit.

use crate::error::{Error, Result};

// Dormand-Prince 5(4) tableau. Stage times are not needed: every
// right-hand side here is autonomous.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights are row 7 of A; the error weights below are b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with its quartic interpolant.
#[derive(Clone, Copy, Debug)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    pub y0: f64,
    pub y1: f64,
    rcont: [f64; 5],
}

impl DenseStep {
    /// Value at `t` within `[t0, t1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let h = self.t1 - self.t0;
        let s = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let s1 = 1.0 - s;
        self.rcont[0]
            + s * (self.rcont[1] + s1 * (self.rcont[2] + s * (self.rcont[3] + s1 * self.rcont[4])))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Stop early once the solution exceeds this value with positive slope.
    pub ceiling: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOutcome {
    pub t: f64,
    pub y: f64,
    pub steps: usize,
    pub rejected: usize,
    /// Set when the ceiling was crossed: the located crossing time.
    pub ceiling_crossing: Option<f64>,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rel_tol: 1e-10, abs_tol: 1e-12, max_steps: 10_000_000, ceiling: None }
    }
}

impl Dopri5 {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Result<Dopri5> {
        if !(rel_tol > 0.0 && abs_tol > 0.0) {
            return Err(Error::domain(format!(
                "tolerances must be positive, got rel_tol = {rel_tol}, abs_tol = {abs_tol}"
            )));
        }
        Ok(Dopri5 { rel_tol, abs_tol, ..Dopri5::default() })
    }

    /// Integrate `y' = f(y)` from `(0, y0)` to `t_end`, invoking `on_step`
    /// for every accepted step (including a final partial step when the
    /// ceiling is crossed).
    pub fn solve<F, S>(&self, f: F, y0: f64, t_end: f64, mut on_step: S) -> Result<SolveOutcome>
    where
        F: Fn(f64) -> f64,
        S: FnMut(&DenseStep),
    {
        if !(t_end > 0.0) {
            return Err(Error::domain(format!("integration horizon must be positive, got {t_end}")));
        }
        let mut t = 0.0f64;
        let mut y = y0;
        let mut dy = f(y);
        let mut h = self.initial_step(y0, dy, t_end);
        let mut steps = 0usize;
        let mut rejected = 0usize;
        let mut k = [0.0f64; 7];

        while t < t_end {
            if steps + rejected >= self.max_steps {
                return Err(Error::Numerical(format!(
                    "integration exceeded {} steps at t = {t}",
                    self.max_steps
                )));
            }
            if h < f64::EPSILON * t.max(1.0) * 16.0 {
                return Err(Error::StepSizeCollapse { t, lambda: y });
            }
            if t + h > t_end {
                h = t_end - t;
            }

            k[0] = dy;
            for i in 1..7 {
                let mut yi = y;
                for j in 0..i {
                    yi += h * A[i][j] * k[j];
                }
                k[i] = f(yi);
            }
            // Row 7 of A holds the fifth-order weights, so k[6] is already
            // f(y_new); the dense output and the FSAL update reuse it.
            let mut y_new = y;
            for j in 0..6 {
                y_new += h * A[6][j] * k[j];
            }
            let mut err_est = 0.0;
            for j in 0..7 {
                err_est += E[j] * k[j];
            }
            err_est *= h;
            let scale = self.abs_tol + self.rel_tol * y.abs().max(y_new.abs());
            let err = (err_est / scale).abs();

            if err <= 1.0 {
                // Accept.
                let dy_new = k[6]; // f at (t+h, y_new) by construction
                let step = self.dense_step(t, h, y, y_new, &k);
                let mut crossing = None;
                if let Some(ceiling) = self.ceiling {
                    if y_new >= ceiling && f(y_new) > 0.0 {
                        crossing = Some(locate_crossing(&step, ceiling));
                    }
                }
                on_step(&step);
                steps += 1;
                t += h;
                y = y_new;
                dy = dy_new;
                if let Some(tc) = crossing {
                    return Ok(SolveOutcome {
                        t,
                        y,
                        steps,
                        rejected,
                        ceiling_crossing: Some(tc),
                    });
                }
            } else {
                rejected += 1;
            }
            let grow = 0.9 * err.powf(-0.2);
            let grow = if err <= 1.0 { grow.clamp(0.2, 10.0) } else { grow.clamp(0.2, 1.0) };
            h *= grow;
        }
        Ok(SolveOutcome { t, y, steps, rejected, ceiling_crossing: None })
    }

    fn initial_step(&self, y0: f64, dy0: f64, t_end: f64) -> f64 {
        let d0 = y0.abs() + self.abs_tol;
        let d1 = dy0.abs() + self.abs_tol;
        (0.01 * d0 / d1).clamp(1e-10, t_end)
    }

    fn dense_step(&self, t: f64, h: f64, y: f64, y_new: f64, k: &[f64; 7]) -> DenseStep {
        let ydiff = y_new - y;
        let bspl = h * k[0] - ydiff;
        let mut cont4 = 0.0;
        for j in 0..7 {
            cont4 += D[j] * k[j];
        }
        DenseStep {
            t0: t,
            t1: t + h,
            y0: y,
            y1: y_new,
            rcont: [y, ydiff, bspl, ydiff - h * k[6] - bspl, h * cont4],
        }
    }
}

/// Bisect the dense interpolant for the time where it reaches `level`
/// (monotone step assumed, `y1 >= level`).
fn locate_crossing(step: &DenseStep, level: f64) -> f64 {
    if step.y0 >= level {
        return step.t0;
    }
    let (mut lo, mut hi) = (step.t0, step.t1);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if step.eval(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_quadratic_decay_to_closed_form() {
        // y' = -y^2, y(0) = 1 has y(t) = 1/(1+t).
        let solver = Dopri5::new(1e-10, 1e-12).unwrap();
        let out = solver.solve(|y| -y * y, 1.0, 50.0, |_| {}).unwrap();
        let exact = 1.0 / 51.0;
        assert!(((out.y - exact) / exact).abs() < 1e-10, "rel err {}", (out.y - exact) / exact);
    }

    #[test]
    fn dense_output_is_accurate_inside_steps() {
        let solver = Dopri5::new(1e-10, 1e-12).unwrap();
        let mut max_rel: f64 = 0.0;
        solver
            .solve(
                |y| -y * y,
                1.0,
                20.0,
                |step| {
                    for i in 1..8 {
                        let t = step.t0 + (step.t1 - step.t0) * i as f64 / 8.0;
                        let exact = 1.0 / (1.0 + t);
                        max_rel = max_rel.max(((step.eval(t) - exact) / exact).abs());
                    }
                },
            )
            .unwrap();
        assert!(max_rel < 1e-9, "dense interpolation rel err {max_rel}");
    }

    #[test]
    fn ceiling_crossing_is_located() {
        // y' = y^3, y(0) = 1 blows up at t = 1/2; y(t) = (1-2t)^(-1/2).
        let solver = Dopri5 { ceiling: Some(1e6), ..Dopri5::new(1e-10, 1e-12).unwrap() };
        let out = solver.solve(|y| y * y * y, 1.0, 10.0, |_| {}).unwrap();
        let tc = out.ceiling_crossing.expect("ceiling crossed");
        // Crossing of 1e6 happens at t = (1 - 1e-12)/2.
        assert!((tc - 0.5).abs() < 1e-9);
        assert!(out.y >= 1e6);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Dopri5::new(0.0, 1e-9).is_err());
        let solver = Dopri5::default();
        assert!(solver.solve(|y| y, 1.0, 0.0, |_| {}).is_err());
    }

    #[test]
    fn final_time_is_exact() {
        let solver = Dopri5::new(1e-8, 1e-10).unwrap();
        let out = solver.solve(|y| -y, 1.0, 3.0, |_| {}).unwrap();
        assert_eq!(out.t, 3.0);
        assert!((out.y - (-3.0f64).exp()).abs() < 1e-8);
    }
}
