//! Embedded Dormand-Prince 5(4) integrator with PI step-size control.
//!
//! The radial equation has a removable singularity at r = 0 which callers
//! handle with a series start, so the integrator itself only ever sees
//! strictly positive radii.

/// Butcher tableau for the Dormand-Prince 5(4) pair.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// 5th-order minus 4th-order weights (error estimator).
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Reached,
    /// The guard predicate fired; payload is the localized abscissa.
    GuardTripped(f64),
}

#[derive(Debug, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted after {steps} steps at t = {t}")]
    StepBudget { t: f64, steps: usize },
}

pub struct Dopri5 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

fn axpy2(out: &mut [f64; 2], base: &[f64; 2], h: f64, ks: &[[f64; 2]; 7], row: &[f64; 6]) {
    for d in 0..2 {
        let mut acc = 0.0;
        for (j, &a) in row.iter().enumerate() {
            if a != 0.0 {
                acc += a * ks[j][d];
            }
        }
        out[d] = base[d] + h * acc;
    }
}

impl Dopri5 {
    /// Integrate dy/dt = rhs(t, y), 2-dimensional state, from (t0, y0) to t1.
    ///
    /// `guard` is checked after every accepted step; if it returns true the
    /// integration stops and the crossing abscissa is localized by bisection
    /// to 1e-6 relative. The state at the stop point is left in `y0`.
    pub fn integrate_to<R, G>(
        &self,
        rhs: &R,
        t0: f64,
        y0: &mut [f64; 2],
        t1: f64,
        guard: &G,
        steps_used: &mut usize,
    ) -> Result<StepOutcome, OdeError>
    where
        R: Fn(f64, &[f64; 2]) -> [f64; 2],
        G: Fn(f64, &[f64; 2]) -> bool,
    {
        let mut t = t0;
        let mut y = *y0;
        let dir = (t1 - t0).signum();
        if dir == 0.0 {
            return Ok(StepOutcome::Reached);
        }
        let mut h = ((t1 - t0).abs() * 1e-2).min(1e-2 * (1.0 + t0.abs())) * dir;
        let mut k = [[0.0_f64; 2]; 7];
        k[0] = rhs(t, &y);
        let mut err_prev: f64 = 1.0;

        while (t1 - t) * dir > 0.0 {
            if *steps_used >= self.max_steps {
                return Err(OdeError::StepBudget {
                    t,
                    steps: *steps_used,
                });
            }
            if (t + h - t1) * dir > 0.0 {
                h = t1 - t;
            }
            if h.abs() < 1e2 * f64::EPSILON * (1.0 + t.abs()) {
                return Err(OdeError::StepUnderflow { t });
            }

            let mut ytmp = [0.0_f64; 2];
            for s in 0..6 {
                axpy2(&mut ytmp, &y, h, &k, &A[s]);
                k[s + 1] = rhs(t + C[s] * h, &ytmp);
            }
            // 5th-order solution is stage 6 input (FSAL structure)
            let ynew = ytmp;

            let mut err = 0.0_f64;
            for d in 0..2 {
                let mut e = 0.0;
                for (j, &w) in E.iter().enumerate() {
                    e += w * k[j][d];
                }
                let sc = self.abs_tol + self.rel_tol * y[d].abs().max(ynew[d].abs());
                err += (h * e / sc).powi(2);
            }
            err = (err / 2.0).sqrt().max(1e-30);

            *steps_used += 1;
            if err <= 1.0 {
                let t_old = t;
                let y_old = y;
                t += h;
                y = ynew;
                k[0] = k[6]; // FSAL
                if guard(t, &y) {
                    let tc = self.localize_guard(rhs, t_old, &y_old, t, guard);
                    *y0 = y;
                    return Ok(StepOutcome::GuardTripped(tc));
                }
                // PI controller (0.7/0.4 exponents over order 5)
                let fac = 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                h *= fac.clamp(0.2, 5.0);
                err_prev = err;
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                k[0] = rhs(t, &y);
            }
        }
        *y0 = y;
        Ok(StepOutcome::Reached)
    }

    /// Bisect the guard crossing inside one accepted step to 1e-6 relative.
    fn localize_guard<R, G>(&self, rhs: &R, t_lo: f64, y_lo: &[f64; 2], t_hi: f64, guard: &G) -> f64
    where
        R: Fn(f64, &[f64; 2]) -> [f64; 2],
        G: Fn(f64, &[f64; 2]) -> bool,
    {
        let mut lo = t_lo;
        let mut hi = t_hi;
        let mut y_base = *y_lo;
        let mut t_base = t_lo;
        for _ in 0..60 {
            if (hi - lo).abs() <= 1e-6 * hi.abs().max(1e-30) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let mut y = y_base;
            let mut dummy = 0usize;
            let inner = Dopri5 {
                rel_tol: self.rel_tol,
                abs_tol: self.abs_tol,
                max_steps: 10_000,
            };
            let nop = |_: f64, _: &[f64; 2]| false;
            if inner
                .integrate_to(rhs, t_base, &mut y, mid, &nop, &mut dummy)
                .is_err()
            {
                break;
            }
            if guard(mid, &y) {
                hi = mid;
            } else {
                lo = mid;
                y_base = y;
                t_base = mid;
            }
        }
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_energy() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let solver = Dopri5 {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
        };
        let mut y = [1.0, 0.0];
        let mut n = 0;
        let nop = |_: f64, _: &[f64; 2]| false;
        solver
            .integrate_to(&rhs, 0.0, &mut y, 20.0 * std::f64::consts::PI, &nop, &mut n)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-7, "y0={} after {} steps", y[0], n);
        assert!(y[1].abs() < 1e-7);
    }

    #[test]
    fn guard_localization() {
        // y' = y, guard at y = e^2: crossing at t = 2
        let rhs = |_t: f64, y: &[f64; 2]| [y[0], 0.0];
        let solver = Dopri5::default();
        let mut y = [1.0, 0.0];
        let mut n = 0;
        let thr = (2.0_f64).exp();
        let guard = move |_: f64, y: &[f64; 2]| y[0] > thr;
        match solver
            .integrate_to(&rhs, 0.0, &mut y, 10.0, &guard, &mut n)
            .unwrap()
        {
            StepOutcome::GuardTripped(tc) => assert!((tc - 2.0).abs() < 1e-5, "tc={tc}"),
            StepOutcome::Reached => panic!("guard missed"),
        }
    }
}
