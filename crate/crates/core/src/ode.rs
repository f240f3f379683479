//! Scalar Dormand-Prince 5(4) integrator with embedded error control.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive integrator for `y' = f(x, y)` with scalar state.
///
/// The step size is carried between calls to [`Dopri5::advance`] so a
/// solution can be marched through a sequence of output points cheaply.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    pub h_max: f64,
    pub max_steps: usize,
    h: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl Dopri5 {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Dopri5 {
            atol,
            rtol,
            h_max: f64::INFINITY,
            max_steps: 200_000,
            h: 0.0,
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// Integrate from `(x0, y0)` to `x1`, landing exactly on `x1`.
    pub fn advance<F: Fn(f64, f64) -> f64>(&mut self, f: &F, x0: f64, y0: f64, x1: f64) -> Result<f64> {
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, y);
        if self.h == 0.0 {
            self.h = (0.01 * span.abs()).min(self.h_max).max(1e-6);
        }
        let mut steps = 0usize;
        while (x1 - x) * dir > 0.0 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Numerical(format!(
                    "Dormand-Prince exceeded {} steps between x = {x0} and x = {x1}",
                    self.max_steps
                )));
            }
            let mut h = self.h.abs().min(self.h_max);
            let remaining = (x1 - x).abs();
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = dir * h;
            let k2 = f(x + C2 * hs, y + hs * A21 * k1);
            let k3 = f(x + C3 * hs, y + hs * (A31 * k1 + A32 * k2));
            let k4 = f(x + C4 * hs, y + hs * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = f(x + C5 * hs, y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
            let k6 = f(
                x + hs,
                y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            );
            let y_new = y + hs * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
            let k7 = f(x + hs, y_new);
            let err_abs = (hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
            let scale = self.atol + self.rtol * y.abs().max(y_new.abs());
            let err = err_abs / scale;
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite state at x = {x}")));
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                self.accepted += 1;
                x = if last { x1 } else { x + hs };
                y = y_new;
                k1 = k7;
                // do not let a short final step shrink the carried step size
                if !last {
                    self.h = h * factor;
                } else {
                    self.h = self.h.max(h * factor);
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
                if self.h < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::Numerical(format!("step size underflow at x = {x}")));
                }
            }
        }
        Ok(y)
    }
}
