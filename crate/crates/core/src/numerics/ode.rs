//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size real systems.
//!
//! The stepper keeps its state between calls so that a solution can be
//! sampled on an arbitrary monotone grid: call [`Dopri5::advance_to`] once per
//! grid point and read `y` back after each call.

use crate::error::NumericsError;

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

// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on |h|; `f64::INFINITY` for none.
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-300,
            max_steps: 5_000_000,
            max_step: f64::INFINITY,
        }
    }
}

pub struct Dopri5<const N: usize> {
    pub x: f64,
    pub y: [f64; N],
    h: f64,
    k1: Option<[f64; N]>,
    opts: OdeOptions,
    pub steps: usize,
    pub rejected: usize,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        for i in 0..N {
            out[i] += s * k[i];
        }
    }
    out
}

fn max_abs<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0f64, |m, a| m.max(a.abs()))
}

impl<const N: usize> Dopri5<N> {
    pub fn new(x0: f64, y0: [f64; N], h0: f64, opts: OdeOptions) -> Self {
        Self {
            x: x0,
            y: y0,
            h: h0.abs().max(1e-12),
            k1: None,
            opts,
            steps: 0,
            rejected: 0,
        }
    }

    /// Suggested magnitude of the next step.
    pub fn step_hint(&self) -> f64 {
        self.h
    }

    /// Integrate from the current position to `x_target` (either direction).
    pub fn advance_to<F>(&mut self, rhs: &mut F, x_target: f64) -> Result<(), NumericsError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let dir = if x_target >= self.x { 1.0 } else { -1.0 };
        if x_target == self.x {
            return Ok(());
        }
        let mut k1 = match self.k1 {
            Some(k) => k,
            None => rhs(self.x, &self.y),
        };
        loop {
            let remaining = (x_target - self.x).abs();
            if remaining <= 1e-15 * self.x.abs().max(1.0) {
                self.x = x_target;
                break;
            }
            if self.steps + self.rejected > self.opts.max_steps {
                return Err(NumericsError::TooManySteps { x: self.x });
            }
            let mut h_abs = self.h.min(self.opts.max_step);
            let last = h_abs >= remaining;
            if last {
                h_abs = remaining;
            }
            if h_abs < 1e-14 * self.x.abs().max(1.0) {
                return Err(NumericsError::StepUnderflow { x: self.x });
            }
            let h = dir * h_abs;
            let x = self.x;
            let y = &self.y;
            let k2 = rhs(x + C2 * h, &axpy(y, &[(A21, &k1)], h));
            let k3 = rhs(x + C3 * h, &axpy(y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = rhs(
                x + C4 * h,
                &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
            );
            let k5 = rhs(
                x + C5 * h,
                &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = rhs(
                x + h,
                &axpy(
                    y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    h,
                ),
            );
            let y_new = axpy(
                y,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                h,
            );
            let x_new = if last { x_target } else { x + h };
            let k7 = rhs(x_new, &y_new);

            let scale = self.opts.atol
                + self.opts.rtol * max_abs(&self.y).max(max_abs(&y_new));
            let mut err = 0.0f64;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                err = err.max(e.abs() / scale);
            }
            if !err.is_finite() {
                self.rejected += 1;
                self.h = h_abs * 0.1;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                self.x = x_new;
                self.y = y_new;
                k1 = k7;
                self.steps += 1;
                // a truncated final step says nothing about the natural step size
                if !last || factor < 1.0 {
                    self.h = h_abs * factor;
                }
            } else {
                self.rejected += 1;
                self.h = h_abs * factor.min(1.0);
            }
        }
        self.k1 = Some(k1);
        Ok(())
    }
}

/// One-shot integration from `x0` to `x1`.
pub fn integrate<const N: usize, F>(
    rhs: &mut F,
    x0: f64,
    y0: [f64; N],
    x1: f64,
    opts: OdeOptions,
) -> Result<[f64; N], NumericsError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let h0 = ((x1 - x0).abs() * 1e-3).max(1e-6);
    let mut s = Dopri5::new(x0, y0, h0, opts);
    s.advance_to(rhs, x1)?;
    Ok(s.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_tight_tolerance() {
        let mut rhs = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let opts = OdeOptions { rtol: 1e-12, ..Default::default() };
        let y = integrate(&mut rhs, 0.0, [0.0, 1.0], 20.0, opts).unwrap();
        assert!((y[0] - 20f64.sin()).abs() < 1e-9);
        assert!((y[1] - 20f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn backwards_and_segmented() {
        let mut rhs = |_x: f64, y: &[f64; 1]| [y[0]];
        let mut s = Dopri5::new(2.0, [2f64.exp()], 0.1, OdeOptions::default());
        for k in (0..20).rev() {
            let x = k as f64 * 0.1;
            s.advance_to(&mut rhs, x).unwrap();
            assert!((s.y[0] - x.exp()).abs() < 1e-9 * x.exp());
        }
    }

    #[test]
    fn fifth_order_convergence_on_fixed_steps() {
        // error per unit length falls by ~32 when the step is halved
        let run = |h: f64| {
            let opts = OdeOptions { max_step: h, rtol: 1.0, atol: 1.0, ..Default::default() };
            let mut rhs = |x: f64, y: &[f64; 1]| [x.cos() * y[0]];
            let y = integrate(&mut rhs, 0.0, [1.0], 2.0, opts).unwrap();
            (y[0] - 2f64.sin().exp()).abs()
        };
        let r = run(0.2) / run(0.1);
        assert!(r > 20.0 && r < 48.0, "ratio {r}");
    }
}
