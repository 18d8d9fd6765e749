//! Dormand–Prince 5(4) stepper with continuous extension.
//!
//! The stepper only advances; callers drive the loop, inspect each accepted
//! [`Segment`] (for event location) and may reset the state between steps.

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

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Mixed absolute/relative error control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    dim: usize,
    /// Five coefficient blocks of length `dim`.
    coeffs: Vec<f64>,
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn theta(&self, t: f64) -> f64 {
        (t - self.t0) / self.h
    }

    /// Interpolated component `i` at `t`.
    pub fn component(&self, t: f64, i: usize) -> f64 {
        let th = self.theta(t);
        let n = self.dim;
        let r = |k: usize| self.coeffs[k * n + i];
        let th1 = 1.0 - th;
        r(0) + th * (r(1) + th1 * (r(2) + th * (r(3) + th1 * r(4))))
    }

    /// Time derivative of the interpolant of component `i` at `t`.
    pub fn component_derivative(&self, t: f64, i: usize) -> f64 {
        let th = self.theta(t);
        let n = self.dim;
        let r = |k: usize| self.coeffs[k * n + i];
        let a = r(2) + th * (r(3) + (1.0 - th) * r(4));
        let da = r(3) + (1.0 - 2.0 * th) * r(4);
        (r(1) + (1.0 - 2.0 * th) * a + th * (1.0 - th) * da) / self.h
    }

    pub fn state(&self, t: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = self.component(t, i);
        }
    }

    /// Scale the coefficients of the listed components (the interpolant is linear in them).
    pub fn scale_components(&mut self, idx: &[usize], factor: f64) {
        let n = self.dim;
        for k in 0..5 {
            for &i in idx {
                self.coeffs[k * n + i] *= factor;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Adaptive Dormand–Prince 5(4) integrator state.
pub struct Dopri5<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    rhs: F,
    t: f64,
    y: Vec<f64>,
    k: [Vec<f64>; 7],
    h: f64,
    tol: Tolerance,
    max_step: f64,
    err_prev: f64,
    pub stats: Stats,
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(mut rhs: F, t0: f64, y0: &[f64], tol: Tolerance) -> Self {
        let n = y0.len();
        let mut k: [Vec<f64>; 7] = Default::default();
        for ki in k.iter_mut() {
            *ki = vec![0.0; n];
        }
        rhs(t0, y0, &mut k[0]);
        let mut s = Self {
            rhs,
            t: t0,
            y: y0.to_vec(),
            k,
            h: 0.0,
            tol,
            max_step: f64::INFINITY,
            err_prev: 1e-4,
            stats: Stats {
                evaluations: 1,
                ..Default::default()
            },
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
        };
        s.h = s.initial_step();
        s
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self.h = self.h.min(h);
        self
    }

    /// Fix the step size (used for convergence-order studies).
    pub fn with_initial_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn dydt(&self) -> &[f64] {
        &self.k[0]
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Replace the current state (e.g. after rescaling); recomputes the FSAL derivative.
    pub fn set_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
        (self.rhs)(self.t, &self.y, &mut self.k[0]);
        self.stats.evaluations += 1;
    }

    fn err_scale(&self, i: usize, ynew: f64) -> f64 {
        self.tol.atol + self.tol.rtol * self.y[i].abs().max(ynew.abs())
    }

    fn initial_step(&mut self) -> f64 {
        let n = self.y.len();
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..n {
            let sc = self.tol.atol + self.tol.rtol * self.y[i].abs();
            d0 += (self.y[i] / sc).powi(2);
            d1 += (self.k[0][i] / sc).powi(2);
        }
        d0 = (d0 / n as f64).sqrt();
        d1 = (d1 / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        for i in 0..n {
            self.ytmp[i] = self.y[i] + h0 * self.k[0][i];
        }
        let mut f1 = vec![0.0; n];
        (self.rhs)(self.t + h0, &self.ytmp, &mut f1);
        self.stats.evaluations += 1;
        let mut d2 = 0.0;
        for i in 0..n {
            let sc = self.tol.atol + self.tol.rtol * self.y[i].abs();
            d2 += ((f1[i] - self.k[0][i]) / sc).powi(2);
        }
        d2 = (d2 / n as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }

    /// Take one accepted step, never passing `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<Segment> {
        let n = self.y.len();
        loop {
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.max_step);
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { r: self.t });
            }
            let t = self.t;
            let (k_head, k_tail) = self.k.split_at_mut(1);
            let k1 = &k_head[0];
            let [k2, k3, k4, k5, k6, k7] = k_tail else {
                unreachable!()
            };
            let y = &self.y;
            let yt = &mut self.ytmp;
            for i in 0..n {
                yt[i] = y[i] + h * A21 * k1[i];
            }
            (self.rhs)(t + C2 * h, yt, k2);
            for i in 0..n {
                yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            (self.rhs)(t + C3 * h, yt, k3);
            for i in 0..n {
                yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            (self.rhs)(t + C4 * h, yt, k4);
            for i in 0..n {
                yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            (self.rhs)(t + C5 * h, yt, k5);
            for i in 0..n {
                yt[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            (self.rhs)(t + h, yt, k6);
            let yn = &mut self.ynew;
            for i in 0..n {
                yn[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            (self.rhs)(t + h, yn, k7);
            self.stats.evaluations += 6;

            let mut err = 0.0;
            let mut finite = true;
            for i in 0..n {
                let ei = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                if !(ei.is_finite() && yn[i].is_finite()) {
                    finite = false;
                }
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(yn[i].abs());
                err += (ei / sc).powi(2);
            }
            let err = if finite {
                (err / n as f64).sqrt()
            } else {
                f64::INFINITY
            };

            if err <= 1.0 {
                let mut coeffs = vec![0.0; 5 * n];
                for i in 0..n {
                    let r1 = y[i];
                    let r2 = yn[i] - y[i];
                    let r3 = h * k1[i] - r2;
                    let r4 = r2 - h * k7[i] - r3;
                    let r5 = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                    coeffs[i] = r1;
                    coeffs[n + i] = r2;
                    coeffs[2 * n + i] = r3;
                    coeffs[3 * n + i] = r4;
                    coeffs[4 * n + i] = r5;
                }
                let seg = Segment {
                    t0: t,
                    h,
                    dim: n,
                    coeffs,
                };
                self.t = if last { t_limit } else { t + h };
                self.y.copy_from_slice(&self.ynew);
                let (a, b) = self.k.split_at_mut(6);
                a[0].copy_from_slice(&b[0]);
                self.stats.accepted += 1;
                // PI controller
                let fac = 0.9 * err.max(1e-10).powf(-0.17) * self.err_prev.powf(0.04);
                self.err_prev = err.max(1e-4);
                let fac = fac.clamp(0.2, 5.0);
                if !last || fac < 1.0 {
                    self.h = (h * fac).min(self.max_step);
                }
                return Ok(seg);
            }
            self.stats.rejected += 1;
            if !err.is_finite() {
                self.h = h * 0.1;
            } else {
                self.h = h * (0.9 * err.powf(-0.2)).max(0.2);
            }
            if self.h <= 1e-14 * self.t.abs().max(1.0) {
                return if finite {
                    Err(Error::StepUnderflow { r: self.t })
                } else {
                    Err(Error::NonFinite { r: self.t })
                };
            }
        }
    }

    /// Scale error reference helper exposed for diagnostics.
    pub fn error_scale(&self, i: usize) -> f64 {
        self.err_scale(i, self.y[i])
    }
}

/// Fixed-step driver: advance from `t0` to `t1` with `steps` equal steps of
/// the Dormand–Prince 5th-order formula (no error control).
pub fn dopri5_fixed<F>(rhs: F, t0: f64, t1: f64, y0: &[f64], steps: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let h = (t1 - t0) / steps as f64;
    let mut s = Dopri5::new(rhs, t0, y0, Tolerance::new(1e300, 1e300)).with_initial_step(h);
    for k in 0..steps {
        let target = if k + 1 == steps {
            t1
        } else {
            t0 + (k + 1) as f64 * h
        };
        s.h = target - s.t;
        s.step(target)?;
    }
    Ok(s.y.clone())
}
