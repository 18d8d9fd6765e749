//! The radial equation `u″ + (N−1)/r·u′ + g(u) = 0` and its variation
//! `δ″ + (N−1)/r·δ′ + g′(u)δ = 0`, integrated from the origin with events.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite;
use crate::nonlinearity::SemilinearModel;
use crate::ode::{Dopri5, Segment, Tolerance};
use crate::roots::brent;

/// Magnitude at which the variation channel is rescaled.
pub const DELTA_GUARD: f64 = 1e12;
const EVENT_XTOL: f64 = 1e-13;
const INTERIOR_SAMPLES: usize = 5;

#[derive(Debug, Clone)]
pub struct RadialProblem {
    pub dim: usize,
    pub model: SemilinearModel,
}

impl RadialProblem {
    pub fn new(dim: usize, model: SemilinearModel) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Precondition(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        Ok(Self { dim, model })
    }

    /// `√(−g′(0))`, the exponential decay rate of ground states.
    pub fn decay_scale(&self) -> f64 {
        let gp0 = self.model.g_prime(0.0);
        if gp0 < 0.0 {
            (-gp0).sqrt()
        } else {
            1.0
        }
    }

    pub fn default_r_max(&self) -> f64 {
        30.0 / self.decay_scale()
    }

    /// Starting radius for the Taylor expansion at the origin.
    pub fn start_radius(&self) -> f64 {
        let gp0 = self.model.g_prime(0.0).abs();
        let inv = if gp0 > 0.0 { 1.0 / gp0.sqrt() } else { 0.0 };
        1e-6 * (1.0 + inv)
    }

    /// Quadratic Taylor data `(u, u′, δ, δ′)` at small `r`.
    pub fn taylor(&self, d: f64, r: f64) -> [f64; 4] {
        let n = self.dim as f64;
        let g = self.model.g(d);
        let gp = self.model.g_prime(d);
        [
            d - g * r * r / (2.0 * n),
            -g * r / n,
            1.0 - gp * r * r / (2.0 * n),
            -gp * r / n,
        ]
    }

    pub fn energy(&self, u: f64, up: f64) -> f64 {
        0.5 * up * up + self.model.g_anti(u)
    }
}

/// When to end an integration besides reaching `r_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopPolicy {
    /// Stop at the first zero of `u`.
    AtZero,
    /// Also stop at the first certificate of staying positive: `E < −margin`,
    /// or `u′ = 0` with `u` strictly inside `(0, b)`.
    AtCertificate { b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub r_max: f64,
    pub tol: f64,
    pub with_variation: bool,
    pub stop: StopPolicy,
    pub energy_margin: f64,
    /// Overrides the default starting radius.
    pub r0: Option<f64>,
}

impl IntegrateOptions {
    pub fn new(r_max: f64, tol: f64, with_variation: bool) -> Self {
        Self {
            r_max,
            tol,
            with_variation,
            stop: StopPolicy::AtZero,
            energy_margin: 1e-12,
            r0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    UZero { r: f64, u_prime: f64 },
    UPrimeZero { r: f64, u: f64 },
    DeltaZero { r: f64 },
    EnergyNegative { r: f64, energy: f64 },
}

impl Event {
    pub fn r(&self) -> f64 {
        match *self {
            Event::UZero { r, .. }
            | Event::UPrimeZero { r, .. }
            | Event::DeltaZero { r }
            | Event::EnergyNegative { r, .. } => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndReason {
    UZero { r: f64 },
    Certificate { r: f64 },
    RMax { r: f64 },
}

/// Values of all channels at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub r: f64,
    pub u: f64,
    pub u_prime: f64,
    pub delta: Option<f64>,
    pub delta_prime: Option<f64>,
    pub energy: f64,
}

/// A dense record of one shot.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub problem: RadialProblem,
    pub d: f64,
    pub tol: f64,
    pub with_variation: bool,
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub u_prime: Vec<f64>,
    /// True variation values; may overflow to ±∞ in extreme tails (see `delta_log_abs`).
    pub delta: Vec<f64>,
    pub delta_prime: Vec<f64>,
    /// `ln|δ|` at the nodes, finite even when `delta` is not.
    pub delta_log_abs: Vec<f64>,
    pub energy: Vec<f64>,
    pub events: Vec<Event>,
    pub end: EndReason,
    segments: Vec<Segment>,
    /// Natural-log scale applied to the variation channel of each segment.
    seg_scale: Vec<f64>,
}

fn rhs(problem: &RadialProblem, with_variation: bool) -> impl FnMut(f64, &[f64], &mut [f64]) + '_ {
    let k = (problem.dim - 1) as f64;
    move |r, y, dy| {
        let u = y[0];
        let up = y[1];
        dy[0] = up;
        dy[1] = -k / r * up - problem.model.g(u);
        if with_variation {
            dy[2] = y[3];
            dy[3] = -k / r * y[3] - problem.model.g_prime(u) * y[2];
        }
    }
}

/// First point in `[a, b]` where `f` changes sign (zero counts as non-negative),
/// refined on the dense output.
fn first_crossing<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Option<f64> {
    let neg = |v: f64| v < 0.0;
    let mut ta = a;
    let mut fa = f(a);
    for k in 1..=INTERIOR_SAMPLES {
        let tb = if k == INTERIOR_SAMPLES {
            b
        } else {
            a + (b - a) * k as f64 / INTERIOR_SAMPLES as f64
        };
        let fb = f(tb);
        if neg(fa) != neg(fb) {
            if fb == 0.0 {
                return Some(tb);
            }
            return brent(&f, ta, tb, EVENT_XTOL).ok();
        }
        ta = tb;
        fa = fb;
    }
    None
}

/// Integrate with the default stop policy (first zero of `u`).
pub fn integrate(
    problem: &RadialProblem,
    d: f64,
    r_max: f64,
    tol: f64,
    with_variation: bool,
) -> Result<Trajectory> {
    integrate_with(
        problem,
        d,
        &IntegrateOptions::new(r_max, tol, with_variation),
    )
}

pub fn integrate_with(
    problem: &RadialProblem,
    d: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Precondition(format!(
            "initial height must be positive, got {d}"
        )));
    }
    if !(opts.tol > 1e-14 && opts.tol < 1e-3) {
        return Err(Error::Domain {
            what: "tol",
            value: opts.tol,
            domain: "(1e-14, 1e-3)".into(),
        });
    }
    let r0 = opts.r0.unwrap_or_else(|| problem.start_radius());
    if !(opts.r_max > r0) {
        return Err(Error::Domain {
            what: "r_max",
            value: opts.r_max,
            domain: format!("({r0}, inf)"),
        });
    }
    let with_var = opts.with_variation;
    let dim = if with_var { 4 } else { 2 };
    let t = problem.taylor(d, r0);
    let y0 = &t[..dim];
    let atol = opts.tol * 1e-6 * d.min(1.0);
    let max_step = 0.5 / problem.decay_scale();
    let mut solver = Dopri5::new(
        rhs(problem, with_var),
        r0,
        y0,
        Tolerance::new(opts.tol, atol),
    )
    .with_max_step(max_step);

    let mut traj = Trajectory {
        problem: problem.clone(),
        d,
        tol: opts.tol,
        with_variation: with_var,
        nodes: vec![r0],
        u: vec![t[0]],
        u_prime: vec![t[1]],
        delta: vec![if with_var { t[2] } else { f64::NAN }],
        delta_prime: vec![if with_var { t[3] } else { f64::NAN }],
        delta_log_abs: vec![if with_var { t[2].abs().ln() } else { f64::NAN }],
        energy: vec![problem.energy(t[0], t[1])],
        events: Vec::new(),
        end: EndReason::RMax { r: opts.r_max },
        segments: Vec::new(),
        seg_scale: Vec::new(),
    };

    let margin = opts.energy_margin;
    let mut energy_flagged = false;
    if traj.energy[0] < -margin {
        traj.events.push(Event::EnergyNegative {
            r: r0,
            energy: traj.energy[0],
        });
        energy_flagged = true;
        if let StopPolicy::AtCertificate { .. } = opts.stop {
            traj.end = EndReason::Certificate { r: r0 };
            return Ok(traj);
        }
    }

    let mut ln_scale = 0.0;
    let mut buf = vec![0.0; dim];
    loop {
        let seg = solver.step(opts.r_max)?;
        let (a, b) = (seg.t0, seg.t1());
        let energy_at = |r: f64| problem.energy(seg.component(r, 0), seg.component(r, 1));

        let mut found: Vec<Event> = Vec::new();
        let mut stop_at: Option<(f64, bool)> = None;
        if let Some(r) = first_crossing(|r| seg.component(r, 0), a, b) {
            found.push(Event::UZero {
                r,
                u_prime: seg.component(r, 1),
            });
            stop_at = Some((r, true));
        }
        // u′ may vanish more than once within a step only in pathological cases; scan subintervals.
        let mut lo = a;
        while let Some(r) = first_crossing(|r| seg.component(r, 1), lo, b) {
            found.push(Event::UPrimeZero {
                r,
                u: seg.component(r, 0),
            });
            if r >= b {
                break;
            }
            lo = r + EVENT_XTOL.max(1e-9 * (b - a));
            if lo >= b {
                break;
            }
        }
        if with_var {
            let mut lo = a;
            while let Some(r) = first_crossing(|r| seg.component(r, 2), lo, b) {
                found.push(Event::DeltaZero { r });
                lo = r + EVENT_XTOL.max(1e-9 * (b - a));
                if lo >= b {
                    break;
                }
            }
        }
        if !energy_flagged {
            if let Some(r) = first_crossing(|r| energy_at(r) + margin, a, b) {
                found.push(Event::EnergyNegative {
                    r,
                    energy: energy_at(r),
                });
                energy_flagged = true;
            }
        }
        found.sort_by(|x, y| x.r().total_cmp(&y.r()));

        if let StopPolicy::AtCertificate { b: bb } = opts.stop {
            for ev in &found {
                let cert = match *ev {
                    Event::EnergyNegative { .. } => true,
                    Event::UPrimeZero { u, .. } => u > 1e-12 && u < bb - 1e-12,
                    _ => false,
                };
                if cert && stop_at.is_none_or(|(r, _)| ev.r() < r) {
                    stop_at = Some((ev.r(), false));
                }
            }
        }

        let end_r = stop_at.map_or(b, |(r, _)| r);
        traj.events
            .extend(found.into_iter().filter(|e| e.r() <= end_r));

        seg.state(end_r, &mut buf);
        if buf.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { r: end_r });
        }
        traj.push_node(end_r, &buf, ln_scale);
        traj.segments.push(seg);
        traj.seg_scale.push(ln_scale);

        if let Some((r, is_zero)) = stop_at {
            traj.end = if is_zero {
                EndReason::UZero { r }
            } else {
                EndReason::Certificate { r }
            };
            break;
        }
        if b >= opts.r_max {
            traj.end = EndReason::RMax { r: b };
            break;
        }
        if with_var && (buf[2].abs() > DELTA_GUARD || buf[3].abs() > DELTA_GUARD) {
            let mut y = solver.y().to_vec();
            y[2] /= DELTA_GUARD;
            y[3] /= DELTA_GUARD;
            ln_scale += DELTA_GUARD.ln();
            solver.set_state(&y);
        }
    }
    Ok(traj)
}

impl Trajectory {
    fn push_node(&mut self, r: f64, y: &[f64], ln_scale: f64) {
        self.nodes.push(r);
        self.u.push(y[0]);
        self.u_prime.push(y[1]);
        self.energy.push(self.problem.energy(y[0], y[1]));
        if self.with_variation {
            let f = ln_scale.exp();
            self.delta.push(y[2] * f);
            self.delta_prime.push(y[3] * f);
            self.delta_log_abs.push(y[2].abs().ln() + ln_scale);
        } else {
            self.delta.push(f64::NAN);
            self.delta_prime.push(f64::NAN);
            self.delta_log_abs.push(f64::NAN);
        }
    }

    pub fn r0(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Location of the zero of `u` that ended the shot, if any.
    pub fn u_zero(&self) -> Option<f64> {
        match self.end {
            EndReason::UZero { r } => Some(r),
            _ => None,
        }
    }

    pub fn delta_zeros(&self) -> Vec<f64> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::DeltaZero { r } => Some(*r),
                _ => None,
            })
            .collect()
    }

    fn segment_index(&self, r: f64) -> usize {
        // segments[i] spans nodes[i]..nodes[i+1]
        let i = self.nodes.partition_point(|&x| x <= r);
        i.saturating_sub(1)
            .min(self.segments.len().saturating_sub(1))
    }

    fn check_range(&self, r: f64) -> Result<()> {
        if !(r >= self.r0() && r <= self.r_end()) {
            return Err(Error::Domain {
                what: "r",
                value: r,
                domain: format!("[{}, {}]", self.r0(), self.r_end()),
            });
        }
        Ok(())
    }

    /// `(u, u′)` from the dense output; the caller guarantees `r` is in range.
    pub fn u_at(&self, r: f64) -> (f64, f64) {
        if self.segments.is_empty() || r <= self.r0() {
            return (self.u[0], self.u_prime[0]);
        }
        let i = self.segment_index(r);
        if r == self.nodes[i + 1] {
            return (self.u[i + 1], self.u_prime[i + 1]);
        }
        let s = &self.segments[i];
        (s.component(r, 0), s.component(r, 1))
    }

    fn u_second_node(&self, i: usize) -> f64 {
        let r = self.nodes[i];
        -(self.problem.dim as f64 - 1.0) / r * self.u_prime[i] - self.problem.model.g(self.u[i])
    }

    /// `(u, u′, u″)` from the quintic Hermite interpolant of the node data,
    /// with `u″` at the nodes taken from the equation itself.
    pub fn u_hermite(&self, r: f64) -> [f64; 3] {
        if self.segments.is_empty() || r <= self.r0() {
            return [self.u[0], self.u_prime[0], self.u_second_node(0)];
        }
        let i = self.segment_index(r);
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let left = [self.u[i], self.u_prime[i], self.u_second_node(i)];
        let right = [
            self.u[i + 1],
            self.u_prime[i + 1],
            self.u_second_node(i + 1),
        ];
        hermite::quintic(a, b - a, left, right, r)
    }

    /// `u″` from differentiating the dense `u′` interpolant of the integrator.
    pub fn dense_u_second(&self, r: f64) -> f64 {
        if self.segments.is_empty() {
            return self.u_second_node(0);
        }
        let i = self.segment_index(r);
        self.segments[i].component_derivative(r, 1)
    }

    pub fn u_second_at(&self, r: f64) -> f64 {
        self.u_hermite(r)[2]
    }

    /// `(δ, δ′)` from the dense output.
    pub fn delta_at(&self, r: f64) -> (f64, f64) {
        if self.segments.is_empty() || r <= self.r0() {
            return (self.delta[0], self.delta_prime[0]);
        }
        let i = self.segment_index(r);
        if r == self.nodes[i + 1] {
            return (self.delta[i + 1], self.delta_prime[i + 1]);
        }
        let s = &self.segments[i];
        let f = self.seg_scale[i].exp();
        (s.component(r, 2) * f, s.component(r, 3) * f)
    }

    pub fn sample(&self, r: f64) -> Result<Sample> {
        self.check_range(r)?;
        let (u, up) = self.u_at(r);
        let (delta, delta_prime) = if self.with_variation {
            let (a, b) = self.delta_at(r);
            (Some(a), Some(b))
        } else {
            (None, None)
        };
        let energy = if let Some(i) = self.nodes.iter().position(|&x| x == r) {
            self.energy[i]
        } else {
            self.problem.energy(u, up)
        };
        Ok(Sample {
            r,
            u,
            u_prime: up,
            delta,
            delta_prime,
            energy,
        })
    }

    /// CSV with columns `r,u,u_prime,delta,delta_prime,energy` at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u,u_prime,delta,delta_prime,energy\n");
        for i in 0..self.nodes.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.nodes[i],
                self.u[i],
                self.u_prime[i],
                self.delta[i],
                self.delta_prime[i],
                self.energy[i]
            ));
        }
        out
    }

    pub fn events_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.events).unwrap_or(serde_json::Value::Null)
    }
}

/// Free-function form of [`Trajectory::sample`].
pub fn sample(trajectory: &Trajectory, r: f64) -> Result<Sample> {
    trajectory.sample(r)
}
