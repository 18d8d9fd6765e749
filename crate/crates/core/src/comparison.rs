//! The comparison functions `v_λ = r u′ + λ u` and `θ = −r u′ / u` on computed
//! trajectories, runtime checks of their structural properties, and a numeric
//! Sturm comparison check.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::{lambda_map, StructuralConstants};
use crate::ode::{Dopri5, Segment, Tolerance};
use crate::radial_ode::Trajectory;
use crate::roots::brent;
use crate::serde_f64;
use crate::shooting::GroundState;

/// Dense samples per trajectory step used by all sign checks.
pub const OVERSAMPLE: usize = 10;
/// Escalation cap for `λ̄`, as a multiple of the starting value.
pub const LAMBDA_BAR_CAP: f64 = (1u64 << 40) as f64;

const ZERO_XTOL: f64 = 1e-13;

/// A scalar function on a grid, with derivative samples and refined zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledFunction {
    pub r: Vec<f64>,
    pub value: Vec<f64>,
    pub derivative: Vec<f64>,
    /// Sign changes, refined on the underlying dense function.
    pub zeros: Vec<f64>,
}

impl SampledFunction {
    /// Samples `f(r) = (value, derivative)` on `grid` and refines every sign change.
    pub fn from_fn<F>(grid: &[f64], f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64),
    {
        let mut value = Vec::with_capacity(grid.len());
        let mut derivative = Vec::with_capacity(grid.len());
        for &r in grid {
            let (v, d) = f(r);
            value.push(v);
            derivative.push(d);
        }
        let mut zeros = Vec::new();
        for i in 0..grid.len() {
            if value[i] == 0.0 {
                let prev_nonzero = i > 0 && value[i - 1] != 0.0;
                let next_opposite =
                    i + 1 < grid.len() && i > 0 && value[i - 1] * value[i + 1] < 0.0;
                if (prev_nonzero && next_opposite) || (i > 0 && i + 1 == grid.len() && prev_nonzero)
                {
                    zeros.push(grid[i]);
                }
            } else if i + 1 < grid.len() && value[i] * value[i + 1] < 0.0 {
                let z = brent(|r| f(r).0, grid[i], grid[i + 1], ZERO_XTOL).unwrap_or(grid[i]);
                zeros.push(z);
            }
        }
        Self {
            r: grid.to_vec(),
            value,
            derivative,
            zeros,
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r[0], *self.r.last().unwrap())
    }

    fn check_range(&self, x: f64) -> Result<()> {
        let (a, b) = self.range();
        if !(x >= a && x <= b) {
            return Err(Error::Domain {
                what: "r",
                value: x,
                domain: format!("[{a}, {b}]"),
            });
        }
        Ok(())
    }

    /// Cubic Hermite interpolation of `(value, derivative)`.
    pub fn at(&self, x: f64) -> Result<(f64, f64)> {
        self.check_range(x)?;
        let i = self
            .r
            .partition_point(|&t| t <= x)
            .clamp(1, self.r.len() - 1)
            - 1;
        let (x0, x1) = (self.r[i], self.r[i + 1]);
        let h = x1 - x0;
        if h == 0.0 {
            return Ok((self.value[i], self.derivative[i]));
        }
        let t = (x - x0) / h;
        let (y0, y1) = (self.value[i], self.value[i + 1]);
        let (m0, m1) = (self.derivative[i] * h, self.derivative[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        Ok((v, dv))
    }

    pub fn zeros_in(&self, a: f64, b: f64) -> Vec<f64> {
        self.zeros
            .iter()
            .copied()
            .filter(|&z| z > a && z < b)
            .collect()
    }

    /// Samples with `a < r < b`.
    pub fn samples_in(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.r
            .iter()
            .zip(&self.value)
            .zip(&self.derivative)
            .filter(move |((r, _), _)| **r > a && **r < b)
            .map(|((r, v), d)| (*r, *v, *d))
    }
}

/// Trajectory nodes up to `r_end`, each step split into `OVERSAMPLE` pieces.
pub fn dense_grid(trajectory: &Trajectory, r_end: f64) -> Vec<f64> {
    let n = &trajectory.nodes;
    let mut grid = Vec::with_capacity(n.len() * OVERSAMPLE);
    for w in n.windows(2) {
        if w[0] >= r_end {
            break;
        }
        let hi = w[1].min(r_end);
        for k in 0..OVERSAMPLE {
            grid.push(w[0] + (hi - w[0]) * k as f64 / OVERSAMPLE as f64);
        }
        if hi == r_end {
            break;
        }
    }
    grid.push(r_end.min(trajectory.r_end()));
    grid
}

/// `v_λ(r) = r u′(r) + λ u(r)` over the whole trajectory.
pub fn v_lambda_profile(trajectory: &Trajectory, lambda: f64) -> SampledFunction {
    v_lambda_profile_until(trajectory, lambda, trajectory.r_end())
}

/// `v_λ` on `[r₀, r_end]`, with `v′_λ = (2 + λ − N) u′ − r g(u)`.
pub fn v_lambda_profile_until(trajectory: &Trajectory, lambda: f64, r_end: f64) -> SampledFunction {
    let n = trajectory.problem.dim as f64;
    let model = &trajectory.problem.model;
    SampledFunction::from_fn(&dense_grid(trajectory, r_end), |r| {
        let (u, up) = trajectory.u_at(r);
        (
            r * up + lambda * u,
            (2.0 + lambda - n) * up - r * model.g(u),
        )
    })
}

/// `θ(r) = −r u′/u` over the whole trajectory; requires `u > 0` throughout.
pub fn theta_profile(trajectory: &Trajectory) -> Result<SampledFunction> {
    theta_profile_until(trajectory, trajectory.r_end())
}

/// `θ` on `[r₀, r_end]`, with `θ′ = (N − 2) u′/u + r g(u)/u + r (u′/u)²`.
pub fn theta_profile_until(trajectory: &Trajectory, r_end: f64) -> Result<SampledFunction> {
    let n = trajectory.problem.dim as f64;
    let model = &trajectory.problem.model;
    let grid = dense_grid(trajectory, r_end);
    for &r in &grid {
        let u = trajectory.u_at(r).0;
        if !(u > 0.0) {
            return Err(Error::Domain {
                what: "u",
                value: u,
                domain: format!("(0, inf) required at r = {r}"),
            });
        }
    }
    Ok(SampledFunction::from_fn(&grid, |r| {
        let (u, up) = trajectory.u_at(r);
        let q = up / u;
        (-r * q, (n - 2.0) * q + r * model.g(u) / u + r * q * q)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseCheck {
    pub pass: bool,
    /// Radius (or value) at which the clause failed, if it did.
    pub witness: Option<f64>,
    pub detail: String,
}

impl ClauseCheck {
    fn from(pass: bool, witness: Option<f64>, detail: String) -> Self {
        Self {
            pass,
            witness: if pass { None } else { witness },
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyLemmaReport {
    /// First zero of δ.
    pub r_delta: f64,
    pub u_at_r_delta: f64,
    /// End of the analysed range (the trust radius).
    pub r_end: f64,
    /// `Λ(u(r_δ))`.
    pub lambda_under: f64,
    #[serde(with = "serde_f64")]
    pub lambda_bar: f64,
    pub r_under: Option<f64>,
    pub r_bar: Option<f64>,
    /// `θ(r_δ)`.
    pub lambda0: f64,
    pub lambda_bar_escalations: u32,
    pub checks: BTreeMap<String, ClauseCheck>,
}

impl KeyLemmaReport {
    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

fn first_nonnegative(f: &SampledFunction, a: f64, b: f64) -> Option<f64> {
    f.samples_in(a, b)
        .find(|(_, v, _)| *v >= 0.0)
        .map(|(r, _, _)| r)
}

/// Verifies the structural properties of `v_λ` and `θ` on a ground state.
///
/// Failures are reported clause by clause rather than raised.
pub fn key_lemma_report(
    ground: &GroundState,
    consts: &StructuralConstants,
) -> Result<KeyLemmaReport> {
    let t = &ground.trajectory;
    let r_delta = ground
        .r_delta
        .ok_or_else(|| Error::Precondition("ground state has no zero of the variation".into()))?;
    let r_end = ground.r_trust.min(t.r_end());
    if !(r_delta < r_end) {
        return Err(Error::Precondition(format!(
            "first zero of the variation {r_delta} lies beyond the trusted range {r_end}"
        )));
    }
    let (u_d, up_d) = t.u_at(r_delta);
    let mut checks = BTreeMap::new();
    let mut put = |name: &str, c: ClauseCheck| {
        checks.insert(name.to_string(), c);
    };

    put(
        "u_at_r_delta_above_b",
        ClauseCheck::from(
            u_d > consts.b,
            Some(u_d),
            format!("u(r_delta) = {u_d}, b = {}", consts.b),
        ),
    );
    put(
        "u_at_r_delta_below_s_star",
        ClauseCheck::from(
            u_d < consts.s_star,
            Some(u_d),
            format!("u(r_delta) = {u_d}, s* = {}", consts.s_star),
        ),
    );

    // λ̲ = Λ(u(r_δ)) and the unique zero r̲ of v_λ̲ before r_δ.
    let lambda_under = lambda_map(&t.problem.model, consts, u_d).unwrap_or(f64::NAN);
    let mut r_under = None;
    if lambda_under.is_finite() {
        let v = v_lambda_profile_until(t, lambda_under, r_end);
        let before = v.zeros_in(0.0, r_delta);
        r_under = before.first().copied();
        put(
            "v_lower_unique_zero_before_r_delta",
            ClauseCheck::from(
                before.len() == 1,
                before.get(1).copied(),
                format!("{} zero(s) on (0, r_delta)", before.len()),
            ),
        );
        let after = r_under.unwrap_or(r_delta);
        let bad = first_nonnegative(&v, after, r_end);
        put(
            "v_lower_negative_after_zero",
            ClauseCheck::from(bad.is_none(), bad, format!("checked on ({after}, {r_end})")),
        );
    } else {
        for name in [
            "v_lower_unique_zero_before_r_delta",
            "v_lower_negative_after_zero",
        ] {
            put(
                name,
                ClauseCheck::from(
                    false,
                    Some(u_d),
                    "lambda_under undefined at u(r_delta)".into(),
                ),
            );
        }
    }

    // λ₀ = θ(r_δ).
    let lambda0 = -r_delta * up_d / u_d;
    let v0 = v_lambda_profile_until(t, lambda0, r_end);
    let v0_at = r_delta * up_d + lambda0 * u_d;
    let v0_scale = 1e-10 * (r_delta * up_d.abs() + lambda0.abs() * u_d);
    put(
        "v_lambda0_vanishes_at_r_delta",
        ClauseCheck::from(
            v0_at.abs() <= v0_scale,
            Some(v0_at),
            format!("v(r_delta) = {v0_at:e}"),
        ),
    );
    let bad = v0
        .samples_in(r_delta, r_end)
        .find(|(r, v, _)| *v >= 0.0 && *r > r_delta * (1.0 + 1e-9))
        .map(|(r, _, _)| r);
    put(
        "v_lambda0_negative_after_r_delta",
        ClauseCheck::from(
            bad.is_none(),
            bad,
            format!("checked on ({r_delta}, {r_end})"),
        ),
    );
    let n = t.problem.dim as f64;
    let slope = (2.0 + lambda0 - n) * up_d - r_delta * t.problem.model.g(u_d);
    put(
        "v_lambda0_slope_negative_at_r_delta",
        ClauseCheck::from(slope < 0.0, Some(slope), format!("v'(r_delta) = {slope:e}")),
    );

    // λ̄: double from 2λ₀ until v_λ̄ > 0 on [0, r_δ].
    let mut lambda_bar = 2.0 * lambda0.max(f64::MIN_POSITIVE);
    let cap = lambda_bar * LAMBDA_BAR_CAP;
    let mut escalations = 0;
    let mut v_bar = v_lambda_profile_until(t, lambda_bar, r_end);
    while first_nonpositive_until(&v_bar, r_delta).is_some() && lambda_bar < cap {
        lambda_bar *= 2.0;
        escalations += 1;
        v_bar = v_lambda_profile_until(t, lambda_bar, r_end);
    }
    let bad = first_nonpositive_until(&v_bar, r_delta);
    put(
        "v_upper_positive_up_to_r_delta",
        ClauseCheck::from(bad.is_none(), bad, format!("lambda_bar = {lambda_bar}")),
    );
    let after = v_bar.zeros_in(r_delta, r_end);
    let r_bar = after.first().copied();
    put(
        "v_upper_unique_zero_after_r_delta",
        ClauseCheck::from(
            after.len() == 1,
            after.get(1).copied(),
            format!("{} zero(s) on (r_delta, {r_end})", after.len()),
        ),
    );

    let theta_end = r_bar.unwrap_or(r_end);
    let theta = theta_profile_until(t, r_end)?;
    let bad = theta
        .samples_in(r_delta, theta_end)
        .chain(theta.at(theta_end).ok().map(|(v, d)| (theta_end, v, d)))
        .find(|(_, _, d)| *d <= 0.0)
        .map(|(r, _, _)| r);
    put(
        "theta_increasing_after_r_delta",
        ClauseCheck::from(
            bad.is_none(),
            bad,
            format!("checked on ({r_delta}, {theta_end}]"),
        ),
    );

    let ordered = lambda_under < lambda0 && lambda0 < lambda_bar;
    put(
        "lambda_ordering",
        ClauseCheck::from(
            ordered,
            Some(lambda0),
            format!(
                "lambda_under = {lambda_under}, lambda0 = {lambda0}, lambda_bar = {lambda_bar}"
            ),
        ),
    );

    Ok(KeyLemmaReport {
        r_delta,
        u_at_r_delta: u_d,
        r_end,
        lambda_under,
        lambda_bar,
        r_under,
        r_bar,
        lambda0,
        lambda_bar_escalations: escalations,
        checks,
    })
}

fn first_nonpositive_until(f: &SampledFunction, r_end: f64) -> Option<f64> {
    f.r.iter()
        .zip(&f.value)
        .take_while(|(r, _)| **r <= r_end)
        .find(|(_, v)| **v <= 0.0)
        .map(|(r, _)| *r)
        .or_else(|| f.at(r_end).ok().filter(|(v, _)| *v <= 0.0).map(|_| r_end))
}

/// Solves `y″ + (N−1)/r y′ + c(r) y = 0` from `r_start` with data `[y, y′]`.
///
/// `r_start = 0` requires `y′ = 0`; the solve then starts from a Taylor step.
pub fn solve_linear_radial<C>(
    dim: usize,
    coef: C,
    r_start: f64,
    data: [f64; 2],
    r_end: f64,
    tol: f64,
) -> Result<SampledFunction>
where
    C: Fn(f64) -> f64,
{
    if dim < 1 || !(r_end > r_start) || r_start < 0.0 || !(tol > 0.0) {
        return Err(Error::Precondition("invalid linear radial problem".into()));
    }
    let n = dim as f64;
    let (r0, y0) = if r_start == 0.0 {
        if data[1] != 0.0 {
            return Err(Error::Precondition(
                "y'(0) must vanish at the origin".into(),
            ));
        }
        let c0 = coef(0.0);
        let r0 = 1e-6 * (1.0 + c0.abs()).sqrt().recip();
        (
            r0,
            [
                data[0] * (1.0 - c0 * r0 * r0 / (2.0 * n)),
                -data[0] * c0 * r0 / n,
            ],
        )
    } else {
        (r_start, data)
    };
    let rhs = |r: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -(n - 1.0) / r * y[1] - coef(r) * y[0];
    };
    let scale = data[0].abs().max(data[1].abs()).max(1e-300);
    let mut solver = Dopri5::new(rhs, r0, &y0, Tolerance::new(tol, tol * 1e-3 * scale))
        .with_max_step((r_end - r_start) / 50.0);
    let mut segments: Vec<Segment> = Vec::new();
    while solver.t() < r_end {
        segments.push(solver.step(r_end)?);
    }
    let eval = |r: f64| {
        if r <= r0 {
            let c0 = coef(0.0);
            if r_start == 0.0 {
                return (
                    data[0] * (1.0 - c0 * r * r / (2.0 * n)),
                    -data[0] * c0 * r / n,
                );
            }
            return (y0[0], y0[1]);
        }
        let i = segments.partition_point(|s| s.t0 <= r).saturating_sub(1);
        let s = &segments[i];
        (s.component(r, 0), s.component(r, 1))
    };
    let mut grid = vec![r_start];
    for s in &segments {
        for k in 0..OVERSAMPLE {
            let x = s.t0 + s.h * k as f64 / OVERSAMPLE as f64;
            if x > r_start {
                grid.push(x);
            }
        }
    }
    grid.push(r_end);
    Ok(SampledFunction::from_fn(&grid, eval))
}

/// Sturm comparison on `(μ, ν)` for `U″ + (N−1)/r U′ + g U = 0` and
/// `V″ + (N−1)/r V′ + G V = 0` with `G ≥ g`, `G ≢ g`.
///
/// Returns whether `V` changes sign strictly inside the interval.
pub fn sturm_check<Fg, FG>(
    u: &SampledFunction,
    v: &SampledFunction,
    g_coef: Fg,
    big_g_coef: FG,
    interval: (f64, f64),
) -> Result<bool>
where
    Fg: Fn(f64) -> f64,
    FG: Fn(f64) -> f64,
{
    let (mu, nu) = interval;
    if !(nu > mu && mu >= 0.0) {
        return Err(Error::Precondition(format!(
            "invalid interval ({mu}, {nu})"
        )));
    }
    for f in [u, v] {
        let (a, b) = f.range();
        if a > mu || b < nu {
            return Err(Error::Precondition(format!(
                "samples cover [{a}, {b}], not [{mu}, {nu}]"
            )));
        }
    }

    let mut gap_max: f64 = 0.0;
    for (r, _, _) in u.samples_in(mu, nu) {
        let (g, big) = (g_coef(r), big_g_coef(r));
        if big < g - 1e-12 * (1.0 + g.abs()) {
            return Err(Error::Precondition(format!("G < g at r = {r}")));
        }
        gap_max = gap_max.max((big - g) / (1.0 + g.abs()));
    }
    if gap_max <= 1e-12 {
        return Err(Error::Precondition(
            "G coincides with g on the interval".into(),
        ));
    }

    let u_scale = u
        .samples_in(mu, nu)
        .map(|(_, x, _)| x.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let zero = |x: f64| x.abs() <= 1e-8 * u_scale;
    let (u_mu, du_mu) = u.at(mu)?;
    let (u_nu, _) = u.at(nu)?;
    let case_a = mu > 0.0 && zero(u_mu) && zero(u_nu);
    let case_b = mu == 0.0 && zero(du_mu * mu.max(1.0)) && zero(u_nu) && {
        let (_, dv) = v.at(mu)?;
        let v_scale = v
            .value
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        dv.abs() <= 1e-8 * v_scale
    };
    if !(case_a || case_b) {
        return Err(Error::Precondition(
            "boundary conditions hold in neither case: U(mu) = U(nu) = 0 with mu > 0, nor U'(0) = V'(0) = U(nu) = 0"
                .into(),
        ));
    }
    let inside = !v.zeros_in(mu, nu).is_empty() || v.samples_in(mu, nu).any(|(_, x, _)| x == 0.0);
    Ok(inside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{structural_constants, SemilinearModel};
    use crate::radial_ode::RadialProblem;
    use crate::shooting::find_ground_state;
    use rand::{Rng, SeedableRng};

    fn cubic3() -> (GroundState, StructuralConstants) {
        let m = SemilinearModel::power(1.0, 3.0);
        let c = structural_constants(&m, 1e8).unwrap();
        let p = RadialProblem::new(3, m).unwrap();
        (find_ground_state(&p, &c, 1e-12).unwrap(), c)
    }

    #[test]
    fn v_lambda_basic_shape() {
        let (gs, _) = cubic3();
        let t = &gs.trajectory;
        let v = v_lambda_profile_until(t, 1.5, gs.r_trust);
        assert!((v.value[0] - 1.5 * t.u[0]).abs() < 1e-9);
        assert!(!v.zeros.is_empty());
        let rd = gs.r_delta.unwrap();
        let big = v_lambda_profile_until(t, 1e3, gs.r_trust);
        assert!(big.zeros_in(0.0, rd).is_empty());
    }

    #[test]
    fn theta_identity_and_derivative() {
        let (gs, _) = cubic3();
        let t = &gs.trajectory;
        let th = theta_profile_until(t, gs.r_trust).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let r = rng.gen_range(t.r0()..gs.r_trust);
            let lam = rng.gen_range(0.1..10.0);
            let (u, up) = t.u_at(r);
            let theta = -r * up / u;
            let v = r * up + lam * u;
            assert!(
                (theta - lam + v / u).abs() <= 1e-12 * (1.0 + theta.abs() + lam),
                "r={r}"
            );
            let (tv, _) = th.at(r).unwrap();
            assert!((tv - theta).abs() < 1e-6 * (1.0 + theta.abs()));
        }
        // θ′ = −v′_λ/u where θ = λ.
        for &r in &[0.5, 1.0, 2.0, 4.0] {
            let (u, up) = t.u_at(r);
            let lam = -r * up / u;
            let v = v_lambda_profile_until(t, lam, gs.r_trust);
            let (_, dv) = v.at(r).unwrap();
            let (_, dth) = th.at(r).unwrap();
            assert!(
                (dth + dv / u).abs() <= 1e-6 * (1.0 + dth.abs()),
                "r={r}: {dth} vs {}",
                -dv / u
            );
        }
        let (u0, _) = t.u_at(t.r0());
        let r0 = t.r0();
        let expect = t.problem.model.g(u0) * r0 * r0 / (3.0 * u0);
        assert!((th.value[0] - expect).abs() < 1e-3 * expect.abs() + 1e-20);
    }

    #[test]
    fn v_lambda_satisfies_its_equation() {
        let (gs, _) = cubic3();
        let t = &gs.trajectory;
        let model = &t.problem.model;
        for &lam in &[0.5, 2.0] {
            let v = v_lambda_profile_until(t, lam, gs.r_trust);
            for &r in &[0.7, 1.3, 2.9, 5.0] {
                let h = 1e-4;
                let d2 = (v.at(r + h).unwrap().1 - v.at(r - h).unwrap().1) / (2.0 * h);
                let (val, d1) = v.at(r).unwrap();
                let u = t.u_at(r).0;
                let lhs = d2 + 2.0 / r * d1 + model.g_prime(u) * val;
                let rhs = crate::nonlinearity::i_function(model, u, lam);
                assert!(
                    (lhs - rhs).abs() < 1e-4 * (1.0 + rhs.abs()),
                    "r={r}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn theta_rejects_crossing() {
        let m = SemilinearModel::power(1.0, 3.0);
        let p = RadialProblem::new(3, m).unwrap();
        let t = crate::radial_ode::integrate(&p, 6.0, 20.0, 1e-10, false).unwrap();
        assert!(t.u_zero().is_some());
        assert!(matches!(theta_profile(&t), Err(Error::Domain { .. })));
    }

    #[test]
    fn key_lemmas_hold_for_cubic() {
        let (gs, c) = cubic3();
        let rep = key_lemma_report(&gs, &c).unwrap();
        assert!(rep.all_pass(), "{:#?}", rep);
        assert!(rep.lambda_under < rep.lambda0 && rep.lambda0 < rep.lambda_bar);
        assert!(rep.r_under.unwrap() < rep.r_delta && rep.r_bar.unwrap() > rep.r_delta);
    }

    #[test]
    fn sturm_bessel_origin_case() {
        let u = solve_linear_radial(2, |_| 1.0, 0.0, [1.0, 0.0], 3.0, 1e-11).unwrap();
        let v = solve_linear_radial(2, |_| 4.0, 0.0, [1.0, 0.0], 3.0, 1e-11).unwrap();
        let nu = u.zeros[0];
        assert!((nu - 2.404825557695773).abs() < 1e-8);
        assert!((v.zeros[0] - 2.404825557695773 / 2.0).abs() < 1e-8);
        assert!(sturm_check(&u, &v, |_| 1.0, |_| 4.0, (0.0, nu)).unwrap());
    }

    #[test]
    fn sturm_random_pairs() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
        for _ in 0..20 {
            let ra = rng.gen_range(0.5..5.0);
            let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let u = solve_linear_radial(2, |_| 1.0, ra, [ang.cos(), ang.sin()], ra + 12.0, 1e-11)
                .unwrap();
            let ang2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let v = solve_linear_radial(2, |_| 4.0, ra, [ang2.cos(), ang2.sin()], ra + 12.0, 1e-11)
                .unwrap();
            let (mu, nu) = (u.zeros[0], u.zeros[1]);
            assert!(sturm_check(&u, &v, |_| 1.0, |_| 4.0, (mu, nu)).unwrap());
        }
    }

    #[test]
    fn sturm_preconditions() {
        let u = solve_linear_radial(2, |_| 1.0, 1.0, [0.0, 1.0], 10.0, 1e-11).unwrap();
        let (mu, nu) = (u.zeros[0], u.zeros[1]);
        assert!(matches!(
            sturm_check(&u, &u, |_| 1.0, |_| 1.0, (mu, nu)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            sturm_check(&u, &u, |_| 1.0, |_| 0.5, (mu, nu)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            sturm_check(&u, &u, |_| 1.0, |_| 4.0, (mu + 0.3, nu)),
            Err(Error::Precondition(_))
        ));
    }
}
