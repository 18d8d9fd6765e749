//! Classification of initial heights and bisection for the ground state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::StructuralConstants;
use crate::radial_ode::{
    integrate_with, EndReason, Event, IntegrateOptions, RadialProblem, StopPolicy, Trajectory,
};

pub const DEFAULT_D_TOL: f64 = 1e-12;
pub const DEFAULT_ODE_TOL: f64 = 1e-10;
/// Relative gap between the bracket trajectories at which the profile stops being trusted.
pub const TRUST_GAP: f64 = 1e-6;
const MAX_SEED_DOUBLINGS: usize = 40;
const MAX_RMAX_GROWTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "certificate", rename_all = "snake_case")]
pub enum PositiveWitness {
    EnergyNegative { energy: f64 },
    TurningPoint { u: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    CrossesZero { r: f64, u_prime: f64 },
    GroundCandidate { r_trust: f64 },
    StaysPositive { r: f64, witness: PositiveWitness },
    Undetermined { r_max: f64 },
}

impl Classification {
    pub fn is_crossing(&self) -> bool {
        matches!(self, Classification::CrossesZero { .. })
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Classification::StaysPositive { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Classification::CrossesZero { .. } => "crosses_zero",
            Classification::GroundCandidate { .. } => "ground_candidate",
            Classification::StaysPositive { .. } => "stays_positive",
            Classification::Undetermined { .. } => "undetermined",
        }
    }
}

/// Energy margin used by the staying-positive certificate.
pub fn energy_margin(problem: &RadialProblem, consts: &StructuralConstants) -> f64 {
    1e-12 * (1.0 + problem.model.g_anti(consts.b).abs())
}

fn certificate_options(
    problem: &RadialProblem,
    consts: &StructuralConstants,
    r_max: f64,
    tol: f64,
    with_variation: bool,
) -> IntegrateOptions {
    IntegrateOptions {
        stop: StopPolicy::AtCertificate { b: consts.b },
        energy_margin: energy_margin(problem, consts),
        ..IntegrateOptions::new(r_max, tol, with_variation)
    }
}

/// Read the classification off a trajectory integrated with [`StopPolicy::AtCertificate`].
pub fn classification_of(traj: &Trajectory) -> Classification {
    match traj.end {
        EndReason::UZero { r } => Classification::CrossesZero {
            r,
            u_prime: traj.u_prime[traj.len() - 1],
        },
        EndReason::Certificate { r } => {
            let witness = traj
                .events
                .iter()
                .rev()
                .find_map(|e| match *e {
                    Event::EnergyNegative { r: re, energy } if re == r => {
                        Some(PositiveWitness::EnergyNegative { energy })
                    }
                    Event::UPrimeZero { r: re, u } if re == r => {
                        Some(PositiveWitness::TurningPoint { u })
                    }
                    _ => None,
                })
                .unwrap_or(PositiveWitness::EnergyNegative {
                    energy: traj.energy[traj.len() - 1],
                });
            Classification::StaysPositive { r, witness }
        }
        EndReason::RMax { r } => Classification::Undetermined { r_max: r },
    }
}

fn check_height(consts: &StructuralConstants, d: f64) -> Result<()> {
    if !(d > 0.0) {
        return Err(Error::Precondition(format!(
            "initial height must be positive, got {d}"
        )));
    }
    if consts.b_tilde.is_finite() && d >= consts.b_tilde {
        return Err(Error::Domain {
            what: "d",
            value: d,
            domain: format!("(0, {})", consts.b_tilde),
        });
    }
    Ok(())
}

/// Classify one initial height. The structural constants supply `b` (for the
/// turning-point certificate), `G(b)` (for the energy margin) and `b̃`.
pub fn classify(
    problem: &RadialProblem,
    consts: &StructuralConstants,
    d: f64,
    r_max: f64,
    tol: f64,
) -> Result<Classification> {
    classify_inner(problem, consts, d, r_max, tol, false)
}

fn classify_inner(
    problem: &RadialProblem,
    consts: &StructuralConstants,
    d: f64,
    r_max: f64,
    tol: f64,
    with_variation: bool,
) -> Result<Classification> {
    check_height(consts, d)?;
    let t = integrate_with(
        problem,
        d,
        &certificate_options(problem, consts, r_max, tol, with_variation),
    )?;
    Ok(classification_of(&t))
}

// The bisection integrates with the variation channel so that its step
// sequence, and hence its numerical map d -> trajectory, matches the final profile.
fn classify_escalating(
    problem: &RadialProblem,
    consts: &StructuralConstants,
    d: f64,
    r_max: f64,
    tol: f64,
) -> Result<(Classification, f64)> {
    let mut r = r_max;
    loop {
        let c = classify_inner(problem, consts, d, r, tol, true)?;
        if !matches!(c, Classification::Undetermined { .. }) || r >= MAX_RMAX_GROWTH * r_max {
            return Ok((c, r));
        }
        r *= 2.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub d_tol: f64,
    pub ode_tol: f64,
    /// Defaults to `30/√(−g′(0))`.
    pub r_max: Option<f64>,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            d_tol: DEFAULT_D_TOL,
            ode_tol: DEFAULT_ODE_TOL,
            r_max: None,
        }
    }
}

/// Least-squares fit of `u′/u + (N−1)/(2r) ≈ a + c/r²` on the decaying tail.
/// The `1/r` coefficient is the one shared by every radial solution of the
/// linear equation `Δu = k²u`, so only the rate `a` and a correction are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub expected: f64,
    pub deviation: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub d0: f64,
    /// Final bracket `[d_P, d_N]`.
    pub bracket: [f64; 2],
    pub bracket_evidence: [Classification; 2],
    pub trajectory: Trajectory,
    /// End of the radius range on which the profile is resolved by the bracket.
    pub r_trust: f64,
    pub decay: Option<DecayFit>,
    pub r_delta: Option<f64>,
    pub monotone: bool,
    pub r_max: f64,
    pub d_tol: f64,
    pub ode_tol: f64,
    pub bisection_steps: usize,
}

/// Locate `d₀` with the default ODE tolerance.
pub fn find_ground_state(
    problem: &RadialProblem,
    consts: &StructuralConstants,
    d_tol: f64,
) -> Result<GroundState> {
    find_ground_state_with(
        problem,
        consts,
        &ShootingOptions {
            d_tol,
            ..Default::default()
        },
    )
}

pub fn find_ground_state_with(
    problem: &RadialProblem,
    consts: &StructuralConstants,
    opts: &ShootingOptions,
) -> Result<GroundState> {
    if !(opts.d_tol > 0.0) {
        return Err(Error::Domain {
            what: "d_tol",
            value: opts.d_tol,
            domain: "(0, inf)".into(),
        });
    }
    let tol = opts.ode_tol;
    let mut r_max = opts.r_max.unwrap_or_else(|| problem.default_r_max());
    let zeta = consts.zeta.ok_or_else(|| Error::NoCrossing {
        limit: consts.upper(),
        attempts: 0,
    })?;
    let cap = if consts.b_tilde.is_finite() {
        consts.b_tilde * (1.0 - 1e-9)
    } else {
        f64::INFINITY
    };

    let mut d_p = consts.b;
    let mut ev_p = classify(problem, consts, d_p, r_max, tol)?;
    let mut d = zeta.max(2.0 * consts.b).min(cap);
    let mut found = None;
    for attempt in 0..MAX_SEED_DOUBLINGS {
        let (c, r) = classify_escalating(problem, consts, d, r_max, tol)?;
        match c {
            Classification::CrossesZero { .. } => {
                r_max = r_max.max(r);
                found = Some((d, c));
                break;
            }
            Classification::StaysPositive { .. } => {
                d_p = d;
                ev_p = c;
            }
            _ => {}
        }
        if d >= cap || attempt + 1 == MAX_SEED_DOUBLINGS {
            break;
        }
        d = (2.0 * d).min(cap);
    }
    // Near a finite b̃ the crossing heights can sit many digits below it:
    // approach b̃ geometrically down to a few ulps.
    if found.is_none() && cap.is_finite() {
        let floor = 8.0 * f64::EPSILON * consts.b_tilde;
        let mut gap = consts.b_tilde - d;
        while found.is_none() {
            gap /= 100.0;
            if gap < floor {
                break;
            }
            let d = consts.b_tilde - gap;
            let (c, r) = classify_escalating(problem, consts, d, r_max, tol)?;
            match c {
                Classification::CrossesZero { .. } => {
                    r_max = r_max.max(r);
                    found = Some((d, c));
                }
                Classification::StaysPositive { .. } => {
                    d_p = d;
                    ev_p = c;
                }
                _ => {}
            }
        }
    }
    let (mut d_n, mut ev_n) = found.ok_or(Error::NoCrossing {
        limit: if cap.is_finite() { cap } else { d },
        attempts: MAX_SEED_DOUBLINGS,
    })?;

    // Bisect to the requested tolerance, then keep going to the resolution of
    // the floating-point grid: the tail of the profile is only as good as the bracket.
    let floor = 4.0 * f64::EPSILON * d_n;
    let mut steps = 0;
    loop {
        let width = d_n - d_p;
        let mid = 0.5 * (d_p + d_n);
        if width <= floor || mid <= d_p || mid >= d_n {
            break;
        }
        let (c, r) = classify_escalating(problem, consts, mid, r_max, tol)?;
        steps += 1;
        match c {
            Classification::CrossesZero { .. } => {
                d_n = mid;
                ev_n = c;
            }
            Classification::StaysPositive { .. } => {
                d_p = mid;
                ev_p = c;
            }
            _ => {
                if width <= opts.d_tol {
                    break;
                }
                return Err(Error::Undetermined { d: mid, r_max: r });
            }
        }
        r_max = r_max.max(r);
    }

    let d0 = 0.5 * (d_p + d_n);
    let main = integrate_with(
        problem,
        d0,
        &certificate_options(problem, consts, r_max, tol, true),
    )?;
    let lo = integrate_with(
        problem,
        d_p,
        &certificate_options(problem, consts, r_max, tol, true),
    )?;
    let hi = integrate_with(
        problem,
        d_n,
        &certificate_options(problem, consts, r_max, tol, true),
    )?;
    let r_trust = trust_radius(&main, &lo, &hi);

    let monotone = main
        .nodes
        .iter()
        .zip(&main.u_prime)
        .skip(1)
        .take_while(|(r, _)| **r <= r_trust)
        .all(|(_, up)| *up < 0.0);
    let r_delta = main.delta_zeros().into_iter().find(|&r| r <= r_trust);
    let decay = decay_rate_until(&main, r_trust).ok();

    Ok(GroundState {
        d0,
        bracket: [d_p, d_n],
        bracket_evidence: [ev_p, ev_n],
        trajectory: main,
        r_trust,
        decay,
        r_delta,
        monotone,
        r_max,
        d_tol: opts.d_tol,
        ode_tol: tol,
        bisection_steps: steps,
    })
}

/// First radius where the bracket trajectories disagree by more than
/// [`TRUST_GAP`] relative to the midpoint, or where the midpoint turns or vanishes.
fn trust_radius(main: &Trajectory, lo: &Trajectory, hi: &Trajectory) -> f64 {
    let limit = lo.r_end().min(hi.r_end()).min(main.r_end());
    let mut last = main.r0();
    for i in 1..main.len() {
        let r = main.nodes[i];
        if r > limit {
            return last;
        }
        let u = main.u[i];
        if u <= 0.0 || main.u_prime[i] >= 0.0 {
            return last;
        }
        let gap = (hi.u_at(r).0 - lo.u_at(r).0).abs();
        if gap > TRUST_GAP * u {
            return last;
        }
        last = r;
    }
    last
}

/// Fit the exponential decay rate on the tail of `trajectory`.
pub fn decay_rate(trajectory: &Trajectory) -> Result<DecayFit> {
    decay_rate_until(trajectory, trajectory.r_end())
}

/// Fit restricted to `r ≤ r_end`.
pub fn decay_rate_until(trajectory: &Trajectory, r_end: f64) -> Result<DecayFit> {
    if let EndReason::UZero { r } = trajectory.end {
        if r <= r_end {
            return Err(Error::TailTooShort(format!(
                "trajectory crosses zero at r = {r}"
            )));
        }
    }
    let u0 = trajectory.u[0];
    let mut start = None;
    let mut stop = trajectory.r0();
    for i in 1..trajectory.len() {
        let r = trajectory.nodes[i];
        if r > r_end || trajectory.u[i] <= 0.0 || trajectory.u_prime[i] >= 0.0 {
            break;
        }
        if start.is_none() && trajectory.u[i] < 1e-4 * u0 {
            start = Some(r);
        }
        stop = r;
    }
    let start =
        start.ok_or_else(|| Error::TailTooShort("no monotone tail with u < 1e-4 u(0)".into()))?;
    let k = trajectory.problem.decay_scale();
    if (stop - start) * k < 2.0 {
        return Err(Error::TailTooShort(format!(
            "tail window [{start}, {stop}] spans fewer than two decay lengths"
        )));
    }
    let n = 400;
    let m = 0.5 * (trajectory.problem.dim as f64 - 1.0);
    let (mut s00, mut s01, mut s11, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..n {
        let r = start + (stop - start) * j as f64 / (n - 1) as f64;
        let (u, up) = trajectory.u_at(r);
        let y = up / u + m / r;
        let x = (start / r).powi(2);
        s00 += 1.0;
        s01 += x;
        s11 += x * x;
        t0 += y;
        t1 += x * y;
    }
    let det = s00 * s11 - s01 * s01;
    let rate = (t0 * s11 - t1 * s01) / det;
    let expected = -k;
    Ok(DecayFit {
        rate,
        expected,
        deviation: rate - expected,
        window: [start, stop],
        samples: n,
    })
}

impl GroundState {
    pub fn problem(&self) -> &RadialProblem {
        &self.trajectory.problem
    }

    pub fn classification(&self) -> Classification {
        Classification::GroundCandidate {
            r_trust: self.r_trust,
        }
    }

    fn tail_rate(&self) -> f64 {
        self.problem().decay_scale()
    }

    /// Profile on `[0, ∞)`: Taylor data near the origin, the computed
    /// trajectory up to `r_trust`, and the linear exponential tail beyond.
    pub fn u(&self, r: f64) -> f64 {
        self.u_and_prime(r).0
    }

    pub fn u_prime(&self, r: f64) -> f64 {
        self.u_and_prime(r).1
    }

    pub fn u_and_prime(&self, r: f64) -> (f64, f64) {
        let t = &self.trajectory;
        if r < t.r0() {
            let y = self.problem().taylor(self.d0, r.max(0.0));
            return (y[0], y[1]);
        }
        if r <= self.r_trust {
            return t.u_at(r);
        }
        let (ut, _) = t.u_at(self.r_trust);
        let k = self.tail_rate();
        let m = 0.5 * (self.problem().dim as f64 - 1.0);
        let u = ut * (-k * (r - self.r_trust)).exp() * (self.r_trust / r).powf(m);
        (u, u * (-k - m / r))
    }

    /// Residual `u″ + (N−1)/r·u′ + g(u)` of the dense profile at `r ∈ [r₀, r_trust]`.
    pub fn residual(&self, r: f64) -> f64 {
        let t = &self.trajectory;
        let [u, up, upp] = t.u_hermite(r);
        upp + (self.problem().dim as f64 - 1.0) / r * up + self.problem().model.g(u)
    }

    pub fn decay_rate(&self) -> Result<DecayFit> {
        decay_rate_until(&self.trajectory, self.r_trust)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{structural_constants, Family, SemilinearModel};

    fn power_setup(n: usize, lambda: f64, p: f64) -> (RadialProblem, StructuralConstants) {
        let m = SemilinearModel::power(lambda, p);
        let c = structural_constants(&m, 1e8).unwrap();
        (RadialProblem::new(n, m).unwrap(), c)
    }

    #[test]
    fn heights_below_b_stay_positive() {
        let (p, c) = power_setup(3, 1.0, 3.0);
        for d in [0.01, 0.3, 0.7, 0.999, 1.0] {
            assert!(
                classify(&p, &c, d, 30.0, 1e-10).unwrap().is_positive(),
                "d={d}"
            );
        }
    }

    #[test]
    fn ground_state_power_cubic_3d() {
        let (p, c) = power_setup(3, 1.0, 3.0);
        let gs = find_ground_state(&p, &c, 1e-12).unwrap();
        assert!(gs.bracket[1] - gs.bracket[0] <= 1e-12);
        assert!(gs.d0 > c.b);
        assert!((gs.d0 - 4.3373).abs() < 1e-3, "d0={}", gs.d0);
        assert!(gs.monotone);
        assert!(gs.bracket_evidence[0].is_positive() && gs.bracket_evidence[1].is_crossing());
        let fit = gs.decay.unwrap();
        assert!(fit.deviation.abs() < 1e-3, "{fit:?}");
        assert!(gs.r_delta.is_some());
        for dd in [1e-3, 1e-4] {
            assert!(classify(&p, &c, gs.d0 + dd, 30.0, 1e-10)
                .unwrap()
                .is_crossing());
            assert!(classify(&p, &c, gs.d0 - dd, 30.0, 1e-10)
                .unwrap()
                .is_positive());
        }
    }

    #[test]
    fn profile_residual_scales_with_tolerance() {
        let (p, c) = power_setup(3, 1.0, 3.0);
        let tol = 1e-8;
        let opts = ShootingOptions {
            d_tol: 1e-12,
            ode_tol: tol,
            r_max: None,
        };
        let gs = find_ground_state_with(&p, &c, &opts).unwrap();
        for k in 1..2000 {
            let r = 0.01 + (gs.r_trust - 0.01) * k as f64 / 2000.0;
            let res = gs.residual(r);
            let g = p.model.g(gs.u(r));
            assert!(
                res.abs() <= 100.0 * tol * (1.0 + g.abs()),
                "r={r} residual={res}"
            );
        }
    }

    #[test]
    fn sandwich_and_refinement() {
        let (p, c) = power_setup(3, 1.0, 3.0);
        let d_tol = 1e-8;
        let gs = find_ground_state(&p, &c, d_tol).unwrap();
        assert!(classify(&p, &c, gs.d0 + 10.0 * d_tol, 60.0, 1e-10)
            .unwrap()
            .is_crossing());
        assert!(classify(&p, &c, gs.d0 - 10.0 * d_tol, 60.0, 1e-10)
            .unwrap()
            .is_positive());
        let half = find_ground_state(&p, &c, d_tol / 2.0).unwrap();
        assert!((half.d0 - gs.d0).abs() <= d_tol);
    }

    #[test]
    fn decay_rate_scales_with_linear_coefficient() {
        let (p, c) = power_setup(3, 4.0, 3.0);
        let gs = find_ground_state(&p, &c, 1e-12).unwrap();
        let fit = gs.decay_rate().unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn decay_rate_rejects_crossing_trajectory() {
        let (p, _) = power_setup(3, 1.0, 3.0);
        let t = crate::radial_ode::integrate(&p, 6.0, 30.0, 1e-10, false).unwrap();
        assert!(matches!(decay_rate(&t), Err(Error::TailTooShort(_))));
    }

    #[test]
    fn classify_domain_checks() {
        let m = SemilinearModel::builtin(Family::Nagumo { c: 0.3 });
        let c = structural_constants(&m, 1e8).unwrap();
        let p = RadialProblem::new(3, m).unwrap();
        assert!(matches!(
            classify(&p, &c, 1.0, 30.0, 1e-10),
            Err(Error::Domain { .. })
        ));
        assert!(classify(&p, &c, -1.0, 30.0, 1e-10).is_err());
    }

    #[test]
    fn nagumo_ground_state_below_upper_zero() {
        let m = SemilinearModel::builtin(Family::Nagumo { c: 0.3 });
        let c = structural_constants(&m, 1e8).unwrap();
        let p = RadialProblem::new(3, m).unwrap();
        let gs = find_ground_state(&p, &c, 1e-12).unwrap();
        assert!(gs.d0 > c.b && gs.d0 < c.b_tilde);
    }

    #[test]
    fn missing_zeta_is_no_crossing() {
        let m = SemilinearModel::builtin(Family::Nagumo { c: 0.6 });
        let c = structural_constants(&m, 1e8).unwrap();
        let p = RadialProblem::new(3, m).unwrap();
        assert!(matches!(
            find_ground_state(&p, &c, 1e-10),
            Err(Error::NoCrossing { .. })
        ));
    }
}
