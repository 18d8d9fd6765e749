//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

use std::time::{Duration, Instant};

use elliptic_shooter_core::dual::DiffusionModel;
use elliptic_shooter_core::hypothesis::GridSpec;
use elliptic_shooter_core::spectrum::default_r_max;
use elliptic_shooter_core::*;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Result<Outcome>;

fn ground(dim: usize, model: SemilinearModel) -> Result<(GroundState, StructuralConstants)> {
    let c = structural_constants(&model, 1e8)?;
    let p = RadialProblem::new(dim, model)?;
    Ok((find_ground_state(&p, &c, 1e-12)?, c))
}

fn c1_closed_form() -> Result<Outcome> {
    let p = RadialProblem::new(3, SemilinearModel::builtin(Family::Linear { lambda: 1.0 }))?;
    let t = integrate(&p, 1.0, 5.0, 1e-12, true)?;
    let (mut eu, mut ed) = (0.0f64, 0.0f64);
    for k in 1..=500 {
        let r = 5.0 * k as f64 / 500.0;
        let exact = r.sinh() / r;
        eu = eu.max((t.u_at(r).0 - exact).abs() / exact);
        ed = ed.max((t.delta_at(r).0 - exact).abs() / exact);
    }
    Ok(ok(
        eu <= 1e-8 && ed <= 1e-8,
        format!("max rel err u {eu:.2e}, delta {ed:.2e}"),
    ))
}

fn c2_decay() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for lambda in [1.0, 4.0] {
        for dim in [2, 3] {
            let (gs, _) = ground(dim, SemilinearModel::power(lambda, 3.0))?;
            let fit = gs.decay_rate()?;
            let dev = (fit.rate + f64::sqrt(lambda)).abs();
            worst = worst.max(dev);
            parts.push(format!("l={lambda} N={dim}: {:.6}", fit.rate));
        }
    }
    Ok(ok(
        worst <= 1e-3,
        format!("{}; worst deviation {worst:.2e}", parts.join(", ")),
    ))
}

fn structure(dim: usize, p: f64) -> Result<(bool, String)> {
    let model = SemilinearModel::power(1.0, p);
    let (gs, c) = ground(dim, model)?;
    let adm = nondegeneracy_check(&gs)?.admissibility;
    let diverges = match adm.tail_behavior {
        TailBehavior::DivergesNegative {
            end_value, ratio, ..
        } => end_value < 0.0 && ratio >= 1e3,
        _ => false,
    };
    let prob = gs.problem();
    let r_max = prob.default_r_max();
    let above = classify(prob, &c, gs.d0 + 1e-4, r_max, 1e-10)?;
    let below = classify(prob, &c, gs.d0 - 1e-4, r_max, 1e-10)?;
    let mut low_ok = true;
    for k in 1..=20 {
        let d = c.b * k as f64 / 20.0;
        low_ok &= classify(prob, &c, d, r_max, 1e-10)?.is_positive();
    }
    let pass =
        adm.zero_count == 1 && diverges && above.is_crossing() && below.is_positive() && low_ok;
    Ok((
        pass,
        format!(
            "N={dim} p={p}: zeros {}, tail {:?}, d0+1e-4 {}, d0-1e-4 {}, (0,b] positive {low_ok}",
            adm.zero_count,
            adm.tail_behavior,
            above.name(),
            below.name()
        ),
    ))
}

fn c3_structure() -> Result<Outcome> {
    let (a, da) = structure(3, 3.0)?;
    let (b, db) = structure(2, 2.0)?;
    Ok(ok(a && b, format!("{da}; {db}")))
}

/// Fixed-step RK4 shooting for `u″ = rhs(r, u, u′)` started from a Taylor step.
/// Returns `Some(true)` if `u` crosses zero, `Some(false)` if it turns while positive.
fn rk4_shot(d: f64, u2_0: f64, rhs: &dyn Fn(f64, f64, f64) -> f64) -> Option<bool> {
    let h = 1e-4;
    let mut r = h;
    let mut u = d + 0.5 * u2_0 * h * h;
    let mut up = u2_0 * h;
    while r < 40.0 {
        let k1 = (up, rhs(r, u, up));
        let k2 = (
            up + 0.5 * h * k1.1,
            rhs(r + 0.5 * h, u + 0.5 * h * k1.0, up + 0.5 * h * k1.1),
        );
        let k3 = (
            up + 0.5 * h * k2.1,
            rhs(r + 0.5 * h, u + 0.5 * h * k2.0, up + 0.5 * h * k2.1),
        );
        let k4 = (up + h * k3.1, rhs(r + h, u + h * k3.0, up + h * k3.1));
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        up += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        r += h;
        if u < 0.0 {
            return Some(true);
        }
        if up > 0.0 {
            return Some(false);
        }
    }
    None
}

/// Bisection on the RK4 classification between a positive and a crossing height.
/// The bracket stays below `ceiling`, the upper zero of the nonlinearity.
fn rk4_ground(
    d_guess: f64,
    ceiling: f64,
    u2_0: &dyn Fn(f64) -> f64,
    rhs: &dyn Fn(f64, f64, f64) -> f64,
) -> Option<f64> {
    let mut lo = d_guess * (1.0 - 1e-3);
    let mut hi = d_guess + (1e-3 * d_guess).min(0.5 * (ceiling - d_guess));
    if rk4_shot(lo, u2_0(lo), rhs) != Some(false) || rk4_shot(hi, u2_0(hi), rhs) != Some(true) {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match rk4_shot(mid, u2_0(mid), rhs) {
            Some(true) => hi = mid,
            Some(false) => lo = mid,
            None => return Some(mid),
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

fn semilinear_oracle(dim: usize, model: SemilinearModel) -> Result<(f64, Option<f64>)> {
    let (gs, c) = ground(dim, model.clone())?;
    let n = dim as f64;
    let rhs = |r: f64, u: f64, up: f64| -(n - 1.0) / r * up - model.g(u);
    let u2 = |d: f64| -model.g(d) / n;
    Ok((gs.d0, rk4_ground(gs.d0, c.b_tilde, &u2, &rhs)))
}

fn c4_oracle() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, dim, model) in [
        ("power p=3 N=3", 3, SemilinearModel::power(1.0, 3.0)),
        (
            "cubic_quintic_focusing c=2.4 N=3",
            3,
            SemilinearModel::builtin(Family::CubicQuinticFocusing { c: 2.4 }),
        ),
    ] {
        let (d0, oracle) = semilinear_oracle(dim, model)?;
        let diff = oracle.map(|o| (o - d0).abs()).unwrap_or(f64::INFINITY);
        pass &= diff <= 1e-6;
        parts.push(format!(
            "{name}: d0 {d0:.12}, oracle {oracle:?}, diff {diff:.1e}"
        ));
    }
    // Quasilinear oracle: integrate a(u)(u″ + u′/r) + ½a′(u)u′² + h(u) = 0 directly.
    let h = SemilinearModel::power(1.0, 2.0);
    let sol = solve_quasilinear(
        &DiffusionModel::mnls(1.0),
        &h,
        2,
        &ShootingOptions::default(),
    )?;
    let a = |u: f64| 1.0 + 2.0 * u * u;
    let rhs = |r: f64, u: f64, up: f64| -up / r - (2.0 * u * up * up + h.g(u)) / a(u);
    let u2 = |d: f64| -h.g(d) / (2.0 * a(d));
    let oracle = rk4_ground(sol.u0(), f64::INFINITY, &u2, &rhs);
    let diff_u = oracle
        .map(|o| (o - sol.u0()).abs())
        .unwrap_or(f64::INFINITY);
    let diff_v = match oracle {
        Some(o) => (sol.transform.inverse(o)? - sol.dual.d0).abs(),
        None => f64::INFINITY,
    };
    pass &= diff_u <= 1e-6 && diff_v <= 1e-6;
    parts.push(format!(
        "dual-mNLS p=2 N=2: v0 {:.12}, u0 {:.12}, oracle u0 {oracle:?}, diff u {diff_u:.1e}, diff v {diff_v:.1e}",
        sol.dual.d0,
        sol.u0()
    ));
    Ok(ok(pass, parts.join("; ")))
}

fn c5_hypotheses() -> Result<Outcome> {
    let grid = GridSpec::default();
    let a = DiffusionModel::mnls(1.0);
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, dim, h) in [
        ("power l=1 p=3", 3, SemilinearModel::power(1.0, 3.0)),
        (
            "cubic_quintic_defocusing",
            3,
            SemilinearModel::builtin(Family::CubicQuinticDefocusing),
        ),
        (
            "cubic_quintic_focusing c=2.5",
            3,
            SemilinearModel::builtin(Family::CubicQuinticFocusing { c: 2.5 }),
        ),
        (
            "nagumo c=0.25",
            2,
            SemilinearModel::builtin(Family::Nagumo { c: 0.25 }),
        ),
    ] {
        let rep = check_quasilinear(&a, &h, &grid, dim)?;
        pass &= rep.all_pass();
        let failed = rep.failed();
        let mut line = format!(
            "{name} N={dim}: {}",
            if failed.is_empty() {
                "all pass".into()
            } else {
                format!("fails {failed:?}")
            }
        );
        for f in failed {
            if let Some(w) = rep.verdicts[f].witness.as_ref() {
                line.push_str(&format!(" witness s={:.4e} {:?}", w.s, w.values));
            }
        }
        parts.push(line);
    }
    let nag = check_quasilinear(
        &a,
        &SemilinearModel::builtin(Family::Nagumo { c: 0.6 }),
        &grid,
        2,
    )?;
    let h3 = &nag.verdicts["H3"];
    let nag_ok = h3.verdict == Verdict::Fail && h3.witness.is_some();
    pass &= nag_ok;
    parts.push(format!(
        "nagumo c=0.6: H3 {:?}, witness {}",
        h3.verdict,
        h3.witness.is_some()
    ));
    let cq = check_semilinear_model(
        &SemilinearModel::builtin(Family::CubicQuinticFocusing { c: 2.0 }),
        &grid,
        3,
    )?;
    let g3 = cq.verdict("G3");
    pass &= g3 == Some(Verdict::Fail);
    parts.push(format!(
        "cubic_quintic_focusing c=2.0: G3 {g3:?}, failed {:?}",
        cq.failed()
    ));
    Ok(ok(pass, parts.join("; ")))
}

fn c6_dual() -> Result<Outcome> {
    let a = DiffusionModel::mnls(1.0);
    let tr = solve_f(&a, 1e8, 1e-13)?;
    // ∫₀^t √(1 + 2x²) dx in closed form
    let prim = |t: f64| {
        0.5 * t * (1.0 + 2.0 * t * t).sqrt() + (2f64.sqrt() * t).asinh() / (2.0 * 2f64.sqrt())
    };
    let mut worst = 0.0f64;
    for s in [0.1, 1.0, 10.0, 100.0] {
        worst = worst.max((s - prim(tr.f(s)?)).abs());
    }
    let s = 1e8;
    let [f, fp, _] = tr.eval(s)?;
    let ratio = s * fp / f;
    let h = SemilinearModel::power(1.0, 3.0);
    let q = solve_quasilinear(
        &DiffusionModel::constant(1.0),
        &h,
        3,
        &ShootingOptions::default(),
    )?;
    let (gs, _) = ground(3, h)?;
    let dd = (q.dual.d0 - gs.d0).abs();
    Ok(ok(
        worst <= 1e-10 && (ratio - 0.5).abs() <= 1e-4 && dd <= 1e-8,
        format!("identity defect {worst:.2e}, s f'/f at 1e8 = {ratio:.8}, a=1 d0 diff {dd:.2e}"),
    ))
}

fn mnls(p: f64) -> Result<QuasilinearSolution> {
    solve_quasilinear(
        &DiffusionModel::mnls(1.0),
        &SemilinearModel::power(1.0, p),
        2,
        &ShootingOptions::default(),
    )
}

fn c7_sublinear() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for p in [1.5, 2.0, 2.5] {
        let sol = mnls(p)?;
        let k = sol.dual_constants.k_infty;
        let target = 0.5 * (p - 1.0);
        let nd = nondegeneracy_check(&sol.dual)?;
        let good = k < 1.0 && (k - target).abs() <= 1e-2 && nd.verdict == Strictness::Strict;
        pass &= good;
        parts.push(format!(
            "p={p}: u0 {:.8}, K_inf {k:.5} (target {target}), {:?}",
            sol.u0(),
            nd.verdict
        ));
    }
    Ok(ok(pass, parts.join("; ")))
}

fn c8_key_lemmas() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut record = |name: String, rep: KeyLemmaReport| {
        pass &= rep.all_pass();
        parts.push(format!(
            "{name}: {}",
            if rep.all_pass() {
                format!("all {} clauses pass", rep.checks.len())
            } else {
                format!("fails {:?}", rep.failures())
            }
        ));
    };
    for (dim, p) in [(3, 3.0), (2, 2.0)] {
        let (gs, c) = ground(dim, SemilinearModel::power(1.0, p))?;
        record(format!("power N={dim} p={p}"), key_lemma_report(&gs, &c)?);
    }
    for p in [1.5, 2.0, 2.5] {
        let sol = mnls(p)?;
        record(
            format!("dual mNLS p={p}"),
            key_lemma_report(&sol.dual, &sol.dual_constants)?,
        );
    }
    Ok(ok(pass, parts.join("; ")))
}

fn c9_spectrum() -> Result<Outcome> {
    let (gs, _) = ground(3, SemilinearModel::power(1.0, 3.0))?;
    let rep = ground_spectral_report(&gs, 4000, default_r_max(&gs))?;
    let sol = mnls(2.0)?;
    let mrep = mnls_kernel_report(&sol, 1.0, 1.0, 2.0, 4000, 1.5 * sol.dual.r_max)?;
    let fmt = |r: &SpectralReport| {
        r.verdicts
            .iter()
            .map(|(k, v)| {
                format!(
                    "{k}={}({:.3e})",
                    if v.pass { "ok" } else { "FAIL" },
                    v.value
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    Ok(ok(
        rep.all_pass() && mrep.all_pass(),
        format!("L: {}; mNLS: {}", fmt(&rep), fmt(&mrep)),
    ))
}

fn c10_sturm() -> Result<Outcome> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut interlaced = 0;
    for _ in 0..20 {
        let ra: f64 = rng.gen_range(0.5..5.0);
        let (a1, a2): (f64, f64) = (
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let u = solve_linear_radial(3, |_| 1.0, ra, [a1.cos(), a1.sin()], ra + 12.0, 1e-11)?;
        let v = solve_linear_radial(3, |_| 4.0, ra, [a2.cos(), a2.sin()], ra + 12.0, 1e-11)?;
        let (mu, nu) = (u.zeros[0], u.zeros[1]);
        if sturm_check(&u, &v, |_| 1.0, |_| 4.0, (mu, nu))? {
            interlaced += 1;
        }
    }
    let u = solve_linear_radial(3, |_| 1.0, 1.0, [0.0, 1.0], 12.0, 1e-11)?;
    let rejected = matches!(
        sturm_check(&u, &u, |_| 1.0, |_| 1.0, (u.zeros[0], u.zeros[1])),
        Err(Error::Precondition(_))
    );
    Ok(ok(
        interlaced == 20 && rejected,
        format!("{interlaced}/20 intervals interlace, degenerate pair rejected: {rejected}"),
    ))
}

fn main() {
    let criteria: [(&str, Check, u64); 10] = [
        ("closed-form integrator", c1_closed_form, 1),
        ("decay law", c2_decay, 10),
        ("uniqueness / non-degeneracy structure", c3_structure, 30),
        ("oracle equivalence", c4_oracle, 300),
        ("hypothesis checker", c5_hypotheses, 10),
        ("dual transform identities", c6_dual, 5),
        ("sublinear regime", c7_sublinear, 120),
        ("key-lemma verifier", c8_key_lemmas, 60),
        ("spectral picture", c9_spectrum, 180),
        ("Sturm self-test", c10_sturm, 5),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = check();
        let el = t.elapsed();
        let in_time = el <= Duration::from_secs(*budget);
        let (pass, detail) = match out {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.2} s, budget {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            el.as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
