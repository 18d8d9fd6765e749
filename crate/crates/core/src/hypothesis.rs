//! Grid-sampled certification of the structural hypotheses on `g`, and on
//! the quasilinear pair `(a, h)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dual::DiffusionModel;
use crate::error::{Error, Result};
use crate::nonlinearity::{
    growth_function, structural_constants, SemilinearModel, StructuralConstants,
};
use crate::serde_f64;

/// Slack for monotonicity tests between adjacent samples.
pub const MONOTONE_SLACK: f64 = 1e-10;
/// Slack for `K ≤ 1`.
pub const K_ONE_SLACK: f64 = 1e-12;
/// Half-width of the undetermined band around a critical exponent.
pub const LIMIT_BAND: f64 = 1e-3;

/// Log-spaced sampling grid on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub per_decade: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo: 1e-8,
            hi: 1e8,
            per_decade: 10_000,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let decades = (self.hi / self.lo).log10();
        let n = (decades * self.per_decade as f64).ceil().max(1.0) as usize;
        let step = decades / n as f64;
        (0..=n)
            .map(|i| self.lo * 10f64.powf(i as f64 * step))
            .collect()
    }

    /// Grid points plus dense clusters around each finite `x` in `refine`.
    pub fn points_refined(&self, refine: &[f64]) -> Vec<f64> {
        let mut pts = self.points();
        for &x in refine
            .iter()
            .filter(|x| x.is_finite() && **x > self.lo && **x < self.hi)
        {
            for k in -100..=100 {
                pts.push(x * (1.0 + 1e-3 * k as f64 / 100.0));
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn doubled(&self) -> Self {
        Self {
            per_decade: 2 * self.per_decade,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Undetermined,
}

/// A reproducible failure point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub s: f64,
    pub values: BTreeMap<String, f64>,
}

impl Witness {
    fn new(s: f64, values: &[(&str, f64)]) -> Self {
        Self {
            s,
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub verdict: Verdict,
    /// Worst-case margin; positive when satisfied.
    #[serde(with = "serde_f64")]
    pub margin: f64,
    pub witness: Option<Witness>,
    pub note: String,
}

impl ConditionResult {
    fn pass(margin: f64, note: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Pass,
            margin,
            witness: None,
            note: note.into(),
        }
    }

    fn fail(margin: f64, witness: Witness, note: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Fail,
            margin,
            witness: Some(witness),
            note: note.into(),
        }
    }

    fn undetermined(margin: f64, note: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Undetermined,
            margin,
            witness: None,
            note: note.into(),
        }
    }

    fn and(self, other: ConditionResult) -> ConditionResult {
        use Verdict::*;
        let verdict = match (self.verdict, other.verdict) {
            (Fail, _) | (_, Fail) => Fail,
            (Undetermined, _) | (_, Undetermined) => Undetermined,
            _ => Pass,
        };
        let witness = if self.verdict == Fail {
            self.witness
        } else {
            other.witness
        };
        ConditionResult {
            verdict,
            margin: self.margin.min(other.margin),
            witness,
            note: format!("{}; {}", self.note, other.note),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub kind: String,
    pub model: String,
    pub dim: usize,
    pub grid_spec: GridSpec,
    pub verdicts: BTreeMap<String, ConditionResult>,
    pub extra: BTreeMap<String, f64>,
    pub method: String,
}

impl HypothesisReport {
    fn new(kind: &str, model: String, dim: usize, grid: GridSpec) -> Self {
        Self {
            kind: kind.into(),
            model,
            dim,
            grid_spec: grid,
            verdicts: BTreeMap::new(),
            extra: BTreeMap::new(),
            method: "grid sampling; no interval certification".into(),
        }
    }

    pub fn verdict(&self, label: &str) -> Option<Verdict> {
        self.verdicts.get(label).map(|c| c.verdict)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.labels_with(Verdict::Fail)
    }

    pub fn undetermined(&self) -> Vec<&str> {
        self.labels_with(Verdict::Undetermined)
    }

    fn labels_with(&self, v: Verdict) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, c)| c.verdict == v)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// 0 all pass, 2 any fail, 3 undetermined without fails.
    pub fn exit_code(&self) -> i32 {
        if !self.failed().is_empty() {
            2
        } else if !self.undetermined().is_empty() {
            3
        } else {
            0
        }
    }
}

fn origin_condition(m: &SemilinearModel) -> ConditionResult {
    let (g0, gp0) = (m.g(0.0), m.g_prime(0.0));
    if g0.abs() > 1e-14 || !(gp0 < 0.0) {
        return ConditionResult::fail(
            -gp0,
            Witness::new(0.0, &[("g", g0), ("g_prime", gp0)]),
            "g(0) = 0, g'(0) < 0",
        );
    }
    ConditionResult::pass(-gp0, format!("g'(0) = {gp0}"))
}

fn near(s: f64, x: f64) -> bool {
    x.is_finite() && (s - x).abs() <= 1e-9 * x
}

/// Sign segment of `g`: `b`, `b̃` and, when the constants cannot be formed,
/// the failure to report for the sign condition.
struct Segment {
    b: f64,
    b_tilde: f64,
    s_star: f64,
    failure: Option<ConditionResult>,
}

fn segment_of(m: &SemilinearModel, pts: &[f64], bound: f64) -> Result<Segment> {
    match structural_constants(m, bound) {
        Ok(c) => Ok(Segment {
            b: c.b,
            b_tilde: c.b_tilde,
            s_star: c.s_star,
            failure: None,
        }),
        Err(Error::StructureNotFound(msg)) => {
            let (s, g) = pts
                .iter()
                .map(|&s| (s, m.g(s)))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            Ok(Segment {
                b: f64::INFINITY,
                b_tilde: f64::INFINITY,
                s_star: f64::INFINITY,
                failure: Some(ConditionResult::fail(
                    g.min(0.0),
                    Witness::new(s, &[("g", g)]),
                    msg,
                )),
            })
        }
        Err(Error::TooManyZeros(at)) => {
            let root = |hi: f64| {
                crate::roots::brent(|s| m.g(s), hi / 10f64.powf(1.0 / 200.0), hi, 1e-14 * hi)
                    .unwrap_or(hi)
            };
            let s = at[2];
            Ok(Segment {
                b: root(at[0]),
                b_tilde: root(at[1]),
                s_star: f64::INFINITY,
                failure: Some(ConditionResult::fail(
                    f64::NEG_INFINITY,
                    Witness::new(s, &[("g", m.g(s))]),
                    format!("g has {} positive zeros", at.len()),
                )),
            })
        }
        Err(e) => Err(e),
    }
}

/// Maximiser of `f` near the grid point `pts[i]`.
fn refine_max<F: Fn(f64) -> f64>(f: F, pts: &[f64], i: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (pts[i.saturating_sub(1)], pts[(i + 1).min(pts.len() - 1)]);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let x = 0.5 * (lo + hi);
    if f(x) >= f(pts[i]) {
        (x, f(x))
    } else {
        (pts[i], f(pts[i]))
    }
}

fn sign_condition(m: &SemilinearModel, seg: &Segment, pts: &[f64]) -> ConditionResult {
    if let Some(f) = &seg.failure {
        return f.clone();
    }
    let (b, bt) = (seg.b, seg.b_tilde);
    for &s in pts {
        if near(s, b) || near(s, bt) {
            continue;
        }
        let g = m.g(s);
        let want_positive = s > b && s < bt;
        if !(g.is_finite() && (g > 0.0) == want_positive && g != 0.0) {
            let region = if s < b {
                "(0, b)"
            } else if s < bt {
                "(b, b~)"
            } else {
                "(b~, inf)"
            };
            return ConditionResult::fail(
                -g.abs(),
                Witness::new(s, &[("g", g)]),
                format!("sign of g on {region}"),
            );
        }
    }
    let gpb = m.g_prime(b);
    if !(gpb > 0.0) {
        return ConditionResult::fail(gpb, Witness::new(b, &[("g_prime", gpb)]), "g'(b) > 0");
    }
    let mut margin = gpb;
    if bt.is_finite() {
        let gpt = m.g_prime(bt);
        if !(gpt < 0.0) {
            return ConditionResult::fail(
                -gpt,
                Witness::new(bt, &[("g_prime", gpt)]),
                "g'(b~) < 0",
            );
        }
        margin = margin.min(-gpt);
    }
    ConditionResult::pass(margin, format!("b = {b}, b~ = {bt}"))
}

/// `max G > 0` over `(lo, hi]`, with the maximiser refined between grid points.
fn positive_mass(
    m: &SemilinearModel,
    lo: f64,
    hi: f64,
    pts: &[f64],
    label: &str,
) -> ConditionResult {
    let sel: Vec<f64> = pts
        .iter()
        .copied()
        .filter(|&s| s > lo && s <= hi)
        .chain(hi.is_finite().then_some(hi))
        .collect();
    if sel.is_empty() {
        return ConditionResult::fail(
            f64::NEG_INFINITY,
            Witness::new(lo, &[(label, m.g_anti(lo))]),
            "empty range",
        );
    }
    let i = (0..sel.len())
        .max_by(|&x, &y| m.g_anti(sel[x]).total_cmp(&m.g_anti(sel[y])))
        .unwrap();
    let (s, v) = refine_max(|s| m.g_anti(s), &sel, i);
    if v > 0.0 {
        ConditionResult::pass(v, format!("{label}({s}) = {v} > 0"))
    } else {
        ConditionResult::fail(
            v,
            Witness::new(s, &[(label, v)]),
            format!("max of {label} is not positive"),
        )
    }
}

fn decreasing_growth(m: &SemilinearModel, lo: f64, hi: f64, pts: &[f64]) -> ConditionResult {
    let mut prev: Option<(f64, f64)> = None;
    let mut margin = f64::INFINITY;
    for &s in pts
        .iter()
        .filter(|&&s| s > lo && s < hi && !near(s, lo) && !near(s, hi))
    {
        let Ok(k) = growth_function(m, s) else {
            continue;
        };
        if !k.is_finite() {
            continue;
        }
        if let Some((sp, kp)) = prev {
            let rise = (k - kp) / (1.0 + kp.abs());
            margin = margin.min(-rise);
            if rise > MONOTONE_SLACK {
                return ConditionResult::fail(
                    -rise,
                    Witness::new(s, &[("s_prev", sp), ("K_prev", kp), ("K", k)]),
                    "K_g increases between adjacent samples",
                );
            }
        }
        prev = Some((s, k));
    }
    ConditionResult::pass(margin.min(1.0), format!("K_g decreasing on ({lo}, {hi})"))
}

fn growth_below_one(m: &SemilinearModel, b: f64, pts: &[f64]) -> ConditionResult {
    let mut margin = f64::INFINITY;
    for &s in pts.iter().filter(|&&s| s < b && !near(s, b)) {
        let Ok(k) = growth_function(m, s) else {
            continue;
        };
        margin = margin.min(1.0 - k);
        if k > 1.0 + K_ONE_SLACK {
            return ConditionResult::fail(1.0 - k, Witness::new(s, &[("K", k)]), "K_g > 1 below b");
        }
    }
    ConditionResult::pass(margin, "K_g <= 1 on (0, b)")
}

/// `limsup g(s)/s^crit ≤ 0` (N ≥ 3) or `limsup g(s)/e^{α s^q} ≤ 0` for all `α > 0` (N = 2),
/// judged from the top two decades of the grid.
fn growth_cap(
    m: &SemilinearModel,
    dim: usize,
    crit: f64,
    q: f64,
    grid: &GridSpec,
) -> ConditionResult {
    let top = grid.hi;
    let g_top = m.g(top);
    if !g_top.is_finite() {
        return ConditionResult::fail(
            f64::NEG_INFINITY,
            Witness::new(top, &[("g", g_top)]),
            "g is not finite at the grid top",
        );
    }
    if g_top <= 0.0 {
        return ConditionResult::pass(-g_top, "g <= 0 at the grid top");
    }
    let lo = top / 100.0;
    let pts: Vec<f64> = (0..=200)
        .map(|i| lo * 10f64.powf(2.0 * i as f64 / 200.0))
        .collect();
    if pts.iter().any(|&s| !(m.g(s) > 0.0)) {
        return ConditionResult::undetermined(0.0, "g changes sign in the top two decades");
    }
    if dim >= 3 {
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        let n = pts.len() as f64;
        for &s in &pts {
            let (x, y) = (s.ln(), m.g(s).ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let margin = crit - slope;
        let note = format!("fitted growth exponent {slope:.6} vs critical {crit:.6}");
        if margin > LIMIT_BAND {
            ConditionResult::pass(margin, note)
        } else if margin < -LIMIT_BAND {
            ConditionResult::fail(
                margin,
                Witness::new(top, &[("g", g_top), ("exponent", slope)]),
                note,
            )
        } else {
            ConditionResult::undetermined(margin, note)
        }
    } else {
        let rate = |s: f64| m.g(s).ln() / s.powf(q);
        let (r_lo, r_top) = (rate(lo), rate(top));
        let note = format!("ln g / s^{q} = {r_top:e} at the grid top");
        if r_top < LIMIT_BAND {
            ConditionResult::pass(LIMIT_BAND - r_top, note)
        } else if r_top >= r_lo {
            ConditionResult::fail(
                LIMIT_BAND - r_top,
                Witness::new(top, &[("g", g_top), ("rate", r_top)]),
                note,
            )
        } else {
            ConditionResult::undetermined(LIMIT_BAND - r_top, note)
        }
    }
}

fn check_consistency(model: &SemilinearModel, consts: &StructuralConstants) -> Result<()> {
    let fresh = structural_constants(model, consts.search_bound)?;
    let close = |x: f64, y: f64| {
        (x.is_infinite() && y.is_infinite()) || (x - y).abs() <= 1e-8 * x.abs().max(1.0)
    };
    if !close(fresh.b, consts.b) || !close(fresh.b_tilde, consts.b_tilde) {
        return Err(Error::Precondition(format!(
            "constants (b = {}, b~ = {}) do not belong to the model (b = {}, b~ = {})",
            consts.b, consts.b_tilde, fresh.b, fresh.b_tilde
        )));
    }
    Ok(())
}

/// Conditions G1–G6 for `g` in dimension `dim`.
pub fn check_semilinear(
    model: &SemilinearModel,
    consts: &StructuralConstants,
    grid: &GridSpec,
    dim: usize,
) -> Result<HypothesisReport> {
    if dim < 2 {
        return Err(Error::Precondition("dimension must be at least 2".into()));
    }
    check_consistency(model, consts)?;
    let seg = Segment {
        b: consts.b,
        b_tilde: consts.b_tilde,
        s_star: consts.s_star,
        failure: None,
    };
    let pts = grid.points_refined(&[consts.b, consts.b_tilde, consts.s_star]);
    Ok(semilinear_report(model, &seg, &pts, grid, dim))
}

/// As [`check_semilinear`], locating the constants itself. Models without a
/// valid sign structure get a report (failing G2) instead of an error.
pub fn check_semilinear_model(
    model: &SemilinearModel,
    grid: &GridSpec,
    dim: usize,
) -> Result<HypothesisReport> {
    if dim < 2 {
        return Err(Error::Precondition("dimension must be at least 2".into()));
    }
    let coarse = grid.points();
    let seg = segment_of(model, &coarse, grid.hi)?;
    let pts = grid.points_refined(&[seg.b, seg.b_tilde, seg.s_star]);
    Ok(semilinear_report(model, &seg, &pts, grid, dim))
}

fn semilinear_report(
    model: &SemilinearModel,
    seg: &Segment,
    pts: &[f64],
    grid: &GridSpec,
    dim: usize,
) -> HypothesisReport {
    let pts = pts.to_vec();
    let mut rep = HypothesisReport::new("semilinear", model.label().to_string(), dim, *grid);
    let n = dim as f64;
    let crit = if dim >= 3 {
        (n + 2.0) / (n - 2.0)
    } else {
        f64::INFINITY
    };
    let mass_lo = if seg.b.is_finite() { seg.b } else { 0.0 };
    rep.verdicts.insert("G1".into(), origin_condition(model));
    rep.verdicts
        .insert("G2".into(), sign_condition(model, seg, &pts));
    rep.verdicts.insert(
        "G3".into(),
        positive_mass(model, mass_lo, seg.b_tilde, &pts, "G"),
    );
    rep.verdicts.insert(
        "G4".into(),
        decreasing_growth(model, seg.b, seg.b_tilde, &pts),
    );
    rep.verdicts
        .insert("G5".into(), growth_below_one(model, seg.b, &pts));
    rep.verdicts
        .insert("G6".into(), growth_cap(model, dim, crit, 2.0, grid));
    rep.extra.insert("b".into(), seg.b);
    rep.extra.insert("b_tilde".into(), seg.b_tilde);
    rep
}

fn diffusion_checks(
    a: &DiffusionModel,
    beta: f64,
    beta_tilde: f64,
    pts: &[f64],
    grid: &GridSpec,
    rep: &mut HypothesisReport,
) {
    // A1
    let mut min_a = a.a(0.0);
    let mut a1 = None;
    for &t in std::iter::once(&0.0).chain(pts) {
        let (v, d2) = (a.a(t), a.a_second(t));
        if !(v > 0.0) || !d2.is_finite() {
            a1 = Some(ConditionResult::fail(
                v,
                Witness::new(t, &[("a", v), ("a_second", d2)]),
                "a > 0 with finite a''",
            ));
            break;
        }
        min_a = min_a.min(v);
    }
    rep.verdicts.insert(
        "A1".into(),
        a1.unwrap_or_else(|| ConditionResult::pass(min_a, format!("inf a = {min_a} on the grid"))),
    );

    // A2
    let mut min_ap = f64::INFINITY;
    let mut a2 = None;
    for &t in pts {
        let d = a.a_prime(t);
        min_ap = min_ap.min(d);
        if d < -1e-12 * (1.0 + a.a(t)) {
            a2 = Some(ConditionResult::fail(
                d,
                Witness::new(t, &[("a_prime", d)]),
                "a' >= 0",
            ));
            break;
        }
    }
    rep.verdicts.insert(
        "A2".into(),
        a2.unwrap_or_else(|| ConditionResult::pass(min_ap, "a' >= 0 on the grid")),
    );

    // A3, as its two parts.
    let k_beta = a.growth(beta);
    let mut part1 = ConditionResult::pass(
        f64::INFINITY,
        format!("K_a non-decreasing on [{beta}, {beta_tilde})"),
    );
    let mut prev: Option<(f64, f64)> = None;
    for &t in pts.iter().filter(|&&t| t >= beta && t < beta_tilde) {
        let k = a.growth(t);
        if let Some((tp, kp)) = prev {
            let drop = (kp - k) / (1.0 + kp.abs());
            part1.margin = part1.margin.min(-drop);
            if drop > MONOTONE_SLACK {
                part1 = ConditionResult::fail(
                    -drop,
                    Witness::new(t, &[("t_prev", tp), ("K_a_prev", kp), ("K_a", k)]),
                    "K_a decreases on [beta, beta~)",
                );
                break;
            }
        }
        prev = Some((t, k));
    }
    let mut part2 = ConditionResult::pass(
        f64::INFINITY,
        format!("K_a <= K_a(beta) = {k_beta} on (0, beta)"),
    );
    for &t in pts.iter().filter(|&&t| t < beta) {
        let k = a.growth(t);
        part2.margin = part2.margin.min(k_beta - k);
        if k > k_beta + MONOTONE_SLACK * (1.0 + k_beta.abs()) {
            part2 = ConditionResult::fail(
                k_beta - k,
                Witness::new(t, &[("K_a", k), ("K_a_beta", k_beta)]),
                "K_a > K_a(beta) below beta",
            );
            break;
        }
    }
    rep.extra
        .insert("A3_nondecreasing_margin".into(), part1.margin);
    rep.extra
        .insert("A3_below_beta_margin".into(), part2.margin);
    rep.verdicts.insert("A3".into(), part1.and(part2));

    // A4: a(t)/t^ℓ over the top two decades.
    let top = grid.hi;
    let (r2, r1, r0) = (a.ratio(top / 100.0), a.ratio(top / 10.0), a.ratio(top));
    let slope = (r0 / r1).ln() / 10f64.ln();
    let rel_change = (r0 - r1).abs() / r0.abs().max(f64::MIN_POSITIVE);
    rep.extra.insert("a_inf_estimate".into(), r0);
    let mut note = format!("a(t)/t^ell = {r2:e}, {r1:e}, {r0:e} over the top two decades");
    if let Some(declared) = a.a_inf {
        rep.extra.insert("a_inf_declared".into(), declared);
        if (declared - r0).abs() > 1e-3 * declared.abs() {
            note.push_str(&format!(
                "; estimate differs from declared a_inf = {declared}"
            ));
        }
    }
    let a4 = if !(r0 > 0.0) || !r0.is_finite() {
        ConditionResult::fail(r0, Witness::new(top, &[("ratio", r0)]), note)
    } else if rel_change <= LIMIT_BAND && (r0 - r1).abs() <= (r1 - r2).abs() + 1e-15 * r0 {
        ConditionResult::pass(r0, note)
    } else if slope.abs() > LIMIT_BAND {
        ConditionResult::fail(
            -slope.abs(),
            Witness::new(top, &[("ratio", r0), ("log_slope", slope)]),
            note,
        )
    } else {
        ConditionResult::undetermined(r0, note)
    };
    rep.verdicts.insert("A4".into(), a4);
}

/// Conditions H1–H5 on `h` and A1–A4 on `a` in dimension `dim`.
pub fn check_quasilinear(
    a_model: &DiffusionModel,
    h_model: &SemilinearModel,
    grid: &GridSpec,
    dim: usize,
) -> Result<HypothesisReport> {
    if dim < 2 {
        return Err(Error::Precondition("dimension must be at least 2".into()));
    }
    if !(a_model.ell > 0.0) {
        return Err(Error::Precondition("ell must be positive".into()));
    }
    let seg = segment_of(h_model, &grid.points(), grid.hi)?;
    let pts = grid.points_refined(&[seg.b, seg.b_tilde]);
    let mut rep = HypothesisReport::new(
        "quasilinear",
        format!("a = {}, h = {}", a_model.label(), h_model.label()),
        dim,
        *grid,
    );
    let n = dim as f64;
    let ell = a_model.ell;
    let crit = if dim >= 3 {
        ((ell + 1.0) * n + 2.0) / (n - 2.0)
    } else {
        f64::INFINITY
    };
    rep.verdicts.insert("H1".into(), origin_condition(h_model));
    rep.verdicts
        .insert("H2".into(), sign_condition(h_model, &seg, &pts));
    let mass_lo = if seg.b.is_finite() { seg.b } else { 0.0 };
    let h3 = positive_mass(h_model, mass_lo, seg.b_tilde, &pts, "H");
    rep.verdicts.insert("H3".into(), h3);
    let h4 = decreasing_growth(h_model, seg.b, seg.b_tilde, &pts)
        .and(growth_below_one(h_model, seg.b, &pts));
    rep.verdicts.insert("H4".into(), h4);
    rep.verdicts
        .insert("H5".into(), growth_cap(h_model, dim, crit, ell + 2.0, grid));
    let beta = if seg.b.is_finite() { seg.b } else { grid.hi };
    diffusion_checks(a_model, beta, seg.b_tilde, &pts, grid, &mut rep);
    rep.extra.insert("beta".into(), seg.b);
    rep.extra.insert("beta_tilde".into(), seg.b_tilde);
    rep.extra.insert("ell".into(), ell);
    Ok(rep)
}
