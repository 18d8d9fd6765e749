//! Scalar nonlinearities `g` and their structural functionals.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::roots::{brent, ROOT_XTOL};
use crate::serde_f64;

/// A nonlinearity together with its derivative and antiderivative `G(s) = ∫₀ˢ g`.
pub trait Nonlinearity: Send + Sync + fmt::Debug {
    fn g(&self, s: f64) -> f64;
    fn g_prime(&self, s: f64) -> f64;
    fn g_anti(&self, s: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Builtin families with closed-form `g`, `g′`, `G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `−λs + |s|^{p−1}s`
    Power { lambda: f64, p: f64 },
    /// `−s − s³ + s⁵`
    CubicQuinticDefocusing,
    /// `−s + cs³ − s⁵`
    CubicQuinticFocusing { c: f64 },
    /// `s(s − c)(1 − s)`
    Nagumo { c: f64 },
    /// `−s ± c|s|s ∓ s³`
    QuadraticCubic { sign: Sign, c: f64 },
    /// `−λs`
    Linear { lambda: f64 },
}

impl Family {
    /// Build a family from its name and a JSON object of parameters.
    pub fn from_name(name: &str, params: &Value) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params.get(key).and_then(Value::as_f64).ok_or_else(|| {
                Error::Config(format!("family '{name}' needs numeric parameter '{key}'"))
            })
        };
        let get_or = |key: &str, default: f64| -> Result<f64> {
            match params.get(key) {
                None => Ok(default),
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::Config(format!("parameter '{key}' must be numeric"))),
            }
        };
        Ok(match name {
            "power" => Family::Power {
                lambda: get_or("lambda", 1.0)?,
                p: get("p")?,
            },
            "cubic_quintic_defocusing" => Family::CubicQuinticDefocusing,
            "cubic_quintic_focusing" => Family::CubicQuinticFocusing { c: get("c")? },
            "nagumo" => Family::Nagumo { c: get("c")? },
            "quadratic_cubic" => {
                let sign = match params.get("sign").and_then(Value::as_str).unwrap_or("plus") {
                    "plus" | "+" => Sign::Plus,
                    "minus" | "-" => Sign::Minus,
                    other => return Err(Error::Config(format!("unknown sign '{other}'"))),
                };
                Family::QuadraticCubic { sign, c: get("c")? }
            }
            "linear" => Family::Linear {
                lambda: get_or("lambda", 1.0)?,
            },
            other => return Err(Error::Config(format!("unknown family '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Power { .. } => "power",
            Family::CubicQuinticDefocusing => "cubic_quintic_defocusing",
            Family::CubicQuinticFocusing { .. } => "cubic_quintic_focusing",
            Family::Nagumo { .. } => "nagumo",
            Family::QuadraticCubic { .. } => "quadratic_cubic",
            Family::Linear { .. } => "linear",
        }
    }
}

impl Nonlinearity for Family {
    fn g(&self, s: f64) -> f64 {
        match *self {
            Family::Power { lambda, p } => -lambda * s + s.abs().powf(p - 1.0) * s,
            Family::CubicQuinticDefocusing => -s - s.powi(3) + s.powi(5),
            Family::CubicQuinticFocusing { c } => -s + c * s.powi(3) - s.powi(5),
            Family::Nagumo { c } => s * (s - c) * (1.0 - s),
            Family::QuadraticCubic { sign, c } => {
                let e = sign.value();
                -s + e * c * s.abs() * s - e * s.powi(3)
            }
            Family::Linear { lambda } => -lambda * s,
        }
    }

    fn g_prime(&self, s: f64) -> f64 {
        match *self {
            Family::Power { lambda, p } => -lambda + p * s.abs().powf(p - 1.0),
            Family::CubicQuinticDefocusing => -1.0 - 3.0 * s * s + 5.0 * s.powi(4),
            Family::CubicQuinticFocusing { c } => -1.0 + 3.0 * c * s * s - 5.0 * s.powi(4),
            Family::Nagumo { c } => -3.0 * s * s + 2.0 * (1.0 + c) * s - c,
            Family::QuadraticCubic { sign, c } => {
                let e = sign.value();
                -1.0 + 2.0 * e * c * s.abs() - 3.0 * e * s * s
            }
            Family::Linear { lambda } => -lambda,
        }
    }

    fn g_anti(&self, s: f64) -> f64 {
        match *self {
            Family::Power { lambda, p } => {
                -0.5 * lambda * s * s + s.abs().powf(p + 1.0) / (p + 1.0)
            }
            Family::CubicQuinticDefocusing => -0.5 * s * s - 0.25 * s.powi(4) + s.powi(6) / 6.0,
            Family::CubicQuinticFocusing { c } => {
                -0.5 * s * s + 0.25 * c * s.powi(4) - s.powi(6) / 6.0
            }
            Family::Nagumo { c } => {
                -0.5 * c * s * s + (1.0 + c) * s.powi(3) / 3.0 - 0.25 * s.powi(4)
            }
            Family::QuadraticCubic { sign, c } => {
                let e = sign.value();
                -0.5 * s * s + e * c * s.abs().powi(3) / 3.0 - 0.25 * e * s.powi(4)
            }
            Family::Linear { lambda } => -0.5 * lambda * s * s,
        }
    }
}

#[derive(Debug)]
struct ExprModel {
    g: Expr,
    g_prime: Expr,
    g_anti: Expr,
}

impl Nonlinearity for ExprModel {
    fn g(&self, s: f64) -> f64 {
        self.g.eval(s)
    }
    fn g_prime(&self, s: f64) -> f64 {
        self.g_prime.eval(s)
    }
    fn g_anti(&self, s: f64) -> f64 {
        self.g_anti.eval(s)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

struct ClosureModel {
    g: ScalarFn,
    g_prime: ScalarFn,
    g_anti: ScalarFn,
}

impl fmt::Debug for ClosureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ClosureModel")
    }
}

impl Nonlinearity for ClosureModel {
    fn g(&self, s: f64) -> f64 {
        (self.g)(s)
    }
    fn g_prime(&self, s: f64) -> f64 {
        (self.g_prime)(s)
    }
    fn g_anti(&self, s: f64) -> f64 {
        (self.g_anti)(s)
    }
}

/// A semilinear model: the nonlinearity plus an optional builtin tag.
#[derive(Clone)]
pub struct SemilinearModel {
    inner: Arc<dyn Nonlinearity>,
    family: Option<Family>,
    label: String,
}

impl fmt::Debug for SemilinearModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemilinearModel")
            .field("label", &self.label)
            .field("family", &self.family)
            .finish()
    }
}

impl SemilinearModel {
    pub fn builtin(family: Family) -> Self {
        let label = match family {
            Family::Power { lambda, p } => format!("power(lambda={lambda}, p={p})"),
            Family::CubicQuinticDefocusing => "cubic_quintic_defocusing".into(),
            Family::CubicQuinticFocusing { c } => format!("cubic_quintic_focusing(c={c})"),
            Family::Nagumo { c } => format!("nagumo(c={c})"),
            Family::QuadraticCubic { sign, c } => format!("quadratic_cubic({sign:?}, c={c})"),
            Family::Linear { lambda } => format!("linear(lambda={lambda})"),
        };
        Self {
            inner: Arc::new(family),
            family: Some(family),
            label,
        }
    }

    pub fn power(lambda: f64, p: f64) -> Self {
        Self::builtin(Family::Power { lambda, p })
    }

    pub fn from_nonlinearity(label: impl Into<String>, inner: Arc<dyn Nonlinearity>) -> Self {
        Self {
            inner,
            family: None,
            label: label.into(),
        }
    }

    pub fn from_closures<G, Gp, Ga>(label: impl Into<String>, g: G, g_prime: Gp, g_anti: Ga) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        Gp: Fn(f64) -> f64 + Send + Sync + 'static,
        Ga: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_nonlinearity(
            label,
            Arc::new(ClosureModel {
                g: Arc::new(g),
                g_prime: Arc::new(g_prime),
                g_anti: Arc::new(g_anti),
            }),
        )
    }

    /// Parse a user model; the supplied derivative and antiderivative are
    /// spot-checked against finite differences of `g` and `G`.
    pub fn from_exprs(g: &str, g_prime: &str, g_anti: &str) -> Result<Self> {
        let m = ExprModel {
            g: Expr::parse(g)?,
            g_prime: Expr::parse(g_prime)?,
            g_anti: Expr::parse(g_anti)?,
        };
        for &s in &[0.05, 0.3, 0.7, 1.1, 1.9, 3.7] {
            let h = 1e-5 * (1.0 + s);
            let dg = (m.g(s + h) - m.g(s - h)) / (2.0 * h);
            let dga = (m.g_anti(s + h) - m.g_anti(s - h)) / (2.0 * h);
            if !dg.is_finite() || !dga.is_finite() {
                continue;
            }
            if (dg - m.g_prime(s)).abs() > 1e-5 * (1.0 + dg.abs()) {
                return Err(Error::Config(format!(
                    "expr_gprime disagrees with the derivative of expr_g at s = {s}"
                )));
            }
            if (dga - m.g(s)).abs() > 1e-5 * (1.0 + dga.abs()) {
                return Err(Error::Config(format!(
                    "expr_G disagrees with the antiderivative of expr_g at s = {s}"
                )));
            }
        }
        if m.g_anti(0.0).abs() > 1e-12 {
            return Err(Error::Config("expr_G must vanish at s = 0".into()));
        }
        Ok(Self::from_nonlinearity(format!("expr({g})"), Arc::new(m)))
    }

    /// `{family, params}` or `{expr_g, expr_gprime, expr_G}`.
    pub fn from_config(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config("model config must be an object".into()))?;
        if let Some(name) = obj.get("family") {
            let name = name
                .as_str()
                .ok_or_else(|| Error::Config("'family' must be a string".into()))?;
            for key in obj.keys() {
                if key != "family" && key != "params" {
                    return Err(Error::Config(format!("unknown model key '{key}'")));
                }
            }
            let empty = Value::Object(Default::default());
            let params = obj.get("params").unwrap_or(&empty);
            return Ok(Self::builtin(Family::from_name(name, params)?));
        }
        let field = |k: &str| {
            obj.get(k)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Config(format!("model config needs string '{k}'")))
        };
        for key in obj.keys() {
            if !matches!(key.as_str(), "expr_g" | "expr_gprime" | "expr_G") {
                return Err(Error::Config(format!("unknown model key '{key}'")));
            }
        }
        Self::from_exprs(field("expr_g")?, field("expr_gprime")?, field("expr_G")?)
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn g(&self, s: f64) -> f64 {
        self.inner.g(s)
    }

    #[inline]
    pub fn g_prime(&self, s: f64) -> f64 {
        self.inner.g_prime(s)
    }

    #[inline]
    pub fn g_anti(&self, s: f64) -> f64 {
        self.inner.g_anti(s)
    }
}

/// `K_g(s) = s g′(s) / g(s)`.
pub fn growth_function(model: &SemilinearModel, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain {
            what: "s",
            value: s,
            domain: "(0, inf)".into(),
        });
    }
    let g = model.g(s);
    let sgp = s * model.g_prime(s);
    if g.abs() < 1e-14 * (1.0 + sgp.abs()) {
        return Err(Error::Pole { s });
    }
    Ok(sgp / g)
}

/// `I(s, λ) = λ s g′(s) − (λ + 2) g(s)`.
pub fn i_function(model: &SemilinearModel, s: f64, lambda: f64) -> f64 {
    lambda * s * model.g_prime(s) - (lambda + 2.0) * model.g(s)
}

/// `Λ(t) = 2 / (K_g(t) − 1)` for `t ∈ (b, s*)`.
pub fn lambda_map(model: &SemilinearModel, consts: &StructuralConstants, t: f64) -> Result<f64> {
    let domain_err = || Error::Domain {
        what: "t",
        value: t,
        domain: format!("({}, {})", consts.b, consts.s_star),
    };
    if !(t > consts.b && t < consts.s_star) {
        return Err(domain_err());
    }
    let k = growth_function(model, t)?;
    if !(k > 1.0) {
        return Err(domain_err());
    }
    Ok(2.0 / (k - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralConstants {
    pub b: f64,
    #[serde(with = "serde_f64")]
    pub b_tilde: f64,
    /// Smallest point with `G(ζ) ≥ 1e−10`, if one exists below `b̃`.
    pub zeta: Option<f64>,
    #[serde(with = "serde_f64")]
    pub s_star: f64,
    #[serde(with = "serde_f64")]
    pub k_infty: f64,
    pub search_bound: f64,
}

impl StructuralConstants {
    pub fn b_tilde_finite(&self) -> bool {
        self.b_tilde.is_finite()
    }

    /// Upper end of the positive segment of `g`, capped at the search bound.
    pub fn upper(&self) -> f64 {
        self.b_tilde.min(self.search_bound)
    }
}

/// Positive margin used to pick ζ.
pub const ZETA_MARGIN: f64 = 1e-10;

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).ceil().max(1.0) as usize;
    let step = decades / n as f64;
    (0..=n).map(|i| lo * 10f64.powf(i as f64 * step)).collect()
}

fn xtol(s: f64) -> f64 {
    ROOT_XTOL.max(4.0 * f64::EPSILON * s.abs())
}

/// Locate `b`, `b̃`, `ζ`, `s*` and `K_∞` on `(0, search_bound]`.
pub fn structural_constants(
    model: &SemilinearModel,
    search_bound: f64,
) -> Result<StructuralConstants> {
    if !(search_bound > 1e-6) {
        return Err(Error::Domain {
            what: "search_bound",
            value: search_bound,
            domain: "(1e-6, inf)".into(),
        });
    }
    let grid = log_grid(1e-8, search_bound, 200);
    let g0 = model.g(grid[0]);
    if !(g0 < 0.0) {
        return Err(Error::StructureNotFound(format!(
            "g is not negative near 0 (g({}) = {g0})",
            grid[0]
        )));
    }
    let mut changes = Vec::new();
    let mut prev = (grid[0], g0);
    for &s in &grid[1..] {
        let v = model.g(s);
        if !v.is_finite() {
            return Err(Error::NonFinite { r: s });
        }
        if v != 0.0 && prev.1.signum() != v.signum() {
            changes.push((prev.0, s));
        }
        if v != 0.0 {
            prev = (s, v);
        }
    }
    if changes.len() > 2 {
        return Err(Error::TooManyZeros(changes.iter().map(|c| c.1).collect()));
    }
    let Some(&(lo, hi)) = changes.first() else {
        return Err(Error::StructureNotFound(format!(
            "g has no sign change on (0, {search_bound}]"
        )));
    };
    let b = brent(|s| model.g(s), lo, hi, xtol(hi))?;
    let b_tilde = match changes.get(1) {
        Some(&(lo, hi)) => brent(|s| model.g(s), lo, hi, xtol(hi))?,
        None => f64::INFINITY,
    };
    let upper = b_tilde.min(search_bound);

    let zeta_fn = |s: f64| model.g_anti(s) - ZETA_MARGIN;
    let mut zeta = None;
    let mut prev = b;
    for &s in grid
        .iter()
        .filter(|&&s| s > b && s <= upper)
        .chain(std::iter::once(&upper))
    {
        if zeta_fn(s) >= 0.0 {
            let mut z = brent(zeta_fn, prev, s, xtol(s))?;
            while zeta_fn(z) < 0.0 {
                z += xtol(z);
            }
            zeta = Some(z);
            break;
        }
        prev = s;
    }

    let k_infty = if b_tilde.is_finite() {
        f64::NEG_INFINITY
    } else {
        growth_function(model, search_bound)?
    };

    let mut s_star = f64::INFINITY;
    if k_infty < 1.0 {
        let k1 = |s: f64| {
            growth_function(model, s)
                .map(|k| k - 1.0)
                .unwrap_or(f64::NAN)
        };
        let mut prev = None;
        for &s in grid.iter().filter(|&&s| s > b * (1.0 + 1e-9) && s < upper) {
            let v = k1(s);
            if v.is_nan() {
                continue;
            }
            if v <= 0.0 {
                if let Some(p) = prev {
                    s_star = brent(k1, p, s, xtol(s))?;
                } else {
                    s_star = s;
                }
                break;
            }
            prev = Some(s);
        }
    }

    Ok(StructuralConstants {
        b,
        b_tilde,
        zeta,
        s_star,
        k_infty,
        search_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn families() -> Vec<SemilinearModel> {
        vec![
            SemilinearModel::power(1.0, 3.0),
            SemilinearModel::power(2.5, 1.7),
            SemilinearModel::builtin(Family::CubicQuinticDefocusing),
            SemilinearModel::builtin(Family::CubicQuinticFocusing { c: 2.4 }),
            SemilinearModel::builtin(Family::Nagumo { c: 0.3 }),
            SemilinearModel::builtin(Family::QuadraticCubic {
                sign: Sign::Plus,
                c: 3.0,
            }),
            SemilinearModel::builtin(Family::QuadraticCubic {
                sign: Sign::Minus,
                c: 1.0,
            }),
        ]
    }

    #[test]
    fn builtin_formulas() {
        let m = SemilinearModel::power(1.0, 3.0);
        assert_eq!(m.g(2.0), 6.0);
        assert_eq!(m.g_prime(2.0), 11.0);
        assert_eq!(m.g_anti(2.0), -2.0 + 4.0);
        let n = SemilinearModel::builtin(Family::Nagumo { c: 0.3 });
        assert!((n.g(0.5) - 0.5 * 0.2 * 0.5).abs() < 1e-15);
        let f = SemilinearModel::builtin(Family::CubicQuinticFocusing { c: 2.4 });
        assert!((f.g(1.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn antiderivative_consistency() {
        for m in families() {
            for i in 0..10_000 {
                let s = 1e-3 + 3.0 * i as f64 / 10_000.0;
                let h = 1e-6;
                let d = (m.g_anti(s + h) - m.g_anti(s - h)) / (2.0 * h);
                assert!(
                    (d - m.g(s)).abs() <= 1e-8 * (1.0 + m.g(s).abs()),
                    "{m:?} s={s}"
                );
            }
            assert_eq!(m.g_anti(0.0), 0.0);
        }
    }

    #[test]
    fn growth_function_values() {
        let m = SemilinearModel::power(1.0, 3.0);
        assert!((growth_function(&m, 2.0).unwrap() - 22.0 / 6.0).abs() < 1e-14);
        assert!((growth_function(&m, 1e-6).unwrap() - 1.0).abs() < 1e-10);
        assert!((growth_function(&m, 1e6).unwrap() - 3.0).abs() < 1e-10);
        assert!(matches!(growth_function(&m, 1.0), Err(Error::Pole { s }) if s == 1.0));
        let pure = SemilinearModel::from_closures(
            "s^4",
            |s: f64| s.powi(4),
            |s: f64| 4.0 * s.powi(3),
            |s: f64| s.powi(5) / 5.0,
        );
        for s in [0.1, 1.0, 7.0] {
            assert!((growth_function(&pure, s).unwrap() - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn i_function_values() {
        let m = SemilinearModel::power(1.0, 3.0);
        assert_eq!(i_function(&m, 2.0, 1.0), 4.0);
        assert!(i_function(&m, 1.0, 0.7) > 0.0);
    }

    #[test]
    fn power_constants() {
        let m = SemilinearModel::power(1.0, 3.0);
        let c = structural_constants(&m, 1e8).unwrap();
        assert!((c.b - 1.0).abs() < 1e-12);
        assert!(c.b_tilde.is_infinite());
        assert!((c.zeta.unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert!(c.s_star.is_infinite());
        assert!((c.k_infty - 3.0).abs() < 1e-8);
    }

    #[test]
    fn nagumo_constants() {
        let m = SemilinearModel::builtin(Family::Nagumo { c: 0.3 });
        let c = structural_constants(&m, 1e8).unwrap();
        assert!((c.b - 0.3).abs() < 1e-12);
        assert!((c.b_tilde - 1.0).abs() < 1e-12);
        assert_eq!(c.k_infty, f64::NEG_INFINITY);
        assert!(c.s_star > c.b && c.s_star < c.b_tilde);
        let k = growth_function(&m, c.s_star).unwrap();
        assert!((k - 1.0).abs() < 1e-9);
        let bad = SemilinearModel::builtin(Family::Nagumo { c: 0.6 });
        assert!(structural_constants(&bad, 1e8).unwrap().zeta.is_none());
    }

    #[test]
    fn structure_errors() {
        let lin = SemilinearModel::builtin(Family::Linear { lambda: 1.0 });
        assert!(matches!(
            structural_constants(&lin, 1e4),
            Err(Error::StructureNotFound(_))
        ));
        let wiggly = SemilinearModel::from_closures(
            "three zeros",
            |s: f64| s * (s - 1.0) * (s - 2.0) * (s - 3.0),
            |_| 0.0,
            |_| 0.0,
        );
        assert!(matches!(
            structural_constants(&wiggly, 10.0),
            Err(Error::TooManyZeros(_))
        ));
    }

    #[test]
    fn constants_idempotent_in_bound() {
        for m in families() {
            let a = structural_constants(&m, 1e4).unwrap();
            let b = structural_constants(&m, 1e7).unwrap();
            assert!((a.b - b.b).abs() < 1e-12);
            if a.b_tilde.is_finite() {
                assert!((a.b_tilde - b.b_tilde).abs() < 1e-12);
            }
            match (a.zeta, b.zeta) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-11),
                (None, None) => {}
                other => panic!("zeta mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn lambda_map_sign_pattern() {
        let m = SemilinearModel::power(1.0, 3.0);
        let c = structural_constants(&m, 1e8).unwrap();
        let t = 1.5;
        let lam = lambda_map(&m, &c, t).unwrap();
        let k = growth_function(&m, t).unwrap();
        assert!((k - 1.0 - 2.0 / lam).abs() < 1e-12);
        for i in 1..1000 {
            let s = 3.0 * i as f64 / 1000.0;
            if (s - t).abs() < 1e-9 {
                continue;
            }
            let v = i_function(&m, s, lam);
            assert_eq!(v > 0.0, s < t, "s={s} I={v}");
        }
        assert!(lambda_map(&m, &c, 0.5).is_err());
        let pure = SemilinearModel::from_closures(
            "s^3",
            |s: f64| s.powi(3),
            |s: f64| 3.0 * s * s,
            |s: f64| s.powi(4) / 4.0,
        );
        let cc = StructuralConstants {
            b: 0.0,
            ..c.clone()
        };
        assert!((lambda_map(&pure, &cc, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lambda_blows_up_near_s_star() {
        let m = SemilinearModel::builtin(Family::Nagumo { c: 0.3 });
        let c = structural_constants(&m, 1e8).unwrap();
        let mut last = 0.0;
        for k in 1..8 {
            let t = c.s_star - 10f64.powi(-k);
            let v = lambda_map(&m, &c, t).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(last > 1e5);
    }

    #[test]
    fn config_parsing() {
        let v: Value = serde_json::json!({"family": "power", "params": {"lambda": 2.0, "p": 3.0}});
        let m = SemilinearModel::from_config(&v).unwrap();
        assert_eq!(
            m.family(),
            Some(Family::Power {
                lambda: 2.0,
                p: 3.0
            })
        );
        let v = serde_json::json!({"expr_g": "-s + s^3", "expr_gprime": "-1 + 3*s^2", "expr_G": "-s^2/2 + s^4/4"});
        let m = SemilinearModel::from_config(&v).unwrap();
        assert_eq!(m.g(2.0), 6.0);
        let v = serde_json::json!({"expr_g": "-s + s^3", "expr_gprime": "-1 + 2*s^2", "expr_G": "-s^2/2 + s^4/4"});
        assert!(SemilinearModel::from_config(&v).is_err());
        let v = serde_json::json!({"family": "cosine"});
        assert!(matches!(
            SemilinearModel::from_config(&v),
            Err(Error::Config(_))
        ));
        let v = serde_json::json!({"family": "power", "params": {"p": 3}, "extra": 1});
        assert!(SemilinearModel::from_config(&v).is_err());
    }

    proptest! {
        #[test]
        fn i_function_factored_identity(s in 0.01f64..5.0, lam in 0.01f64..50.0) {
            let m = SemilinearModel::power(1.0, 3.0);
            prop_assume!((s - 1.0).abs() > 1e-3);
            let k = growth_function(&m, s).unwrap();
            let direct = i_function(&m, s, lam);
            let factored = lam * m.g(s) * (k - 1.0 - 2.0 / lam);
            prop_assert!((direct - factored).abs() <= 1e-12 * direct.abs().max(lam * m.g(s).abs()));
        }
    }
}
