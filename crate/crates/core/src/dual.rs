//! Dual transformation `u = f(v)`, `f′ = 1/√a(f)`, turning the quasilinear
//! problem `div(a(u)∇u) − ½a′(u)|∇u|² + h(u) = 0` into a semilinear one.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hermite;
use crate::hypothesis::GridSpec;
use crate::nonlinearity::{
    structural_constants, Nonlinearity, SemilinearModel, StructuralConstants,
};
use crate::ode::{Dopri5, Tolerance};
use crate::quadrature;
use crate::radial_ode::RadialProblem;
use crate::roots::brent;
use crate::serde_f64;
use crate::shooting::{find_ground_state_with, GroundState, ShootingOptions};

/// Default table end for `f`.
pub const DEFAULT_S_MAX: f64 = 1e8;
/// Default relative tolerance of the `f` integration.
pub const DEFAULT_F_TOL: f64 = 1e-13;

/// A diffusion coefficient `a` with its first two derivatives (for `t ≥ 0`).
pub trait Diffusion: Send + Sync + fmt::Debug {
    fn a(&self, t: f64) -> f64;
    fn a_prime(&self, t: f64) -> f64;
    fn a_second(&self, t: f64) -> f64;
}

/// Builtin diffusion coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiffusionFamily {
    /// `a ≡ value`
    Constant { value: f64 },
    /// `1 + 2κt²`
    Mnls { kappa: f64 },
    /// `1 + κ|t|^ℓ`
    Power { kappa: f64, ell: f64 },
    /// `1 + |t|^{ℓ₁} + |t|^{ℓ₂}`
    PowerSum { l1: f64, l2: f64 },
    /// `t² + e^{−ct²}`
    GaussianQuadratic { c: f64 },
}

fn pow_d(t: f64, e: f64, k: u32) -> f64 {
    // k-th derivative of |t|^e for t ≥ 0
    let mut c = 1.0;
    for j in 0..k {
        c *= e - j as f64;
    }
    if c == 0.0 {
        0.0
    } else {
        c * t.abs().powf(e - k as f64)
    }
}

impl Diffusion for DiffusionFamily {
    fn a(&self, t: f64) -> f64 {
        let t = t.abs();
        match *self {
            DiffusionFamily::Constant { value } => value,
            DiffusionFamily::Mnls { kappa } => 1.0 + 2.0 * kappa * t * t,
            DiffusionFamily::Power { kappa, ell } => 1.0 + kappa * t.powf(ell),
            DiffusionFamily::PowerSum { l1, l2 } => 1.0 + t.powf(l1) + t.powf(l2),
            DiffusionFamily::GaussianQuadratic { c } => t * t + (-c * t * t).exp(),
        }
    }

    fn a_prime(&self, t: f64) -> f64 {
        let t = t.abs();
        match *self {
            DiffusionFamily::Constant { .. } => 0.0,
            DiffusionFamily::Mnls { kappa } => 4.0 * kappa * t,
            DiffusionFamily::Power { kappa, ell } => kappa * pow_d(t, ell, 1),
            DiffusionFamily::PowerSum { l1, l2 } => pow_d(t, l1, 1) + pow_d(t, l2, 1),
            DiffusionFamily::GaussianQuadratic { c } => 2.0 * t - 2.0 * c * t * (-c * t * t).exp(),
        }
    }

    fn a_second(&self, t: f64) -> f64 {
        let t = t.abs();
        match *self {
            DiffusionFamily::Constant { .. } => 0.0,
            DiffusionFamily::Mnls { kappa } => 4.0 * kappa,
            DiffusionFamily::Power { kappa, ell } => kappa * pow_d(t, ell, 2),
            DiffusionFamily::PowerSum { l1, l2 } => pow_d(t, l1, 2) + pow_d(t, l2, 2),
            DiffusionFamily::GaussianQuadratic { c } => {
                2.0 + (4.0 * c * c * t * t - 2.0 * c) * (-c * t * t).exp()
            }
        }
    }
}

impl DiffusionFamily {
    /// Natural `(ℓ, a∞)` of the family; `None` for the constant coefficient.
    pub fn growth(&self) -> Option<(f64, f64)> {
        match *self {
            DiffusionFamily::Constant { .. } => None,
            DiffusionFamily::Mnls { kappa } => Some((2.0, 2.0 * kappa)),
            DiffusionFamily::Power { kappa, ell } => Some((ell, kappa)),
            DiffusionFamily::PowerSum { l1, l2 } => {
                Some(if l2 >= l1 { (l2, 1.0) } else { (l1, 1.0) })
            }
            DiffusionFamily::GaussianQuadratic { .. } => Some((2.0, 1.0)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiffusionFamily::Constant { .. } => "constant",
            DiffusionFamily::Mnls { .. } => "mnls",
            DiffusionFamily::Power { .. } => "power",
            DiffusionFamily::PowerSum { .. } => "power_sum",
            DiffusionFamily::GaussianQuadratic { .. } => "gaussian_quadratic",
        }
    }

    pub fn from_name(name: &str, params: &Value) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params.get(key).and_then(Value::as_f64).ok_or_else(|| {
                Error::Config(format!(
                    "diffusion '{name}' needs numeric parameter '{key}'"
                ))
            })
        };
        Ok(match name {
            "constant" => DiffusionFamily::Constant {
                value: params.get("value").and_then(Value::as_f64).unwrap_or(1.0),
            },
            "mnls" => DiffusionFamily::Mnls {
                kappa: get("kappa")?,
            },
            "power" => DiffusionFamily::Power {
                kappa: get("kappa")?,
                ell: get("ell")?,
            },
            "power_sum" => DiffusionFamily::PowerSum {
                l1: get("l1")?,
                l2: get("l2")?,
            },
            "gaussian_quadratic" => DiffusionFamily::GaussianQuadratic { c: get("c")? },
            other => return Err(Error::Config(format!("unknown diffusion family '{other}'"))),
        })
    }
}

#[derive(Debug)]
struct ExprDiffusion {
    a: Expr,
    a_prime: Expr,
    a_second: Expr,
}

impl Diffusion for ExprDiffusion {
    fn a(&self, t: f64) -> f64 {
        self.a.eval(t.abs())
    }
    fn a_prime(&self, t: f64) -> f64 {
        self.a_prime.eval(t.abs())
    }
    fn a_second(&self, t: f64) -> f64 {
        self.a_second.eval(t.abs())
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

struct ClosureDiffusion {
    a: ScalarFn,
    a_prime: ScalarFn,
    a_second: ScalarFn,
}

impl fmt::Debug for ClosureDiffusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ClosureDiffusion")
    }
}

impl Diffusion for ClosureDiffusion {
    fn a(&self, t: f64) -> f64 {
        (self.a)(t.abs())
    }
    fn a_prime(&self, t: f64) -> f64 {
        (self.a_prime)(t.abs())
    }
    fn a_second(&self, t: f64) -> f64 {
        (self.a_second)(t.abs())
    }
}

/// Diffusion coefficient with growth exponent `ℓ` and (declared) limit `a∞ = lim a(t)/t^ℓ`.
#[derive(Clone)]
pub struct DiffusionModel {
    inner: Arc<dyn Diffusion>,
    pub ell: f64,
    pub a_inf: Option<f64>,
    family: Option<DiffusionFamily>,
    label: String,
}

impl fmt::Debug for DiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionModel")
            .field("label", &self.label)
            .field("ell", &self.ell)
            .field("a_inf", &self.a_inf)
            .finish()
    }
}

impl DiffusionModel {
    /// Builtin coefficient; the constant family gets `ℓ = 2` and no `a∞`.
    pub fn builtin(family: DiffusionFamily) -> Self {
        let (ell, a_inf) = match family.growth() {
            Some((l, a)) => (l, Some(a)),
            None => (2.0, None),
        };
        let label = match family {
            DiffusionFamily::Constant { value } => format!("constant({value})"),
            DiffusionFamily::Mnls { kappa } => format!("1+2*{kappa}*t^2"),
            DiffusionFamily::Power { kappa, ell } => format!("1+{kappa}*|t|^{ell}"),
            DiffusionFamily::PowerSum { l1, l2 } => format!("1+|t|^{l1}+|t|^{l2}"),
            DiffusionFamily::GaussianQuadratic { c } => format!("t^2+exp(-{c}*t^2)"),
        };
        Self {
            inner: Arc::new(family),
            ell,
            a_inf,
            family: Some(family),
            label,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::builtin(DiffusionFamily::Constant { value })
    }

    pub fn mnls(kappa: f64) -> Self {
        Self::builtin(DiffusionFamily::Mnls { kappa })
    }

    pub fn with_ell(mut self, ell: f64) -> Self {
        self.ell = ell;
        self
    }

    pub fn from_closures<A, Ap, App>(
        label: impl Into<String>,
        a: A,
        a_prime: Ap,
        a_second: App,
        ell: f64,
        a_inf: Option<f64>,
    ) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        Ap: Fn(f64) -> f64 + Send + Sync + 'static,
        App: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            inner: Arc::new(ClosureDiffusion {
                a: Arc::new(a),
                a_prime: Arc::new(a_prime),
                a_second: Arc::new(a_second),
            }),
            ell,
            a_inf,
            family: None,
            label: label.into(),
        }
    }

    /// Parse `a`, `a′`, `a″`; the derivatives are spot-checked by finite differences.
    pub fn from_exprs(
        a: &str,
        a_prime: &str,
        a_second: &str,
        ell: f64,
        a_inf: Option<f64>,
    ) -> Result<Self> {
        let m = ExprDiffusion {
            a: Expr::parse(a)?,
            a_prime: Expr::parse(a_prime)?,
            a_second: Expr::parse(a_second)?,
        };
        for &t in &[0.05, 0.3, 0.7, 1.1, 1.9, 3.7] {
            let h = 1e-5 * (1.0 + t);
            let da = (m.a(t + h) - m.a(t - h)) / (2.0 * h);
            let dda = (m.a_prime(t + h) - m.a_prime(t - h)) / (2.0 * h);
            if (da - m.a_prime(t)).abs() > 1e-5 * (1.0 + da.abs()) {
                return Err(Error::Config(format!(
                    "expr_aprime disagrees with the derivative of expr_a at t = {t}"
                )));
            }
            if (dda - m.a_second(t)).abs() > 1e-5 * (1.0 + dda.abs()) {
                return Err(Error::Config(format!(
                    "expr_asecond disagrees with the derivative of expr_aprime at t = {t}"
                )));
            }
        }
        if !(ell > 0.0) {
            return Err(Error::Config("ell must be positive".into()));
        }
        Ok(Self {
            inner: Arc::new(m),
            ell,
            a_inf,
            family: None,
            label: format!("expr({a})"),
        })
    }

    /// `{family, params[, ell]}` or `{expr_a, expr_aprime, expr_asecond, ell[, a_inf]}`.
    pub fn from_config(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config("diffusion config must be an object".into()))?;
        let ell = match obj.get("ell") {
            None => None,
            Some(x) => Some(
                x.as_f64()
                    .ok_or_else(|| Error::Config("'ell' must be numeric".into()))?,
            ),
        };
        if let Some(name) = obj.get("family") {
            let name = name
                .as_str()
                .ok_or_else(|| Error::Config("'family' must be a string".into()))?;
            for key in obj.keys() {
                if !matches!(key.as_str(), "family" | "params" | "ell") {
                    return Err(Error::Config(format!("unknown diffusion key '{key}'")));
                }
            }
            let empty = Value::Object(Default::default());
            let m = Self::builtin(DiffusionFamily::from_name(
                name,
                obj.get("params").unwrap_or(&empty),
            )?);
            return Ok(match ell {
                Some(l) => m.with_ell(l),
                None => m,
            });
        }
        for key in obj.keys() {
            if !matches!(
                key.as_str(),
                "expr_a" | "expr_aprime" | "expr_asecond" | "ell" | "a_inf"
            ) {
                return Err(Error::Config(format!("unknown diffusion key '{key}'")));
            }
        }
        let field = |k: &str| {
            obj.get(k)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Config(format!("diffusion config needs string '{k}'")))
        };
        let ell = ell.ok_or_else(|| Error::Config("expression diffusion needs 'ell'".into()))?;
        let a_inf = obj.get("a_inf").and_then(Value::as_f64);
        Self::from_exprs(
            field("expr_a")?,
            field("expr_aprime")?,
            field("expr_asecond")?,
            ell,
            a_inf,
        )
    }

    pub fn family(&self) -> Option<DiffusionFamily> {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn a(&self, t: f64) -> f64 {
        self.inner.a(t)
    }

    #[inline]
    pub fn a_prime(&self, t: f64) -> f64 {
        self.inner.a_prime(t)
    }

    #[inline]
    pub fn a_second(&self, t: f64) -> f64 {
        self.inner.a_second(t)
    }

    /// `K_a(t) = t a′(t) / a(t)`.
    pub fn growth(&self, t: f64) -> f64 {
        t * self.a_prime(t) / self.a(t)
    }

    /// `a(t)/t^ℓ` at `t`.
    pub fn ratio(&self, t: f64) -> f64 {
        self.a(t) / t.powf(self.ell)
    }

    /// `lim f(s)/s^{2/(ℓ+2)} = ((ℓ+2)/(2√a∞))^{2/(ℓ+2)}`.
    pub fn f_asymptotic_constant(&self) -> Option<f64> {
        let a_inf = self.a_inf?;
        let e = 2.0 / (self.ell + 2.0);
        Some(((self.ell + 2.0) / (2.0 * a_inf.sqrt())).powf(e))
    }
}

/// Tabulated `f` on `[0, s_max]` with `f′ = 1/√a(f)` and `f″ = −a′(f)/(2a(f)²)`.
#[derive(Debug, Clone, Serialize)]
pub struct DualTransform {
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub f_second: Vec<f64>,
    pub tol: f64,
    #[serde(skip)]
    a: DiffusionModel,
}

fn node_data(a: &DiffusionModel, f: f64) -> (f64, f64) {
    let av = a.a(f);
    (1.0 / av.sqrt(), -a.a_prime(f) / (2.0 * av * av))
}

/// Integrates `f′ = 1/√a(f)`, `f(0) = 0` up to `s_max`.
pub fn solve_f(a_model: &DiffusionModel, s_max: f64, tol: f64) -> Result<DualTransform> {
    if !(s_max > 0.0) || !(tol > 0.0) {
        return Err(Error::Precondition("s_max and tol must be positive".into()));
    }
    let a0 = a_model.a(0.0);
    if !(a0 > 0.0) {
        return Err(Error::Domain {
            what: "a(0)",
            value: a0,
            domain: "(0, inf)".into(),
        });
    }
    let (fp0, fpp0) = node_data(a_model, 0.0);
    let table = DualTransform {
        s: vec![0.0],
        f: vec![0.0],
        f_prime: vec![fp0],
        f_second: vec![fpp0],
        tol,
        a: a_model.clone(),
    };
    table.extend(s_max)
}

impl DualTransform {
    pub fn s_max(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn f_max(&self) -> f64 {
        *self.f.last().unwrap()
    }

    pub fn diffusion(&self) -> &DiffusionModel {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// A new table continuing the integration up to `s_max`.
    pub fn extend(&self, s_max: f64) -> Result<DualTransform> {
        let mut out = self.clone();
        if s_max <= self.s_max() {
            return Ok(out);
        }
        let a = self.a.clone();
        let rhs = move |_s: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = 1.0 / a.a(y[0]).sqrt();
        };
        let s0 = self.s_max();
        let y0 = [self.f_max()];
        let mut solver = Dopri5::new(rhs, s0, &y0, Tolerance::new(self.tol, self.tol * 1e-2));
        while solver.t() < s_max {
            let seg = solver.step(s_max)?;
            let (s1, f1) = (seg.t1(), solver.y()[0]);
            if !f1.is_finite() {
                return Err(Error::NonFinite { r: s1 });
            }
            let (fp, fpp) = node_data(&self.a, f1);
            out.s.push(s1);
            out.f.push(f1);
            out.f_prime.push(fp);
            out.f_second.push(fpp);
        }
        Ok(out)
    }

    fn locate(&self, s: f64) -> usize {
        self.s
            .partition_point(|&x| x <= s)
            .clamp(1, self.s.len() - 1)
            - 1
    }

    /// `(f, f′, f″)` at `s`, extended oddly to `s < 0`.
    pub fn eval(&self, s: f64) -> Result<[f64; 3]> {
        let x = s.abs();
        if !(x <= self.s_max()) {
            return Err(Error::RangeExceeded {
                s,
                s_max: self.s_max(),
            });
        }
        let i = self.locate(x);
        let l = [self.f[i], self.f_prime[i], self.f_second[i]];
        let r = [self.f[i + 1], self.f_prime[i + 1], self.f_second[i + 1]];
        let h = self.s[i + 1] - self.s[i];
        let [f, fp, _] = hermite::quintic(self.s[i], h, l, r, x);
        // f′ and f″ are exact functions of f.
        let (fp_exact, fpp) = node_data(&self.a, f);
        debug_assert!((fp - fp_exact).abs() <= 1e-6 * fp_exact.abs() + 1e-12);
        let sign = s.signum();
        Ok([sign * f, fp_exact, sign * fpp])
    }

    pub fn f(&self, s: f64) -> Result<f64> {
        Ok(self.eval(s)?[0])
    }

    /// `f⁻¹(t)` by monotone lookup and root refinement.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        let x = t.abs();
        if !(x <= self.f_max()) {
            return Err(Error::RangeExceeded {
                s: t,
                s_max: self.f_max(),
            });
        }
        let i = self
            .f
            .partition_point(|&v| v <= x)
            .clamp(1, self.f.len() - 1)
            - 1;
        let (lo, hi) = (self.s[i], self.s[i + 1]);
        let l = [self.f[i], self.f_prime[i], self.f_second[i]];
        let r = [self.f[i + 1], self.f_prime[i + 1], self.f_second[i + 1]];
        let root = brent(
            |s| hermite::quintic(lo, hi - lo, l, r, s)[0] - x,
            lo,
            hi,
            1e-15 * hi.max(1.0),
        )?;
        Ok(t.signum() * root)
    }

    /// `max |s − ∫₀^{f(s)} √a| / max(1, s)` over the nodes, by adaptive quadrature.
    pub fn identity_defect(&self) -> (f64, f64) {
        let a = &self.a;
        let mut worst = (0.0, 0.0);
        let mut acc = 0.0;
        for i in 1..self.s.len() {
            acc += quadrature::integrate(
                |t| a.a(t).sqrt(),
                self.f[i - 1],
                self.f[i],
                1e-13 * (self.s[i] - self.s[i - 1]),
            );
            let d = (self.s[i] - acc).abs() / self.s[i].max(1.0);
            if d > worst.1 {
                worst = (self.s[i], d);
            }
        }
        worst
    }
}

/// `g(s) = h(f(s)) f′(s)` with `g′ = h′(f)/a(f) − h(f) a′(f)/(2a(f)²)` and `G = H(f)`.
#[derive(Debug)]
struct DualNonlinearity {
    h: SemilinearModel,
    transform: Arc<DualTransform>,
}

impl Nonlinearity for DualNonlinearity {
    fn g(&self, s: f64) -> f64 {
        match self.transform.eval(s) {
            Ok([f, fp, _]) => self.h.g(f) * fp,
            Err(_) => f64::NAN,
        }
    }

    fn g_prime(&self, s: f64) -> f64 {
        match self.transform.eval(s) {
            Ok([f, _, _]) => {
                let a = self.transform.a.a(f);
                self.h.g_prime(f) / a - self.h.g(f) * self.transform.a.a_prime(f) / (2.0 * a * a)
            }
            Err(_) => f64::NAN,
        }
    }

    fn g_anti(&self, s: f64) -> f64 {
        match self.transform.eval(s) {
            Ok([f, _, _]) => self.h.g_anti(f),
            Err(_) => f64::NAN,
        }
    }
}

/// The dual semilinear model. Evaluations beyond the table return NaN.
pub fn dual_nonlinearity(
    h_model: &SemilinearModel,
    transform: Arc<DualTransform>,
) -> SemilinearModel {
    let label = format!("dual[a={}, h={}]", transform.a.label(), h_model.label());
    SemilinearModel::from_nonlinearity(
        label,
        Arc::new(DualNonlinearity {
            h: h_model.clone(),
            transform,
        }),
    )
}

/// `(f⁻¹(β), f⁻¹(β̃))` from the constants of `h`.
pub fn map_constants(
    transform: &DualTransform,
    h_consts: &StructuralConstants,
) -> Result<(f64, f64)> {
    let b = transform.inverse(h_consts.b)?;
    let b_tilde = if h_consts.b_tilde.is_finite() {
        transform.inverse(h_consts.b_tilde)?
    } else {
        f64::INFINITY
    };
    Ok((b, b_tilde))
}

/// Smallest table end such that `f(s_max)` reaches `10·β̃` (finite) or `10³·β`.
pub fn required_s_max(a_model: &DiffusionModel, h_consts: &StructuralConstants) -> f64 {
    let target = if h_consts.b_tilde.is_finite() {
        10.0 * h_consts.b_tilde
    } else {
        1e3 * h_consts.b
    };
    quadrature::integrate(|t| a_model.a(t).sqrt(), 0.0, target, 1e-10 * target)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiCheck {
    pub monotone: bool,
    /// Smallest `φ(t_{i+1}) − φ(t_i)` seen (negative when violated).
    pub worst_margin: f64,
    pub witness: Option<f64>,
    pub samples: usize,
}

/// Checks that `φ(t) = t√a(t) / ∫₀ᵗ √a` is non-decreasing on `[β, grid top]`.
pub fn phi_monotone_check(a_model: &DiffusionModel, beta: f64, grid: &GridSpec) -> PhiCheck {
    let sqrt_a = |t: f64| a_model.a(t).sqrt();
    let ts: Vec<f64> = std::iter::once(beta)
        .chain(grid.points().into_iter().filter(|&t| t > beta))
        .collect();
    let mut integral = quadrature::integrate(sqrt_a, 0.0, beta, 1e-14 * beta.max(1e-300));
    let phi = |t: f64, i: f64| t * sqrt_a(t) / i;
    let mut prev = phi(beta, integral);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for w in ts.windows(2) {
        integral += quadrature::integrate(sqrt_a, w[0], w[1], 1e-14 * integral);
        let cur = phi(w[1], integral);
        let diff = cur - prev;
        if diff < worst {
            worst = diff;
            if diff < -1e-10 * (1.0 + prev.abs()) && witness.is_none() {
                witness = Some(w[1]);
            }
        }
        prev = cur;
    }
    PhiCheck {
        monotone: witness.is_none(),
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
        witness,
        samples: ts.len(),
    }
}

/// Physical profile sample `(r, u, u′)` with `u = f(v)`, `u′ = f′(v) v′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub r: f64,
    pub u: f64,
    pub u_prime: f64,
}

#[derive(Debug, Clone)]
pub struct QuasilinearSolution {
    pub dual: GroundState,
    pub dual_model: SemilinearModel,
    pub dual_constants: StructuralConstants,
    pub transform: Arc<DualTransform>,
    pub h_constants: StructuralConstants,
    /// `(f⁻¹(β), f⁻¹(β̃))`.
    pub mapped_b: (f64, f64),
    /// `u = f(v)` on the dual trajectory nodes up to the trust radius.
    pub profile: Vec<ProfilePoint>,
    /// Max residual of the radial quasilinear equation at the nodes.
    pub residual_nodes: f64,
    /// Max residual at step midpoints (interpolated `v″`).
    pub residual_midpoints: f64,
}

impl QuasilinearSolution {
    pub fn u_at(&self, r: f64) -> Result<f64> {
        self.transform.f(self.dual.u(r))
    }

    pub fn u0(&self) -> f64 {
        self.profile[0].u
    }

    /// `√(−h′(0)/a(0))`.
    pub fn expected_decay(&self) -> f64 {
        (-self.dual_model.g_prime(0.0)).sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,v,v_prime,u,u_prime\n");
        let t = &self.dual.trajectory;
        for (i, p) in self.profile.iter().enumerate() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                p.r, t.u[i], t.u_prime[i], p.u, p.u_prime
            ));
        }
        s
    }
}

/// Residual of `a(u)(u″ + (N−1)u′/r) + ½a′(u)u′² + h(u)` for `u = f(v)`.
fn back_residual(
    a: &DiffusionModel,
    h: &SemilinearModel,
    tr: &DualTransform,
    n: f64,
    r: f64,
    v: [f64; 3],
) -> Result<f64> {
    let [f, fp, fpp] = tr.eval(v[0])?;
    let up = fp * v[1];
    let upp = fpp * v[1] * v[1] + fp * v[2];
    let av = a.a(f);
    let res = av * (upp + (n - 1.0) / r * up) + 0.5 * a.a_prime(f) * up * up + h.g(f);
    Ok(res.abs() / (1.0 + h.g(f).abs()))
}

/// Solves the quasilinear ground state through its dual semilinear problem.
pub fn solve_quasilinear(
    a_model: &DiffusionModel,
    h_model: &SemilinearModel,
    dim: usize,
    options: &ShootingOptions,
) -> Result<QuasilinearSolution> {
    let h_consts = structural_constants(h_model, 1e8)?;
    let s_max = required_s_max(a_model, &h_consts).max(DEFAULT_S_MAX);
    let transform = Arc::new(solve_f(a_model, s_max, DEFAULT_F_TOL)?);
    let dual_model = dual_nonlinearity(h_model, transform.clone());
    let dual_constants = structural_constants(&dual_model, s_max)?;
    let mapped_b = map_constants(&transform, &h_consts)?;
    let problem = RadialProblem::new(dim, dual_model.clone())?;
    let dual = find_ground_state_with(&problem, &dual_constants, options)?;

    let t = &dual.trajectory;
    let n = dim as f64;
    let mut profile = Vec::new();
    let mut residual_nodes: f64 = 0.0;
    let mut residual_midpoints: f64 = 0.0;
    for i in 0..t.len() {
        let r = t.nodes[i];
        if r > dual.r_trust {
            break;
        }
        let [f, fp, _] = transform.eval(t.u[i])?;
        profile.push(ProfilePoint {
            r,
            u: f,
            u_prime: fp * t.u_prime[i],
        });
        let vpp = -(n - 1.0) / r * t.u_prime[i] - dual_model.g(t.u[i]);
        residual_nodes = residual_nodes.max(back_residual(
            a_model,
            h_model,
            &transform,
            n,
            r,
            [t.u[i], t.u_prime[i], vpp],
        )?);
        if i + 1 < t.len() && t.nodes[i + 1] <= dual.r_trust {
            let m = 0.5 * (r + t.nodes[i + 1]);
            let v = t.u_hermite(m);
            residual_midpoints =
                residual_midpoints.max(back_residual(a_model, h_model, &transform, n, m, v)?);
        }
    }
    Ok(QuasilinearSolution {
        dual,
        dual_model,
        dual_constants,
        transform,
        h_constants: h_consts,
        mapped_b,
        profile,
        residual_nodes,
        residual_midpoints,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformSummary {
    pub s_max: f64,
    pub nodes: usize,
    #[serde(with = "serde_f64")]
    pub f_max: f64,
}

impl DualTransform {
    pub fn summary(&self) -> TransformSummary {
        TransformSummary {
            s_max: self.s_max(),
            nodes: self.len(),
            f_max: self.f_max(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{growth_function, Family};
    use crate::shooting::find_ground_state;

    fn closed_form_s(f: f64) -> f64 {
        let r2 = 2f64.sqrt();
        f * (1.0 + 2.0 * f * f).sqrt() / 2.0 + (r2 * f).asinh() / (2.0 * r2)
    }

    #[test]
    fn identity_coefficient_gives_identity() {
        let tr = solve_f(&DiffusionModel::constant(1.0), 100.0, 1e-13).unwrap();
        for &s in &[0.0, 0.3, 7.0, 99.0] {
            let [f, fp, fpp] = tr.eval(s).unwrap();
            assert!((f - s).abs() < 1e-12 * (1.0 + s));
            assert_eq!(fp, 1.0);
            assert_eq!(fpp, 0.0);
        }
    }

    #[test]
    fn mnls_transform_matches_closed_form() {
        let a = DiffusionModel::mnls(1.0);
        let tr = solve_f(&a, 1e8, DEFAULT_F_TOL).unwrap();
        for &s in &[0.1, 1.0, 10.0, 100.0] {
            let f = tr.f(s).unwrap();
            assert!(
                (closed_form_s(f) - s).abs() <= 1e-10,
                "s={s}: {}",
                closed_form_s(f) - s
            );
            let q = quadrature::integrate(|t| a.a(t).sqrt(), 0.0, f, 1e-14);
            assert!((q - s).abs() <= 1e-10);
        }
        let (at, d) = tr.identity_defect();
        assert!(d <= 1e-10, "defect {d} at s = {at}");
        let s = 1e8;
        let [f, fp, _] = tr.eval(s).unwrap();
        assert!((s * fp / f - 0.5).abs() < 1e-4);
        let c = a.f_asymptotic_constant().unwrap();
        assert!((c - 2f64.powf(0.25)).abs() < 1e-14);
        assert!((f / s.sqrt() / c - 1.0).abs() < 1e-2);
        for i in 1..tr.len() {
            assert!(tr.f[i] > tr.f[i - 1]);
        }
    }

    #[test]
    fn second_derivative_and_inverse() {
        let a = DiffusionModel::mnls(1.0);
        let tr = solve_f(&a, 1e3, DEFAULT_F_TOL).unwrap();
        for &s in &[0.2, 1.5, 30.0, 700.0] {
            let h = 1e-4 * s;
            let d = (tr.eval(s + h).unwrap()[1] - tr.eval(s - h).unwrap()[1]) / (2.0 * h);
            let [f, _, fpp] = tr.eval(s).unwrap();
            assert!((d - fpp).abs() < 1e-6 * (1.0 + fpp.abs()));
            assert!((tr.inverse(f).unwrap() - s).abs() < 1e-10 * s.max(1.0));
        }
        assert_eq!(tr.f(-1.5).unwrap(), -tr.f(1.5).unwrap());
        assert!(matches!(tr.eval(2e3), Err(Error::RangeExceeded { .. })));
    }

    #[test]
    fn dual_of_identity_is_h() {
        let h = SemilinearModel::power(1.0, 3.0);
        let tr = Arc::new(solve_f(&DiffusionModel::constant(1.0), 1e3, 1e-13).unwrap());
        let g = dual_nonlinearity(&h, tr);
        for &s in &[0.1, 0.9, 1.7, 40.0] {
            assert!((g.g(s) - h.g(s)).abs() < 1e-10 * (1.0 + h.g(s).abs()));
            assert!((g.g_prime(s) - h.g_prime(s)).abs() < 1e-10 * (1.0 + h.g_prime(s).abs()));
            assert!((g.g_anti(s) - h.g_anti(s)).abs() < 1e-10 * (1.0 + h.g_anti(s).abs()));
        }
    }

    #[test]
    fn dual_derivative_and_constants() {
        let h = SemilinearModel::power(1.0, 2.0);
        let a = DiffusionModel::mnls(1.0);
        let tr = Arc::new(solve_f(&a, 1e8, DEFAULT_F_TOL).unwrap());
        let g = dual_nonlinearity(&h, tr.clone());
        assert!((g.g_prime(0.0) - h.g_prime(0.0) / a.a(0.0)).abs() < 1e-14);
        for &s in &[0.3, 2.0, 9.0] {
            let e = 1e-6 * s;
            let fd = (g.g(s + e) - g.g(s - e)) / (2.0 * e);
            assert!((fd - g.g_prime(s)).abs() < 1e-6 * (1.0 + fd.abs()));
            let fd = (g.g_anti(s + e) - g.g_anti(s - e)) / (2.0 * e);
            assert!((fd - g.g(s)).abs() < 1e-6 * (1.0 + fd.abs()));
        }
        let hc = structural_constants(&h, 1e8).unwrap();
        let gc = structural_constants(&g, 1e8).unwrap();
        let (b, bt) = map_constants(&tr, &hc).unwrap();
        assert!((gc.b - b).abs() < 1e-9 * b);
        assert!(bt.is_infinite() && gc.b_tilde.is_infinite());
        // K_g(s) → (p − 1)/2 = 1/2 at infinity.
        let k = growth_function(&g, 1e8).unwrap();
        assert!((k - 0.5).abs() < 1e-2, "{k}");
    }

    #[test]
    fn phi_check() {
        let grid = GridSpec {
            lo: 1e-8,
            hi: 1e4,
            per_decade: 200,
        };
        let one = phi_monotone_check(&DiffusionModel::constant(1.0), 0.5, &grid);
        assert!(one.monotone && one.worst_margin.abs() < 1e-12);
        let m = phi_monotone_check(&DiffusionModel::mnls(1.0), 1.0, &grid);
        assert!(m.monotone, "{m:?}");
        let bump = DiffusionModel::from_closures(
            "bump",
            |t| 2.0 + 1.5 * (5.0 * t).sin() * (-(t - 3.0) * (t - 3.0)).exp(),
            |t| {
                let e = (-(t - 3.0) * (t - 3.0)).exp();
                1.5 * e * (5.0 * (5.0 * t).cos() - 2.0 * (t - 3.0) * (5.0 * t).sin())
            },
            |_| f64::NAN,
            2.0,
            None,
        );
        let c = phi_monotone_check(&bump, 0.5, &grid);
        assert!(!c.monotone);
        let w = c.witness.unwrap();
        assert!(w > 0.5 && w < 10.0);
    }

    #[test]
    fn identity_pipeline_matches_semilinear() {
        let h = SemilinearModel::power(1.0, 3.0);
        let opts = ShootingOptions::default();
        let q = solve_quasilinear(&DiffusionModel::constant(1.0), &h, 3, &opts).unwrap();
        let c = structural_constants(&h, 1e8).unwrap();
        let p = RadialProblem::new(3, h.clone()).unwrap();
        let gs = find_ground_state(&p, &c, opts.d_tol).unwrap();
        assert!(
            (q.dual.d0 - gs.d0).abs() < 1e-8,
            "{} vs {}",
            q.dual.d0,
            gs.d0
        );
        assert!(
            q.residual_nodes < 100.0 * opts.ode_tol,
            "{}",
            q.residual_nodes
        );
    }

    #[test]
    fn mnls_ground_state() {
        let h = SemilinearModel::builtin(Family::Power {
            lambda: 1.0,
            p: 2.0,
        });
        let q = solve_quasilinear(
            &DiffusionModel::mnls(1.0),
            &h,
            2,
            &ShootingOptions::default(),
        )
        .unwrap();
        assert!(q.residual_nodes < 1e-8, "{}", q.residual_nodes);
        assert!(q
            .profile
            .windows(2)
            .all(|w| w[1].u < w[0].u && w[1].u > 0.0));
        let fit = q.dual.decay.as_ref().unwrap();
        assert!((fit.rate + 1.0).abs() < 1e-3, "{fit:?}");
        assert!(q.dual_constants.k_infty < 1.0);
    }

    #[test]
    fn config_parsing() {
        let v: Value = serde_json::json!({"family": "mnls", "params": {"kappa": 0.5}});
        let m = DiffusionModel::from_config(&v).unwrap();
        assert_eq!(m.a(1.0), 2.0);
        assert_eq!(m.a_inf, Some(1.0));
        let v: Value = serde_json::json!({"expr_a": "1+t^2", "expr_aprime": "2*t", "expr_asecond": "2", "ell": 2});
        let m = DiffusionModel::from_config(&v).unwrap();
        assert_eq!(m.a(2.0), 5.0);
        let v: Value = serde_json::json!({"expr_a": "1+t^2", "expr_aprime": "3*t", "expr_asecond": "2", "ell": 2});
        assert!(matches!(
            DiffusionModel::from_config(&v),
            Err(Error::Config(_))
        ));
        let v: Value = serde_json::json!({"family": "mnls", "bogus": 1});
        assert!(DiffusionModel::from_config(&v).is_err());
    }
}
