//! Radial sector discretizations of linearized operators and their top spectra.
//!
//! Cell-centred finite volumes on `(0, R_max)` with `r_i = (i + ½)h`. The origin
//! face carries no flux for `N ≥ 2`; the outer face is a Dirichlet boundary.
//! With cell volumes `w_i`, the operator is symmetrised by `ψ = √w φ`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dual::QuasilinearSolution;
use crate::error::{Error, Result};
use crate::shooting::GroundState;
use crate::tridiag::{dot, SymTridiag};

/// Tolerance for a discrete eigenvalue to count as zero.
pub const ZERO_TOL: f64 = 5e-3;
/// Separation from zero required of non-kernel eigenvalues.
pub const KERNEL_FREE_MARGIN: f64 = 10.0 * ZERO_TOL;
pub const COSINE_MIN: f64 = 0.999;
pub const R_MAX_FACTOR: f64 = 1.5;
/// Minimum mesh points per decay length.
pub const POINTS_PER_DECAY: f64 = 10.0;
pub const DECAY_FIT_TOL: f64 = 0.05;
pub const DEFAULT_K_TOP: usize = 4;
const SAMPLES: usize = 200;
/// Relative amplitude below which eigenvector entries are rounding noise.
const TAIL_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub dim: usize,
    pub l: usize,
    /// `l(l + N − 2)`.
    pub lambda_l: f64,
    pub r_max: f64,
    pub h: f64,
    pub r: Vec<f64>,
    /// Cell volumes (up to the sphere area).
    pub weight: Vec<f64>,
    pub matrix: SymTridiag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorEigenPair {
    pub value: f64,
    /// Unit vector of the symmetrised matrix.
    pub psi: Vec<f64>,
}

pub fn angular_eigenvalue(dim: usize, l: usize) -> f64 {
    let l = l as f64;
    l * (l + dim as f64 - 2.0)
}

impl SectorOperator {
    /// Discretizes `φ ↦ r^{1−N}(r^{N−1} A φ′)′ + (q − A λ_l / r²) φ`.
    pub fn assemble(
        dim: usize,
        l: usize,
        mesh_n: usize,
        r_max: f64,
        q: &(dyn Fn(f64) -> f64 + Sync),
        diffusion: &(dyn Fn(f64) -> f64 + Sync),
    ) -> Result<Self> {
        if dim == 0 || mesh_n < 3 || !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Precondition(
                "sector mesh needs N ≥ 1, mesh_n ≥ 3, R_max > 0".into(),
            ));
        }
        if dim == 1 && l > 1 {
            return Err(Error::Precondition(
                "N = 1 has only the sectors l = 0, 1".into(),
            ));
        }
        let n = mesh_n;
        let h = r_max / n as f64;
        let nd = dim as f64;
        let lambda_l = angular_eigenvalue(dim, l);
        let r: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let weight: Vec<f64> = r
            .iter()
            .map(|&ri| {
                let (a, b) = (ri - 0.5 * h, ri + 0.5 * h);
                (b.powf(nd) - a.powf(nd)) / (nd * h)
            })
            .collect();
        // face i sits at i·h
        let flux: Vec<f64> = (0..=n)
            .map(|i| {
                let rf = i as f64 * h;
                rf.powf(nd - 1.0) * diffusion(rf)
            })
            .collect();
        let h2 = h * h;
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            let mut left = flux[i];
            if i == 0 && dim == 1 {
                // even (l = 0) or odd (l = 1) extension through the origin
                left = if l == 0 { 0.0 } else { 2.0 * flux[0] };
            }
            let right = if i + 1 == n {
                2.0 * flux[n]
            } else {
                flux[i + 1]
            };
            let angular = if lambda_l == 0.0 {
                0.0
            } else {
                diffusion(r[i]) * lambda_l * inv_r2_mean(r[i], h, nd)
            };
            let c = q(r[i]) - angular;
            diag.push(-(left + right) / (h2 * weight[i]) + c);
        }
        let off = (0..n - 1)
            .map(|i| flux[i + 1] / (h2 * (weight[i] * weight[i + 1]).sqrt()))
            .collect();
        Ok(Self {
            dim,
            l,
            lambda_l,
            r_max,
            h,
            r,
            weight,
            matrix: SymTridiag::new(diag, off)?,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// The `k` largest eigenpairs, with each vector's largest entry positive.
    pub fn eigenpairs(&self, k: usize) -> Vec<SectorEigenPair> {
        self.matrix
            .top_eigenpairs(k)
            .into_iter()
            .map(|p| {
                let mut psi = p.vector;
                let big = psi
                    .iter()
                    .copied()
                    .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
                if big < 0.0 {
                    psi.iter_mut().for_each(|x| *x = -*x);
                }
                SectorEigenPair {
                    value: p.value,
                    psi,
                }
            })
            .collect()
    }

    /// `φ = ψ / √w` on the mesh.
    pub fn phi(&self, psi: &[f64]) -> Vec<f64> {
        psi.iter()
            .zip(&self.weight)
            .map(|(p, w)| p / w.sqrt())
            .collect()
    }

    /// Weighted cosine between the eigenfunction of `psi` and `f` sampled on the mesh.
    pub fn cosine(&self, psi: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
        let g: Vec<f64> = self
            .r
            .iter()
            .zip(&self.weight)
            .map(|(&r, w)| f(r) * w.sqrt())
            .collect();
        dot(psi, &g) / (dot(psi, psi).sqrt() * dot(&g, &g).sqrt())
    }
}

/// Volume average of `r⁻²` over the cell centred at `r` with width `h`.
fn inv_r2_mean(r: f64, h: f64, nd: f64) -> f64 {
    let (a, b) = (r - 0.5 * h, r + 0.5 * h);
    let num = if nd == 2.0 {
        (b / a.max(f64::MIN_POSITIVE)).ln()
    } else {
        (b.powf(nd - 2.0) - a.powf(nd - 2.0)) / (nd - 2.0)
    };
    let den = (b.powf(nd) - a.powf(nd)) / nd;
    num / den
}

fn check_resolution(h: f64, decay: f64) -> Result<()> {
    let limit = 1.0 / (POINTS_PER_DECAY * decay);
    if h > limit {
        return Err(Error::Resolution { h, limit });
    }
    Ok(())
}

fn ground_decay(ground: &GroundState) -> f64 {
    let gp0 = ground.problem().model.g_prime(0.0);
    if gp0 < 0.0 {
        (-gp0).sqrt()
    } else {
        0.0
    }
}

/// Sector `l` of `Δ + g′(u)` at a ground state.
pub fn ground_sector(
    ground: &GroundState,
    l: usize,
    mesh_n: usize,
    r_max: f64,
) -> Result<SectorOperator> {
    let h = r_max / mesh_n.max(1) as f64;
    check_resolution(h, ground_decay(ground))?;
    let m = &ground.problem().model;
    let q = |r: f64| m.g_prime(ground.u(r));
    SectorOperator::assemble(ground.problem().dim, l, mesh_n, r_max, &q, &|_| 1.0)
}

/// The `k_top` largest eigenpairs of sector `l` at a ground state.
pub fn sector_eigs(
    ground: &GroundState,
    l: usize,
    mesh_n: usize,
    r_max: f64,
    k_top: usize,
) -> Result<Vec<SectorEigenPair>> {
    Ok(ground_sector(ground, l, mesh_n, r_max)?.eigenpairs(k_top))
}

pub fn default_r_max(ground: &GroundState) -> f64 {
    R_MAX_FACTOR * ground.r_max
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralVerdict {
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

fn verdict(pass: bool, value: f64, threshold: f64, detail: impl Into<String>) -> SpectralVerdict {
    SpectralVerdict {
        pass,
        value,
        threshold,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorSpectrum {
    /// `L` for the semilinear operator, `L1`/`L2` for the mNLS pair.
    pub operator: String,
    pub l: usize,
    pub lambda_l: f64,
    pub mesh_n: usize,
    pub eigenvalues: Vec<f64>,
    pub rayleigh_quotients: Vec<f64>,
    /// `(r, φ)` of the top eigenvector, subsampled and max-normalised.
    pub top_vector_samples: Vec<[f64; 2]>,
    #[serde(skip)]
    pub r: Vec<f64>,
    #[serde(skip)]
    pub weight: Vec<f64>,
    #[serde(skip)]
    pub pairs: Vec<SectorEigenPair>,
}

impl SectorSpectrum {
    fn from_operator(name: &str, op: &SectorOperator, k: usize) -> Self {
        let pairs = op.eigenpairs(k);
        let rayleigh_quotients = pairs.iter().map(|p| op.matrix.rayleigh(&p.psi)).collect();
        let top_vector_samples = pairs
            .first()
            .map(|p| {
                let phi = op.phi(&p.psi);
                let m = phi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let stride = (op.len() / SAMPLES).max(1);
                (0..op.len())
                    .step_by(stride)
                    .map(|i| [op.r[i], phi[i] / m])
                    .collect()
            })
            .unwrap_or_default();
        Self {
            operator: name.into(),
            l: op.l,
            lambda_l: op.lambda_l,
            mesh_n: op.len(),
            eigenvalues: pairs.iter().map(|p| p.value).collect(),
            rayleigh_quotients,
            top_vector_samples,
            r: op.r.clone(),
            weight: op.weight.clone(),
            pairs,
        }
    }

    pub fn phi(&self, j: usize) -> Vec<f64> {
        self.pairs[j]
            .psi
            .iter()
            .zip(&self.weight)
            .map(|(p, w)| p / w.sqrt())
            .collect()
    }

    pub fn cosine(&self, j: usize, f: &dyn Fn(f64) -> f64) -> f64 {
        let g: Vec<f64> = self
            .r
            .iter()
            .zip(&self.weight)
            .map(|(&r, w)| f(r) * w.sqrt())
            .collect();
        let psi = &self.pairs[j].psi;
        dot(psi, &g) / (dot(psi, psi).sqrt() * dot(&g, &g).sqrt())
    }

    /// Index of the eigenvalue closest to zero.
    pub fn nearest_zero(&self) -> usize {
        (0..self.eigenvalues.len())
            .min_by(|&a, &b| {
                self.eigenvalues[a]
                    .abs()
                    .total_cmp(&self.eigenvalues[b].abs())
            })
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub kind: String,
    pub dim: usize,
    pub mesh_n: usize,
    pub r_max: f64,
    pub h: f64,
    pub zero_tol: f64,
    pub sectors: Vec<SectorSpectrum>,
    pub verdicts: BTreeMap<String, SpectralVerdict>,
}

impl SpectralReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| !v.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn sector(&self, operator: &str, l: usize, mesh_n: usize) -> Option<&SectorSpectrum> {
        self.sectors
            .iter()
            .find(|s| s.operator == operator && s.l == l && s.mesh_n == mesh_n)
    }

    /// Eigenfunctions of every stored pair: `operator,l,mesh_n,index,eigenvalue,r,phi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("operator,l,mesh_n,index,eigenvalue,r,phi\n");
        for s in &self.sectors {
            for (j, p) in s.pairs.iter().enumerate() {
                for (i, phi) in s.phi(j).iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{:.16e},{:.16e},{:.16e}\n",
                        s.operator, s.l, s.mesh_n, j, p.value, s.r[i], phi
                    ));
                }
            }
        }
        out
    }
}

/// Least-squares slope of `ln(|φ| r^{(N−1)/2})` against `r` on `[a, b]`.
fn tail_slope(s: &SectorSpectrum, j: usize, dim: usize, a: f64, b: f64) -> Option<f64> {
    let phi = s.phi(j);
    let m = 0.5 * (dim as f64 - 1.0);
    let pts: Vec<(f64, f64)> =
        s.r.iter()
            .zip(&phi)
            .filter(|(r, p)| **r >= a && **r <= b && p.abs() > 0.0)
            .map(|(r, p)| (*r, p.abs().ln() + m * r.ln()))
            .collect();
    if pts.len() < 10 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Last mesh radius where `|φ_j|` exceeds `floor · max|φ_j|`.
fn amplitude_floor(s: &SectorSpectrum, j: usize, floor: f64) -> f64 {
    let phi = s.phi(j);
    let m = phi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    s.r.iter()
        .zip(&phi)
        .filter(|(_, p)| p.abs() >= floor * m)
        .map(|(r, _)| *r)
        .fold(0.0, f64::max)
}

/// First radius beyond which `|g′(u) − g′(0)| ≤ 1e−3 |g′(0)|` on the mesh.
fn potential_settled(ground: &GroundState, r: &[f64]) -> f64 {
    let m = &ground.problem().model;
    let g0 = m.g_prime(0.0);
    let mut start = r[0];
    for &ri in r {
        if (m.g_prime(ground.u(ri)) - g0).abs() > 1e-3 * g0.abs() {
            start = ri;
        }
    }
    start
}

/// Sectors `l = 0, 1, 2` of the linearization at a ground state, plus `l = 1`
/// on the doubled mesh.
pub fn ground_spectral_report(
    ground: &GroundState,
    mesh_n: usize,
    r_max: f64,
) -> Result<SpectralReport> {
    let dim = ground.problem().dim;
    let mut jobs: Vec<(usize, usize)> = vec![(0, mesh_n), (1, mesh_n), (1, 2 * mesh_n)];
    if dim >= 2 {
        jobs.push((2, mesh_n));
    }
    let sectors: Vec<SectorSpectrum> = jobs
        .par_iter()
        .map(|&(l, n)| {
            let op = ground_sector(ground, l, n, r_max)?;
            Ok(SectorSpectrum::from_operator("L", &op, DEFAULT_K_TOP))
        })
        .collect::<Result<_>>()?;
    let s0 = &sectors[0];
    let s1 = &sectors[1];
    let s1f = &sectors[2];
    let mut verdicts = BTreeMap::new();

    let mu1 = s0.eigenvalues[0];
    let next = s0.eigenvalues.get(1).copied().unwrap_or(f64::NEG_INFINITY);
    let phi1 = s0.phi(0);
    let one_signed = phi1.iter().all(|&x| x > 0.0);
    verdicts.insert(
        "mu1_positive_simple".into(),
        verdict(
            mu1 > KERNEL_FREE_MARGIN && mu1 - next > KERNEL_FREE_MARGIN && one_signed,
            mu1 - next,
            KERNEL_FREE_MARGIN,
            format!("mu1 = {mu1:.6e}, next l=0 eigenvalue = {next:.6e}, eigenvector one-signed: {one_signed}"),
        ),
    );

    let nearest0 = s0
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, x| m.min(x.abs()));
    verdicts.insert(
        "l0_kernel_free".into(),
        verdict(
            nearest0 > KERNEL_FREE_MARGIN,
            nearest0,
            KERNEL_FREE_MARGIN,
            "smallest |eigenvalue| in the radial sector",
        ),
    );

    let j1 = s1.nearest_zero();
    let mu_zero = s1.eigenvalues[j1];
    verdicts.insert(
        "mu2_zero".into(),
        verdict(
            mu_zero.abs() <= ZERO_TOL && j1 == 0,
            mu_zero,
            ZERO_TOL,
            format!("top l=1 eigenvalue, index {j1}"),
        ),
    );
    let cos = s1.cosine(j1, &|r| ground.u_prime(r)).abs();
    verdicts.insert(
        "l1_kernel_matches_uprime".into(),
        verdict(
            cos >= COSINE_MIN,
            cos,
            COSINE_MIN,
            "weighted cosine of the l=1 zero mode against u′",
        ),
    );
    let mu_fine = s1f.eigenvalues[s1f.nearest_zero()];
    let shrink = mu_zero.abs() / mu_fine.abs();
    verdicts.insert(
        "l1_zero_converges".into(),
        verdict(
            shrink >= 3.0,
            shrink,
            3.0,
            format!("|mu(n)| / |mu(2n)| with mu(2n) = {mu_fine:.6e}"),
        ),
    );

    if dim >= 2 {
        let top2 = sectors[3].eigenvalues[0];
        verdicts.insert(
            "l2_no_kernel".into(),
            verdict(
                top2 < -KERNEL_FREE_MARGIN,
                top2,
                -KERNEL_FREE_MARGIN,
                "top l=2 eigenvalue",
            ),
        );
    }

    let k = (mu1 - ground.problem().model.g_prime(0.0)).sqrt();
    let a = potential_settled(ground, &s0.r);
    let b = (r_max - 5.0 / k).min(amplitude_floor(s0, 0, TAIL_FLOOR));
    let slope = if b > a + 1.0 {
        tail_slope(s0, 0, dim, a, b)
    } else {
        None
    };
    let (pass, rel, detail) = match slope {
        Some(sl) => {
            let rel = (-sl - k).abs() / k;
            (
                rel <= DECAY_FIT_TOL,
                rel,
                format!("fitted rate {:.6e} vs {k:.6e} on [{a:.3}, {b:.3}]", -sl),
            )
        }
        None => (false, f64::NAN, "tail window too short".to_string()),
    };
    verdicts.insert(
        "mu1_eigenfunction_decay".into(),
        verdict(pass, rel, DECAY_FIT_TOL, detail),
    );

    Ok(SpectralReport {
        kind: "semilinear".into(),
        dim,
        mesh_n,
        r_max,
        h: r_max / mesh_n as f64,
        zero_tol: ZERO_TOL,
        sectors,
        verdicts,
    })
}

/// Profile `w` with `w′` and `Δw` from the equation `a(w)Δw + ½a′(w)|∇w|² + h(w) = 0`.
#[derive(Debug, Clone, Copy)]
struct MnlsPoint {
    w: f64,
    wp: f64,
    lap: f64,
}

fn mnls_point(sol: &QuasilinearSolution, lambda: f64, kappa: f64, p: f64, r: f64) -> MnlsPoint {
    let v = sol.dual.u(r);
    let vp = sol.dual.u_prime(r);
    let [w, fp, _] = sol.transform.eval(v).unwrap_or([f64::NAN; 3]);
    let wp = fp * vp;
    let h = -lambda * w + w.abs().powf(p - 1.0) * w;
    let lap = -(h + 2.0 * kappa * w * wp * wp) / (1.0 + 2.0 * kappa * w * w);
    MnlsPoint { w, wp, lap }
}

/// Sector operators of the mNLS linearization at `w`:
/// `L₂ = Δ + q₂` and `L₁ = div((1 + 2κw²)∇) + q₁`.
pub fn mnls_sector(
    sol: &QuasilinearSolution,
    which: u8,
    lambda: f64,
    kappa: f64,
    p: f64,
    l: usize,
    mesh_n: usize,
    r_max: f64,
) -> Result<SectorOperator> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(
            "mNLS frequency must be positive".into(),
        ));
    }
    check_resolution(r_max / mesh_n.max(1) as f64, lambda.sqrt())?;
    let dim = sol.dual.problem().dim;
    let pt = |r: f64| mnls_point(sol, lambda, kappa, p, r);
    match which {
        1 => {
            let q = |r: f64| {
                let m = pt(r);
                -lambda
                    + 4.0 * kappa * m.w * m.lap
                    + 2.0 * kappa * m.wp * m.wp
                    + p * m.w.abs().powf(p - 1.0)
            };
            let a = |r: f64| {
                let w = sol
                    .transform
                    .eval(sol.dual.u(r))
                    .map(|x| x[0])
                    .unwrap_or(f64::NAN);
                1.0 + 2.0 * kappa * w * w
            };
            SectorOperator::assemble(dim, l, mesh_n, r_max, &q, &a)
        }
        2 => {
            let q = |r: f64| {
                let m = pt(r);
                -lambda + 2.0 * kappa * (m.w * m.lap + m.wp * m.wp) + m.w.abs().powf(p - 1.0)
            };
            SectorOperator::assemble(dim, l, mesh_n, r_max, &q, &|_| 1.0)
        }
        _ => Err(Error::Precondition(
            "mNLS operator index must be 1 or 2".into(),
        )),
    }
}

/// Kernel verdicts for the mNLS pair: `Ker L₂ = span{w}`, `L₁` radially
/// kernel-free, and the `l = 1` kernel of `L₁` spanned by `w′`.
pub fn mnls_kernel_report(
    sol: &QuasilinearSolution,
    lambda: f64,
    kappa: f64,
    p: f64,
    mesh_n: usize,
    r_max: f64,
) -> Result<SpectralReport> {
    let dim = sol.dual.problem().dim;
    let jobs: [(u8, usize); 3] = [(2, 0), (1, 0), (1, 1)];
    let sectors: Vec<SectorSpectrum> = jobs
        .par_iter()
        .map(|&(which, l)| {
            let op = mnls_sector(sol, which, lambda, kappa, p, l, mesh_n, r_max)?;
            let name = if which == 1 { "L1" } else { "L2" };
            Ok(SectorSpectrum::from_operator(name, &op, DEFAULT_K_TOP))
        })
        .collect::<Result<_>>()?;
    let w = |r: f64| mnls_point(sol, lambda, kappa, p, r).w;
    let wp = |r: f64| mnls_point(sol, lambda, kappa, p, r).wp;
    let mut verdicts = BTreeMap::new();

    let l2 = &sectors[0];
    let j = l2.nearest_zero();
    let mu = l2.eigenvalues[j];
    verdicts.insert(
        "l2_zero_eigenvalue".into(),
        verdict(
            mu.abs() <= ZERO_TOL,
            mu,
            ZERO_TOL,
            format!("L2 radial eigenvalue nearest zero, index {j}"),
        ),
    );
    let cos = l2.cosine(j, &w).abs();
    verdicts.insert(
        "l2_kernel_matches_w".into(),
        verdict(
            cos >= COSINE_MIN,
            cos,
            COSINE_MIN,
            "weighted cosine of the L2 zero mode against w",
        ),
    );

    let l1r = &sectors[1];
    let nearest = l1r
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, x| m.min(x.abs()));
    verdicts.insert(
        "l1_radial_kernel_free".into(),
        verdict(
            nearest > KERNEL_FREE_MARGIN,
            nearest,
            KERNEL_FREE_MARGIN,
            "smallest |eigenvalue| of L1 on radial functions",
        ),
    );

    let l1a = &sectors[2];
    let j = l1a.nearest_zero();
    let mu = l1a.eigenvalues[j];
    let cos = l1a.cosine(j, &wp).abs();
    verdicts.insert(
        "l1_kernel_matches_wprime".into(),
        verdict(
            mu.abs() <= ZERO_TOL && cos >= COSINE_MIN,
            cos,
            COSINE_MIN,
            format!("L1 l=1 eigenvalue {mu:.6e}, cosine against w′"),
        ),
    );

    Ok(SpectralReport {
        kind: "mnls".into(),
        dim,
        mesh_n,
        r_max,
        h: r_max / mesh_n as f64,
        zero_tol: ZERO_TOL,
        sectors,
        verdicts,
    })
}
