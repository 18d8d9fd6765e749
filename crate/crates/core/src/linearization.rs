//! Zeros of the variation δ and the admissibility / non-degeneracy verdicts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial_ode::{EndReason, Trajectory};
use crate::shooting::{Classification, GroundState};

/// Required growth of |δ| past its pre-zero peak.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    Strict,
    NotStrict,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailBehavior {
    /// δ ends below `−DIVERGENCE_FACTOR · peak` with growing magnitude.
    DivergesNegative {
        end_value: f64,
        peak_before_zero: f64,
        ratio: f64,
    },
    DecaysToZero {
        end_value: f64,
    },
    /// The record stops before either certificate.
    Truncated {
        r_end: f64,
        end_value: f64,
    },
    /// The shot ended at a zero `R` of `u`; `delta` is `δ(R)`.
    EndsAtZero {
        r: f64,
        delta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub zero_count: usize,
    pub zero_locations: Vec<f64>,
    pub strict: Strictness,
    pub tail_behavior: TailBehavior,
}

impl AdmissibilityVerdict {
    pub fn admissible(&self) -> bool {
        self.zero_count == 1
    }
}

fn require_variation(t: &Trajectory) -> Result<()> {
    if !t.with_variation {
        return Err(Error::Precondition(
            "trajectory has no variation channel".into(),
        ));
    }
    Ok(())
}

/// All sign changes of δ on `(r₀, end)`.
pub fn zeros_of_delta(trajectory: &Trajectory) -> Result<(usize, Vec<f64>)> {
    require_variation(trajectory)?;
    let z = trajectory.delta_zeros();
    Ok((z.len(), z))
}

fn zeros_until(trajectory: &Trajectory, r_end: f64) -> Vec<f64> {
    trajectory
        .delta_zeros()
        .into_iter()
        .filter(|&r| r <= r_end)
        .collect()
}

/// Admissibility of the height that produced `trajectory`.
///
/// For a ground candidate the analysis stops where the record leaves the
/// linear tail regime beyond `r_trust`.
pub fn admissibility(
    trajectory: &Trajectory,
    classification: &Classification,
) -> Result<AdmissibilityVerdict> {
    require_variation(trajectory)?;
    let tol = trajectory.tol;
    match *classification {
        Classification::CrossesZero { r, .. } => {
            if trajectory.end != (EndReason::UZero { r }) {
                return Err(Error::Precondition(
                    "classification does not match the trajectory end".into(),
                ));
            }
            let zeros = zeros_until(trajectory, r);
            let delta = *trajectory.delta.last().unwrap();
            let strict = if zeros.len() == 1 && delta < -tol {
                Strictness::Strict
            } else {
                Strictness::NotStrict
            };
            Ok(AdmissibilityVerdict {
                zero_count: zeros.len(),
                zero_locations: zeros,
                strict,
                tail_behavior: TailBehavior::EndsAtZero { r, delta },
            })
        }
        Classification::GroundCandidate { r_trust } => ground_verdict(trajectory, r_trust),
        Classification::Undetermined { .. } => {
            let zeros = zeros_until(trajectory, trajectory.r_end());
            Ok(AdmissibilityVerdict {
                zero_count: zeros.len(),
                zero_locations: zeros,
                strict: Strictness::Undetermined,
                tail_behavior: TailBehavior::Truncated {
                    r_end: trajectory.r_end(),
                    end_value: *trajectory.delta.last().unwrap(),
                },
            })
        }
        Classification::StaysPositive { .. } => Err(Error::Precondition(
            "admissibility is defined for heights whose solution crosses zero or decays".into(),
        )),
    }
}

/// Past `r_trust`, the record is still used while `u` stays positive and
/// `g′(u)` is within 1% of `g′(0)`: there δ solves the linearised tail equation.
fn linear_regime_end(t: &Trajectory, r_trust: f64) -> f64 {
    let m = &t.problem.model;
    let g0 = m.g_prime(0.0);
    let mut r_end = r_trust;
    for (r, u) in t.nodes.iter().zip(&t.u) {
        if *r <= r_trust {
            continue;
        }
        if *u <= 0.0 || (m.g_prime(*u) - g0).abs() > 1e-2 * g0.abs() {
            break;
        }
        r_end = *r;
    }
    r_end
}

fn ground_verdict(t: &Trajectory, r_trust: f64) -> Result<AdmissibilityVerdict> {
    let r_limit = linear_regime_end(t, r_trust);
    let zeros = zeros_until(t, r_limit);
    let last = t.nodes.partition_point(|&r| r <= r_limit).saturating_sub(1);
    if zeros.is_empty() {
        return Err(Error::TheoryViolation(format!(
            "variation has no zero on (0, {r_trust}] for a ground candidate"
        )));
    }
    let first_zero = zeros[0];
    let peak = t
        .nodes
        .iter()
        .zip(&t.delta)
        .take_while(|(r, _)| **r <= first_zero)
        .map(|(_, d)| d.abs())
        .fold(0.0, f64::max);
    let end_value = t.delta[last];
    let end_log = t.delta_log_abs[last];
    let threshold_log = (DIVERGENCE_FACTOR * peak).ln();

    // |δ| must grow monotonically over its last decade of growth.
    let mut monotone = true;
    let mut i = last;
    while i > 0
        && t.delta_log_abs[i - 1] >= end_log - std::f64::consts::LN_10
        && t.nodes[i - 1] > first_zero
    {
        if t.delta_log_abs[i - 1] > t.delta_log_abs[i] {
            monotone = false;
            break;
        }
        i -= 1;
    }

    let ratio = (end_log - peak.ln()).exp();
    let tail = if end_value < 0.0 && end_log >= threshold_log && monotone {
        TailBehavior::DivergesNegative {
            end_value,
            peak_before_zero: peak,
            ratio,
        }
    } else if end_value.abs() < 1e-3 * peak && zeros.len() == 1 {
        TailBehavior::DecaysToZero { end_value }
    } else {
        TailBehavior::Truncated {
            r_end: t.nodes[last],
            end_value,
        }
    };
    let strict = match (&tail, zeros.len()) {
        (TailBehavior::DivergesNegative { .. }, 1) => Strictness::Strict,
        (TailBehavior::Truncated { .. }, _) => Strictness::Undetermined,
        _ => Strictness::NotStrict,
    };
    Ok(AdmissibilityVerdict {
        zero_count: zeros.len(),
        zero_locations: zeros,
        strict,
        tail_behavior: tail,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    /// True iff the ground state is strictly admissible.
    pub nondegenerate: bool,
    pub verdict: Strictness,
    pub admissibility: AdmissibilityVerdict,
}

/// Non-degeneracy in the radial sector: strict admissibility makes δ unbounded,
/// so no radial kernel element exists.
pub fn nondegeneracy_check(ground: &GroundState) -> Result<NondegeneracyReport> {
    let adm = admissibility(&ground.trajectory, &ground.classification())?;
    Ok(NondegeneracyReport {
        nondegenerate: adm.strict == Strictness::Strict,
        verdict: adm.strict,
        admissibility: adm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{structural_constants, Family, SemilinearModel};
    use crate::radial_ode::{
        integrate, integrate_with, IntegrateOptions, RadialProblem, StopPolicy,
    };
    use crate::shooting::{classification_of, find_ground_state};

    fn cubic3() -> (RadialProblem, GroundState) {
        let m = SemilinearModel::power(1.0, 3.0);
        let c = structural_constants(&m, 1e8).unwrap();
        let p = RadialProblem::new(3, m).unwrap();
        let gs = find_ground_state(&p, &c, 1e-12).unwrap();
        (p, gs)
    }

    #[test]
    fn linear_model_has_no_zero() {
        let p = RadialProblem::new(3, SemilinearModel::builtin(Family::Linear { lambda: 1.0 }))
            .unwrap();
        let t = integrate(&p, 1.0, 5.0, 1e-10, true).unwrap();
        assert_eq!(zeros_of_delta(&t).unwrap().0, 0);
        let t = integrate(&p, 1.0, 5.0, 1e-10, false).unwrap();
        assert!(matches!(zeros_of_delta(&t), Err(Error::Precondition(_))));
    }

    #[test]
    fn ground_state_is_strict() {
        let (_, gs) = cubic3();
        let rep = nondegeneracy_check(&gs).unwrap();
        assert!(rep.nondegenerate, "{rep:?}");
        assert_eq!(rep.admissibility.zero_count, 1);
        assert!(matches!(
            rep.admissibility.tail_behavior,
            TailBehavior::DivergesNegative { .. }
        ));
        let rd = rep.admissibility.zero_locations[0];
        let t = &gs.trajectory;
        for i in 1..t.len() {
            if t.nodes[i] > gs.r_trust {
                break;
            }
            if (t.nodes[i] - rd).abs() > 1e-9 {
                assert_eq!(t.delta[i] > 0.0, t.nodes[i] < rd, "r={}", t.nodes[i]);
            }
        }
    }

    #[test]
    fn crossing_height_is_strict() {
        let (p, gs) = cubic3();
        let c = structural_constants(&p.model, 1e8).unwrap();
        let opts = IntegrateOptions {
            stop: StopPolicy::AtCertificate { b: c.b },
            ..IntegrateOptions::new(30.0, 1e-10, true)
        };
        let t = integrate_with(&p, gs.d0 + 1e-3, &opts).unwrap();
        let cl = classification_of(&t);
        assert!(cl.is_crossing());
        let v = admissibility(&t, &cl).unwrap();
        assert_eq!(v.zero_count, 1);
        assert_eq!(v.strict, Strictness::Strict);
        match v.tail_behavior {
            TailBehavior::EndsAtZero { delta, .. } => assert!(delta < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_record_is_undetermined() {
        let (_, gs) = cubic3();
        let rd = gs.r_delta.unwrap();
        let cl = Classification::GroundCandidate { r_trust: 2.0 * rd };
        let v = admissibility(&gs.trajectory, &cl).unwrap();
        assert_eq!(v.strict, Strictness::Undetermined);
        assert!(matches!(v.tail_behavior, TailBehavior::Truncated { .. }));
    }

    #[test]
    fn missing_zero_raises_alarm() {
        let (_, gs) = cubic3();
        let rd = gs.r_delta.unwrap();
        let cl = Classification::GroundCandidate { r_trust: 0.5 * rd };
        assert!(matches!(
            admissibility(&gs.trajectory, &cl),
            Err(Error::TheoryViolation(_))
        ));
    }

    #[test]
    fn zero_count_stable_when_range_doubles() {
        let m = SemilinearModel::power(1.0, 3.0);
        let c = structural_constants(&m, 1e8).unwrap();
        let p = RadialProblem::new(3, m).unwrap();
        let opts = crate::shooting::ShootingOptions {
            d_tol: 1e-12,
            ode_tol: 1e-10,
            r_max: Some(60.0),
        };
        let wide = crate::shooting::find_ground_state_with(&p, &c, &opts).unwrap();
        let (_, gs) = cubic3();
        assert_eq!(
            nondegeneracy_check(&wide).unwrap().admissibility.zero_count,
            nondegeneracy_check(&gs).unwrap().admissibility.zero_count
        );
    }
}
