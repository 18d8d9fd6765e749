//! Radial ground states of semilinear and quasilinear elliptic equations by
//! shooting, with non-degeneracy diagnostics, dual transforms and sector spectra.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod comparison;
pub mod dual;
pub mod error;
pub mod expr;
pub mod hermite;
pub mod hypothesis;
pub mod linearization;
pub mod nonlinearity;
pub mod ode;
pub mod quadrature;
pub mod radial_ode;
pub mod roots;
pub mod serde_f64;
pub mod shooting;
pub mod spectrum;
pub mod tridiag;

pub use comparison::{
    key_lemma_report, solve_linear_radial, sturm_check, theta_profile, v_lambda_profile,
    KeyLemmaReport, SampledFunction,
};
pub use dual::{
    dual_nonlinearity, phi_monotone_check, solve_f, solve_quasilinear, DiffusionFamily,
    DiffusionModel, DualTransform, QuasilinearSolution,
};
pub use error::{Error, Result};
pub use hypothesis::{
    check_quasilinear, check_semilinear, check_semilinear_model, GridSpec, HypothesisReport,
    Verdict,
};
pub use linearization::{
    admissibility, nondegeneracy_check, zeros_of_delta, AdmissibilityVerdict, NondegeneracyReport,
    Strictness, TailBehavior,
};
pub use nonlinearity::{
    growth_function, i_function, lambda_map, structural_constants, Family, Nonlinearity,
    SemilinearModel, Sign, StructuralConstants,
};
pub use radial_ode::{
    integrate, integrate_with, sample, EndReason, Event, IntegrateOptions, RadialProblem, Sample,
    StopPolicy, Trajectory,
};
pub use shooting::{
    classify, decay_rate, find_ground_state, find_ground_state_with, Classification, DecayFit,
    GroundState, PositiveWitness, ShootingOptions,
};
pub use spectrum::{
    ground_spectral_report, mnls_kernel_report, sector_eigs, SectorEigenPair, SectorOperator,
    SectorSpectrum, SpectralReport, SpectralVerdict,
};
