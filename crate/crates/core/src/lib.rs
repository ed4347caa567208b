//! Steady-state excitation localization in weakly driven, chirally coupled
//! atom-waveguide arrays.
//!
//! In the single-excitation (weak-drive) limit the atomic amplitudes obey
//! `dp/dt = -i w + M p`, with `M` the chiral coupling matrix and `w` the
//! per-atom drive. This crate assembles `M` and `w` for uniform, two-zone
//! and defect drive schemes, solves for the steady state, integrates the
//! transient as an independent check, and evaluates localization metrics
//! (IPR, interface IPR, interface-edge ratio) over parameter grids.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`.

pub mod analytics;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod sweep;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub use analytics::{
    analytic_defect_amplitudes, analytic_defect_populations, analytic_pm, analytic_xi_max, diagonal_angles,
    predict_riel_minima,
};
pub use dynamics::{integrate, write_trajectory_csv, IntegrationOptions};
pub use metrics::{compute_iipr, compute_ipr, compute_metrics, compute_riel, interface_indices};
pub use model::{
    build_coupling_matrix, build_drive_vector, build_geometry, make_asymmetric_scheme, make_central_defect_scheme,
    make_defect_scheme, make_uniform_scheme, SchemeTag,
};
pub use solver::{normalized_populations, solve_configuration, solve_steady_state};
pub use sweep::{cross_section, diagonal, run_sweep, write_sweep_csv, SweepResult, SweepSpec};

pub type ArrayGeometry = model::ArrayGeometry<f64>;
pub type CouplingParams = model::CouplingParams<f64>;
pub type DriveScheme = model::DriveScheme<f64>;
pub type CouplingMatrix = model::CouplingMatrix<f64>;
pub type SteadyState = solver::SteadyState<f64>;
pub type TrajectoryRecord = dynamics::TrajectoryRecord<f64>;
pub type MetricSet = metrics::MetricSet<f64>;
pub type Complex = Cplx<f64>;

pub type ArrayGeometry32 = model::ArrayGeometry<f32>;
pub type CouplingParams32 = model::CouplingParams<f32>;
pub type DriveScheme32 = model::DriveScheme<f32>;
pub type SteadyState32 = solver::SteadyState<f32>;
