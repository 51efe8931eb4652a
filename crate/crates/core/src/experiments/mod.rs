//! Numerical experiments: stability, standing waves, regularization limits,
//! dispersive estimates and the integral inequalities used in uniqueness
//! proofs.

pub mod convergence;
pub mod gausson;
pub mod gronwall;
pub mod limit;
pub mod localization;
pub mod random_field;
pub mod report;
pub mod scan;
pub mod smoothing;
pub mod stability;
pub mod zygmund;

pub use convergence::{
    charge_drift_rate, energy_drift, energy_drift_study, global_error_study, RefinementStudy,
};
pub use gausson::{gausson_experiment, Gausson, GaussonResult};
pub use gronwall::{equality_family, gronwall_bound, gronwall_check, GronwallVerdict};
pub use limit::{regularization_limit_experiment, LimitResult};
pub use localization::{
    commutator_source, localization_error, localization_error_experiment, scheduled_weight,
    LocalizationResult,
};
pub use random_field::{
    make_localized_field, make_random_field, smooth_time_family, RandomFieldSpec,
};
pub use report::ExperimentReport;
pub use scan::{fit_loglog, ScanResult};
pub use smoothing::{
    smoothing_ratio, smoothing_ratio_with, smoothing_scan, SmoothingOptions, SmoothingResult,
    SourceFamily,
};
pub use stability::{perturbed_pair, stability_experiment, SolutionPairBound, StabilityResult};
pub use zygmund::{
    spacetime_l4, zygmund_ratio, zygmund_scan, ZygmundNormalization, ZygmundOptions, ZygmundResult,
};
