//! Classical Fisher information, optimal projective measurements and
//! drift-stability analysis for pure-state unitary parameter estimation.

pub mod estimate;
pub mod fisher;
pub mod linalg;
pub mod model;
pub mod optimal;
pub mod spin;
pub mod stability;

pub use estimate::{
    crb_experiment, default_search_interval, mle, sample_outcomes, EstimateError, EstimationRun,
};
pub use fisher::{
    complement, f_operator, fisher_direct, fisher_operator_form, fisher_velocity, phi_operator,
    report, FisherError, FisherReport,
};
pub use linalg::{ComplexMatrix, ComplexVector, LinalgError, SpectralDecomposition, C64};
pub use model::{
    amplitude_track, evolve, rezero, AmplitudeTrack, Hamiltonian, MeasurementBasis, ModelError,
    OutcomeTrack, PureState,
};
pub use optimal::{
    build_optimal_basis, check_block_diagonal, check_optimality, check_optimality_braun_caves,
    check_parameter_independence, max_variance_probe, qubit_closed_form, seminorm_bound,
    CriterionVerdict, OptimalError, QubitEmbedding,
};
pub use spin::{
    classify, hotspot_arc_count, landscape_scan, make_spin, noon_state, transverse_tolerance,
    BasisKind, ClassifySummary, LandscapeGrid, SpinError, SpinSystem, TransverseTolerance,
};
pub use stability::{
    complement_surface, drifted_basis, fisher_surface, hessian_at, orthogonality_condition,
    DriftModel, HessianReport, StabilityError,
};
