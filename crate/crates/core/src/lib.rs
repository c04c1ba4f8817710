#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments, clippy::type_complexity)]

pub mod asymptotics;
pub mod bgd;
pub mod cells;
pub mod error;
pub mod exact;
pub mod forms;
pub mod fractal;
pub mod spectra;

pub use nalgebra;

pub use asymptotics::{
    leading_profile, remainder_regime, renewal_limit, renewal_solve, second_profile, verify_bracketing, PeriodicProfile,
    RenewalSystem,
};
pub use bgd::{analyze, bgd_preset, incidence_matrix, BgdSystem, IncidenceAnalysis, Realization};
pub use cells::{geometric_form, CellTable, CellType, Child, Status};
pub use error::{Error, Result};
pub use exact::{Affine, Point, QuadField, Rational, Surd};
pub use forms::{
    assemble, check_compatibility, gamma_data, BoundaryCondition, GammaData, HarmonicStructure, LevelForm,
    SelfSimilarMeasure,
};
pub use fractal::{apply_word, build_vertex_set, cell_of, FractalSpec, VertexSet, Word};
pub use spectra::{
    count, decimate, decimate_sg, partition_function, solve_dense, Counting, CountingFunction, InertiaCounter,
    Spectrum,
};
