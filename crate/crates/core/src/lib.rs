//! Exact spherical cap discrepancy of finite point sets on `S^{n-1}`.
//!
//! The cap discrepancy of `x_1, ..., x_N` is the largest deviation between
//! the fraction of points in a spherical cap `C(w, t) = {x : <w, x> >= t}` and
//! the cap's normalised surface measure. [`enumerate`] computes it exactly by
//! visiting the finitely many caps whose boundary passes through affinely
//! independent subsets of the sample. [`lower_bound`] and the grid
//! [`oracle`] give cheaper bounds, and [`samplers`] produces the point sets
//! studied in the experiments.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom of this page fix the scalar to `f64` or `f32`.

pub mod cap_measure;
pub mod discrepancy;
pub mod enumerator;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod points;
pub mod samplers;
pub mod scalar;
pub mod subset;

pub use cap_measure::{cap_measure, normalization_constant, sin_power_integral, CapMeasure};
pub use discrepancy::{
    count_in_cap, directional_supremum, empirical_measure, empirical_measure_with_tol, local_discrepancy, lower_bound,
    lower_bound_details, Attainment, DirectionalSupremum,
};
pub use enumerator::{
    enumerate, enumerate_prefixes, global_rank_bound, subset_space_size, DiscrepancyReport, EnumerationConfig,
    EnumerationStats, GlobalRankInfo, Strategy,
};
pub use error::{Error, Result};
pub use oracle::{cross_check, grid_lower_bound, GridSpec, Verdict};
pub use points::{unit_tolerance, Cap, PointSet};
pub use samplers::{sample, SamplerSpec, Scheme};
pub use scalar::Real;
pub use subset::{
    boundary_residual, feasibility_tolerance, unit_residual, Family, Gram, KernelConvention, SubsetAlgebra,
    SubsetCandidate, Tolerances,
};

pub type PointSetF64 = PointSet<f64>;
pub type PointSetF32 = PointSet<f32>;
pub type CapF64 = Cap<f64>;
pub type CapF32 = Cap<f32>;
pub type ReportF64 = DiscrepancyReport<f64>;
pub type ReportF32 = DiscrepancyReport<f32>;
