//! Parameter-uniform finite differences for 1-D parabolic
//! convection-diffusion problems whose convection coefficient vanishes with
//! odd multiplicity at the domain midpoint, producing twin exponential
//! boundary layers.
//!
//! The solver combines implicit Euler in time with a hybrid
//! central/midpoint-upwind space discretization on a layer-adapted
//! piecewise-uniform mesh, and ships first-order upwind baselines on
//! uniform and standard layer meshes. A double-mesh harness estimates
//! maximum pointwise errors and convergence orders over (eps, N) sweeps and
//! aggregates them eps-uniformly.

pub mod analysis;
pub mod discretization;
pub mod error;
pub mod mesh;
pub mod problem;
pub mod solver;

pub use analysis::{
    double_mesh_error, double_mesh_error_detailed, fmt_sig6, order, run_experiment,
    ConvergenceTable, DoubleMeshRun, MPolicy,
};
pub use discretization::{
    assemble_hybrid, assemble_upwind, classify_nodes, is_m_matrix, thomas_solve, MMatrixReport,
    NodeClassification, SchemeTag, TridiagonalSystem,
};
pub use error::{Error, Result};
pub use mesh::{
    bisect, compute_l, generalized_shishkin, standard_shishkin, uniform_mesh, LStrategy, MeshKind,
    Region, SpatialMesh, TimeMesh,
};
pub use problem::{
    builtin_problem_1, builtin_problem_2, Coefficient, SpaceFn, TimeFn, TurningPointProblem,
    ValidationReport,
};
pub use solver::{build_mesh, restrict_to_coarse, solve, MeshOptions, RefineMode, Scheme, SolutionGrid};
