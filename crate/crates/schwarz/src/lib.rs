//! Multiplicative Schwarz solvers for block-arrow matrices.

pub mod block;
pub mod bounds;
pub mod cli;
pub mod dense;
pub mod error;
pub mod io;
pub mod iteration;
pub mod krylov;
pub mod operator;
pub mod problems;
pub mod sampling;
pub mod verify;

pub use block::{BlockArrowSystem, BlockTridiagonal, InverseStrip, LocalSolvers, StripSide, Subdomain};
pub use bounds::{
    bounds_report, check_column_dominance, check_row_dominance, decay_profile, error_bound_curve,
    eta_factors, product_factor_bound, rho_bound, t_norm_bound, BoundsReport, DecayProfile,
    DominanceReport, EtaFactors, EtaVariant,
};
pub use cli::{
    cmd_converge, cmd_custom, cmd_gmres, cmd_poisson, cmd_table, cmd_verify, grid_from_json,
    table_rows,
};
pub use dense::{Matrix, NormKind, Vector};
pub use error::{Error, Result};
pub use io::{
    csv_number, problem_spec_from_json, residual_csv, rhs_from_json, rhs_to_json, system_from_json,
    system_to_json, table_csv, trace_csv, ProblemSpec, TableRow,
};
pub use iteration::{
    consistency_vector, iterate, sweep, IterationOptions, IterationTrace, ReferenceSolution,
};
pub use krylov::{
    additive_operator, gmres_operator, gmres_schwarz, spectral_radius_lower, AdditiveOperator,
    GmresResult,
};
pub use operator::{build_sweep_operator, compute_core, rho_exact, LowRankT, SchwarzCore, SweepOrdering};
pub use problems::{
    build_poisson, build_shishkin, shishkin_rhs_and_exact, PoissonProblem, ShishkinProblem,
    StencilRow, UpwindStencil,
};
pub use sampling::{random_dominant_system, random_rhs, resolve_seed, sample_rng};
pub use verify::{
    default_grid, expected_table, run_verify, two_sig, CheckResult, ExpectedCell, VerifyReport,
    VerifyScale, TABLE_EPSILONS,
};
