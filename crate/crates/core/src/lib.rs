//! Numerical solver and hypothesis checker for nonlinear Volterra integral
//! equations and inclusions of the second kind on open boxes of `R^N`.
//!
//! Three problem forms are supported:
//!
//! * additive: `u(x) = g(x, u(x)) + V(w)(x)`
//! * nested: `u(x) = g(x, u(x), V(w)(x))`
//! * set valued: `u(x) in G(x, V(w)(x))`, solved through the Steiner point
//!
//! where `V(w)(x)` integrates `k(x, y) w(y)` over a moving box `Lambda(x)` and
//! `w` is a selection of the multimap `F(y, u(y))`.
//!
//! Geometry and grid types are generic over [`Scalar`]; the `*64` / `*32`
//! aliases below fix the precision. Everything driven by [`Expr`] works in `f64`.

pub mod config;
pub mod convex;
pub mod domain;
pub mod error;
pub mod expr;
pub mod goursat;
pub mod grid;
pub mod operators;
pub mod output;
pub mod problem;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod weights;

pub use config::{load_config, parse_config, Config, ConfigError};
pub use convex::{hausdorff, steiner_lipschitz_constant, ConvexSet};
pub use domain::{
    check_lambda_invariance, check_tau_admissible, region_measure, rho, BoxSet, Exhaustion,
    ExhaustionRule, Region, TauMap,
};
pub use error::{Error, Result};
pub use expr::{Expr, ExprError, VarLayout};
pub use goursat::{goursat_outer, goursat_spec, GoursatData};
pub use grid::{equicontinuity_modulus, FunctionFamily, Grid, GridFunction};
pub use operators::{
    check_hypotheses, h_apply, nemytskii_select, outer_apply, volterra_apply, HypothesisReport,
    Kernel, Modulus, MultiMapF, OuterMap,
};
pub use output::write_solution_csv;
pub use problem::{Discretization, Form, ProblemSpec, Strategy};
pub use scalar::Scalar;
pub use solver::{
    condensing_certificate, condensing_check, mnc_axiom_check, picard_solve, residual,
    CondensingReport, SolveReport,
};
pub use weights::{
    bielecki_norm, build_schedule, check_brzeg, psi, select_l, PhiContext, ScheduleRow,
    WeightSchedule,
};

pub type Box64 = BoxSet<f64>;
pub type Box32 = BoxSet<f32>;
pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type GridFunction64 = GridFunction<f64>;
pub type GridFunction32 = GridFunction<f32>;
pub type Family64 = FunctionFamily<f64>;
pub type Family32 = FunctionFamily<f32>;
pub type Convex64 = ConvexSet<f64>;
pub type Convex32 = ConvexSet<f32>;
