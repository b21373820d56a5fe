//! Reparametrization-invariant Sobolev-type metrics on closed planar curves.
//!
//! The crate discretizes immersions `S¹ → ℝ²` on a uniform grid and builds
//! inertia operators `L_c` whose metrics `G_c(h,k) = ∫⟨L_c h, k⟩ ds` induce a
//! prescribed splitting of the tangent space into a vertical part (the
//! tangential fields) and a horizontal complement.
//!
//! * [`curve`]: curves, frames, curvature, `D_s`, reparametrization.
//! * [`linop`]: dense operators with `L²(ds)` adjoints, Sobolev and
//!   almost-local inertia operators.
//! * [`splitting`]: the tangential/normal and tangential/`Arc⁰` splittings.
//! * [`metric`]: metrics, prescribed-splitting construction, verification.
//! * [`path`]: discrete path energy and horizontal geodesics.
//! * [`io`]: JSON and CSV file formats.

pub mod curve;
pub mod error;
pub mod field;
pub mod interp;
pub mod io;
pub mod linop;
pub mod metric;
pub mod path;
pub mod recipe;
pub mod splitting;

pub use curve::{Diffeo, DiscreteCurve};
pub use error::{Error, Result};
pub use field::{ScalarField, TangentField, Vec2};
pub use linop::{almost_local_operator, sobolev_operator, LinOp, SymmetryCheck, SymmetryReport};
pub use metric::{
    metric_from_operator, oracle_closed_form_arc0, prescribed_splitting_metric,
    reparam_invariance_defect, uncorrected_closed_form_arc0, Metric, MetricReport,
    VerifyTolerances,
};
pub use path::{horizontal_geodesic, CurvePath, GeodesicOptions, GeodesicResult};
pub use recipe::{AlmostLocalCoefficient, Recipe};
pub use splitting::{
    arc0_splitting, solve_b, speed_preservation_residual, tan_nor_splitting, verify_splitting,
    Splitting, SplittingKind, SplittingReport,
};
