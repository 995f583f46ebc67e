//! Metric geometry of constant-curvature model spaces, metric projections
//! onto the closed sets that arise in nonconvex feasibility problems, and
//! sampling-based certification of the regularity hypotheses under which
//! alternating projections converge linearly.
//!
//! The crate is organized in layers:
//!
//! * [`space`], [`angle`] — distances, geodesics, cosine laws, comparison
//!   triangles, and Alexandrov angles in 𝕊ⁿ, ℝⁿ, ℍⁿ, and products X × ℝ;
//! * [`sets`] — closed-set descriptors (subspheres, halfspaces, epigraphs,
//!   constraint sets, smooth images, the tent graph, point clouds) and
//!   witness-curve generators for uniform approximation by geodesics;
//! * [`projection`] — the metric projection, closed-form where available and
//!   a deterministic multistart solver otherwise, with multivalued output;
//! * [`regularity`] — certifiers and refuters for extrinsic curvature bounds,
//!   uniform approximability by geodesics, super-regularity, separable
//!   intersection, and transversality;
//! * [`altproj`] — the alternating-projection engine, per-step contraction
//!   checks, linear-rate estimation, and the closed-form rate certificate.

pub mod altproj;
pub mod angle;
pub mod error;
pub mod projection;
pub mod regularity;
pub mod sampling;
pub mod sets;
pub mod space;

pub use altproj::{
    certificate_constants, estimate_linear_rate, per_step_contraction_check,
    run_alternating_projections, tail_bound_check, AltProjTrace, RateCertificate, RateFit,
    StopReason, StopRule,
};
pub use angle::{
    alexandrov_angle, comparison_angle, cosine_law_side, default_angle_scales,
    small_angle_descent_witness, tangent_angle, vertex_angle,
};
pub use error::{GeomError, Result};
pub use projection::{
    project, project_obtuse_check, projection_uniqueness_profile, ProjectOpts, ProjectionResult,
};
pub use regularity::{
    angle_at_intersection, check_finite_extrinsic_curvature, check_separable_intersection,
    check_super_regularity, check_two_convexity_ball, check_uag, refute_transversality,
    CheckOpts, IntrinsicMetricEstimate, RegularityReport, Verdict,
};
pub use sets::{
    epigraph_uag_witness, membership, mfcq_uag_witness, smooth_image_eval, tent_g, uag_witness,
    MfcqData, PointField, ScalarField, SetDescriptor, SmoothMap, WitnessCurve,
};
pub use space::{dist, geodesic_between, ComparisonTriangle, Geodesic, ModelSpace, Point};
