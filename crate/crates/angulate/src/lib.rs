//! Closed-form optimal two-view triangulation from bearing vectors.
//!
//! Given a calibrated camera pair and one bearing vector per camera, the
//! measured rays rarely intersect. This crate corrects the rays in closed
//! form so that they do, minimizing the angular reprojection error under a
//! choice of three costs:
//!
//! - `theta0 + theta1` (corrects exactly one ray),
//! - `sin^2(theta0) + sin^2(theta1)` (the relaxed sum of squares),
//! - `max(theta0, theta1)` (equalizes the two angles),
//!
//! each globally optimal for its cost, plus a midpoint baseline. Angular
//! errors are rotation invariant, so any central camera model (perspective,
//! fisheye, omnidirectional) works once observations are unit bearings.
//!
//! The [`oracle`] module independently verifies optimality by brute force
//! over the one-parameter family of epipolar planes; [`cheirality`]
//! classifies depths, parallax and outliers; [`synth`] generates labeled
//! scenes; [`io`] and [`cli`] expose the file formats and the command-line
//! tool.

pub mod cheirality;
pub mod cli;
pub mod error;
pub mod geom;
pub mod io;
pub mod oracle;
pub mod stats;
pub mod svd;
pub mod synth;
pub mod triangulate;

pub use cheirality::{
    check_cheirality, classify_observation, compute_depths, CheiralityClass, CheiralityReport,
    ClassificationThresholds, ObservationClass,
};
pub use error::Error;
pub use geom::{
    angle_between_directions, closest_points, min_pivot_angle, point_plane_distance,
    project_direction_onto_plane, skew_line_distance, triple_product, Line3, Plane3, UnitVec3,
    Vec3,
};
pub use oracle::{multi_pivot_cost, sweep_epipolar_planes, SweepResult};
pub use svd::middle_right_singular_vector;
pub use synth::{generate_scene, perturb_bearing, LabeledCorrespondence, SceneSpec};
pub use triangulate::{
    correct_l1, correct_l2, correct_linf, epipolar_residual, triangulate, AngularCost,
    CorrectionBranch, CorrectionResult, Method, RelativeGeometry, TriangulationOutput,
    TriangulationStatus,
};
