//! Post-triangulation validity: signed depths, cheirality classification,
//! low-parallax and outlier labeling, and an optional method-retry policy.

use crate::error::Error;
use crate::geom::{angle_between_directions, closest_points, Line3};
use crate::triangulate::{
    triangulate, CorrectionResult, Method, RelativeGeometry, TriangulationOutput,
    TriangulationStatus,
};

/// Sign pattern of the depths of a triangulated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheiralityClass {
    BothPositive,
    Ray0Negative,
    Ray1Negative,
    BothNegative,
    /// Non-finite depths: the rays meet at infinity (low parallax upstream).
    AtInfinity,
}

/// Observation label combining cost, cheirality and parallax checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationClass {
    Inlier,
    LowParallax,
    Outlier,
    CheiralityFail,
}

impl std::fmt::Display for ObservationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ObservationClass::Inlier => "Inlier",
            ObservationClass::LowParallax => "LowParallax",
            ObservationClass::Outlier => "Outlier",
            ObservationClass::CheiralityFail => "CheiralityFail",
        };
        f.write_str(s)
    }
}

/// Depths, classification and parallax of one triangulated correspondence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheiralityReport {
    pub lambda0: f64,
    pub lambda1: f64,
    pub klass: CheiralityClass,
    /// Angle between the two measured rays, in `[0, pi/2]`.
    pub parallax_angle: f64,
    /// Whether the achieved angular cost exceeded the outlier threshold.
    pub is_outlier: bool,
}

/// Angle thresholds for observation classification, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationThresholds {
    /// Total angular correction above this marks an outlier.
    pub outlier_cost: f64,
    /// Raw ray parallax below this marks a low-parallax observation.
    pub min_parallax: f64,
}

impl ClassificationThresholds {
    pub fn new(outlier_cost: f64, min_parallax: f64) -> Result<Self, Error> {
        if !(outlier_cost > 0.0 && outlier_cost.is_finite()) {
            return Err(Error::InvalidSpec(
                "outlier threshold must be a positive angle".into(),
            ));
        }
        if !(min_parallax > 0.0 && min_parallax.is_finite()) {
            return Err(Error::InvalidSpec(
                "parallax threshold must be a positive angle".into(),
            ));
        }
        Ok(Self {
            outlier_cost,
            min_parallax,
        })
    }
}

impl Default for ClassificationThresholds {
    /// 2 degrees of total angular error, 0.5 degrees of parallax.
    fn default() -> Self {
        Self {
            outlier_cost: 2.0f64.to_radians(),
            min_parallax: 0.5f64.to_radians(),
        }
    }
}

/// Signed depths `lambda_i` such that `c_i + lambda_i * m_i_corr_hat` is the
/// intersection point of the corrected rays.
pub fn compute_depths(g: &RelativeGeometry, corr: &CorrectionResult) -> Result<(f64, f64), Error> {
    let d0 = corr.m0_corr.normalize();
    let d1 = corr.m1_corr.normalize();
    if d0.cross(&d1).norm() < crate::geom::PARALLEL_TOL {
        return Err(Error::ParallelRays);
    }
    let cp = closest_points(&Line3::new(g.c0, d0)?, &Line3::new(g.c1, d1)?)?;
    Ok((cp.s0, cp.s1))
}

/// Classifies the sign pattern of two signed depths.
pub fn check_cheirality(lambda0: f64, lambda1: f64) -> CheiralityClass {
    if !(lambda0.is_finite() && lambda1.is_finite()) {
        return CheiralityClass::AtInfinity;
    }
    match (lambda0 > 0.0, lambda1 > 0.0) {
        (true, true) => CheiralityClass::BothPositive,
        (false, true) => CheiralityClass::Ray0Negative,
        (true, false) => CheiralityClass::Ray1Negative,
        (false, false) => CheiralityClass::BothNegative,
    }
}

/// Builds a full report for one corrected correspondence.
pub fn assess(
    g: &RelativeGeometry,
    corr: &CorrectionResult,
    thresholds: &ClassificationThresholds,
) -> Result<CheiralityReport, Error> {
    let (lambda0, lambda1) = match compute_depths(g, corr) {
        Ok(d) => d,
        Err(Error::ParallelRays) => (f64::INFINITY, f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(CheiralityReport {
        lambda0,
        lambda1,
        klass: check_cheirality(lambda0, lambda1),
        parallax_angle: angle_between_directions(&g.m0, &g.m1)?,
        is_outlier: corr.theta0 + corr.theta1 > thresholds.outlier_cost,
    })
}

/// Labels one observation. Priority when several conditions hold:
/// Outlier > CheiralityFail > LowParallax > Inlier.
pub fn classify_observation(
    _g: &RelativeGeometry,
    corr: &CorrectionResult,
    report: &CheiralityReport,
    thresholds: &ClassificationThresholds,
) -> ObservationClass {
    if corr.theta0 + corr.theta1 > thresholds.outlier_cost {
        return ObservationClass::Outlier;
    }
    match report.klass {
        CheiralityClass::Ray0Negative
        | CheiralityClass::Ray1Negative
        | CheiralityClass::BothNegative => ObservationClass::CheiralityFail,
        CheiralityClass::AtInfinity => ObservationClass::LowParallax,
        CheiralityClass::BothPositive => {
            if report.parallax_angle < thresholds.min_parallax {
                ObservationClass::LowParallax
            } else {
                ObservationClass::Inlier
            }
        }
    }
}

/// Method order used when retrying after a cheirality violation.
pub const RETRY_ORDER: [Method; 3] = [Method::L1Angular, Method::LInfAngular, Method::L2Angular];

/// Triangulates with `primary`; on a cheirality violation retries the other
/// methods in `RETRY_ORDER` and returns the first result with positive
/// depths, together with the method that produced it. Falls back to the
/// primary result when every retry also violates cheirality.
pub fn triangulate_with_retry(
    g: &RelativeGeometry,
    primary: Method,
) -> Result<(TriangulationOutput, Method), Error> {
    let first = triangulate(g, primary)?;
    if first.status != TriangulationStatus::CheiralityViolation {
        return Ok((first, primary));
    }
    for method in RETRY_ORDER {
        if method == primary {
            continue;
        }
        if let Ok(out) = triangulate(g, method) {
            if out.status == TriangulationStatus::Ok {
                return Ok((out, method));
            }
        }
    }
    Ok((first, primary))
}
