//! Closed-form ray corrections under three angular costs (sum, relaxed sine
//! square sum, max), a midpoint baseline, and 3D point recovery from the
//! corrected rays.
//!
//! Each correction projects the measured ray directions onto an epipolar
//! plane (a plane containing both camera centers) chosen in closed form so
//! that the resulting angular cost is globally minimal for its criterion.

use nalgebra::{Matrix2x3, Matrix3, Rotation3};
use std::fmt;
use std::str::FromStr;

use crate::cheirality::{check_cheirality, CheiralityClass};
use crate::error::Error;
use crate::geom::{
    check_finite, closest_points, perpendicular_basis, triple_product, Line3, UnitVec3, Vec3,
    MIN_VECTOR_NORM, PARALLEL_TOL, PROJECTION_TOL,
};
use crate::svd::svd_2x3;

/// A ray is epipole-degenerate when the sine of its angle to the baseline
/// falls below this.
pub const EPIPOLE_TOL: f64 = 1e-12;

/// Corrected rays closer to parallel than this sine are reported as a point
/// at infinity rather than a position.
pub const LOW_PARALLAX_SIN: f64 = 1e-9;

/// One correspondence expressed in a common reference frame: camera centers
/// `c0`, `c1`, ray directions `m0`, `m1`, and the baseline `t = c0 - c1`.
///
/// The reference frame is camera 1's; `from_pose` performs the
/// `m0 = R * f0`, `m1 = f1` substitution for bearing vectors measured in
/// camera-local frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeGeometry {
    pub c0: Vec3,
    pub c1: Vec3,
    pub m0: Vec3,
    pub m1: Vec3,
    pub t: Vec3,
}

impl RelativeGeometry {
    pub fn new(c0: Vec3, c1: Vec3, m0: Vec3, m1: Vec3) -> Result<Self, Error> {
        for v in [&c0, &c1, &m0, &m1] {
            check_finite(v)?;
        }
        if m0.norm() < MIN_VECTOR_NORM || m1.norm() < MIN_VECTOR_NORM {
            return Err(Error::ZeroVector);
        }
        let t = c0 - c1;
        if t.norm() < MIN_VECTOR_NORM {
            return Err(Error::DegenerateBaseline);
        }
        Ok(Self { c0, c1, m0, m1, t })
    }

    /// Builds the common-frame geometry from camera-local bearings and the
    /// camera-0 to reference rotation.
    pub fn from_pose(
        rotation: &Rotation3<f64>,
        c0: Vec3,
        c1: Vec3,
        f0: &UnitVec3,
        f1: &UnitVec3,
    ) -> Result<Self, Error> {
        Self::new(c0, c1, rotation * f0.into_inner(), f1.into_inner())
    }
}

/// Which branch of a correction method produced the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionBranch {
    /// Ray 0 was projected onto ray 1's epipolar plane.
    CorrectedRay0,
    /// Ray 1 was projected onto ray 0's epipolar plane.
    CorrectedRay1,
    /// The sum plane normal `(m0_hat + m1_hat) x t` was used.
    PlaneA,
    /// The difference plane normal `(m0_hat - m1_hat) x t` was used.
    PlaneB,
    /// The plane normal came from the singular value decomposition.
    Svd,
    /// No correction was applied (midpoint baseline).
    None,
}

/// Corrected ray directions with their angular errors and the epipolar
/// plane that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionResult {
    pub m0_corr: Vec3,
    pub m1_corr: Vec3,
    /// Angle between `m0` and `m0_corr`, radians.
    pub theta0: f64,
    /// Angle between `m1` and `m1_corr`, radians.
    pub theta1: f64,
    pub branch: CorrectionBranch,
    pub plane_normal: UnitVec3,
}

/// Triangulation method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    L1Angular,
    L2Angular,
    LInfAngular,
    Midpoint,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::L1Angular,
        Method::L2Angular,
        Method::LInfAngular,
        Method::Midpoint,
    ];

    /// The angular cost this method minimizes, if any.
    pub fn angular_cost(&self) -> Option<AngularCost> {
        match self {
            Method::L1Angular => Some(AngularCost::SumAngles),
            Method::L2Angular => Some(AngularCost::SumSinSq),
            Method::LInfAngular => Some(AngularCost::MaxAngle),
            Method::Midpoint => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::L1Angular => "l1",
            Method::L2Angular => "l2",
            Method::LInfAngular => "linf",
            Method::Midpoint => "midpoint",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l1" => Ok(Method::L1Angular),
            "l2" => Ok(Method::L2Angular),
            "linf" => Ok(Method::LInfAngular),
            "midpoint" => Ok(Method::Midpoint),
            other => Err(format!(
                "unknown method `{other}` (expected l1, l2, linf or midpoint)"
            )),
        }
    }
}

/// Angular cost functionals over the two correction angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularCost {
    /// `theta0 + theta1` (radians).
    SumAngles,
    /// `sin^2(theta0) + sin^2(theta1)`.
    SumSinSq,
    /// `max(theta0, theta1)` (radians).
    MaxAngle,
}

impl AngularCost {
    pub const ALL: [AngularCost; 3] = [
        AngularCost::SumAngles,
        AngularCost::SumSinSq,
        AngularCost::MaxAngle,
    ];

    pub fn eval(&self, theta0: f64, theta1: f64) -> f64 {
        match self {
            AngularCost::SumAngles => theta0 + theta1,
            AngularCost::SumSinSq => theta0.sin().powi(2) + theta1.sin().powi(2),
            AngularCost::MaxAngle => theta0.max(theta1),
        }
    }
}

impl fmt::Display for AngularCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AngularCost::SumAngles => "sum",
            AngularCost::SumSinSq => "sinsq",
            AngularCost::MaxAngle => "max",
        };
        f.write_str(s)
    }
}

/// Outcome classification of a triangulation call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangulationStatus {
    Ok,
    CheiralityViolation,
    /// The corrected rays are nearly parallel; `point` holds the unit
    /// direction toward the point at infinity, not a position.
    LowParallax,
    /// The ray directions are parallel within tolerance; no finite
    /// intersection exists.
    ParallelRays,
}

impl fmt::Display for TriangulationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TriangulationStatus::Ok => "Ok",
            TriangulationStatus::CheiralityViolation => "CheiralityViolation",
            TriangulationStatus::LowParallax => "LowParallax",
            TriangulationStatus::ParallelRays => "ParallelRays",
        };
        f.write_str(s)
    }
}

impl FromStr for TriangulationStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Ok" => Ok(TriangulationStatus::Ok),
            "CheiralityViolation" => Ok(TriangulationStatus::CheiralityViolation),
            "LowParallax" => Ok(TriangulationStatus::LowParallax),
            "ParallelRays" => Ok(TriangulationStatus::ParallelRays),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// Result of triangulating one correspondence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulationOutput {
    /// The triangulated point, or a unit direction when `status` is
    /// `LowParallax` or `ParallelRays`.
    pub point: Vec3,
    /// Signed depth along the unit corrected ray of camera 0.
    pub lambda0: f64,
    /// Signed depth along the unit corrected ray of camera 1.
    pub lambda1: f64,
    pub correction: CorrectionResult,
    pub method: Method,
    pub status: TriangulationStatus,
}

fn epipole_sines(g: &RelativeGeometry) -> (Vec3, Vec3, f64, f64) {
    let n0 = g.m0.cross(&g.t);
    let n1 = g.m1.cross(&g.t);
    let tn = g.t.norm();
    let sin0 = n0.norm() / (g.m0.norm() * tn);
    let sin1 = n1.norm() / (g.m1.norm() * tn);
    (n0, n1, sin0, sin1)
}

fn project_onto(m: &Vec3, normal: &UnitVec3) -> Result<Vec3, Error> {
    let p = m - normal.as_ref() * m.dot(normal);
    if p.norm() < PROJECTION_TOL * m.norm() {
        return Err(Error::DegenerateProjection);
    }
    Ok(p)
}

fn pivot_angle(m: &Vec3, normal: &UnitVec3) -> f64 {
    (m.dot(normal) / m.norm()).abs().min(1.0).asin()
}

/// Minimizes `theta0 + theta1` subject to the epipolar constraint.
///
/// Exactly one ray is corrected: the one making the smaller angle with the
/// baseline is projected onto the other ray's epipolar plane (ties correct
/// ray 0). The untouched direction is returned bit-for-bit.
pub fn correct_l1(g: &RelativeGeometry) -> Result<CorrectionResult, Error> {
    let (n0, n1, sin0, sin1) = epipole_sines(g);
    if sin0 < EPIPOLE_TOL || sin1 < EPIPOLE_TOL {
        return Err(Error::EpipoleDegenerate);
    }
    if sin0 <= sin1 {
        let normal = UnitVec3::normalize(n1)?;
        Ok(CorrectionResult {
            m0_corr: project_onto(&g.m0, &normal)?,
            m1_corr: g.m1,
            theta0: pivot_angle(&g.m0, &normal),
            theta1: 0.0,
            branch: CorrectionBranch::CorrectedRay0,
            plane_normal: normal,
        })
    } else {
        let normal = UnitVec3::normalize(n0)?;
        Ok(CorrectionResult {
            m0_corr: g.m0,
            m1_corr: project_onto(&g.m1, &normal)?,
            theta0: 0.0,
            theta1: pivot_angle(&g.m1, &normal),
            branch: CorrectionBranch::CorrectedRay1,
            plane_normal: normal,
        })
    }
}

/// Minimizes the relaxed cost `sin^2(theta0) + sin^2(theta1)` subject to
/// the epipolar constraint.
///
/// The optimal plane normal is the right singular vector of
/// `[m0_hat m1_hat]^T (I - t_hat t_hat^T)` associated with the second
/// largest singular value. When the two largest singular values tie the
/// plane is not unique; the candidate with the smaller realized cost wins
/// (first candidate on an exact tie).
pub fn correct_l2(g: &RelativeGeometry) -> Result<CorrectionResult, Error> {
    let m0h = g.m0 / g.m0.norm();
    let m1h = g.m1 / g.m1.norm();
    let th = UnitVec3::normalize(g.t)?;
    let proj = Matrix3::identity() - th.into_inner() * th.transpose();
    let m = Matrix2x3::from_rows(&[(proj * m0h).transpose(), (proj * m1h).transpose()]);
    let svd = svd_2x3(&m);

    let normal = if svd.sigma[0] < EPIPOLE_TOL {
        // Both rays parallel to the baseline: every epipolar plane leaves
        // them untouched; pick a deterministic one.
        perpendicular_basis(&th).0
    } else {
        let v1 = UnitVec3::normalize(svd.v[0])?;
        let v2 = UnitVec3::normalize(th.cross(&v1))?;
        if svd.sigma[0] - svd.sigma[1] <= crate::svd::SPECTRUM_TOL {
            let cost = |n: &UnitVec3| m0h.dot(n).powi(2) + m1h.dot(n).powi(2);
            if cost(&v1) <= cost(&v2) {
                v1
            } else {
                v2
            }
        } else {
            v2
        }
    }
    .canonical_sign();

    Ok(CorrectionResult {
        m0_corr: project_onto(&g.m0, &normal)?,
        m1_corr: project_onto(&g.m1, &normal)?,
        theta0: pivot_angle(&g.m0, &normal),
        theta1: pivot_angle(&g.m1, &normal),
        branch: CorrectionBranch::Svd,
        plane_normal: normal,
    })
}

/// Minimizes `max(theta0, theta1)` subject to the epipolar constraint; the
/// minimum is attained with the two angles equal.
///
/// The plane normal is the larger of `(m0_hat + m1_hat) x t` and
/// `(m0_hat - m1_hat) x t`; both rays are projected onto that plane.
pub fn correct_linf(g: &RelativeGeometry) -> Result<CorrectionResult, Error> {
    let m0h = g.m0 / g.m0.norm();
    let m1h = g.m1 / g.m1.norm();
    let na = (m0h + m1h).cross(&g.t);
    let nb = (m0h - m1h).cross(&g.t);
    let (n, branch) = if na.norm() >= nb.norm() {
        (na, CorrectionBranch::PlaneA)
    } else {
        (nb, CorrectionBranch::PlaneB)
    };
    if n.norm() < EPIPOLE_TOL * g.t.norm() {
        return Err(Error::BothNormalsDegenerate);
    }
    let normal = UnitVec3::normalize(n)?;
    // Both rays make the same angle with either candidate plane; computing
    // it once from the shared triple product keeps the equality exact.
    let theta = (triple_product(&m0h, &m1h, &g.t) / n.norm())
        .abs()
        .min(1.0)
        .asin();
    Ok(CorrectionResult {
        m0_corr: project_onto(&g.m0, &normal)?,
        m1_corr: project_onto(&g.m1, &normal)?,
        theta0: theta,
        theta1: theta,
        branch,
        plane_normal: normal,
    })
}

fn midpoint_correction(g: &RelativeGeometry) -> CorrectionResult {
    let n0 = g.m0.cross(&g.t);
    let plane_normal = if n0.norm() >= EPIPOLE_TOL * g.m0.norm() * g.t.norm() {
        UnitVec3::new_unchecked(n0.normalize())
    } else {
        perpendicular_basis(&UnitVec3::new_unchecked(g.t.normalize())).0
    };
    CorrectionResult {
        m0_corr: g.m0,
        m1_corr: g.m1,
        theta0: 0.0,
        theta1: 0.0,
        branch: CorrectionBranch::None,
        plane_normal,
    }
}

/// Coplanarity residual of the two rays and the baseline,
/// `|m1_hat . (t_hat x m0_hat)|`; zero iff the rays and baseline are
/// coplanar (the epipolar constraint).
pub fn epipolar_residual(m0: &Vec3, m1: &Vec3, t: &Vec3) -> Result<f64, Error> {
    let m0h = UnitVec3::normalize(*m0)?;
    let m1h = UnitVec3::normalize(*m1)?;
    let th = UnitVec3::normalize(*t)?;
    Ok(m1h.dot(&th.cross(&m0h)).abs())
}

fn infinity_direction(d0: &Vec3, d1: &Vec3) -> Vec3 {
    let s = d0 + d1;
    if s.norm() >= 1.0 {
        s.normalize()
    } else {
        (d0 - d1).normalize()
    }
}

/// Runs the selected correction and recovers the 3D point and signed depths
/// from the corrected rays (raw rays for the midpoint baseline).
///
/// Parallel and near-parallel ray pairs are reported through `status`, not
/// as call failures; hard degeneracies of the correction itself (epipole,
/// vanishing projections) surface as errors.
pub fn triangulate(g: &RelativeGeometry, method: Method) -> Result<TriangulationOutput, Error> {
    let correction = match method {
        Method::L1Angular => correct_l1(g)?,
        Method::L2Angular => correct_l2(g)?,
        Method::LInfAngular => correct_linf(g)?,
        Method::Midpoint => midpoint_correction(g),
    };
    let d0 = correction.m0_corr.normalize();
    let d1 = correction.m1_corr.normalize();
    let sin_rays = d0.cross(&d1).norm();

    if sin_rays < PARALLEL_TOL {
        return Ok(TriangulationOutput {
            point: infinity_direction(&d0, &d1),
            lambda0: f64::INFINITY,
            lambda1: f64::INFINITY,
            correction,
            method,
            status: TriangulationStatus::ParallelRays,
        });
    }

    let l0 = Line3::new(g.c0, d0)?;
    let l1 = Line3::new(g.c1, d1)?;
    let cp = closest_points(&l0, &l1)?;

    if sin_rays < LOW_PARALLAX_SIN {
        return Ok(TriangulationOutput {
            point: infinity_direction(&d0, &d1),
            lambda0: f64::INFINITY.copysign(cp.s0),
            lambda1: f64::INFINITY.copysign(cp.s1),
            correction,
            method,
            status: TriangulationStatus::LowParallax,
        });
    }

    let status = match check_cheirality(cp.s0, cp.s1) {
        CheiralityClass::BothPositive => TriangulationStatus::Ok,
        CheiralityClass::AtInfinity => TriangulationStatus::LowParallax,
        _ => TriangulationStatus::CheiralityViolation,
    };
    Ok(TriangulationOutput {
        point: 0.5 * (cp.r0 + cp.r1),
        lambda0: cp.s0,
        lambda1: cp.s1,
        correction,
        method,
        status,
    })
}
