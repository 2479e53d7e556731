//! Independent brute-force verification of the closed-form corrections.
//!
//! Every epipolar plane contains the baseline, so the feasible corrections
//! sweep a one-parameter family of plane normals perpendicular to it. For a
//! fixed plane the optimal per-ray correction is the projection onto that
//! plane, with `sin(theta_i) = |m_i_hat . n_hat|`; sampling the family and
//! refining around the best cell therefore bounds the global minimum of any
//! of the angular costs without going through the closed-form path.

use crate::error::Error;
use crate::geom::{
    angle_between_directions, perpendicular_basis, skew_line_distance, Line3, UnitVec3, Vec3,
    MIN_VECTOR_NORM,
};
use crate::triangulate::{AngularCost, RelativeGeometry};

/// Default number of plane samples over `[0, pi)`.
pub const DEFAULT_GRID_N: usize = 4096;

/// Golden-section refinement stops at this bracket width (radians).
pub const REFINE_TOL: f64 = 1e-10;

/// Maximum golden-section iterations.
pub const REFINE_DEPTH: usize = 60;

/// A pivot chain must end within this fraction of the baseline length from
/// the target line to count as intersecting.
pub const CHAIN_INTERSECT_TOL: f64 = 1e-9;

/// Minimizer found by the epipolar-plane sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Plane angle in `[0, pi)` within the perpendicular basis of `t`.
    pub best_alpha: f64,
    pub best_cost: f64,
    pub best_normal: UnitVec3,
    pub m0_corr: Vec3,
    pub m1_corr: Vec3,
    pub grid_n: usize,
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..REFINE_DEPTH {
        if (b - a).abs() < REFINE_TOL {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Sweeps the family of epipolar-plane normals `n(alpha) = cos(alpha) e1 +
/// sin(alpha) e2` over a uniform grid on `[0, pi)`, evaluates the cost of
/// projecting both rays onto each plane, and refines around the best cell
/// by golden section.
///
/// Requires `grid_n >= 16`.
pub fn sweep_epipolar_planes(
    g: &RelativeGeometry,
    cost: AngularCost,
    grid_n: usize,
) -> Result<SweepResult, Error> {
    assert!(grid_n >= 16, "grid_n must be at least 16");
    if g.t.norm() < MIN_VECTOR_NORM {
        return Err(Error::DegenerateBaseline);
    }
    let th = UnitVec3::normalize(g.t)?;
    let (e1, e2) = perpendicular_basis(&th);
    let m0h = g.m0 / g.m0.norm();
    let m1h = g.m1 / g.m1.norm();

    let eval = |alpha: f64| {
        let (s, c) = alpha.sin_cos();
        let n = c * e1.into_inner() + s * e2.into_inner();
        let theta0 = m0h.dot(&n).abs().min(1.0).asin();
        let theta1 = m1h.dot(&n).abs().min(1.0).asin();
        cost.eval(theta0, theta1)
    };

    let step = std::f64::consts::PI / grid_n as f64;
    let mut best_k = 0;
    let mut best_cost = f64::INFINITY;
    for k in 0..grid_n {
        let c = eval(k as f64 * step);
        if c < best_cost {
            best_cost = c;
            best_k = k;
        }
    }
    let center = best_k as f64 * step;
    let (mut alpha, refined) = golden_section(&eval, center - step, center + step);
    let mut cost_at_min = refined;
    if best_cost < cost_at_min {
        alpha = center;
        cost_at_min = best_cost;
    }

    let (s, c) = alpha.sin_cos();
    let normal = UnitVec3::new_unchecked(c * e1.into_inner() + s * e2.into_inner());
    let project = |m: &Vec3| m - normal.as_ref() * m.dot(&normal);
    Ok(SweepResult {
        best_alpha: alpha.rem_euclid(std::f64::consts::PI),
        best_cost: cost_at_min,
        best_normal: normal,
        m0_corr: project(&g.m0),
        m1_corr: project(&g.m1),
        grid_n,
    })
}

/// Sum of consecutive pivot angles along a direction chain from `l0.dir`
/// through `intermediates`, requiring the final direction's line from
/// `l0.origin` to intersect `l1`.
///
/// Any such chain costs at least the single minimum pivot angle.
pub fn multi_pivot_cost(l0: &Line3, l1: &Line3, intermediates: &[Vec3]) -> Result<f64, Error> {
    let last = intermediates.last().unwrap_or(&l0.dir);
    let final_line = Line3::new(l0.origin, *last)?;
    let scale = (l0.origin - l1.origin).norm().max(1.0);
    match skew_line_distance(&final_line, l1) {
        Ok(d) if d <= CHAIN_INTERSECT_TOL * scale => {}
        Ok(_) => return Err(Error::ChainNotIntersecting),
        Err(Error::ParallelLines) => {
            // Parallel final leg: intersects only if collinear with l1.
            let m1h = l1.dir / l1.dir.norm();
            let offset = l0.origin - l1.origin;
            let gap = (offset - offset.dot(&m1h) * m1h).norm();
            if gap > CHAIN_INTERSECT_TOL * scale {
                return Err(Error::ChainNotIntersecting);
            }
        }
        Err(e) => return Err(e),
    }
    let mut total = 0.0;
    let mut prev = &l0.dir;
    for dir in intermediates {
        total += angle_between_directions(prev, dir)?;
        prev = dir;
    }
    Ok(total)
}
