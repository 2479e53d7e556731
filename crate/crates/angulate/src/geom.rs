//! Foundational 3D geometry: vectors, lines, planes, distances, projections,
//! and the minimum pivot angle that the correction methods are built on.

use nalgebra::Vector3;

use crate::error::Error;

/// 3D vector with finite double-precision components.
pub type Vec3 = Vector3<f64>;

/// Lines are treated as parallel when the cross product of their unit
/// directions falls below this; the cross product is unreliable past it.
pub const PARALLEL_TOL: f64 = 1e-12;

/// A projected direction shorter than this fraction of its input is
/// considered degenerate (asin conditioning near pi/2).
pub const PROJECTION_TOL: f64 = 1e-9;

/// Unit-norm check at `UnitVec3` construction: |x^2 + y^2 + z^2 - 1|.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Norms below this are treated as numerically zero.
pub const MIN_VECTOR_NORM: f64 = 1e-150;

/// Unit-norm 3D direction (bearing vector or plane normal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Wraps `v`, requiring `|v.norm_squared() - 1| <= UNIT_NORM_TOL`.
    pub fn new(v: Vec3) -> Result<Self, Error> {
        check_finite(&v)?;
        if (v.norm_squared() - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitLength);
        }
        Ok(Self(v))
    }

    /// Normalizes an arbitrary nonzero vector into a unit direction.
    pub fn normalize(v: Vec3) -> Result<Self, Error> {
        check_finite(&v)?;
        let n = v.norm();
        if n < MIN_VECTOR_NORM {
            return Err(Error::ZeroVector);
        }
        Ok(Self(v / n))
    }

    /// Wraps a vector that is unit by construction.
    pub(crate) fn new_unchecked(v: Vec3) -> Self {
        debug_assert!((v.norm_squared() - 1.0).abs() <= 1e-9);
        Self(v)
    }

    pub fn into_inner(self) -> Vec3 {
        self.0
    }

    /// Flips the sign so that the first nonzero component is positive.
    pub fn canonical_sign(self) -> Self {
        for c in self.0.iter() {
            if *c != 0.0 {
                return if *c < 0.0 { Self(-self.0) } else { self };
            }
        }
        self
    }
}

impl std::ops::Deref for UnitVec3 {
    type Target = Vec3;

    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl AsRef<Vec3> for UnitVec3 {
    fn as_ref(&self) -> &Vec3 {
        &self.0
    }
}

impl std::ops::Neg for UnitVec3 {
    type Output = UnitVec3;

    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

/// A 3D line `L(s) = origin + s * dir`; the direction need not be unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3 {
    pub origin: Vec3,
    pub dir: Vec3,
}

impl Line3 {
    pub fn new(origin: Vec3, dir: Vec3) -> Result<Self, Error> {
        check_finite(&origin)?;
        check_finite(&dir)?;
        if dir.norm() < MIN_VECTOR_NORM {
            return Err(Error::ZeroVector);
        }
        Ok(Self { origin, dir })
    }

    pub fn point_at(&self, s: f64) -> Vec3 {
        self.origin + s * self.dir
    }
}

/// A plane through `point` with unit normal `normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane3 {
    pub point: Vec3,
    pub normal: UnitVec3,
}

impl Plane3 {
    pub fn new(point: Vec3, normal: UnitVec3) -> Result<Self, Error> {
        check_finite(&point)?;
        Ok(Self { point, normal })
    }
}

/// Closest pair of points between two lines, with their line parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoints {
    pub r0: Vec3,
    pub r1: Vec3,
    pub s0: f64,
    pub s1: f64,
}

/// Result of pivoting one line about its origin to intersect another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotResult {
    /// Minimum pivot angle in `[0, pi/2]`, radians.
    pub angle: f64,
    /// Direction of the pivoted line (in general not unit length).
    pub pivoted_dir: Vec3,
}

pub(crate) fn check_finite(v: &Vec3) -> Result<(), Error> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Scalar triple product `a . (b x c)`, invariant under cyclic permutation.
pub fn triple_product(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    a.dot(&b.cross(c))
}

/// Distance from a point to a plane, `|n . (p - c)|`.
pub fn point_plane_distance(p: &Vec3, plane: &Plane3) -> f64 {
    plane.normal.dot(&(p - plane.point)).abs()
}

fn cross_with_parallel_check(l0: &Line3, l1: &Line3) -> Result<Vec3, Error> {
    let q = l0.dir.cross(&l1.dir);
    if q.norm() < PARALLEL_TOL * l0.dir.norm() * l1.dir.norm() {
        return Err(Error::ParallelLines);
    }
    Ok(q)
}

/// Minimum distance between two non-parallel lines, `|t . q_hat|` with
/// `t = c0 - c1` and `q = m0 x m1`.
pub fn skew_line_distance(l0: &Line3, l1: &Line3) -> Result<f64, Error> {
    let q = cross_with_parallel_check(l0, l1)?;
    let t = l0.origin - l1.origin;
    Ok((t.dot(&q) / q.norm()).abs())
}

/// The closest pair of points between two non-parallel lines.
///
/// The segment `r0 -> r1` is perpendicular to both directions; for
/// intersecting lines the two points coincide at the intersection.
pub fn closest_points(l0: &Line3, l1: &Line3) -> Result<ClosestPoints, Error> {
    let q = cross_with_parallel_check(l0, l1)?;
    let t = l0.origin - l1.origin;
    let qq = q.norm_squared();
    let s0 = q.dot(&l1.dir.cross(&t)) / qq;
    let s1 = q.dot(&l0.dir.cross(&t)) / qq;
    Ok(ClosestPoints {
        r0: l0.point_at(s0),
        r1: l1.point_at(s1),
        s0,
        s1,
    })
}

/// Removes the component of `m` along `normal`, leaving the projection of
/// `m` onto the plane with that normal.
pub fn project_direction_onto_plane(m: &Vec3, normal: &UnitVec3) -> Result<Vec3, Error> {
    check_finite(m)?;
    let p = m - normal.as_ref() * m.dot(normal);
    if p.norm() < PROJECTION_TOL * m.norm() {
        return Err(Error::DegenerateProjection);
    }
    Ok(p)
}

/// Smallest angle by which `l0` must pivot about its origin to intersect
/// `l1`, together with the pivoted direction.
///
/// The pivoted direction is the projection of `l0.dir` onto the plane
/// containing `l0.origin` and `l1`; `sin(angle) = |n1_hat . m0_hat|` with
/// `n1 = m1 x (c0 - c1)`. When `l0.dir` is parallel to that plane normal
/// every in-plane direction is optimal; the angle is then `pi/2` and the
/// direction from `l0.origin` toward the closest point of `l1` is returned.
pub fn min_pivot_angle(l0: &Line3, l1: &Line3) -> Result<PivotResult, Error> {
    let t = l0.origin - l1.origin;
    let n1 = l1.dir.cross(&t);
    if n1.norm() < PARALLEL_TOL * l1.dir.norm() * t.norm() || n1.norm() < MIN_VECTOR_NORM {
        // l0.origin lies on l1 (or t vanishes): the plane is undefined.
        return Err(Error::EpipoleDegenerate);
    }
    let n1_hat = UnitVec3::normalize(n1)?;
    let sin_theta = (l0.dir.dot(&n1_hat) / l0.dir.norm()).abs().min(1.0);
    match project_direction_onto_plane(&l0.dir, &n1_hat) {
        Ok(p) => Ok(PivotResult {
            angle: sin_theta.asin(),
            pivoted_dir: p,
        }),
        Err(Error::DegenerateProjection) => {
            // Deterministic tie-break among the equally optimal in-plane
            // directions: aim at the closest point of l1.
            let m1_hat = l1.dir / l1.dir.norm();
            let toward = -t + t.dot(&m1_hat) * m1_hat;
            Ok(PivotResult {
                angle: std::f64::consts::FRAC_PI_2,
                pivoted_dir: toward,
            })
        }
        Err(e) => Err(e),
    }
}

/// Angle between two lines (sign of either direction ignored), in
/// `[0, pi/2]`. Uses `atan2(|a x b|, |a . b|)` for stability near 0 and
/// pi/2.
pub fn angle_between_directions(a: &Vec3, b: &Vec3) -> Result<f64, Error> {
    check_finite(a)?;
    check_finite(b)?;
    if a.norm() < MIN_VECTOR_NORM || b.norm() < MIN_VECTOR_NORM {
        return Err(Error::ZeroVector);
    }
    Ok(a.cross(b).norm().atan2(a.dot(b).abs()))
}

/// Deterministic orthonormal pair spanning the plane perpendicular to `v`.
///
/// The first axis is the normalized rejection from `v` of the canonical
/// axis with the smallest `|v|` component; the second is `v x e1`.
pub fn perpendicular_basis(v: &UnitVec3) -> (UnitVec3, UnitVec3) {
    let abs = [v.x.abs(), v.y.abs(), v.z.abs()];
    let k = if abs[0] <= abs[1] && abs[0] <= abs[2] {
        0
    } else if abs[1] <= abs[2] {
        1
    } else {
        2
    };
    let mut axis = Vec3::zeros();
    axis[k] = 1.0;
    let e1 = (axis - v.as_ref() * v[k]).normalize();
    let e2 = v.cross(&e1);
    (UnitVec3::new_unchecked(e1), UnitVec3::new_unchecked(e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Rotation3, Unit};
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn rng_vec(rng: &mut StdRng) -> Vec3 {
        v(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    fn random_rotation(rng: &mut StdRng) -> Rotation3<f64> {
        let axis = Unit::new_normalize(v(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ));
        Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..std::f64::consts::TAU))
    }

    #[test]
    fn unit_vec_construction() {
        assert!(UnitVec3::new(v(1.0, 0.0, 0.0)).is_ok());
        assert_eq!(UnitVec3::new(v(1.0, 1.0, 0.0)), Err(Error::NotUnitLength));
        assert_eq!(UnitVec3::new(v(f64::NAN, 0.0, 0.0)), Err(Error::NonFinite));
        assert_eq!(UnitVec3::normalize(Vec3::zeros()), Err(Error::ZeroVector));
        let u = UnitVec3::normalize(v(3.0, 4.0, 0.0)).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_sign_flips_leading_negative() {
        let u = UnitVec3::new(v(0.0, -1.0, 0.0)).unwrap().canonical_sign();
        assert_eq!(u.into_inner(), v(0.0, 1.0, 0.0));
        let w = UnitVec3::new(v(0.0, 1.0, 0.0)).unwrap().canonical_sign();
        assert_eq!(w.into_inner(), v(0.0, 1.0, 0.0));
    }

    #[test]
    fn triple_product_basis_and_degenerate() {
        let (e1, e2, e3) = (v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0), v(0.0, 0.0, 1.0));
        assert_eq!(triple_product(&e1, &e2, &e3), 1.0);
        let a = v(0.3, -1.2, 2.0);
        let c = v(1.0, 4.0, -0.5);
        assert_eq!(triple_product(&a, &a, &c), 0.0);
    }

    #[test]
    fn triple_product_matches_determinant_oracle() {
        // Independent oracle: determinant expansion of the matrix with rows
        // a, b, c.
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let (a, b, c) = (rng_vec(&mut rng), rng_vec(&mut rng), rng_vec(&mut rng));
            let det =
                Matrix3::from_rows(&[a.transpose(), b.transpose(), c.transpose()]).determinant();
            let tp = triple_product(&a, &b, &c);
            assert!((tp - det).abs() <= 1e-12 * det.abs().max(1.0));
        }
    }

    #[test]
    fn point_plane_distance_cases() {
        let z0 = Plane3::new(Vec3::zeros(), UnitVec3::new(v(0.0, 0.0, 1.0)).unwrap()).unwrap();
        assert_eq!(point_plane_distance(&v(3.0, -2.0, 0.0), &z0), 0.0);
        assert_eq!(point_plane_distance(&v(0.0, 0.0, 5.0), &z0), 5.0);
    }

    #[test]
    fn point_plane_distance_matches_grid_oracle() {
        // Oracle: minimize |p - x| over a dense grid of plane points.
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..10 {
            let normal = UnitVec3::normalize(rng_vec(&mut rng)).unwrap();
            let plane = Plane3::new(rng_vec(&mut rng), normal).unwrap();
            let p = rng_vec(&mut rng);
            let (e1, e2) = perpendicular_basis(&plane.normal);
            let mut best = f64::INFINITY;
            let n = 400;
            for i in 0..=n {
                for j in 0..=n {
                    let a = -4.0 + 8.0 * i as f64 / n as f64;
                    let b = -4.0 + 8.0 * j as f64 / n as f64;
                    let x = plane.point + a * e1.into_inner() + b * e2.into_inner();
                    best = best.min((p - x).norm());
                }
            }
            let d = point_plane_distance(&p, &plane);
            // Grid resolution limits the oracle; 8/400 spacing => ~2e-2 slack.
            assert!((best - d).abs() < 3e-2, "grid {best} vs closed form {d}");
            assert!(d <= best + 1e-12);
        }
    }

    #[test]
    fn skew_distance_perpendicular_pair() {
        let l0 = Line3::new(Vec3::zeros(), v(1.0, 0.0, 0.0)).unwrap();
        let l1 = Line3::new(v(0.0, 1.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        assert!((skew_line_distance(&l0, &l1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn skew_distance_intersecting_is_zero() {
        let p = v(1.0, 2.0, 3.0);
        let l0 = Line3::new(p - v(1.0, 0.0, 0.0), v(1.0, 0.0, 0.0)).unwrap();
        let l1 = Line3::new(p - v(0.0, 2.0, 2.0), v(0.0, 1.0, 1.0)).unwrap();
        assert!(skew_line_distance(&l0, &l1).unwrap() < 1e-12);
    }

    #[test]
    fn parallel_lines_rejected() {
        let l0 = Line3::new(Vec3::zeros(), v(1.0, 1.0, 0.0)).unwrap();
        let l1 = Line3::new(v(0.0, 0.0, 1.0), v(-2.0, -2.0, 0.0)).unwrap();
        assert_eq!(skew_line_distance(&l0, &l1), Err(Error::ParallelLines));
        assert!(closest_points(&l0, &l1).is_err());
    }

    #[test]
    fn closest_points_perpendicular_pair() {
        let l0 = Line3::new(Vec3::zeros(), v(1.0, 0.0, 0.0)).unwrap();
        let l1 = Line3::new(v(0.0, 1.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        let cp = closest_points(&l0, &l1).unwrap();
        assert!((cp.r0 - Vec3::zeros()).norm() < 1e-15);
        assert!((cp.r1 - v(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn closest_points_intersecting_lines_coincide() {
        let p = v(-0.5, 2.0, 1.5);
        let l0 = Line3::new(p - 2.0 * v(1.0, 0.5, 0.0), v(1.0, 0.5, 0.0)).unwrap();
        let l1 = Line3::new(p + 3.0 * v(0.0, 1.0, -1.0), v(0.0, 1.0, -1.0)).unwrap();
        let cp = closest_points(&l0, &l1).unwrap();
        assert!((cp.r0 - p).norm() < 1e-12);
        assert!((cp.r1 - p).norm() < 1e-12);
    }

    #[test]
    fn closest_points_match_2d_grid_oracle() {
        // Oracle: coarse 2D grid over (s0, s1) with two refinement passes.
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..20 {
            let l0 = Line3::new(rng_vec(&mut rng), rng_vec(&mut rng));
            let l1 = Line3::new(rng_vec(&mut rng), rng_vec(&mut rng));
            let (Ok(l0), Ok(l1)) = (l0, l1) else { continue };
            if l0.dir.cross(&l1.dir).norm() < 1e-3 {
                continue;
            }
            let (mut c0, mut c1, mut half) = (0.0f64, 0.0f64, 40.0f64);
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for _pass in 0..8 {
                let n = 60;
                for i in 0..=n {
                    for j in 0..=n {
                        let s0 = c0 - half + 2.0 * half * i as f64 / n as f64;
                        let s1 = c1 - half + 2.0 * half * j as f64 / n as f64;
                        let d = (l0.point_at(s0) - l1.point_at(s1)).norm();
                        if d < best.0 {
                            best = (d, s0, s1);
                        }
                    }
                }
                c0 = best.1;
                c1 = best.2;
                half *= 2.5 / n as f64 * 2.0;
            }
            let cp = closest_points(&l0, &l1).unwrap();
            let dist = skew_line_distance(&l0, &l1).unwrap();
            assert!((best.0 - dist).abs() < 1e-6 * (1.0 + dist));
            assert!((best.1 - cp.s0).abs() < 1e-4 * (1.0 + cp.s0.abs()));
            assert!((best.2 - cp.s1).abs() < 1e-4 * (1.0 + cp.s1.abs()));
        }
    }

    #[test]
    fn projection_cases() {
        let n = UnitVec3::new(v(1.0, 0.0, 0.0)).unwrap();
        let in_plane = v(0.0, 2.0, -1.0);
        assert_eq!(
            project_direction_onto_plane(&in_plane, &n).unwrap(),
            in_plane
        );
        assert_eq!(
            project_direction_onto_plane(&v(3.0, 0.0, 0.0), &n),
            Err(Error::DegenerateProjection)
        );
        assert_eq!(
            project_direction_onto_plane(&v(1.0, 0.0, 1.0), &n).unwrap(),
            v(0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn min_pivot_intersecting_lines_zero_angle() {
        let p = v(0.0, 1.0, 2.0);
        let l0 = Line3::new(v(1.0, 0.0, 0.0), p - v(1.0, 0.0, 0.0)).unwrap();
        let l1 = Line3::new(v(0.0, -1.0, 0.0), p - v(0.0, -1.0, 0.0)).unwrap();
        let piv = min_pivot_angle(&l0, &l1).unwrap();
        assert!(piv.angle < 1e-12);
        let cross = piv.pivoted_dir.cross(&l0.dir).norm();
        assert!(cross < 1e-9 * l0.dir.norm() * piv.pivoted_dir.norm());
    }

    #[test]
    fn min_pivot_45_degree_example() {
        let s = std::f64::consts::SQRT_2.recip();
        let l0 = Line3::new(Vec3::zeros(), v(s, 0.0, s)).unwrap();
        let l1 = Line3::new(v(0.0, 1.0, 0.0), v(0.0, s, s)).unwrap();
        let piv = min_pivot_angle(&l0, &l1).unwrap();
        assert!((piv.angle - FRAC_PI_4).abs() < 1e-12);
        let d = piv.pivoted_dir;
        assert!(d.cross(&v(0.0, 0.0, 1.0)).norm() < 1e-12 * d.norm());
        // The pivoted line meets l1 at (0, 0, -1).
        let pivoted = Line3::new(l0.origin, d).unwrap();
        let cp = closest_points(&pivoted, &l1).unwrap();
        assert!((cp.r0 - v(0.0, 0.0, -1.0)).norm() < 1e-12);
        assert!((cp.r1 - v(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn min_pivot_degenerate_direction_gives_right_angle() {
        // l0.dir equals the plane normal n1 = m1 x t.
        let l1 = Line3::new(v(0.0, 1.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        let t = Vec3::zeros() - l1.origin;
        let n1 = l1.dir.cross(&t);
        let l0 = Line3::new(Vec3::zeros(), n1).unwrap();
        let piv = min_pivot_angle(&l0, &l1).unwrap();
        assert_eq!(piv.angle, FRAC_PI_2);
        // Tie-break direction points from the origin toward l1's closest
        // point (0, 1, 0).
        let d = piv.pivoted_dir.normalize();
        assert!((d - v(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn min_pivot_origin_on_target_line_is_degenerate() {
        let l1 = Line3::new(v(0.0, 0.0, -3.0), v(0.0, 0.0, 1.0)).unwrap();
        let l0 = Line3::new(Vec3::zeros(), v(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(min_pivot_angle(&l0, &l1), Err(Error::EpipoleDegenerate));
    }

    #[test]
    fn min_pivot_beats_sampled_intersecting_directions() {
        // Oracle: directions aimed at sampled points of l1 all intersect it;
        // none may beat the closed-form minimum pivot angle.
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..50 {
            let l0 = Line3::new(rng_vec(&mut rng), rng_vec(&mut rng));
            let l1 = Line3::new(rng_vec(&mut rng), rng_vec(&mut rng));
            let (Ok(l0), Ok(l1)) = (l0, l1) else { continue };
            let Ok(piv) = min_pivot_angle(&l0, &l1) else {
                continue;
            };
            for _ in 0..400 {
                let s = rng.gen_range(-50.0..50.0);
                let dir = l1.point_at(s) - l0.origin;
                if dir.norm() < 1e-9 {
                    continue;
                }
                let ang = angle_between_directions(&l0.dir, &dir).unwrap();
                assert!(
                    ang >= piv.angle - 1e-6,
                    "sampled pivot {ang} beats minimum {}",
                    piv.angle
                );
            }
        }
    }

    #[test]
    fn angle_between_directions_cases() {
        let e1 = v(1.0, 0.0, 0.0);
        assert_eq!(angle_between_directions(&e1, &e1).unwrap(), 0.0);
        assert_eq!(angle_between_directions(&e1, &(-e1)).unwrap(), 0.0);
        let diag = v(1.0, 1.0, 0.0);
        assert!((angle_between_directions(&e1, &diag).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(
            angle_between_directions(&e1, &Vec3::zeros()),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn perpendicular_basis_is_orthonormal() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let u = UnitVec3::normalize(rng_vec(&mut rng));
            let Ok(u) = u else { continue };
            let (e1, e2) = perpendicular_basis(&u);
            assert!(e1.dot(&u).abs() < 1e-14);
            assert!(e2.dot(&u).abs() < 1e-14);
            assert!(e1.dot(&e2).abs() < 1e-14);
            assert!((e1.norm() - 1.0).abs() < 1e-14);
            assert!((e2.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rotational_invariance_of_scalars() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..100 {
            let rot = random_rotation(&mut rng);
            let (c0, m0, c1, m1) = (
                rng_vec(&mut rng),
                rng_vec(&mut rng),
                rng_vec(&mut rng),
                rng_vec(&mut rng),
            );
            let (Ok(l0), Ok(l1)) = (Line3::new(c0, m0), Line3::new(c1, m1)) else {
                continue;
            };
            let (Ok(r0), Ok(r1)) = (
                Line3::new(rot * c0, rot * m0),
                Line3::new(rot * c1, rot * m1),
            ) else {
                continue;
            };
            if let (Ok(d), Ok(dr)) = (skew_line_distance(&l0, &l1), skew_line_distance(&r0, &r1)) {
                assert!((d - dr).abs() < 1e-12 * (1.0 + d));
            }
            if let (Ok(a), Ok(ar)) = (
                angle_between_directions(&m0, &m1),
                angle_between_directions(&(rot * m0), &(rot * m1)),
            ) {
                assert!((a - ar).abs() < 1e-12);
            }
            if let (Ok(p), Ok(pr)) = (min_pivot_angle(&l0, &l1), min_pivot_angle(&r0, &r1)) {
                assert!((p.angle - pr.angle).abs() < 1e-12);
                let back = rot.inverse() * pr.pivoted_dir;
                let cross = back.cross(&p.pivoted_dir).norm();
                assert!(cross < 1e-9 * back.norm() * p.pivoted_dir.norm());
            }
        }
    }

    proptest! {
        #[test]
        fn cross_norm_identity(ax in -3.0..3.0f64, ay in -3.0..3.0f64, az in -3.0..3.0f64,
                               bx in -3.0..3.0f64, by in -3.0..3.0f64, bz in -3.0..3.0f64) {
            let a = v(ax, ay, az);
            let b = v(bx, by, bz);
            prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
            let ah = a / a.norm();
            let bh = b / b.norm();
            let lhs = ah.cross(&bh).norm_squared();
            let rhs = 1.0 - ah.dot(&bh).powi(2);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn triple_product_cyclic_invariance(ax in -3.0..3.0f64, ay in -3.0..3.0f64, az in -3.0..3.0f64,
                                            bx in -3.0..3.0f64, by in -3.0..3.0f64, bz in -3.0..3.0f64,
                                            cx in -3.0..3.0f64, cy in -3.0..3.0f64, cz in -3.0..3.0f64) {
            let (a, b, c) = (v(ax, ay, az), v(bx, by, bz), v(cx, cy, cz));
            let p0 = triple_product(&a, &b, &c);
            let p1 = triple_product(&b, &c, &a);
            let p2 = triple_product(&c, &a, &b);
            let scale = p0.abs().max(1e-9);
            prop_assert!((p0 - p1).abs() <= 1e-12 * scale.max(1.0));
            prop_assert!((p0 - p2).abs() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn projection_is_orthogonal_to_normal(mx in -3.0..3.0f64, my in -3.0..3.0f64, mz in -3.0..3.0f64,
                                              nx in -1.0..1.0f64, ny in -1.0..1.0f64, nz in -1.0..1.0f64) {
            let m = v(mx, my, mz);
            let n = v(nx, ny, nz);
            prop_assume!(m.norm() > 1e-3 && n.norm() > 1e-3);
            let normal = UnitVec3::normalize(n).unwrap();
            if let Ok(p) = project_direction_onto_plane(&m, &normal) {
                prop_assert!(p.dot(&normal).abs() <= 1e-12 * m.norm());
            }
        }

        #[test]
        fn skew_distance_consistent_with_closest_points(
            c0x in -2.0..2.0f64, c0y in -2.0..2.0f64, c0z in -2.0..2.0f64,
            m0x in -2.0..2.0f64, m0y in -2.0..2.0f64, m0z in -2.0..2.0f64,
            c1x in -2.0..2.0f64, c1y in -2.0..2.0f64, c1z in -2.0..2.0f64,
            m1x in -2.0..2.0f64, m1y in -2.0..2.0f64, m1z in -2.0..2.0f64,
        ) {
            let l0 = Line3::new(v(c0x, c0y, c0z), v(m0x, m0y, m0z));
            let l1 = Line3::new(v(c1x, c1y, c1z), v(m1x, m1y, m1z));
            prop_assume!(l0.is_ok() && l1.is_ok());
            let (l0, l1) = (l0.unwrap(), l1.unwrap());
            prop_assume!(l0.dir.cross(&l1.dir).norm() > 1e-6 * l0.dir.norm() * l1.dir.norm());
            let d = skew_line_distance(&l0, &l1).unwrap();
            let cp = closest_points(&l0, &l1).unwrap();
            let gap = (cp.r0 - cp.r1).norm();
            prop_assert!((d - gap).abs() <= 1e-10 * (1.0 + d));
            // The connecting segment is orthogonal to both directions.
            let seg = cp.r0 - cp.r1;
            let scale = (1.0 + seg.norm()) * l0.dir.norm().max(l1.dir.norm());
            prop_assert!(seg.dot(&l0.dir).abs() <= 1e-10 * scale);
            prop_assert!(seg.dot(&l1.dir).abs() <= 1e-10 * scale);
        }
    }
}
