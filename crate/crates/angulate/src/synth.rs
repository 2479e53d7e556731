//! Synthetic two-view scene generation with controllable angular noise,
//! producing ground-truth-labeled correspondences for benchmarks and
//! statistical tests.

use nalgebra::Rotation3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use crate::error::Error;
use crate::geom::{perpendicular_basis, UnitVec3, Vec3};
use crate::triangulate::RelativeGeometry;

/// Rejection sampling gives up after this many consecutive failed draws.
const MAX_REJECTIONS: usize = 100_000;

/// Parameters of a synthetic two-view scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub n_points: usize,
    pub baseline_length: f64,
    /// Distance range of scene points from camera 1, `0 < min <= max`.
    pub depth_range: (f64, f64),
    /// Half-angle of both cameras' viewing cones, `(0, pi)`.
    pub fov_halfangle: f64,
    /// Standard deviation of the angular perturbation, radians.
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            n_points: 1000,
            baseline_length: 1.0,
            depth_range: (2.0, 8.0),
            fov_halfangle: 60f64.to_radians(),
            noise_sigma: 0.1f64.to_radians(),
            rng_seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        if self.n_points == 0 {
            return bad("n_points must be positive");
        }
        if !(self.baseline_length > 0.0 && self.baseline_length.is_finite()) {
            return bad("baseline_length must be positive");
        }
        let (dmin, dmax) = self.depth_range;
        if !(dmin > 0.0 && dmax >= dmin && dmax.is_finite()) {
            return bad("depth_range must satisfy 0 < min <= max");
        }
        if !(self.fov_halfangle > 0.0 && self.fov_halfangle < std::f64::consts::PI) {
            return bad("fov_halfangle must lie in (0, pi)");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be non-negative");
        }
        Ok(())
    }
}

/// One generated correspondence with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorrespondence {
    /// Noisy bearing in camera 0's local frame.
    pub f0: UnitVec3,
    /// Noisy bearing in camera 1's (reference) frame.
    pub f1: UnitVec3,
    /// Camera-0 to reference rotation.
    pub rotation: Rotation3<f64>,
    pub c0: Vec3,
    pub c1: Vec3,
    pub ground_truth_point: Vec3,
    /// Angles actually applied to (f0, f1) by the noise model.
    pub true_noise_angles: (f64, f64),
}

impl LabeledCorrespondence {
    pub fn relative_geometry(&self) -> Result<RelativeGeometry, Error> {
        RelativeGeometry::from_pose(&self.rotation, self.c0, self.c1, &self.f0, &self.f1)
    }
}

/// Rotates `f` by `|N(0, sigma)|` radians about a uniformly random axis
/// perpendicular to it; returns the perturbed bearing and the applied
/// angle.
pub fn perturb_bearing<R: Rng>(f: &UnitVec3, sigma: f64, rng: &mut R) -> (UnitVec3, f64) {
    if sigma == 0.0 {
        return (*f, 0.0);
    }
    let eta = Normal::new(0.0, sigma)
        .expect("sigma checked non-negative finite")
        .sample(rng)
        .abs();
    let (e1, e2) = perpendicular_basis(f);
    let psi = rng.gen_range(0.0..std::f64::consts::TAU);
    let axis = psi.cos() * e1.into_inner() + psi.sin() * e2.into_inner();
    // Rodrigues with axis perpendicular to f.
    let rotated = f.into_inner() * eta.cos() + axis.cross(f) * eta.sin();
    (UnitVec3::new_unchecked(rotated.normalize()), eta)
}

fn sample_cone_direction<R: Rng>(halfangle: f64, rng: &mut R) -> Vec3 {
    // Uniform over the spherical cap around +z.
    let cos_t = rng.gen_range(halfangle.cos()..=1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t)
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Generates a deterministic scene: one camera pair plus `n_points`
/// correspondences whose ground-truth points lie inside both viewing cones.
/// Bearings before noise satisfy the epipolar constraint to machine
/// precision.
pub fn generate_scene(spec: &SceneSpec) -> Result<Vec<LabeledCorrespondence>, Error> {
    spec.validate()?;
    let mut rng = StdRng::seed_from_u64(spec.rng_seed);

    // Camera 1 sits at the origin looking along +z; camera 0 is a baseline
    // away, aimed at the middle of the depth range.
    let c1 = Vec3::zeros();
    let c0 = spec.baseline_length * random_unit(&mut rng);
    let (dmin, dmax) = spec.depth_range;
    let scene_center = Vec3::new(0.0, 0.0, 0.5 * (dmin + dmax));
    let aim = (scene_center - c0).normalize();
    let rotation = Rotation3::rotation_between(&Vec3::z(), &aim).unwrap_or_else(|| {
        Rotation3::from_axis_angle(&nalgebra::Vector3::x_axis(), std::f64::consts::PI)
    });

    let cos_fov = spec.fov_halfangle.cos();
    let mut out = Vec::with_capacity(spec.n_points);
    let mut rejections = 0usize;
    while out.len() < spec.n_points {
        if rejections >= MAX_REJECTIONS {
            return Err(Error::InfeasibleSpec);
        }
        let dir = sample_cone_direction(spec.fov_halfangle, &mut rng);
        let depth = rng.gen_range(dmin..=dmax);
        let p = c1 + depth * dir;

        let w0 = p - c0;
        if w0.norm() < 1e-9 {
            rejections += 1;
            continue;
        }
        let f0_clean = rotation.inverse() * w0.normalize();
        if f0_clean.z < cos_fov {
            rejections += 1;
            continue;
        }
        rejections = 0;

        let f1_clean = UnitVec3::new_unchecked(dir);
        let f0_clean = UnitVec3::new_unchecked(f0_clean);
        let (f0, eta0) = perturb_bearing(&f0_clean, spec.noise_sigma, &mut rng);
        let (f1, eta1) = perturb_bearing(&f1_clean, spec.noise_sigma, &mut rng);
        out.push(LabeledCorrespondence {
            f0,
            f1,
            rotation,
            c0,
            c1,
            ground_truth_point: p,
            true_noise_angles: (eta0, eta1),
        });
    }
    Ok(out)
}

/// Deterministic regression fixtures for cheirality and parallax handling.
pub mod fixtures {
    use super::*;

    fn forward_point() -> (Vec3, Vec3, Vec3) {
        (
            Vec3::new(0.4, -0.3, 5.0),
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
        )
    }

    /// Both bearings face away from the scene point: negative depth on both
    /// rays.
    pub fn behind_both() -> RelativeGeometry {
        let (p, c0, c1) = forward_point();
        RelativeGeometry::new(c0, c1, -(p - c0), -(p - c1)).unwrap()
    }

    /// Camera 0 faces away from the point; camera 1 sees it.
    pub fn behind_ray0() -> RelativeGeometry {
        let (p, c0, c1) = forward_point();
        RelativeGeometry::new(c0, c1, -(p - c0), p - c1).unwrap()
    }

    /// Camera 1 faces away from the point; camera 0 sees it.
    pub fn behind_ray1() -> RelativeGeometry {
        let (p, c0, c1) = forward_point();
        RelativeGeometry::new(c0, c1, p - c0, -(p - c1)).unwrap()
    }

    /// A point far enough that the rays subtend ~0.01 degrees.
    pub fn low_parallax() -> RelativeGeometry {
        let d = 1.0 / 0.01f64.to_radians().tan();
        let p = Vec3::new(0.5, 0.0, d);
        let (_, c0, c1) = forward_point();
        RelativeGeometry::new(c0, c1, p - c0, p - c1).unwrap()
    }

    /// A well-conditioned forward observation.
    pub fn forward() -> RelativeGeometry {
        let (p, c0, c1) = forward_point();
        RelativeGeometry::new(c0, c1, p - c0, p - c1).unwrap()
    }
}
