//! Closed-form singular value decomposition of 2x3 matrices via the 2x2
//! eigendecomposition of `M * M^T`, plus the middle right singular vector
//! needed by the sine-cost correction.

use nalgebra::{Matrix2x3, Vector2};

use crate::error::Error;
use crate::geom::{UnitVec3, Vec3};

/// Two largest singular values coincide below this gap: the middle right
/// singular vector is not unique.
pub const SPECTRUM_TOL: f64 = 1e-12;

/// Thin SVD of a 2x3 matrix: `sigma[0] >= sigma[1] >= 0` with unit left and
/// right singular vectors. The third singular value is always zero; its
/// right vector is omitted.
#[derive(Debug, Clone, Copy)]
pub struct Svd2x3 {
    pub sigma: [f64; 2],
    pub u: [Vector2<f64>; 2],
    pub v: [Vec3; 2],
}

/// Analytic eigendecomposition of the symmetric matrix [[a, b], [b, c]],
/// eigenvalues descending.
fn symmetric_eigen_2x2(a: f64, b: f64, c: f64) -> ([f64; 2], [Vector2<f64>; 2]) {
    let half_tr = 0.5 * (a + c);
    let disc = (0.25 * (a - c).powi(2) + b * b).sqrt();
    let l1 = half_tr + disc;
    let l2 = (half_tr - disc).max(0.0);
    if b.abs() <= f64::EPSILON * (a.abs() + c.abs()) {
        let u1 = if a >= c {
            Vector2::new(1.0, 0.0)
        } else {
            Vector2::new(0.0, 1.0)
        };
        let u2 = Vector2::new(-u1.y, u1.x);
        return ([l1, l2], [u1, u2]);
    }
    // (b, l1 - a) and (l1 - c, b) are both eigenvectors of l1; take the one
    // with the larger norm.
    let cand_a = Vector2::new(b, l1 - a);
    let cand_b = Vector2::new(l1 - c, b);
    let u1 = if cand_a.norm_squared() >= cand_b.norm_squared() {
        cand_a.normalize()
    } else {
        cand_b.normalize()
    };
    let u2 = Vector2::new(-u1.y, u1.x);
    ([l1, l2], [u1, u2])
}

/// Deterministic unit vector orthogonal to `v1` (rejection of the canonical
/// axis with the smallest `|v1|` component).
fn orthogonal_completion(v1: &Vec3) -> Vec3 {
    let abs = [v1.x.abs(), v1.y.abs(), v1.z.abs()];
    let k = if abs[0] <= abs[1] && abs[0] <= abs[2] {
        0
    } else if abs[1] <= abs[2] {
        1
    } else {
        2
    };
    let mut axis = Vec3::zeros();
    axis[k] = 1.0;
    (axis - v1 * v1[k]).normalize()
}

pub fn svd_2x3(m: &Matrix2x3<f64>) -> Svd2x3 {
    let b = m * m.transpose();
    let (lambda, u) = symmetric_eigen_2x2(b[(0, 0)], b[(0, 1)], b[(1, 1)]);
    let sigma = [lambda[0].sqrt(), lambda[1].sqrt()];
    let v1 = if sigma[0] > f64::MIN_POSITIVE.sqrt() {
        (m.transpose() * u[0] / sigma[0]).normalize()
    } else {
        // M is numerically zero; any orthonormal pair is a valid V.
        Vec3::new(1.0, 0.0, 0.0)
    };
    let v2 = if sigma[1] > SPECTRUM_TOL * sigma[0].max(1.0) {
        (m.transpose() * u[1] / sigma[1]).normalize()
    } else {
        orthogonal_completion(&v1)
    };
    Svd2x3 {
        sigma,
        u,
        v: [v1, v2],
    }
}

/// Right singular vector of a 2x3 matrix associated with its second-largest
/// singular value, sign-normalized so the first nonzero component is
/// positive.
///
/// Fails with `SingularSpectrum` when the two largest singular values
/// coincide within `SPECTRUM_TOL` and the vector is therefore not unique.
pub fn middle_right_singular_vector(m: &Matrix2x3<f64>) -> Result<UnitVec3, Error> {
    if !m.iter().all(|c| c.is_finite()) {
        return Err(Error::NonFinite);
    }
    let svd = svd_2x3(m);
    if svd.sigma[0] - svd.sigma[1] <= SPECTRUM_TOL {
        return Err(Error::SingularSpectrum);
    }
    Ok(UnitVec3::new_unchecked(svd.v[1]).canonical_sign())
}
