use thiserror::Error;

/// Errors reported by the geometric and numerical operations of this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A vector with a NaN or infinite component was passed where finite
    /// coordinates are required.
    #[error("non-finite vector component")]
    NonFinite,

    /// A zero-length vector was passed where a direction is required.
    #[error("zero-length vector where a direction is required")]
    ZeroVector,

    /// A vector failed the unit-norm check at construction.
    #[error("vector is not unit length")]
    NotUnitLength,

    /// The two line directions are parallel within tolerance, so closest
    /// points and skew distance are undefined.
    #[error("line directions are parallel within tolerance")]
    ParallelLines,

    /// Projecting a direction onto a plane left a vanishing vector (the
    /// direction is parallel to the plane normal).
    #[error("projected direction vanishes: direction is parallel to the plane normal")]
    DegenerateProjection,

    /// A ray is parallel to the baseline (equivalently passes through the
    /// other camera center), so its epipolar plane is undefined.
    #[error("ray is parallel to the baseline (epipole degeneracy)")]
    EpipoleDegenerate,

    /// The two largest singular values coincide, so the middle right
    /// singular vector is not unique.
    #[error("singular spectrum: middle right singular vector is not unique")]
    SingularSpectrum,

    /// Both candidate epipolar-plane normals vanish: both rays are parallel
    /// to the baseline.
    #[error("both candidate plane normals vanish: rays parallel to the baseline")]
    BothNormalsDegenerate,

    /// Ray directions are parallel, so no finite intersection exists.
    #[error("ray directions are parallel: no finite intersection")]
    ParallelRays,

    /// The baseline between the two camera centers vanishes.
    #[error("baseline between camera centers vanishes")]
    DegenerateBaseline,

    /// The final direction of a pivot chain does not intersect the target
    /// line within tolerance.
    #[error("pivot chain does not intersect the target line")]
    ChainNotIntersecting,

    /// Rejection sampling exhausted its retry budget while generating a
    /// synthetic scene.
    #[error("infeasible scene spec: rejection sampling exhausted")]
    InfeasibleSpec,

    /// A configuration value is out of its valid range.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}
