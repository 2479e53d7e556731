//! Per-method run statistics and the timing harness used by the benchmark
//! subcommand.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use crate::cheirality::{assess, classify_observation, ClassificationThresholds, ObservationClass};
use crate::error::Error;
use crate::geom::angle_between_directions;
use crate::oracle::sweep_epipolar_planes;
use crate::synth::LabeledCorrespondence;
use crate::triangulate::{triangulate, AngularCost, Method, RelativeGeometry, TriangulationStatus};

/// Aggregated results of running one method over one scene.
///
/// The four class counts partition `n`; records whose correction fails
/// outright are counted as outliers. Angular means aggregate the records
/// with finite angles (for the midpoint baseline these are the angles
/// implied by reprojecting its point).
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRunStats {
    pub method: Method,
    /// Noise level of the scene, radians.
    pub sigma: f64,
    pub n: usize,
    pub mean_theta_sum: f64,
    pub median_theta_sum: f64,
    pub mean_theta_max: f64,
    pub mean_sin_sq: f64,
    /// Median distance to ground truth over records with a finite point.
    pub median_point_error: Option<f64>,
    pub inliers: usize,
    pub outliers: usize,
    pub cheirality_fails: usize,
    pub low_parallax: usize,
    /// Median wall time per correspondence; `None` until timed.
    pub ns_per_point: Option<f64>,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    })
}

/// Angles between the measured rays and the rays implied by a triangulated
/// point, used to give the midpoint baseline comparable angular errors.
pub fn reprojected_angles(
    g: &RelativeGeometry,
    point: &crate::geom::Vec3,
) -> Result<(f64, f64), Error> {
    let d0 = point - g.c0;
    let d1 = point - g.c1;
    Ok((
        angle_between_directions(&g.m0, &d0)?,
        angle_between_directions(&g.m1, &d1)?,
    ))
}

/// Triangulates every correspondence of a scene with one method and
/// aggregates costs, classification counts and ground-truth error.
pub fn evaluate_method(
    scene: &[LabeledCorrespondence],
    method: Method,
    sigma: f64,
    thresholds: &ClassificationThresholds,
) -> Result<MethodRunStats, Error> {
    let mut theta_sums = Vec::with_capacity(scene.len());
    let mut theta_maxes = Vec::with_capacity(scene.len());
    let mut sin_sqs = Vec::with_capacity(scene.len());
    let mut point_errors = Vec::with_capacity(scene.len());
    let (mut inliers, mut outliers, mut cheirality_fails, mut low_parallax) = (0, 0, 0, 0);

    for corr in scene {
        let g = corr.relative_geometry()?;
        let out = match triangulate(&g, method) {
            Ok(out) => out,
            Err(_) => {
                outliers += 1;
                continue;
            }
        };
        let angles = if method == Method::Midpoint {
            if out.status == TriangulationStatus::Ok {
                reprojected_angles(&g, &out.point).ok()
            } else {
                None
            }
        } else {
            Some((out.correction.theta0, out.correction.theta1))
        };
        if let Some((t0, t1)) = angles {
            theta_sums.push(t0 + t1);
            theta_maxes.push(t0.max(t1));
            sin_sqs.push(AngularCost::SumSinSq.eval(t0, t1));
        }
        if out.status == TriangulationStatus::Ok {
            point_errors.push((out.point - corr.ground_truth_point).norm());
        }
        let report = assess(&g, &out.correction, thresholds)?;
        match classify_observation(&g, &out.correction, &report, thresholds) {
            ObservationClass::Inlier => inliers += 1,
            ObservationClass::Outlier => outliers += 1,
            ObservationClass::CheiralityFail => cheirality_fails += 1,
            ObservationClass::LowParallax => low_parallax += 1,
        }
    }

    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    Ok(MethodRunStats {
        method,
        sigma,
        n: scene.len(),
        mean_theta_sum: mean(&theta_sums),
        median_theta_sum: median(&mut theta_sums.clone()).unwrap_or(0.0),
        mean_theta_max: mean(&theta_maxes),
        mean_sin_sq: mean(&sin_sqs),
        median_point_error: median(&mut point_errors.clone()),
        inliers,
        outliers,
        cheirality_fails,
        low_parallax,
        ns_per_point: None,
    })
}

fn median_of_timings(mut timings: Vec<f64>) -> f64 {
    median(&mut timings).unwrap_or(f64::NAN)
}

/// Median nanoseconds per correspondence for one closed-form method; one
/// warm-up pass is discarded.
pub fn time_triangulate_ns(geoms: &[RelativeGeometry], method: Method, repeats: usize) -> f64 {
    let run = || {
        for g in geoms {
            black_box(triangulate(black_box(g), method).ok());
        }
    };
    run();
    let timings = (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            run();
            start.elapsed().as_nanos() as f64 / geoms.len() as f64
        })
        .collect();
    median_of_timings(timings)
}

/// Median nanoseconds per correspondence for the brute-force sweep at the
/// given grid size; one warm-up pass is discarded.
pub fn time_sweep_ns(
    geoms: &[RelativeGeometry],
    cost: AngularCost,
    grid_n: usize,
    repeats: usize,
) -> f64 {
    let run = || {
        for g in geoms {
            black_box(sweep_epipolar_planes(black_box(g), cost, grid_n).ok());
        }
    };
    run();
    let timings = (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            run();
            start.elapsed().as_nanos() as f64 / geoms.len() as f64
        })
        .collect();
    median_of_timings(timings)
}

pub const STATS_TSV_HEADER: &str = "method\tsigma_deg\tn\tmean_theta_sum\tmedian_theta_sum\t\
mean_theta_max\tmean_sin_sq\tmedian_point_error\tinliers\toutliers\tcheirality_fails\t\
low_parallax\tns_per_point";

/// One tab-separated row matching `STATS_TSV_HEADER`. All numeric fields
/// except the timing column are deterministic for a fixed seed.
pub fn stats_tsv_row(s: &MethodRunStats) -> String {
    let mut row = String::new();
    let _ = write!(
        row,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t",
        s.method,
        s.sigma.to_degrees(),
        s.n,
        s.mean_theta_sum,
        s.median_theta_sum,
        s.mean_theta_max,
        s.mean_sin_sq,
    );
    match s.median_point_error {
        Some(e) => {
            let _ = write!(row, "{e}");
        }
        None => row.push_str("na"),
    }
    let _ = write!(
        row,
        "\t{}\t{}\t{}\t{}\t",
        s.inliers, s.outliers, s.cheirality_fails, s.low_parallax
    );
    match s.ns_per_point {
        Some(ns) => {
            let _ = write!(row, "{ns:.1}");
        }
        None => row.push_str("na"),
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_scene, SceneSpec};

    #[test]
    fn counts_partition_scene() {
        let spec = SceneSpec {
            n_points: 500,
            noise_sigma: 0.2f64.to_radians(),
            rng_seed: 21,
            ..SceneSpec::default()
        };
        let scene = generate_scene(&spec).unwrap();
        let thr = ClassificationThresholds::default();
        for method in Method::ALL {
            let stats = evaluate_method(&scene, method, spec.noise_sigma, &thr).unwrap();
            assert_eq!(
                stats.inliers + stats.outliers + stats.cheirality_fails + stats.low_parallax,
                stats.n
            );
            assert_eq!(stats.n, 500);
        }
    }

    #[test]
    fn noiseless_scene_has_tiny_error() {
        let spec = SceneSpec {
            n_points: 200,
            noise_sigma: 0.0,
            rng_seed: 8,
            ..SceneSpec::default()
        };
        let scene = generate_scene(&spec).unwrap();
        let thr = ClassificationThresholds::default();
        for method in Method::ALL {
            let stats = evaluate_method(&scene, method, 0.0, &thr).unwrap();
            let err = stats.median_point_error.unwrap();
            assert!(err <= 1e-9 * spec.depth_range.1, "{method}: {err}");
            assert_eq!(stats.inliers, stats.n);
        }
    }

    #[test]
    fn l1_and_linf_dominate_their_costs_in_aggregate() {
        let spec = SceneSpec {
            n_points: 400,
            noise_sigma: 0.3f64.to_radians(),
            rng_seed: 77,
            ..SceneSpec::default()
        };
        let scene = generate_scene(&spec).unwrap();
        let thr = ClassificationThresholds::default();
        let all: Vec<MethodRunStats> = Method::ALL
            .iter()
            .map(|m| evaluate_method(&scene, *m, spec.noise_sigma, &thr).unwrap())
            .collect();
        let l1 = &all[0];
        let l2 = &all[1];
        let linf = &all[2];
        for other in &all {
            assert!(l1.mean_theta_sum <= other.mean_theta_sum + 1e-12);
            assert!(linf.mean_theta_max <= other.mean_theta_max + 1e-12);
            assert!(l2.mean_sin_sq <= other.mean_sin_sq + 1e-12);
        }
    }

    #[test]
    fn tsv_row_shape() {
        let stats = MethodRunStats {
            method: Method::L1Angular,
            sigma: 0.1f64.to_radians(),
            n: 10,
            mean_theta_sum: 0.01,
            median_theta_sum: 0.009,
            mean_theta_max: 0.008,
            mean_sin_sq: 1e-5,
            median_point_error: None,
            inliers: 10,
            outliers: 0,
            cheirality_fails: 0,
            low_parallax: 0,
            ns_per_point: None,
        };
        let row = stats_tsv_row(&stats);
        assert_eq!(
            row.split('\t').count(),
            STATS_TSV_HEADER.split('\t').count()
        );
        assert!(row.starts_with("l1\t"));
        assert!(row.ends_with("na"));
    }
}
