//! Command-line tool: scene generation, batch triangulation, brute-force
//! verification of the closed-form optima, and benchmarking.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse error,
//! 3 invalid spec.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cheirality::{
    assess, classify_observation, triangulate_with_retry, ClassificationThresholds,
    ObservationClass,
};
use crate::error::Error;
use crate::io::{
    read_correspondences, read_outputs, read_poses, write_correspondences, write_outputs,
    write_poses, Correspondence, CorrespondenceFile, FileError, OutputRecord, PoseRecord,
};
use crate::oracle::sweep_epipolar_planes;
use crate::stats::{evaluate_method, stats_tsv_row, time_triangulate_ns, STATS_TSV_HEADER};
use crate::synth::{generate_scene, SceneSpec};
use crate::triangulate::{triangulate, AngularCost, Method, RelativeGeometry, TriangulationStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_PARSE_ERROR: i32 = 2;
pub const EXIT_INVALID_SPEC: i32 = 3;

/// A closed-form cost must match the sweep minimum within this.
pub const VERIFY_DEVIATION_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "angulate",
    version,
    about = "Closed-form optimal two-view triangulation from bearing vectors"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic correspondence file and its pose file.
    Gen(GenArgs),
    /// Triangulate a correspondence file with one or all methods.
    Triangulate(TriangulateArgs),
    /// Check closed-form costs against the brute-force plane sweep.
    Verify(VerifyArgs),
    /// Benchmark accuracy, classification and speed over noise levels.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SceneArgs {
    /// Number of correspondences.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// RNG seed; output is byte-identical for a fixed seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distance between the camera centers.
    #[arg(long, default_value_t = 1.0)]
    baseline: f64,
    /// Minimum point distance from camera 1.
    #[arg(long, default_value_t = 2.0)]
    depth_min: f64,
    /// Maximum point distance from camera 1.
    #[arg(long, default_value_t = 8.0)]
    depth_max: f64,
    /// Half-angle of both viewing cones, degrees.
    #[arg(long, default_value_t = 60.0)]
    fov_deg: f64,
}

impl SceneArgs {
    fn spec(&self, sigma_deg: f64) -> SceneSpec {
        SceneSpec {
            n_points: self.n,
            baseline_length: self.baseline,
            depth_range: (self.depth_min, self.depth_max),
            fov_halfangle: self.fov_deg.to_radians(),
            noise_sigma: sigma_deg.to_radians(),
            rng_seed: self.seed,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Angular noise standard deviation, degrees.
    #[arg(long, default_value_t = 0.0)]
    sigma_deg: f64,
    /// Correspondence file to write.
    #[arg(long)]
    output: PathBuf,
    /// Pose file to write (default: `<output>.poses`).
    #[arg(long)]
    poses: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Outlier threshold on the total angular correction, degrees.
    #[arg(long, default_value_t = 2.0)]
    outlier_deg: f64,
    /// Minimum parallax between the measured rays, degrees.
    #[arg(long, default_value_t = 0.5)]
    parallax_deg: f64,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Result<ClassificationThresholds, Error> {
        ClassificationThresholds::new(
            self.outlier_deg.to_radians(),
            self.parallax_deg.to_radians(),
        )
    }
}

#[derive(Args)]
struct TriangulateArgs {
    /// Correspondence file to triangulate.
    input: PathBuf,
    /// Pose file (rotation and camera centers).
    #[arg(long)]
    poses: PathBuf,
    /// l1 | l2 | linf | midpoint | all.
    #[arg(long, default_value = "all")]
    method: String,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Skip malformed or degenerate records instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Retry cheirality violations with the other methods (l1, linf, l2
    /// order); the output record reports the method that succeeded.
    #[arg(long)]
    retry: bool,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Correspondence file to verify.
    input: PathBuf,
    /// Pose file (rotation and camera centers).
    #[arg(long)]
    poses: PathBuf,
    /// Number of plane samples for the sweep (minimum 16).
    #[arg(long, default_value_t = crate::oracle::DEFAULT_GRID_N)]
    grid: usize,
    /// Previously written triangulation output to cross-check against the
    /// sweep, record by record.
    #[arg(long)]
    results: Option<PathBuf>,
    /// Skip malformed records instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Noise levels to benchmark, degrees (comma-separated or repeated).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.1, 0.5])]
    sigma_deg: Vec<f64>,
    /// Timing repetitions (median reported, warm-up discarded).
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

enum CliError {
    File(PathBuf, FileError),
    Spec(Error),
    Verify,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::File(..) => EXIT_PARSE_ERROR,
            CliError::Spec(_) => EXIT_INVALID_SPEC,
            CliError::Verify => EXIT_VERIFY_FAILED,
        }
    }

    fn report(&self) {
        match self {
            CliError::File(path, e) => eprintln!("error: {}: {e}", path.display()),
            CliError::Spec(e) => eprintln!("error: {e}"),
            CliError::Verify => {}
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Spec(e)
    }
}

fn open_reader(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::File(path.to_path_buf(), e.into()))
}

fn create_writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::File(path.to_path_buf(), e.into()))
}

fn with_output<F>(path: Option<&Path>, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), FileError>,
{
    match path {
        Some(p) => {
            let mut w = create_writer(p)?;
            f(&mut w).map_err(|e| CliError::File(p.to_path_buf(), e))?;
            w.flush()
                .map_err(|e| CliError::File(p.to_path_buf(), e.into()))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w).map_err(|e| CliError::File(PathBuf::from("<stdout>"), e))?;
            w.flush()
                .map_err(|e| CliError::File(PathBuf::from("<stdout>"), e.into()))
        }
    }
}

fn read_inputs(
    input: &Path,
    poses: &Path,
    lenient: bool,
) -> Result<(CorrespondenceFile, PoseRecord), CliError> {
    let corr = read_correspondences(open_reader(input)?, lenient)
        .map_err(|e| CliError::File(input.to_path_buf(), e))?;
    for line in &corr.skipped_lines {
        eprintln!(
            "warning: {}: skipped malformed record at line {line}",
            input.display()
        );
    }
    let pose =
        read_poses(open_reader(poses)?).map_err(|e| CliError::File(poses.to_path_buf(), e))?;
    Ok((corr, pose))
}

fn parse_method_flag(s: &str) -> Result<Vec<Method>, CliError> {
    if s == "all" {
        return Ok(Method::ALL.to_vec());
    }
    s.parse::<Method>()
        .map(|m| vec![m])
        .map_err(|e| CliError::Spec(Error::InvalidSpec(e)))
}

fn run_gen(args: &GenArgs) -> Result<(), CliError> {
    let spec = args.scene.spec(args.sigma_deg);
    let scene = generate_scene(&spec)?;
    let records: Vec<Correspondence> = scene
        .iter()
        .map(|c| Correspondence { f0: c.f0, f1: c.f1 })
        .collect();
    let pose = PoseRecord {
        rotation: scene[0].rotation,
        c0: scene[0].c0,
        c1: scene[0].c1,
    };
    let poses_path = args.poses.clone().unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".poses");
        PathBuf::from(p)
    });
    with_output(Some(&args.output), |w| {
        writeln!(
            w,
            "# generated: n={} seed={} sigma_deg={} baseline={} depth=[{},{}] fov_deg={}",
            spec.n_points,
            spec.rng_seed,
            args.sigma_deg,
            spec.baseline_length,
            spec.depth_range.0,
            spec.depth_range.1,
            args.scene.fov_deg
        )?;
        write_correspondences(w, &records)
    })?;
    with_output(Some(&poses_path), |w| write_poses(w, &pose))?;
    eprintln!(
        "wrote {} correspondences to {} (poses: {})",
        records.len(),
        args.output.display(),
        poses_path.display()
    );
    Ok(())
}

fn record_geometry(pose: &PoseRecord, corr: &Correspondence) -> Result<RelativeGeometry, Error> {
    RelativeGeometry::from_pose(&pose.rotation, pose.c0, pose.c1, &corr.f0, &corr.f1)
}

fn run_triangulate(args: &TriangulateArgs) -> Result<(), CliError> {
    let methods = parse_method_flag(&args.method)?;
    let thresholds = args.thresholds.thresholds()?;
    let (corr_file, pose) = read_inputs(&args.input, &args.poses, args.lenient)?;

    let mut records = Vec::with_capacity(corr_file.records.len() * methods.len());
    let mut class_counts = [0usize; 4];
    for (idx, corr) in corr_file.records.iter().enumerate() {
        let g = match record_geometry(&pose, corr) {
            Ok(g) => g,
            Err(e) if args.lenient => {
                eprintln!("warning: record {}: {e}; skipped", idx + 1);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for method in &methods {
            let out = if args.retry {
                triangulate_with_retry(&g, *method).map(|(out, _)| out)
            } else {
                triangulate(&g, *method)
            };
            let out = match out {
                Ok(out) => out,
                Err(e) if args.lenient => {
                    eprintln!("warning: record {}: {method}: {e}; skipped", idx + 1);
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let report = assess(&g, &out.correction, &thresholds)?;
            let class = classify_observation(&g, &out.correction, &report, &thresholds);
            class_counts[match class {
                ObservationClass::Inlier => 0,
                ObservationClass::Outlier => 1,
                ObservationClass::CheiralityFail => 2,
                ObservationClass::LowParallax => 3,
            }] += 1;
            records.push(OutputRecord::from(&out));
        }
    }
    with_output(args.output.as_deref(), |w| write_outputs(w, &records))?;
    eprintln!(
        "{} records: {} inlier, {} outlier, {} cheirality-fail, {} low-parallax",
        records.len(),
        class_counts[0],
        class_counts[1],
        class_counts[2],
        class_counts[3]
    );
    Ok(())
}

fn closed_form_cost(g: &RelativeGeometry, cost: AngularCost) -> Result<f64, Error> {
    let corr = match cost {
        AngularCost::SumAngles => crate::triangulate::correct_l1(g)?,
        AngularCost::SumSinSq => crate::triangulate::correct_l2(g)?,
        AngularCost::MaxAngle => crate::triangulate::correct_linf(g)?,
    };
    Ok(cost.eval(corr.theta0, corr.theta1))
}

fn run_verify(args: &VerifyArgs) -> Result<(), CliError> {
    if args.grid < 16 {
        return Err(CliError::Spec(Error::InvalidSpec(
            "--grid must be at least 16".into(),
        )));
    }
    let (corr_file, pose) = read_inputs(&args.input, &args.poses, args.lenient)?;
    let geoms: Vec<RelativeGeometry> = corr_file
        .records
        .iter()
        .map(|c| record_geometry(&pose, c))
        .collect::<Result<_, _>>()
        .map_err(CliError::Spec)?;

    let mut max_dev = [0.0f64; 3];
    let mut sweep_minima = Vec::with_capacity(geoms.len());
    for g in &geoms {
        let mut minima = [0.0f64; 3];
        for (k, cost) in AngularCost::ALL.iter().enumerate() {
            let sweep = sweep_epipolar_planes(g, *cost, args.grid)?;
            minima[k] = sweep.best_cost;
            if let Ok(closed) = closed_form_cost(g, *cost) {
                max_dev[k] = max_dev[k].max((closed - sweep.best_cost).abs());
            }
        }
        sweep_minima.push(minima);
    }

    let mut results_dev = 0.0f64;
    if let Some(path) = &args.results {
        let results =
            read_outputs(open_reader(path)?).map_err(|e| CliError::File(path.clone(), e))?;
        let tiles =
            !geoms.is_empty() && !results.is_empty() && results.len().is_multiple_of(geoms.len());
        if !tiles {
            return Err(CliError::File(
                path.clone(),
                FileError::Parse {
                    line: 0,
                    message: format!(
                        "{} result records do not tile {} correspondences",
                        results.len(),
                        geoms.len()
                    ),
                },
            ));
        }
        let per = results.len() / geoms.len();
        for (i, rec) in results.iter().enumerate() {
            let idx = i / per;
            let g = &geoms[idx];
            let Some(cost) = rec.method.angular_cost() else {
                continue;
            };
            if rec.status != TriangulationStatus::Ok
                && rec.status != TriangulationStatus::CheiralityViolation
            {
                continue;
            }
            let k = AngularCost::ALL.iter().position(|c| *c == cost).unwrap();
            let stored = cost.eval(rec.theta0, rec.theta1);
            results_dev = results_dev.max((stored - sweep_minima[idx][k]).abs());
            // Rays reconstructed from the stored point and depths must make
            // the stored angles with the measurements.
            for (m, c, lambda, theta) in [
                (&g.m0, &g.c0, rec.lambda0, rec.theta0),
                (&g.m1, &g.c1, rec.lambda1, rec.theta1),
            ] {
                if lambda.abs() > 1e-12 {
                    let dir = (rec.point - c) / lambda;
                    if let Ok(angle) = crate::geom::angle_between_directions(m, &dir) {
                        results_dev = results_dev.max((angle - theta).abs());
                    }
                }
            }
        }
    }

    let mut failed = false;
    for (k, cost) in AngularCost::ALL.iter().enumerate() {
        let ok = max_dev[k] <= VERIFY_DEVIATION_TOL;
        failed |= !ok;
        println!(
            "cost {cost}: max deviation {:.3e} over {} records [{}]",
            max_dev[k],
            geoms.len(),
            if ok { "ok" } else { "FAIL" }
        );
    }
    if args.results.is_some() {
        let ok = results_dev <= VERIFY_DEVIATION_TOL;
        failed |= !ok;
        println!(
            "results file: max deviation {results_dev:.3e} [{}]",
            if ok { "ok" } else { "FAIL" }
        );
    }
    if failed {
        return Err(CliError::Verify);
    }
    Ok(())
}

fn run_bench(args: &BenchArgs) -> Result<(), CliError> {
    let thresholds = args.thresholds.thresholds()?;
    let mut rows = Vec::new();
    for sigma_deg in &args.sigma_deg {
        let spec = args.scene.spec(*sigma_deg);
        let scene = generate_scene(&spec)?;
        let geoms: Vec<RelativeGeometry> = scene
            .iter()
            .map(|c| c.relative_geometry())
            .collect::<Result<_, _>>()
            .map_err(CliError::Spec)?;
        for method in Method::ALL {
            let mut stats = evaluate_method(&scene, method, spec.noise_sigma, &thresholds)?;
            stats.ns_per_point = Some(time_triangulate_ns(&geoms, method, args.repeats));
            rows.push(stats);
        }
    }
    with_output(args.output.as_deref(), |w| {
        writeln!(w, "{STATS_TSV_HEADER}")?;
        for row in &rows {
            writeln!(w, "{}", stats_tsv_row(row))?;
        }
        Ok(())
    })
}

/// Parses arguments and runs the tool, returning the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => run_gen(args),
        Command::Triangulate(args) => run_triangulate(args),
        Command::Verify(args) => run_verify(args),
        Command::Bench(args) => run_bench(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            e.report();
            e.code()
        }
    }
}
