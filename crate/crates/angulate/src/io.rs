//! Plain-text file formats: correspondence files (one bearing pair per
//! line), a pose record (rotation plus camera centers), and triangulation
//! output records. All numbers are written with shortest round-trip
//! formatting, so write-then-read is lossless.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::{Matrix3, Rotation3};
use thiserror::Error;

use crate::geom::{UnitVec3, Vec3};
use crate::triangulate::{Method, TriangulationOutput, TriangulationStatus};

/// Errors from reading or writing the text formats.
#[derive(Debug, Error)]
pub enum FileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> FileError {
    FileError::Parse {
        line,
        message: message.into(),
    }
}

/// One bearing pair. Directions are normalized on read; a record whose
/// bearing is zero or non-finite is malformed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub f0: UnitVec3,
    pub f1: UnitVec3,
}

/// Records read from a correspondence file, with the line numbers of any
/// records skipped in lenient mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceFile {
    pub records: Vec<Correspondence>,
    pub skipped_lines: Vec<usize>,
}

/// Camera pose shared by every correspondence of a file: the camera-0 to
/// reference rotation and both centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRecord {
    pub rotation: Rotation3<f64>,
    pub c0: Vec3,
    pub c1: Vec3,
}

/// One triangulation result line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputRecord {
    pub method: Method,
    pub point: Vec3,
    pub lambda0: f64,
    pub lambda1: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub status: TriangulationStatus,
}

impl From<&TriangulationOutput> for OutputRecord {
    fn from(out: &TriangulationOutput) -> Self {
        Self {
            method: out.method,
            point: out.point,
            lambda0: out.lambda0,
            lambda1: out.lambda1,
            theta0: out.correction.theta0,
            theta1: out.correction.theta1,
            status: out.status,
        }
    }
}

fn is_content(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty() && !t.starts_with('#')
}

fn parse_floats(line_no: usize, line: &str, expect: usize) -> Result<Vec<f64>, FileError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != expect {
        return Err(parse_err(
            line_no,
            format!("expected {expect} fields, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("bad float `{f}`: {e}")))
        })
        .collect()
}

fn bearing(line_no: usize, x: f64, y: f64, z: f64) -> Result<UnitVec3, FileError> {
    let v = Vec3::new(x, y, z);
    // Keep already-unit bearings bit-exact; normalize anything else.
    UnitVec3::new(v)
        .or_else(|_| UnitVec3::normalize(v))
        .map_err(|e| parse_err(line_no, format!("bad bearing: {e}")))
}

/// Reads a correspondence file: six floats per line (`f0 f1`), `#` comments
/// and blank lines ignored. In strict mode the first malformed record
/// fails the read; in lenient mode malformed records are skipped and their
/// line numbers reported.
pub fn read_correspondences(
    reader: impl BufRead,
    lenient: bool,
) -> Result<CorrespondenceFile, FileError> {
    let mut records = Vec::new();
    let mut skipped_lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if !is_content(&line) {
            continue;
        }
        let parsed = parse_floats(line_no, &line, 6).and_then(|v| {
            Ok(Correspondence {
                f0: bearing(line_no, v[0], v[1], v[2])?,
                f1: bearing(line_no, v[3], v[4], v[5])?,
            })
        });
        match parsed {
            Ok(rec) => records.push(rec),
            Err(e) if lenient => {
                let _ = e;
                skipped_lines.push(line_no);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(CorrespondenceFile {
        records,
        skipped_lines,
    })
}

pub fn write_correspondences(
    mut writer: impl Write,
    records: &[Correspondence],
) -> Result<(), FileError> {
    writeln!(writer, "# f0_x f0_y f0_z f1_x f1_y f1_z")?;
    for r in records {
        let mut line = String::new();
        for c in r.f0.iter().chain(r.f1.iter()) {
            let _ = write!(line, "{c} ");
        }
        writeln!(writer, "{}", line.trim_end())?;
    }
    Ok(())
}

/// Reads the pose record: 15 floats in total (rotation row-major, then
/// `c0`, then `c1`), split across any whitespace and lines.
pub fn read_poses(reader: impl BufRead) -> Result<PoseRecord, FileError> {
    let mut values = Vec::with_capacity(15);
    let mut last_line = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if !is_content(&line) {
            continue;
        }
        last_line = line_no;
        for f in line.split_whitespace() {
            let v = f
                .parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("bad float `{f}`: {e}")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value `{f}`")));
            }
            values.push(v);
            if values.len() > 15 {
                return Err(parse_err(line_no, "pose record has more than 15 values"));
            }
        }
    }
    if values.len() != 15 {
        return Err(parse_err(
            last_line,
            format!("pose record needs 15 values, found {}", values.len()),
        ));
    }
    let m = Matrix3::new(
        values[0], values[1], values[2], values[3], values[4], values[5], values[6], values[7],
        values[8],
    );
    let ortho = (m.transpose() * m - Matrix3::identity()).norm();
    if ortho > 1e-9 || m.determinant() <= 0.0 {
        return Err(parse_err(
            last_line,
            format!("rotation matrix is not orthonormal (deviation {ortho:.2e})"),
        ));
    }
    Ok(PoseRecord {
        rotation: Rotation3::from_matrix_unchecked(m),
        c0: Vec3::new(values[9], values[10], values[11]),
        c1: Vec3::new(values[12], values[13], values[14]),
    })
}

pub fn write_poses(mut writer: impl Write, pose: &PoseRecord) -> Result<(), FileError> {
    writeln!(writer, "# rotation row-major (9), c0 (3), c1 (3)")?;
    let m = pose.rotation.matrix();
    let mut row = String::new();
    for i in 0..3 {
        for j in 0..3 {
            let _ = write!(row, "{} ", m[(i, j)]);
        }
    }
    writeln!(writer, "{}", row.trim_end())?;
    writeln!(writer, "{} {} {}", pose.c0.x, pose.c0.y, pose.c0.z)?;
    writeln!(writer, "{} {} {}", pose.c1.x, pose.c1.y, pose.c1.z)?;
    Ok(())
}

pub fn write_outputs(mut writer: impl Write, records: &[OutputRecord]) -> Result<(), FileError> {
    writeln!(
        writer,
        "# method point_x point_y point_z lambda0 lambda1 theta0 theta1 status"
    )?;
    for r in records {
        writeln!(
            writer,
            "{} {} {} {} {} {} {} {} {}",
            r.method,
            r.point.x,
            r.point.y,
            r.point.z,
            r.lambda0,
            r.lambda1,
            r.theta0,
            r.theta1,
            r.status
        )?;
    }
    Ok(())
}

pub fn read_outputs(reader: impl BufRead) -> Result<Vec<OutputRecord>, FileError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if !is_content(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(parse_err(
                line_no,
                format!("expected 9 fields, found {}", fields.len()),
            ));
        }
        let method = Method::from_str(fields[0]).map_err(|e| parse_err(line_no, e))?;
        let nums: Vec<f64> = fields[1..8]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| parse_err(line_no, format!("bad float `{f}`: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let status = TriangulationStatus::from_str(fields[8]).map_err(|e| parse_err(line_no, e))?;
        records.push(OutputRecord {
            method,
            point: Vec3::new(nums[0], nums[1], nums[2]),
            lambda0: nums[3],
            lambda1: nums[4],
            theta0: nums[5],
            theta1: nums[6],
            status,
        });
    }
    Ok(records)
}
