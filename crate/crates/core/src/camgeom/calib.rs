//! Calibration file I/O.
//!
//! Plain text, one key per line:
//!
//! ```text
//! intrinsics: fx skew cx 0 fy cy 0 0 1        (row-major 3x3)
//! extrinsics: r11 r12 r13 t1 ... r33 t3       (row-major 3x4, ego -> camera)
//! install_height_m: 5.0
//! image_size: 1536 864
//! ```
//!
//! The parser rejects files whose values violate the rig invariants.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use super::{CameraRig, Extrinsics, GeomError, Intrinsics};
use crate::num::{real, Real};

#[derive(Debug)]
pub enum CalibError {
    Io(std::io::Error),
    /// Malformed line or missing/duplicate key.
    Parse { line: usize, msg: String },
    /// Values parse but violate a rig invariant.
    Invalid(GeomError),
}

impl std::fmt::Display for CalibError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CalibError::Io(e) => write!(f, "calibration io error: {e}"),
            CalibError::Parse { line, msg } => {
                write!(f, "calibration parse error (line {line}): {msg}")
            }
            CalibError::Invalid(e) => write!(f, "invalid calibration: {e}"),
        }
    }
}

impl std::error::Error for CalibError {}

impl From<GeomError> for CalibError {
    fn from(e: GeomError) -> Self {
        CalibError::Invalid(e)
    }
}

impl From<std::io::Error> for CalibError {
    fn from(e: std::io::Error) -> Self {
        CalibError::Io(e)
    }
}

pub fn read_calibration<T: Real>(path: &Path) -> Result<CameraRig<T>, CalibError> {
    let text = std::fs::read_to_string(path)?;
    parse_calibration(&text)
}

pub fn parse_calibration<T: Real>(text: &str) -> Result<CameraRig<T>, CalibError> {
    let mut intr: Option<Vec<f64>> = None;
    let mut extr: Option<Vec<f64>> = None;
    let mut height: Option<Vec<f64>> = None;
    let mut size: Option<Vec<f64>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rest) = trimmed.split_once(':').ok_or(CalibError::Parse {
            line,
            msg: "expected `key: values`".into(),
        })?;
        let key = key.trim();
        let values: Vec<f64> = rest
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| CalibError::Parse {
                    line,
                    msg: format!("bad number `{tok}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        let (slot, expected) = match key {
            "intrinsics" => (&mut intr, 9),
            "extrinsics" => (&mut extr, 12),
            "install_height_m" => (&mut height, 1),
            "image_size" => (&mut size, 2),
            other => {
                return Err(CalibError::Parse {
                    line,
                    msg: format!("unknown key `{other}`"),
                })
            }
        };
        if values.len() != expected {
            return Err(CalibError::Parse {
                line,
                msg: format!("{key} expects {expected} values, got {}", values.len()),
            });
        }
        if slot.replace(values).is_some() {
            return Err(CalibError::Parse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
    }

    let missing = |name: &str| CalibError::Parse {
        line: 0,
        msg: format!("missing key `{name}`"),
    };
    let intr = intr.ok_or_else(|| missing("intrinsics"))?;
    let extr = extr.ok_or_else(|| missing("extrinsics"))?;
    let height = height.ok_or_else(|| missing("install_height_m"))?[0];
    let size = size.ok_or_else(|| missing("image_size"))?;

    let intrinsics = Intrinsics::with_skew(
        real::<T>(intr[0]),
        real::<T>(intr[4]),
        real::<T>(intr[2]),
        real::<T>(intr[5]),
        real::<T>(intr[1]),
    )?;
    let rotation = Matrix3::new(
        real::<T>(extr[0]),
        real::<T>(extr[1]),
        real::<T>(extr[2]),
        real::<T>(extr[4]),
        real::<T>(extr[5]),
        real::<T>(extr[6]),
        real::<T>(extr[8]),
        real::<T>(extr[9]),
        real::<T>(extr[10]),
    );
    let translation = Vector3::new(real::<T>(extr[3]), real::<T>(extr[7]), real::<T>(extr[11]));
    let extrinsics = Extrinsics::new(rotation, translation)?;
    let (w, h) = (size[0], size[1]);
    if w.fract() != 0.0 || h.fract() != 0.0 || w <= 0.0 || h <= 0.0 {
        return Err(CalibError::Parse {
            line: 0,
            msg: "image_size must be positive integers".into(),
        });
    }
    Ok(CameraRig::new(
        intrinsics,
        extrinsics,
        real::<T>(height),
        w as u32,
        h as u32,
    )?)
}

pub fn write_calibration<T: Real>(path: &Path, rig: &CameraRig<T>) -> std::io::Result<()> {
    std::fs::write(path, format_calibration(rig))
}

pub fn format_calibration<T: Real>(rig: &CameraRig<T>) -> String {
    let k = rig.intrinsics.matrix();
    let r = rig.extrinsics.rotation();
    let t = rig.extrinsics.translation();
    let mut out = String::new();
    out.push_str("intrinsics:");
    for row in 0..3 {
        for col in 0..3 {
            write!(out, " {}", k[(row, col)].to_f64().unwrap()).unwrap();
        }
    }
    out.push_str("\nextrinsics:");
    for row in 0..3 {
        for col in 0..3 {
            write!(out, " {}", r[(row, col)].to_f64().unwrap()).unwrap();
        }
        write!(out, " {}", t[row].to_f64().unwrap()).unwrap();
    }
    writeln!(
        out,
        "\ninstall_height_m: {}\nimage_size: {} {}",
        rig.install_height().to_f64().unwrap(),
        rig.image_width,
        rig.image_height
    )
    .unwrap();
    out
}
