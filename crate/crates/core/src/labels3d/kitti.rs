//! KITTI-style label file I/O.
//!
//! One box per line, KITTI column order:
//!
//! ```text
//! type truncation occlusion alpha left top right bottom h w l x y z rotation_y [score]
//! ```
//!
//! The 2D fields are not tracked by [`Box3D`] and are written as -1. Floats
//! are written in Rust's shortest round-trip form, so write∘read is exact.

use std::path::Path;

use super::{Box3D, Category, LabelError, LabelSet, Provenance};
use crate::num::{real, Real};

#[derive(Debug)]
pub enum ParseError {
    Io(std::io::Error),
    /// 1-based line and column (whitespace-separated token index) of the
    /// offending field.
    Malformed {
        line: usize,
        column: usize,
        msg: String,
    },
    Invalid {
        line: usize,
        source: LabelError,
    },
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseError::Io(e) => write!(f, "label io error: {e}"),
            ParseError::Malformed { line, column, msg } => {
                write!(f, "label parse error at line {line}, column {column}: {msg}")
            }
            ParseError::Invalid { line, source } => {
                write!(f, "invalid box at line {line}: {source}")
            }
        }
    }
}

impl std::error::Error for ParseError {}

impl From<std::io::Error> for ParseError {
    fn from(e: std::io::Error) -> Self {
        ParseError::Io(e)
    }
}

/// Read a label set; the frame id is the file stem, provenance is `Manual`.
pub fn read_labels<T: Real>(path: &Path) -> Result<LabelSet<T>, ParseError> {
    let text = std::fs::read_to_string(path)?;
    let frame_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "frame".to_string());
    parse_labels(&text, &frame_id)
}

pub fn parse_labels<T: Real>(text: &str, frame_id: &str) -> Result<LabelSet<T>, ParseError> {
    let mut boxes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.len() != 15 && tokens.len() != 16 {
            return Err(ParseError::Malformed {
                line,
                column: tokens.len().min(16),
                msg: format!("expected 15 or 16 columns, got {}", tokens.len()),
            });
        }
        let num = |column: usize| -> Result<f64, ParseError> {
            tokens[column]
                .parse::<f64>()
                .map_err(|_| ParseError::Malformed {
                    line,
                    column: column + 1,
                    msg: format!("bad number `{}`", tokens[column]),
                })
        };
        let category = Category::parse(tokens[0]);
        let h = num(8)?;
        let w = num(9)?;
        let l = num(10)?;
        let x = num(11)?;
        let y = num(12)?;
        let z = num(13)?;
        let yaw = num(14)?;
        let conf = if tokens.len() == 16 { num(15)? } else { 1.0 };
        let b = Box3D::new(
            real::<T>(x),
            real::<T>(y),
            real::<T>(z),
            real::<T>(h),
            real::<T>(w),
            real::<T>(l),
            real::<T>(yaw),
            real::<T>(conf),
            category,
        )
        .map_err(|source| ParseError::Invalid { line, source })?;
        boxes.push(b);
    }
    LabelSet::new(frame_id, boxes, Provenance::Manual).map_err(|source| ParseError::Invalid {
        line: 0,
        source,
    })
}

pub fn write_labels<T: Real>(path: &Path, labels: &LabelSet<T>) -> std::io::Result<()> {
    std::fs::write(path, format_labels(labels))
}

pub fn format_labels<T: Real>(labels: &LabelSet<T>) -> String {
    let mut out = String::new();
    for b in &labels.boxes {
        let f = |v: T| v.to_f64().unwrap();
        out.push_str(&format!(
            "{} -1 -1 -1 -1 -1 -1 -1 {} {} {} {} {} {} {} {}\n",
            b.category.name(),
            f(b.h),
            f(b.w),
            f(b.l),
            f(b.x),
            f(b.y),
            f(b.z),
            f(b.yaw()),
            f(b.conf()),
        ));
    }
    out
}
