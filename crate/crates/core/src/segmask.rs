//! Multi-class and instance masks, plus the pluggable instance-segmenter
//! interface.
//!
//! The segmenter behind [`InstanceSegmenter`] is a deployment concern; the
//! in-repo [`BoxFillSegmenter`] fills each prompt box and exists so the
//! compositing and training-label paths stay deterministic under test.

use std::io::Write as _;
use std::path::Path;

use image::{GrayImage, RgbImage};
use ndarray::{Array2, Array3};

use crate::labels3d::{Box2D, Category};
use crate::num::Real;

#[derive(Debug)]
pub enum MaskError {
    /// Mask/tensor spatial dimensions disagree.
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },
    /// Scores must lie in [0, 1].
    InvalidScores,
    /// Need at least a background class and one foreground class.
    TooFewClasses,
    /// Instance category does not appear in the class list.
    UnknownClass(String),
    Io(std::io::Error),
    /// Bad sidecar index file.
    BadIndex { line: usize, msg: String },
}

impl std::fmt::Display for MaskError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaskError::ShapeMismatch { expected, got } => {
                write!(f, "mask shape mismatch: expected {expected:?}, got {got:?}")
            }
            MaskError::InvalidScores => write!(f, "class scores must lie in [0, 1]"),
            MaskError::TooFewClasses => write!(f, "need background plus at least one class"),
            MaskError::UnknownClass(name) => write!(f, "unknown class `{name}`"),
            MaskError::Io(e) => write!(f, "mask io error: {e}"),
            MaskError::BadIndex { line, msg } => {
                write!(f, "bad mask index file (line {line}): {msg}")
            }
        }
    }
}

impl std::error::Error for MaskError {}

impl From<std::io::Error> for MaskError {
    fn from(e: std::io::Error) -> Self {
        MaskError::Io(e)
    }
}

/// Per-pixel class-score maps. Channel 0 is the background class.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiClassMask<T> {
    scores: Array3<T>,
    class_names: Vec<String>,
}

impl<T: Real> MultiClassMask<T> {
    /// `scores` is (class, row, col) with values in [0, 1]; `class_names[0]`
    /// names the background.
    pub fn new(scores: Array3<T>, class_names: Vec<String>) -> Result<Self, MaskError> {
        if class_names.len() < 2 || scores.shape()[0] != class_names.len() {
            return Err(MaskError::TooFewClasses);
        }
        if scores.iter().any(|v| *v < T::zero() || *v > T::one()) {
            return Err(MaskError::InvalidScores);
        }
        Ok(Self { scores, class_names })
    }

    pub fn scores(&self) -> &Array3<T> {
        &self.scores
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn spatial_dims(&self) -> (usize, usize) {
        (self.scores.shape()[1], self.scores.shape()[2])
    }
}

/// Binary mask of one instance at image resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMask {
    pub bits: Array2<bool>,
    pub instance_id: u32,
    pub category: Category,
}

impl InstanceMask {
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Union of the thresholded foreground classes.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryForegroundMask {
    pub bits: Array2<bool>,
}

/// Pixels where any non-background class score strictly exceeds `t_fg`.
pub fn binary_foreground<T: Real>(m: &MultiClassMask<T>, t_fg: T) -> BinaryForegroundMask {
    let (h, w) = m.spatial_dims();
    let mut bits = Array2::from_elem((h, w), false);
    for class in 1..m.num_classes() {
        for row in 0..h {
            for col in 0..w {
                if m.scores[(class, row, col)] > t_fg {
                    bits[(row, col)] = true;
                }
            }
        }
    }
    BinaryForegroundMask { bits }
}

/// Area-average pooling with a majority threshold: an output cell is set
/// when at least half of its `stride × stride` block is set. The input is
/// zero-padded up to a multiple of the stride.
pub fn downsample_mask(mask: &Array2<bool>, stride: usize) -> Array2<bool> {
    assert!(stride > 0, "stride must be positive");
    let (h, w) = mask.dim();
    let oh = h.div_ceil(stride);
    let ow = w.div_ceil(stride);
    let mut out = Array2::from_elem((oh, ow), false);
    for or in 0..oh {
        for oc in 0..ow {
            let mut count = 0usize;
            for r in (or * stride)..((or + 1) * stride).min(h) {
                for c in (oc * stride)..((oc + 1) * stride).min(w) {
                    count += usize::from(mask[(r, c)]);
                }
            }
            out[(or, oc)] = 2 * count >= stride * stride;
        }
    }
    out
}

/// Burn instance masks into a one-hot multi-class map: each class channel is
/// the union of that class's instances, background is the complement.
pub fn rasterize_instances<T: Real>(
    masks: &[InstanceMask],
    class_names: &[String],
    dims: (usize, usize),
) -> Result<MultiClassMask<T>, MaskError> {
    if class_names.len() < 2 {
        return Err(MaskError::TooFewClasses);
    }
    let (h, w) = dims;
    let mut scores = Array3::from_elem((class_names.len(), h, w), T::zero());
    for mask in masks {
        if mask.bits.dim() != dims {
            return Err(MaskError::ShapeMismatch {
                expected: dims,
                got: mask.bits.dim(),
            });
        }
        let class = class_names
            .iter()
            .position(|n| n == mask.category.name())
            .ok_or_else(|| MaskError::UnknownClass(mask.category.name().to_string()))?;
        if class == 0 {
            return Err(MaskError::UnknownClass("background".into()));
        }
        for ((r, c), set) in mask.bits.indexed_iter() {
            if *set {
                scores[(class, r, c)] = T::one();
            }
        }
    }
    for r in 0..h {
        for c in 0..w {
            let fg = (1..class_names.len()).any(|k| scores[(k, r, c)] > T::zero());
            scores[(0, r, c)] = if fg { T::zero() } else { T::one() };
        }
    }
    MultiClassMask::new(scores, class_names.to_vec())
}

/// Box-promptable instance segmentation.
pub trait InstanceSegmenter: Send + Sync {
    /// One mask per prompt, in prompt order. Masks must stay within their
    /// prompt box dilated by at most 2 px.
    fn segment_instances(&self, image: &RgbImage, prompts: &[Box2D<f64>]) -> Vec<InstanceMask>;
}

/// Mock segmenter: every mask is exactly its prompt box, clipped to the
/// image. Categories default to `other`; callers attach the real ones.
#[derive(Debug, Default, Clone, Copy)]
pub struct BoxFillSegmenter;

impl InstanceSegmenter for BoxFillSegmenter {
    fn segment_instances(&self, image: &RgbImage, prompts: &[Box2D<f64>]) -> Vec<InstanceMask> {
        let (h, w) = (image.height() as usize, image.width() as usize);
        prompts
            .iter()
            .enumerate()
            .map(|(i, prompt)| {
                let mut bits = Array2::from_elem((h, w), false);
                let r0 = prompt.v_min.ceil().max(0.0) as usize;
                let c0 = prompt.u_min.ceil().max(0.0) as usize;
                let r1 = prompt.v_max.floor().min((h - 1) as f64);
                let c1 = prompt.u_max.floor().min((w - 1) as f64);
                if r1 >= 0.0 && c1 >= 0.0 {
                    for r in r0..=(r1 as usize) {
                        for c in c0..=(c1 as usize) {
                            bits[(r, c)] = true;
                        }
                    }
                }
                InstanceMask {
                    bits,
                    instance_id: i as u32,
                    category: Category::Other("unlabeled".into()),
                }
            })
            .collect()
    }
}

/// Write masks as 0/255 grayscale rasters plus a sidecar index mapping
/// instance id to category.
pub fn write_instance_masks(dir: &Path, masks: &[InstanceMask]) -> Result<(), MaskError> {
    std::fs::create_dir_all(dir)?;
    let mut index = std::fs::File::create(dir.join("index.txt"))?;
    for mask in masks {
        let (h, w) = mask.bits.dim();
        let img = GrayImage::from_fn(w as u32, h as u32, |x, y| {
            image::Luma([if mask.bits[(y as usize, x as usize)] { 255 } else { 0 }])
        });
        let name = format!("inst_{:04}.png", mask.instance_id);
        img.save(dir.join(&name))
            .map_err(|e| MaskError::Io(std::io::Error::other(e)))?;
        writeln!(index, "{} {}", mask.instance_id, mask.category.name())?;
    }
    Ok(())
}

/// Read masks written by [`write_instance_masks`].
pub fn read_instance_masks(dir: &Path) -> Result<Vec<InstanceMask>, MaskError> {
    let text = std::fs::read_to_string(dir.join("index.txt"))?;
    let mut masks = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut parts = raw.split_whitespace();
        let id: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(MaskError::BadIndex {
                line,
                msg: "expected `<id> <category>`".into(),
            })?;
        let category = Category::parse(parts.next().ok_or(MaskError::BadIndex {
            line,
            msg: "missing category".into(),
        })?);
        let img = image::open(dir.join(format!("inst_{id:04}.png")))
            .map_err(|e| MaskError::Io(std::io::Error::other(e)))?
            .into_luma8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let bits = Array2::from_shape_fn((h, w), |(r, c)| img.get_pixel(c as u32, r as u32)[0] > 127);
        masks.push(InstanceMask {
            bits,
            instance_id: id,
            category,
        });
    }
    Ok(masks)
}
