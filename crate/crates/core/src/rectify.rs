//! Camera-pose unification between rigs.
//!
//! Rectifying a frame onto a background rig runs in two steps:
//!
//! 1. a rotation homography `H = I_dst · R_dst · R_srcᵀ · I_src⁻¹` warps the
//!    image as if the source camera had been rotated (about its own center)
//!    into the destination orientation and fitted with the destination
//!    intrinsics;
//! 2. the remaining difference in installation height is absorbed by
//!    shifting every label's z by `h_dst − h_src`.
//!
//! Warping is inverse + bilinear by default; destination pixels whose source
//! coordinates fall outside the input are black with validity 0.

use image::RgbImage;
use nalgebra::{Matrix3, Vector2, Vector3};
use ndarray::Array2;

use crate::camgeom::CameraRig;
use crate::labels3d::LabelSet;
use crate::num::{real, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum RectifyError {
    /// Homography (or the matrix chain producing it) is singular.
    Degenerate,
}

impl std::fmt::Display for RectifyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RectifyError::Degenerate => write!(f, "degenerate homography"),
        }
    }
}

impl std::error::Error for RectifyError {}

/// Pixel-space projective map, stored normalized so the (3,3) entry is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Homography<T> {
    matrix: Matrix3<T>,
}

impl<T: Real> Homography<T> {
    pub fn new(matrix: Matrix3<T>) -> Result<Self, RectifyError> {
        let w = matrix[(2, 2)];
        if w.abs() < real::<T>(1e-12) {
            return Err(RectifyError::Degenerate);
        }
        let normalized = matrix / w;
        if normalized.determinant().abs() <= real::<T>(1e-12) {
            return Err(RectifyError::Degenerate);
        }
        Ok(Self { matrix: normalized })
    }

    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.matrix
    }

    pub fn inverse(&self) -> Result<Self, RectifyError> {
        self.matrix
            .try_inverse()
            .ok_or(RectifyError::Degenerate)
            .and_then(Self::new)
    }

    /// Map a pixel; `None` when it lands on the line at infinity.
    pub fn apply(&self, pixel: Vector2<T>) -> Option<Vector2<T>> {
        let v = self.matrix * Vector3::new(pixel.x, pixel.y, T::one());
        if v.z.abs() < real::<T>(1e-12) {
            return None;
        }
        Some(Vector2::new(v.x / v.z, v.y / v.z))
    }
}

/// The exact pixel map between two rigs sharing a camera center and
/// differing only in orientation and intrinsics, source → destination.
pub fn rotation_homography<T: Real>(
    src: &CameraRig<T>,
    dst: &CameraRig<T>,
) -> Result<Homography<T>, RectifyError> {
    let m = dst.intrinsics.matrix()
        * dst.extrinsics.rotation()
        * src.extrinsics.rotation().transpose()
        * src.intrinsics.inverse_matrix();
    Homography::new(m)
}

/// Interpolation used by [`warp_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    Bilinear,
    /// Bit-exact sampling, useful for tests and mask-like content.
    Nearest,
}

/// Per-pixel flags marking destination pixels backed by source content.
pub type ValidityMask = Array2<bool>;

/// Inverse-warp an image through a homography.
pub fn warp_image<T: Real>(
    image: &RgbImage,
    h: &Homography<T>,
    out_size: (u32, u32),
    interp: Interp,
) -> Result<(RgbImage, ValidityMask), RectifyError> {
    let inv = h.inverse()?;
    let (out_w, out_h) = out_size;
    let (src_w, src_h) = (image.width() as i64, image.height() as i64);
    let mut out = RgbImage::new(out_w, out_h);
    let mut validity = Array2::from_elem((out_h as usize, out_w as usize), false);

    for v in 0..out_h {
        for u in 0..out_w {
            let dst = Vector2::new(real::<T>(f64::from(u)), real::<T>(f64::from(v)));
            let Some(src) = inv.apply(dst) else {
                continue;
            };
            let x = src.x.to_f64().unwrap_or(f64::NAN);
            let y = src.y.to_f64().unwrap_or(f64::NAN);
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            // tolerate float jitter at the source border before invalidating
            const EDGE_EPS: f64 = 1e-6;
            let px = match interp {
                Interp::Nearest => {
                    let xi = x.round() as i64;
                    let yi = y.round() as i64;
                    if xi < 0 || yi < 0 || xi >= src_w || yi >= src_h {
                        continue;
                    }
                    *image.get_pixel(xi as u32, yi as u32)
                }
                Interp::Bilinear => {
                    if x < -EDGE_EPS
                        || y < -EDGE_EPS
                        || x > (src_w - 1) as f64 + EDGE_EPS
                        || y > (src_h - 1) as f64 + EDGE_EPS
                    {
                        continue;
                    }
                    let x = x.clamp(0.0, (src_w - 1) as f64);
                    let y = y.clamp(0.0, (src_h - 1) as f64);
                    bilinear(image, x, y)
                }
            };
            out.put_pixel(u, v, px);
            validity[(v as usize, u as usize)] = true;
        }
    }
    Ok((out, validity))
}

fn bilinear(image: &RgbImage, x: f64, y: f64) -> image::Rgb<u8> {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (w, h) = (image.width() as i64, image.height() as i64);
    let x0 = x0 as i64;
    let y0 = y0 as i64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let p00 = image.get_pixel(x0 as u32, y0 as u32);
    let p10 = image.get_pixel(x1 as u32, y0 as u32);
    let p01 = image.get_pixel(x0 as u32, y1 as u32);
    let p11 = image.get_pixel(x1 as u32, y1 as u32);
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = f64::from(p00[c]) * (1.0 - fx) + f64::from(p10[c]) * fx;
        let bottom = f64::from(p01[c]) * (1.0 - fx) + f64::from(p11[c]) * fx;
        out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    image::Rgb(out)
}

/// Shift every label's z by `h_dst − h_src`; all other fields are untouched.
pub fn rectify_labels<T: Real>(labels: &LabelSet<T>, h_src: T, h_dst: T) -> LabelSet<T> {
    let delta = h_dst - h_src;
    LabelSet {
        frame_id: labels.frame_id.clone(),
        boxes: labels
            .boxes
            .iter()
            .map(|b| b.clone().with_z(b.z + delta))
            .collect(),
        provenance: labels.provenance,
    }
}

/// A frame re-expressed in a background rig's camera parameters.
#[derive(Debug, Clone)]
pub struct RectifiedFrame<T> {
    pub image: RgbImage,
    pub validity: ValidityMask,
    /// The destination (background) rig.
    pub rig: CameraRig<T>,
    /// Height-adjusted labels that survived the in-image filter.
    pub labels: LabelSet<T>,
}

/// Warp a frame and its labels from `rig_src` onto `rig_dst`.
pub fn rectify_frame<T: Real>(
    image: &RgbImage,
    rig_src: &CameraRig<T>,
    labels: &LabelSet<T>,
    rig_dst: &CameraRig<T>,
    interp: Interp,
) -> Result<RectifiedFrame<T>, RectifyError> {
    let h = rotation_homography(rig_src, rig_dst)?;
    let (warped, validity) = warp_image(
        image,
        &h,
        (rig_dst.image_width, rig_dst.image_height),
        interp,
    )?;
    let shifted = rectify_labels(labels, rig_src.install_height(), rig_dst.install_height());
    let kept = shifted.in_image_filter(rig_dst);
    Ok(RectifiedFrame {
        image: warped,
        validity,
        rig: rig_dst.clone(),
        labels: kept,
    })
}
