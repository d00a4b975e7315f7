//! 3D box model, label collections, filtering, and 3D→2D box projection.

mod iou;
mod kitti;

pub use iou::bev_iou;
pub use kitti::{read_labels, write_labels, ParseError};

use nalgebra::{Vector2, Vector3};

use crate::camgeom::CameraRig;
use crate::num::{real, Real};

/// Object class. File representation is lower-case ASCII.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Category {
    Car,
    Vehicle,
    BigVehicle,
    Pedestrian,
    Cyclist,
    Other(String),
}

impl Category {
    pub fn name(&self) -> &str {
        match self {
            Category::Car => "car",
            Category::Vehicle => "vehicle",
            Category::BigVehicle => "big_vehicle",
            Category::Pedestrian => "pedestrian",
            Category::Cyclist => "cyclist",
            Category::Other(s) => s,
        }
    }

    pub fn parse(name: &str) -> Category {
        match name.to_ascii_lowercase().as_str() {
            "car" => Category::Car,
            "vehicle" => Category::Vehicle,
            "big_vehicle" => Category::BigVehicle,
            "pedestrian" => Category::Pedestrian,
            "cyclist" => Category::Cyclist,
            other => Category::Other(other.to_string()),
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelError {
    /// h, w, l must be positive.
    BadDimensions,
    /// conf must lie in [0, 1].
    BadConfidence,
    /// frame_id must be non-empty.
    EmptyFrameId,
}

impl std::fmt::Display for LabelError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelError::BadDimensions => write!(f, "box dimensions must be positive"),
            LabelError::BadConfidence => write!(f, "confidence must lie in [0, 1]"),
            LabelError::EmptyFrameId => write!(f, "frame id must be non-empty"),
        }
    }
}

impl std::error::Error for LabelError {}

/// A 3D cuboid in the ego frame: center (x, y, z), size (h, w, l), yaw about
/// ego z, confidence, and class. The length axis follows the heading
/// direction `(cos yaw, sin yaw)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Box3D<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub h: T,
    pub w: T,
    pub l: T,
    yaw: T,
    conf: T,
    pub category: Category,
}

impl<T: Real> Box3D<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x: T,
        y: T,
        z: T,
        h: T,
        w: T,
        l: T,
        yaw: T,
        conf: T,
        category: Category,
    ) -> Result<Self, LabelError> {
        if h <= T::zero() || w <= T::zero() || l <= T::zero() {
            return Err(LabelError::BadDimensions);
        }
        if conf < T::zero() || conf > T::one() {
            return Err(LabelError::BadConfidence);
        }
        Ok(Self {
            x,
            y,
            z,
            h,
            w,
            l,
            yaw: normalize_yaw(yaw),
            conf,
            category,
        })
    }

    /// Yaw normalized to (−π, π].
    pub fn yaw(&self) -> T {
        self.yaw
    }

    pub fn conf(&self) -> T {
        self.conf
    }

    /// Replace the confidence, keeping it in [0, 1].
    pub fn with_conf(mut self, conf: T) -> Result<Self, LabelError> {
        if conf < T::zero() || conf > T::one() {
            return Err(LabelError::BadConfidence);
        }
        self.conf = conf;
        Ok(self)
    }

    /// Shift the vertical center, e.g. for installation-height adjustment.
    pub fn with_z(mut self, z: T) -> Self {
        self.z = z;
        self
    }

    pub fn center(&self) -> Vector3<T> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// Ground-plane footprint corners, counterclockwise.
    pub fn footprint(&self) -> [Vector2<T>; 4] {
        let (s, c) = (self.yaw.sin(), self.yaw.cos());
        let dir = Vector2::new(c, s);
        let perp = Vector2::new(-s, c);
        let half = real::<T>(0.5);
        let center = Vector2::new(self.x, self.y);
        let dl = dir * (self.l * half);
        let dw = perp * (self.w * half);
        [
            center + dl + dw,
            center - dl + dw,
            center - dl - dw,
            center + dl - dw,
        ]
    }

    /// The 8 cuboid corners in the ego frame.
    pub fn corners(&self) -> [Vector3<T>; 8] {
        let half = real::<T>(0.5);
        let footprint = self.footprint();
        let top = self.z + self.h * half;
        let bottom = self.z - self.h * half;
        let mut out = [Vector3::zeros(); 8];
        for (i, fp) in footprint.iter().enumerate() {
            out[i] = Vector3::new(fp.x, fp.y, bottom);
            out[i + 4] = Vector3::new(fp.x, fp.y, top);
        }
        out
    }
}

/// Normalize an angle to (−π, π].
pub fn normalize_yaw<T: Real>(yaw: T) -> T {
    let two_pi = T::two_pi();
    let mut a = yaw - (yaw / two_pi).round() * two_pi;
    if a <= -T::pi() {
        a += two_pi;
    } else if a > T::pi() {
        a -= two_pi;
    }
    a
}

/// How a label set came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Manual,
    Pseudo,
    Synthetic,
}

/// An ordered per-frame collection of boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet<T> {
    pub frame_id: String,
    pub boxes: Vec<Box3D<T>>,
    pub provenance: Provenance,
}

impl<T: Real> LabelSet<T> {
    pub fn new(
        frame_id: impl Into<String>,
        boxes: Vec<Box3D<T>>,
        provenance: Provenance,
    ) -> Result<Self, LabelError> {
        let frame_id = frame_id.into();
        if frame_id.is_empty() {
            return Err(LabelError::EmptyFrameId);
        }
        Ok(Self {
            frame_id,
            boxes,
            provenance,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Keep boxes with confidence strictly greater than `t_conf`; the result
    /// is a pseudo-label set.
    pub fn filter_by_conf(&self, t_conf: T) -> LabelSet<T> {
        LabelSet {
            frame_id: self.frame_id.clone(),
            boxes: self
                .boxes
                .iter()
                .filter(|b| b.conf > t_conf)
                .cloned()
                .collect(),
            provenance: Provenance::Pseudo,
        }
    }

    /// Keep boxes whose footprint IoU with every other box in the set stays
    /// below `t_iou`. Both members of a colliding pair are dropped.
    pub fn filter_by_iou(&self, t_iou: T) -> LabelSet<T> {
        let keep: Vec<bool> = (0..self.boxes.len())
            .map(|i| {
                self.boxes
                    .iter()
                    .enumerate()
                    .all(|(j, other)| j == i || bev_iou(&self.boxes[i], other) < t_iou)
            })
            .collect();
        LabelSet {
            frame_id: self.frame_id.clone(),
            boxes: self
                .boxes
                .iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(b, _)| b.clone())
                .collect(),
            provenance: self.provenance,
        }
    }

    /// Keep boxes that project into the image with their 2D center inside it.
    pub fn in_image_filter(&self, rig: &CameraRig<T>) -> LabelSet<T> {
        LabelSet {
            frame_id: self.frame_id.clone(),
            boxes: self
                .boxes
                .iter()
                .filter(|b| box_center_visible(b, rig))
                .cloned()
                .collect(),
            provenance: self.provenance,
        }
    }
}

fn box_center_visible<T: Real>(b: &Box3D<T>, rig: &CameraRig<T>) -> bool {
    if project_box_2d(b, rig).is_err() {
        return false;
    }
    match rig.project(&b.center()) {
        Ok((pixel, _)) => rig.pixel_in_image(pixel),
        Err(_) => false,
    }
}

/// Axis-aligned pixel-space box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2D<T> {
    pub u_min: T,
    pub v_min: T,
    pub u_max: T,
    pub v_max: T,
}

impl<T: Real> Box2D<T> {
    pub fn width(&self) -> T {
        self.u_max - self.u_min
    }

    pub fn height(&self) -> T {
        self.v_max - self.v_min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> Vector2<T> {
        let half = real::<T>(0.5);
        Vector2::new(
            (self.u_min + self.u_max) * half,
            (self.v_min + self.v_max) * half,
        )
    }

    /// Axis-aligned IoU of two 2D boxes.
    pub fn iou(&self, other: &Box2D<T>) -> T {
        let iw = self.u_max.min(other.u_max) - self.u_min.max(other.u_min);
        let ih = self.v_max.min(other.v_max) - self.v_min.max(other.v_min);
        if iw <= T::zero() || ih <= T::zero() {
            return T::zero();
        }
        let inter = iw * ih;
        inter / (self.area() + other.area() - inter)
    }
}

/// The box is entirely behind the camera or projects to zero area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotVisible;

impl std::fmt::Display for NotVisible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "box is not visible in the image")
    }
}

impl std::error::Error for NotVisible {}

/// Project a cuboid's corners and return the axis-aligned hull of the
/// visible ones, clipped to the image bounds.
pub fn project_box_2d<T: Real>(b: &Box3D<T>, rig: &CameraRig<T>) -> Result<Box2D<T>, NotVisible> {
    let mut u_min = T::max_value().unwrap();
    let mut v_min = u_min;
    let mut u_max = -u_min;
    let mut v_max = -v_min;
    let mut any = false;
    for corner in b.corners() {
        if let Ok((px, _)) = rig.project(&corner) {
            any = true;
            u_min = u_min.min(px.x);
            v_min = v_min.min(px.y);
            u_max = u_max.max(px.x);
            v_max = v_max.max(px.y);
        }
    }
    if !any {
        return Err(NotVisible);
    }
    let w = real::<T>(f64::from(rig.image_width));
    let h = real::<T>(f64::from(rig.image_height));
    let clipped = Box2D {
        u_min: u_min.max(T::zero()),
        v_min: v_min.max(T::zero()),
        u_max: u_max.min(w),
        v_max: v_max.min(h),
    };
    if clipped.width() <= T::zero() || clipped.height() <= T::zero() {
        return Err(NotVisible);
    }
    Ok(clipped)
}
