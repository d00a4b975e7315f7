//! Roadside-camera data generation and BEV feature projection toolkit.
//!
//! The crate covers the deterministic machinery of a roadside 3D-detection
//! data pipeline:
//!
//! - [`camgeom`] — pinhole cameras, rigid transforms, ray/ground intersection
//! - [`labels3d`] — 3D boxes, confidence/IoU filtering, KITTI-style label I/O
//! - [`rectify`] — rotation-homography image rectification and label
//!   installation-height adjustment between camera rigs
//! - [`segmask`] — multi-class / instance masks and the pluggable instance
//!   segmenter interface
//! - [`composite`] — empty-background extraction and instance compositing
//!   onto background frames
//! - [`bev`] — feature fusion, channel attention, foreground masking, the
//!   height-based 2D→3D lift, and voxel pooling into a BEV grid
//! - [`pipeline`] — multi-round self-training orchestration over a dataset
//!   manifest with pluggable detectors and an external trainer hook
//!
//! Geometry and tensor math are generic over the scalar type (see
//! [`num::Real`]); the pipeline layer and the concrete aliases below work in
//! `f64`, which is what the homography chains need.

pub mod bev;
pub mod camgeom;
pub mod composite;
pub mod config;
pub mod fixture;
pub mod labels3d;
pub mod num;
pub mod pipeline;
pub mod raster;
pub mod rectify;
pub mod segmask;
#[cfg(test)]
pub(crate) mod testutil;
pub mod viz;

pub use num::Real;

/// f64 camera intrinsics.
pub type IntrinsicsF64 = camgeom::Intrinsics<f64>;
/// f32 camera intrinsics.
pub type IntrinsicsF32 = camgeom::Intrinsics<f32>;
/// f64 ego→camera rigid transform.
pub type ExtrinsicsF64 = camgeom::Extrinsics<f64>;
/// f64 camera rig (intrinsics + extrinsics + mounting data).
pub type CameraRigF64 = camgeom::CameraRig<f64>;
/// f32 camera rig.
pub type CameraRigF32 = camgeom::CameraRig<f32>;
/// f64 3D bounding box.
pub type Box3DF64 = labels3d::Box3D<f64>;
/// f64 label collection.
pub type LabelSetF64 = labels3d::LabelSet<f64>;
/// f64 pixel-space homography.
pub type HomographyF64 = rectify::Homography<f64>;
