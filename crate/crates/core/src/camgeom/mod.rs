//! Pinhole camera models, rigid transforms, and ray/ground-plane intersection.
//!
//! Conventions used throughout the crate:
//!
//! - ego/ground frame: right-handed, z up, ground plane z = 0;
//! - extrinsics map ego → camera, `p_cam = R p_ego + t`;
//! - camera frame: x right, y down, z along the optical axis;
//! - angles in radians internally, degrees only at config/CLI boundaries;
//! - a camera's installation height is its origin's z above the ground.

mod calib;

pub use calib::{read_calibration, write_calibration, CalibError};

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::num::{real, Real};

/// Maximum `‖RᵀR − I‖∞` accepted for a rotation matrix.
pub const ROTATION_TOL: f64 = 1e-9;
/// Maximum disagreement between the declared installation height and the
/// camera-origin z derived from the extrinsics, in meters.
pub const HEIGHT_TOL: f64 = 1e-6;
/// Minimum camera-frame depth for a point to count as in front of the camera.
pub const MIN_DEPTH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GeomError {
    /// Focal lengths must be positive.
    InvalidIntrinsics(String),
    /// Rotation failed the orthonormality / determinant check.
    InvalidRotation { deviation: f64 },
    /// Declared installation height disagrees with the extrinsics.
    HeightMismatch { declared: f64, derived: f64 },
    /// Image dimensions must be positive.
    InvalidImageSize,
    /// Point has camera-frame depth ≤ `MIN_DEPTH`.
    BehindCamera,
    /// Back-projected ray misses the requested plane in front of the camera.
    NoIntersection,
}

impl std::fmt::Display for GeomError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeomError::InvalidIntrinsics(msg) => write!(f, "invalid intrinsics: {msg}"),
            GeomError::InvalidRotation { deviation } => {
                write!(f, "rotation is not orthonormal (deviation {deviation:.3e})")
            }
            GeomError::HeightMismatch { declared, derived } => write!(
                f,
                "install height {declared} m disagrees with extrinsics-derived {derived} m"
            ),
            GeomError::InvalidImageSize => write!(f, "image dimensions must be positive"),
            GeomError::BehindCamera => write!(f, "point is behind the camera"),
            GeomError::NoIntersection => write!(f, "ray does not reach the requested plane"),
        }
    }
}

impl std::error::Error for GeomError {}

/// Pinhole intrinsic parameters, representable as an invertible 3×3 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Intrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub skew: T,
}

impl<T: Real> Intrinsics<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T) -> Result<Self, GeomError> {
        Self::with_skew(fx, fy, cx, cy, T::zero())
    }

    pub fn with_skew(fx: T, fy: T, cx: T, cy: T, skew: T) -> Result<Self, GeomError> {
        if fx <= T::zero() || fy <= T::zero() {
            return Err(GeomError::InvalidIntrinsics(
                "focal lengths must be positive".into(),
            ));
        }
        Ok(Self { fx, fy, cx, cy, skew })
    }

    /// 3×3 calibration matrix.
    pub fn matrix(&self) -> Matrix3<T> {
        Matrix3::new(
            self.fx,
            self.skew,
            self.cx,
            T::zero(),
            self.fy,
            self.cy,
            T::zero(),
            T::zero(),
            T::one(),
        )
    }

    /// Closed-form inverse of the calibration matrix.
    pub fn inverse_matrix(&self) -> Matrix3<T> {
        // upper-triangular inverse; fx, fy > 0 guarantees existence
        let ifx = T::one() / self.fx;
        let ify = T::one() / self.fy;
        Matrix3::new(
            ifx,
            -self.skew * ifx * ify,
            (self.skew * self.cy - self.cx * self.fy) * ifx * ify,
            T::zero(),
            ify,
            -self.cy * ify,
            T::zero(),
            T::zero(),
            T::one(),
        )
    }

    /// Back-project a pixel to a camera-frame ray direction with z = 1.
    pub fn unproject(&self, pixel: Vector2<T>) -> Vector3<T> {
        self.inverse_matrix() * Vector3::new(pixel.x, pixel.y, T::one())
    }
}

/// Rigid ego → camera transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrinsics<T> {
    rotation: Matrix3<T>,
    translation: Vector3<T>,
}

impl<T: Real> Extrinsics<T> {
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self, GeomError> {
        let deviation = rotation_deviation(&rotation);
        if deviation >= ROTATION_TOL || rotation.determinant() <= T::zero() {
            return Err(GeomError::InvalidRotation { deviation });
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Matrix3<T> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<T> {
        &self.translation
    }

    /// Apply the transform: `R p + t`.
    pub fn transform(&self, point: &Vector3<T>) -> Vector3<T> {
        self.rotation * point + self.translation
    }

    /// Composition such that `a.compose(&b).transform(p) == a.transform(b.transform(p))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Inverse transform.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Camera origin expressed in the ego frame: `−Rᵀ t`.
    pub fn camera_center(&self) -> Vector3<T> {
        -(self.rotation.transpose() * self.translation)
    }

    /// `‖RᵀR − I‖∞` of the stored rotation.
    pub fn orthonormality_deviation(&self) -> f64 {
        rotation_deviation(&self.rotation)
    }
}

fn rotation_deviation<T: Real>(rotation: &Matrix3<T>) -> f64 {
    let residual = rotation.transpose() * rotation - Matrix3::identity();
    residual
        .iter()
        .map(|v| v.to_f64().unwrap_or(f64::INFINITY).abs())
        .fold(0.0, f64::max)
}

/// A roadside camera: intrinsics, pose, mounting height, and image size.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig<T> {
    pub intrinsics: Intrinsics<T>,
    pub extrinsics: Extrinsics<T>,
    install_height: T,
    pub image_width: u32,
    pub image_height: u32,
}

impl<T: Real> CameraRig<T> {
    pub fn new(
        intrinsics: Intrinsics<T>,
        extrinsics: Extrinsics<T>,
        install_height: T,
        image_width: u32,
        image_height: u32,
    ) -> Result<Self, GeomError> {
        if install_height <= T::zero() {
            return Err(GeomError::HeightMismatch {
                declared: install_height.to_f64().unwrap_or(f64::NAN),
                derived: f64::NAN,
            });
        }
        if image_width == 0 || image_height == 0 {
            return Err(GeomError::InvalidImageSize);
        }
        let derived = extrinsics.camera_center().z;
        let err = (derived - install_height).to_f64().unwrap_or(f64::INFINITY);
        if err.abs() >= HEIGHT_TOL {
            return Err(GeomError::HeightMismatch {
                declared: install_height.to_f64().unwrap_or(f64::NAN),
                derived: derived.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            intrinsics,
            extrinsics,
            install_height,
            image_width,
            image_height,
        })
    }

    /// Convenience constructor for a roadside camera standing at ground
    /// position (x, y) = (0, 0), looking along ego +y rotated by `yaw` about
    /// z, pitched down by `pitch`, and rolled about the optical axis.
    pub fn roadside(
        intrinsics: Intrinsics<T>,
        yaw: T,
        pitch: T,
        roll: T,
        install_height: T,
        image_width: u32,
        image_height: u32,
    ) -> Result<Self, GeomError> {
        let (sy, cy) = (yaw.sin(), yaw.cos());
        let (sp, cp) = (pitch.sin(), pitch.cos());
        let forward = Vector3::new(cp * sy, cp * cy, -sp);
        let up = Vector3::new(T::zero(), T::zero(), T::one());
        let right = forward.cross(&up).normalize();
        let down = forward.cross(&right);
        let (sr, cr) = (roll.sin(), roll.cos());
        let x_cam = right * cr + down * sr;
        let y_cam = down * cr - right * sr;
        let rotation = Matrix3::from_rows(&[
            x_cam.transpose(),
            y_cam.transpose(),
            forward.transpose(),
        ]);
        let center = Vector3::new(T::zero(), T::zero(), install_height);
        let translation = -(rotation * center);
        let extrinsics = Extrinsics::new(rotation, translation)?;
        Self::new(intrinsics, extrinsics, install_height, image_width, image_height)
    }

    pub fn install_height(&self) -> T {
        self.install_height
    }

    /// Camera origin in the ego frame.
    pub fn camera_center(&self) -> Vector3<T> {
        self.extrinsics.camera_center()
    }

    /// Perspective projection of an ego-frame point.
    ///
    /// Returns the pixel and the camera-frame depth; `BehindCamera` when the
    /// point's depth is ≤ `MIN_DEPTH`.
    pub fn project(&self, point: &Vector3<T>) -> Result<(Vector2<T>, T), GeomError> {
        let cam = self.extrinsics.transform(point);
        if cam.z <= real::<T>(MIN_DEPTH) {
            return Err(GeomError::BehindCamera);
        }
        let uvw = self.intrinsics.matrix() * cam;
        Ok((Vector2::new(uvw.x / uvw.z, uvw.y / uvw.z), cam.z))
    }

    /// Ego-frame ray through a pixel: (camera origin, direction).
    ///
    /// The direction is scaled so that walking `s` along it corresponds to
    /// camera-frame depth `s`.
    pub fn pixel_ray(&self, pixel: Vector2<T>) -> (Vector3<T>, Vector3<T>) {
        let dir_cam = self.intrinsics.unproject(pixel);
        let dir = self.extrinsics.rotation.transpose() * dir_cam;
        (self.camera_center(), dir)
    }

    /// Intersect a pixel's ray with the horizontal plane z = `height`.
    ///
    /// The returned point satisfies `point.z == height` exactly.
    pub fn ray_ground_intersect(
        &self,
        pixel: Vector2<T>,
        height: T,
    ) -> Result<Vector3<T>, GeomError> {
        let (origin, dir) = self.pixel_ray(pixel);
        if dir.z.abs() < real::<T>(1e-12) {
            return Err(GeomError::NoIntersection);
        }
        let s = (height - origin.z) / dir.z;
        if s <= real::<T>(MIN_DEPTH) {
            return Err(GeomError::NoIntersection);
        }
        let mut point = origin + dir * s;
        point.z = height;
        Ok(point)
    }

    /// Whether a pixel lies inside the image: u ∈ [0, W), v ∈ [0, H).
    pub fn pixel_in_image(&self, pixel: Vector2<T>) -> bool {
        pixel.x >= T::zero()
            && pixel.x < real::<T>(f64::from(self.image_width))
            && pixel.y >= T::zero()
            && pixel.y < real::<T>(f64::from(self.image_height))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_rig() -> CameraRig<f64> {
        CameraRig::roadside(
            Intrinsics::new(1000.0, 1000.0, 768.0, 432.0).unwrap(),
            0.0,
            10f64.to_radians(),
            0.0,
            5.0,
            1536,
            864,
        )
        .unwrap()
    }

    fn random_rig(rng: &mut ChaCha8Rng) -> CameraRig<f64> {
        CameraRig::roadside(
            Intrinsics::new(
                rng.random_range(600.0..1400.0),
                rng.random_range(600.0..1400.0),
                rng.random_range(700.0..850.0),
                rng.random_range(380.0..480.0),
            )
            .unwrap(),
            rng.random_range(-0.3..0.3),
            rng.random_range(0.05..0.35),
            rng.random_range(-0.05..0.05),
            rng.random_range(4.0..8.0),
            1536,
            864,
        )
        .unwrap()
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let rig = default_rig();
        // camera-frame (0, 0, d) pulled back into the ego frame
        let d = 12.5;
        let p = rig.extrinsics.inverse().transform(&Vector3::new(0.0, 0.0, d));
        let (px, depth) = rig.project(&p).unwrap();
        assert_relative_eq!(px.x, 768.0, epsilon = 1e-9);
        assert_relative_eq!(px.y, 432.0, epsilon = 1e-9);
        assert_relative_eq!(depth, d, epsilon = 1e-9);
    }

    #[test]
    fn projection_matches_reference_chain() {
        // reference values from an independent numpy projection chain
        let rig = default_rig();
        let (px, depth) = rig.project(&Vector3::new(0.0, 20.0, 0.0)).unwrap();
        assert_relative_eq!(px.x, 768.0, epsilon = 1e-9);
        assert_relative_eq!(px.y, 502.56250109902777, epsilon = 1e-9);
        assert_relative_eq!(depth, 20.56439594857881, epsilon = 1e-9);
    }

    #[test]
    fn behind_camera_is_rejected() {
        let rig = default_rig();
        assert_eq!(
            rig.project(&Vector3::new(0.0, -20.0, 0.0)),
            Err(GeomError::BehindCamera)
        );
    }

    #[test]
    fn visibility_bound_matches_image_size() {
        let rig = default_rig();
        assert!(rig.pixel_in_image(Vector2::new(0.0, 0.0)));
        assert!(rig.pixel_in_image(Vector2::new(1535.999, 863.999)));
        assert!(!rig.pixel_in_image(Vector2::new(1536.0, 100.0)));
        assert!(!rig.pixel_in_image(Vector2::new(100.0, 864.0)));
        assert!(!rig.pixel_in_image(Vector2::new(-0.001, 100.0)));
    }

    #[test]
    fn straight_down_principal_ray_lands_beneath_camera() {
        // camera looking straight down from 5 m
        let rotation = Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
        let center = Vector3::new(0.0, 0.0, 5.0);
        let extr = Extrinsics::new(rotation, -(rotation * center)).unwrap();
        let rig = CameraRig::new(
            Intrinsics::new(1000.0, 1000.0, 768.0, 432.0).unwrap(),
            extr,
            5.0,
            1536,
            864,
        )
        .unwrap();
        let p = rig
            .ray_ground_intersect(Vector2::new(768.0, 432.0), 0.0)
            .unwrap();
        assert_relative_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.y, 0.0, epsilon = 1e-12);
        assert_eq!(p.z, 0.0);
    }

    #[test]
    fn plane_above_camera_has_no_intersection() {
        let rig = default_rig();
        // downward-looking ray cannot reach a plane above the camera
        let err = rig
            .ray_ground_intersect(Vector2::new(768.0, 600.0), 7.0)
            .unwrap_err();
        assert_eq!(err, GeomError::NoIntersection);
    }

    #[test]
    fn ray_ground_matches_reference_solve() {
        // reference values from an independent parametric ray-plane solve
        let rig = default_rig();
        let p = rig
            .ray_ground_intersect(Vector2::new(768.0, 600.0), 0.0)
            .unwrap();
        assert_relative_eq!(p.x, 0.0, epsilon = 1e-9);
        assert_relative_eq!(p.y, 14.090924057771955, epsilon = 1e-9);
        assert_eq!(p.z, 0.0);
    }

    #[test]
    fn invert_identity_is_identity() {
        let id = Extrinsics::<f64>::identity();
        let inv = id.inverse();
        assert_eq!(inv.rotation(), id.rotation());
        assert_eq!(inv.translation(), id.translation());
    }

    #[test]
    fn invert_is_involutive_and_composes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let rig = random_rig(&mut rng);
            let e = &rig.extrinsics;
            let double = e.inverse().inverse();
            for (a, b) in double.rotation.iter().zip(e.rotation.iter()) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
            for (a, b) in double.translation.iter().zip(e.translation.iter()) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
            let composed = e.compose(&e.inverse());
            let p = Vector3::new(1.0, 2.0, 3.0);
            let q = composed.transform(&p);
            assert_relative_eq!((q - p).norm(), 0.0, epsilon = 1e-12);
            assert!(composed.orthonormality_deviation() < ROTATION_TOL);
        }
    }

    #[test]
    fn project_ray_ground_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rig = random_rig(&mut rng);
            let pixel = Vector2::new(
                rng.random_range(0.0..1536.0),
                rng.random_range(500.0..864.0),
            );
            let height = rng.random_range(-0.5..2.0);
            let Ok(point) = rig.ray_ground_intersect(pixel, height) else {
                continue;
            };
            assert_eq!(point.z, height);
            let (back, _) = rig.project(&point).unwrap();
            assert!((back - pixel).norm() < 1e-6, "pixel {pixel:?} -> {back:?}");
        }
    }

    #[test]
    fn rejects_bad_rotation_and_height() {
        let skewed = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            Extrinsics::new(skewed, Vector3::zeros()),
            Err(GeomError::InvalidRotation { .. })
        ));

        let rig = default_rig();
        assert!(matches!(
            CameraRig::new(
                rig.intrinsics.clone(),
                rig.extrinsics.clone(),
                4.0, // disagrees with the extrinsics-derived 5 m
                1536,
                864
            ),
            Err(GeomError::HeightMismatch { .. })
        ));
    }

    #[test]
    fn rejects_reflection() {
        let reflection = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            Extrinsics::new(reflection, Vector3::zeros()),
            Err(GeomError::InvalidRotation { .. })
        ));
    }
}
