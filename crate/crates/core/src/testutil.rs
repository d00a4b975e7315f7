//! Shared helpers for the unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camgeom::{CameraRig, Intrinsics};

/// fx = fy = 1000, principal point (768, 432), 10° downward pitch, 5 m mast.
pub(crate) fn default_rig() -> CameraRig<f64> {
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

pub(crate) fn random_rig(rng: &mut ChaCha8Rng) -> CameraRig<f64> {
    let height = rng.random_range(4.0..8.0);
    random_rig_with_height(rng, height)
}

pub(crate) fn random_rig_with_height(rng: &mut ChaCha8Rng, height: f64) -> CameraRig<f64> {
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
        height,
        1536,
        864,
    )
    .unwrap()
}

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Image equality with a readable failure instead of a megabyte buffer dump.
pub(crate) fn assert_same_image(a: &image::RgbImage, b: &image::RgbImage) {
    assert_eq!(a.dimensions(), b.dimensions(), "image dimensions differ");
    for (x, y, pa) in a.enumerate_pixels() {
        let pb = b.get_pixel(x, y);
        assert_eq!(pa, pb, "first differing pixel at ({x}, {y})");
    }
}
