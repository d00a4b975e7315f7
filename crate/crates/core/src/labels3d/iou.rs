//! Rotated-footprint IoU in the ground plane.
//!
//! Footprints are convex quadrilaterals, so the intersection is computed
//! exactly with Sutherland–Hodgman clipping followed by the shoelace area.

use nalgebra::Vector2;

use super::Box3D;
use crate::num::Real;

/// Intersection-over-union of two box footprints in the ground plane.
pub fn bev_iou<T: Real>(a: &Box3D<T>, b: &Box3D<T>) -> T {
    let pa = a.footprint().to_vec();
    let pb = b.footprint().to_vec();
    let inter = polygon_area(&clip_convex(&pa, &pb));
    if inter <= T::zero() {
        return T::zero();
    }
    let union = polygon_area(&pa) + polygon_area(&pb) - inter;
    if union <= T::zero() {
        return T::zero();
    }
    (inter / union).clamp(T::zero(), T::one())
}

/// Shoelace area of a counterclockwise polygon.
fn polygon_area<T: Real>(poly: &[Vector2<T>]) -> T {
    if poly.len() < 3 {
        return T::zero();
    }
    let mut twice = T::zero();
    for (i, p) in poly.iter().enumerate() {
        let q = &poly[(i + 1) % poly.len()];
        twice += p.x * q.y - q.x * p.y;
    }
    twice / (T::one() + T::one())
}

/// Clip `subject` against the counterclockwise convex polygon `clip`.
fn clip_convex<T: Real>(subject: &[Vector2<T>], clip: &[Vector2<T>]) -> Vec<Vector2<T>> {
    let mut output = subject.to_vec();
    for (i, edge_start) in clip.iter().enumerate() {
        if output.is_empty() {
            break;
        }
        let edge_end = &clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        for (j, current) in input.iter().enumerate() {
            let previous = &input[(j + input.len() - 1) % input.len()];
            let cur_in = is_left(edge_start, edge_end, current);
            let prev_in = is_left(edge_start, edge_end, previous);
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(previous, current, edge_start, edge_end));
                }
                output.push(*current);
            } else if prev_in {
                output.push(line_intersection(previous, current, edge_start, edge_end));
            }
        }
    }
    output
}

fn is_left<T: Real>(a: &Vector2<T>, b: &Vector2<T>, p: &Vector2<T>) -> bool {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= T::zero()
}

fn line_intersection<T: Real>(
    p1: &Vector2<T>,
    p2: &Vector2<T>,
    q1: &Vector2<T>,
    q2: &Vector2<T>,
) -> Vector2<T> {
    let d1 = p2 - p1;
    let d2 = q2 - q1;
    let denom = d1.x * d2.y - d1.y * d2.x;
    // callers only cross edges that straddle the clip line, so denom != 0
    let t = ((q1.x - p1.x) * d2.y - (q1.y - p1.y) * d2.x) / denom;
    p1 + d1 * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels3d::Category;
    use crate::num::real;
    use crate::testutil::seeded;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn footprint_box(x: f64, y: f64, l: f64, w: f64, yaw: f64) -> Box3D<f64> {
        Box3D::new(x, y, 0.75, 1.5, w, l, yaw, 1.0, Category::Car).unwrap()
    }

    /// Rasterization reference: counts cells of a `step`-spaced grid whose
    /// centers fall inside each footprint.
    fn raster_iou(a: &Box3D<f64>, b: &Box3D<f64>, step: f64) -> f64 {
        let inside = |bx: &Box3D<f64>, px: f64, py: f64| {
            let (s, c) = bx.yaw().sin_cos();
            let dx = px - bx.x;
            let dy = py - bx.y;
            let along = dx * c + dy * s;
            let across = -dx * s + dy * c;
            along.abs() <= bx.l / 2.0 && across.abs() <= bx.w / 2.0
        };
        let reach = |bx: &Box3D<f64>| (bx.l + bx.w) / 2.0;
        let x0 = (a.x - reach(a)).min(b.x - reach(b));
        let x1 = (a.x + reach(a)).max(b.x + reach(b));
        let y0 = (a.y - reach(a)).min(b.y - reach(b));
        let y1 = (a.y + reach(a)).max(b.y + reach(b));
        let (mut inter, mut union) = (0u64, 0u64);
        let nx = ((x1 - x0) / step).ceil() as u64;
        let ny = ((y1 - y0) / step).ceil() as u64;
        for iy in 0..ny {
            let py = y0 + (iy as f64 + 0.5) * step;
            for ix in 0..nx {
                let px = x0 + (ix as f64 + 0.5) * step;
                let ia = inside(a, px, py);
                let ib = inside(b, px, py);
                inter += u64::from(ia && ib);
                union += u64::from(ia || ib);
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn identical_boxes_have_unit_iou() {
        let a = footprint_box(3.0, 7.0, 4.5, 1.8, 0.4);
        assert_relative_eq!(bev_iou(&a, &a), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn distant_boxes_have_zero_iou() {
        let a = footprint_box(0.0, 0.0, 4.5, 1.8, 0.0);
        let b = footprint_box(20.0, 0.0, 4.5, 1.8, 1.0);
        assert_eq!(bev_iou(&a, &b), 0.0);
    }

    #[test]
    fn matches_millimeter_rasterization() {
        let a = footprint_box(0.0, 0.0, 4.5, 1.8, 0.0);
        let b = footprint_box(1.0, 0.0, 4.5, 1.8, 30f64.to_radians());
        let analytic = bev_iou(&a, &b);
        // frozen value of an independent numpy rasterization at 1 mm
        assert!((analytic - 0.42621415063268886).abs() < 1e-3);
        // and an in-test rasterization at the same resolution
        let raster = raster_iou(&a, &b, 0.001);
        assert!(
            (analytic - raster).abs() < 1e-3,
            "analytic {analytic} vs raster {raster}"
        );
    }

    #[test]
    fn iou_is_symmetric_and_bounded() {
        let mut rng = seeded(21);
        for _ in 0..200 {
            let a = footprint_box(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(1.0..6.0),
                rng.random_range(0.5..2.5),
                rng.random_range(-3.2..3.2),
            );
            let b = footprint_box(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(1.0..6.0),
                rng.random_range(0.5..2.5),
                rng.random_range(-3.2..3.2),
            );
            let ab = bev_iou(&a, &b);
            let ba = bev_iou(&b, &a);
            assert!((0.0..=1.0).contains(&ab));
            assert_relative_eq!(ab, ba, epsilon = 1e-9);
            if ab > 1.0 - 1e-9 {
                // unit IoU only for identical footprints
                for (ca, cb) in a.footprint().iter().zip(b.footprint().iter()) {
                    assert!((ca - cb).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn contained_box_iou_is_area_ratio() {
        let outer = footprint_box(0.0, 0.0, 4.0, 2.0, 0.3);
        let inner = footprint_box(0.0, 0.0, 2.0, 1.0, 0.3);
        assert_relative_eq!(bev_iou(&outer, &inner), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn generic_scalar_agrees_between_f32_and_f64() {
        let a64 = footprint_box(0.0, 0.0, 4.5, 1.8, 0.0);
        let b64 = footprint_box(1.0, 0.0, 4.5, 1.8, 0.5);
        let a32 = Box3D::<f32>::new(0.0, 0.0, 0.75, 1.5, 1.8, 4.5, 0.0, 1.0, Category::Car)
            .unwrap();
        let b32 = Box3D::<f32>::new(1.0, 0.0, 0.75, 1.5, 1.8, 4.5, 0.5, 1.0, Category::Car)
            .unwrap();
        let v64 = bev_iou(&a64, &b64);
        let v32 = bev_iou(&a32, &b32) as f64;
        assert!((v64 - v32).abs() < 1e-5, "{v64} vs {v32}");
    }

    #[test]
    fn scalar_real_literal_helper_round_trips() {
        assert_eq!(real::<f64>(0.25), 0.25);
        assert_eq!(real::<f32>(0.25), 0.25f32);
    }
}
