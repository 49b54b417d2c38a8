//! Parameterized test curves with known linking and framing data.

use std::f64::consts::PI;

use rand::Rng;

use super::FramedCurve;
use crate::fibers::{transverse_plane, FiberCurve};
use crate::geometry::Vec3;

fn closed(points: Vec<Vec3>) -> FiberCurve {
    FiberCurve {
        points,
        closed: true,
        winding: 1,
        target: Vec3::zeros(),
    }
}

fn sample(n: usize, f: impl Fn(f64) -> Vec3) -> Vec<Vec3> {
    (0..n).map(|i| f(2.0 * PI * i as f64 / n as f64)).collect()
}

/// Circle counterclockwise about `normal`.
pub fn circle(center: &Vec3, normal: &Vec3, radius: f64, n: usize) -> FiberCurve {
    let (e1, e2) = transverse_plane(normal);
    ellipse(center, &(e1 * radius), &(e2 * radius), n)
}

/// `center + a cos t + b sin t`.
pub fn ellipse(center: &Vec3, a: &Vec3, b: &Vec3, n: usize) -> FiberCurve {
    closed(sample(n, |t| center + a * t.cos() + b * t.sin()))
}

/// Unit circle in the xy-plane about the origin and unit circle in the
/// xz-plane about `(1, 0, 0)`, oriented to link `+1`.
pub fn hopf_link(n: usize) -> (FiberCurve, FiberCurve) {
    let a = closed(sample(n, |t| Vec3::new(t.cos(), t.sin(), 0.0)));
    let b = closed(sample(n, |t| Vec3::new(1.0 + t.cos(), 0.0, -t.sin())));
    (a, b)
}

/// Coaxial unit circles in parallel planes `z = 0` and `z = separation`.
pub fn coaxial_circles(separation: f64, n: usize) -> (FiberCurve, FiberCurve) {
    let a = circle(&Vec3::zeros(), &Vec3::z(), 1.0, n);
    let b = circle(&Vec3::new(0.0, 0.0, separation), &Vec3::z(), 1.0, n);
    (a, b)
}

/// Random pair of ellipses: a base ellipse and a second one threaded
/// through it (linked) or set beside it (usually unlinked).
pub fn random_ellipse_pair<R: Rng>(rng: &mut R, n: usize) -> (FiberCurve, FiberCurve) {
    loop {
        let rot = random_rotation(rng);
        let a1 = rng.gen_range(0.8..1.6);
        let b1 = rng.gen_range(0.5..1.2);
        let base = ellipse(&Vec3::zeros(), &(rot[0] * a1), &(rot[1] * b1), n);
        let linked = rng.gen_bool(0.5);
        let centre = if linked {
            rot[0] * (a1 * rng.gen_range(0.6..0.95)) + rot[2] * rng.gen_range(-0.1..0.1)
        } else {
            rot[0] * rng.gen_range(-2.5..2.5) + rot[2] * rng.gen_range(1.0..2.5) + rot[1] * rng.gen_range(-1.0..1.0)
        };
        let axis_a = random_unit(rng);
        let axis_b = {
            let v = random_unit(rng);
            (v - axis_a * v.dot(&axis_a)).normalize()
        };
        let other = ellipse(
            &centre,
            &(axis_a * rng.gen_range(0.5..1.5)),
            &(axis_b * rng.gen_range(0.5..1.5)),
            n,
        );
        if super::gauss_linking(&base, &other, super::LinkingRule::SolidAngle).is_ok()
            && min_distance(&base, &other) > 0.05
        {
            return (base, other);
        }
    }
}

fn min_distance(a: &FiberCurve, b: &FiberCurve) -> f64 {
    a.points
        .iter()
        .flat_map(|p| b.points.iter().map(move |q| (p - q).norm()))
        .fold(f64::INFINITY, f64::min)
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_rotation<R: Rng>(rng: &mut R) -> [Vec3; 3] {
    let a = random_unit(rng);
    let (b, c) = transverse_plane(&a);
    [a, b, c]
}

/// Unit circle in the xy-plane whose framing makes `turns` full turns
/// about the tangent.
pub fn turning_unknot(n: usize, turns: i32) -> FramedCurve {
    let base = closed(sample(n, |t| Vec3::new(t.cos(), t.sin(), 0.0)));
    let framing = sample(n, |t| {
        let radial = Vec3::new(t.cos(), t.sin(), 0.0);
        Vec3::z() * (turns as f64 * t).cos() + radial * (turns as f64 * t).sin()
    });
    FramedCurve::new(base, framing).expect("analytic framing is valid")
}

/// Torus knot winding `p` times around the axis and `q` times around the
/// tube, framed by the outward torus normal.
pub fn torus_knot(p: i32, q: i32, n: usize) -> FramedCurve {
    let (big, small) = (2.0, 0.7);
    let mut pts = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for i in 0..n {
        let t = 2.0 * PI * i as f64 / n as f64;
        let (u, v) = (p as f64 * t, q as f64 * t);
        let radial = Vec3::new(u.cos(), u.sin(), 0.0);
        let normal = radial * v.cos() + Vec3::z() * v.sin();
        pts.push(radial * big + normal * small);
        normals.push(normal);
    }
    FramedCurve::new(closed(pts), normals).expect("torus normal is transverse")
}

/// Nearly planar figure-eight with its crossing lifted by `height`,
/// framed by the projection of `z` (blackboard framing).
pub fn figure_eight(n: usize, height: f64) -> FramedCurve {
    let pts = sample(n, |t| Vec3::new(t.cos(), 0.5 * (2.0 * t).sin(), height * t.sin()));
    let framing = sample(n, |t| {
        let tangent = Vec3::new(-t.sin(), (2.0 * t).cos(), height * t.cos());
        let up = Vec3::z();
        tangent.cross(&up).cross(&tangent).normalize()
    });
    FramedCurve::new(closed(pts), framing).expect("blackboard framing is transverse")
}
