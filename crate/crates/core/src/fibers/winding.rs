use std::f64::consts::PI;

use crate::error::{HopfError, Result};
use crate::fields::SpinorSource;
use crate::geometry::{StereoChart, Vec3};

use super::transverse::TargetFrame;

/// Unit vectors `(e1, e2)` with `e1 × e2 = t̂`.
pub fn transverse_plane(tangent: &Vec3) -> (Vec3, Vec3) {
    let t = tangent.normalize();
    let helper = if t[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (helper - t * helper.dot(&t)).normalize();
    (e1, t.cross(&e1))
}

fn winding_at<F>(phi: &F, point: &Vec3, e1: &Vec3, e2: &Vec3, radius: f64, samples: usize) -> Result<Option<i32>>
where
    F: Fn(&Vec3) -> Result<[f64; 2]>,
{
    let mut total = 0.0;
    let mut prev = None;
    for k in 0..=samples {
        let a = 2.0 * PI * (k % samples) as f64 / samples as f64;
        let y = point + (e1 * a.cos() + e2 * a.sin()) * radius;
        let v = phi(&y)?;
        if v[0].hypot(v[1]) < 1e-14 {
            return Ok(None);
        }
        let ang = v[1].atan2(v[0]);
        if let Some(p) = prev {
            let mut d: f64 = ang - p;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            if d.abs() > 0.75 * PI {
                return Ok(None);
            }
            total += d;
        }
        prev = Some(ang);
    }
    let w = total / (2.0 * PI);
    if (w - w.round()).abs() > 0.2 {
        return Ok(None);
    }
    Ok(Some(w.round() as i32))
}

/// Winding of `φ` around a small circle about `point`, oriented by
/// `tangent`. Shrinks, then grows, the probe radius before giving up.
pub fn winding_of<F>(phi: F, point: &Vec3, tangent: &Vec3, radius: f64, samples: usize) -> Result<i32>
where
    F: Fn(&Vec3) -> Result<[f64; 2]>,
{
    let (e1, e2) = transverse_plane(tangent);
    for scale in [1.0, 0.5, 0.25, 2.0] {
        if let Some(w) = winding_at(&phi, point, &e1, &e2, radius * scale, samples)? {
            return Ok(w);
        }
    }
    Err(HopfError::AmbiguousWinding)
}

/// Winding number of the transverse coordinates about a preimage point.
pub fn winding_number(
    field: &dyn SpinorSource,
    chart: &StereoChart,
    target: &Vec3,
    point: &Vec3,
    tangent: &Vec3,
    radius: f64,
) -> Result<i32> {
    let frame = TargetFrame::new(target)?;
    winding_of(
        |y| {
            let m = field.jet_in_space(y, chart)?.z.hopf_projection();
            frame.coordinates(&m)
        },
        point,
        tangent,
        radius,
        64,
    )
}
