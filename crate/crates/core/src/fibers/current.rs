use std::f64::consts::PI;

use crate::error::Result;
use crate::fields::{Site, SpinorSource};
use crate::gauge::{curvature, CurvatureForm};
use crate::geometry::{StereoChart, Vec3};

use super::transverse::TargetFrame;
use super::winding::transverse_plane;

/// Smooth current `jⁱ = (1/8π) εⁱʲᵏ B_jk` in R³.
pub fn current_at(field: &dyn SpinorSource, x: &Vec3, chart: &StereoChart) -> Result<Vec3> {
    let b = curvature(
        field,
        &Site::Space {
            point: *x,
            chart: *chart,
        },
        CurvatureForm::Spinor,
    )?;
    Ok(Vec3::new(b[(1, 2)], b[(2, 0)], b[(0, 1)]) / (4.0 * PI))
}

/// Current concentrated on the preimage of `target` with width `eps`:
/// `(ε²/π) (∇φ¹ × ∇φ²) / (|φ|² + ε²)²`. At `ε = 1` this is the smooth
/// current itself; as `ε → 0` its flux through a transverse disk tends
/// to the winding of the enclosed fiber.
pub fn string_current_at(
    field: &dyn SpinorSource,
    x: &Vec3,
    chart: &StereoChart,
    target: &Vec3,
    eps: f64,
) -> Result<Vec3> {
    let frame = TargetFrame::new(target)?;
    let (m, dm) = field.jet_in_space(x, chart)?.m_jet();
    let (phi, dphi) = frame.coordinates_jet(&m, &dm)?;
    let g1 = Vec3::new(dphi[0][0], dphi[1][0], dphi[2][0]);
    let g2 = Vec3::new(dphi[0][1], dphi[1][1], dphi[2][1]);
    let rho2 = phi[0] * phi[0] + phi[1] * phi[1];
    let e2 = eps * eps;
    Ok(g1.cross(&g2) * (e2 / PI / ((rho2 + e2) * (rho2 + e2))))
}

/// Flux of a vector field through the disk of `radius` centred at
/// `center` with normal `normal`, by a polar midpoint rule.
pub fn disk_flux<F>(current: F, center: &Vec3, normal: &Vec3, radius: f64, n_r: usize, n_theta: usize) -> Result<f64>
where
    F: Fn(&Vec3) -> Result<Vec3>,
{
    let n = normal.normalize();
    let (e1, e2) = transverse_plane(&n);
    let dr = radius / n_r as f64;
    let dth = 2.0 * PI / n_theta as f64;
    let mut flux = 0.0;
    for i in 0..n_r {
        let r = (i as f64 + 0.5) * dr;
        for k in 0..n_theta {
            let a = (k as f64 + 0.5) * dth;
            let y = center + (e1 * a.cos() + e2 * a.sin()) * r;
            flux += current(&y)?.dot(&n) * r * dr * dth;
        }
    }
    Ok(flux)
}

/// Flux of the regularized string current of `target` through a disk of
/// `radius` centred on a fiber point and normal to `tangent`. The width
/// is tied to the local transverse gradient so the core is resolved and
/// the tail outside the disk is below 1e−3 of the total.
pub fn fiber_flux(
    field: &dyn SpinorSource,
    chart: &StereoChart,
    target: &Vec3,
    point: &Vec3,
    tangent: &Vec3,
    radius: f64,
) -> Result<f64> {
    let frame = TargetFrame::new(target)?;
    let (m, dm) = field.jet_in_space(point, chart)?.m_jet();
    let (_, dphi) = frame.coordinates_jet(&m, &dm)?;
    let g1 = Vec3::new(dphi[0][0], dphi[1][0], dphi[2][0]);
    let g2 = Vec3::new(dphi[0][1], dphi[1][1], dphi[2][1]);
    let (a, b, c) = (g1.dot(&g1), g1.dot(&g2), g2.dot(&g2));
    let smallest = 0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let eps = 0.02 * radius * smallest.max(0.0).sqrt();
    disk_flux(
        |y| string_current_at(field, y, chart, target, eps),
        point,
        tangent,
        radius,
        400,
        128,
    )
}

/// Central-difference divergence of the smooth current.
pub fn current_divergence(field: &dyn SpinorSource, x: &Vec3, chart: &StereoChart, h: f64) -> Result<f64> {
    let mut div = 0.0;
    for a in 0..3 {
        let mut e = Vec3::zeros();
        e[a] = h;
        let jp = current_at(field, &(x + e), chart)?;
        let jm = current_at(field, &(x - e), chart)?;
        div += (jp[a] - jm[a]) / (2.0 * h);
    }
    Ok(div)
}
