use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};
use crate::geometry::Vec3;

/// `1 + m·t` below this is treated as the chart's singular point.
pub const ANTIPODE_TOL: f64 = 1e-12;

/// Right-handed frame `(u, v, t)` at a target point `t ∈ S²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetFrame {
    pub t: Vec3,
    pub u: Vec3,
    pub v: Vec3,
}

impl TargetFrame {
    pub fn new(target: &Vec3) -> Result<Self> {
        let n = target.norm();
        if !(n.is_finite() && n > 1e-12) {
            return Err(HopfError::InvalidParameter("target must be nonzero".into()));
        }
        let t = target / n;
        let helper = if t[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = (helper - t * helper.dot(&t)).normalize();
        let v = t.cross(&u);
        Ok(Self { t, u, v })
    }

    /// Stereographic coordinates of `m` projected from `−t` onto the
    /// tangent plane at `t`; `|φ| = 1` on the great circle orthogonal to `t`.
    pub fn coordinates(&self, m: &Vec3) -> Result<[f64; 2]> {
        let den = 1.0 + m.dot(&self.t);
        if den < ANTIPODE_TOL {
            return Err(HopfError::ChartSingularity);
        }
        Ok([m.dot(&self.u) / den, m.dot(&self.v) / den])
    }

    /// Coordinates and their derivatives along the three directions of `dm`.
    pub fn coordinates_jet(&self, m: &Vec3, dm: &[Vec3; 3]) -> Result<([f64; 2], [[f64; 2]; 3])> {
        let den = 1.0 + m.dot(&self.t);
        if den < ANTIPODE_TOL {
            return Err(HopfError::ChartSingularity);
        }
        let mu = m.dot(&self.u);
        let mv = m.dot(&self.v);
        let phi = [mu / den, mv / den];
        let dphi = dm.map(|d| {
            let dden = d.dot(&self.t);
            [
                d.dot(&self.u) / den - mu * dden / (den * den),
                d.dot(&self.v) / den - mv * dden / (den * den),
            ]
        });
        Ok((phi, dphi))
    }

    /// Target rotated by `angle` about `u`, for nearby-fiber push-offs.
    pub fn tilted(&self, angle: f64) -> Vec3 {
        (self.t * angle.cos() + self.v * angle.sin()).normalize()
    }
}

/// Transverse coordinates `φ` of `m` around `target`.
pub fn transverse_coordinates(m: &Vec3, target: &Vec3) -> Result<[f64; 2]> {
    TargetFrame::new(target)?.coordinates(m)
}

/// Target on S² from polar angle `θ` and azimuth `φ`.
pub fn target_from_angles(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}
