//! Quadrature grids on S³ and R³, the stereographic identification
//! R³ ∪ {∞} ≅ S³, and orientation bookkeeping.
//!
//! S³ carries one fixed orientation throughout the crate: a tangent frame
//! `(e1, e2, e3)` at `p` is positive when `det[p, e1, e2, e3] > 0`, i.e. the
//! orientation induced from R⁴ with the outward normal first. The standard
//! stereographic chart below is orientation preserving for that choice.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};

pub type Vec3 = Vector3<f64>;
pub type Vec4 = Vector4<f64>;

/// Determinant magnitude below which a tangent frame is rejected.
pub const FRAME_DET_TOL: f64 = 1e-10;

/// Hamilton product with components ordered `(1, i, j, k)`.
pub fn quat_mul(a: &Vec4, b: &Vec4) -> Vec4 {
    Vec4::new(
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    )
}

pub fn quat_conj(a: &Vec4) -> Vec4 {
    Vec4::new(a[0], -a[1], -a[2], -a[3])
}

/// Point of S³ in Hopf coordinates.
pub fn hopf_coordinates(eta: f64, xi1: f64, xi2: f64) -> Vec4 {
    let (se, ce) = eta.sin_cos();
    Vec4::new(se * xi1.cos(), se * xi1.sin(), ce * xi2.cos(), ce * xi2.sin())
}

/// Orthonormal, positively oriented tangent frame at a unit 4-vector,
/// built from right multiplication by the quaternion units.
pub fn oriented_tangent_frame(p: &Vec4) -> [Vec4; 3] {
    let i = Vec4::new(0.0, 1.0, 0.0, 0.0);
    let j = Vec4::new(0.0, 0.0, 1.0, 0.0);
    let k = Vec4::new(0.0, 0.0, 0.0, 1.0);
    [quat_mul(p, &i), quat_mul(p, &j), quat_mul(p, &k)]
}

/// Sign of `det[p, f1, f2, f3]` against the fixed orientation of S³.
pub fn chart_jacobian_sign(p: &Vec4, frame: &[Vec4; 3]) -> Result<i32> {
    let det = Matrix4::from_columns(&[*p, frame[0], frame[1], frame[2]]).determinant();
    if det.abs() < FRAME_DET_TOL {
        return Err(HopfError::NotAFrame(det));
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

/// Cell-centred quadrature grid on S³ in Hopf coordinates
/// `η ∈ (0, π/2)`, `ξ1, ξ2 ∈ [0, 2π)`.
///
/// Weights are the exact S³ volume of each coordinate cell,
/// `½(sin²η₊ − sin²η₋)·Δξ1·Δξ2`, so they sum to `2π²` at every resolution.
#[derive(Debug, Clone)]
pub struct S3Grid {
    pub n_eta: usize,
    pub n_xi1: usize,
    pub n_xi2: usize,
    pub nodes: Vec<Vec4>,
    pub weights: Vec<f64>,
}

impl S3Grid {
    pub fn new(n_eta: usize, n_xi1: usize, n_xi2: usize) -> Result<Self> {
        if n_eta < 2 || n_xi1 < 2 || n_xi2 < 2 {
            return Err(HopfError::InvalidParameter(format!(
                "S3 grid counts must be >= 2, got ({n_eta}, {n_xi1}, {n_xi2})"
            )));
        }
        let d_eta = 0.5 * PI / n_eta as f64;
        let d_xi1 = 2.0 * PI / n_xi1 as f64;
        let d_xi2 = 2.0 * PI / n_xi2 as f64;
        let total = n_eta * n_xi1 * n_xi2;
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for ie in 0..n_eta {
            let lo = ie as f64 * d_eta;
            let hi = lo + d_eta;
            let eta = lo + 0.5 * d_eta;
            let w = 0.5 * (hi.sin().powi(2) - lo.sin().powi(2)) * d_xi1 * d_xi2;
            for i1 in 0..n_xi1 {
                let xi1 = (i1 as f64 + 0.5) * d_xi1;
                for i2 in 0..n_xi2 {
                    let xi2 = (i2 as f64 + 0.5) * d_xi2;
                    nodes.push(hopf_coordinates(eta, xi1, xi2));
                    weights.push(w);
                }
            }
        }
        Ok(Self {
            n_eta,
            n_xi1,
            n_xi2,
            nodes,
            weights,
        })
    }

    pub fn cubic(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index(&self, ie: usize, i1: usize, i2: usize) -> usize {
        (ie * self.n_xi1 + i1) * self.n_xi2 + i2
    }

    /// Hopf angles `(η, ξ1, ξ2)` of a node.
    pub fn angles(&self, idx: usize) -> (f64, f64, f64) {
        let i2 = idx % self.n_xi2;
        let i1 = (idx / self.n_xi2) % self.n_xi1;
        let ie = idx / (self.n_xi1 * self.n_xi2);
        (
            (ie as f64 + 0.5) * 0.5 * PI / self.n_eta as f64,
            (i1 as f64 + 0.5) * 2.0 * PI / self.n_xi1 as f64,
            (i2 as f64 + 0.5) * 2.0 * PI / self.n_xi2 as f64,
        )
    }

    /// Unit coordinate frame `(∂η, ∂ξ1/sin η, ∂ξ2/cos η)` at a node; positively oriented.
    pub fn frame(&self, idx: usize) -> [Vec4; 3] {
        let (eta, xi1, xi2) = self.angles(idx);
        let (se, ce) = eta.sin_cos();
        let (s1, c1) = xi1.sin_cos();
        let (s2, c2) = xi2.sin_cos();
        [
            Vec4::new(ce * c1, ce * s1, -se * c2, -se * s2),
            Vec4::new(-s1, c1, 0.0, 0.0),
            Vec4::new(0.0, 0.0, -s2, c2),
        ]
    }

    /// Largest geodesic node spacing, used for seed deduplication.
    pub fn max_spacing(&self) -> f64 {
        let d_eta = 0.5 * PI / self.n_eta as f64;
        let d1 = 2.0 * PI / self.n_xi1 as f64;
        let d2 = 2.0 * PI / self.n_xi2 as f64;
        d_eta.max(d1).max(d2)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Rectangular node grid on R³, x-fastest ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub bounds: [[f64; 2]; 3],
    pub dims: [usize; 3],
}

impl BoxGrid {
    pub fn new(bounds: [[f64; 2]; 3], dims: [usize; 3]) -> Result<Self> {
        for a in 0..3 {
            if dims[a] < 2 {
                return Err(HopfError::InvalidParameter(format!(
                    "box grid needs at least 2 nodes per axis, axis {a} has {}",
                    dims[a]
                )));
            }
            let [lo, hi] = bounds[a];
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(HopfError::InvalidParameter(format!(
                    "box bounds on axis {a} must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { bounds, dims })
    }

    /// Cube `[-half_width, half_width]³` with `n` nodes per axis.
    pub fn cube(half_width: f64, n: usize) -> Result<Self> {
        Self::new([[-half_width, half_width]; 3], [n; 3])
    }

    pub fn spacing(&self) -> Vec3 {
        Vec3::from_fn(|a, _| (self.bounds[a][1] - self.bounds[a][0]) / (self.dims[a] - 1) as f64)
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    pub fn node(&self, ijk: [usize; 3]) -> Vec3 {
        let h = self.spacing();
        Vec3::from_fn(|a, _| self.bounds[a][0] + ijk[a] as f64 * h[a])
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (0..3).all(|a| x[a] >= self.bounds[a][0] && x[a] <= self.bounds[a][1])
    }

    /// Cell containing `x` and the local coordinates of `x` inside it.
    pub fn locate(&self, x: &Vec3) -> Option<([usize; 3], Vec3)> {
        if !self.contains(x) {
            return None;
        }
        let h = self.spacing();
        let mut cell = [0usize; 3];
        let mut t = Vec3::zeros();
        for a in 0..3 {
            let s = (x[a] - self.bounds[a][0]) / h[a];
            let c = (s.floor() as usize).min(self.dims[a] - 2);
            cell[a] = c;
            t[a] = s - c as f64;
        }
        Some((cell, t))
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.spacing().norm()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing().min()
    }
}

/// Standard stereographic inverse `R³ → S³` from the pole `(0, 0, 0, 1)`.
pub fn stereographic(x: &Vec3) -> Vec4 {
    let r2 = x.norm_squared();
    let s = r2 + 1.0;
    Vec4::new(2.0 * x[0] / s, 2.0 * x[1] / s, 2.0 * x[2] / s, (r2 - 1.0) / s)
}

/// Projection `S³ \ {pole} → R³`; the pole itself is the point at infinity.
pub fn inverse_stereographic(p: &Vec4) -> Result<Vec3> {
    let den = 1.0 - p[3];
    if den <= 1e-14 {
        return Err(HopfError::PointAtInfinity);
    }
    Ok(Vec3::new(p[0] / den, p[1] / den, p[2] / den))
}

/// Stereographic chart with a movable pole: `x ↦ q · σ⁻¹(x)` for a unit
/// quaternion `q`. Left multiplication is an orientation-preserving
/// isometry of S³, so every such chart shares the global orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StereoChart {
    pub rotation: [f64; 4],
}

impl Default for StereoChart {
    fn default() -> Self {
        Self::identity()
    }
}

impl StereoChart {
    pub fn identity() -> Self {
        Self {
            rotation: [1.0, 0.0, 0.0, 0.0],
        }
    }

    /// Chart whose point at infinity is `pole`.
    pub fn with_pole(pole: &Vec4) -> Self {
        let p = pole.normalize();
        let q = quat_mul(&p, &Vec4::new(0.0, 0.0, 0.0, -1.0));
        Self {
            rotation: [q[0], q[1], q[2], q[3]],
        }
    }

    fn q(&self) -> Vec4 {
        Vec4::from(self.rotation)
    }

    pub fn is_identity(&self) -> bool {
        self.rotation == [1.0, 0.0, 0.0, 0.0]
    }

    pub fn pole(&self) -> Vec4 {
        quat_mul(&self.q(), &Vec4::new(0.0, 0.0, 0.0, 1.0))
    }

    pub fn to_sphere(&self, x: &Vec3) -> Vec4 {
        quat_mul(&self.q(), &stereographic(x))
    }

    /// Point on S³ together with its derivatives along the coordinate axes.
    pub fn to_sphere_jet(&self, x: &Vec3) -> (Vec4, [Vec4; 3]) {
        let q = self.q();
        let r2 = x.norm_squared();
        let s = r2 + 1.0;
        let mut d = [Vec4::zeros(); 3];
        for (i, di) in d.iter_mut().enumerate() {
            let mut v = Vec4::zeros();
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                v[j] = 2.0 * delta / s - 4.0 * x[j] * x[i] / (s * s);
            }
            v[3] = 4.0 * x[i] / (s * s);
            *di = quat_mul(&q, &v);
        }
        (quat_mul(&q, &stereographic(x)), d)
    }

    pub fn to_space(&self, p: &Vec4) -> Result<Vec3> {
        inverse_stereographic(&quat_mul(&quat_conj(&self.q()), p))
    }

    /// Differential of [`Self::to_space`] at `p` applied to a tangent vector.
    pub fn push_to_space(&self, p: &Vec4, v: &Vec4) -> Result<Vec3> {
        let qc = quat_conj(&self.q());
        let pp = quat_mul(&qc, p);
        let vv = quat_mul(&qc, v);
        let den = 1.0 - pp[3];
        if den <= 1e-14 {
            return Err(HopfError::PointAtInfinity);
        }
        Ok(Vec3::new(
            vv[0] / den + pp[0] * vv[3] / (den * den),
            vv[1] / den + pp[1] * vv[3] / (den * den),
            vv[2] / den + pp[2] * vv[3] / (den * den),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit4(rng: &mut ChaCha8Rng) -> Vec4 {
        loop {
            let v = Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            if v.norm() > 0.1 {
                return v.normalize();
            }
        }
    }

    #[test]
    fn coarse_grid_volume() {
        let g = S3Grid::new(2, 2, 2).unwrap();
        assert_eq!(g.len(), 8);
        let vol = 2.0 * PI * PI;
        assert!((g.total_weight() - vol).abs() < 0.3 * vol);
        assert!(g.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn fine_grid_volume() {
        let g = S3Grid::cubic(64).unwrap();
        assert!((g.total_weight() - 2.0 * PI * PI).abs() < 1e-3);
        for p in &g.nodes {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_small_counts() {
        assert!(S3Grid::new(1, 4, 4).is_err());
        assert!(BoxGrid::cube(1.0, 1).is_err());
        assert!(BoxGrid::new([[0.0, -1.0], [0.0, 1.0], [0.0, 1.0]], [3, 3, 3]).is_err());
    }

    #[test]
    fn grid_frames_are_oriented_and_tangent() {
        let g = S3Grid::new(5, 6, 7).unwrap();
        for idx in 0..g.len() {
            let p = g.nodes[idx];
            let f = g.frame(idx);
            assert_eq!(chart_jacobian_sign(&p, &f).unwrap(), 1);
            for e in &f {
                assert!(e.dot(&p).abs() < 1e-12);
                assert!((e.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn origin_maps_to_antipode_of_pole() {
        let p = stereographic(&Vec3::zeros());
        assert!((p - Vec4::new(0.0, 0.0, 0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn stereographic_round_trip() {
        let x = Vec3::new(0.3, -1.2, 2.5);
        let back = inverse_stereographic(&stereographic(&x)).unwrap();
        assert!((back - x).norm() < 1e-12);
    }

    #[test]
    fn far_points_approach_pole() {
        let x = Vec3::new(1e6, 0.0, 0.0);
        let p = stereographic(&x);
        assert!((p - Vec4::new(0.0, 0.0, 0.0, 1.0)).norm() < 1e-5);
        assert!(matches!(
            inverse_stereographic(&Vec4::new(0.0, 0.0, 0.0, 1.0)),
            Err(HopfError::PointAtInfinity)
        ));
    }

    #[test]
    fn frame_signs() {
        let p = Vec4::new(1.0, 0.0, 0.0, 0.0);
        let f = oriented_tangent_frame(&p);
        assert_eq!(chart_jacobian_sign(&p, &f).unwrap(), 1);
        assert_eq!(chart_jacobian_sign(&p, &[f[1], f[0], f[2]]).unwrap(), -1);
        assert!(matches!(
            chart_jacobian_sign(&p, &[f[0], f[0], f[2]]),
            Err(HopfError::NotAFrame(_))
        ));
    }

    #[test]
    fn overlapping_stereographic_charts_agree_on_orientation() {
        let north = StereoChart::identity();
        let south = StereoChart::with_pole(&Vec4::new(0.0, 0.0, 0.0, -1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = Vec3::from_fn(|_, _| rng.gen_range(-3.0..3.0));
            let (p, d) = north.to_sphere_jet(&x);
            assert_eq!(chart_jacobian_sign(&p, &d).unwrap(), 1);
            // same point seen through the other chart
            let y = south.to_space(&p).unwrap();
            let (p2, d2) = south.to_sphere_jet(&y);
            assert!((p2 - p).norm() < 1e-9);
            assert_eq!(chart_jacobian_sign(&p2, &d2).unwrap(), 1);
        }
    }

    #[test]
    fn chart_pole_and_pushforward() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pole = random_unit4(&mut rng);
        let chart = StereoChart::with_pole(&pole);
        assert!((chart.pole() - pole).norm() < 1e-12);
        let x = Vec3::new(0.4, -0.7, 1.1);
        let (p, d) = chart.to_sphere_jet(&x);
        assert!((chart.to_space(&p).unwrap() - x).norm() < 1e-12);
        // push_to_space inverts the jet
        for (a, da) in d.iter().enumerate() {
            let back = chart.push_to_space(&p, da).unwrap();
            let mut e = Vec3::zeros();
            e[a] = 1.0;
            assert!((back - e).norm() < 1e-10);
        }
        // finite-difference check of the jet
        let h = 1e-6;
        for (a, da) in d.iter().enumerate() {
            let mut e = Vec3::zeros();
            e[a] = h;
            let fd = (chart.to_sphere(&(x + e)) - chart.to_sphere(&(x - e))) / (2.0 * h);
            assert!((fd - da).norm() < 1e-8);
        }
    }

    #[test]
    fn box_locate() {
        let g = BoxGrid::cube(1.0, 11).unwrap();
        let (cell, t) = g.locate(&Vec3::new(0.1, -1.0, 1.0)).unwrap();
        assert_eq!(cell, [5, 0, 9]);
        assert!((t[0] - 0.5).abs() < 1e-9 && t[1].abs() < 1e-12 && (t[2] - 1.0).abs() < 1e-12);
        assert!(g.locate(&Vec3::new(1.5, 0.0, 0.0)).is_none());
        assert_eq!(g.ijk(g.index([3, 4, 5])), [3, 4, 5]);
    }
}
