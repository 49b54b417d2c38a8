//! Field-theoretic estimates of the Hopf invariant: the Whitehead integral,
//! the degree integral of the lifted map `l: S³ → S³`, and the signed
//! preimage count of `l` at a regular value.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};
use crate::fields::{Site, SpinorSource};
use crate::gauge::{ensure_real, ConnectionField};
use crate::geometry::{oriented_tangent_frame, BoxGrid, S3Grid, StereoChart, Vec4};
use crate::parallel::ordered_sum;

/// Estimates further than this from an integer are flagged unconverged.
pub const ROUND_TOL: f64 = 0.1;

/// Preimage Jacobians below this make the value near-critical.
pub const CRITICAL_DET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Whitehead,
    DegreeIntegral,
    PreimageCount,
    LinkSum,
    LoopIntegral,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Whitehead,
        Method::DegreeIntegral,
        Method::PreimageCount,
        Method::LinkSum,
        Method::LoopIntegral,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Whitehead => "whitehead",
            Method::DegreeIntegral => "degree_integral",
            Method::PreimageCount => "preimage_count",
            Method::LinkSum => "link_sum",
            Method::LoopIntegral => "loop_integral",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HopfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "whitehead" => Ok(Method::Whitehead),
            "degree_integral" | "degree" => Ok(Method::DegreeIntegral),
            "preimage_count" | "preimage" => Ok(Method::PreimageCount),
            "link_sum" | "links" => Ok(Method::LinkSum),
            "loop_integral" | "loop" => Ok(Method::LoopIntegral),
            other => Err(HopfError::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// One estimate of H with its distance to the nearest integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfEstimate {
    pub method: Method,
    pub value: f64,
    pub rounded: i64,
    pub residual: f64,
    pub converged: bool,
    pub resolution: String,
}

impl HopfEstimate {
    pub fn new(method: Method, value: f64, resolution: impl Into<String>) -> Self {
        let rounded = value.round();
        let residual = (value - rounded).abs();
        Self {
            method,
            value,
            rounded: rounded as i64,
            residual,
            converged: residual <= ROUND_TOL && value.is_finite(),
            resolution: resolution.into(),
        }
    }
}

fn grid_label(grid: &S3Grid) -> String {
    format!("s3 {}x{}x{}", grid.n_eta, grid.n_xi1, grid.n_xi2)
}

fn box_label(grid: &BoxGrid) -> String {
    format!("box {}x{}x{}", grid.dims[0], grid.dims[1], grid.dims[2])
}

/// `ε^{ijk} A_i B_jk / 2 = A · (B23, B31, B12)`.
fn chern_simons_density(conn: &ConnectionField, site: &Site) -> Result<f64> {
    let s = conn.sample(site)?;
    ensure_real(&s)?;
    let b = &s.b;
    Ok(s.a[0] * b[(1, 2)] + s.a[1] * b[(2, 0)] + s.a[2] * b[(0, 1)])
}

/// `(1/16π²) ∫ A ∧ dA` over S³.
pub fn whitehead_integral(conn: &ConnectionField, grid: &S3Grid) -> Result<f64> {
    let total = ordered_sum(grid.len(), |i| {
        let site = Site::Sphere {
            point: grid.nodes[i],
            frame: grid.frame(i),
        };
        Ok(grid.weights[i] * chern_simons_density(conn, &site)?)
    })?;
    Ok(total / (16.0 * PI * PI))
}

pub fn hopf_whitehead(field: &dyn SpinorSource, grid: &S3Grid) -> Result<HopfEstimate> {
    let value = whitehead_integral(&ConnectionField::canonical(field), grid)?;
    Ok(HopfEstimate::new(Method::Whitehead, value, grid_label(grid)))
}

/// Trapezoid weight of a box node.
fn box_weight(grid: &BoxGrid, idx: usize) -> f64 {
    let h = grid.spacing();
    let ijk = grid.ijk(idx);
    (0..3)
        .map(|a| {
            if ijk[a] == 0 || ijk[a] + 1 == grid.dims[a] {
                0.5 * h[a]
            } else {
                h[a]
            }
        })
        .product()
}

/// Whitehead integral over an R³ box; the field must be constant outside it.
pub fn whitehead_integral_box(conn: &ConnectionField, grid: &BoxGrid, chart: &StereoChart) -> Result<f64> {
    let total = ordered_sum(grid.node_count(), |i| {
        let site = Site::Space {
            point: grid.node(grid.ijk(i)),
            chart: *chart,
        };
        Ok(box_weight(grid, i) * chern_simons_density(conn, &site)?)
    })?;
    Ok(total / (16.0 * PI * PI))
}

pub fn hopf_whitehead_box(field: &dyn SpinorSource, grid: &BoxGrid, chart: &StereoChart) -> Result<HopfEstimate> {
    let value = whitehead_integral_box(&ConnectionField::canonical(field), grid, chart)?;
    Ok(HopfEstimate::new(Method::Whitehead, value, box_label(grid)))
}

/// `det[l, ∂₁l, ∂₂l, ∂₃l]` for the lifted map at a site.
fn degree_density(field: &dyn SpinorSource, site: &Site) -> Result<f64> {
    let (l, dl) = field.jet(site)?.l_jet();
    Ok(Matrix4::from_columns(&[l, dl[0], dl[1], dl[2]]).determinant())
}

/// `(1/2π²) ∫ det[l, ∂l]`, the degree of `l` as a volume ratio.
pub fn gauss_degree_integral(field: &dyn SpinorSource, grid: &S3Grid) -> Result<HopfEstimate> {
    let total = ordered_sum(grid.len(), |i| {
        let site = Site::Sphere {
            point: grid.nodes[i],
            frame: grid.frame(i),
        };
        Ok(grid.weights[i] * degree_density(field, &site)?)
    })?;
    Ok(HopfEstimate::new(
        Method::DegreeIntegral,
        total / (2.0 * PI * PI),
        grid_label(grid),
    ))
}

pub fn gauss_degree_integral_box(
    field: &dyn SpinorSource,
    grid: &BoxGrid,
    chart: &StereoChart,
) -> Result<HopfEstimate> {
    let total = ordered_sum(grid.node_count(), |i| {
        let site = Site::Space {
            point: grid.node(grid.ijk(i)),
            chart: *chart,
        };
        Ok(box_weight(grid, i) * degree_density(field, &site)?)
    })?;
    Ok(HopfEstimate::new(
        Method::DegreeIntegral,
        total / (2.0 * PI * PI),
        box_label(grid),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub point: Vec4,
    pub sign: i32,
    pub jacobian: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageCount {
    pub regular_value: Vec4,
    pub degree: i64,
    pub preimages: Vec<Preimage>,
    pub seeds: usize,
}

/// Newton iteration for `l(p) = r` on S³, in the tangent frame at `r`.
fn newton_preimage(field: &dyn SpinorSource, start: &Vec4, r: &Vec4, rf: &[Vec4; 3]) -> Result<Option<Vec4>> {
    let mut p = *start;
    for _ in 0..40 {
        let e = oriented_tangent_frame(&p);
        let (l, dl) = field.jet_on_sphere(&p, &e)?.l_jet();
        let f = nalgebra::Vector3::new(l.dot(&rf[0]), l.dot(&rf[1]), l.dot(&rf[2]));
        if f.norm() < 1e-13 {
            return Ok((l.dot(r) > 0.0).then_some(p));
        }
        let j = Matrix3::from_fn(|a, b| dl[b].dot(&rf[a]));
        let Some(delta) = j.lu().solve(&(-f)) else {
            return Ok(None);
        };
        let mut delta = delta;
        if delta.norm() > 0.5 {
            delta *= 0.5 / delta.norm();
        }
        p = (p + e[0] * delta[0] + e[1] * delta[1] + e[2] * delta[2]).normalize();
    }
    Ok(None)
}

/// Signed count of the preimages of `regular_value` under `l`.
///
/// Seeds come from grid cells whose corners bracket all three transverse
/// components of `l − r`, and from grid-local minima of `|l − r|`.
pub fn degree_by_preimage(field: &dyn SpinorSource, regular_value: &Vec4, grid: &S3Grid) -> Result<PreimageCount> {
    let r = regular_value.normalize();
    let rf = oriented_tangent_frame(&r);
    let ls: Vec<Vec4> = grid
        .nodes
        .par_iter()
        .map(|p| Ok(field.jet_on_sphere(p, &[Vec4::zeros(); 3])?.z.to_unit4()))
        .collect::<Result<_>>()?;
    let (ne, n1, n2) = (grid.n_eta, grid.n_xi1, grid.n_xi2);
    let dist = |i: usize| (ls[i] - r).norm();
    let mut seeds = Vec::new();
    for ie in 0..ne {
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let idx = grid.index(ie, i1, i2);
                // bracketing cell with this node as lower corner
                if ie + 1 < ne {
                    let mut corners = [0usize; 8];
                    for (c, slot) in corners.iter_mut().enumerate() {
                        *slot = grid.index(ie + (c & 1), (i1 + ((c >> 1) & 1)) % n1, (i2 + ((c >> 2) & 1)) % n2);
                    }
                    let front = corners.iter().any(|&c| ls[c].dot(&r) > 0.0);
                    let brackets = (0..3).all(|a| {
                        let v: Vec<f64> = corners.iter().map(|&c| ls[c].dot(&rf[a])).collect();
                        v.iter().any(|&x| x <= 0.0) && v.iter().any(|&x| x >= 0.0)
                    });
                    if front && brackets {
                        seeds.push(idx);
                        continue;
                    }
                }
                // local minimum of |l - r| over the 26-neighbourhood
                let d0 = dist(idx);
                if d0 > 1.0 {
                    continue;
                }
                let mut is_min = true;
                'outer: for de in -1i64..=1 {
                    let je = ie as i64 + de;
                    if je < 0 || je >= ne as i64 {
                        continue;
                    }
                    for d1 in -1i64..=1 {
                        for d2 in -1i64..=1 {
                            if de == 0 && d1 == 0 && d2 == 0 {
                                continue;
                            }
                            let j1 = (i1 as i64 + d1).rem_euclid(n1 as i64) as usize;
                            let j2 = (i2 as i64 + d2).rem_euclid(n2 as i64) as usize;
                            if dist(grid.index(je as usize, j1, j2)) < d0 {
                                is_min = false;
                                break 'outer;
                            }
                        }
                    }
                }
                if is_min {
                    seeds.push(idx);
                }
            }
        }
    }
    let roots: Vec<Option<Vec4>> = seeds
        .par_iter()
        .map(|&i| newton_preimage(field, &grid.nodes[i], &r, &rf))
        .collect::<Result<_>>()?;
    let radius = 3.0 * grid.max_spacing();
    let mut preimages: Vec<Preimage> = Vec::new();
    for p in roots.into_iter().flatten() {
        if preimages.iter().any(|q| (q.point - p).norm() < radius) {
            continue;
        }
        let e = oriented_tangent_frame(&p);
        let (l, dl) = field.jet_on_sphere(&p, &e)?.l_jet();
        let det = Matrix4::from_columns(&[l, dl[0], dl[1], dl[2]]).determinant();
        if det.abs() < CRITICAL_DET {
            return Err(HopfError::NearCriticalValue(det));
        }
        preimages.push(Preimage {
            point: p,
            sign: if det > 0.0 { 1 } else { -1 },
            jacobian: det,
        });
    }
    Ok(PreimageCount {
        regular_value: r,
        degree: preimages.iter().map(|p| p.sign as i64).sum(),
        preimages,
        seeds: seeds.len(),
    })
}

/// Default regular value: a generic point with no special symmetry.
pub fn default_regular_value() -> Vec4 {
    Vec4::new(0.431, -0.557, 0.613, 0.358).normalize()
}

/// Preimage count with deterministic jitter of the value on near-critical hits.
pub fn preimage_estimate(
    field: &dyn SpinorSource,
    value: &Vec4,
    grid: &S3Grid,
    jitter_seed: u64,
    budget: usize,
) -> Result<(HopfEstimate, PreimageCount)> {
    let mut rng = ChaCha8Rng::seed_from_u64(jitter_seed);
    let mut v = value.normalize();
    for attempt in 0..=budget {
        match degree_by_preimage(field, &v, grid) {
            Ok(count) => {
                let est = HopfEstimate::new(Method::PreimageCount, count.degree as f64, grid_label(grid));
                return Ok((est, count));
            }
            Err(HopfError::NearCriticalValue(d)) if attempt < budget => {
                log::info!("value near-critical (det {d:.2e}); jittering");
                let kick = Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                v = (v + kick * 0.05).normalize();
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("loop returns on the last attempt")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Preset, SpinorField};

    fn preset(s: &str) -> SpinorField {
        SpinorField::preset(s.parse::<Preset>().unwrap()).unwrap()
    }

    #[test]
    fn estimate_rounding() {
        let e = HopfEstimate::new(Method::Whitehead, 1.96, "x");
        assert_eq!(e.rounded, 2);
        assert!((e.residual - 0.04).abs() < 1e-12 && e.converged);
        assert!(!HopfEstimate::new(Method::Whitehead, 1.5, "x").converged);
    }

    #[test]
    fn constant_is_exactly_zero() {
        let g = S3Grid::cubic(8).unwrap();
        let f = preset("constant");
        assert_eq!(hopf_whitehead(&f, &g).unwrap().value, 0.0);
        assert_eq!(gauss_degree_integral(&f, &g).unwrap().value, 0.0);
        assert_eq!(degree_by_preimage(&f, &default_regular_value(), &g).unwrap().degree, 0);
    }

    #[test]
    fn hopf_map_has_unit_invariant() {
        let g = S3Grid::cubic(16).unwrap();
        let f = preset("hopf");
        assert!((hopf_whitehead(&f, &g).unwrap().value - 1.0).abs() < 1e-12);
        assert!((gauss_degree_integral(&f, &g).unwrap().value - 1.0).abs() < 1e-12);
        let c = degree_by_preimage(&f, &default_regular_value(), &g).unwrap();
        assert_eq!(c.degree, 1);
        assert_eq!(c.preimages.len(), 1);
        assert!((c.preimages[0].point - default_regular_value()).norm() < 1e-10);
    }

    #[test]
    fn quaternion_cube_has_three_preimages() {
        let g = S3Grid::cubic(24).unwrap();
        let c = degree_by_preimage(&preset("power:3"), &default_regular_value(), &g).unwrap();
        assert_eq!(c.preimages.len(), 3);
        assert_eq!(c.degree, 3);
        for p in &c.preimages {
            let mut q = Vec4::new(1.0, 0.0, 0.0, 0.0);
            for _ in 0..3 {
                q = crate::geometry::quat_mul(&q, &p.point);
            }
            assert!((q - default_regular_value()).norm() < 1e-10);
        }
    }

    #[test]
    fn mirror_negates_estimates() {
        let g = S3Grid::cubic(16).unwrap();
        let f = preset("twisted:2,1").mirrored();
        assert!((hopf_whitehead(&f, &g).unwrap().value + 2.0).abs() < 0.1);
        assert!((gauss_degree_integral(&f, &g).unwrap().value + 2.0).abs() < 0.1);
        assert_eq!(degree_by_preimage(&f, &default_regular_value(), &g).unwrap().degree, -2);
    }
}
