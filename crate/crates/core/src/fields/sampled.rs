//! Fields sampled on an R³ box, and their on-disk format.
//!
//! Header (UTF-8, one `key: value` per line, first line the magic word):
//!
//! ```text
//! hopf-field
//! version: 1
//! dims: NX NY NZ
//! bounds: XLO XHI YLO YHI ZLO ZHI
//! boundary_m: M1 M2 M3
//! encoding: base64 | raw
//! data_file: NAME          (raw only, relative to the header)
//! data: BASE64...          (base64 only, must be the last line)
//! ```
//!
//! Node payload: 4 little-endian f64 per node, `Re z¹, Im z¹, Re z², Im z²`,
//! nodes in x-fastest row-major order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use base64::Engine as _;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Spinor, SpinorJet, SpinorSource};
use crate::error::{HopfError, Result};
use crate::geometry::{BoxGrid, StereoChart, Vec3, Vec4};

pub const FIELD_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "hopf-field";

/// Nodes whose norm deviates more than this are reported when normalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;
/// Nodes whose norm deviates more than this are rejected.
pub const REJECT_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataEncoding {
    Base64,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutsidePolicy {
    #[default]
    Error,
    /// Evaluate to the constant boundary spinor with zero derivatives.
    BoundaryValue,
}

#[derive(Debug, Clone)]
pub struct SampledField {
    grid: BoxGrid,
    values: Vec<Spinor>,
    derivs: Vec<[Spinor; 3]>,
    boundary_m: Vec3,
    boundary_spinor: Spinor,
    outside: OutsidePolicy,
    renormalized: usize,
    boundary_deviation: f64,
}

impl SampledField {
    /// Build from raw node values; renormalizes slightly-off nodes.
    pub fn from_nodes(grid: BoxGrid, raw: Vec<Spinor>, boundary_m: Vec3) -> Result<Self> {
        if grid.dims.iter().any(|&d| d < 3) {
            return Err(HopfError::InvalidParameter(
                "sampled fields need at least 3 nodes per axis".into(),
            ));
        }
        if raw.len() != grid.node_count() {
            return Err(HopfError::Format(format!(
                "expected {} nodes, got {}",
                grid.node_count(),
                raw.len()
            )));
        }
        if (boundary_m.norm() - 1.0).abs() > REJECT_TOL {
            return Err(HopfError::Format(format!(
                "boundary_m must be a unit vector, |m0| = {}",
                boundary_m.norm()
            )));
        }
        let boundary_m = boundary_m.normalize();
        let mut values = raw;
        let mut renormalized = 0;
        for (i, z) in values.iter_mut().enumerate() {
            let n = z.norm_sqr().sqrt();
            let dev = (n - 1.0).abs();
            if !dev.is_finite() || dev > REJECT_TOL {
                return Err(HopfError::Format(format!(
                    "node {i} has |z| = {n}, too far from 1 to renormalize"
                )));
            }
            if dev > RENORMALIZE_TOL {
                renormalized += 1;
            }
            if dev > 1e-14 {
                *z = *z * (1.0 / n);
            }
        }
        if renormalized > 0 {
            log::warn!("renormalized {renormalized} sampled nodes");
        }
        let derivs = central_differences(&grid, &values);
        let boundary_deviation = max_boundary_deviation(&grid, &values, &boundary_m);
        Ok(Self {
            grid,
            values,
            derivs,
            boundary_m,
            boundary_spinor: Spinor::from_direction(&boundary_m),
            outside: OutsidePolicy::Error,
            renormalized,
            boundary_deviation,
        })
    }

    /// Sample any spinor source onto `grid` through `chart`; the boundary
    /// value is the field at the chart's pole.
    pub fn sample<S: SpinorSource + ?Sized>(source: &S, grid: BoxGrid, chart: &StereoChart) -> Result<Self> {
        let values = (0..grid.node_count())
            .into_par_iter()
            .map(|idx| {
                let x = grid.node(grid.ijk(idx));
                source.jet_in_space(&x, chart).map(|j| j.z)
            })
            .collect::<Result<Vec<_>>>()?;
        let pole = chart.pole();
        let m0 = source.jet_on_sphere(&pole, &[Vec4::zeros(); 3])?.z.hopf_projection();
        Self::from_nodes(grid, values, m0)
    }

    pub fn with_outside_policy(mut self, policy: OutsidePolicy) -> Self {
        self.outside = policy;
        self
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn boundary_m(&self) -> Vec3 {
        self.boundary_m
    }

    pub fn renormalized_nodes(&self) -> usize {
        self.renormalized
    }

    /// Largest `|m − m₀|` over the outer shell of nodes.
    pub fn boundary_deviation(&self) -> f64 {
        self.boundary_deviation
    }

    pub fn check_boundary(&self, tol: f64) -> Result<()> {
        if self.boundary_deviation > tol {
            return Err(HopfError::OutsideDomain(format!(
                "field on the box boundary deviates from m0 by {:.3e} (> {tol:.1e})",
                self.boundary_deviation
            )));
        }
        Ok(())
    }

    pub fn node_spinor(&self, idx: usize) -> Spinor {
        self.values[idx]
    }

    pub fn node_derivatives(&self, idx: usize) -> [Spinor; 3] {
        self.derivs[idx]
    }

    fn outside(&self, x: &Vec3) -> Result<SpinorJet> {
        match self.outside {
            OutsidePolicy::Error => Err(HopfError::OutsideDomain(format!(
                "({:.4}, {:.4}, {:.4}) is outside the sampled box",
                x[0], x[1], x[2]
            ))),
            OutsidePolicy::BoundaryValue => Ok(SpinorJet::constant(self.boundary_spinor)),
        }
    }

    /// Trilinear interpolation of values and node derivatives, in the
    /// field's own coordinates.
    pub fn jet_local(&self, x: &Vec3) -> Result<SpinorJet> {
        let Some((cell, t)) = self.grid.locate(x) else {
            return self.outside(x);
        };
        let mut z = Spinor::ZERO;
        let mut dz = [Spinor::ZERO; 3];
        for corner in 0..8 {
            let o = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = 1.0;
            for a in 0..3 {
                w *= if o[a] == 1 { t[a] } else { 1.0 - t[a] };
            }
            if w == 0.0 {
                continue;
            }
            let idx = self.grid.index([cell[0] + o[0], cell[1] + o[1], cell[2] + o[2]]);
            z = z + self.values[idx] * w;
            for (d, nd) in dz.iter_mut().zip(&self.derivs[idx]) {
                *d = *d + *nd * w;
            }
        }
        // Differentiate u/|u| so the jet stays tangent to S³.
        let n = z.norm_sqr().sqrt();
        let zh = z * (1.0 / n);
        for d in dz.iter_mut() {
            let radial = zh.inner(d).re;
            *d = (*d - zh * radial) * (1.0 / n);
        }
        Ok(SpinorJet { z: zh, dz })
    }
}

impl SpinorSource for SampledField {
    fn jet_on_sphere(&self, p: &Vec4, dirs: &[Vec4; 3]) -> Result<SpinorJet> {
        let chart = StereoChart::identity();
        let x = match chart.to_space(p) {
            Ok(x) => x,
            Err(HopfError::PointAtInfinity) => {
                return self.outside(&Vec3::repeat(f64::INFINITY));
            }
            Err(e) => return Err(e),
        };
        let local = self.jet_local(&x)?;
        let mut dz = [Spinor::ZERO; 3];
        for (i, d) in dirs.iter().enumerate() {
            let dx = chart.push_to_space(p, d)?;
            for a in 0..3 {
                dz[i] = dz[i] + local.dz[a] * dx[a];
            }
        }
        Ok(SpinorJet { z: local.z, dz })
    }

    fn jet_in_space(&self, x: &Vec3, chart: &StereoChart) -> Result<SpinorJet> {
        if chart.is_identity() {
            return self.jet_local(x);
        }
        let (p, d) = chart.to_sphere_jet(x);
        self.jet_on_sphere(&p, &d)
    }
}

fn central_differences(grid: &BoxGrid, values: &[Spinor]) -> Vec<[Spinor; 3]> {
    let h = grid.spacing();
    (0..grid.node_count())
        .into_par_iter()
        .map(|idx| {
            let ijk = grid.ijk(idx);
            let mut out = [Spinor::ZERO; 3];
            for a in 0..3 {
                let at = |k: usize| {
                    let mut c = ijk;
                    c[a] = k;
                    values[grid.index(c)]
                };
                let n = grid.dims[a];
                let i = ijk[a];
                out[a] = if i == 0 {
                    (at(0) * -3.0 + at(1) * 4.0 - at(2)) * (1.0 / (2.0 * h[a]))
                } else if i == n - 1 {
                    (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * (1.0 / (2.0 * h[a]))
                } else {
                    (at(i + 1) - at(i - 1)) * (1.0 / (2.0 * h[a]))
                };
            }
            out
        })
        .collect()
}

fn max_boundary_deviation(grid: &BoxGrid, values: &[Spinor], m0: &Vec3) -> f64 {
    let mut worst: f64 = 0.0;
    for (idx, z) in values.iter().enumerate() {
        let ijk = grid.ijk(idx);
        let on_shell = (0..3).any(|a| ijk[a] == 0 || ijk[a] == grid.dims[a] - 1);
        if on_shell {
            worst = worst.max((z.hopf_projection() - m0).norm());
        }
    }
    worst
}

fn encode_payload(values: &[Spinor]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(values.len() * 32);
    for z in values {
        for v in [z.0[0].re, z.0[0].im, z.0[1].re, z.0[1].im] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

fn decode_payload(bytes: &[u8], count: usize) -> Result<Vec<Spinor>> {
    if bytes.len() != count * 32 {
        return Err(HopfError::Format(format!(
            "payload has {} bytes, expected {} ({} nodes x 32)",
            bytes.len(),
            count * 32,
            count
        )));
    }
    Ok(bytes
        .chunks_exact(32)
        .map(|c| {
            let f = |k: usize| f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            Spinor::new(Complex64::new(f(0), f(1)), Complex64::new(f(2), f(3)))
        })
        .collect())
}

fn parse_floats<const N: usize>(key: &str, value: &str) -> Result<[f64; N]> {
    let parts: Vec<f64> = value
        .split_whitespace()
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| HopfError::Format(format!("'{key}' must hold {N} numbers")))?;
    parts
        .try_into()
        .map_err(|_| HopfError::Format(format!("'{key}' must hold exactly {N} numbers")))
}

impl SampledField {
    /// Write header (and sidecar for raw encoding) to `path`.
    pub fn save(&self, path: &Path, encoding: DataEncoding) -> Result<()> {
        let g = &self.grid;
        let mut head = String::new();
        writeln!(head, "{MAGIC}").unwrap();
        writeln!(head, "version: {FIELD_FORMAT_VERSION}").unwrap();
        writeln!(head, "dims: {} {} {}", g.dims[0], g.dims[1], g.dims[2]).unwrap();
        let b = g.bounds;
        writeln!(
            head,
            "bounds: {:e} {:e} {:e} {:e} {:e} {:e}",
            b[0][0], b[0][1], b[1][0], b[1][1], b[2][0], b[2][1]
        )
        .unwrap();
        let m = self.boundary_m;
        writeln!(head, "boundary_m: {:e} {:e} {:e}", m[0], m[1], m[2]).unwrap();
        let payload = encode_payload(&self.values);
        match encoding {
            DataEncoding::Base64 => {
                writeln!(head, "encoding: base64").unwrap();
                let data = base64::engine::general_purpose::STANDARD.encode(&payload);
                writeln!(head, "data: {data}").unwrap();
            }
            DataEncoding::Raw => {
                let sidecar = sidecar_path(path);
                let name = sidecar
                    .file_name()
                    .and_then(|n| n.to_str())
                    .ok_or_else(|| HopfError::Format("unusable sidecar name".into()))?
                    .to_string();
                writeln!(head, "encoding: raw").unwrap();
                writeln!(head, "data_file: {name}").unwrap();
                fs::write(&sidecar, &payload)?;
            }
        }
        fs::write(path, head)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(HopfError::Format(format!("missing '{MAGIC}' header line")));
        }
        let mut version = None;
        let mut dims = None;
        let mut bounds = None;
        let mut m0 = None;
        let mut encoding = None;
        let mut data_file = None;
        let mut data = None;
        for line in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| HopfError::Format(format!("expected 'key: value', got '{line}'")))?;
            let value = value.trim();
            match key.trim() {
                "version" => {
                    version = Some(
                        value
                            .parse::<u32>()
                            .map_err(|_| HopfError::Format(format!("bad version '{value}'")))?,
                    )
                }
                "dims" => {
                    let d = parse_floats::<3>("dims", value)?;
                    if d.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                        return Err(HopfError::Format("dims must be positive integers".into()));
                    }
                    dims = Some(d.map(|v| v as usize));
                }
                "bounds" => {
                    let b = parse_floats::<6>("bounds", value)?;
                    bounds = Some([[b[0], b[1]], [b[2], b[3]], [b[4], b[5]]]);
                }
                "boundary_m" => m0 = Some(Vec3::from(parse_floats::<3>("boundary_m", value)?)),
                "encoding" => {
                    encoding = Some(match value {
                        "base64" => DataEncoding::Base64,
                        "raw" => DataEncoding::Raw,
                        other => return Err(HopfError::Format(format!("unknown encoding '{other}'"))),
                    })
                }
                "data_file" => data_file = Some(value.to_string()),
                "data" => data = Some(value.to_string()),
                other => return Err(HopfError::Format(format!("unknown header key '{other}'"))),
            }
        }
        match version {
            Some(FIELD_FORMAT_VERSION) => {}
            Some(v) => return Err(HopfError::Format(format!("unsupported version {v}"))),
            None => return Err(HopfError::Format("missing 'version'".into())),
        }
        let missing = |k: &str| HopfError::Format(format!("missing '{k}'"));
        let grid = BoxGrid::new(
            bounds.ok_or_else(|| missing("bounds"))?,
            dims.ok_or_else(|| missing("dims"))?,
        )
        .map_err(|e| HopfError::Format(e.to_string()))?;
        let m0 = m0.ok_or_else(|| missing("boundary_m"))?;
        let payload = match encoding.ok_or_else(|| missing("encoding"))? {
            DataEncoding::Base64 => {
                if data_file.is_some() {
                    return Err(HopfError::Format("base64 encoding takes no data_file".into()));
                }
                base64::engine::general_purpose::STANDARD
                    .decode(data.ok_or_else(|| missing("data"))?)
                    .map_err(|e| HopfError::Format(format!("bad base64 payload: {e}")))?
            }
            DataEncoding::Raw => {
                if data.is_some() {
                    return Err(HopfError::Format("raw encoding takes no inline data".into()));
                }
                let name = data_file.ok_or_else(|| missing("data_file"))?;
                let dir = path.parent().unwrap_or_else(|| Path::new("."));
                fs::read(dir.join(name))?
            }
        };
        let values = decode_payload(&payload, grid.node_count())?;
        Self::from_nodes(grid, values, m0)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".bin");
    path.with_file_name(name)
}
