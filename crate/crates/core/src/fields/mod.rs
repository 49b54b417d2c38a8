//! Spinor fields `z: S³ → S³ ⊂ C²`, the induced unit vectors `m = z†σz`
//! and `l`, analytic presets, and sampled fields on R³ boxes.

mod sampled;

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};
use crate::geometry::{quat_mul, StereoChart, Vec3, Vec4};

pub use sampled::{DataEncoding, OutsidePolicy, SampledField, FIELD_FORMAT_VERSION};

/// Normalized two-component complex field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor(pub [Complex64; 2]);

impl Spinor {
    pub const ZERO: Spinor = Spinor([Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);

    pub fn new(up: Complex64, down: Complex64) -> Self {
        Self([up, down])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn normalized(&self) -> Self {
        *self * (1.0 / self.norm_sqr().sqrt())
    }

    /// Hermitian product `self† · other`.
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self([self.0[0] * c, self.0[1] * c])
    }

    /// `z = (l⁰ + i l¹, l² + i l³)`.
    pub fn from_unit4(l: &Vec4) -> Self {
        Self([Complex64::new(l[0], l[1]), Complex64::new(l[2], l[3])])
    }

    pub fn to_unit4(&self) -> Vec4 {
        Vec4::new(self.0[0].re, self.0[0].im, self.0[1].re, self.0[1].im)
    }

    /// `m^a = z† σ^a z`.
    pub fn hopf_projection(&self) -> Vec3 {
        pauli_bilinear(self, self)
    }

    /// A spinor whose projection is `m`, with a fixed phase convention.
    pub fn from_direction(m: &Vec3) -> Self {
        let m = m.normalize();
        if m[2] > -1.0 + 1e-12 {
            let a = ((1.0 + m[2]) / 2.0).sqrt();
            let b = Complex64::new(m[0], m[1]) / (2.0 * a);
            Self([Complex64::new(a, 0.0), b])
        } else {
            Self([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
        }
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, o: Spinor) -> Spinor {
        Spinor([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, o: Spinor) -> Spinor {
        Spinor([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, s: f64) -> Spinor {
        Spinor([self.0[0] * s, self.0[1] * s])
    }
}

/// `Re(z† σ^a w)` for `a = 1, 2, 3`.
pub fn pauli_bilinear(z: &Spinor, w: &Spinor) -> Vec3 {
    let [z1, z2] = z.0;
    let [w1, w2] = w.0;
    let i = Complex64::i();
    Vec3::new(
        (z1.conj() * w2 + z2.conj() * w1).re,
        (-i * z1.conj() * w2 + i * z2.conj() * w1).re,
        (z1.conj() * w1 - z2.conj() * w2).re,
    )
}

pub fn hopf_projection(z: &Spinor) -> Vec3 {
    z.hopf_projection()
}

pub fn spinor_from_unit4(l: &Vec4) -> Spinor {
    Spinor::from_unit4(l)
}

pub fn unit4_from_spinor(z: &Spinor) -> Vec4 {
    z.to_unit4()
}

/// A spinor and its derivatives along three directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorJet {
    pub z: Spinor,
    pub dz: [Spinor; 3],
}

impl SpinorJet {
    pub fn constant(z: Spinor) -> Self {
        Self {
            z,
            dz: [Spinor::ZERO; 3],
        }
    }

    /// `m` and its directional derivatives `∂_i m = 2 Re(z† σ ∂_i z)`.
    pub fn m_jet(&self) -> (Vec3, [Vec3; 3]) {
        let m = self.z.hopf_projection();
        let dm = self.dz.map(|d| 2.0 * pauli_bilinear(&self.z, &d));
        (m, dm)
    }

    /// `l` and its directional derivatives.
    pub fn l_jet(&self) -> (Vec4, [Vec4; 3]) {
        (self.z.to_unit4(), self.dz.map(|d| d.to_unit4()))
    }
}

/// Where a field is probed: a point of S³ with tangent directions, or a
/// point of R³ read through a stereographic chart (directions = axes).
#[derive(Debug, Clone, Copy)]
pub enum Site {
    Sphere { point: Vec4, frame: [Vec4; 3] },
    Space { point: Vec3, chart: StereoChart },
}

impl Site {
    /// The S³ point and the ambient R⁴ images of the three directions.
    pub fn sphere_jet(&self) -> (Vec4, [Vec4; 3]) {
        match self {
            Site::Sphere { point, frame } => (*point, *frame),
            Site::Space { point, chart } => chart.to_sphere_jet(point),
        }
    }
}

/// Anything that evaluates a normalized spinor with first derivatives.
pub trait SpinorSource: Sync {
    fn jet_on_sphere(&self, p: &Vec4, dirs: &[Vec4; 3]) -> Result<SpinorJet>;

    fn jet_in_space(&self, x: &Vec3, chart: &StereoChart) -> Result<SpinorJet> {
        let (p, d) = chart.to_sphere_jet(x);
        self.jet_on_sphere(&p, &d)
    }

    fn jet(&self, site: &Site) -> Result<SpinorJet> {
        match site {
            Site::Sphere { point, frame } => self.jet_on_sphere(point, frame),
            Site::Space { point, chart } => self.jet_in_space(point, chart),
        }
    }
}

/// Named analytic presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preset {
    Constant,
    Hopf,
    Twisted { p: u32, q: u32 },
    Power { n: u32 },
}

impl Preset {
    /// Hopf invariant the preset is constructed to carry.
    pub fn expected_invariant(&self) -> i64 {
        match *self {
            Preset::Constant => 0,
            Preset::Hopf => 1,
            Preset::Twisted { p, q } => p as i64 * q as i64,
            Preset::Power { n } => n as i64,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Constant => write!(f, "constant"),
            Preset::Hopf => write!(f, "hopf"),
            Preset::Twisted { p, q } => write!(f, "twisted:{p},{q}"),
            Preset::Power { n } => write!(f, "power:{n}"),
        }
    }
}

fn parse_winding(s: &str, what: &str) -> Result<u32> {
    s.trim()
        .parse::<u32>()
        .map_err(|_| HopfError::InvalidParameter(format!("{what} must be a non-negative integer, got '{}'", s.trim())))
}

impl FromStr for Preset {
    type Err = HopfError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (s.trim(), None),
        };
        let preset = match (name, params) {
            ("constant", None) => Preset::Constant,
            ("hopf", None) => Preset::Hopf,
            ("twisted", Some(p)) => {
                let parts: Vec<&str> = p.split(',').collect();
                if parts.len() != 2 {
                    return Err(HopfError::InvalidParameter(format!(
                        "twisted expects two integers p,q, got '{p}'"
                    )));
                }
                Preset::Twisted {
                    p: parse_winding(parts[0], "twisted p")?,
                    q: parse_winding(parts[1], "twisted q")?,
                }
            }
            ("power", Some(p)) => Preset::Power {
                n: parse_winding(p, "power n")?,
            },
            _ => {
                return Err(HopfError::InvalidParameter(format!(
                    "unknown preset '{s}' (expected constant, hopf, twisted:P,Q, power:N)"
                )))
            }
        };
        preset.validate()?;
        Ok(preset)
    }
}

impl Preset {
    fn validate(&self) -> Result<()> {
        if let Preset::Twisted { p, q } = *self {
            if p < 1 || q < 1 {
                return Err(HopfError::InvalidParameter(format!(
                    "twisted requires p, q >= 1, got ({p}, {q})"
                )));
            }
        }
        Ok(())
    }
}

/// The spinor field. Presets are maps `S³ → S³` with exact derivatives;
/// sampled fields live on an R³ box in the identity stereographic chart.
#[derive(Debug, Clone)]
pub enum SpinorField {
    Constant(Spinor),
    Hopf,
    Twisted {
        p: u32,
        q: u32,
    },
    Power {
        n: u32,
    },
    /// Precomposition with the orientation-reversing reflection `l³ → −l³`.
    Mirrored(Box<SpinorField>),
    Sampled(SampledField),
}

impl SpinorField {
    pub fn preset(preset: Preset) -> Result<Self> {
        preset.validate()?;
        Ok(match preset {
            Preset::Constant => SpinorField::Constant(Spinor::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))),
            Preset::Hopf => SpinorField::Hopf,
            Preset::Twisted { p, q } => SpinorField::Twisted { p, q },
            Preset::Power { n } => SpinorField::Power { n },
        })
    }

    pub fn mirrored(self) -> Self {
        SpinorField::Mirrored(Box::new(self))
    }

    pub fn is_sampled(&self) -> bool {
        match self {
            SpinorField::Sampled(_) => true,
            SpinorField::Mirrored(inner) => inner.is_sampled(),
            _ => false,
        }
    }

    pub fn as_sampled(&self) -> Option<&SampledField> {
        match self {
            SpinorField::Sampled(s) => Some(s),
            _ => None,
        }
    }
}

pub fn preset_field(preset: Preset) -> Result<SpinorField> {
    SpinorField::preset(preset)
}

fn reflect(v: &Vec4) -> Vec4 {
    Vec4::new(v[0], v[1], v[2], -v[3])
}

fn twisted_jet(p: u32, q: u32, x: &Vec4, dirs: &[Vec4; 3]) -> SpinorJet {
    let z = Spinor::from_unit4(x);
    let [z1, z2] = z.0;
    let w = Spinor::new(z1.powu(p), z2.powu(q));
    let n = w.norm_sqr().sqrt();
    let dw = dirs.map(|d| {
        let dz = Spinor::from_unit4(&d);
        Spinor::new(z1.powu(p - 1) * dz.0[0] * p as f64, z2.powu(q - 1) * dz.0[1] * q as f64)
    });
    let dz = dw.map(|d| {
        let dn = w.inner(&d).re / n;
        d * (1.0 / n) - w * (dn / (n * n))
    });
    SpinorJet { z: w * (1.0 / n), dz }
}

fn power_jet(n: u32, x: &Vec4, dirs: &[Vec4; 3]) -> SpinorJet {
    if n == 0 {
        return SpinorJet::constant(Spinor::from_unit4(&Vec4::new(1.0, 0.0, 0.0, 0.0)));
    }
    // powers[k] = x^k
    let mut powers = Vec::with_capacity(n as usize + 1);
    powers.push(Vec4::new(1.0, 0.0, 0.0, 0.0));
    for k in 1..=n as usize {
        powers.push(quat_mul(&powers[k - 1], x));
    }
    let value = powers[n as usize];
    let dz = dirs.map(|v| {
        let mut acc = Vec4::zeros();
        for k in 0..n as usize {
            acc += quat_mul(&quat_mul(&powers[k], &v), &powers[n as usize - 1 - k]);
        }
        Spinor::from_unit4(&acc)
    });
    SpinorJet {
        z: Spinor::from_unit4(&value),
        dz,
    }
}

impl SpinorSource for SpinorField {
    fn jet_on_sphere(&self, p: &Vec4, dirs: &[Vec4; 3]) -> Result<SpinorJet> {
        match self {
            SpinorField::Constant(z) => Ok(SpinorJet::constant(*z)),
            SpinorField::Hopf => Ok(SpinorJet {
                z: Spinor::from_unit4(p),
                dz: dirs.map(|d| Spinor::from_unit4(&d)),
            }),
            SpinorField::Twisted { p: a, q: b } => Ok(twisted_jet(*a, *b, p, dirs)),
            SpinorField::Power { n } => Ok(power_jet(*n, p, dirs)),
            SpinorField::Mirrored(inner) => inner.jet_on_sphere(&reflect(p), &dirs.map(|d| reflect(&d))),
            SpinorField::Sampled(s) => s.jet_on_sphere(p, dirs),
        }
    }

    fn jet_in_space(&self, x: &Vec3, chart: &StereoChart) -> Result<SpinorJet> {
        match self {
            SpinorField::Sampled(s) => s.jet_in_space(x, chart),
            _ => {
                let (p, d) = chart.to_sphere_jet(x);
                self.jet_on_sphere(&p, &d)
            }
        }
    }
}

/// Spinor at a point of S³, with derivatives along `dirs` when requested.
pub fn eval_spinor<S: SpinorSource + ?Sized>(field: &S, p: &Vec4, dirs: Option<&[Vec4; 3]>) -> Result<SpinorJet> {
    match dirs {
        Some(d) => field.jet_on_sphere(p, d),
        None => field
            .jet_on_sphere(p, &[Vec4::zeros(); 3])
            .map(|j| SpinorJet::constant(j.z)),
    }
}
