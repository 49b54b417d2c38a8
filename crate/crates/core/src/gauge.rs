//! Canonical connection `A_i = −2i z†∂_i z`, Hopf curvature in its three
//! equivalent forms, and abelian gauge shifts `A → A + ∂ψ`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HopfError, Result};
use crate::fibers::TargetFrame;
use crate::fields::{Site, SpinorJet, SpinorSource};
use crate::geometry::{StereoChart, Vec3, Vec4};

/// Imaginary residue of `−2i z†∂z` tolerated before a connection is
/// considered non-real.
pub const REALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeSample {
    pub a: Vec3,
    pub b: Matrix3<f64>,
    /// `max_i |Im(−2i z†∂_i z)|`, zero whenever `z†z = 1`.
    pub reality_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureForm {
    /// `−2i(∂_i z†∂_j z − ∂_j z†∂_i z)`
    Spinor,
    /// `m · (∂_i m × ∂_j m)`
    MVector,
    /// Tangent-plane coordinates `φ` of `m` around `target`:
    /// `4 ε_ab ∂_i φ^a ∂_j φ^b / (1 + |φ|²)²`.
    MerminHo { target: Vec3 },
}

/// Connection components and their imaginary residue.
pub fn connection_from_jet(jet: &SpinorJet) -> (Vec3, f64) {
    let mut a = Vec3::zeros();
    let mut residual: f64 = 0.0;
    for i in 0..3 {
        let w = Complex64::new(0.0, -2.0) * jet.z.inner(&jet.dz[i]);
        a[i] = w.re;
        residual = residual.max(w.im.abs());
    }
    (a, residual)
}

pub fn curvature_from_jet(jet: &SpinorJet, form: CurvatureForm) -> Result<Matrix3<f64>> {
    let mut b = Matrix3::zeros();
    match form {
        CurvatureForm::Spinor => {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    // −2i(w − w̄) = 4 Im w
                    let v = 4.0 * jet.dz[i].inner(&jet.dz[j]).im;
                    b[(i, j)] = v;
                    b[(j, i)] = -v;
                }
            }
        }
        CurvatureForm::MVector => {
            let (m, dm) = jet.m_jet();
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let v = m.dot(&dm[i].cross(&dm[j]));
                    b[(i, j)] = v;
                    b[(j, i)] = -v;
                }
            }
        }
        CurvatureForm::MerminHo { target } => {
            let (m, dm) = jet.m_jet();
            let frame = TargetFrame::new(&target)?;
            let (phi, dphi) = frame.coordinates_jet(&m, &dm)?;
            let scale = 4.0 / (1.0 + phi[0] * phi[0] + phi[1] * phi[1]).powi(2);
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let v = scale * (dphi[i][0] * dphi[j][1] - dphi[i][1] * dphi[j][0]);
                    b[(i, j)] = v;
                    b[(j, i)] = -v;
                }
            }
        }
    }
    Ok(b)
}

pub fn connection<S: SpinorSource + ?Sized>(field: &S, site: &Site) -> Result<Vec3> {
    Ok(connection_from_jet(&field.jet(site)?).0)
}

pub fn curvature<S: SpinorSource + ?Sized>(field: &S, site: &Site, form: CurvatureForm) -> Result<Matrix3<f64>> {
    curvature_from_jet(&field.jet(site)?, form)
}

/// `ε^{ijk} ∂_i B_jk` at `x` by central differences of the spinor-form curvature.
pub fn closedness_residual<S: SpinorSource + ?Sized>(field: &S, x: &Vec3, chart: &StereoChart, h: f64) -> Result<f64> {
    let mut div = 0.0;
    for i in 0..3 {
        let mut e = Vec3::zeros();
        e[i] = h;
        let at = |y: Vec3| -> Result<Vec3> {
            let b = curvature(
                field,
                &Site::Space {
                    point: y,
                    chart: *chart,
                },
                CurvatureForm::Spinor,
            )?;
            Ok(Vec3::new(b[(1, 2)], b[(2, 0)], b[(0, 1)]))
        };
        let plus = at(x + e)?;
        let minus = at(x - e)?;
        div += (plus[i] - minus[i]) / (2.0 * h);
    }
    Ok(2.0 * div)
}

/// A smooth real scalar on S³, given as a function on ambient R⁴.
pub trait ScalarGauge: Sync {
    fn value(&self, p: &Vec4) -> f64;
    fn gradient(&self, p: &Vec4) -> Vec4;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantGauge(pub f64);

impl ScalarGauge for ConstantGauge {
    fn value(&self, _p: &Vec4) -> f64 {
        self.0
    }
    fn gradient(&self, _p: &Vec4) -> Vec4 {
        Vec4::zeros()
    }
}

/// `ψ(p) = Σ a_k sin(k_k · p + c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveGauge {
    pub terms: Vec<(f64, Vec4, f64)>,
}

impl WaveGauge {
    pub fn single(amplitude: f64, wavevector: Vec4, phase: f64) -> Self {
        Self {
            terms: vec![(amplitude, wavevector, phase)],
        }
    }

    /// A few random sinusoids of amplitude ≤ 0.3 and wavenumber ≤ 3.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = (0..3)
            .map(|_| {
                let a = rng.gen_range(0.05..0.3);
                let k = Vec4::from_fn(|_, _| rng.gen_range(-3.0..3.0));
                let c = rng.gen_range(0.0..std::f64::consts::TAU);
                (a, k, c)
            })
            .collect();
        Self { terms }
    }
}

impl ScalarGauge for WaveGauge {
    fn value(&self, p: &Vec4) -> f64 {
        self.terms.iter().map(|(a, k, c)| a * (k.dot(p) + c).sin()).sum()
    }
    fn gradient(&self, p: &Vec4) -> Vec4 {
        self.terms.iter().map(|(a, k, c)| k * (a * (k.dot(p) + c).cos())).sum()
    }
}

/// A connection one-form: the canonical connection of a spinor field plus
/// any accumulated exact shifts `∂ψ`.
#[derive(Clone)]
pub struct ConnectionField<'a> {
    source: &'a dyn SpinorSource,
    shifts: Vec<&'a dyn ScalarGauge>,
}

impl<'a> ConnectionField<'a> {
    pub fn canonical(source: &'a dyn SpinorSource) -> Self {
        Self {
            source,
            shifts: Vec::new(),
        }
    }

    pub fn source(&self) -> &'a dyn SpinorSource {
        self.source
    }

    pub fn sample(&self, site: &Site) -> Result<GaugeSample> {
        let jet = self.source.jet(site)?;
        let (mut a, reality_residual) = connection_from_jet(&jet);
        if !self.shifts.is_empty() {
            let (p, dirs) = site.sphere_jet();
            for psi in &self.shifts {
                let g = psi.gradient(&p);
                for i in 0..3 {
                    a[i] += g.dot(&dirs[i]);
                }
            }
        }
        Ok(GaugeSample {
            a,
            b: curvature_from_jet(&jet, CurvatureForm::Spinor)?,
            reality_residual,
        })
    }
}

/// `A′ = A + ∂ψ`; the curvature is untouched.
pub fn gauge_transform<'a>(field: &ConnectionField<'a>, psi: &'a dyn ScalarGauge) -> ConnectionField<'a> {
    let mut out = field.clone();
    out.shifts.push(psi);
    out
}

/// The spinor `e^{iψ/2} z`, whose canonical connection is `A + ∂ψ`.
pub struct PhaseRotated<'a> {
    pub inner: &'a dyn SpinorSource,
    pub psi: &'a dyn ScalarGauge,
}

impl SpinorSource for PhaseRotated<'_> {
    fn jet_on_sphere(&self, p: &Vec4, dirs: &[Vec4; 3]) -> Result<SpinorJet> {
        let jet = self.inner.jet_on_sphere(p, dirs)?;
        let phase = Complex64::from_polar(1.0, 0.5 * self.psi.value(p));
        let g = self.psi.gradient(p);
        let dz = std::array::from_fn(|i| {
            let dpsi = g.dot(&dirs[i]);
            (jet.dz[i] + jet.z.scale(Complex64::new(0.0, 0.5 * dpsi))).scale(phase)
        });
        Ok(SpinorJet {
            z: jet.z.scale(phase),
            dz,
        })
    }
}

/// Check that a sample's connection is real within [`REALITY_TOL`].
pub fn ensure_real(sample: &GaugeSample) -> Result<()> {
    if sample.reality_residual > REALITY_TOL {
        return Err(HopfError::InvalidParameter(format!(
            "connection has imaginary residue {:.3e}; spinor not normalized",
            sample.reality_residual
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Preset, SpinorField};
    use crate::geometry::oriented_tangent_frame;

    fn random_unit4(rng: &mut ChaCha8Rng) -> Vec4 {
        loop {
            let v = Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            if v.norm() > 0.1 {
                return v.normalize();
            }
        }
    }

    fn sphere_site(p: Vec4) -> Site {
        Site::Sphere {
            point: p,
            frame: oriented_tangent_frame(&p),
        }
    }

    #[test]
    fn constant_field_has_no_connection_or_curvature() {
        let f = SpinorField::preset(Preset::Constant).unwrap();
        let site = sphere_site(Vec4::new(0.5, -0.5, 0.5, 0.5));
        assert_eq!(connection(&f, &site).unwrap(), Vec3::zeros());
        for form in [CurvatureForm::Spinor, CurvatureForm::MVector] {
            assert_eq!(curvature(&f, &site, form).unwrap(), Matrix3::zeros());
        }
    }

    #[test]
    fn hopf_connection_matches_hand_evaluation() {
        // At p = (1,0,0,0) with frame (i, j, k): z = (1, 0), ∂z = ((i,0), (1,0), (0,1))
        // so A = 2 Im(z†∂z) = (2, 0, 0).
        let p = Vec4::new(1.0, 0.0, 0.0, 0.0);
        let a = connection(&SpinorField::Hopf, &sphere_site(p)).unwrap();
        assert!((a - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-15);
        // Chart point x = (1, 0, 0) maps to (1,0,0,0) with ∂x ↦ (0,0,0,1), ∂y ↦ (0,1,0,0), ∂z ↦ (0,0,1,0).
        let chart = StereoChart::identity();
        let a = connection(
            &SpinorField::Hopf,
            &Site::Space {
                point: Vec3::new(1.0, 0.0, 0.0),
                chart,
            },
        )
        .unwrap();
        // ∂_y p = (0, 1, 0, 0) so A_y = 2 (x0 ∂y x1 - x1 ∂y x0) = 2; the other two vanish.
        assert!((a - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn curvature_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for preset in ["hopf", "twisted:2,1", "power:3"] {
            let f = SpinorField::preset(preset.parse().unwrap()).unwrap();
            for _ in 0..100 {
                let site = sphere_site(random_unit4(&mut rng));
                let bs = curvature(&f, &site, CurvatureForm::Spinor).unwrap();
                let bm = curvature(&f, &site, CurvatureForm::MVector).unwrap();
                let m = f.jet(&site).unwrap().z.hopf_projection();
                let target = Vec3::new(0.3, -0.4, 0.866).normalize();
                if m.dot(&target) < -0.9 {
                    continue;
                }
                let bh = curvature(&f, &site, CurvatureForm::MerminHo { target }).unwrap();
                assert!((bs - bm).amax() < 1e-10, "{preset}");
                assert!((bs - bh).amax() < 1e-8, "{preset}");
                assert_eq!(bs, -bs.transpose());
            }
        }
    }

    #[test]
    fn mermin_ho_rejects_antipodal_target() {
        let p = Vec4::new(1.0, 0.0, 0.0, 0.0);
        // m = (0, 0, 1) here
        let r = curvature(
            &SpinorField::Hopf,
            &sphere_site(p),
            CurvatureForm::MerminHo {
                target: Vec3::new(0.0, 0.0, -1.0),
            },
        );
        assert!(matches!(r, Err(HopfError::ChartSingularity)));
    }

    #[test]
    fn connection_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = SpinorField::preset("twisted:2,2".parse().unwrap()).unwrap();
        let afield = ConnectionField::canonical(&f);
        for _ in 0..100 {
            let s = afield.sample(&sphere_site(random_unit4(&mut rng))).unwrap();
            ensure_real(&s).unwrap();
        }
    }

    #[test]
    fn phase_rotation_shifts_connection_by_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = SpinorField::preset("power:2".parse().unwrap()).unwrap();
        let psi = WaveGauge::random(3);
        let rotated = PhaseRotated { inner: &f, psi: &psi };
        for _ in 0..50 {
            let p = random_unit4(&mut rng);
            let site = sphere_site(p);
            let a0 = connection(&f, &site).unwrap();
            let a1 = connection(&rotated, &site).unwrap();
            let frame = oriented_tangent_frame(&p);
            let g = psi.gradient(&p);
            let dpsi = Vec3::from_fn(|i, _| g.dot(&frame[i]));
            assert!((a1 - a0 - dpsi).norm() < 1e-8);
        }
    }

    #[test]
    fn trivial_gauge_transforms_are_identity() {
        let f = SpinorField::Hopf;
        let base = ConnectionField::canonical(&f);
        let zero = ConstantGauge(0.0);
        let c = ConstantGauge(2.5);
        let site = sphere_site(Vec4::new(0.1, 0.2, 0.3, 0.4).normalize());
        let a = base.sample(&site).unwrap();
        assert_eq!(gauge_transform(&base, &zero).sample(&site).unwrap(), a);
        assert_eq!(gauge_transform(&base, &c).sample(&site).unwrap(), a);
    }

    #[test]
    fn curvature_is_closed_at_second_order() {
        let f = SpinorField::preset("twisted:2,1".parse().unwrap()).unwrap();
        let chart = StereoChart::identity();
        let x = Vec3::new(0.3, -0.2, 0.5);
        let r1 = closedness_residual(&f, &x, &chart, 1e-2).unwrap().abs();
        let r2 = closedness_residual(&f, &x, &chart, 5e-3).unwrap().abs();
        assert!(r1 < 5e-2, "{r1} {r2}");
        assert!(r1 / r2 > 3.0, "{r1} {r2}");
    }
}
