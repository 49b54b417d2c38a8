//! The full verification matrix: cross-method agreement on every preset,
//! gauge invariance, curvature equivalence, linking oracles, the White
//! formula, current structure, and grid convergence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fibers::{auto_domain, current_divergence, fiber_flux, ExtractionOptions};
use crate::fields::{Preset, Site, SpinorField, SpinorSource};
use crate::gauge::{closedness_residual, curvature, gauge_transform, ConnectionField, CurvatureForm, WaveGauge};
use crate::geometry::{oriented_tangent_frame, S3Grid, StereoChart, Vec3, Vec4};
use crate::invariant::{hopf_whitehead, whitehead_integral};
use crate::links::{
    crossing_linking, fixtures, gauss_linking, min_feature, pushoff_framing, self_linking, twist, writhe, FramedCurve,
    LinkingRule,
};
use crate::report::{run_methods, HopfReport, RunSettings};

pub const VERIFY_SCHEMA: &str = "hopf-verify";
pub const VERIFY_VERSION: u32 = 1;

/// Presets of the agreement matrix and the integers they must produce.
pub const IDENTITY_PRESETS: [(&str, i64); 7] = [
    ("constant", 0),
    ("hopf", 1),
    ("twisted:1,2", 2),
    ("twisted:2,1", 2),
    ("twisted:2,2", 4),
    ("power:2", 2),
    ("power:3", 3),
];

const ANALYTIC: [&str; 7] = [
    "constant",
    "hopf",
    "twisted:1,2",
    "twisted:2,1",
    "twisted:2,2",
    "power:2",
    "power:3",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub grid: usize,
    pub coarse_grid: usize,
    pub fiber_cells: usize,
    pub seed: u64,
    pub deterministic: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            grid: 64,
            coarse_grid: 32,
            fiber_cells: 64,
            seed: 7,
            deterministic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub preset: String,
    pub value_coarse: f64,
    pub residual_coarse: f64,
    pub value_fine: f64,
    pub residual_fine: f64,
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub version: u32,
    pub settings: VerifySettings,
    pub criteria: Vec<Criterion>,
    pub convergence: Vec<ConvergenceRow>,
    pub identity: Vec<HopfReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

fn preset(name: &str) -> Result<SpinorField> {
    SpinorField::preset(name.parse::<Preset>()?)
}

fn random_unit4(rng: &mut ChaCha8Rng) -> Vec4 {
    loop {
        let v = Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn grand_identity(s: &VerifySettings) -> Result<(Criterion, Vec<HopfReport>)> {
    let settings = RunSettings {
        grid: [s.grid; 3],
        fiber_cells: s.fiber_cells,
        deterministic: s.deterministic,
        ..RunSettings::default()
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, expected) in IDENTITY_PRESETS {
        let rep = run_methods(&preset(name)?, name, &settings)?;
        let res = rep.methods.iter().map(|m| m.estimate.residual).fold(0.0, f64::max);
        worst = worst.max(res);
        let methods_run = rep.methods.len() >= 5;
        if rep.agreed != Some(expected) || res >= 0.05 || !methods_run {
            failures.push(format!("{name}: agreed {:?}, worst residual {res:.3e}", rep.agreed));
        }
        reports.push(rep);
    }
    let detail = if failures.is_empty() {
        format!("7 presets, all methods agree, worst residual {worst:.2e}")
    } else {
        failures.join("; ")
    };
    Ok((
        Criterion {
            id: 1,
            name: "grand identity".into(),
            passed: failures.is_empty(),
            detail,
        },
        reports,
    ))
}

fn gauge_invariance(s: &VerifySettings) -> Result<Criterion> {
    let grid = S3Grid::cubic(s.grid)?;
    let f = SpinorField::Hopf;
    let base = ConnectionField::canonical(&f);
    let h0 = whitehead_integral(&base, &grid)?;
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let psi = WaveGauge::random(s.seed + k);
        let h = whitehead_integral(&gauge_transform(&base, &psi), &grid)?;
        worst = worst.max((h - h0).abs());
    }
    Ok(Criterion {
        id: 2,
        name: "gauge invariance".into(),
        passed: worst < 1e-3,
        detail: format!("max Whitehead shift over 5 random gauges {worst:.3e}"),
    })
}

fn curvature_equivalence(s: &VerifySettings) -> Result<Criterion> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut worst: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for name in &ANALYTIC[1..] {
        let f = preset(name)?;
        let mut done = 0;
        while done < 1000 {
            let p = random_unit4(&mut rng);
            let site = Site::Sphere {
                point: p,
                frame: oriented_tangent_frame(&p),
            };
            let m = f.jet(&site)?.z.hopf_projection();
            let t = fixtures::random_unit(&mut rng);
            if 1.0 + m.dot(&t) < 0.1 {
                continue;
            }
            let b1 = curvature(&f, &site, CurvatureForm::Spinor)?;
            let b2 = curvature(&f, &site, CurvatureForm::MVector)?;
            let b3 = curvature(&f, &site, CurvatureForm::MerminHo { target: t })?;
            worst = worst.max((b1 - b2).amax()).max((b1 - b3).amax()).max((b2 - b3).amax());
            done += 1;
        }
        let chart = StereoChart::identity();
        for _ in 0..5 {
            let x = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let r1 = closedness_residual(&f, &x, &chart, 1e-2)?.abs();
            let r2 = closedness_residual(&f, &x, &chart, 5e-3)?.abs();
            if r1 > 1e-9 {
                min_ratio = min_ratio.min(r1 / r2);
            }
        }
    }
    let passed = worst < 1e-8 && min_ratio > 3.0;
    Ok(Criterion {
        id: 3,
        name: "curvature equivalence".into(),
        passed,
        detail: format!(
            "max form discrepancy {worst:.3e} over 6x1000 points; closedness h->h/2 ratio >= {min_ratio:.2}"
        ),
    })
}

fn linking_oracles(s: &VerifySettings) -> Result<Criterion> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut worst: f64 = 0.0;
    let mut antisymmetric = true;
    let mut linked = 0;
    for _ in 0..20 {
        let (a, b) = fixtures::random_ellipse_pair(&mut rng, 256);
        let d = fixtures::random_unit(&mut rng);
        let g = gauss_linking(&a, &b, LinkingRule::SolidAngle)?;
        let c = crossing_linking(&a, &b, &d)?;
        worst = worst.max((g - c as f64).abs());
        let rb = b.reversed();
        let gr = gauss_linking(&a, &rb, LinkingRule::SolidAngle)?;
        let cr = crossing_linking(&a, &rb, &d)?;
        antisymmetric &= gr.round() == -g.round() && cr == -c;
        if c != 0 {
            linked += 1;
        }
    }
    Ok(Criterion {
        id: 4,
        name: "linking oracle agreement".into(),
        passed: worst < 1e-3 && antisymmetric,
        detail: format!(
            "20 ellipse pairs ({linked} linked), max |gauss - crossings| {worst:.3e}, antisymmetric {antisymmetric}"
        ),
    })
}

fn framed_fibers(name: &str, cells: usize) -> Result<Vec<FramedCurve>> {
    let f = preset(name)?;
    let t = crate::report::default_target();
    let opts = ExtractionOptions::default();
    let (domain, fams) = auto_domain(&f, &[t], cells, &opts)?;
    pushoff_framing(&f, &domain, &fams[0], 0.1, &opts)
}

fn white_formula(s: &VerifySettings) -> Result<Criterion> {
    let mut cases: Vec<(String, FramedCurve)> = vec![
        ("unknot 0 turns".into(), fixtures::turning_unknot(256, 0)),
        ("unknot 1 turn".into(), fixtures::turning_unknot(256, 1)),
        ("unknot 3 turns".into(), fixtures::turning_unknot(256, 3)),
        ("torus knot (2,3)".into(), fixtures::torus_knot(2, 3, 512)),
        ("figure eight".into(), fixtures::figure_eight(512, 0.3)),
    ];
    for name in ["hopf", "twisted:2,1"] {
        for (k, fc) in framed_fibers(name, s.fiber_cells)?.into_iter().enumerate() {
            cases.push((format!("{name} fiber {k}"), fc));
        }
    }
    let mut worst: f64 = 0.0;
    let mut unknots_ok = true;
    for (name, fc) in &cases {
        let sl = self_linking(fc)?;
        let tw = twist(fc);
        let wr = writhe(&fc.base)?;
        worst = worst.max((sl.value - tw - wr).abs());
        if let Some(n) = name.strip_prefix("unknot ").and_then(|r| r.split(' ').next()) {
            unknots_ok &= sl.sl == n.parse::<i64>().unwrap_or(-1);
        }
    }
    Ok(Criterion {
        id: 5,
        name: "White formula".into(),
        passed: worst < 1e-2 && unknots_ok && cases.len() >= 5,
        detail: format!("{} framed fixtures, max |SL - (Tw + Wr)| {worst:.3e}", cases.len()),
    })
}

fn current_structure(s: &VerifySettings) -> Result<Criterion> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let chart = StereoChart::identity();
    let mut min_ratio = f64::INFINITY;
    let mut worst_flux: f64 = 0.0;
    let mut probes = 0;
    for name in ["hopf", "twisted:1,2", "twisted:2,1", "twisted:2,2"] {
        let f = preset(name)?;
        for _ in 0..5 {
            let x = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let d1 = current_divergence(&f, &x, &chart, 1e-2)?.abs();
            let d2 = current_divergence(&f, &x, &chart, 5e-3)?.abs();
            if d1 > 1e-9 {
                min_ratio = min_ratio.min(d1 / d2);
            }
        }
        let t = crate::report::default_target();
        let (domain, fams) = auto_domain(&f, &[t], s.fiber_cells, &ExtractionOptions::default())?;
        let fam = &fams[0];
        for (k, c) in fam.curves.iter().enumerate() {
            let mut radius = 0.2 * min_feature(c);
            for (j, other) in fam.curves.iter().enumerate() {
                if j != k {
                    let gap = c
                        .points
                        .iter()
                        .flat_map(|p| other.points.iter().map(move |q| (p - q).norm()))
                        .fold(f64::INFINITY, f64::min);
                    radius = radius.min(0.2 * gap);
                }
            }
            let n = c.points.len();
            for i in [0, n / 3, 2 * n / 3] {
                let tangent = c.points[(i + 1) % n] - c.points[(i + n - 1) % n];
                let flux = fiber_flux(&f, &domain.chart, &fam.target, &c.points[i], &tangent, radius)?;
                let w = c.winding as f64;
                worst_flux = worst_flux.max((flux - w).abs() / w.abs());
                probes += 1;
            }
        }
    }
    Ok(Criterion {
        id: 6,
        name: "current structure".into(),
        passed: min_ratio > 3.0 && worst_flux < 0.05 && probes > 0,
        detail: format!(
            "divergence h->h/2 ratio >= {min_ratio:.2}; {probes} disk fluxes, max relative error {worst_flux:.3e}"
        ),
    })
}

/// Whitehead values at the coarse and fine grids for every analytic preset.
pub fn convergence_table(s: &VerifySettings) -> Result<Vec<ConvergenceRow>> {
    let coarse = S3Grid::cubic(s.coarse_grid)?;
    let fine = S3Grid::cubic(s.grid)?;
    ANALYTIC
        .iter()
        .map(|name| {
            let f = preset(name)?;
            let c = hopf_whitehead(&f, &coarse)?;
            let r = hopf_whitehead(&f, &fine)?;
            // quadrature that is already exact cannot improve further
            let exact = c.residual <= 1e-12 && r.residual <= 1e-12;
            Ok(ConvergenceRow {
                preset: name.to_string(),
                value_coarse: c.value,
                residual_coarse: c.residual,
                value_fine: r.value,
                residual_fine: r.residual,
                improved: r.residual < c.residual || exact,
            })
        })
        .collect()
}

pub fn run_verification(s: &VerifySettings) -> Result<VerifyReport> {
    let (c1, identity) = grand_identity(s)?;
    let convergence = convergence_table(s)?;
    let c7 = Criterion {
        id: 7,
        name: "grid convergence".into(),
        passed: convergence.iter().all(|r| r.improved),
        detail: format!(
            "Whitehead residual {}^3 vs {}^3: {}",
            s.grid,
            s.coarse_grid,
            convergence
                .iter()
                .map(|r| format!("{} {:.1e}<{:.1e}", r.preset, r.residual_fine, r.residual_coarse))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let criteria = vec![
        c1,
        gauge_invariance(s)?,
        curvature_equivalence(s)?,
        linking_oracles(s)?,
        white_formula(s)?,
        current_structure(s)?,
        c7,
    ];
    Ok(VerifyReport {
        schema: VERIFY_SCHEMA.into(),
        version: VERIFY_VERSION,
        settings: s.clone(),
        criteria,
        convergence,
        identity,
    })
}

/// Plain-text convergence table.
pub fn format_convergence(rows: &[ConvergenceRow], coarse: usize, fine: usize) -> String {
    let mut out = format!(
        "{:<14} {:>16} {:>12} {:>16} {:>12}  improved\n",
        "preset",
        format!("H({coarse}^3)"),
        "residual",
        format!("H({fine}^3)"),
        "residual"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<14} {:>16.10} {:>12.3e} {:>16.10} {:>12.3e}  {}\n",
            r.preset, r.value_coarse, r.residual_coarse, r.value_fine, r.residual_fine, r.improved
        ));
    }
    out
}
