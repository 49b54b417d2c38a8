//! Acceptance matrix. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Expected integers and tolerances are fixed here;
//! the randomized checks use seeds different from `hopf verify`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hopf_core::fibers::{
    auto_domain, current_divergence, fiber_flux, target_from_angles, ExtractionOptions, FiberCurve,
};
use hopf_core::fields::{Preset, Site, SpinorField, SpinorSource};
use hopf_core::gauge::{closedness_residual, curvature, gauge_transform, ConnectionField, CurvatureForm, WaveGauge};
use hopf_core::geometry::{oriented_tangent_frame, S3Grid, StereoChart, Vec3, Vec4};
use hopf_core::invariant::{hopf_whitehead, whitehead_integral, Method};
use hopf_core::links::{fixtures, gauss_linking, min_feature, self_linking, twist, writhe, FramedCurve, LinkingRule};
use hopf_core::report::{run_methods, RunSettings};

const PRESETS: [(&str, i64); 7] = [
    ("constant", 0),
    ("hopf", 1),
    ("twisted:1,2", 2),
    ("twisted:2,1", 2),
    ("twisted:2,2", 4),
    ("power:2", 2),
    ("power:3", 3),
];

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn field(name: &str) -> SpinorField {
    SpinorField::preset(name.parse::<Preset>().unwrap()).unwrap()
}

fn random_unit4(rng: &mut ChaCha8Rng) -> Vec4 {
    loop {
        let v = Vec4::new(
            rng.gen_range(-1.0..1.0),
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

fn random_point(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.gen_range(-1.2..1.2),
        rng.gen_range(-1.2..1.2),
        rng.gen_range(-1.2..1.2),
    )
}

fn grand_identity() -> Outcome {
    let settings = RunSettings {
        grid: [64; 3],
        ..RunSettings::default()
    };
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for (name, expected) in PRESETS {
        let start = Instant::now();
        let rep = run_methods(&field(name), name, &settings).map_err(|e| format!("{name}: {e}"))?;
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        for m in Method::ALL {
            if !rep.methods.iter().any(|e| e.estimate.method == m) {
                return Err(format!("{name}: {m} produced no estimate"));
            }
        }
        for e in &rep.methods {
            let est = &e.estimate;
            if est.rounded != expected || est.residual >= 0.05 {
                return Err(format!(
                    "{name}: {} gave {:.6} (expected {expected})",
                    est.method, est.value
                ));
            }
            worst = worst.max(est.residual);
        }
        for f in &rep.fibers {
            if f.open_curves > 0 || f.segments.iter().any(|&s| s < 256) {
                return Err(format!("{name}: open or under-resolved fibers {:?}", f.segments));
            }
        }
        if secs > 120.0 {
            return Err(format!("{name}: took {secs:.1} s"));
        }
    }
    Ok(format!(
        "7 presets x 5 methods hit {{0,1,2,2,4,2,3}}, worst residual {worst:.2e}, slowest preset {slowest:.1} s"
    ))
}

fn gauge_invariance() -> Outcome {
    let grid = S3Grid::cubic(64).unwrap();
    let f = field("hopf");
    let base = ConnectionField::canonical(&f);
    let h0 = whitehead_integral(&base, &grid).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for seed in 1001..1006 {
        let psi = WaveGauge::random(seed);
        let h = whitehead_integral(&gauge_transform(&base, &psi), &grid).map_err(|e| e.to_string())?;
        worst = worst.max((h - h0).abs());
    }
    if worst < 1e-3 {
        Ok(format!("H = {h0:.12}, max shift over 5 gauges {worst:.2e} < 1e-3"))
    } else {
        Err(format!("shift {worst:.3e}"))
    }
}

/// `m·(∂_i m × ∂_j m)` from central differences of `m` along the sphere.
fn fd_m_curvature(f: &SpinorField, p: &Vec4, frame: &[Vec4; 3], h: f64) -> [[f64; 3]; 3] {
    let m_at = |q: Vec4| {
        let q = q.normalize();
        f.jet(&Site::Sphere {
            point: q,
            frame: oriented_tangent_frame(&q),
        })
        .unwrap()
        .z
        .hopf_projection()
    };
    let m = m_at(*p);
    let dm: Vec<Vec3> = frame
        .iter()
        .map(|e| (m_at(p + e * h) - m_at(p - e * h)) / (2.0 * h))
        .collect();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = m.dot(&dm[i].cross(&dm[j]));
        }
    }
    b
}

fn curvature_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let mut worst: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for (name, _) in &PRESETS[1..] {
        let f = field(name);
        let mut done = 0;
        while done < 1000 {
            let p = random_unit4(&mut rng);
            let frame = oriented_tangent_frame(&p);
            let site = Site::Sphere { point: p, frame };
            let m = f.jet(&site).unwrap().z.hopf_projection();
            let t = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if t.norm() < 0.2 {
                continue;
            }
            let t = t.normalize();
            // Mermin–Ho coordinates are singular at the antipode of the target
            if m.dot(&t) < -0.9 {
                continue;
            }
            let b1 = curvature(&f, &site, CurvatureForm::Spinor).map_err(|e| e.to_string())?;
            let b2 = curvature(&f, &site, CurvatureForm::MVector).map_err(|e| e.to_string())?;
            let b3 = curvature(&f, &site, CurvatureForm::MerminHo { target: t }).map_err(|e| e.to_string())?;
            worst = worst.max((b1 - b2).amax()).max((b1 - b3).amax()).max((b2 - b3).amax());
            if done % 50 == 0 {
                let fd = fd_m_curvature(&f, &p, &frame, 1e-5);
                for i in 0..3 {
                    for j in 0..3 {
                        worst_fd = worst_fd.max((fd[i][j] - b1[(i, j)]).abs() / (1.0 + b1.amax()));
                    }
                }
            }
            done += 1;
        }
        let chart = StereoChart::identity();
        for _ in 0..4 {
            let x = random_point(&mut rng);
            let r1 = closedness_residual(&f, &x, &chart, 2e-2)
                .map_err(|e| e.to_string())?
                .abs();
            let r2 = closedness_residual(&f, &x, &chart, 1e-2)
                .map_err(|e| e.to_string())?
                .abs();
            if r1 > 1e-9 {
                min_ratio = min_ratio.min(r1 / r2);
            }
        }
    }
    let detail = format!(
        "6 presets x 1000 points, max form discrepancy {worst:.2e} < 1e-8, finite-difference check {worst_fd:.1e}, closedness h->h/2 ratio >= {min_ratio:.2}"
    );
    if worst < 1e-8 && worst_fd < 1e-5 && min_ratio > 3.0 && min_ratio.is_finite() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Signed crossings where `a` passes over `b`, viewed from `+dir`.
fn crossing_count(a: &FiberCurve, b: &FiberCurve, dir: &Vec3) -> i64 {
    let d = dir.normalize();
    let e1 = if d.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (e1 - d * e1.dot(&d)).normalize();
    let e2 = d.cross(&e1);
    let proj = |p: &Vec3| (p.dot(&e1), p.dot(&e2));
    let (na, nb) = (a.points.len(), b.points.len());
    let mut total = 0;
    for i in 0..na {
        let (p, q) = (a.points[i], a.points[(i + 1) % na]);
        let ((px, py), (qx, qy)) = (proj(&p), proj(&q));
        for j in 0..nb {
            let (r, s) = (b.points[j], b.points[(j + 1) % nb]);
            let ((rx, ry), (sx, sy)) = (proj(&r), proj(&s));
            let den = (qx - px) * (sy - ry) - (qy - py) * (sx - rx);
            if den == 0.0 {
                continue;
            }
            let u = ((rx - px) * (sy - ry) - (ry - py) * (sx - rx)) / den;
            let v = ((rx - px) * (qy - py) - (ry - py) * (qx - px)) / den;
            if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
                continue;
            }
            let ha = (p + (q - p) * u).dot(&d);
            let hb = (r + (s - r) * v).dot(&d);
            if ha > hb {
                total += if (q - p).cross(&(s - r)).dot(&d) > 0.0 { 1 } else { -1 };
            }
        }
    }
    total
}

fn linking_oracles() -> Outcome {
    let (ha, hb) = fixtures::hopf_link(256);
    let dir = Vec3::new(0.31, -0.17, 0.93);
    if crossing_count(&ha, &hb, &dir) != 1 {
        return Err("crossing oracle does not give +1 on the Hopf link".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x11c4);
    let mut worst: f64 = 0.0;
    let mut linked = 0;
    for _ in 0..20 {
        let (a, b) = fixtures::random_ellipse_pair(&mut rng, 256);
        let d = fixtures::random_unit(&mut rng);
        let g = gauss_linking(&a, &b, LinkingRule::SolidAngle).map_err(|e| e.to_string())?;
        let c = crossing_count(&a, &b, &d);
        worst = worst.max((g - c as f64).abs());
        let rb = b.reversed();
        let gr = gauss_linking(&a, &rb, LinkingRule::SolidAngle).map_err(|e| e.to_string())?;
        let gs = gauss_linking(&b, &a, LinkingRule::SolidAngle).map_err(|e| e.to_string())?;
        if gr.round() != -g.round() || crossing_count(&a, &rb, &d) != -c || gs.round() != g.round() {
            return Err(format!("orientation reversal: Lk {g:.6}, reversed {gr:.6}"));
        }
        if c != 0 {
            linked += 1;
        }
    }
    if linked == 0 || linked == 20 {
        return Err(format!("degenerate sample: {linked} of 20 pairs linked"));
    }
    if worst < 1e-3 {
        Ok(format!(
            "20 ellipse pairs at 256 segments ({linked} linked), max |gauss - crossings| {worst:.2e} < 1e-3, reversal negates"
        ))
    } else {
        Err(format!("max |gauss - crossings| {worst:.3e}"))
    }
}

fn white_formula() -> Outcome {
    let cases: Vec<(&str, FramedCurve, Option<i64>)> = vec![
        ("unknot 0", fixtures::turning_unknot(256, 0), Some(0)),
        ("unknot 1", fixtures::turning_unknot(256, 1), Some(1)),
        ("unknot 3", fixtures::turning_unknot(256, 3), Some(3)),
        ("torus (2,3)", fixtures::torus_knot(2, 3, 600), None),
        ("torus (3,2)", fixtures::torus_knot(3, 2, 600), None),
        ("figure eight", fixtures::figure_eight(600, 0.25), None),
    ];
    let mut worst: f64 = 0.0;
    for (name, fc, expected) in &cases {
        let sl = self_linking(fc).map_err(|e| format!("{name}: {e}"))?;
        let tw = twist(fc);
        let wr = writhe(&fc.base).map_err(|e| format!("{name}: {e}"))?;
        worst = worst.max((sl.value - tw - wr).abs());
        if let Some(n) = expected {
            if sl.sl != *n {
                return Err(format!("{name}: SL {} (expected {n})", sl.sl));
            }
        }
    }
    if worst < 1e-2 {
        Ok(format!(
            "{} framed fixtures incl. unknots with 0/1/3 turns, max |SL - (Tw + Wr)| {worst:.2e} < 1e-2",
            cases.len()
        ))
    } else {
        Err(format!("max residual {worst:.3e}"))
    }
}

fn current_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let chart = StereoChart::identity();
    let target = target_from_angles(0.8, 2.3);
    let opts = ExtractionOptions::default();
    let mut min_ratio = f64::INFINITY;
    let mut worst: f64 = 0.0;
    let mut fluxes = 0;
    for name in ["hopf", "twisted:1,2", "twisted:2,1", "twisted:2,2"] {
        let f = field(name);
        for _ in 0..4 {
            let x = random_point(&mut rng);
            let d1 = current_divergence(&f, &x, &chart, 2e-2)
                .map_err(|e| e.to_string())?
                .abs();
            let d2 = current_divergence(&f, &x, &chart, 1e-2)
                .map_err(|e| e.to_string())?
                .abs();
            if d1 > 1e-9 {
                min_ratio = min_ratio.min(d1 / d2);
            }
        }
        let (domain, fams) = auto_domain(&f, &[target], 64, &opts).map_err(|e| e.to_string())?;
        let fam = &fams[0];
        if fam.curves.is_empty() || !fam.is_complete() {
            return Err(format!("{name}: no complete fiber family"));
        }
        for (k, c) in fam.curves.iter().enumerate() {
            let mut radius = 0.2 * min_feature(c);
            for (j, other) in fam.curves.iter().enumerate() {
                if j != k {
                    for p in &c.points {
                        for q in &other.points {
                            radius = radius.min(0.2 * (p - q).norm());
                        }
                    }
                }
            }
            let n = c.points.len();
            for i in [n / 5, n / 2, 4 * n / 5] {
                let tangent = c.points[(i + 1) % n] - c.points[(i + n - 1) % n];
                let flux = fiber_flux(&f, &domain.chart, &fam.target, &c.points[i], &tangent, radius)
                    .map_err(|e| e.to_string())?;
                worst = worst.max((flux - c.winding as f64).abs() / (c.winding as f64).abs());
                fluxes += 1;
            }
        }
    }
    let detail = format!(
        "divergence h->h/2 ratio >= {min_ratio:.2}; {fluxes} disk fluxes match W_k within {:.2}%",
        100.0 * worst
    );
    if min_ratio > 3.0 && min_ratio.is_finite() && worst < 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn grid_convergence() -> Outcome {
    let coarse = S3Grid::cubic(32).unwrap();
    let fine = S3Grid::cubic(64).unwrap();
    let mut rows = Vec::new();
    for (name, _) in PRESETS {
        let f = field(name);
        let c = hopf_whitehead(&f, &coarse).map_err(|e| e.to_string())?;
        let r = hopf_whitehead(&f, &fine).map_err(|e| e.to_string())?;
        // at round-off on both grids the quadrature is exact and cannot shrink further
        let exact = c.residual < 1e-12 && r.residual < 1e-12;
        if !(r.residual < c.residual || exact) {
            return Err(format!(
                "{name}: {:.3e} at 64^3 vs {:.3e} at 32^3",
                r.residual, c.residual
            ));
        }
        rows.push(if exact {
            format!("{name} exact")
        } else {
            format!("{name} {:.1e}<{:.1e}", r.residual, c.residual)
        });
    }
    Ok(format!("Whitehead residual 64^3 vs 32^3: {}", rows.join(", ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |threads: &str, out: &Path| -> Result<Vec<u8>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_hopf"))
            .args(["verify", "--deterministic", "--threads", threads, "--out"])
            .arg(out)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if status.code() != Some(0) {
            return Err(format!("verify exited with {status}"));
        }
        std::fs::read(out).map_err(|e| e.to_string())
    };
    let a = run("1", &dir.path().join("a.json"))?;
    let b = run("4", &dir.path().join("b.json"))?;
    if a == b {
        Ok(format!(
            "two verify runs (1 and 4 threads) wrote identical {} byte reports",
            a.len()
        ))
    } else {
        Err("reports differ".into())
    }
}

fn main() {
    let criteria: [Check; 8] = [
        ("grand identity", grand_identity),
        ("gauge invariance", gauge_invariance),
        ("curvature equivalence", curvature_equivalence),
        ("linking oracle agreement", linking_oracles),
        ("White formula", white_formula),
        ("current structure", current_structure),
        ("grid convergence", grid_convergence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
