use hopf_core::fibers::{
    auto_domain, current_at, disk_flux, extract_fibers, string_current_at, target_from_angles, ExtractionOptions,
    FiberDomain,
};
use hopf_core::fields::{Preset, SpinorField, SpinorSource};
use hopf_core::geometry::{BoxGrid, StereoChart, Vec3};

fn preset(s: &str) -> SpinorField {
    SpinorField::preset(s.parse::<Preset>().unwrap()).unwrap()
}

fn generic_target() -> Vec3 {
    target_from_angles(1.1, 0.7)
}

#[test]
fn hopf_fiber_is_a_single_round_circle() {
    let f = preset("hopf");
    let t = Vec3::z();
    let (_, fams) = auto_domain(&f, &[t], 64, &ExtractionOptions::default()).unwrap();
    let fam = &fams[0];
    assert_eq!(fam.curves.len(), 1);
    assert!(fam.open_curves.is_empty());
    let c = &fam.curves[0];
    assert!(c.closed);
    assert_eq!(c.winding, 1);
    assert!(c.points.len() >= 256);
    // stereographic images of great circles are round circles (or lines)
    let n = c.points.len() as f64;
    let centre = c.points.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let radii: Vec<f64> = c.points.iter().map(|p| (p - centre).norm()).collect();
    let mean = radii.iter().sum::<f64>() / n;
    let worst = radii.iter().map(|r| (r - mean).abs() / mean).fold(0.0, f64::max);
    assert!(worst < 0.02, "metric deviation {worst}");
}

#[test]
fn points_lie_on_the_preimage() {
    let f = preset("twisted:2,1");
    let t = generic_target();
    let (domain, fams) = auto_domain(&f, &[t], 64, &ExtractionOptions::default()).unwrap();
    let fam = &fams[0];
    assert_eq!(fam.curves.len(), 1);
    assert_eq!(fam.curves[0].winding, 1);
    let h = domain.grid.min_spacing();
    for c in &fam.curves {
        let n = c.points.len();
        for i in 0..n {
            let m = f.jet_in_space(&c.points[i], &domain.chart).unwrap().z.hopf_projection();
            assert!((m - fam.target).norm() < 1e-9);
            assert!((c.points[(i + 1) % n] - c.points[i]).norm() <= 2.0 * h);
        }
    }
}

#[test]
fn twisted_two_two_has_two_fibers_per_target() {
    let f = preset("twisted:2,2");
    let (_, fams) = auto_domain(&f, &[generic_target()], 64, &ExtractionOptions::default()).unwrap();
    assert_eq!(fams[0].curves.len(), 2);
    assert!(fams[0].curves.iter().all(|c| c.winding == 1));
}

#[test]
fn constant_field_has_no_fibers() {
    let f = preset("constant");
    let domain = FiberDomain::new(BoxGrid::cube(3.0, 33).unwrap(), StereoChart::identity());
    let fam = extract_fibers(&f, &domain, &generic_target(), &ExtractionOptions::default()).unwrap();
    assert!(fam.curves.is_empty() && fam.open_curves.is_empty());
}

#[test]
fn small_box_reports_open_curves() {
    let f = preset("hopf");
    let domain = FiberDomain::new(BoxGrid::cube(0.5, 33).unwrap(), StereoChart::identity());
    let t = Vec3::new(1.0, 0.0, 0.0);
    let fam = extract_fibers(&f, &domain, &t, &ExtractionOptions::default()).unwrap();
    assert!(fam.curves.is_empty());
    assert!(!fam.open_curves.is_empty());
}

#[test]
fn smooth_current_is_zero_for_constant_field() {
    let f = preset("constant");
    let j = current_at(&f, &Vec3::new(0.2, 0.3, -0.1), &StereoChart::identity()).unwrap();
    assert_eq!(j, Vec3::zeros());
}

#[test]
fn string_flux_through_transverse_disk_is_the_winding() {
    for name in ["hopf", "twisted:2,1"] {
        let f = preset(name);
        let t = generic_target();
        let (domain, fams) = auto_domain(&f, &[t], 64, &ExtractionOptions::default()).unwrap();
        let c = &fams[0].curves[0];
        let p = c.points[0];
        let tangent = c.points[1] - c.points[c.points.len() - 1];
        let eps = 1e-3;
        let flux = disk_flux(
            |y| string_current_at(&f, y, &domain.chart, &fams[0].target, eps),
            &p,
            &tangent,
            0.05,
            400,
            128,
        )
        .unwrap();
        assert!((flux - c.winding as f64).abs() < 0.05, "{name}: flux {flux}");
    }
}
