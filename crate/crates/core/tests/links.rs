use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use hopf_core::fibers::FiberCurve;
use hopf_core::geometry::Vec3;
use hopf_core::links::{fixtures, gauss_linking, link_report, writhe, LinkingRule};

fn moved(c: &FiberCurve, axis: &Vec3, angle: f64, scale: f64, shift: &Vec3) -> FiberCurve {
    let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle);
    FiberCurve {
        points: c.points.iter().map(|p| rot * p * scale + shift).collect(),
        ..c.clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linking_survives_rigid_motion_and_scaling(
        ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU, scale in 0.2f64..5.0,
        sx in -3.0f64..3.0, sy in -3.0f64..3.0, sz in -3.0f64..3.0,
    ) {
        let (a, b) = fixtures::hopf_link(128);
        let axis = Vec3::new(ax, ay, az);
        let shift = Vec3::new(sx, sy, sz);
        let (a, b) = (moved(&a, &axis, angle, scale, &shift), moved(&b, &axis, angle, scale, &shift));
        let lk = gauss_linking(&a, &b, LinkingRule::SolidAngle).unwrap();
        prop_assert!((lk - 1.0).abs() < 1e-9, "Lk = {}", lk);
        let lk_ba = gauss_linking(&b, &a, LinkingRule::SolidAngle).unwrap();
        prop_assert!((lk - lk_ba).abs() < 1e-9);
    }

    #[test]
    fn separated_circles_do_not_link(sep in 0.05f64..3.0, n in 16usize..200) {
        let (a, b) = fixtures::coaxial_circles(sep, n);
        let lk = gauss_linking(&a, &b, LinkingRule::SolidAngle).unwrap();
        prop_assert!(lk.abs() < 1e-9, "Lk = {}", lk);
    }
}

#[test]
fn planar_curves_have_no_writhe() {
    let c = fixtures::ellipse(
        &Vec3::zeros(),
        &Vec3::new(2.0, 0.0, 0.0),
        &Vec3::new(0.0, 0.7, 0.0),
        300,
    );
    assert_abs_diff_eq!(writhe(&c).unwrap(), 0.0, epsilon = 1e-12);
}

#[test]
fn torus_framing_self_linking_is_minus_pq() {
    // The meridian here turns negatively about the core circle, so the
    // torus framing links a (p, q) knot -p·q times.
    for (p, q) in [(2, 3), (3, 2), (2, 5)] {
        let k = fixtures::torus_knot(p, q, 900);
        let rep = link_report(
            std::slice::from_ref(&k.base),
            &[Some(k.framing.clone())],
            LinkingRule::SolidAngle,
        )
        .unwrap();
        assert_eq!(rep.h_rounded, Some(-(p * q) as i64), "({p},{q})");
        let t = rep.self_terms[0].as_ref().unwrap();
        assert_abs_diff_eq!(t.sl_value, t.twist + t.writhe, epsilon = 1e-2);
    }
}

#[test]
fn midpoint_and_solid_angle_rules_agree() {
    let (a, b) = fixtures::hopf_link(400);
    let s = gauss_linking(&a, &b, LinkingRule::SolidAngle).unwrap();
    let m = gauss_linking(&a, &b, LinkingRule::Midpoint).unwrap();
    assert_abs_diff_eq!(s, m, epsilon = 1e-3);
}
