mod common;

use common::{analytic_axis, project, V2};
use lsmat::shapes::{Shape2, Shape3, SHAPE2_NAMES};
use lsmat::shrink::{shrink_all, shrink_sphere, shrink_sphere_traced, tangent_sphere, DEFAULT_R_INIT_DIAGS};
use lsmat::solver::{solve_all, Pins, SolverConfig};
use lsmat::{MedialResult, NoiseMode, NoiseSpec, OrientedPointCloud};
use lsmat::eval::{metrics, GroundTruthAxis};

fn check_invariants<const D: usize>(cloud: &OrientedPointCloud<D>, res: &MedialResult<D>, label: &str) {
    let diag = cloud.diag();
    for a in &res.atoms {
        assert!(a.converged, "{label}: pin {} failed", a.pin_index);
        let s = a.sphere;
        let pin = cloud.point(a.pin_index);
        let tangency = ((s.center - pin).norm() - s.radius).abs();
        assert!(tangency <= 1e-9 * diag, "{label}: pin {} off sphere by {tangency:e}", a.pin_index);
        let intrusion = cloud
            .points()
            .iter()
            .map(|p| s.radius - (p - s.center).norm())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(intrusion <= 1e-6 * diag, "{label}: pin {} intrusion {intrusion:e}", a.pin_index);
    }
}

#[test]
fn emptiness_and_tangency_on_2d_fixtures() {
    for name in SHAPE2_NAMES {
        let cloud = Shape2::named(name).unwrap().cloud(512).unwrap();
        let res = shrink_all(&cloud, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap();
        check_invariants(&cloud, &res, name);
    }
}

#[test]
fn emptiness_and_tangency_on_noisy_and_3d_fixtures() {
    let noisy = Shape2::named("star")
        .unwrap()
        .cloud(512)
        .unwrap()
        .perturb(&NoiseSpec::gaussian(2.0, NoiseMode::Isotropic, 1));
    check_invariants(&noisy, &shrink_all(&noisy, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap(), "noisy star");
    for name in ["sphere", "ellipsoid", "torus"] {
        let cloud = Shape3::named(name).unwrap().cloud(1500).unwrap();
        let res = shrink_all(&cloud, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap();
        check_invariants(&cloud, &res, name);
    }
}

#[test]
fn update_counts_are_single_digit_on_clean_fixtures() {
    for name in SHAPE2_NAMES {
        let cloud = Shape2::named(name).unwrap().cloud(512).unwrap();
        let res = shrink_all(&cloud, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap();
        let mean = res.atoms.iter().map(|a| a.iterations_run as f64).sum::<f64>() / res.atoms.len() as f64;
        assert!(mean < 10.0, "{name}: mean updates {mean}");
    }
}

#[test]
fn radii_never_increase() {
    for name in ["star", "notched-box", "annulus"] {
        let cloud = Shape2::named(name).unwrap().cloud(400).unwrap();
        for pin in (0..cloud.len()).step_by(7) {
            let (out, trace) = shrink_sphere_traced(pin, &cloud, DEFAULT_R_INIT_DIAGS * cloud.diag());
            let out = out.unwrap();
            assert_eq!(trace.len(), out.updates + 1);
            assert_eq!(*trace.last().unwrap(), out.sphere);
            assert!(trace.windows(2).all(|w| w[1].radius <= w[0].radius), "{name} pin {pin}");
        }
    }
}

#[test]
fn clean_circle_recovers_center_and_radius() {
    let cloud = Shape2::Circle { radius: 1.0 }.cloud(512).unwrap();
    let diag = cloud.diag();
    for pin in [0, 77, 300, 511] {
        let s = shrink_sphere(pin, &cloud, DEFAULT_R_INIT_DIAGS * diag).unwrap().sphere;
        assert!(s.center.norm() <= 1e-4 * diag, "{:?}", s);
        assert!((s.radius - 1.0).abs() <= 1e-4 * diag);
    }
}

#[test]
fn tangent_sphere_passes_through_both_points() {
    let p = V2::new(0.3, 0.9);
    let n = V2::new(0.6, 0.8);
    for f in [V2::new(-1.0, -0.2), V2::new(0.5, -2.0), V2::new(0.1, 0.0)] {
        let s = tangent_sphere(&p, &n, &f).unwrap();
        assert!(((s.center - p).norm() - s.radius).abs() < 1e-9);
        assert!(((s.center - f).norm() - s.radius).abs() < 1e-9);
    }
}

#[test]
fn rectangle_centers_lie_on_the_analytic_axis() {
    let shape = Shape2::named("rectangle").unwrap();
    let cloud = shape.cloud(512).unwrap();
    let axis = analytic_axis(&shape).unwrap();
    let res = shrink_all(&cloud, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap();
    for a in &res.atoms {
        let (d, _) = project(&axis, &a.sphere.center);
        assert!(d <= 0.015 * cloud.diag(), "pin {}: {d}", a.pin_index);
    }
}

#[test]
fn atoms_follow_pin_order() {
    let cloud = Shape2::named("ellipse").unwrap().cloud(100).unwrap();
    let res = shrink_all(&cloud, &Pins::Indices(vec![5, 2, 99]), DEFAULT_R_INIT_DIAGS).unwrap();
    assert_eq!(res.atoms.iter().map(|a| a.pin_index).collect::<Vec<_>>(), vec![5, 2, 99]);
    let all = shrink_all(&cloud, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap();
    assert_eq!(all.atoms.len(), 100);
    assert_eq!(res.atoms[2], all.atoms[99]);
}

#[test]
fn noisy_circle_favors_lsmat() {
    let shape = Shape2::Circle { radius: 1.0 };
    let gt = GroundTruthAxis::from_polygon(&shape.polygon().unwrap(), 1024).unwrap();
    let cloud = shape
        .cloud(512)
        .unwrap()
        .perturb(&NoiseSpec::gaussian(2.0, NoiseMode::Isotropic, 11));
    let shrink = metrics(&shrink_all(&cloud, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap(), &gt).unwrap();
    let lsmat = metrics(&solve_all(&cloud, &SolverConfig::default_params(2.0), &Pins::All).unwrap(), &gt).unwrap();
    assert!(shrink.e_avg_pct > lsmat.e_avg_pct, "shrink {} lsmat {}", shrink.e_avg_pct, lsmat.e_avg_pct);
}
