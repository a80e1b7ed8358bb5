//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::grad::{worst_error, STEP, TOL};
use common::oracles::{brute_force_dt, linear_scan_distances, random_grid};
use common::{analytic_axis, project, V2};
use lsmat::cloud::{NoiseMode, NoiseSpec};
use lsmat::eval::{distance_transform, metrics, metrics_for_centers, GroundTruthAxis};
use lsmat::fields::kernel;
use lsmat::parallel::with_threads;
use lsmat::shapes::{Shape2, Shape3, SHAPE2_NAMES};
use lsmat::shrink::{shrink_all, DEFAULT_R_INIT_DIAGS};
use lsmat::solver::{solve_all, solve_all_irls, InitStrategy, Irls, Pins, SolverConfig};
use lsmat::{MedialResult, OrientedPointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: u64 = 5;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn along_normal(sigma: f64) -> SolverConfig {
    SolverConfig {
        init: InitStrategy::AlongNormal,
        ..SolverConfig::default_params(sigma)
    }
}

fn star_gt() -> (Shape2, GroundTruthAxis) {
    let star = Shape2::named("star").unwrap();
    let gt = GroundTruthAxis::from_polygon(&star.polygon().unwrap(), 1024).unwrap();
    (star, gt)
}

fn kernel_exactness() -> Verdict {
    let h = 0.8;
    let left = (kernel(h, h) - kernel(h - STEP, h)) / STEP;
    let right = (kernel(h + STEP, h) - kernel(h, h)) / STEP;
    let values = (kernel(0.0, 1.3) - 1.0).abs() <= 1e-12
        && kernel(1.3, 1.3).abs() <= 1e-12
        && (kernel(0.5, 1.0) - 0.31640625).abs() <= 1e-12;
    let c1 = left.abs() < 1e-6 && right.abs() < 1e-6;
    verdict(values && c1, format!("one-sided slopes at h: {left:.1e}, {right:.1e}"))
}

fn gradient_suite() -> Verdict {
    let worst = worst_error::<2>(1, 200).max(worst_error::<3>(2, 200));
    verdict(worst < TOL, format!("worst relative error {worst:.2e} over 2x200 configurations"))
}

fn analytic_shapes() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["circle", "rectangle", "annulus"] {
        let shape = Shape2::named(name).unwrap();
        let cloud = shape.cloud(512).unwrap();
        let diag = cloud.diag();
        let polygon = shape.polygon().unwrap();
        let axis = analytic_axis(&shape).unwrap();
        let res = solve_all(&cloud, &along_normal(0.0), &Pins::All).unwrap();
        let (mut on_axis, mut thickness) = (0, 0);
        for a in &res.atoms {
            let (d, foot) = project(&axis, &a.sphere.center);
            on_axis += (d <= 0.01 * diag) as usize;
            thickness += ((a.sphere.radius - polygon.boundary_distance(&foot)).abs() <= 0.01 * diag) as usize;
        }
        let n = res.atoms.len() as f64;
        let (f_axis, f_thick) = (on_axis as f64 / n, thickness as f64 / n);
        pass &= f_axis >= 0.95 && f_thick >= 0.95;
        parts.push(format!("{name} {:.1}%/{:.1}%", 100.0 * f_axis, 100.0 * f_thick));
    }
    verdict(pass, format!("on-axis/radius within 1% diag: {}", parts.join(", ")))
}

fn parameter_defaults() -> Verdict {
    // ω₁/ω₂ = 0.007σ + 0.02, h = 0.74σ + 0.49, d_pin = 0.75σ
    let table = [(0.0, 0.02, 0.49, 0.0), (1.0, 0.027, 1.23, 0.75), (3.0, 0.041, 2.71, 2.25)];
    let pass = table.iter().all(|&(sigma, ratio, h, d_pin)| {
        let c = SolverConfig::default_params(sigma);
        (c.omega_ratio - ratio).abs() < 1e-12
            && (c.h_blend - h).abs() < 1e-12
            && c.h_support == c.h_blend
            && (c.d_pin - d_pin).abs() < 1e-12
            && c.epsilon == 100.0
    });
    verdict(pass, "sigma 0, 1, 3")
}

fn mean_eavg(sigma: f64, gt: &GroundTruthAxis, run: impl Fn(&OrientedPointCloud<2>, u64) -> MedialResult<2>) -> f64 {
    let star = Shape2::named("star").unwrap().cloud(512).unwrap();
    (0..SEEDS)
        .map(|seed| {
            let cloud = star.perturb(&NoiseSpec::gaussian(sigma, NoiseMode::Isotropic, seed));
            metrics(&run(&cloud, seed), gt).unwrap().e_avg_pct
        })
        .sum::<f64>()
        / SEEDS as f64
}

fn noise_robustness() -> Verdict {
    let (_, gt) = star_gt();
    let mut pass = true;
    let mut parts = Vec::new();
    for sigma in [0.0, 1.0, 2.0] {
        let lsmat = mean_eavg(sigma, &gt, |c, seed| {
            solve_all(c, &SolverConfig { seed, ..along_normal(sigma) }, &Pins::All).unwrap()
        });
        let shrink = mean_eavg(sigma, &gt, |c, _| shrink_all(c, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap());
        pass &= if sigma == 0.0 {
            (lsmat - shrink).abs() <= 1.0
        } else {
            lsmat < shrink
        };
        parts.push(format!("sigma {sigma}: {lsmat:.3} vs {shrink:.3}"));
    }
    verdict(pass, format!("star E_avg lsmat vs shrink, {SEEDS} seeds: {}", parts.join("; ")))
}

fn convergence() -> Verdict {
    // random initialization, as in the convergence study
    let ellipse = Shape2::named("ellipse").unwrap();
    let gt = GroundTruthAxis::from_polygon(&ellipse.polygon().unwrap(), 1024).unwrap();
    let cloud = ellipse
        .cloud(512)
        .unwrap()
        .perturb(&NoiseSpec::gaussian(2.0, NoiseMode::Isotropic, 0));
    let at = |iters: usize| {
        let config = SolverConfig {
            max_iters: iters,
            ..SolverConfig::default_params(2.0)
        };
        metrics(&solve_all(&cloud, &config, &Pins::All).unwrap(), &gt).unwrap().e_avg_pct
    };
    let (e5, e40) = (at(5), at(40));
    verdict(e40 <= e5 && e40 <= 2.0, format!("noisy ellipse E_avg: iteration 5 {e5:.3}%, iteration 40 {e40:.3}%"))
}

fn metric_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dt_ok = (0..20).all(|_| {
        let grid = random_grid(&mut rng, 64);
        distance_transform(&grid) == brute_force_dt(&grid)
    });
    let gt_pts: Vec<V2> = (0..1000).map(|_| V2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let centers: Vec<V2> = (0..1000).map(|_| V2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))).collect();
    let gt = GroundTruthAxis::new(gt_pts.clone(), 1024, 2.0 * 2f64.sqrt()).unwrap();
    let rep = metrics_for_centers(&centers, &gt).unwrap();
    let nn_ok = rep.distances == linear_scan_distances(&centers, &gt_pts);
    verdict(dt_ok && nn_ok, format!("20 grids exact: {dt_ok}; 1000 atoms exact: {nn_ok}"))
}

fn shrink_violations<const D: usize>(cloud: &OrientedPointCloud<D>, res: &MedialResult<D>) -> usize {
    let diag = cloud.diag();
    res.atoms
        .iter()
        .filter(|a| {
            let s = a.sphere;
            let tangency = ((s.center - cloud.point(a.pin_index)).norm() - s.radius).abs();
            let empty = cloud
                .points()
                .iter()
                .all(|p| s.radius - (p - s.center).norm() <= 1e-6 * diag);
            !a.converged || tangency > 1e-9 * diag || !empty
        })
        .count()
}

fn shrink_contract() -> Verdict {
    let mut violations = 0;
    let mut worst_mean: f64 = 0.0;
    for name in SHAPE2_NAMES {
        let cloud = Shape2::named(name).unwrap().cloud(512).unwrap();
        let res = shrink_all(&cloud, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap();
        violations += shrink_violations(&cloud, &res);
        let mean = res.atoms.iter().map(|a| a.iterations_run as f64).sum::<f64>() / res.atoms.len() as f64;
        worst_mean = worst_mean.max(mean);
        let noisy = cloud.perturb(&NoiseSpec::gaussian(2.0, NoiseMode::Isotropic, 1));
        violations += shrink_violations(&noisy, &shrink_all(&noisy, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap());
    }
    for name in ["sphere", "ellipsoid", "torus"] {
        let cloud = Shape3::named(name).unwrap().cloud(2000).unwrap();
        let res = shrink_all(&cloud, &Pins::All, DEFAULT_R_INIT_DIAGS).unwrap();
        violations += shrink_violations(&cloud, &res);
    }
    verdict(
        violations == 0 && worst_mean < 10.0,
        format!("{violations} invariant violations; largest mean update count {worst_mean:.1}"),
    )
}

fn irls_outliers() -> Verdict {
    let (star, gt) = star_gt();
    let base = star.cloud(512).unwrap();
    let (mut plain, mut robust) = (0.0, 0.0);
    for seed in 0..SEEDS {
        let spec = NoiseSpec {
            outlier_fraction: 0.1,
            ..NoiseSpec::gaussian(0.0, NoiseMode::Isotropic, seed)
        };
        let cloud = base.perturb(&spec);
        let config = SolverConfig { seed, ..along_normal(0.0) };
        plain += metrics(&solve_all(&cloud, &config, &Pins::All).unwrap(), &gt).unwrap().e_avg_pct;
        let config = SolverConfig {
            irls: Irls::l1_default(),
            ..config
        };
        robust += metrics(&solve_all_irls(&cloud, &config, &Pins::All).unwrap(), &gt).unwrap().e_avg_pct;
    }
    let (plain, robust) = (plain / SEEDS as f64, robust / SEEDS as f64);
    verdict(robust < plain, format!("star with 10% outliers, {SEEDS} seeds: plain {plain:.3}%, IRLS {robust:.3}%"))
}

fn throughput() -> Verdict {
    let cloud = Shape3::named("ellipsoid").unwrap().cloud(10_000).unwrap();
    let config = along_normal(0.0);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let start = Instant::now();
    let one = with_threads(Some(1), || solve_all(&cloud, &config, &Pins::All).unwrap());
    let single = start.elapsed();
    let start = Instant::now();
    let eight = with_threads(Some(8), || solve_all(&cloud, &config, &Pins::All).unwrap());
    let multi = start.elapsed();
    let identical = one == eight;
    let iters = one.atoms.iter().map(|a| a.iterations_run).sum::<usize>() as f64 / one.atoms.len() as f64;
    verdict(
        identical && multi < Duration::from_secs(300),
        format!(
            "10k spheres: 8 workers {:.1}s, 1 worker {:.1}s ({cores} core(s) available), mean {iters:.1} iterations, bit-identical: {identical}",
            multi.as_secs_f64(),
            single.as_secs_f64()
        ),
    )
}

fn main() {
    // name, runtime budget
    let criteria: [(&str, Option<u64>, fn() -> Verdict); 10] = [
        ("kernel exactness", Some(1), kernel_exactness),
        ("gradient suite", Some(5), gradient_suite),
        ("analytic shapes", Some(30), analytic_shapes),
        ("parameter defaults", None, parameter_defaults),
        ("noise robustness", Some(120), noise_robustness),
        ("convergence", Some(60), convergence),
        ("metric and DT oracles", None, metric_oracles),
        ("sphere-shrinking contract", None, shrink_contract),
        ("IRLS outliers", Some(180), irls_outliers),
        ("throughput", None, throughput),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = budget.map_or(true, |b| elapsed < Duration::from_secs(b));
        let pass = v.pass && in_time;
        failed += !pass as usize;
        let budget = budget.map_or(String::new(), |b| format!(" / {b}s"));
        println!(
            "criterion {:>2} {}: {name} ({:.2}s{budget}) {}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            v.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
