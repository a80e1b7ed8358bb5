//! Analytic residual gradients against central finite differences.
#![allow(dead_code)]

use lsmat::fields::{phi_plane, phi_plane_grad, phi_point, phi_point_grad, SphereGradient};
use lsmat::solver::{
    inverse_radius_residual, maximality_residual, pinning_residual, target_radius_residual, Residual,
};
use lsmat::{Sphere, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-6;
pub const KINK: f64 = 1e-4;
pub const TOL: f64 = 1e-5;

fn perturbed<const D: usize>(s: &Sphere<D>, k: usize, h: f64) -> Sphere<D> {
    let mut out = *s;
    if k < D {
        out.center[k] += h;
    } else {
        out.radius += h;
    }
    out
}

fn central<const D: usize>(s: &Sphere<D>, f: impl Fn(&Sphere<D>) -> f64) -> SphereGradient<D> {
    let mut g = SphereGradient::zero();
    for k in 0..=D {
        let d = (f(&perturbed(s, k, STEP)) - f(&perturbed(s, k, -STEP))) / (2.0 * STEP);
        if k < D {
            g.center[k] = d;
        } else {
            g.radius = d;
        }
    }
    g
}

fn rel_err<const D: usize>(a: &SphereGradient<D>, b: &SphereGradient<D>) -> f64 {
    let diff = SphereGradient {
        center: a.center - b.center,
        radius: a.radius - b.radius,
    };
    diff.norm() / a.norm().max(b.norm()).max(1e-12)
}

fn random_sphere<const D: usize>(rng: &mut ChaCha8Rng) -> Sphere<D> {
    Sphere::new(Vector::<D>::from_fn(|_, _| rng.gen_range(-1.0..1.0)), rng.gen_range(0.05..1.5))
}

fn random_unit<const D: usize>(rng: &mut ChaCha8Rng) -> Vector<D> {
    loop {
        let v = Vector::<D>::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        if v.norm() > 0.1 {
            return v.normalize();
        }
    }
}

/// Draws configurations until `n` of them are away from every ramp kink
/// and returns the worst relative gradient error over all residual rows.
pub fn worst_error<const D: usize>(seed: u64, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < n {
        let s = random_sphere::<D>(&mut rng);
        let p = Vector::<D>::from_fn(|_, _| rng.gen_range(-1.5..1.5));
        let normal = random_unit::<D>(&mut rng);
        let d_pin = rng.gen_range(0.0..0.2);
        let plane_arg = s.radius - (p - s.center).dot(&normal);
        let point_arg = s.radius - (p - s.center).norm();
        let pin_arg = (s.center - p).norm() - (s.radius + d_pin);
        if [plane_arg, point_arg, pin_arg].iter().any(|a| a.abs() <= KINK) {
            continue;
        }

        let (_, g) = phi_plane_grad(&s, &p, &normal);
        let fd = central(&s, |x| phi_plane(x, &p, &normal));
        worst = worst.max(rel_err(&g, &fd));

        let (_, g) = phi_point_grad(&s, &p);
        let fd = central(&s, |x| phi_point(x, &p));
        worst = worst.max(rel_err(&g, &fd));

        let g = pinning_residual(&s, &p, d_pin).grad;
        let fd = central(&s, |x| pinning_residual(x, &p, d_pin).value);
        worst = worst.max(rel_err(&g, &fd));

        let (r_prev, eps) = (rng.gen_range(0.0..1.0), rng.gen_range(0.01..2.0));
        let g: Residual<D> = maximality_residual(s.radius, r_prev, eps);
        let fd = central(&s, |x| maximality_residual::<D>(x.radius, r_prev, eps).value);
        worst = worst.max(rel_err(&g.grad, &fd));

        let g: Residual<D> = inverse_radius_residual(s.radius, 1e-6);
        let fd = central(&s, |x| inverse_radius_residual::<D>(x.radius, 1e-6).value);
        worst = worst.max(rel_err(&g.grad, &fd));

        let g: Residual<D> = target_radius_residual(s.radius, 0.7);
        let fd = central(&s, |x| target_radius_residual::<D>(x.radius, 0.7).value);
        worst = worst.max(rel_err(&g.grad, &fd));

        checked += 1;
    }
    worst
}

