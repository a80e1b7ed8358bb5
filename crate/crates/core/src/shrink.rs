//! Sphere-shrinking baseline.
//!
//! Starting from a huge sphere tangent at the pin `(p, n)`, repeatedly
//! replace it by the sphere tangent at `(p, n)` through the nearest sample
//! that violates emptiness. Every candidate is tangent at `p` on the same
//! side, so radii decrease monotonically.

use rayon::prelude::*;
use thiserror::Error;

use crate::cloud::OrientedPointCloud;
use crate::fields::Sphere;
use crate::solver::{MedialAtom, MedialResult, Method, Pins, SolverError};
use crate::Vector;

/// Default initial radius, in multiples of the diagonal.
pub const DEFAULT_R_INIT_DIAGS: f64 = 2.0;

#[derive(Debug, Clone, Copy, Error, PartialEq)]
pub enum ShrinkError {
    #[error("contact point lies on the tangent plane")]
    DegenerateTangency,
    #[error("no convergence within {cap} updates")]
    NonConvergence { cap: usize },
}

/// Sphere tangent to the plane at `p` with inward center along `−n`,
/// passing through `f`: `r = ‖p − f‖² / (2 n·(p − f))`, `c = p − r n`.
pub fn tangent_sphere<const D: usize>(
    p: &Vector<D>,
    n: &Vector<D>,
    f: &Vector<D>,
) -> Result<Sphere<D>, ShrinkError> {
    let d = p - f;
    let denom = 2.0 * n.dot(&d);
    if denom <= 2e-12 {
        if d.norm_squared() == 0.0 {
            // f = p: the sphere collapses onto the pin
            return Ok(Sphere::new(*p, 0.0));
        }
        return Err(ShrinkError::DegenerateTangency);
    }
    let r = d.norm_squared() / denom;
    Ok(Sphere::new(p - n * r, r))
}

/// Outcome of one shrink run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkOutcome<const D: usize> {
    pub sphere: Sphere<D>,
    /// Number of tangent-sphere updates performed.
    pub updates: usize,
}

/// Shrinks from radius `r_init` (world units) until the sphere is empty.
///
/// Samples within `1e−12·diag` of the pin count as the pin itself.
pub fn shrink_sphere<const D: usize>(
    pin_index: usize,
    cloud: &OrientedPointCloud<D>,
    r_init: f64,
) -> Result<ShrinkOutcome<D>, ShrinkError> {
    shrink_inner(pin_index, cloud, r_init, |_| {})
}

/// [`shrink_sphere`] that also returns every intermediate sphere, starting
/// with the initial one.
pub fn shrink_sphere_traced<const D: usize>(
    pin_index: usize,
    cloud: &OrientedPointCloud<D>,
    r_init: f64,
) -> (Result<ShrinkOutcome<D>, ShrinkError>, Vec<Sphere<D>>) {
    let mut trace = Vec::new();
    let out = shrink_inner(pin_index, cloud, r_init, |s| trace.push(*s));
    (out, trace)
}

fn shrink_inner<const D: usize>(
    pin_index: usize,
    cloud: &OrientedPointCloud<D>,
    r_init: f64,
    mut visit: impl FnMut(&Sphere<D>),
) -> Result<ShrinkOutcome<D>, ShrinkError> {
    let p = *cloud.point(pin_index);
    let n = *cloud.normal(pin_index);
    let diag = cloud.diag();
    let same_as_pin = 1e-12 * diag;
    let inside_tol = 1e-9 * diag;
    let cap = 10 * cloud.len();

    let mut sphere = Sphere::new(p - n * r_init, r_init);
    visit(&sphere);
    let mut updates = 0;
    loop {
        let nearest = cloud.nearest_filtered(&sphere.center, |i| {
            i != pin_index && (cloud.point(i) - p).norm() > same_as_pin
        });
        let Some((fi, dist)) = nearest else {
            return Ok(ShrinkOutcome { sphere, updates });
        };
        if dist >= sphere.radius - inside_tol {
            return Ok(ShrinkOutcome { sphere, updates });
        }
        if updates >= cap {
            return Err(ShrinkError::NonConvergence { cap });
        }
        let next = match tangent_sphere(&p, &n, cloud.point(fi)) {
            Ok(s) => s,
            // f inside a sphere tangent at p lies strictly on the inner side,
            // so this only triggers from rounding; collapse onto the pin
            Err(ShrinkError::DegenerateTangency) => Sphere::new(p, 0.0),
            Err(e) => return Err(e),
        };
        let change = sphere.radius - next.radius;
        sphere = next;
        visit(&sphere);
        updates += 1;
        if change.abs() < inside_tol {
            return Ok(ShrinkOutcome { sphere, updates });
        }
    }
}

/// Runs [`shrink_sphere`] for every pin, in pin order.
pub fn shrink_all<const D: usize>(
    cloud: &OrientedPointCloud<D>,
    pins: &Pins,
    r_init_diags: f64,
) -> Result<MedialResult<D>, SolverError> {
    let indices: Vec<usize> = match pins {
        Pins::All => (0..cloud.len()).collect(),
        Pins::Indices(v) => {
            if let Some(&bad) = v.iter().find(|&&i| i >= cloud.len()) {
                return Err(SolverError::PinOutOfRange {
                    index: bad,
                    len: cloud.len(),
                });
            }
            v.clone()
        }
    };
    let r_init = r_init_diags * cloud.diag();
    let atoms = indices
        .par_iter()
        .map(|&pin| match shrink_sphere(pin, cloud, r_init) {
            Ok(out) => MedialAtom {
                sphere: out.sphere,
                pin_index: pin,
                iterations_run: out.updates,
                converged: true,
                final_step_norm: 0.0,
                failure: None,
            },
            Err(e) => MedialAtom {
                sphere: Sphere::new(*cloud.point(pin), 0.0),
                pin_index: pin,
                iterations_run: 10 * cloud.len(),
                converged: false,
                final_step_norm: f64::NAN,
                failure: Some(match e {
                    ShrinkError::NonConvergence { cap } => SolverError::NonConvergence { cap },
                    ShrinkError::DegenerateTangency => SolverError::SingularSystem,
                }),
            },
        })
        .collect();
    Ok(MedialResult {
        method: Method::Shrink { r_init: r_init_diags },
        atoms,
        cloud_checksum: cloud.checksum(),
    })
}
