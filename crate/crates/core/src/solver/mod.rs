//! Per-sphere least-squares medial axis solver.
//!
//! Each sphere is pinned to one sample and iterated as a fixed point of
//! `s ← argmin ω₁E_maximal + ω₂E_inscribed + ω_pin·E_pinning`. Support,
//! blend and reweighting factors are frozen at the previous iterate and the
//! argmin is found by damped Gauss-Newton steps with an energy line search,
//! confined to the previous sphere slightly inflated. Spheres never
//! interact, so batches run in parallel and are bit-identical for any
//! worker count.

mod config;
pub mod residuals;
pub mod system;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{InitStrategy, InscriptionVariant, Irls, MaximalityVariant, Resolved, SolverConfig};
pub use residuals::{
    inscription_support_weight, inverse_radius_residual, maximality_residual, pinning_residual,
    target_radius_residual, Residual,
};
pub use system::{build_system, for_each_residual, gauss_newton_step, NormalEquations, SystemBuild, Workspace};

use crate::cloud::{stream_rng, OrientedPointCloud};
use crate::fields::Sphere;
use crate::Vector;

#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
pub enum SolverError {
    #[error("normal equations are numerically singular")]
    SingularSystem,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("pin index {index} out of range for {len} points")]
    PinOutOfRange { index: usize, len: usize },
    #[error("initial radius {radius} below the radius floor {floor}")]
    BadInit { radius: f64, floor: f64 },
    #[error("sphere shrinking did not converge within {cap} updates")]
    NonConvergence { cap: usize },
}

/// One converged (or abandoned) sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedialAtom<const D: usize> {
    pub sphere: Sphere<D>,
    pub pin_index: usize,
    pub iterations_run: usize,
    pub converged: bool,
    pub final_step_norm: f64,
    /// Set when the solve stopped on an error; `sphere` is the last iterate.
    pub failure: Option<SolverError>,
}

/// Which algorithm produced a [`MedialResult`], with its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Method {
    Lsmat { config: SolverConfig },
    LsmatIrls { config: SolverConfig },
    Shrink { r_init: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedialResult<const D: usize> {
    pub method: Method,
    pub atoms: Vec<MedialAtom<D>>,
    pub cloud_checksum: String,
}

impl<const D: usize> MedialResult<D> {
    pub fn centers(&self) -> Vec<Vector<D>> {
        self.atoms.iter().map(|a| a.sphere.center).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, &SolverError)> {
        self.atoms
            .iter()
            .filter_map(|a| a.failure.as_ref().map(|e| (a.pin_index, e)))
    }

    pub fn converged_fraction(&self) -> f64 {
        if self.atoms.is_empty() {
            return 0.0;
        }
        self.atoms.iter().filter(|a| a.converged).count() as f64 / self.atoms.len() as f64
    }
}

/// Pins to solve for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pins {
    All,
    Indices(Vec<usize>),
}

impl Pins {
    fn resolve(&self, len: usize) -> Result<Vec<usize>, SolverError> {
        match self {
            Pins::All => Ok((0..len).collect()),
            Pins::Indices(v) => {
                if let Some(&bad) = v.iter().find(|&&i| i >= len) {
                    return Err(SolverError::PinOutOfRange { index: bad, len });
                }
                Ok(v.clone())
            }
        }
    }
}

/// Starting sphere for `pin_index` under `config.init`.
pub fn initial_sphere<const D: usize>(
    cloud: &OrientedPointCloud<D>,
    config: &SolverConfig,
    pin_index: usize,
) -> Sphere<D> {
    let diag = cloud.diag();
    let floor = crate::pct_to_world(config.radius_floor, diag);
    let s = match config.init {
        InitStrategy::AlongNormal => Sphere::new(
            cloud.point(pin_index) - cloud.normal(pin_index) * (0.25 * diag),
            0.25 * diag,
        ),
        InitStrategy::Random => {
            let mut rng = stream_rng(config.seed, pin_index as u64);
            let (lo, hi) = (cloud.bbox_min(), cloud.bbox_max());
            let center = Vector::<D>::from_fn(|k, _| rng.gen_range(lo[k]..=hi[k]));
            Sphere::new(center, rng.gen_range(0.05..=0.5) * diag)
        }
    };
    Sphere::new(s.center, s.radius.max(floor))
}

/// Iterates one sphere from `init`. Errors abort that sphere only; the
/// returned atom then carries `failure` and the last good iterate.
pub fn solve_sphere<const D: usize>(
    pin_index: usize,
    cloud: &OrientedPointCloud<D>,
    config: &SolverConfig,
    init: Sphere<D>,
) -> Result<MedialAtom<D>, SolverError> {
    config.validate().map_err(SolverError::InvalidConfig)?;
    if pin_index >= cloud.len() {
        return Err(SolverError::PinOutOfRange {
            index: pin_index,
            len: cloud.len(),
        });
    }
    let params = config.resolve(cloud.diag());
    if init.radius < params.radius_floor {
        return Err(SolverError::BadInit {
            radius: init.radius,
            floor: params.radius_floor,
        });
    }
    let atom = iterate(pin_index, cloud, config.max_iters, &params, init, &mut Workspace::default(), None);
    match &atom.failure {
        Some(e) => Err(e.clone()),
        None => Ok(atom),
    }
}

/// As [`solve_sphere`] but also returns every iterate, starting with `init`.
pub fn solve_sphere_traced<const D: usize>(
    pin_index: usize,
    cloud: &OrientedPointCloud<D>,
    config: &SolverConfig,
    init: Sphere<D>,
) -> (MedialAtom<D>, Vec<Sphere<D>>) {
    let params = config.resolve(cloud.diag());
    let mut trace = vec![init];
    let atom = iterate(
        pin_index,
        cloud,
        config.max_iters,
        &params,
        init,
        &mut Workspace::default(),
        Some(&mut trace),
    );
    (atom, trace)
}

fn iterate<const D: usize>(
    pin_index: usize,
    cloud: &OrientedPointCloud<D>,
    max_iters: usize,
    params: &Resolved,
    init: Sphere<D>,
    ws: &mut Workspace,
    mut trace: Option<&mut Vec<Sphere<D>>>,
) -> MedialAtom<D> {
    let mut s = init;
    let mut step_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut failure = None;
    while iterations < max_iters {
        ws.freeze(&s, cloud, params);
        let next = match minimize_frozen(s, cloud, pin_index, params, ws) {
            Ok(next) => next,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        step_norm = distance(&next, &s);
        s = next;
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(s);
        }
        if step_norm < params.step_tol {
            break;
        }
    }
    if params.omega_pin > 0.0 {
        s = enforce_pin(s, cloud.point(pin_index), params.d_pin);
    }
    MedialAtom {
        sphere: s,
        pin_index,
        iterations_run: iterations,
        converged: failure.is_none() && step_norm < params.step_tol,
        final_step_norm: step_norm,
        failure,
    }
}

/// Inner Gauss-Newton steps allowed per fixed-point iteration.
const INNER_STEPS: usize = 20;
/// Step halvings tried before an inner step is given up.
const BACKTRACKS: usize = 16;
/// Each update must stay inside the previous sphere inflated by this
/// fraction of `r_prev + h_support`.
const GROWTH_REACH: f64 = 0.5;

fn distance<const D: usize>(a: &Sphere<D>, b: &Sphere<D>) -> f64 {
    ((a.center - b.center).norm_squared() + (a.radius - b.radius).powi(2)).sqrt()
}

/// Pulls `trial` back toward `start` until the sphere fits inside `start`
/// grown by `reach`. Along the segment `‖Δc‖ + Δr` is linear in the
/// fraction taken, so the cut is exact.
fn contain<const D: usize>(start: &Sphere<D>, trial: Sphere<D>, reach: f64) -> Sphere<D> {
    let dc = trial.center - start.center;
    let dr = trial.radius - start.radius;
    let growth = dc.norm() + dr;
    if growth <= reach {
        return trial;
    }
    let k = reach / growth;
    Sphere::new(start.center + dc * k, start.radius + dr * k)
}

/// Minimizes the energy with weights frozen in `ws`, starting from `start`,
/// by damped Gauss-Newton with backtracking on the energy. Without
/// inscription the step is left unbounded so pure pressure grows by ε.
fn minimize_frozen<const D: usize>(
    start: Sphere<D>,
    cloud: &OrientedPointCloud<D>,
    pin_index: usize,
    params: &Resolved,
    ws: &Workspace,
) -> Result<Sphere<D>, SolverError> {
    let reach = (params.omega2 > 0.0).then(|| GROWTH_REACH * (start.radius + params.h_support));
    let mut s = start;
    let mut built = system::build_frozen(&s, cloud, pin_index, params, ws);
    for _ in 0..INNER_STEPS {
        let damping = params.step_damping * built.equations.trace();
        let delta = gauss_newton_step(&built.equations, damping)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..BACKTRACKS {
            let mut trial = s.offset(&delta.scaled(t));
            trial.radius = trial.radius.max(params.radius_floor);
            if let Some(reach) = reach {
                trial = contain(&start, trial, reach);
            }
            let trial_built = system::build_frozen(&trial, cloud, pin_index, params, ws);
            if trial_built.energy <= built.energy {
                accepted = Some((trial, trial_built));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, trial_built)) = accepted else {
            break;
        };
        let step = distance(&trial, &s);
        s = trial;
        built = trial_built;
        if step < params.step_tol {
            break;
        }
    }
    Ok(s)
}

/// Moves the center straight toward the pin until `‖c − p‖ − r ≤ d_pin`
/// holds exactly; the penalty alone leaves a residual violation that
/// scales with ω₁ε/ω_pin.
fn enforce_pin<const D: usize>(s: Sphere<D>, pin: &Vector<D>, d_pin: f64) -> Sphere<D> {
    let offset = s.center - pin;
    let len = offset.norm();
    let reach = s.radius + d_pin;
    if len > reach {
        Sphere::new(pin + offset * (reach / len), s.radius)
    } else {
        s
    }
}

/// Solves every requested pin independently, in pin order.
pub fn solve_all<const D: usize>(
    cloud: &OrientedPointCloud<D>,
    config: &SolverConfig,
    pins: &Pins,
) -> Result<MedialResult<D>, SolverError> {
    config.validate().map_err(SolverError::InvalidConfig)?;
    let pins = pins.resolve(cloud.len())?;
    let params = config.resolve(cloud.diag());
    let atoms = pins
        .par_iter()
        .map_init(Workspace::default, |ws, &pin| {
            let init = initial_sphere(cloud, config, pin);
            iterate(pin, cloud, config.max_iters, &params, init, ws, None)
        })
        .collect();
    let method = match config.irls {
        Irls::Off => Method::Lsmat { config: *config },
        Irls::L1 { .. } => Method::LsmatIrls { config: *config },
    };
    Ok(MedialResult {
        method,
        atoms,
        cloud_checksum: cloud.checksum(),
    })
}

/// ℓ¹-reweighted batch solve; `config.irls` must be [`Irls::L1`].
pub fn solve_all_irls<const D: usize>(
    cloud: &OrientedPointCloud<D>,
    config: &SolverConfig,
    pins: &Pins,
) -> Result<MedialResult<D>, SolverError> {
    if config.irls == Irls::Off {
        return Err(SolverError::InvalidConfig(
            "IRLS solve requires irls = l1(delta)".into(),
        ));
    }
    solve_all(cloud, config, pins)
}
