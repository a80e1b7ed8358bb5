//! Per-sphere Gauss-Newton normal equations.
//!
//! A sphere has `D + 1` unknowns (center, radius), so the system is at most
//! 4×4 and lives on the stack. Unknown `D` is the radius.

use crate::cloud::OrientedPointCloud;
use crate::fields::{blend_weight, phi_plane_grad, phi_point_grad, Sphere, SphereGradient};

use super::config::{InscriptionVariant, MaximalityVariant, Resolved};
use super::residuals::{
    inscription_support_weight, inverse_radius_residual, maximality_residual, pinning_residual,
    target_radius_residual, Residual,
};
use super::SolverError;

const MAX_UNKNOWNS: usize = 4;

/// Accumulated `JᵀJ` and `Jᵀr` for one sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalEquations<const D: usize> {
    pub jtj: [[f64; MAX_UNKNOWNS]; MAX_UNKNOWNS],
    pub jtr: [f64; MAX_UNKNOWNS],
}

impl<const D: usize> Default for NormalEquations<D> {
    fn default() -> Self {
        Self::new()
    }
}

impl<const D: usize> NormalEquations<D> {
    pub const UNKNOWNS: usize = D + 1;

    pub fn new() -> Self {
        assert!(D + 1 <= MAX_UNKNOWNS, "only 2D and 3D spheres are supported");
        Self {
            jtj: [[0.0; MAX_UNKNOWNS]; MAX_UNKNOWNS],
            jtr: [0.0; MAX_UNKNOWNS],
        }
    }

    /// Adds one residual row.
    #[inline]
    pub fn add(&mut self, res: &Residual<D>) {
        let n = D + 1;
        let mut g = [0.0; MAX_UNKNOWNS];
        for (k, gk) in g.iter_mut().enumerate().take(n) {
            *gk = res.grad.get(k);
        }
        for i in 0..n {
            if g[i] == 0.0 {
                continue;
            }
            self.jtr[i] += g[i] * res.value;
            for j in 0..n {
                self.jtj[i][j] += g[i] * g[j];
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..=D).map(|k| self.jtj[k][k]).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.jtj[i][j]
    }
}

/// Assembled system plus the energy `Σ ρ²` of its weighted residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemBuild<const D: usize> {
    pub equations: NormalEquations<D>,
    pub energy: f64,
    /// Number of samples that contributed at least one residual.
    pub support: usize,
}

/// One supported sample with its frozen residual coefficients: the
/// square roots of `ω₂·w·x` and `ω₂·w·(1 − x)`, times the IRLS factor.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    index: usize,
    plane: f64,
    point: f64,
}

/// Scratch buffers reused across iterations of one sphere, holding the
/// weights frozen at the previous iterate.
#[derive(Debug, Default)]
pub struct Workspace {
    neighbors: Vec<usize>,
    terms: Vec<Term>,
    r_prev: f64,
}

impl Workspace {
    /// Freezes support, blend and IRLS weights at `s_prev`.
    pub fn freeze<const D: usize>(&mut self, s_prev: &Sphere<D>, cloud: &OrientedPointCloud<D>, params: &Resolved) {
        self.terms.clear();
        self.r_prev = s_prev.radius;
        if params.omega2 <= 0.0 {
            return;
        }
        let reach = s_prev.radius.max(0.0) + params.h_support;
        cloud.neighbors_within_into(&s_prev.center, reach, &mut self.neighbors);
        for &index in &self.neighbors {
            let p = cloud.point(index);
            let normal = cloud.normal(index);
            let w = inscription_support_weight(s_prev, p, params.h_support);
            if w <= 0.0 {
                continue;
            }
            let x = match params.inscription {
                InscriptionVariant::Blended => blend_weight(&s_prev.center, p, normal, params.h_blend),
                InscriptionVariant::PointOnly => 0.0,
                InscriptionVariant::PlaneOnly => 1.0,
            };
            let base = params.omega2 * w;
            let mut plane = (base * x).sqrt();
            let mut point = (base * (1.0 - x)).sqrt();
            if let Some(delta) = params.irls_delta {
                plane *= irls_scale(plane * phi_plane_grad(s_prev, p, normal).0, delta);
                point *= irls_scale(point * phi_point_grad(s_prev, p).0, delta);
            }
            self.terms.push(Term { index, plane, point });
        }
    }

    /// Number of samples in the frozen support.
    pub fn support(&self) -> usize {
        self.terms.len()
    }
}

/// Visits every weighted residual of the linearization at `s_prev`,
/// evaluated at `s`. Shared by the assembler and by tests that rebuild the
/// system one row at a time. Returns the support size.
pub fn for_each_residual<const D: usize, F>(
    s: &Sphere<D>,
    s_prev: &Sphere<D>,
    cloud: &OrientedPointCloud<D>,
    pin_index: usize,
    params: &Resolved,
    ws: &mut Workspace,
    visit: F,
) -> usize
where
    F: FnMut(Residual<D>),
{
    ws.freeze(s_prev, cloud, params);
    visit_frozen(s, cloud, pin_index, params, ws, visit);
    ws.support()
}

/// As [`for_each_residual`] with weights already frozen in `ws`.
fn visit_frozen<const D: usize, F>(
    s: &Sphere<D>,
    cloud: &OrientedPointCloud<D>,
    pin_index: usize,
    params: &Resolved,
    ws: &Workspace,
    mut visit: F,
) where
    F: FnMut(Residual<D>),
{
    let maximal = match params.maximality {
        MaximalityVariant::ConstantPressure => maximality_residual(s.radius, ws.r_prev, params.epsilon),
        MaximalityVariant::InverseRadius => inverse_radius_residual(s.radius, params.inverse_floor),
        MaximalityVariant::TargetRadius { .. } => target_radius_residual(s.radius, params.r_max),
    };
    visit(maximal.scaled(params.omega1.sqrt()));

    for t in &ws.terms {
        let p = cloud.point(t.index);
        if t.plane > 0.0 {
            let (value, grad) = phi_plane_grad(s, p, cloud.normal(t.index));
            visit(Residual { value, grad }.scaled(t.plane));
        }
        if t.point > 0.0 {
            let (value, grad) = phi_point_grad(s, p);
            visit(Residual { value, grad }.scaled(t.point));
        }
    }

    if params.omega_pin > 0.0 {
        let pin = pinning_residual(s, cloud.point(pin_index), params.d_pin);
        visit(pin.scaled(params.omega_pin.sqrt()));
    }
}

/// ℓ¹ reweighting factor `√(δ / max(|ρ|, δ))`: 1 for small residuals,
/// turning `ρ²` into `δ·|ρ|` for large ones.
#[inline]
pub fn irls_scale(prev_residual: f64, delta: f64) -> f64 {
    (delta / prev_residual.abs().max(delta)).sqrt()
}

/// Builds `JᵀJ`, `Jᵀr` and the energy for sphere `s`, with support and
/// blend weights frozen at `s_prev`.
pub fn build_system<const D: usize>(
    s: &Sphere<D>,
    s_prev: &Sphere<D>,
    cloud: &OrientedPointCloud<D>,
    pin_index: usize,
    params: &Resolved,
    ws: &mut Workspace,
) -> SystemBuild<D> {
    ws.freeze(s_prev, cloud, params);
    build_frozen(s, cloud, pin_index, params, ws)
}

/// As [`build_system`] with weights already frozen in `ws`.
pub(crate) fn build_frozen<const D: usize>(
    s: &Sphere<D>,
    cloud: &OrientedPointCloud<D>,
    pin_index: usize,
    params: &Resolved,
    ws: &Workspace,
) -> SystemBuild<D> {
    let mut equations = NormalEquations::new();
    let mut energy = 0.0;
    visit_frozen(s, cloud, pin_index, params, ws, |res| {
        energy += res.value * res.value;
        equations.add(&res);
    });
    SystemBuild {
        equations,
        energy,
        support: ws.support(),
    }
}

/// Solves `(JᵀJ + λI)·δ = −Jᵀr` by Cholesky factorization.
///
/// Unknowns whose row of `JᵀJ` is identically zero carry no information
/// and are left unchanged (their step is 0). Fails with
/// [`SolverError::SingularSystem`] if the damped system restricted to the
/// remaining unknowns is not numerically positive definite.
pub fn gauss_newton_step<const D: usize>(
    eq: &NormalEquations<D>,
    damping: f64,
) -> Result<SphereGradient<D>, SolverError> {
    let n = D + 1;
    let active: Vec<usize> = (0..n)
        .filter(|&i| (0..n).any(|j| eq.jtj[i][j] != 0.0) || eq.jtr[i] != 0.0)
        .collect();
    let m = active.len();
    if m == 0 {
        return Err(SolverError::SingularSystem);
    }
    let mut a = [[0.0; MAX_UNKNOWNS]; MAX_UNKNOWNS];
    let mut b = [0.0; MAX_UNKNOWNS];
    let mut scale: f64 = 0.0;
    for (ri, &i) in active.iter().enumerate() {
        for (rj, &j) in active.iter().enumerate() {
            a[ri][rj] = eq.jtj[i][j];
        }
        a[ri][ri] += damping;
        b[ri] = -eq.jtr[i];
        scale = scale.max(a[ri][ri].abs());
    }
    let x = cholesky_solve(&mut a, &mut b, m, scale)?;
    let mut full = [0.0; MAX_UNKNOWNS];
    for (ri, &i) in active.iter().enumerate() {
        full[i] = x[ri];
    }
    let mut step = SphereGradient::zero();
    for k in 0..D {
        step.center[k] = full[k];
    }
    step.radius = full[D];
    Ok(step)
}

/// In-place LLᵀ solve of the leading `m×m` block.
fn cholesky_solve(
    a: &mut [[f64; MAX_UNKNOWNS]; MAX_UNKNOWNS],
    b: &mut [f64; MAX_UNKNOWNS],
    m: usize,
    scale: f64,
) -> Result<[f64; MAX_UNKNOWNS], SolverError> {
    let tiny = scale * 1e-14;
    for j in 0..m {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > tiny) {
            return Err(SolverError::SingularSystem);
        }
        let l = d.sqrt();
        a[j][j] = l;
        for i in j + 1..m {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / l;
        }
    }
    // forward: L y = b
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i][k] * b[k];
        }
        b[i] = s / a[i][i];
    }
    // backward: Lᵀ x = y
    for i in (0..m).rev() {
        let mut s = b[i];
        for k in i + 1..m {
            s -= a[k][i] * b[k];
        }
        b[i] = s / a[i][i];
    }
    Ok(*b)
}
