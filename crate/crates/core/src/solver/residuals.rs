//! Scalar residuals with their gradients in `[∇_c, ∂_r]` layout.

use crate::fields::{kernel, ramp, Sphere, SphereGradient};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<const D: usize> {
    pub value: f64,
    pub grad: SphereGradient<D>,
}

impl<const D: usize> Residual<D> {
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            value: self.value * s,
            grad: self.grad.scaled(s),
        }
    }
}

fn radius_only<const D: usize>(value: f64, dr: f64) -> Residual<D> {
    Residual {
        value,
        grad: SphereGradient {
            center: Vector::<D>::zeros(),
            radius: dr,
        },
    }
}

/// Constant-pressure growth: `r − (r_prev + ε)`, gradient `[0, 1]`.
pub fn maximality_residual<const D: usize>(r: f64, r_prev: f64, eps: f64) -> Residual<D> {
    radius_only(r - (r_prev + eps), 1.0)
}

/// `1/r` with `r` clamped to at least `floor`; gradient `[0, −1/r²]`.
pub fn inverse_radius_residual<const D: usize>(r: f64, floor: f64) -> Residual<D> {
    let rc = r.max(floor);
    radius_only(1.0 / rc, -1.0 / (rc * rc))
}

/// `r − R_max`, gradient `[0, 1]`.
pub fn target_radius_residual<const D: usize>(r: f64, r_max: f64) -> Residual<D> {
    radius_only(r - r_max, 1.0)
}

/// Barrier keeping the sphere within `d_pin` of its pin:
/// `R(‖c − p‖ − (r + d_pin))`, gradient `H·[(c − p)/‖c − p‖, −1]`.
pub fn pinning_residual<const D: usize>(s: &Sphere<D>, pin: &Vector<D>, d_pin: f64) -> Residual<D> {
    let d = s.center - pin;
    let len = d.norm();
    let value = ramp(len - (s.radius + d_pin));
    if value > 0.0 {
        // value > 0 implies len > r + d_pin ≥ 0
        Residual {
            value,
            grad: SphereGradient {
                center: d / len,
                radius: -1.0,
            },
        }
    } else {
        Residual {
            value: 0.0,
            grad: SphereGradient::zero(),
        }
    }
}

/// Support weight of sample `p` for a step linearized at `s_prev`:
/// `φ(R(‖c_prev − p‖ − r_prev), h_support)`.
pub fn inscription_support_weight<const D: usize>(s_prev: &Sphere<D>, p: &Vector<D>, h_support: f64) -> f64 {
    kernel(ramp((s_prev.center - p).norm() - s_prev.radius), h_support)
}
