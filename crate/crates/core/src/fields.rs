//! Scalar field building blocks: compact kernel, MLS signed distance and the
//! sphere-to-sample penetration distances.
//!
//! Ramp and Heaviside follow one convention everywhere: `ramp(x) = max(x, 0)`
//! and `heaviside(x) = 1` for `x > 0`, `0` otherwise, so an exactly touching
//! configuration contributes neither residual nor gradient.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::OrientedPointCloud;
use crate::Vector;

/// Candidate medial sphere, in world units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere<const D: usize> {
    pub center: Vector<D>,
    pub radius: f64,
}

impl<const D: usize> Sphere<D> {
    pub fn new(center: Vector<D>, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Adds a `[Δc, Δr]` update.
    pub fn offset(&self, delta: &SphereGradient<D>) -> Self {
        Self {
            center: self.center + delta.center,
            radius: self.radius + delta.radius,
        }
    }
}

/// Gradient (or update) with respect to `(c, r)`, laid out as `[∇_c, ∂_r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGradient<const D: usize> {
    pub center: Vector<D>,
    pub radius: f64,
}

impl<const D: usize> SphereGradient<D> {
    pub fn zero() -> Self {
        Self {
            center: Vector::<D>::zeros(),
            radius: 0.0,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            center: self.center * s,
            radius: self.radius * s,
        }
    }

    /// Component `k`, with `k == D` addressing the radius.
    pub fn get(&self, k: usize) -> f64 {
        if k < D {
            self.center[k]
        } else {
            self.radius
        }
    }

    pub fn norm(&self) -> f64 {
        (self.center.norm_squared() + self.radius * self.radius).sqrt()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("no sample within the kernel support")]
    EmptySupport,
}

#[inline]
pub fn ramp(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[inline]
pub fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Compactly supported kernel `(1 − (x/h)²)⁴` on `[0, h)`, zero beyond.
#[inline]
pub fn kernel(x: f64, h: f64) -> f64 {
    debug_assert!(h > 0.0, "kernel width must be positive");
    let t = x / h;
    if t < 1.0 {
        let s = 1.0 - t * t;
        let s2 = s * s;
        s2 * s2
    } else {
        0.0
    }
}

/// MLS signed distance: kernel-weighted average of point-to-plane offsets.
/// Negative inside. Only meaningful close to the sampled surface.
pub fn mls_sdf<const D: usize>(
    x: &Vector<D>,
    cloud: &OrientedPointCloud<D>,
    h: f64,
) -> Result<f64, FieldError> {
    let (mut num, mut den) = (0.0, 0.0);
    for i in cloud.neighbors_within(x, h) {
        let offset = x - cloud.point(i);
        let w = kernel(offset.norm(), h);
        num += w * cloud.normal(i).dot(&offset);
        den += w;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(FieldError::EmptySupport)
    }
}

/// Penetration of the sphere past the half-space bounded at `(p, n)`.
#[inline]
pub fn phi_plane<const D: usize>(s: &Sphere<D>, p: &Vector<D>, n: &Vector<D>) -> f64 {
    ramp(s.radius - (p - s.center).dot(n))
}

/// Penetration of the point `p` into the sphere.
#[inline]
pub fn phi_point<const D: usize>(s: &Sphere<D>, p: &Vector<D>) -> f64 {
    ramp(s.radius - (p - s.center).norm())
}

/// `phi_plane` and its gradient `H(Φ)·[n, 1]`.
#[inline]
pub fn phi_plane_grad<const D: usize>(
    s: &Sphere<D>,
    p: &Vector<D>,
    n: &Vector<D>,
) -> (f64, SphereGradient<D>) {
    let arg = s.radius - (p - s.center).dot(n);
    if arg > 0.0 {
        (
            arg,
            SphereGradient {
                center: *n,
                radius: 1.0,
            },
        )
    } else {
        (0.0, SphereGradient::zero())
    }
}

/// `phi_point` and its gradient `H(Φ)·[(p − c)/‖p − c‖, 1]`.
///
/// At `p = c` the direction is undefined; the center part is zero there.
#[inline]
pub fn phi_point_grad<const D: usize>(s: &Sphere<D>, p: &Vector<D>) -> (f64, SphereGradient<D>) {
    let d = p - s.center;
    let len = d.norm();
    let arg = s.radius - len;
    if arg > 0.0 {
        let dir = if len > 0.0 { d / len } else { Vector::<D>::zeros() };
        (
            arg,
            SphereGradient {
                center: dir,
                radius: 1.0,
            },
        )
    } else {
        (0.0, SphereGradient::zero())
    }
}

/// Kernel weight of the previous center's projection onto the tangent
/// hyperplane at `(p, n)`: 1 when the projection lands on `p`.
#[inline]
pub fn blend_weight<const D: usize>(c_prev: &Vector<D>, p: &Vector<D>, n: &Vector<D>, h_blend: f64) -> f64 {
    let projected = c_prev - n * (c_prev - p).dot(n);
    kernel((projected - p).norm(), h_blend)
}

/// Blended squared penetration `x·Φ_plane² + (1 − x)·Φ_point²`.
pub fn phi_blend_sq<const D: usize>(
    s: &Sphere<D>,
    p: &Vector<D>,
    n: &Vector<D>,
    c_prev: &Vector<D>,
    h_blend: f64,
) -> f64 {
    let x = blend_weight(c_prev, p, n, h_blend);
    let plane = phi_plane(s, p, n);
    let point = phi_point(s, p);
    x * plane * plane + (1.0 - x) * point * point
}
