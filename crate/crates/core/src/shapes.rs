//! Parametric test shapes with exact outward normals.
//!
//! 2D shapes are sampled uniformly in arc length and also yield a dense
//! ground-truth polygon; 3D shapes are sampled on quasi-uniform lattices.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cloud::{CloudError, OrientedPointCloud};
use crate::eval::{EvalError, Polygon};
use crate::Vector;

type V2 = Vector<2>;
type V3 = Vector<3>;

/// Vertices used for polygons of smooth 2D shapes.
pub const POLYGON_SEGMENTS: usize = 4096;

/// Closed planar shapes. All are centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "shape")]
pub enum Shape2 {
    Circle { radius: f64 },
    /// Semi-axes `a` along x and `b` along y.
    Ellipse { a: f64, b: f64 },
    Rectangle { width: f64, height: f64 },
    /// `r(θ) = radius·(1 + amplitude·cos(lobes·θ))`.
    Star { radius: f64, amplitude: f64, lobes: u32 },
    Annulus { outer: f64, inner: f64 },
    /// `width × height` box with a V-shaped notch cut down from the middle
    /// of its top edge.
    NotchedBox {
        width: f64,
        height: f64,
        notch_width: f64,
        notch_depth: f64,
    },
}

pub const SHAPE2_NAMES: [&str; 6] = ["circle", "ellipse", "rectangle", "star", "annulus", "notched-box"];

impl Shape2 {
    /// Fixture with default parameters.
    pub fn named(name: &str) -> Option<Self> {
        Some(match name {
            "circle" => Shape2::Circle { radius: 1.0 },
            "ellipse" => Shape2::Ellipse { a: 1.0, b: 0.5 },
            "rectangle" => Shape2::Rectangle {
                width: 2.0,
                height: 1.0,
            },
            "star" => Shape2::Star {
                radius: 1.0,
                amplitude: 0.3,
                lobes: 5,
            },
            "annulus" => Shape2::Annulus { outer: 1.0, inner: 0.5 },
            "notched-box" => Shape2::NotchedBox {
                width: 2.0,
                height: 1.0,
                notch_width: 0.3,
                notch_depth: 0.5,
            },
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape2::Circle { .. } => "circle",
            Shape2::Ellipse { .. } => "ellipse",
            Shape2::Rectangle { .. } => "rectangle",
            Shape2::Star { .. } => "star",
            Shape2::Annulus { .. } => "annulus",
            Shape2::NotchedBox { .. } => "notched-box",
        }
    }

    /// `n` samples spread uniformly in arc length with outward normals.
    pub fn sample(&self, n: usize) -> (Vec<V2>, Vec<V2>) {
        match *self {
            Shape2::Circle { radius } => smooth_loop(n, |t| ellipse_at(radius, radius, t), false),
            Shape2::Ellipse { a, b } => smooth_loop(n, |t| ellipse_at(a, b, t), false),
            Shape2::Star {
                radius,
                amplitude,
                lobes,
            } => smooth_loop(n, |t| star_at(radius, amplitude, lobes, t), false),
            Shape2::Annulus { outer, inner } => {
                let n_out = ((n as f64) * outer / (outer + inner)).round() as usize;
                let (mut pts, mut nrm) = smooth_loop(n_out, |t| ellipse_at(outer, outer, t), false);
                // inner boundary traversed clockwise: outward from the solid
                let (p2, n2) = smooth_loop(n - n_out, |t| ellipse_at(inner, inner, t), true);
                pts.extend(p2);
                nrm.extend(n2);
                (pts, nrm)
            }
            Shape2::Rectangle { .. } | Shape2::NotchedBox { .. } => {
                polyline_samples(&self.corners().expect("polygonal shape"), n)
            }
        }
    }

    pub fn cloud(&self, n: usize) -> Result<OrientedPointCloud<2>, CloudError> {
        let (p, nrm) = self.sample(n);
        OrientedPointCloud::new(p, nrm)
    }

    /// Exact corners for polygonal shapes, counter-clockwise.
    fn corners(&self) -> Option<Vec<V2>> {
        match *self {
            Shape2::Rectangle { width, height } => {
                let (w, h) = (width / 2.0, height / 2.0);
                Some(vec![V2::new(-w, -h), V2::new(w, -h), V2::new(w, h), V2::new(-w, h)])
            }
            Shape2::NotchedBox {
                width,
                height,
                notch_width,
                notch_depth,
            } => {
                let (w, h, nw) = (width / 2.0, height / 2.0, notch_width / 2.0);
                Some(vec![
                    V2::new(-w, -h),
                    V2::new(w, -h),
                    V2::new(w, h),
                    V2::new(nw, h),
                    V2::new(0.0, h - notch_depth),
                    V2::new(-nw, h),
                    V2::new(-w, h),
                ])
            }
            _ => None,
        }
    }

    /// Boundary as a polygon: exact for polygonal shapes, otherwise
    /// [`POLYGON_SEGMENTS`] vertices per loop.
    pub fn polygon(&self) -> Result<Polygon, EvalError> {
        if let Some(c) = self.corners() {
            return Polygon::single(c);
        }
        let m = POLYGON_SEGMENTS;
        match *self {
            Shape2::Annulus { outer, inner } => Polygon::new(vec![
                smooth_loop(m, |t| ellipse_at(outer, outer, t), false).0,
                smooth_loop(m, |t| ellipse_at(inner, inner, t), true).0,
            ]),
            _ => {
                let (pts, _) = self.sample(m);
                Polygon::single(pts)
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = match *self {
            Shape2::Circle { radius } => radius > 0.0,
            Shape2::Ellipse { a, b } => a > 0.0 && b > 0.0,
            Shape2::Rectangle { width, height } => width > 0.0 && height > 0.0,
            Shape2::Star {
                radius,
                amplitude,
                lobes,
            } => radius > 0.0 && (0.0..1.0).contains(&amplitude) && lobes >= 1,
            Shape2::Annulus { outer, inner } => inner > 0.0 && outer > inner,
            Shape2::NotchedBox {
                width,
                height,
                notch_width,
                notch_depth,
            } => width > notch_width && notch_width > 0.0 && height > notch_depth && notch_depth > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid parameters for {self}"))
        }
    }
}

impl fmt::Display for Shape2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape2 {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Shape2::named(s).ok_or_else(|| format!("unknown 2D shape `{s}` (expected one of {})", SHAPE2_NAMES.join(", ")))
    }
}

/// Point and tangent of an axis-aligned ellipse at angle `t`.
fn ellipse_at(a: f64, b: f64, t: f64) -> (V2, V2) {
    let (s, c) = t.sin_cos();
    (V2::new(a * c, b * s), V2::new(-a * s, b * c))
}

fn star_at(radius: f64, amplitude: f64, lobes: u32, t: f64) -> (V2, V2) {
    let k = lobes as f64;
    let r = radius * (1.0 + amplitude * (k * t).cos());
    let dr = -radius * amplitude * k * (k * t).sin();
    let (s, c) = t.sin_cos();
    (V2::new(r * c, r * s), V2::new(dr * c - r * s, dr * s + r * c))
}

/// Samples a counter-clockwise parametric loop `t ∈ [0, 2π)` uniformly in
/// arc length; `reverse` walks it clockwise and flips the normals, as for
/// a hole.
fn smooth_loop(n: usize, curve: impl Fn(f64) -> (V2, V2), reverse: bool) -> (Vec<V2>, Vec<V2>) {
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    // cumulative arc length on a fine parameter grid (trapezoid rule)
    let m = (64 * n).max(8192);
    let speed: Vec<f64> = (0..=m).map(|k| curve(TAU * k as f64 / m as f64).1.norm()).collect();
    let mut arc = vec![0.0; m + 1];
    for k in 1..=m {
        arc[k] = arc[k - 1] + 0.5 * (speed[k - 1] + speed[k]) * TAU / m as f64;
    }
    let total = arc[m];
    let mut pts = Vec::with_capacity(n);
    let mut nrm = Vec::with_capacity(n);
    for i in 0..n {
        let target = total * i as f64 / n as f64;
        let k = arc.partition_point(|&s| s <= target).clamp(1, m);
        let frac = (target - arc[k - 1]) / (arc[k] - arc[k - 1]);
        let t = TAU * ((k - 1) as f64 + frac) / m as f64;
        let t = if reverse { TAU - t } else { t };
        let (p, d) = curve(t);
        pts.push(p);
        let out = V2::new(d.y, -d.x).normalize();
        nrm.push(if reverse { -out } else { out });
    }
    (pts, nrm)
}

/// Uniform samples along a closed counter-clockwise polyline, offset by half
/// a spacing so none lands on a corner.
fn polyline_samples(corners: &[V2], n: usize) -> (Vec<V2>, Vec<V2>) {
    let m = corners.len();
    let edges: Vec<(V2, V2)> = (0..m).map(|i| (corners[i], corners[(i + 1) % m])).collect();
    let lengths: Vec<f64> = edges.iter().map(|(a, b)| (b - a).norm()).collect();
    let total: f64 = lengths.iter().sum();
    let mut pts = Vec::with_capacity(n);
    let mut nrm = Vec::with_capacity(n);
    let (mut edge, mut start) = (0usize, 0.0);
    for i in 0..n {
        let s = total * (i as f64 + 0.5) / n as f64;
        while edge + 1 < m && s > start + lengths[edge] {
            start += lengths[edge];
            edge += 1;
        }
        let (a, b) = edges[edge];
        let d = (b - a) / lengths[edge];
        pts.push(a + d * (s - start).min(lengths[edge]));
        nrm.push(V2::new(d.y, -d.x));
    }
    (pts, nrm)
}

/// Closed surfaces, centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "shape")]
pub enum Shape3 {
    Sphere { radius: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Ring of radius `major` around the z axis, tube radius `minor`.
    Torus { major: f64, minor: f64 },
}

pub const SHAPE3_NAMES: [&str; 3] = ["sphere", "ellipsoid", "torus"];

impl Shape3 {
    pub fn named(name: &str) -> Option<Self> {
        Some(match name {
            "sphere" => Shape3::Sphere { radius: 1.0 },
            "ellipsoid" => Shape3::Ellipsoid { a: 1.0, b: 0.7, c: 0.5 },
            "torus" => Shape3::Torus { major: 1.0, minor: 0.35 },
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape3::Sphere { .. } => "sphere",
            Shape3::Ellipsoid { .. } => "ellipsoid",
            Shape3::Torus { .. } => "torus",
        }
    }

    /// Sphere and ellipsoid use a Fibonacci lattice (mapped for the
    /// ellipsoid); the torus uses a golden-ratio lattice in its angles with
    /// the tube angle warped to equalize area.
    pub fn sample(&self, n: usize) -> (Vec<V3>, Vec<V3>) {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let mut pts = Vec::with_capacity(n);
        let mut nrm = Vec::with_capacity(n);
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            let v = (i as f64 * golden).fract();
            match *self {
                Shape3::Sphere { radius } => {
                    let d = fibonacci_dir(u, v);
                    pts.push(d * radius);
                    nrm.push(d);
                }
                Shape3::Ellipsoid { a, b, c } => {
                    let d = fibonacci_dir(u, v);
                    let p = V3::new(a * d.x, b * d.y, c * d.z);
                    pts.push(p);
                    nrm.push(V3::new(p.x / (a * a), p.y / (b * b), p.z / (c * c)).normalize());
                }
                Shape3::Torus { major, minor } => {
                    let theta = TAU * u;
                    let phi = torus_tube_angle(v, major, minor);
                    let (sp, cp) = phi.sin_cos();
                    let (st, ct) = theta.sin_cos();
                    let d = V3::new(cp * ct, cp * st, sp);
                    pts.push(V3::new((major + minor * cp) * ct, (major + minor * cp) * st, minor * sp));
                    nrm.push(d);
                }
            }
        }
        (pts, nrm)
    }

    pub fn cloud(&self, n: usize) -> Result<OrientedPointCloud<3>, CloudError> {
        let (p, nrm) = self.sample(n);
        OrientedPointCloud::new(p, nrm)
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = match *self {
            Shape3::Sphere { radius } => radius > 0.0,
            Shape3::Ellipsoid { a, b, c } => a > 0.0 && b > 0.0 && c > 0.0,
            Shape3::Torus { major, minor } => minor > 0.0 && major > minor,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid parameters for {}", self.name()))
        }
    }
}

impl FromStr for Shape3 {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Shape3::named(s).ok_or_else(|| format!("unknown 3D shape `{s}` (expected one of {})", SHAPE3_NAMES.join(", ")))
    }
}

fn fibonacci_dir(u: f64, v: f64) -> V3 {
    let z = 1.0 - 2.0 * u;
    let rho = (1.0 - z * z).max(0.0).sqrt();
    let (s, c) = (TAU * v).sin_cos();
    V3::new(rho * c, rho * s, z)
}

/// Inverts the normalized area CDF `(φ + (r/R) sin φ) / 2π` of the tube
/// angle by Newton iteration.
fn torus_tube_angle(v: f64, major: f64, minor: f64) -> f64 {
    let k = minor / major;
    let target = TAU * v;
    let mut phi = target;
    for _ in 0..30 {
        let f = phi + k * phi.sin() - target;
        let step = f / (1.0 + k * phi.cos());
        phi -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    phi.clamp(-PI, 3.0 * PI)
}
