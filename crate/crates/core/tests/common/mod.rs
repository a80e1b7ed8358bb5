//! Analytic medial axes of the default 2D fixtures.
#![allow(dead_code)]

pub mod grad;
pub mod oracles;

use lsmat::shapes::Shape2;
use lsmat::Vector;

pub type V2 = Vector<2>;

/// Medial axis as a list of segments (a point is a zero-length segment).
/// Only fixtures with closed-form axes are covered.
pub fn analytic_axis(shape: &Shape2) -> Option<Vec<(V2, V2)>> {
    match *shape {
        Shape2::Circle { .. } => Some(vec![(V2::zeros(), V2::zeros())]),
        Shape2::Rectangle { width, height } => {
            let (hw, hh) = (width / 2.0, height / 2.0);
            let m = hw.max(hh) - hw.min(hh);
            let (a, b) = if hw >= hh {
                (V2::new(-m, 0.0), V2::new(m, 0.0))
            } else {
                (V2::new(0.0, -m), V2::new(0.0, m))
            };
            let mut segs = vec![(a, b)];
            for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                let corner = V2::new(sx * hw, sy * hh);
                let end = if (corner - a).norm() < (corner - b).norm() { a } else { b };
                segs.push((corner, end));
            }
            Some(segs)
        }
        Shape2::Annulus { outer, inner } => {
            let mid = (outer + inner) / 2.0;
            let k = 2048;
            Some(
                (0..k)
                    .map(|i| {
                        let t0 = i as f64 / k as f64 * std::f64::consts::TAU;
                        let t1 = (i + 1) as f64 / k as f64 * std::f64::consts::TAU;
                        (V2::new(t0.cos(), t0.sin()) * mid, V2::new(t1.cos(), t1.sin()) * mid)
                    })
                    .collect(),
            )
        }
        _ => None,
    }
}

/// Distance from `x` to the axis and the closest axis point.
pub fn project(axis: &[(V2, V2)], x: &V2) -> (f64, V2) {
    axis.iter()
        .map(|(p, q)| {
            let ab = q - p;
            let l2 = ab.norm_squared();
            let t = if l2 > 0.0 { ((x - p).dot(&ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
            let foot = p + ab * t;
            ((x - foot).norm(), foot)
        })
        .fold((f64::INFINITY, V2::zeros()), |best, c| if c.0 < best.0 { c } else { best })
}
