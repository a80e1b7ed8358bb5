//! Exhaustive reference implementations for the raster and metric code.
#![allow(dead_code)]

use lsmat::eval::{BinaryGrid, GridTransform};
use lsmat::Vector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type V2 = Vector<2>;

pub fn unit_frame() -> GridTransform {
    GridTransform {
        origin: V2::zeros(),
        scale: 1.0,
    }
}

/// Nearest background pixel by exhaustive search; the ring just outside the
/// grid is background.
pub fn brute_force_dt(grid: &BinaryGrid) -> Vec<f64> {
    let res = grid.resolution as i64;
    let mut bg = Vec::new();
    for j in -1..=res {
        for i in -1..=res {
            let inside = i >= 0 && j >= 0 && i < res && j < res;
            if !inside || !grid.get(i as usize, j as usize) {
                bg.push((i, j));
            }
        }
    }
    let mut out = vec![0.0; (res * res) as usize];
    for j in 0..res {
        for i in 0..res {
            if !grid.get(i as usize, j as usize) {
                continue;
            }
            let d2 = bg
                .iter()
                .map(|&(x, y)| (x - i).pow(2) + (y - j).pow(2))
                .min()
                .unwrap();
            out[(j * res + i) as usize] = (d2 as f64).sqrt();
        }
    }
    out
}

pub fn random_grid(rng: &mut ChaCha8Rng, res: usize) -> BinaryGrid {
    // union of random discs with salt noise
    let discs: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..6))
        .map(|_| {
            (
                rng.gen_range(0.0..res as f64),
                rng.gen_range(0.0..res as f64),
                rng.gen_range(3.0..res as f64 / 2.0),
            )
        })
        .collect();
    let flips: Vec<bool> = (0..res * res).map(|_| rng.gen_bool(0.03)).collect();
    BinaryGrid::from_fn(res, unit_frame(), |i, j| {
        let hit = discs
            .iter()
            .any(|&(x, y, r)| (i as f64 - x).hypot(j as f64 - y) < r);
        hit != flips[j * res + i]
    })
}

/// Distance from each center to its nearest reference point, by linear scan.
pub fn linear_scan_distances(centers: &[V2], reference: &[V2]) -> Vec<f64> {
    centers
        .iter()
        .map(|c| reference.iter().map(|g| (c - g).norm()).fold(f64::INFINITY, f64::min))
        .collect()
}
