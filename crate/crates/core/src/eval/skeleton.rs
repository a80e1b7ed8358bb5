//! Distance-ordered homotopic thinning.
//!
//! Pixels are visited by ascending distance and deleted when simple, except
//! anchors: ridge pixels around which the distance field climbs clearly
//! slower than unit rate. The
//! surviving anchor bands, which may be a few pixels wide, are then thinned
//! in parallel so that branch ends stay put. Branches thus reach into
//! corners while boundary noise erodes away.

use super::edt::{feature_transform, DistanceField};
use super::raster::BinaryGrid;

/// Neighbor offsets, counter-clockwise from east. Odd positions in the
/// 1-based ring of the connectivity formula are the 4-neighbors.
const RING: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Pixels where the distance grows slower than this in every stencil
/// direction are ridge anchors. A right-angle corner bisector climbs at
/// `1/√2`; flat boundaries climb at 1.
const MAX_RIDGE_SLOPE: f64 = 0.8;
/// Slopes are measured over steps of length 3 to 4, long enough that the
/// half-pixel digitization error of the distance field stays small.
const STENCIL: i32 = 4;
const MIN_STEP2: i32 = 9;

/// Pixel indices `(i, j)` left by thinning, in row-major order.
pub fn thin(grid: &BinaryGrid) -> Vec<(usize, usize)> {
    let field = feature_transform(grid);
    thin_with(grid, &field)
}

pub(crate) fn thin_with(grid: &BinaryGrid, field: &DistanceField) -> Vec<(usize, usize)> {
    let res = grid.resolution;
    let mut on = grid.occupancy.clone();
    let anchor = anchors(grid, field);

    let mut order: Vec<usize> = (0..res * res).filter(|&k| on[k]).collect();
    order.sort_by(|&a, &b| field.distance[a].total_cmp(&field.distance[b]).then(a.cmp(&b)));

    // erode everything but the anchors, then thin the anchor bands down to
    // one pixel, keeping their endpoints
    loop {
        let mut changed = false;
        order.retain(|&k| {
            let bits = ring_bits(&on, res, (k % res) as i32, (k / res) as i32);
            if !anchor[k] && is_simple(bits) {
                on[k] = false;
                changed = true;
                false
            } else {
                true
            }
        });
        if !changed {
            break;
        }
    }
    guo_hall(&mut on, &mut order, res);
    (0..res * res).filter(|&k| on[k]).map(|k| (k % res, k / res)).collect()
}

/// Two-subiteration parallel thinning (Guo and Hall, algorithm A1) of the
/// pixels listed in `live`. Thins bands sideways and keeps endpoints.
fn guo_hall(on: &mut [bool], live: &mut Vec<usize>, res: usize) {
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            doomed.clear();
            for &k in live.iter() {
                let b = ring_bits(on, res, (k % res) as i32, (k / res) as i32);
                // ring order is e, ne, n, nw, w, sw, s, se
                let bit = |i: usize| (b >> i) & 1 == 1;
                let (e, ne, n, nw, w, sw, s, se) = (bit(0), bit(1), bit(2), bit(3), bit(4), bit(5), bit(6), bit(7));
                let c = (!n && (ne || e)) as u8
                    + (!e && (se || s)) as u8
                    + (!s && (sw || w)) as u8
                    + (!w && (nw || n)) as u8;
                let n1 = (nw || n) as u8 + (ne || e) as u8 + (se || s) as u8 + (sw || w) as u8;
                let n2 = (n || ne) as u8 + (e || se) as u8 + (s || sw) as u8 + (w || nw) as u8;
                let m = if pass == 0 { (s || sw || !nw) && w } else { (n || ne || !se) && e };
                if c == 1 && (2..=3).contains(&n1.min(n2)) && !m {
                    doomed.push(k);
                }
            }
            for &k in &doomed {
                on[k] = false;
            }
            changed |= !doomed.is_empty();
        }
        live.retain(|&k| on[k]);
        if !changed {
            break;
        }
    }
}

fn anchors(grid: &BinaryGrid, field: &DistanceField) -> Vec<bool> {
    let res = grid.resolution as i32;
    let stencil: Vec<(i32, i32, f64)> = (-STENCIL..=STENCIL)
        .flat_map(|dj| (-STENCIL..=STENCIL).map(move |di| (di, dj)))
        .filter(|&(di, dj)| (MIN_STEP2..=STENCIL * STENCIL).contains(&(di * di + dj * dj)))
        .map(|(di, dj)| (di, dj, ((di * di + dj * dj) as f64).sqrt()))
        .collect();
    let mut out = vec![false; grid.occupancy.len()];
    for j in 0..res {
        for i in 0..res {
            let k = (j * res + i) as usize;
            if !grid.occupancy[k] {
                continue;
            }
            let dp = field.distance[k];
            // steepest ascent of the distance field around p
            let slope = stencil
                .iter()
                .filter_map(|&(di, dj, len)| {
                    let (x, y) = (i + di, j + dj);
                    let inside = x >= 0 && y >= 0 && x < res && y < res;
                    inside.then(|| (field.distance[(y * res + x) as usize] - dp) / len)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            out[k] = slope < MAX_RIDGE_SLOPE;
        }
    }
    out
}

fn ring_bits(on: &[bool], res: usize, i: i32, j: i32) -> u8 {
    let mut bits = 0u8;
    for (b, &(di, dj)) in RING.iter().enumerate() {
        let (x, y) = (i + di, j + dj);
        if x >= 0 && y >= 0 && (x as usize) < res && (y as usize) < res && on[y as usize * res + x as usize] {
            bits |= 1 << b;
        }
    }
    bits
}

/// 8-connectivity number equal to one: deleting the pixel changes neither
/// the foreground components nor the background holes.
fn is_simple(bits: u8) -> bool {
    let x = |k: usize| (bits >> (k % 8)) & 1;
    let mut n = 0;
    for k in [0usize, 2, 4, 6] {
        let (a, b, c) = (1 - x(k), 1 - x(k + 1), 1 - x(k + 2));
        n += a - a * b * c;
    }
    n == 1
}
