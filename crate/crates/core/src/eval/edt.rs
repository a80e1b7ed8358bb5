//! Exact Euclidean distance transform (Felzenszwalb–Huttenlocher lower
//! envelope, one pass per axis) with nearest-background tracking.
//!
//! Everything outside the grid counts as background, so a fully occupied
//! grid still has a finite transform.

use super::raster::BinaryGrid;

/// Per-pixel distance (pixel units) to the nearest background pixel center
/// and the location of that center. Exterior pixels hold distance 0 and
/// themselves as feature.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub resolution: usize,
    pub distance: Vec<f64>,
    /// Nearest background pixel, possibly one step outside the grid.
    pub feature: Vec<[i32; 2]>,
}

impl DistanceField {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.distance[j * self.resolution + i]
    }
}

/// Distance of every pixel to the nearest non-occupied pixel center.
pub fn distance_transform(grid: &BinaryGrid) -> Vec<f64> {
    feature_transform(grid).distance
}

pub fn feature_transform(grid: &BinaryGrid) -> DistanceField {
    let res = grid.resolution;
    let m = res + 2;
    let occupied = |x: usize, y: usize| -> bool {
        x >= 1 && y >= 1 && x <= res && y <= res && grid.get(x - 1, y - 1)
    };

    // column pass: squared vertical distance and the row it comes from
    let mut col_d2 = vec![0.0; m * m];
    let mut col_arg = vec![0usize; m * m];
    let mut f = vec![0.0; m];
    let mut env = Envelope::new(m);
    let mut out_d = vec![0.0; m];
    let mut out_a = vec![0usize; m];
    for x in 0..m {
        for (y, fy) in f.iter_mut().enumerate() {
            *fy = if occupied(x, y) { f64::INFINITY } else { 0.0 };
        }
        env.transform(&f, &mut out_d, &mut out_a);
        for y in 0..m {
            col_d2[y * m + x] = out_d[y];
            col_arg[y * m + x] = out_a[y];
        }
    }

    // row pass
    let mut distance = vec![0.0; res * res];
    let mut feature = vec![[0i32; 2]; res * res];
    for y in 1..=res {
        f.copy_from_slice(&col_d2[y * m..(y + 1) * m]);
        env.transform(&f, &mut out_d, &mut out_a);
        for x in 1..=res {
            let fx = out_a[x];
            let fy = col_arg[y * m + fx];
            let k = (y - 1) * res + (x - 1);
            distance[k] = out_d[x].sqrt();
            feature[k] = [fx as i32 - 1, fy as i32 - 1];
        }
    }
    DistanceField {
        resolution: res,
        distance,
        feature,
    }
}

/// Scratch space for the 1-D squared distance transform
/// `d(q) = min_p (q − p)² + f(p)`.
struct Envelope {
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Envelope {
    fn new(n: usize) -> Self {
        Self {
            v: vec![0; n],
            z: vec![0.0; n + 1],
        }
    }

    fn transform(&mut self, f: &[f64], d: &mut [f64], arg: &mut [usize]) {
        let n = f.len();
        // first finite sample starts the envelope
        let Some(first) = f.iter().position(|v| v.is_finite()) else {
            d.fill(f64::INFINITY);
            arg.fill(0);
            return;
        };
        let (v, z) = (&mut self.v, &mut self.z);
        let mut k = 0usize;
        v[0] = first;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in first + 1..n {
            if !f[q].is_finite() {
                continue;
            }
            loop {
                let p = v[k];
                let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                if s <= z[k] && k > 0 {
                    k -= 1;
                    continue;
                }
                if s <= z[k] {
                    // k == 0: replace the only parabola
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                } else {
                    k += 1;
                    v[k] = q;
                    z[k] = s;
                    z[k + 1] = f64::INFINITY;
                }
                break;
            }
        }
        let mut k = 0;
        for q in 0..n {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            let dq = q as f64 - p as f64;
            d[q] = dq * dq + f[p];
            arg[q] = p;
        }
    }
}
