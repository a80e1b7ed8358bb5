use crate::Vector;

use super::polygon::Polygon;
use super::EvalError;

type V2 = Vector<2>;

/// Uniform scale + translation between pixel indices and world space.
/// Pixel `(i, j)` (column, row) has its center at
/// `origin + scale·(i + ½, j + ½)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridTransform {
    pub origin: V2,
    pub scale: f64,
}

impl GridTransform {
    /// Square grid of `resolution` pixels covering the box, with the shorter
    /// side centered.
    pub fn fit(lo: &V2, hi: &V2, resolution: usize) -> Self {
        let extent = hi - lo;
        let side = extent.x.max(extent.y);
        let scale = side / resolution as f64;
        let slack = V2::repeat(side) - extent;
        Self {
            origin: lo - slack * 0.5,
            scale,
        }
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> V2 {
        self.origin + V2::new(i as f64 + 0.5, j as f64 + 0.5) * self.scale
    }

    /// Continuous pixel coordinates (pixel centers at half-integers).
    pub fn to_pixel(&self, x: &V2) -> V2 {
        (x - self.origin) / self.scale
    }
}

/// Occupancy image, row-major with row `j` at index `j·resolution`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGrid {
    pub resolution: usize,
    pub occupancy: Vec<bool>,
    pub transform: GridTransform,
}

impl BinaryGrid {
    pub fn from_fn(resolution: usize, transform: GridTransform, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut occupancy = vec![false; resolution * resolution];
        for j in 0..resolution {
            for i in 0..resolution {
                occupancy[j * resolution + i] = f(i, j);
            }
        }
        Self {
            resolution,
            occupancy,
            transform,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.occupancy[j * self.resolution + i]
    }

    pub fn count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }
}

/// Marks every pixel whose center lies inside the polygon (even-odd rule),
/// on a square grid fitted to the polygon's bounding box.
pub fn rasterize(polygon: &Polygon, resolution: usize) -> Result<BinaryGrid, EvalError> {
    if resolution == 0 {
        return Err(EvalError::EmptyGrid);
    }
    let (lo, hi) = polygon.bbox();
    let transform = GridTransform::fit(&lo, &hi, resolution);
    rasterize_with(polygon, resolution, transform)
}

/// Rasterizes under an explicit transform.
pub fn rasterize_with(
    polygon: &Polygon,
    resolution: usize,
    transform: GridTransform,
) -> Result<BinaryGrid, EvalError> {
    let mut occupancy = vec![false; resolution * resolution];
    let edges: Vec<(V2, V2)> = polygon.edges().collect();
    let mut crossings = Vec::new();
    for j in 0..resolution {
        let y = transform.origin.y + (j as f64 + 0.5) * transform.scale;
        crossings.clear();
        for (a, b) in &edges {
            if (a.y > y) != (b.y > y) {
                crossings.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        crossings.sort_by(f64::total_cmp);
        // a center at x is inside iff an odd number of crossings lie right of it
        for pair in crossings.chunks_exact(2) {
            // index bounds padded by one; the exact test below decides
            let first = ((pair[0] - transform.origin.x) / transform.scale - 0.5).ceil() - 1.0;
            let last = ((pair[1] - transform.origin.x) / transform.scale - 0.5).ceil();
            let start = first.max(0.0) as usize;
            let end = (last.min(resolution as f64 - 1.0)).max(-1.0);
            if end < 0.0 {
                continue;
            }
            for i in start..=end as usize {
                let x = transform.origin.x + (i as f64 + 0.5) * transform.scale;
                if x >= pair[0] && x < pair[1] {
                    occupancy[j * resolution + i] = true;
                }
            }
        }
    }
    let grid = BinaryGrid {
        resolution,
        occupancy,
        transform,
    };
    if grid.count() == 0 {
        return Err(EvalError::EmptyGrid);
    }
    Ok(grid)
}
