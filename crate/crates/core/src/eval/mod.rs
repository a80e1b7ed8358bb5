//! Ground-truth medial axes of 2D shapes and the E_avg / E_max metrics.
//!
//! The reference axis is built on a raster: occupied pixels, an exact
//! distance transform, then distance-ordered thinning. Errors are measured
//! from each computed center to the nearest reference pixel center and
//! reported in percent of the bounding-box diagonal.

mod edt;
mod polygon;
mod raster;
mod skeleton;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kdtree::KdTree;
use crate::solver::MedialResult;
use crate::Vector;

pub use edt::{distance_transform, feature_transform, DistanceField};
pub use polygon::{segment_distance, signed_area, Polygon};
pub use raster::{rasterize, rasterize_with, BinaryGrid, GridTransform};
pub use skeleton::thin;

/// Raster size used by the reference protocol.
pub const DEFAULT_RESOLUTION: usize = 1024;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("rasterized shape has no interior pixels")]
    EmptyGrid,
    #[error("no {0} to evaluate")]
    EmptyInput(&'static str),
    #[error("diagonal must be positive and finite, got {0}")]
    BadDiagonal(f64),
}

/// Reference medial points in world units.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthAxis {
    pub medial_points: Vec<Vector<2>>,
    pub resolution: usize,
    /// Bounding-box diagonal of the source shape; errors are relative to it.
    pub diag: f64,
}

impl GroundTruthAxis {
    pub fn new(medial_points: Vec<Vector<2>>, resolution: usize, diag: f64) -> Result<Self, EvalError> {
        if medial_points.is_empty() {
            return Err(EvalError::EmptyInput("ground-truth points"));
        }
        if !(diag.is_finite() && diag > 0.0) {
            return Err(EvalError::BadDiagonal(diag));
        }
        Ok(Self {
            medial_points,
            resolution,
            diag,
        })
    }

    /// Rasterizes `polygon` and thins it.
    pub fn from_polygon(polygon: &Polygon, resolution: usize) -> Result<Self, EvalError> {
        let grid = rasterize(polygon, resolution)?;
        let mut axis = extract_medial_pixels(&grid);
        axis.diag = polygon.diag();
        Ok(axis)
    }
}

/// Thinned skeleton of an occupied grid as world-space pixel centers. The
/// diagonal is set to the grid's occupied extent; callers that know the
/// source shape may overwrite it.
pub fn extract_medial_pixels(grid: &BinaryGrid) -> GroundTruthAxis {
    let pixels = thin(grid);
    let medial_points = pixels
        .iter()
        .map(|&(i, j)| grid.transform.pixel_center(i, j))
        .collect();
    let side = grid.transform.scale * grid.resolution as f64;
    GroundTruthAxis {
        medial_points,
        resolution: grid.resolution,
        diag: side * std::f64::consts::SQRT_2,
    }
}

/// Per-atom distances to the reference axis, summarized in percent of the
/// diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub e_avg_pct: f64,
    pub e_max_pct: f64,
    pub n_atoms: usize,
    /// World-unit distance of each center to its nearest reference point.
    pub distances: Vec<f64>,
}

pub fn metrics(result: &MedialResult<2>, gt: &GroundTruthAxis) -> Result<EvalReport, EvalError> {
    metrics_for_centers(&result.centers(), gt)
}

pub fn metrics_for_centers(centers: &[Vector<2>], gt: &GroundTruthAxis) -> Result<EvalReport, EvalError> {
    if centers.is_empty() {
        return Err(EvalError::EmptyInput("atoms"));
    }
    if gt.medial_points.is_empty() {
        return Err(EvalError::EmptyInput("ground-truth points"));
    }
    let tree = KdTree::new(&gt.medial_points);
    let distances: Vec<f64> = centers
        .par_iter()
        .map(|c| tree.nearest(c).map_or(f64::INFINITY, |(_, d)| d))
        .collect();
    let to_pct = |d: f64| 100.0 * d / gt.diag;
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    let max = distances.iter().copied().fold(0.0, f64::max);
    Ok(EvalReport {
        e_avg_pct: to_pct(mean),
        e_max_pct: to_pct(max),
        n_atoms: distances.len(),
        distances,
    })
}
