//! Oriented point clouds: storage, text IO, perturbation and neighbor queries.
//!
//! Text format, one record per line, whitespace separated:
//!
//! ```text
//! # 2D: x y nx ny
//! 0.0 1.0 0.0 1.0
//! # 3D: x y z nx ny nz
//! ```
//!
//! `#` starts a comment (anywhere on a line) and blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kdtree::KdTree;
use crate::{pct_to_world, Vector};

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("zero-length normal at record {index}")]
    ZeroNormal { index: usize },
    #[error("non-finite value at record {index}")]
    NonFinite { index: usize },
    #[error("point and normal counts differ ({points} vs {normals})")]
    LengthMismatch { points: usize, normals: usize },
    #[error("need at least {required} points in {dim}D, found {found}")]
    TooFewPoints {
        found: usize,
        required: usize,
        dim: usize,
    },
    #[error("bounding box is degenerate (zero diagonal)")]
    DegenerateBounds,
}

const UNIT_SLACK: f64 = 1e-15;

/// Minimum outlier distance from every clean sample beyond 3σ, as a fraction
/// of the diagonal.
pub const OUTLIER_CLEARANCE: f64 = 0.02;
const OUTLIER_TRIES: usize = 1000;

/// Surface samples with unit outward normals and a spatial index.
///
/// Immutable after construction; the kd-tree is built once.
#[derive(Debug, Clone)]
pub struct OrientedPointCloud<const D: usize> {
    points: Vec<Vector<D>>,
    normals: Vec<Vector<D>>,
    bbox_min: Vector<D>,
    bbox_max: Vector<D>,
    diag: f64,
    index: KdTree<D>,
}

impl<const D: usize> OrientedPointCloud<D> {
    /// Builds a cloud, renormalizing normals and computing the bounds.
    pub fn new(points: Vec<Vector<D>>, normals: Vec<Vector<D>>) -> Result<Self, CloudError> {
        if points.len() != normals.len() {
            return Err(CloudError::LengthMismatch {
                points: points.len(),
                normals: normals.len(),
            });
        }
        if points.len() < D + 1 {
            return Err(CloudError::TooFewPoints {
                found: points.len(),
                required: D + 1,
                dim: D,
            });
        }
        let mut unit = Vec::with_capacity(normals.len());
        for (i, (p, n)) in points.iter().zip(&normals).enumerate() {
            if !p.iter().chain(n.iter()).all(|v| v.is_finite()) {
                return Err(CloudError::NonFinite { index: i });
            }
            let len = n.norm();
            if len == 0.0 {
                return Err(CloudError::ZeroNormal { index: i });
            }
            // already-unit normals are kept bit-exact so save/load is idempotent
            unit.push(if (len - 1.0).abs() <= UNIT_SLACK { *n } else { n / len });
        }
        let (bbox_min, bbox_max) = bounds(&points);
        let diag = (bbox_max - bbox_min).norm();
        if !(diag > 0.0) {
            return Err(CloudError::DegenerateBounds);
        }
        let index = KdTree::new(&points);
        Ok(Self {
            points,
            normals: unit,
            bbox_min,
            bbox_max,
            diag,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        D
    }

    pub fn points(&self) -> &[Vector<D>] {
        &self.points
    }

    pub fn normals(&self) -> &[Vector<D>] {
        &self.normals
    }

    pub fn point(&self, i: usize) -> &Vector<D> {
        &self.points[i]
    }

    pub fn normal(&self, i: usize) -> &Vector<D> {
        &self.normals[i]
    }

    pub fn bbox_min(&self) -> &Vector<D> {
        &self.bbox_min
    }

    pub fn bbox_max(&self) -> &Vector<D> {
        &self.bbox_max
    }

    /// Bounding-box diagonal length in world units.
    pub fn diag(&self) -> f64 {
        self.diag
    }

    /// Indices `n` with `‖x − p_n‖ ≤ radius`, ascending.
    pub fn neighbors_within(&self, x: &Vector<D>, radius: f64) -> Vec<usize> {
        self.index.within(x, radius)
    }

    pub fn neighbors_within_into(&self, x: &Vector<D>, radius: f64, out: &mut Vec<usize>) {
        self.index.within_into(x, radius, out)
    }

    /// Nearest sample to `x` accepted by `keep`, with its distance.
    pub fn nearest_filtered<F: Fn(usize) -> bool>(&self, x: &Vector<D>, keep: F) -> Option<(usize, f64)> {
        self.index.nearest_filtered(x, keep)
    }

    /// Copy of the cloud without the listed indices (order of the rest kept).
    pub fn without(&self, remove: &[usize]) -> Result<Self, CloudError> {
        let mut drop = vec![false; self.len()];
        for &i in remove {
            drop[i] = true;
        }
        let keep = (0..self.len()).filter(|&i| !drop[i]);
        let points = keep.clone().map(|i| self.points[i]).collect();
        let normals = keep.map(|i| self.normals[i]).collect();
        Self::new(points, normals)
    }

    /// SHA-256 over the little-endian bytes of every coordinate.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((D as u64).to_le_bytes());
        for (p, n) in self.points.iter().zip(&self.normals) {
            for v in p.iter().chain(n.iter()) {
                hasher.update(v.to_le_bytes());
            }
        }
        hex(&hasher.finalize())
    }

    /// Serializes to the text format. Values use the shortest decimal form
    /// that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * 16 * D);
        for (p, n) in self.points.iter().zip(&self.normals) {
            let fields: Vec<String> = p.iter().chain(n.iter()).map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", fields.join(" "));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CloudError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| CloudError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Applies [`NoiseSpec`]; see [`perturb_detailed`](Self::perturb_detailed).
    pub fn perturb(&self, spec: &NoiseSpec) -> Self {
        self.perturb_detailed(spec).0
    }

    /// Returns the perturbed cloud and the (sorted) indices that were
    /// replaced by outliers.
    ///
    /// Random streams: the outlier selection draws from ChaCha8 stream
    /// `u64::MAX`; record `i` draws from stream `i` alone, so results do
    /// not depend on generation order.
    pub fn perturb_detailed(&self, spec: &NoiseSpec) -> (Self, Vec<usize>) {
        let n = self.len();
        let sigma = pct_to_world(spec.sigma_p, self.diag);
        let n_out = (spec.outlier_fraction * n as f64).floor() as usize;
        let mut outliers = if n_out > 0 {
            let mut rng = stream_rng(spec.seed, u64::MAX);
            index::sample(&mut rng, n, n_out).into_vec()
        } else {
            Vec::new()
        };
        outliers.sort_unstable();
        let mut is_outlier = vec![false; n];
        for &i in &outliers {
            is_outlier[i] = true;
        }

        let mut points = self.points.clone();
        let mut normals = self.normals.clone();
        for i in 0..n {
            if !is_outlier[i] && sigma == 0.0 {
                continue;
            }
            let mut rng = stream_rng(spec.seed, i as u64);
            if is_outlier[i] {
                // uniform in the box, rejecting draws near the clean surface
                let clearance = 3.0 * sigma + OUTLIER_CLEARANCE * self.diag;
                let mut x = Vector::<D>::zeros();
                for _ in 0..OUTLIER_TRIES {
                    x = Vector::<D>::from_fn(|k, _| rng.gen_range(self.bbox_min[k]..=self.bbox_max[k]));
                    if self.nearest_filtered(&x, |_| true).map_or(true, |(_, d)| d > clearance) {
                        break;
                    }
                }
                points[i] = x;
                normals[i] = random_unit(&mut rng);
            } else {
                match spec.mode {
                    NoiseMode::Isotropic => {
                        let g = Vector::<D>::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
                        points[i] += g * sigma;
                    }
                    NoiseMode::AlongNormal => {
                        let g: f64 = rng.sample(StandardNormal);
                        points[i] += normals[i] * (g * sigma);
                    }
                }
            }
        }
        let cloud = Self::new(points, normals).expect("perturbation keeps a valid cloud");
        (cloud, outliers)
    }
}

/// Parses the text format for dimension `D`.
pub fn parse_cloud<const D: usize>(text: &str) -> Result<OrientedPointCloud<D>, CloudError> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CloudError::Malformed {
                line: lineno + 1,
                message: e.to_string(),
            })?;
        if values.len() != 2 * D {
            return Err(CloudError::Malformed {
                line: lineno + 1,
                message: format!("expected {} fields, found {}", 2 * D, values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CloudError::Malformed {
                line: lineno + 1,
                message: "non-finite value".into(),
            });
        }
        let p = Vector::<D>::from_fn(|k, _| values[k]);
        let n = Vector::<D>::from_fn(|k, _| values[D + k]);
        if n.norm() == 0.0 {
            return Err(CloudError::ZeroNormal { index: points.len() });
        }
        points.push(p);
        normals.push(n);
    }
    OrientedPointCloud::new(points, normals)
}

/// Reads an oriented-point file of dimension `D`.
pub fn load_cloud<const D: usize>(path: impl AsRef<Path>) -> Result<OrientedPointCloud<D>, CloudError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CloudError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_cloud(&text)
}

/// Counts the numeric fields of the first data record, for dimension sniffing.
pub fn sniff_fields(text: &str) -> Option<usize> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .map(|l| l.split_whitespace().count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Independent Gaussian per coordinate.
    Isotropic,
    /// One Gaussian displacement along the sample normal.
    AlongNormal,
}

/// Gaussian noise and uniform outliers (kept clear of the clean surface),
/// lengths in percent of the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_p: f64,
    pub mode: NoiseMode,
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn clean() -> Self {
        Self {
            sigma_p: 0.0,
            mode: NoiseMode::Isotropic,
            outlier_fraction: 0.0,
            seed: 0,
        }
    }

    pub fn gaussian(sigma_p: f64, mode: NoiseMode, seed: u64) -> Self {
        Self {
            sigma_p,
            mode,
            outlier_fraction: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.sigma_p >= 0.0) || !self.sigma_p.is_finite() {
            return Err(format!("sigma_p must be >= 0, got {}", self.sigma_p));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(format!(
                "outlier fraction must be in [0, 1), got {}",
                self.outlier_fraction
            ));
        }
        Ok(())
    }
}

/// ChaCha8 generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_unit<const D: usize, R: Rng>(rng: &mut R) -> Vector<D> {
    loop {
        let g = Vector::<D>::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let len = g.norm();
        if len > 1e-12 {
            return g / len;
        }
    }
}

fn bounds<const D: usize>(points: &[Vector<D>]) -> (Vector<D>, Vector<D>) {
    let mut lo = Vector::<D>::repeat(f64::INFINITY);
    let mut hi = Vector::<D>::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::TAU;

    type V2 = Vector<2>;

    fn circle(n: usize, radius: f64) -> OrientedPointCloud<2> {
        let (p, nrm): (Vec<_>, Vec<_>) = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                let u = V2::new(t.cos(), t.sin());
                (u * radius, u)
            })
            .unzip();
        OrientedPointCloud::new(p, nrm).unwrap()
    }

    #[test]
    fn two_point_cloud_diag() {
        let err = parse_cloud::<2>("0 0 1 0\n1 0 -1 0\n").unwrap_err();
        // two points are below the d + 1 minimum
        assert!(matches!(err, CloudError::TooFewPoints { found: 2, .. }));
        let c = parse_cloud::<2>("0 0 1 0\n1 0 -1 0\n0.5 0 0 2\n").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.diag(), 1.0);
        assert_eq!(c.normal(2), &V2::new(0.0, 1.0));
    }

    #[test]
    fn zero_normal_rejected() {
        let err = parse_cloud::<2>("0 0 0 0\n1 0 1 0\n0 1 0 1\n").unwrap_err();
        assert!(matches!(err, CloudError::ZeroNormal { index: 0 }));
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "# header\n0 0 1 0\n\n1 0 x 0\n";
        match parse_cloud::<2>(text).unwrap_err() {
            CloudError::Malformed { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
        match parse_cloud::<2>("0 0 1\n").unwrap_err() {
            CloudError::Malformed { line, .. } => assert_eq!(line, 1),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn comments_and_order() {
        let text = "1 2 0 3 # trailing\n# full line\n\n3 4 5 0\n5 6 0 -1\n";
        let c = parse_cloud::<2>(text).unwrap();
        assert_eq!(c.point(0), &V2::new(1.0, 2.0));
        assert_eq!(c.point(2), &V2::new(5.0, 6.0));
        assert_eq!(c.normal(1), &V2::new(1.0, 0.0));
    }

    #[test]
    fn circle_diag_matches_bbox_scan() {
        let c = circle(512, 0.35);
        let (mut lo, mut hi) = (V2::repeat(f64::MAX), V2::repeat(f64::MIN));
        for p in c.points() {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let brute = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
        assert_eq!(c.diag(), brute);
        // full circle sampled at multiples of 2π/512 hits all four extremes
        assert!((c.diag() - 2.0 * 0.35 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_is_identity() {
        let c = circle(64, 1.0);
        let out = c.perturb(&NoiseSpec::clean());
        assert_eq!(out.points(), c.points());
        assert_eq!(out.normals(), c.normals());
    }

    #[test]
    fn perturb_deterministic_and_keeps_normals() {
        let c = circle(200, 1.0);
        let spec = NoiseSpec {
            sigma_p: 2.0,
            mode: NoiseMode::Isotropic,
            outlier_fraction: 0.1,
            seed: 11,
        };
        let (a, oa) = c.perturb_detailed(&spec);
        let (b, ob) = c.perturb_detailed(&spec);
        assert_eq!(a.checksum(), b.checksum());
        assert_eq!(oa, ob);
        assert_eq!(oa.len(), 20);
        for i in (0..200).filter(|i| !oa.contains(i)) {
            assert_eq!(a.normal(i), c.normal(i));
            assert_ne!(a.point(i), c.point(i));
        }
        for &i in &oa {
            assert!((a.normal(i).norm() - 1.0).abs() < 1e-12);
            for k in 0..2 {
                assert!(a.point(i)[k] >= c.bbox_min()[k] && a.point(i)[k] <= c.bbox_max()[k]);
            }
        }
    }

    #[test]
    fn along_normal_sigma_statistics() {
        // segment from (0,0) to (1,0), normals +y, 10⁴ samples
        let n = 10_000;
        let points: Vec<V2> = (0..n).map(|i| V2::new(i as f64 / (n - 1) as f64, 0.0)).collect();
        let normals = vec![V2::new(0.0, 1.0); n];
        let c = OrientedPointCloud::new(points, normals).unwrap();
        assert_eq!(c.diag(), 1.0);
        let out = c.perturb(&NoiseSpec::gaussian(1.0, NoiseMode::AlongNormal, 4));
        let disp: Vec<f64> = (0..n).map(|i| (out.point(i) - c.point(i)).dot(c.normal(i))).collect();
        let mean = disp.iter().sum::<f64>() / n as f64;
        let var = disp.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        assert!((sd - 0.01).abs() < 0.05 * 0.01, "sd = {sd}");
        // motion is purely along the normal
        for i in 0..n {
            assert_eq!(out.point(i)[0], c.point(i)[0]);
        }
    }

    #[test]
    fn neighbors_edge_cases() {
        let mut pts: Vec<V2> = circle(50, 1.0).points().to_vec();
        pts.push(pts[7]);
        let nrm = vec![V2::new(1.0, 0.0); pts.len()];
        let c = OrientedPointCloud::new(pts, nrm).unwrap();
        assert_eq!(c.neighbors_within(c.point(7), 0.0), vec![7, 50]);
        let all = c.neighbors_within(&V2::new(0.3, -0.2), c.diag() * 2f64.sqrt());
        assert_eq!(all.len(), c.len());
    }

    #[test]
    fn neighbors_match_linear_scan_1000_queries() {
        let mut rng = stream_rng(9, 0);
        let pts: Vec<V2> = (0..3000).map(|_| V2::new(rng.gen(), rng.gen())).collect();
        let nrm = vec![V2::new(0.0, 1.0); pts.len()];
        let c = OrientedPointCloud::new(pts, nrm).unwrap();
        for _ in 0..1000 {
            let q = V2::new(rng.gen(), rng.gen());
            let scan: Vec<usize> = (0..c.len()).filter(|&i| (c.point(i) - q).norm() <= 0.1).collect();
            assert_eq!(c.neighbors_within(&q, 0.1), scan);
        }
    }

    #[test]
    fn save_load_roundtrip_file() {
        let c = circle(33, 0.7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        c.save(&path).unwrap();
        let back = load_cloud::<2>(&path).unwrap();
        assert_eq!(back.checksum(), c.checksum());
    }

    proptest! {
        #[test]
        fn text_roundtrip_is_bit_identical(
            raw in proptest::collection::vec(
                (-1e6f64..1e6, -1e6f64..1e6, -1e6f64..1e6, 0.1f64..2.0, -1.0f64..1.0, -1.0f64..1.0), 4..40)
        ) {
            let points: Vec<Vector<3>> = raw.iter().map(|r| Vector::<3>::new(r.0, r.1, r.2)).collect();
            let normals: Vec<Vector<3>> = raw.iter().map(|r| Vector::<3>::new(r.3, r.4, r.5)).collect();
            prop_assume!(OrientedPointCloud::new(points.clone(), normals.clone()).is_ok());
            let c = OrientedPointCloud::new(points, normals).unwrap();
            let back = parse_cloud::<3>(&c.to_text()).unwrap();
            prop_assert_eq!(back.points(), c.points());
            prop_assert_eq!(back.normals(), c.normals());
        }

        #[test]
        fn perturb_is_pure(seed in 0u64..1000, sigma in 0.0f64..5.0) {
            let c = circle(40, 1.0);
            let spec = NoiseSpec { sigma_p: sigma, mode: NoiseMode::AlongNormal, outlier_fraction: 0.2, seed };
            prop_assert_eq!(c.perturb(&spec).checksum(), c.perturb(&spec).checksum());
        }
    }
}
