//! Closed 2D polygons (possibly several loops, combined by the even-odd rule).
//!
//! Text format: `x y` per line, `#` comments, and a blank line between loops.

use std::fmt::Write as _;

use crate::Vector;

use super::EvalError;

type V2 = Vector<2>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub loops: Vec<Vec<V2>>,
}

impl Polygon {
    pub fn new(loops: Vec<Vec<V2>>) -> Result<Self, EvalError> {
        let poly = Self { loops };
        poly.validate()?;
        Ok(poly)
    }

    pub fn single(vertices: Vec<V2>) -> Result<Self, EvalError> {
        Self::new(vec![vertices])
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.loops.is_empty() {
            return Err(EvalError::DegeneratePolygon("no loops".into()));
        }
        for (k, l) in self.loops.iter().enumerate() {
            if l.len() < 3 {
                return Err(EvalError::DegeneratePolygon(format!(
                    "loop {k} has {} vertices",
                    l.len()
                )));
            }
            if l.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
                return Err(EvalError::DegeneratePolygon(format!("loop {k} has non-finite vertices")));
            }
            if signed_area(l).abs() <= 0.0 {
                return Err(EvalError::DegeneratePolygon(format!("loop {k} has zero area")));
            }
        }
        Ok(())
    }

    pub fn bbox(&self) -> (V2, V2) {
        let mut lo = V2::repeat(f64::INFINITY);
        let mut hi = V2::repeat(f64::NEG_INFINITY);
        for v in self.loops.iter().flatten() {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn diag(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    /// Enclosed area under the even-odd rule, assuming loops do not cross.
    pub fn area(&self) -> f64 {
        // nesting depth decides the sign of each loop's contribution
        self.loops
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let depth = self
                    .loops
                    .iter()
                    .enumerate()
                    .filter(|&(j, other)| j != k && point_in_loop(&l[0], other))
                    .count();
                let a = signed_area(l).abs();
                if depth % 2 == 0 {
                    a
                } else {
                    -a
                }
            })
            .sum()
    }

    /// Even-odd containment.
    pub fn contains(&self, x: &V2) -> bool {
        self.loops.iter().filter(|l| point_in_loop(x, l)).count() % 2 == 1
    }

    /// Euclidean distance from `x` to the nearest boundary edge.
    pub fn boundary_distance(&self, x: &V2) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(x, &a, &b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn edges(&self) -> impl Iterator<Item = (V2, V2)> + '_ {
        self.loops
            .iter()
            .flat_map(|l| (0..l.len()).map(move |i| (l[i], l[(i + 1) % l.len()])))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, l) in self.loops.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            for v in l {
                let _ = writeln!(out, "{} {}", v.x, v.y);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut loops = vec![Vec::new()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if raw.trim().is_empty() {
                if !loops.last().map_or(true, Vec::is_empty) {
                    loops.push(Vec::new());
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e: std::num::ParseFloatError| EvalError::Malformed {
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
            if vals.len() != 2 {
                return Err(EvalError::Malformed {
                    line: lineno + 1,
                    message: format!("expected 2 fields, found {}", vals.len()),
                });
            }
            loops.last_mut().unwrap().push(V2::new(vals[0], vals[1]));
        }
        loops.retain(|l| !l.is_empty());
        Self::new(loops)
    }
}

pub fn signed_area(l: &[V2]) -> f64 {
    let n = l.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (l[i], l[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

fn point_in_loop(x: &V2, l: &[V2]) -> bool {
    let n = l.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (l[i], l[(i + 1) % n]);
        if (a.y > x.y) != (b.y > x.y) {
            let cross = a.x + (x.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x.x < cross {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn segment_distance(x: &V2, a: &V2, b: &V2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((x - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x - (a + ab * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(s: f64) -> Vec<V2> {
        vec![V2::new(0.0, 0.0), V2::new(s, 0.0), V2::new(s, s), V2::new(0.0, s)]
    }

    #[test]
    fn degenerate_polygons_rejected() {
        assert!(Polygon::single(vec![V2::zeros(), V2::new(1.0, 0.0)]).is_err());
        let flat = vec![V2::zeros(), V2::new(1.0, 0.0), V2::new(2.0, 0.0)];
        assert!(Polygon::single(flat).is_err());
    }

    #[test]
    fn area_with_hole() {
        let outer = square(4.0);
        let inner: Vec<V2> = square(2.0).iter().map(|v| v + V2::new(1.0, 1.0)).collect();
        let p = Polygon::new(vec![outer, inner]).unwrap();
        assert_eq!(p.area(), 12.0);
        assert!(p.contains(&V2::new(0.5, 0.5)));
        assert!(!p.contains(&V2::new(2.0, 2.0)));
        assert_eq!(p.boundary_distance(&V2::new(2.0, 2.0)), 1.0);
    }

    #[test]
    fn text_roundtrip() {
        let p = Polygon::new(vec![square(1.0), vec![V2::new(0.2, 0.2), V2::new(0.4, 0.2), V2::new(0.3, 0.4)]]).unwrap();
        let back = Polygon::parse(&p.to_text()).unwrap();
        assert_eq!(back, p);
        assert!(matches!(
            Polygon::parse("0 0\n1 x\n"),
            Err(EvalError::Malformed { line: 2, .. })
        ));
    }
}
