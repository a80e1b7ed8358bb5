//! Static figure output: SVG for 2D, ASCII PLY for 3D.

use std::fmt::Write;

use lsmat::{OrientedPointCloud, Vector};

type V2 = Vector<2>;
type V3 = Vector<3>;

/// Fraction of the diagonal added around the bounding box.
pub const MARGIN: f64 = 0.05;

/// World to pixel map: `x_px = (x − x0)·s`, `y_px = height − (y − y0)·s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x0: f64,
    pub y0: f64,
    pub scale: f64,
    pub width: f64,
    pub height: f64,
}

impl Viewport {
    /// Fits the padded box so its longer side spans `size` pixels.
    pub fn fit(lo: &V2, hi: &V2, size: f64) -> Self {
        let pad = MARGIN * (hi - lo).norm();
        let extent = hi - lo + V2::repeat(2.0 * pad);
        let scale = size / extent.x.max(extent.y);
        Self {
            x0: lo.x - pad,
            y0: lo.y - pad,
            scale,
            width: extent.x * scale,
            height: extent.y * scale,
        }
    }

    pub fn to_px(&self, p: &V2) -> (f64, f64) {
        ((p.x - self.x0) * self.scale, self.height - (p.y - self.y0) * self.scale)
    }
}

/// Layers, bottom to top: sphere union (`spheres`), oriented point splats
/// (`points`), sphere centers (`centers`).
pub fn svg(cloud: &OrientedPointCloud<2>, spheres: &[(V2, f64)], size: f64) -> String {
    let vp = Viewport::fit(cloud.bbox_min(), cloud.bbox_max(), size);
    let splat = 0.01 * cloud.diag();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}" data-x0="{}" data-y0="{}" data-scale="{}">"#,
        vp.x0,
        vp.y0,
        vp.scale,
        w = vp.width,
        h = vp.height
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<g id="spheres" fill="#4a90d9" fill-opacity="0.3" stroke="none">"##);
    for (c, r) in spheres {
        let (x, y) = vp.to_px(c);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}"/>"#, r * vp.scale);
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, r##"<g id="points" stroke="#222222" stroke-width="1" fill="none">"##);
    for (p, n) in cloud.points().iter().zip(cloud.normals()) {
        let t = V2::new(-n.y, n.x) * splat;
        let (x1, y1) = vp.to_px(&(p - t));
        let (x2, y2) = vp.to_px(&(p + t));
        let _ = writeln!(s, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, r##"<g id="centers" fill="#c0392b">"##);
    for (c, _) in spheres {
        let (x, y) = vp.to_px(c);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="1.5"/>"#);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// ASCII PLY with one vertex per sphere center and a `radius` property.
pub fn ply(spheres: &[(V3, f64)]) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "ply\nformat ascii 1.0\ncomment medial sphere centers\nelement vertex {}\n\
         property double x\nproperty double y\nproperty double z\nproperty double radius\nend_header\n",
        spheres.len()
    );
    for (c, r) in spheres {
        let _ = writeln!(s, "{} {} {} {}", c.x, c.y, c.z, r);
    }
    s
}
