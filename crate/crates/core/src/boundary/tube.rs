use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Parametric vessel: a tube of constant radius around an axis polyline,
/// optionally closed by flat end caps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeParams {
    pub axis: Vec<[f64; 3]>,
    pub radius: f64,
    #[serde(default)]
    pub cap_start: bool,
    #[serde(default)]
    pub cap_end: bool,
}

impl TubeParams {
    pub fn straight(start: Vec3, end: Vec3, radius: f64) -> Self {
        Self {
            axis: vec![start.into(), end.into()],
            radius,
            cap_start: false,
            cap_end: false,
        }
    }

    pub fn capped(mut self) -> Self {
        self.cap_start = true;
        self.cap_end = true;
        self
    }

    pub fn axis_points(&self) -> Vec<Vec3> {
        self.axis.iter().map(|p| Vec3::from(*p)).collect()
    }

    /// Distance from `p` to the axis polyline and the arc-length parameter of
    /// the closest point.
    pub fn distance_to_axis(&self, p: &Vec3) -> (f64, f64) {
        let pts = self.axis_points();
        let mut best = (f64::INFINITY, 0.0);
        let mut arc = 0.0;
        for w in pts.windows(2) {
            let seg = w[1] - w[0];
            let len = seg.norm();
            let t = ((p - w[0]).dot(&seg) / (len * len)).clamp(0.0, 1.0);
            let d = (p - (w[0] + seg * t)).norm();
            if d < best.0 {
                best = (d, arc + t * len);
            }
            arc += len;
        }
        best
    }

    pub fn axis_length(&self) -> f64 {
        self.axis_points().windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Unit vectors perpendicular to `dir` (and to each other).
fn frame(dir: &Vec3) -> (Vec3, Vec3) {
    let helper = if dir.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = dir.cross(&helper).normalize();
    let w = dir.cross(&u);
    (u, w)
}

fn ring(center: &Vec3, u: &Vec3, w: &Vec3, radius: f64, spacing: f64, phase: f64, out: &mut Vec<Vec3>) {
    let count = ((2.0 * PI * radius / spacing).ceil() as usize).max(1);
    let step = 2.0 * PI / count as f64;
    for j in 0..count {
        let theta = (j as f64 + phase) * step;
        out.push(center + (u * theta.cos() + w * theta.sin()) * radius);
    }
}

/// Sample the tube surface in rings of `ceil(2 pi R / s)` points at axial
/// spacing close to `s`. Successive rings are rotated by half an angular
/// step. Caps are filled with concentric rings.
pub fn sample_tube(params: &TubeParams, spacing: f64) -> Result<Vec<Vec3>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!(
            "sampling spacing must be positive, got {spacing}"
        )));
    }
    if !(params.radius > spacing) {
        return Err(Error::invalid(format!(
            "tube radius {} must exceed the sampling spacing {spacing}",
            params.radius
        )));
    }
    let pts = params.axis_points();
    if pts.len() < 2 {
        return Err(Error::invalid("tube axis needs at least two points"));
    }
    if pts.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(Error::invalid("tube axis has a non-finite point"));
    }
    for (i, w) in pts.windows(2).enumerate() {
        if (w[1] - w[0]).norm() <= 1e-12 * (1.0 + w[0].norm()) {
            return Err(Error::invalid(format!("tube axis points {i} and {} coincide", i + 1)));
        }
    }

    let r = params.radius;
    let mut out = Vec::new();
    let mut ring_index = 0usize;
    for (seg, w) in pts.windows(2).enumerate() {
        let axis = w[1] - w[0];
        let len = axis.norm();
        let dir = axis / len;
        let (u, v) = frame(&dir);
        let steps = ((len / spacing).round() as usize).max(1);
        let first = if seg == 0 { 0 } else { 1 };
        for s in first..=steps {
            let center = w[0] + axis * (s as f64 / steps as f64);
            let phase = if ring_index % 2 == 1 { 0.5 } else { 0.0 };
            ring(&center, &u, &v, r, spacing, phase, &mut out);
            ring_index += 1;
        }
    }

    let mut cap = |center: Vec3, dir: Vec3| {
        let (u, v) = frame(&dir);
        let mut radius = r - spacing;
        let mut k = 0;
        while radius > 0.5 * spacing {
            ring(
                &center,
                &u,
                &v,
                radius,
                spacing,
                if k % 2 == 0 { 0.5 } else { 0.0 },
                &mut out,
            );
            radius -= spacing;
            k += 1;
        }
        out.push(center);
    };
    if params.cap_start {
        cap(pts[0], (pts[1] - pts[0]).normalize());
    }
    if params.cap_end {
        let n = pts.len();
        cap(pts[n - 1], (pts[n - 1] - pts[n - 2]).normalize());
    }
    Ok(out)
}
