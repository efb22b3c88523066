//! Triangulated surfaces in the Poincaré ball and their exact hyperbolic
//! measurements.
//!
//! Every triangle is flat in Euclidean terms. Its hyperbolic area has a
//! closed form: in the triangle's plane at distance `d0` from the origin the
//! area density is `4 / (c² - r²)²` with `c² = 1 - d0²` and `r` the distance to
//! the foot point `F` of the origin. Splitting the triangle into signed
//! triangles `(F, edge)` leaves one `artanh` per edge. The same splitting
//! handles clipping by a centred sphere, which meets the plane in a circle
//! about `F`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::hyperbolic::{mobius_translate, MobiusParam, BALL_MARGIN};

/// Minimum Euclidean triangle area accepted by [`TriangulatedSurface::new`].
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TriangulatedSurface {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    boundary_loop: Vec<usize>,
    s: f64,
    source_curve: Option<BoundaryCurve>,
}

/// Measurements of the part of a surface inside the centred ball of radius `s`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LevelSetMeasure {
    pub s: f64,
    /// Hyperbolic area of the surface inside the ball.
    pub area: f64,
    /// Euclidean length of the intersection with the sphere.
    pub euclidean_length: f64,
    /// Hyperbolic length of the intersection with the sphere.
    pub hyperbolic_length: f64,
    /// `∫ |x| / |x^⊤| dl` over the intersection curve (Euclidean length element).
    pub radial_ratio_integral: f64,
}

impl TriangulatedSurface {
    pub fn new(
        vertices: Vec<Vector3<f64>>,
        triangles: Vec<[usize; 3]>,
        boundary_loop: Vec<usize>,
        s: f64,
    ) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Parameter(format!("truncation radius {s} not in (0, 1)")));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v.norm() < 1.0 - BALL_MARGIN) {
                return Err(Error::Domain(format!("vertex {i} lies outside the ball")));
            }
        }
        for &b in &boundary_loop {
            let v = vertices
                .get(b)
                .ok_or_else(|| Error::Degenerate(format!("boundary index {b} out of range")))?;
            if (v.norm() - s).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "boundary vertex {b} has radius {} instead of {s}",
                    v.norm()
                )));
            }
        }
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::Degenerate(format!("triangle {k} has an invalid index")));
            }
            let area = euclidean_triangle_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]);
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(Error::Degenerate(format!(
                    "triangle {k} has Euclidean area {area:e}; use a finer or better graded mesh"
                )));
            }
        }
        let m = Self {
            vertices,
            triangles,
            boundary_loop,
            s,
            source_curve: None,
        };
        m.check_topology()?;
        Ok(m)
    }

    pub fn with_source_curve(mut self, c: BoundaryCurve) -> Self {
        self.source_curve = Some(c);
        self
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_loop(&self) -> &[usize] {
        &self.boundary_loop
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn source_curve(&self) -> Option<&BoundaryCurve> {
        self.source_curve.as_ref()
    }

    pub(crate) fn vertices_mut(&mut self) -> &mut [Vector3<f64>] {
        &mut self.vertices
    }

    pub fn is_boundary_vertex(&self) -> Vec<bool> {
        let mut b = vec![false; self.vertices.len()];
        for &i in &self.boundary_loop {
            b[i] = true;
        }
        b
    }

    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    fn check_topology(&self) -> Result<()> {
        let edges = self.edge_counts();
        if edges.values().any(|&c| c > 2) {
            return Err(Error::Degenerate("an edge is shared by more than two triangles".into()));
        }
        let boundary_edges = edges.values().filter(|&&c| c == 1).count();
        if boundary_edges != self.boundary_loop.len() {
            return Err(Error::Degenerate(format!(
                "mesh has {boundary_edges} boundary edges but the loop has {} vertices",
                self.boundary_loop.len()
            )));
        }
        let n = self.boundary_loop.len();
        for i in 0..n {
            let (a, b) = (self.boundary_loop[i], self.boundary_loop[(i + 1) % n]);
            if edges.get(&(a.min(b), a.max(b))) != Some(&1) {
                return Err(Error::Degenerate(format!("loop edge ({a}, {b}) is not a boundary edge")));
            }
        }
        Ok(())
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        let e = self.edge_counts().len() as i64;
        self.vertices.len() as i64 - e + self.triangles.len() as i64
    }

    pub fn euclidean_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| euclidean_triangle_area(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .sum()
    }

    /// Euclidean length of the boundary polygon.
    pub fn euclidean_boundary_length(&self) -> f64 {
        let n = self.boundary_loop.len();
        (0..n)
            .map(|i| (self.vertices[self.boundary_loop[(i + 1) % n]] - self.vertices[self.boundary_loop[i]]).norm())
            .sum()
    }

    /// Sum of the angles subtended at the origin by the boundary edges.
    pub fn boundary_angle_sum(&self) -> f64 {
        let n = self.boundary_loop.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[self.boundary_loop[i]];
                let b = self.vertices[self.boundary_loop[(i + 1) % n]];
                crate::curves::geodesic_angle(&(a / a.norm()), &(b / b.norm()))
            })
            .sum()
    }

    /// Hyperbolic length of the boundary, with each edge replaced by the arc
    /// of the sphere of radius `s` in the plane of the edge and the origin.
    pub fn hyperbolic_boundary_length(&self) -> f64 {
        2.0 * self.s / (1.0 - self.s * self.s) * self.boundary_angle_sum()
    }

    /// Exact hyperbolic area of the flat triangles, plus the sphere segments
    /// between each boundary chord and its arc.
    pub fn hyperbolic_area(&self) -> f64 {
        let flat: f64 = self
            .triangles
            .iter()
            .map(|t| flat_triangle_hyperbolic_area(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .sum();
        let n = self.boundary_loop.len();
        let seg: f64 = (0..n)
            .map(|i| {
                let a = self.vertices[self.boundary_loop[i]];
                let b = self.vertices[self.boundary_loop[(i + 1) % n]];
                boundary_segment_area(self.s, crate::curves::geodesic_angle(&(a / a.norm()), &(b / b.norm())))
            })
            .sum();
        flat + seg
    }

    /// Hyperbolic area of the flat triangles by a triangle quadrature rule.
    pub fn hyperbolic_area_quadrature(&self, rule: crate::quadrature::TriangleRule) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
                let w: f64 = rule
                    .points
                    .iter()
                    .zip(rule.weights)
                    .map(|(l, w)| w * crate::hyperbolic::area_density(&(a * l[0] + b * l[1] + c * l[2])))
                    .sum();
                w * euclidean_triangle_area(&a, &b, &c)
            })
            .sum()
    }

    /// Area, length and ratio integral of the part inside radius `s`.
    pub fn level_set(&self, s: f64) -> Result<LevelSetMeasure> {
        if !(s > 0.0 && s < self.s) {
            return Err(Error::Parameter(format!("level {s} must lie in (0, {})", self.s)));
        }
        let mut area = 0.0;
        let mut len = 0.0;
        let mut ratio = 0.0;
        for t in &self.triangles {
            let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
            let p = clipped_triangle(&a, &b, &c, Some(s));
            area += p.area;
            len += p.arc_radius * p.arc_angle;
            ratio += s * p.arc_angle;
        }
        Ok(LevelSetMeasure {
            s,
            area,
            euclidean_length: len,
            hyperbolic_length: 2.0 / (1.0 - s * s) * len,
            radial_ratio_integral: ratio,
        })
    }

    /// Image of the surface under the ball translation by `a`. The result's
    /// boundary no longer lies on a centred sphere, so it is returned as raw
    /// vertex positions over the same triangles.
    pub fn translated_vertices(&self, a: &MobiusParam<3>) -> Vec<Vector3<f64>> {
        self.vertices.iter().map(|v| mobius_translate(a.coords(), v)).collect()
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<Vector3<f64>> {
        let mut n = vec![Vector3::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
            let fnormal = (b - a).cross(&(c - a));
            for &i in t {
                n[i] += fnormal;
            }
        }
        n.iter().map(|v| v.normalize()).collect()
    }

    /// Unit normals of the triangles.
    pub fn face_normals(&self) -> Vec<Vector3<f64>> {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
                (b - a).cross(&(c - a)).normalize()
            })
            .collect()
    }

    /// Mixed Voronoi areas (Meyer et al.) of the vertices.
    pub fn mixed_areas(&self) -> Vec<f64> {
        let mut areas = vec![0.0; self.vertices.len()];
        for t in &self.triangles {
            let p = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
            let area = euclidean_triangle_area(&p[0], &p[1], &p[2]);
            let cot = corner_cotangents(&p);
            let obtuse = (0..3).find(|&k| (p[(k + 1) % 3] - p[k]).dot(&(p[(k + 2) % 3] - p[k])) < 0.0);
            match obtuse {
                Some(k) => {
                    areas[t[k]] += 0.5 * area;
                    areas[t[(k + 1) % 3]] += 0.25 * area;
                    areas[t[(k + 2) % 3]] += 0.25 * area;
                }
                None => {
                    for k in 0..3 {
                        let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                        // edge k-j is opposite corner l
                        let ekj = (p[j] - p[k]).norm_squared();
                        let ekl = (p[l] - p[k]).norm_squared();
                        areas[t[k]] += 0.125 * (ekj * cot[l] + ekl * cot[j]);
                    }
                }
            }
        }
        areas
    }

    /// Gradient of the Euclidean area with respect to each vertex.
    pub fn euclidean_area_gradient(&self) -> Vec<Vector3<f64>> {
        let mut g = vec![Vector3::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let p = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
            let cot = corner_cotangents(&p);
            for k in 0..3 {
                let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                g[t[k]] += ((p[k] - p[j]) * cot[l] + (p[k] - p[l]) * cot[j]) * 0.5;
            }
        }
        g
    }

    /// Discrete Gauss curvature of the Euclidean mesh: angle defect over
    /// mixed area, zero on the boundary.
    pub fn angle_defects(&self) -> Vec<f64> {
        let mut angle = vec![0.0; self.vertices.len()];
        for t in &self.triangles {
            let p = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                angle[t[k]] += u.cross(&v).norm().atan2(u.dot(&v));
            }
        }
        let boundary = self.is_boundary_vertex();
        angle
            .iter()
            .zip(&boundary)
            .map(|(a, &b)| if b { 0.0 } else { 2.0 * std::f64::consts::PI - a })
            .collect()
    }

    /// Vertex adjacency lists, sorted.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertices.len()];
        for t in &self.triangles {
            for k in 0..3 {
                nb[t[k]].push(t[(k + 1) % 3]);
                nb[t[k]].push(t[(k + 2) % 3]);
            }
        }
        for l in &mut nb {
            l.sort_unstable();
            l.dedup();
        }
        nb
    }

    pub fn to_off(&self) -> String {
        let mut s = String::from("OFF\n");
        let _ = writeln!(s, "{} {} 0", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn write_off(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_off())?;
        Ok(())
    }
}

pub fn euclidean_triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Cotangents of the three corner angles.
pub(crate) fn corner_cotangents(p: &[Vector3<f64>; 3]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for k in 0..3 {
        let u = p[(k + 1) % 3] - p[k];
        let v = p[(k + 2) % 3] - p[k];
        c[k] = u.dot(&v) / u.cross(&v).norm();
    }
    c
}

/// Result of clipping a flat triangle by a centred ball.
#[derive(Debug, Clone, Copy)]
pub struct ClipPiece {
    /// Hyperbolic area of the part inside the ball.
    pub area: f64,
    /// Total angle (about the foot point) of the circle arcs inside the triangle.
    pub arc_angle: f64,
    /// Radius of the circle in which the sphere meets the triangle's plane.
    pub arc_radius: f64,
}

/// Exact hyperbolic area of a flat triangle inside the ball.
pub fn flat_triangle_hyperbolic_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    clipped_triangle(a, b, c, None).area
}

/// Exact hyperbolic area of a flat triangle intersected with the ball of
/// radius `s` (the whole triangle when `s` is `None`), together with the
/// arcs in which the sphere of radius `s` crosses it.
pub fn clipped_triangle(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, s: Option<f64>) -> ClipPiece {
    let n = (b - a).cross(&(c - a));
    let nn = n.norm();
    if nn == 0.0 {
        return ClipPiece { area: 0.0, arc_angle: 0.0, arc_radius: 0.0 };
    }
    let n = n / nn;
    let d0 = n.dot(a);
    let foot = n * d0;
    let c2 = 1.0 - d0 * d0;
    let u = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = (u - n * n.dot(&u)).normalize();
    let v = n.cross(&u);
    let to2 = |x: &Vector3<f64>| {
        let r = x - foot;
        [r.dot(&u), r.dot(&v)]
    };
    let pts = [to2(a), to2(b), to2(c)];
    let rs = s.map(|s| (s * s - d0 * d0).max(0.0).sqrt());
    let g_arc = rs.map(|r| 2.0 / (c2 - r * r) - 2.0 / c2);
    let mut area = 0.0;
    let mut arc = 0.0;
    for k in 0..3 {
        let pa = pts[k];
        let pb = pts[(k + 1) % 3];
        let dx = pb[0] - pa[0];
        let dy = pb[1] - pa[1];
        let len = dx.hypot(dy);
        if len == 0.0 {
            continue;
        }
        let (ux, uy) = (dx / len, dy / len);
        let ps = pa[0] * uy - pa[1] * ux;
        let p = ps.abs();
        if p == 0.0 {
            continue;
        }
        let sign = ps.signum();
        let ta = pa[0] * ux + pa[1] * uy;
        let tb = ta + len;
        let a2 = c2 - p * p;
        let aa = a2.sqrt();
        let inside = |t0: f64, t1: f64| -> f64 {
            if t1 <= t0 {
                return 0.0;
            }
            let arg = aa * (t1 - t0) / (a2 - t0 * t1);
            2.0 * p / (c2 * aa) * arg.atanh()
        };
        let dpsi = |t0: f64, t1: f64| -> f64 {
            if t1 <= t0 {
                return 0.0;
            }
            (p * (t1 - t0)).atan2(p * p + t0 * t1)
        };
        match (rs, g_arc) {
            (Some(r), Some(g)) => {
                if p >= r {
                    let d = dpsi(ta, tb);
                    area += sign * g * d;
                    arc += sign * d;
                } else {
                    let ts = (r * r - p * p).sqrt();
                    let d1 = dpsi(ta, tb.min(-ts));
                    let d2 = dpsi(ta.max(ts), tb);
                    area += sign * (inside(ta.max(-ts), tb.min(ts)) + g * (d1 + d2));
                    arc += sign * (d1 + d2);
                }
            }
            _ => area += sign * inside(ta, tb),
        }
    }
    let orient = if area < 0.0 { -1.0 } else { 1.0 };
    ClipPiece {
        area: area * orient,
        arc_angle: arc * orient,
        arc_radius: rs.unwrap_or(0.0),
    }
}

/// Hyperbolic area between a chord of the circle of radius `s` about the
/// origin (subtending angle `delta`) and its arc, in a plane through the
/// origin.
pub fn boundary_segment_area(s: f64, delta: f64) -> f64 {
    let sector = 2.0 * delta * s * s / (1.0 - s * s);
    let h = 0.5 * delta;
    let p = s * h.cos();
    let t = s * h.sin();
    let a2 = 1.0 - p * p;
    let a = a2.sqrt();
    let tri = 2.0 * p / a * (a * 2.0 * t / (a2 + t * t)).atanh();
    sector - tri
}
