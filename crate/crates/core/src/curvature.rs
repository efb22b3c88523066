//! Discrete curvature of triangulated surfaces in the ball: the mean
//! curvature residual of the hyperbolic minimal surface equation, per-vertex
//! shape operators from local cubic jets, bending energy and the hyperbolic
//! Gauss curvature.
//!
//! A surface is hyperbolic-minimal exactly when
//! `¼ (1 - |x|²) H_E = x^⊥`, with `H_E` the Euclidean mean curvature vector.
//! The traceless second fundamental form is conformally invariant in the
//! sense that `|Å_E|² dA_E = |A_H|² dA_H` on a minimal surface, so the
//! hyperbolic bending energy is computed from the Euclidean mesh.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::RadiusTriple;
use crate::mesh::TriangulatedSurface;

/// Measured quantities of one truncated surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceMeasurements {
    /// Hyperbolic area inside the truncation sphere.
    pub a_r: f64,
    /// Hyperbolic length of the boundary.
    pub l_r: f64,
    /// Hyperbolic truncation radius.
    pub r: f64,
    /// Maximum mean curvature residual over interior vertices.
    pub h_residual: f64,
    /// `∫ |A|² dA` in the hyperbolic metric.
    pub bending_energy: f64,
    pub euler_characteristic: i64,
}

/// Local frame and shape operator at one vertex.
#[derive(Debug, Clone, Copy)]
pub struct VertexShape {
    pub normal: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    /// Shape operator in the basis `(e1, e2)` projected to the fitted
    /// tangent plane.
    pub shape: Matrix2<f64>,
}

impl VertexShape {
    /// `|Å|² = (κ₁ - κ₂)² / 2`.
    pub fn traceless_norm_sq(&self) -> f64 {
        let tr = self.shape.trace();
        let det = self.shape.determinant();
        (0.5 * (tr * tr - 4.0 * det)).max(0.0)
    }

    pub fn mean_curvature(&self) -> f64 {
        self.shape.trace()
    }

    /// Second fundamental form `A(v, v)` as a scalar along `normal`.
    pub fn second_form(&self, v: &Vector3<f64>) -> f64 {
        let t = Vector2::new(v.dot(&self.e1), v.dot(&self.e2));
        t.dot(&(self.shape * t))
    }
}

/// Per-vertex residual `¼(1 - |x|²) H_E·n - x·n`; zero on the boundary.
pub fn mean_curvature_residuals(m: &TriangulatedSurface) -> Vec<f64> {
    let grad = m.euclidean_area_gradient();
    let areas = m.mixed_areas();
    let normals = m.vertex_normals();
    let boundary = m.is_boundary_vertex();
    (0..m.vertices().len())
        .map(|i| {
            if boundary[i] {
                return 0.0;
            }
            let x = m.vertices()[i];
            let h = -grad[i] / areas[i];
            let n = normals[i];
            0.25 * (1.0 - x.norm_squared()) * h.dot(&n) - x.dot(&n)
        })
        .collect()
}

/// Maximum mean curvature residual over interior vertices.
pub fn mean_curvature_residual(m: &TriangulatedSurface) -> Result<f64> {
    let r = mean_curvature_residuals(m);
    let v = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if !v.is_finite() {
        return Err(Error::Degenerate("mean curvature residual is not finite".into()));
    }
    Ok(v)
}

/// Vertices within `k` edges of vertex `i`, excluding `i`.
fn k_ring(nb: &[Vec<usize>], i: usize, k: usize) -> Vec<usize> {
    let mut seen = vec![i];
    let mut frontier = vec![i];
    for _ in 0..k {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &nb[v] {
                if !seen.contains(&w) {
                    seen.push(w);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    seen.remove(0);
    seen
}

/// Cubic jet fit of the surface around `p` with approximate normal `n`.
fn jet_fit(p: &Vector3<f64>, n: &Vector3<f64>, pts: &[Vector3<f64>]) -> Option<VertexShape> {
    let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - n * n.dot(&helper)).normalize();
    let e2 = n.cross(&e1);
    let uvh: Vec<(f64, f64, f64)> = pts
        .iter()
        .map(|q| {
            let d = q - p;
            (d.dot(&e1), d.dot(&e2), d.dot(n))
        })
        .collect();
    // scale the two tangent directions separately; neighbourhoods near the
    // sphere are strongly anisotropic
    let su = uvh.iter().fold(0.0f64, |a, t| a.max(t.0.abs()));
    let sv = uvh.iter().fold(0.0f64, |a, t| a.max(t.1.abs()));
    let cols = if pts.len() >= 12 { 9 } else { 5 };
    if pts.len() < cols + 1 || su == 0.0 || sv == 0.0 {
        return None;
    }
    let mut a = DMatrix::zeros(pts.len(), cols);
    let mut b = DVector::zeros(pts.len());
    for (r, &(u, v, h)) in uvh.iter().enumerate() {
        let (x, y) = (u / su, v / sv);
        let row = [x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y];
        for c in 0..cols {
            a[(r, c)] = row[c];
        }
        b[r] = h;
    }
    let coef = a.svd(true, true).solve(&b, 1e-12).ok()?;
    let gu = coef[0] / su;
    let gv = coef[1] / sv;
    let huu = 2.0 * coef[2] / (su * su);
    let huv = coef[3] / (su * sv);
    let hvv = 2.0 * coef[4] / (sv * sv);
    let g = Vector2::new(gu, gv);
    let w = (1.0 + g.norm_squared()).sqrt();
    let first = Matrix2::identity() + g * g.transpose();
    let second = Matrix2::new(huu, huv, huv, hvv) / w;
    let shape = first.try_inverse()? * second;
    // express in an orthonormal basis of the fitted tangent plane
    let normal = (n - e1 * gu - e2 * gv) / w;
    let t1 = (e1 + n * gu).normalize();
    let t2 = normal.cross(&t1);
    // tangent vectors of the graph chart: ∂u = e1 + gu n, ∂v = e2 + gv n
    let du = e1 + n * gu;
    let dv = e2 + n * gv;
    let basis = Matrix2::new(t1.dot(&du), t1.dot(&dv), t2.dot(&du), t2.dot(&dv));
    let shape = basis * shape * basis.try_inverse()?;
    Some(VertexShape {
        normal,
        e1: t1,
        e2: t2,
        shape,
    })
}

/// Shape operators at all vertices from cubic jets over the 2-ring
/// (3-ring when the 2-ring is too small).
pub fn shape_operators(m: &TriangulatedSurface) -> Result<Vec<VertexShape>> {
    let nb = m.neighbors();
    let normals = m.vertex_normals();
    let verts = m.vertices();
    (0..verts.len())
        .into_par_iter()
        .map(|i| {
            let mut ring = k_ring(&nb, i, 2);
            if ring.len() < 12 {
                ring = k_ring(&nb, i, 3);
            }
            let pts: Vec<Vector3<f64>> = ring.iter().map(|&j| verts[j]).collect();
            jet_fit(&verts[i], &normals[i], &pts)
                .ok_or_else(|| Error::Degenerate(format!("jet fit failed at vertex {i}")))
        })
        .collect()
}

/// Per-vertex `|Å_E|²`.
pub fn traceless_curvature(m: &TriangulatedSurface) -> Result<Vec<f64>> {
    Ok(shape_operators(m)?.iter().map(|s| s.traceless_norm_sq()).collect())
}

/// Hyperbolic bending energy `∫ |A_H|² dA_H = ∫ |Å_E|² dA_E`, restricted to
/// vertices with `|x| <= radius` when given.
pub fn bending_energy_within(m: &TriangulatedSurface, radius: Option<f64>) -> Result<f64> {
    let a2 = traceless_curvature(m)?;
    let areas = m.mixed_areas();
    let r = radius.unwrap_or(f64::INFINITY);
    Ok(m
        .vertices()
        .iter()
        .zip(a2.iter().zip(&areas))
        .filter(|(v, _)| v.norm() <= r)
        .map(|(_, (k, a))| k * a)
        .sum())
}

pub fn bending_energy(m: &TriangulatedSurface) -> Result<f64> {
    bending_energy_within(m, None)
}

/// Angle at `p` of the hyperbolic geodesic triangle `p, a, b`. Translating
/// `p` to the origin straightens the geodesics through it; the image of `q`
/// points along `(1 - |p|²)(q - p) - |q - p|² p`.
fn hyperbolic_angle(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let d = (1.0 - p.norm()) * (1.0 + p.norm());
    let dir = |q: &Vector3<f64>| {
        let w = q - p;
        w * d - p * w.norm_squared()
    };
    let (u, v) = (dir(a), dir(b));
    u.cross(&v).norm().atan2(u.dot(&v))
}

/// Hyperbolic Gauss curvature at interior vertices of the surface made of
/// geodesic triangles on the mesh vertices: every face has curvature −1 and
/// each vertex carries its angle defect, so `K = −1 + defect / area` with a
/// third of each adjacent triangle's area `π − Σ angles`. Boundary entries
/// are NaN.
pub fn hyperbolic_gauss_curvature(m: &TriangulatedSurface) -> Vec<f64> {
    let verts = m.vertices();
    let n = verts.len();
    let mut angle_sum = vec![0.0; n];
    let mut area = vec![0.0; n];
    for t in m.triangles() {
        let p = [verts[t[0]], verts[t[1]], verts[t[2]]];
        let ang: [f64; 3] = std::array::from_fn(|k| hyperbolic_angle(&p[k], &p[(k + 1) % 3], &p[(k + 2) % 3]));
        let a = PI - ang.iter().sum::<f64>();
        for k in 0..3 {
            angle_sum[t[k]] += ang[k];
            area[t[k]] += a / 3.0;
        }
    }
    let boundary = m.is_boundary_vertex();
    (0..n)
        .map(|i| {
            if boundary[i] {
                f64::NAN
            } else {
                -1.0 + (2.0 * PI - angle_sum[i]) / area[i]
            }
        })
        .collect()
}

/// Measurements of a solved surface at its own truncation radius.
pub fn measure(m: &TriangulatedSurface) -> Result<SurfaceMeasurements> {
    Ok(SurfaceMeasurements {
        a_r: m.hyperbolic_area(),
        l_r: m.hyperbolic_boundary_length(),
        r: RadiusTriple::from_s(m.s())?.r,
        h_residual: mean_curvature_residual(m)?,
        bending_energy: bending_energy(m)?,
        euler_characteristic: m.euler_characteristic(),
    })
}

/// Largest `|x^⊥|` over interior vertices adjacent to the boundary.
pub fn boundary_normal_component(m: &TriangulatedSurface) -> f64 {
    let nb = m.neighbors();
    let boundary = m.is_boundary_vertex();
    let normals = m.vertex_normals();
    let mut best = 0.0f64;
    for &b in m.boundary_loop() {
        for &j in &nb[b] {
            if !boundary[j] {
                best = best.max(m.vertices()[j].dot(&normals[j]).abs());
            }
        }
    }
    best
}

/// Second fundamental form `A(x̂, x̂)` at each boundary vertex, as a vector.
///
/// The radial direction is resolved by a quadratic fit through the chain of
/// vertices reached by repeatedly stepping to the neighbour best aligned with
/// `-x̂`, using `depth` steps.
pub fn boundary_radial_curvature(m: &TriangulatedSurface, depth: usize) -> Result<Vec<Vector3<f64>>> {
    let nb = m.neighbors();
    let normals = m.vertex_normals();
    let verts = m.vertices();
    m.boundary_loop()
        .iter()
        .map(|&b| {
            let xhat = verts[b] / verts[b].norm();
            let mut chain = vec![b];
            let mut cur = b;
            for _ in 0..depth {
                let next = nb[cur]
                    .iter()
                    .copied()
                    .filter(|j| !chain.contains(j))
                    .max_by(|&i, &j| {
                        let di = (verts[i] - verts[cur]).normalize().dot(&-xhat);
                        let dj = (verts[j] - verts[cur]).normalize().dot(&-xhat);
                        di.total_cmp(&dj)
                    })
                    .ok_or_else(|| Error::Degenerate("radial chain ended early".into()))?;
                chain.push(next);
                cur = next;
            }
            // quadratic fit P(t) = P0 + P1 t + P2 t², t = arc length along the chain
            let mut t = vec![0.0];
            for w in chain.windows(2) {
                let last = *t.last().expect("non-empty");
                t.push(last + (verts[w[1]] - verts[w[0]]).norm());
            }
            let scale = *t.last().expect("non-empty");
            let mut a = DMatrix::zeros(chain.len(), 3);
            for (r, tr) in t.iter().enumerate() {
                let x = tr / scale;
                a[(r, 0)] = 1.0;
                a[(r, 1)] = x;
                a[(r, 2)] = x * x;
            }
            let svd = a.svd(true, true);
            let mut coef = [Vector3::zeros(); 3];
            for d in 0..3 {
                let b: DVector<f64> = DVector::from_iterator(chain.len(), chain.iter().map(|&i| verts[i][d]));
                let c = svd.solve(&b, 1e-14).map_err(|e| Error::Degenerate(e.to_string()))?;
                for k in 0..3 {
                    coef[k][d] = c[k];
                }
            }
            let p1 = coef[1] / scale;
            let p2 = coef[2] * (2.0 / (scale * scale));
            let n = normals[b];
            let kn = p2.dot(&n) / p1.norm_squared();
            Ok(n * kn)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_patch(radius: f64, n: usize) -> TriangulatedSurface {
        // a spherical cap of the given radius, centred below the origin so
        // that the cap passes through 0 with normal +z
        let mut verts = vec![Vector3::zeros()];
        let rings = n;
        let per = 24;
        let mut tris = Vec::new();
        for i in 1..=rings {
            let ang = 0.3 * i as f64 / rings as f64;
            for k in 0..per {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / per as f64;
                let p = Vector3::new(ang.sin() * phi.cos(), ang.sin() * phi.sin(), ang.cos()) * radius
                    - Vector3::new(0.0, 0.0, radius);
                verts.push(p * 0.2);
            }
        }
        for k in 0..per {
            tris.push([0, 1 + k, 1 + (k + 1) % per]);
        }
        for i in 1..rings {
            let a = 1 + (i - 1) * per;
            let b = 1 + i * per;
            for k in 0..per {
                let k1 = (k + 1) % per;
                tris.push([a + k, b + k, b + k1]);
                tris.push([a + k, b + k1, a + k1]);
            }
        }
        let boundary: Vec<usize> = (0..per).map(|k| 1 + (rings - 1) * per + k).collect();
        let s = verts[boundary[0]].norm();
        // boundary radius is constant by symmetry
        TriangulatedSurface::new(verts, tris, boundary, s).unwrap()
    }

    #[test]
    fn sphere_has_umbilic_shape_operator() {
        let m = sphere_patch(1.0, 12);
        let shapes = shape_operators(&m).unwrap();
        // scaled by 0.2: radius 0.2, principal curvatures 5
        let s = shapes[0];
        assert!((s.mean_curvature().abs() - 10.0).abs() < 1e-2, "{}", s.mean_curvature());
        assert!(s.traceless_norm_sq() < 1e-4);
    }
}
