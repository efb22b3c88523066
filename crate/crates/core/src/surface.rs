//! Discrete truncated Plateau problem in the ball.
//!
//! The initial surface is the radial cone over the boundary samples, cut into
//! rings equally spaced in hyperbolic radius. Boundary vertices are pinned at
//! `s · γ`. Interior vertices first move vertically only, then along their
//! normals, so the normal part of the discrete gradient vanishes at the end.
//!
//! The discrete energy is `E(z) = Σ_T A_T W_T`, the Euclidean triangle area
//! times the 7-point average of the density `4 / (1 - |x|²)²`. Its gradient
//! factors exactly as `(L_W(z) + M(z)) z`, where `L_W` is the cotangent
//! stiffness matrix weighted by `W_T` and `M` is the positive semidefinite
//! matrix coming from the density. Freezing both at the current heights and
//! solving the Dirichlet problem gives a descent direction; a backtracking
//! line search on `E` makes every step decrease it.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::hyperbolic::RadiusTriple;
use crate::linalg::{pcg, CsrMatrix};
use crate::mesh::{corner_cotangents, euclidean_triangle_area, TriangulatedSurface};
use crate::quadrature::TRIANGLE_7;

/// Smallest and largest admissible truncation radius.
pub const S_RANGE: (f64, f64) = (0.9, 1.0 - 1e-4);

/// Resolution of the polar ring mesh.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeshParams {
    /// Vertices per ring; the curve is resampled in arc length when this
    /// differs from the curve's own sample count.
    pub boundary_samples: usize,
    /// Hyperbolic distance between consecutive rings.
    pub radial_step: f64,
}

impl Default for MeshParams {
    /// About 10k vertices at `s = 0.9999`.
    fn default() -> Self {
        Self {
            boundary_samples: 160,
            radial_step: 0.16,
        }
    }
}

impl MeshParams {
    /// Halves the radial step and doubles the ring size.
    pub fn refined(&self) -> Self {
        Self {
            boundary_samples: 2 * self.boundary_samples,
            radial_step: 0.5 * self.radial_step,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Stop when the gradient norm is below `rel_tol` times the energy.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub pcg_max_iter: usize,
    /// Amplitude of a random initial height perturbation (interior only).
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iter: 400,
            pcg_max_iter: 50_000,
            perturbation: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlateauSolution {
    pub surface: TriangulatedSurface,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub energy: f64,
    /// Energy after each outer iteration.
    pub trace: Vec<f64>,
}

fn check_s(s: f64) -> Result<()> {
    if !(S_RANGE.0..=S_RANGE.1 + 1e-15).contains(&s) {
        return Err(Error::Parameter(format!(
            "truncation radius {s} not in [{}, {}]",
            S_RANGE.0, S_RANGE.1
        )));
    }
    Ok(())
}

fn boundary_samples(c: &BoundaryCurve, n: usize) -> Result<Vec<Vector3<f64>>> {
    if n == c.len() {
        Ok(c.samples().to_vec())
    } else {
        Ok(c.resample_arclength(n)?.samples().to_vec())
    }
}

/// Checks that the projection of the curve to the xy-plane winds once
/// around the origin with strictly monotone polar angle.
fn check_star_shaped(g: &[Vector3<f64>]) -> Result<f64> {
    let n = g.len();
    let mut total = 0.0;
    let mut sign = 0.0;
    for i in 0..n {
        let a = g[i];
        let b = g[(i + 1) % n];
        if a.xy().norm() < 1e-3 {
            return Err(Error::Domain("curve passes over the pole; its xy projection is not star-shaped".into()));
        }
        let d = (a.x * b.y - a.y * b.x).atan2(a.x * b.x + a.y * b.y);
        if sign == 0.0 {
            sign = d.signum();
        }
        if d * sign <= 0.0 {
            return Err(Error::Domain(format!(
                "xy projection of the curve is not star-shaped about the origin (near sample {i})"
            )));
        }
        total += d;
    }
    if (total.abs() - 2.0 * PI).abs() > 1e-6 {
        return Err(Error::Domain("xy projection does not wind once around the origin".into()));
    }
    Ok(sign)
}

fn build_mesh(c: &BoundaryCurve, s: f64, p: &MeshParams) -> Result<TriangulatedSurface> {
    check_s(s)?;
    if p.boundary_samples < crate::curves::MIN_SAMPLES || !(p.radial_step > 0.0) {
        return Err(Error::Parameter(format!("invalid mesh parameters {p:?}")));
    }
    let g = boundary_samples(c, p.boundary_samples)?;
    let orient = check_star_shaped(&g)?;
    let na = g.len();
    let big_r = RadiusTriple::from_s(s)?.r;
    let rings = ((big_r / p.radial_step).ceil() as usize).max(2);
    let mut verts = vec![Vector3::zeros()];
    for i in 1..=rings {
        let e = if i == rings {
            s
        } else {
            (0.5 * big_r * i as f64 / rings as f64).tanh()
        };
        verts.extend(g.iter().map(|q| q * e));
    }
    let at = |i: usize, k: usize| 1 + (i - 1) * na + k % na;
    let mut tris = Vec::with_capacity(na * (2 * rings - 1));
    let mut push = |t: [usize; 3]| {
        if orient > 0.0 {
            tris.push(t);
        } else {
            tris.push([t[0], t[2], t[1]]);
        }
    };
    for k in 0..na {
        push([0, at(1, k), at(1, k + 1)]);
    }
    for i in 1..rings {
        for k in 0..na {
            push([at(i, k), at(i + 1, k), at(i, k + 1)]);
            push([at(i, k + 1), at(i + 1, k), at(i + 1, k + 1)]);
        }
    }
    let boundary: Vec<usize> = (0..na).map(|k| at(rings, k)).collect();
    Ok(TriangulatedSurface::new(verts, tris, boundary, s)?.with_source_curve(c.clone()))
}

/// Initial (unsolved) polar disk mesh spanning `s · γ`: every vertex sits on
/// the radial scaling of a boundary sample.
pub fn polar_disk_mesh(c: &BoundaryCurve, s: f64, p: &MeshParams) -> Result<TriangulatedSurface> {
    build_mesh(c, s, p)
}

/// Solves the truncated Plateau problem with default options.
pub fn solve_plateau(c: &BoundaryCurve, s: f64, p: &MeshParams) -> Result<TriangulatedSurface> {
    Ok(solve_plateau_with(c, s, p, &SolveOptions::default())?.surface)
}

struct Assembly {
    /// Unknown index of each vertex, or `None` on the boundary.
    unknown: Vec<Option<usize>>,
    matrix: CsrMatrix,
    /// For every triangle and corner pair, the matrix slot (interior pairs).
    slots: Vec<[[Option<usize>; 3]; 3]>,
}

impl Assembly {
    fn new(m: &TriangulatedSurface) -> Self {
        let boundary = m.is_boundary_vertex();
        let mut unknown = vec![None; m.vertices().len()];
        let mut n = 0;
        for (i, b) in boundary.iter().enumerate() {
            if !b {
                unknown[i] = Some(n);
                n += 1;
            }
        }
        let mut rows = vec![Vec::new(); n];
        for t in m.triangles() {
            for &a in t {
                for &b in t {
                    if let (Some(i), Some(j)) = (unknown[a], unknown[b]) {
                        rows[i].push(j);
                    }
                }
            }
        }
        let matrix = CsrMatrix::from_pattern(&rows);
        let slots = m
            .triangles()
            .iter()
            .map(|t| {
                let mut s = [[None; 3]; 3];
                for k in 0..3 {
                    for l in 0..3 {
                        if let (Some(i), Some(j)) = (unknown[t[k]], unknown[t[l]]) {
                            s[k][l] = matrix.slot(i, j);
                        }
                    }
                }
                s
            })
            .collect();
        Self { unknown, matrix, slots }
    }
}

/// Local 3×3 matrix `L_W + M` of one triangle, and its energy `A_T W_T`.
fn triangle_system(p: &[Vector3<f64>; 3]) -> ([[f64; 3]; 3], f64) {
    let area = euclidean_triangle_area(&p[0], &p[1], &p[2]);
    let cot = corner_cotangents(p);
    let mut w = 0.0;
    let mut mm = [[0.0; 3]; 3];
    for (l, wq) in TRIANGLE_7.points.iter().zip(TRIANGLE_7.weights) {
        let x = p[0] * l[0] + p[1] * l[1] + p[2] * l[2];
        let d = (1.0 - x.norm()) * (1.0 + x.norm());
        w += wq * 4.0 / (d * d);
        let f = wq * 16.0 / (d * d * d) * area;
        for k in 0..3 {
            for m in 0..3 {
                mm[k][m] += f * l[k] * l[m];
            }
        }
    }
    for k in 0..3 {
        let (j, l) = ((k + 1) % 3, (k + 2) % 3);
        // edge (k, j) is opposite corner l
        let c = 0.5 * cot[l] * w;
        mm[k][k] += c;
        mm[j][j] += c;
        mm[k][j] -= c;
        mm[j][k] -= c;
    }
    (mm, area * w)
}

fn energy(m: &TriangulatedSurface, verts: &[Vector3<f64>]) -> f64 {
    let parts: Vec<f64> = m
        .triangles()
        .par_iter()
        .map(|t| {
            let p = [verts[t[0]], verts[t[1]], verts[t[2]]];
            let area = euclidean_triangle_area(&p[0], &p[1], &p[2]);
            let w: f64 = TRIANGLE_7
                .points
                .iter()
                .zip(TRIANGLE_7.weights)
                .map(|(l, wq)| {
                    let x = p[0] * l[0] + p[1] * l[1] + p[2] * l[2];
                    let d = (1.0 - x.norm()) * (1.0 + x.norm());
                    wq * 4.0 / (d * d)
                })
                .sum();
            area * w
        })
        .collect();
    parts.iter().sum()
}

/// Assembles the frozen system for displacements of each vertex along
/// `dirs`, returning the gradient with respect to those displacements and the
/// energy. The matrix is `(L_W + M)_ij (d_i · d_j)`, positive semidefinite
/// as a Schur product.
fn assemble(m: &TriangulatedSurface, asm: &mut Assembly, verts: &[Vector3<f64>], dirs: &[Vector3<f64>]) -> (Vec<f64>, f64) {
    let n = asm.matrix.n;
    asm.matrix.clear();
    let mut grad = vec![0.0; n];
    let mut e = 0.0;
    let locals: Vec<([[f64; 3]; 3], f64)> = m
        .triangles()
        .par_iter()
        .map(|t| triangle_system(&[verts[t[0]], verts[t[1]], verts[t[2]]]))
        .collect();
    for ((t, (mm, et)), slots) in m.triangles().iter().zip(&locals).zip(&asm.slots) {
        e += et;
        for k in 0..3 {
            let Some(i) = asm.unknown[t[k]] else { continue };
            let d = dirs[t[k]];
            for l in 0..3 {
                grad[i] += mm[k][l] * verts[t[l]].dot(&d);
                if let Some(slot) = slots[k][l] {
                    asm.matrix.vals[slot] += mm[k][l] * d.dot(&dirs[t[l]]);
                }
            }
        }
    }
    (grad, e)
}

/// Norm of the energy gradient with respect to hyperbolic vertex
/// displacements: a Euclidean move `dt` is a hyperbolic move `2 dt / (1 - |x|²)`.
fn hyperbolic_gradient_norm(grad: &[f64], verts: &[Vector3<f64>], unknown: &[Option<usize>]) -> f64 {
    verts
        .iter()
        .zip(unknown)
        .filter_map(|(v, u)| u.map(|i| grad[i] * 0.5 * (1.0 - v.norm()) * (1.0 + v.norm())))
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the truncated Plateau problem for the curve `c` scaled to radius `s`.
pub fn solve_plateau_with(
    c: &BoundaryCurve,
    s: f64,
    p: &MeshParams,
    opts: &SolveOptions,
) -> Result<PlateauSolution> {
    let mut m = build_mesh(c, s, p)?;
    let mut asm = Assembly::new(&m);
    let mut verts = m.vertices().to_vec();
    if opts.perturbation > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for (v, u) in verts.iter_mut().zip(&asm.unknown) {
            if u.is_some() {
                let room = 1.0 - v.norm();
                v.z += opts.perturbation * room.min(1.0) * rng.random_range(-1.0..1.0);
            }
        }
    }
    let n = asm.matrix.n;
    let mut trace = Vec::new();
    let mut iterations = 0;
    // heights first, then moves along the vertex normals
    let mut normal_phase = false;
    let mut dirs = vec![Vector3::z(); verts.len()];
    let (mut grad, mut e) = assemble(&m, &mut asm, &verts, &dirs);
    loop {
        let gnorm = hyperbolic_gradient_norm(&grad, &verts, &asm.unknown);
        trace.push(e);
        if gnorm < opts.rel_tol * e {
            if normal_phase {
                m.vertices_mut().copy_from_slice(&verts);
                return Ok(PlateauSolution {
                    surface: m,
                    iterations,
                    gradient_norm: gnorm,
                    energy: e,
                    trace,
                });
            }
            normal_phase = true;
        }
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                message: format!("gradient norm {gnorm:e} above {:e} x energy", opts.rel_tol),
                trace,
            });
        }
        if normal_phase {
            m.vertices_mut().copy_from_slice(&verts);
            dirs = m.vertex_normals();
            (grad, e) = assemble(&m, &mut asm, &verts, &dirs);
        }
        iterations += 1;
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut step = vec![0.0; n];
        let tol = (0.01 * opts.rel_tol * e / norm(&rhs).max(1e-300)).clamp(1e-12, 1e-8);
        pcg(&asm.matrix, &rhs, &mut step, tol, opts.pcg_max_iter)?;
        let slope: f64 = grad.iter().zip(&step).map(|(g, d)| g * d).sum();
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-10 {
            let mut trial = verts.clone();
            let mut inside = true;
            for (k, (v, u)) in trial.iter_mut().zip(&asm.unknown).enumerate() {
                if let Some(i) = u {
                    *v += dirs[k] * (t * step[*i]);
                    if v.norm() >= 1.0 - 1e-12 {
                        inside = false;
                    }
                }
            }
            if inside {
                let et = energy(&m, &trial);
                if et <= e || (et - e).abs() <= 1e-15 * e && slope.abs() <= 1e-15 * e {
                    verts = trial;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations,
                message: format!("line search failed at gradient norm {gnorm:e}"),
                trace,
            });
        }
        (grad, e) = assemble(&m, &mut asm, &verts, &dirs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{make_curve, CurveKind};

    #[test]
    fn disk_mesh_topology() {
        let c = make_curve(CurveKind::GreatCircle, 64).unwrap();
        let m = polar_disk_mesh(&c, 0.99, &MeshParams { boundary_samples: 64, ..Default::default() }).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.boundary_loop().len(), 64);
    }

    #[test]
    fn great_circle_solution_is_flat() {
        let c = make_curve(CurveKind::GreatCircle, 64).unwrap();
        let sol = solve_plateau_with(&c, 0.99, &MeshParams { boundary_samples: 64, ..Default::default() }, &SolveOptions::default())
            .unwrap();
        assert!(sol.surface.vertices().iter().all(|v| v.z.abs() < 1e-12));
    }

    #[test]
    fn rejects_polar_curves() {
        let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::x_axis(), 0.5 * PI);
        let c = make_curve(CurveKind::GreatCircle, 64).unwrap().rotated(&rot);
        let r = polar_disk_mesh(&c, 0.99, &MeshParams { boundary_samples: 64, ..Default::default() });
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
