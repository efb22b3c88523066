//! Hyperbolic entropy.
//!
//! The heat kernel of H² is
//! `K₂(t, ρ) = √2 e^{−t/4} (4πt)^{−3/2} ∫_ρ^∞ s e^{−s²/4t} (cosh s − cosh ρ)^{−1/2} ds`.
//! With `s = ρ + u²` the endpoint singularity disappears, since
//! `cosh s − cosh ρ = 2 sinh(ρ + u²/2) sinh(u²/2)`.
//!
//! The entropy functional at `(p₀, τ)` is `∫_Σ K₂(τ, d(p, p₀)) dA`, and
//! `λ_H` is its supremum. On a truncated surface the part beyond a radius
//! `R` a little inside the truncation sphere is modelled as the cone-like end with level sets of
//! length `sinh r` per unit of boundary length, at distance
//! `d ≈ r + B_θ(p₀)` from `p₀`, where `B_θ(a) = log(|θ − a|² / (1 − |a|²))` is
//! the Busemann function.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{geodesic_angle, BoundaryCurve};
use crate::error::{Error, Result};
use crate::hyperbolic::BallPoint;
use crate::mesh::{clipped_triangle, TriangulatedSurface};
use crate::quadrature::{adaptive_kronrod, GaussLegendre, TRIANGLE_7};

/// Quadrature controls for `K₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelEvaluator {
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for HeatKernelEvaluator {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_panels: 200,
        }
    }
}

impl HeatKernelEvaluator {
    /// `K₂(t, ρ) e^{ρ²/4t + t/4}`, which stays representable far out.
    fn scaled(&self, t: f64, rho: f64) -> f64 {
        let width = 4.0 * t * 50.0;
        // (ρ + u²)² − ρ² = width at the upper end
        let s_max = (rho * rho + width).sqrt() + 1.0;
        let u_max = (s_max - rho).sqrt();
        let f = |u: f64| {
            let u2 = u * u;
            let s = rho + u2;
            let q = 2.0 * (rho + 0.5 * u2).sinh() * (0.5 * u2).sinh();
            if q <= 0.0 {
                // u = 0 with ρ = 0: the integrand vanishes like u
                return 0.0;
            }
            2.0 * u * s * (-(2.0 * rho * u2 + u2 * u2) / (4.0 * t)).exp() / q.sqrt()
        };
        let (v, _) = adaptive_kronrod(f, 0.0, u_max, self.rel_tol, self.max_panels);
        2f64.sqrt() * v / (4.0 * PI * t).powf(1.5)
    }

    pub fn kernel(&self, t: f64, rho: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("heat kernel time {t} must be positive")));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("distance {rho} must be non-negative")));
        }
        Ok(self.scaled(t, rho) * (-rho * rho / (4.0 * t) - 0.25 * t).exp())
    }
}

/// `K₂(t, ρ)` with default quadrature controls.
pub fn heat_kernel_h2(t: f64, rho: f64) -> Result<f64> {
    HeatKernelEvaluator::default().kernel(t, rho)
}

/// `K₂(t, ·)` tabulated on a uniform grid for cubic interpolation of
/// `log K₂`, with the tail integrals `∫_x^∞ K₂ sinh` and `∫_x^∞ K₂ cosh`.
#[derive(Debug, Clone)]
pub struct RadialKernelTable {
    pub t: f64,
    step: f64,
    log_k: Vec<f64>,
    tail_sinh: Vec<f64>,
    tail_cosh: Vec<f64>,
}

impl RadialKernelTable {
    pub fn new(eval: &HeatKernelEvaluator, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("heat kernel time {t} must be positive")));
        }
        let rho_max = t + 17.0 * t.sqrt() + 25.0;
        let step = (t.sqrt() / 20.0).min(0.02);
        let n = (rho_max / step).ceil() as usize + 1;
        let log_k: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let rho = i as f64 * step;
                eval.scaled(t, rho).ln() - rho * rho / (4.0 * t) - 0.25 * t
            })
            .collect();
        // Simpson on each cell with the midpoint from interpolation
        let mut table = Self {
            t,
            step,
            log_k,
            tail_sinh: vec![0.0; n],
            tail_cosh: vec![0.0; n],
        };
        for i in (0..n - 1).rev() {
            let (a, b) = (i as f64 * step, (i + 1) as f64 * step);
            let m = 0.5 * (a + b);
            let (ka, km, kb) = (table.value(a), table.value(m), table.value(b));
            let simpson = |f: fn(f64) -> f64| step / 6.0 * (ka * f(a) + 4.0 * km * f(m) + kb * f(b));
            table.tail_sinh[i] = table.tail_sinh[i + 1] + simpson(f64::sinh);
            table.tail_cosh[i] = table.tail_cosh[i + 1] + simpson(f64::cosh);
        }
        Ok(table)
    }

    pub fn rho_max(&self) -> f64 {
        (self.log_k.len() - 1) as f64 * self.step
    }

    /// Interpolated `K₂(t, ρ)`; zero beyond the table.
    pub fn value(&self, rho: f64) -> f64 {
        let x = rho.abs() / self.step;
        let n = self.log_k.len();
        let i = x.floor() as usize;
        if i + 1 >= n {
            return 0.0;
        }
        let f = x - i as f64;
        // even extension across ρ = 0
        let at = |j: isize| -> f64 {
            let j = j.unsigned_abs().min(n - 1);
            self.log_k[j]
        };
        let i = i as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        // Catmull–Rom
        let v = p1
            + 0.5
                * f
                * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
        v.exp()
    }

    fn tail_at(&self, table: &[f64], x: f64, g: fn(f64) -> f64) -> f64 {
        if x <= 0.0 {
            return table[0] + self.partial(x, 0.0, g);
        }
        let i = (x / self.step).floor() as usize;
        if i + 1 >= table.len() {
            return 0.0;
        }
        table[i + 1] + self.partial(x, (i + 1) as f64 * self.step, g)
    }

    /// `∫_a^b K₂ g` by Simpson on a short interval.
    fn partial(&self, a: f64, b: f64, g: fn(f64) -> f64) -> f64 {
        let m = 0.5 * (a + b);
        (b - a) / 6.0 * (self.value(a) * g(a) + 4.0 * self.value(m) * g(m) + self.value(b) * g(b))
    }

    /// `∫_x^∞ K₂(t, u) sinh u du`.
    pub fn tail_sinh(&self, x: f64) -> f64 {
        self.tail_at(&self.tail_sinh, x, f64::sinh)
    }

    /// `∫_x^∞ K₂(t, u) cosh u du`.
    pub fn tail_cosh(&self, x: f64) -> f64 {
        self.tail_at(&self.tail_cosh, x, f64::cosh)
    }

    /// `∫₀^∞ K₂(t, ρ) 2π sinh ρ dρ`, which is 1.
    pub fn normalization(&self) -> f64 {
        2.0 * PI * self.tail_sinh[0]
    }

    /// `∫_R^∞ K₂(t, r + b) sinh r dr`.
    pub fn shifted_tail(&self, big_r: f64, b: f64) -> f64 {
        let x = big_r + b;
        b.cosh() * self.tail_sinh(x) - b.sinh() * self.tail_cosh(x)
    }

    /// CSV with header `t,rho,K2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rho,K2\n");
        for (i, l) in self.log_k.iter().enumerate() {
            let _ = writeln!(out, "{:.17e},{:.17e},{:.17e}", self.t, i as f64 * self.step, l.exp());
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Value of the entropy functional, split into the mesh part and the
/// modelled end beyond the truncation sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub total: f64,
    pub tail: f64,
}

/// Resampling factor of the boundary directions for the end model.
pub const END_REFINEMENT: usize = 4;

/// Precomputed quadrature of a surface for repeated functional evaluation.
#[derive(Debug, Clone)]
pub struct SurfaceQuadrature {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    /// Exact hyperbolic area of each triangle inside the body ball.
    areas: Vec<f64>,
    /// Triangles crossing the body sphere.
    crossing: Vec<bool>,
    /// Euclidean radius of the body ball.
    body_s: f64,
    /// Hyperbolic radius of the body ball.
    big_r: f64,
    /// Boundary directions and their arc-length weights on the sphere.
    ends: Vec<(Vector3<f64>, f64)>,
}

impl SurfaceQuadrature {
    /// The mesh is integrated inside the ball of Euclidean radius
    /// `1 − 10(1 − s)`, where the flat boundary triangles have not yet pulled
    /// away from the sphere; the end model takes over from there.
    pub fn new(m: &TriangulatedSurface) -> Result<Self> {
        let v = m.vertices();
        let body_s = 1.0 - 10.0 * (1.0 - m.s());
        if !(body_s > 0.0) {
            return Err(Error::Domain(format!("truncation s = {} too small for the end model", m.s())));
        }
        let mut areas = Vec::new();
        let mut crossing = Vec::new();
        let mut triangles = Vec::new();
        for t in m.triangles() {
            let (a, b, c) = (&v[t[0]], &v[t[1]], &v[t[2]]);
            let piece = clipped_triangle(a, b, c, Some(body_s));
            if piece.area > 0.0 {
                triangles.push(*t);
                areas.push(piece.area);
                crossing.push([a, b, c].iter().any(|x| x.norm() > body_s) || piece.arc_angle != 0.0);
            }
        }
        // the visual weights of p₀ near the body radius peak on a scale
        // comparable to the mesh spacing, so the ends are resampled finer
        let loop_dirs = m.boundary_loop().iter().map(|&i| v[i].normalize());
        let dirs = BoundaryCurve::from_directions(loop_dirs)?;
        let dirs = dirs.resample_arclength(END_REFINEMENT * dirs.len())?;
        let dirs = dirs.samples();
        let n = dirs.len();
        let ends = (0..n)
            .map(|i| {
                let prev = geodesic_angle(&dirs[(i + n - 1) % n], &dirs[i]);
                let next = geodesic_angle(&dirs[i], &dirs[(i + 1) % n]);
                (dirs[i], 0.5 * (prev + next))
            })
            .collect();
        Ok(Self {
            vertices: v.to_vec(),
            triangles,
            areas,
            crossing,
            body_s,
            big_r: crate::hyperbolic::RadiusTriple::from_s(body_s)?.r,
            ends,
        })
    }

    /// Length of the boundary curve in the visual metric from `p0`.
    pub fn visual_length(&self, p0: &Vector3<f64>) -> f64 {
        self.ends.iter().map(|(u, w)| w * (-busemann(u, p0)).exp()).sum()
    }
}

fn distance(x: &Vector3<f64>, p: &Vector3<f64>, p_factor: f64) -> f64 {
    let nx = x.norm();
    let d = (x - p).norm();
    2.0 * (d / ((1.0 - nx) * (1.0 + nx) * p_factor).sqrt()).asinh()
}

/// `B_θ(a) = log(|θ − a|² / (1 − |a|²))`.
fn busemann(theta: &Vector3<f64>, a: &Vector3<f64>) -> f64 {
    let na = a.norm();
    ((theta - a).norm_squared() / ((1.0 - na) * (1.0 + na))).ln()
}

/// Entropy functional `∫ K₂(τ, d(p, p₀)) dA` for the table's `τ`.
///
/// Each triangle contributes its exact hyperbolic area inside the body ball
/// times the density-weighted average of the kernel over a 7-point rule, on
/// a uniform subdivision fine enough that the distance to `p₀` varies by at
/// most `min(1, √τ) / 2` per piece. On triangles crossing the body sphere
/// only the points inside it are averaged. Triangles whose kernel is
/// negligible are skipped.
pub fn entropy_value(q: &SurfaceQuadrature, p0: &BallPoint<3>, table: &RadialKernelTable, tail: bool) -> EntropyValue {
    let p = *p0.coords();
    let pf = p0.one_minus_norm_sq();
    let dist: Vec<f64> = q.vertices.iter().map(|x| distance(x, &p, pf)).collect();
    let scale = 0.5 * table.t.sqrt().min(1.0);
    let negligible = 1e-14 / q.areas.len() as f64;
    let parts: Vec<f64> = q
        .triangles
        .par_iter()
        .zip(&q.areas)
        .zip(&q.crossing)
        .map(|((t, &area), &crossing)| {
            let (a, b, c) = (q.vertices[t[0]], q.vertices[t[1]], q.vertices[t[2]]);
            // flat triangles near the sphere sag inward in hyperbolic terms,
            // so the edge midpoints and centroid are sampled too
            let d = [
                dist[t[0]],
                dist[t[1]],
                dist[t[2]],
                distance(&(0.5 * (a + b)), &p, pf),
                distance(&(0.5 * (b + c)), &p, pf),
                distance(&(0.5 * (c + a)), &p, pf),
                distance(&((a + b + c) / 3.0), &p, pf),
            ];
            let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = d.iter().cloned().fold(0.0, f64::max);
            if lo > table.rho_max() || table.value(lo) * area < negligible {
                return 0.0;
            }
            let mut k = (((hi - lo) / scale).ceil() as usize).clamp(1, 32);
            let clip = if crossing {
                k = k.max(8);
                q.body_s
            } else {
                1.0
            };
            let mut num = 0.0;
            let mut den = 0.0;
            let h = 1.0 / k as f64;
            for i in 0..k {
                for j in 0..k - i {
                    // upright and (if present) inverted sub-triangles
                    let corners = [
                        [i as f64, j as f64],
                        [(i + 1) as f64, j as f64],
                        [i as f64, (j + 1) as f64],
                    ];
                    sub_triangle(&a, &b, &c, &corners, h, clip, &p, pf, table, &mut num, &mut den);
                    if i + j + 1 < k {
                        let inv = [
                            [(i + 1) as f64, j as f64],
                            [(i + 1) as f64, (j + 1) as f64],
                            [i as f64, (j + 1) as f64],
                        ];
                        sub_triangle(&a, &b, &c, &inv, h, clip, &p, pf, table, &mut num, &mut den);
                    }
                }
            }
            if den > 0.0 {
                area * num / den
            } else {
                0.0
            }
        })
        .collect();
    let body: f64 = parts.iter().sum();
    let tail_value = if tail {
        end_value(q, &p, table)
    } else {
        0.0
    };
    EntropyValue {
        total: body + tail_value,
        tail: tail_value,
    }
}

/// The modelled end: radial rays over the boundary directions, each
/// carrying `w sinh r dr` of area. Up to 10 beyond the distance `a` of `p₀`
/// from the origin the exact distance
/// `cosh d = cosh a cosh r − sinh a cos φ sinh r` is integrated by
/// Gauss–Legendre panels; further out `d = r + B_θ(p₀)` to `O(e^{−20})`.
fn end_value(q: &SurfaceQuadrature, p: &Vector3<f64>, table: &RadialKernelTable) -> f64 {
    let np = p.norm();
    let a = 2.0 * np.atanh();
    let (ca, sa) = (a.cosh(), a.sinh());
    let r0 = q.big_r;
    let r1 = r0.max(a + 10.0);
    let width = 0.25 * table.t.sqrt().min(1.0);
    let panels = ((r1 - r0) / width).ceil() as usize;
    let near_needed = panels > 0 && table.value((r0 - a).max(0.0)) * r1.sinh() * (r1 - r0) > 1e-18;
    let gl = GaussLegendre::new(8);
    q.ends
        .iter()
        .map(|(u, w)| {
            let cos_phi = if np > 0.0 { u.dot(p) / np } else { 0.0 };
            let mut v = table.shifted_tail(r1, busemann(u, p));
            if near_needed {
                let h = (r1 - r0) / panels as f64;
                for k in 0..panels {
                    let lo = r0 + k as f64 * h;
                    v += gl.integrate(lo, lo + h, |r| {
                        let c = ca * r.cosh() - sa * cos_phi * r.sinh();
                        table.value(c.max(1.0).acosh()) * r.sinh()
                    });
                }
            }
            w * v
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn sub_triangle(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
    corners: &[[f64; 2]; 3],
    h: f64,
    clip: f64,
    p: &Vector3<f64>,
    pf: f64,
    table: &RadialKernelTable,
    num: &mut f64,
    den: &mut f64,
) {
    let point = |u: f64, v: f64| a + (b - a) * u + (c - a) * v;
    let q: Vec<Vector3<f64>> = corners.iter().map(|cr| point(cr[0] * h, cr[1] * h)).collect();
    for (l, w) in TRIANGLE_7.points.iter().zip(TRIANGLE_7.weights) {
        let x = q[0] * l[0] + q[1] * l[1] + q[2] * l[2];
        let nx = x.norm();
        if nx > clip {
            continue;
        }
        let g = (1.0 - nx) * (1.0 + nx);
        let density = w * 4.0 / (g * g);
        *num += density * table.value(distance(&x, p, pf));
        *den += density;
    }
}

/// `∫ K₂(τ, d(p, p₀)) dA` over the surface plus its modelled end.
pub fn entropy_functional(m: &TriangulatedSurface, p0: &BallPoint<3>, tau: f64) -> Result<f64> {
    let table = RadialKernelTable::new(&HeatKernelEvaluator::default(), tau)?;
    Ok(entropy_value(&SurfaceQuadrature::new(m)?, p0, &table, true).total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyOptions {
    pub log_tau_min: f64,
    pub log_tau_max: f64,
    /// Points of the initial scan in `log τ`.
    pub tau_grid: usize,
    /// Extra starting points for the search over `p₀`, besides the origin and
    /// the surface vertex nearest to it.
    pub seeds: Vec<Vector3<f64>>,
    pub tail_correction: bool,
    /// Tolerance in `log τ` for the golden-section refinement.
    pub log_tau_tol: f64,
    /// Simplex size tolerance of the `p₀` search, in hyperbolic units.
    pub p0_tol: f64,
    pub max_evaluations: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self {
            log_tau_min: -4.0,
            log_tau_max: 4.0,
            tau_grid: 9,
            seeds: Vec::new(),
            tail_correction: true,
            log_tau_tol: 0.05,
            p0_tol: 1e-2,
            max_evaluations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyResult {
    pub lambda_h: f64,
    pub argmax_p0: [f64; 3],
    pub argmax_tau: f64,
    /// Share of the optimal value coming from the modelled end.
    pub tail_fraction: f64,
    /// The maximizing `τ` sits at an end of the searched range, so the
    /// supremum may be a limit.
    pub tau_at_bound: bool,
    pub converged: bool,
    /// Functional evaluations spent.
    pub evaluations: usize,
}

/// Ball point at hyperbolic normal coordinates `v` about the origin.
fn ball_from_normal(v: &Vector3<f64>) -> Vector3<f64> {
    let r = v.norm();
    if r == 0.0 {
        Vector3::zeros()
    } else {
        v * ((0.5 * r).tanh() / r)
    }
}

fn normal_from_ball(x: &Vector3<f64>) -> Vector3<f64> {
    let n = x.norm();
    if n == 0.0 {
        Vector3::zeros()
    } else {
        x * (2.0 * n.atanh() / n)
    }
}

/// Nelder–Mead maximization in normal coordinates.
fn maximize_p0(
    f: &dyn Fn(&Vector3<f64>) -> f64,
    start: Vector3<f64>,
    size: f64,
    tol: f64,
    max_eval: usize,
) -> (Vector3<f64>, f64, usize, bool) {
    let mut simplex: Vec<(Vector3<f64>, f64)> = Vec::with_capacity(4);
    simplex.push((start, f(&start)));
    for k in 0..3 {
        let mut v = start;
        v[k] += size;
        simplex.push((v, f(&v)));
    }
    let mut evals = 4;
    loop {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let spread = simplex.iter().map(|s| (s.0 - simplex[0].0).norm()).fold(0.0, f64::max);
        if spread < tol {
            return (simplex[0].0, simplex[0].1, evals, true);
        }
        if evals >= max_eval {
            return (simplex[0].0, simplex[0].1, evals, false);
        }
        let centroid = (simplex[0].0 + simplex[1].0 + simplex[2].0) / 3.0;
        let worst = simplex[3];
        let reflect = centroid + (centroid - worst.0);
        let fr = f(&reflect);
        evals += 1;
        if fr > simplex[0].1 {
            let expand = centroid + (centroid - worst.0) * 2.0;
            let fe = f(&expand);
            evals += 1;
            simplex[3] = if fe > fr { (expand, fe) } else { (reflect, fr) };
        } else if fr > simplex[2].1 {
            simplex[3] = (reflect, fr);
        } else {
            let contract = centroid + (worst.0 - centroid) * 0.5;
            let fc = f(&contract);
            evals += 1;
            if fc > worst.1 {
                simplex[3] = (contract, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    s.0 = best + (s.0 - best) * 0.5;
                    s.1 = f(&s.0);
                    evals += 1;
                }
            }
        }
    }
}

/// `λ_H` with default options.
pub fn hyperbolic_entropy(m: &TriangulatedSurface) -> Result<EntropyResult> {
    hyperbolic_entropy_with(m, &EntropyOptions::default())
}

/// Supremum of the entropy functional over `p₀` and `log τ`. The seeds are
/// evaluated on a grid in `log τ`; at the best grid value a `p₀` search runs
/// from every seed, followed by golden-section refinement in `log τ` with the
/// `p₀` search restarted from the current best point. `p₀` is kept within
/// half the body radius of the origin, where the end model is accurate.
pub fn hyperbolic_entropy_with(m: &TriangulatedSurface, opts: &EntropyOptions) -> Result<EntropyResult> {
    if !(opts.log_tau_max > opts.log_tau_min) || opts.tau_grid < 2 {
        return Err(Error::Parameter("empty log τ range".into()));
    }
    let eval = HeatKernelEvaluator::default();
    let q = SurfaceQuadrature::new(m)?;
    let centre = m
        .vertices()
        .iter()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .copied()
        .unwrap_or_else(Vector3::zeros);
    let mut seeds = vec![Vector3::zeros(), normal_from_ball(&centre)];
    seeds.extend(opts.seeds.iter().map(normal_from_ball));
    let mut evaluations = 0;
    let mut converged = true;
    let functional = |table: &RadialKernelTable, v: &Vector3<f64>| -> f64 {
        if v.norm() > 0.5 * q.big_r {
            return f64::NEG_INFINITY;
        }
        match BallPoint::new(ball_from_normal(v)) {
            Ok(p) => entropy_value(&q, &p, table, opts.tail_correction).total,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let grid: Vec<f64> = (0..opts.tau_grid)
        .map(|i| opts.log_tau_min + (opts.log_tau_max - opts.log_tau_min) * i as f64 / (opts.tau_grid - 1) as f64)
        .collect();
    let mut scan = (f64::NEG_INFINITY, 0);
    for (i, &lt) in grid.iter().enumerate() {
        let table = RadialKernelTable::new(&eval, lt.exp())?;
        for s in &seeds {
            let v = functional(&table, s);
            evaluations += 1;
            if v > scan.0 {
                scan = (v, i);
            }
        }
    }
    // best value and p₀ (normal coordinates) at one log τ
    let mut search = |log_tau: f64, starts: &[Vector3<f64>], size: f64| -> Result<(f64, Vector3<f64>)> {
        let table = RadialKernelTable::new(&eval, log_tau.exp())?;
        let f = |v: &Vector3<f64>| functional(&table, v);
        let mut best = (f64::NEG_INFINITY, Vector3::zeros());
        for s in starts {
            let (v, value, n, ok) = maximize_p0(&f, *s, size, opts.p0_tol, opts.max_evaluations);
            evaluations += n;
            converged &= ok;
            if value > best.0 {
                best = (value, v);
            }
        }
        Ok(best)
    };
    let imax = scan.1;
    let (value, p0) = search(grid[imax], &seeds, 0.25)?;
    let mut best = (value, p0, grid[imax]);
    let lo = grid[imax.saturating_sub(1)];
    let hi = grid[(imax + 1).min(grid.len() - 1)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = search(x1, &[best.1], 0.1)?;
    let mut f2 = search(x2, &[best.1], 0.1)?;
    while b - a > opts.log_tau_tol {
        if f1.0 > f2.0 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = search(x1, &[f2.1], 0.1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = search(x2, &[f1.1], 0.1)?;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f.0 > best.0 {
            best = (f.0, f.1, x);
        }
    }
    let best_p0 = ball_from_normal(&best.1);
    let table = RadialKernelTable::new(&eval, best.2.exp())?;
    let split = entropy_value(&q, &BallPoint::new(best_p0)?, &table, opts.tail_correction);
    let edge = opts.log_tau_tol;
    Ok(EntropyResult {
        lambda_h: best.0,
        argmax_p0: [best_p0.x, best_p0.y, best_p0.z],
        argmax_tau: best.2.exp(),
        tail_fraction: if split.total > 0.0 { split.tail / split.total } else { 0.0 },
        tau_at_bound: best.2 < opts.log_tau_min + edge || best.2 > opts.log_tau_max - edge,
        converged,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_time() {
        assert!(heat_kernel_h2(0.0, 1.0).is_err());
        assert!(heat_kernel_h2(-1.0, 1.0).is_err());
        assert!(heat_kernel_h2(1.0, -0.5).is_err());
    }

    #[test]
    fn table_matches_direct_kernel() {
        let eval = HeatKernelEvaluator::default();
        let table = RadialKernelTable::new(&eval, 0.7).unwrap();
        for rho in [0.0, 0.013, 0.5, 1.37, 4.2] {
            let direct = eval.kernel(0.7, rho).unwrap();
            assert!((table.value(rho) / direct - 1.0).abs() < 1e-8, "rho {rho}");
        }
    }
}
