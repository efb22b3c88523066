//! Closed curves on the unit 2-sphere.
//!
//! A [`BoundaryCurve`] is an ordered, implicitly closed list of unit vectors.
//! Lengths are sums of great-circle segment lengths; curvature uses a
//! second-difference stencil on a copy resampled to uniform arc length, so
//! both converge at second order in the sample spacing.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::hyperbolic::{sphere_mobius, MobiusParam};

pub const MIN_SAMPLES: usize = 16;

/// Largest admissible amplitude of the Fourier-perturbed family.
pub const MAX_FOURIER_EPS: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    samples: Vec<Vector3<f64>>,
}

/// Per-sample curvature data of a curve on S².
#[derive(Debug, Clone)]
pub struct CurveGeometry {
    /// Spherical length of the curve.
    pub length: f64,
    /// Arc-length resampled points at which `k_sphere` is evaluated.
    pub points: Vec<Vector3<f64>>,
    /// Curvature vector of the curve inside S² (tangent to the sphere,
    /// normal to the curve).
    pub k_sphere: Vec<Vector3<f64>>,
    /// `∫ |k_sphere|² dl`.
    pub k_infinity: f64,
}

/// Catalog of test curves.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveKind {
    GreatCircle,
    /// Circle of constant polar angle `theta` (radians).
    Latitude { theta: f64 },
    /// Latitude `eps · sin(mode · φ)` over the equator.
    Fourier { eps: f64, mode: u32 },
    /// Longitude `φ + amplitude · sin(p φ) / p`, latitude `amplitude · sin(q φ)`.
    Lissajous { p: u32, q: u32, amplitude: f64 },
}

impl BoundaryCurve {
    /// Builds a curve from unit vectors, checking the invariants.
    pub fn new(samples: Vec<Vector3<f64>>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::Parameter(format!(
                "a boundary curve needs at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !((s.norm() - 1.0).abs() <= 1e-12) {
                return Err(Error::Domain(format!("sample {i} has norm {} != 1", s.norm())));
            }
        }
        let n = samples.len();
        for i in 0..n {
            if (samples[(i + 1) % n] - samples[i]).norm() < 1e-13 {
                return Err(Error::Degenerate(format!("samples {i} and {} coincide", (i + 1) % n)));
            }
        }
        Ok(Self { samples })
    }

    /// Normalises arbitrary non-zero vectors onto the sphere first.
    pub fn from_directions(dirs: impl IntoIterator<Item = Vector3<f64>>) -> Result<Self> {
        let samples = dirs
            .into_iter()
            .map(|v| {
                let n = v.norm();
                if n > 0.0 && n.is_finite() {
                    Ok(v / n)
                } else {
                    Err(Error::Degenerate("zero direction".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }

    pub fn samples(&self) -> &[Vector3<f64>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Great-circle lengths of the segments `i -> i+1` (closing segment last).
    pub fn segment_lengths(&self) -> Vec<f64> {
        let n = self.samples.len();
        (0..n)
            .map(|i| geodesic_angle(&self.samples[i], &self.samples[(i + 1) % n]))
            .collect()
    }

    /// Length weights for trapezoidal integration over the samples.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let seg = self.segment_lengths();
        let n = seg.len();
        (0..n).map(|i| 0.5 * (seg[i] + seg[(i + n - 1) % n])).collect()
    }

    pub fn rotated(&self, rot: &Rotation3<f64>) -> Self {
        Self {
            samples: self.samples.iter().map(|s| rot * s).collect(),
        }
    }

    /// Image under the sphere Möbius transformation with parameter `a`.
    pub fn mobius_image(&self, a: &MobiusParam<3>) -> Result<Self> {
        Self::new(self.samples.iter().map(|u| sphere_mobius(a, u)).collect())
    }

    /// Resamples to `n` points equally spaced in arc length, using a
    /// periodic cubic spline through the samples.
    pub fn resample_arclength(&self, n: usize) -> Result<Self> {
        if n < MIN_SAMPLES {
            return Err(Error::Parameter(format!("resample count {n} < {MIN_SAMPLES}")));
        }
        let seg = self.segment_lengths();
        let spline = PeriodicSpline::new(&self.samples, &seg)?;
        // Arc length of the spline itself, tabulated on a fine grid.
        let fine = 16;
        let m = self.samples.len();
        let mut knots_t = Vec::with_capacity(m * fine + 1);
        let mut knots_s = Vec::with_capacity(m * fine + 1);
        let mut acc = 0.0;
        let mut prev = spline.eval(0.0);
        knots_t.push(0.0);
        knots_s.push(0.0);
        let total_t = spline.period();
        for k in 1..=(m * fine) {
            let t = total_t * k as f64 / (m * fine) as f64;
            let p = spline.eval(t);
            acc += geodesic_angle(&(prev / prev.norm()), &(p / p.norm()));
            knots_t.push(t);
            knots_s.push(acc);
            prev = p;
        }
        let total = acc;
        let mut out = Vec::with_capacity(n);
        let mut j = 0;
        for k in 0..n {
            let target = total * k as f64 / n as f64;
            while j + 1 < knots_s.len() - 1 && knots_s[j + 1] < target {
                j += 1;
            }
            let (s0, s1) = (knots_s[j], knots_s[j + 1]);
            let frac = if s1 > s0 { (target - s0) / (s1 - s0) } else { 0.0 };
            let t = knots_t[j] + frac * (knots_t[j + 1] - knots_t[j]);
            let p = spline.eval(t);
            out.push(p / p.norm());
        }
        Self::new(out)
    }

    /// Smallest distance between two samples that are not neighbours along
    /// the curve (more than `gap` indices apart cyclically).
    pub fn min_nonadjacent_distance(&self, gap: usize) -> f64 {
        let n = self.samples.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (j - i).min(n - (j - i));
                if d > gap {
                    best = best.min((self.samples[i] - self.samples[j]).norm());
                }
            }
        }
        best
    }

    /// Embeddedness heuristic: no two samples farther apart along the curve
    /// than a few spacings come closer than half the mean spacing.
    pub fn is_embedded(&self) -> bool {
        let mean = curve_length(self).unwrap_or(0.0) / self.len() as f64;
        self.min_nonadjacent_distance(3) > 0.5 * mean
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,x,y,z\n");
        for (i, p) in self.samples.iter().enumerate() {
            let _ = writeln!(s, "{i},{:.17e},{:.17e},{:.17e}", p.x, p.y, p.z);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, Vector3<f64>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("index") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 columns", lineno + 1)));
            }
            let parse = |c: &str| {
                c.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let idx = cols[0]
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            rows.push((idx, Vector3::new(parse(cols[1])?, parse(cols[2])?, parse(cols[3])?)));
        }
        rows.sort_by_key(|r| r.0);
        Self::new(rows.into_iter().map(|r| r.1).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Angle between two unit vectors, accurate for nearby vectors.
pub fn geodesic_angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let chord = (a - b).norm();
    2.0 * (0.5 * chord).min(1.0).asin()
}

/// Spherical length of the curve.
pub fn curve_length(c: &BoundaryCurve) -> Result<f64> {
    if c.len() < MIN_SAMPLES {
        return Err(Error::Parameter("too few samples".into()));
    }
    Ok(c.segment_lengths().iter().sum())
}

/// Geodesic curvature of the curve inside S² and the integral `K∞`.
pub fn spherical_geodesic_curvature(c: &BoundaryCurve) -> Result<CurveGeometry> {
    let uniform = c.resample_arclength(c.len())?;
    let pts = uniform.samples;
    let n = pts.len();
    let seg: Vec<f64> = (0..n).map(|i| geodesic_angle(&pts[i], &pts[(i + 1) % n])).collect();
    let mut k_sphere = Vec::with_capacity(n);
    let mut k_inf = 0.0;
    for i in 0..n {
        let prev = pts[(i + n - 1) % n];
        let next = pts[(i + 1) % n];
        let x = pts[i];
        let h1 = seg[(i + n - 1) % n];
        let h2 = seg[i];
        if h1 <= 0.0 || h2 <= 0.0 {
            return Err(Error::Degenerate(format!("repeated samples near index {i}")));
        }
        let k = ((next - x) / h2 - (x - prev) / h1) * (2.0 / (h1 + h2));
        let t = (next - prev).normalize();
        let k_tan = k - x * k.dot(&x);
        let k_s = k_tan - t * k_tan.dot(&t);
        k_inf += k_s.norm_squared() * 0.5 * (h1 + h2);
        k_sphere.push(k_s);
    }
    Ok(CurveGeometry {
        length: seg.iter().sum(),
        points: pts,
        k_sphere,
        k_infinity: k_inf,
    })
}

/// Geodesic curvature vectors at the curve's own samples, from the
/// non-uniform three-point stencil without resampling.
pub fn sample_curvatures(c: &BoundaryCurve) -> Result<Vec<Vector3<f64>>> {
    let pts = c.samples();
    let n = pts.len();
    let seg = c.segment_lengths();
    (0..n)
        .map(|i| {
            let prev = pts[(i + n - 1) % n];
            let next = pts[(i + 1) % n];
            let x = pts[i];
            let h1 = seg[(i + n - 1) % n];
            let h2 = seg[i];
            if h1 <= 0.0 || h2 <= 0.0 {
                return Err(Error::Degenerate(format!("repeated samples near index {i}")));
            }
            let k = ((next - x) / h2 - (x - prev) / h1) * (2.0 / (h1 + h2));
            let t = (next - prev).normalize();
            let k_tan = k - x * k.dot(&x);
            Ok(k_tan - t * k_tan.dot(&t))
        })
        .collect()
}

/// Generates a curve of the catalog with `n` samples, uniform in the
/// generating parameter.
pub fn make_curve(kind: CurveKind, n: usize) -> Result<BoundaryCurve> {
    if n < MIN_SAMPLES {
        return Err(Error::Parameter(format!("sample count {n} < {MIN_SAMPLES}")));
    }
    let phis = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64);
    let lat_long = |lat: f64, long: f64| {
        Vector3::new(lat.cos() * long.cos(), lat.cos() * long.sin(), lat.sin())
    };
    let samples: Vec<Vector3<f64>> = match kind {
        CurveKind::GreatCircle => phis.map(|p| lat_long(0.0, p)).collect(),
        CurveKind::Latitude { theta } => {
            if !(theta > 0.0 && theta < PI) {
                return Err(Error::Parameter(format!("latitude polar angle {theta} not in (0, π)")));
            }
            phis.map(|p| lat_long(0.5 * PI - theta, p)).collect()
        }
        CurveKind::Fourier { eps, mode } => {
            if !(0.0..=MAX_FOURIER_EPS).contains(&eps) {
                return Err(Error::Parameter(format!(
                    "Fourier amplitude {eps} not in [0, {MAX_FOURIER_EPS}]"
                )));
            }
            if mode == 0 {
                return Err(Error::Parameter("Fourier mode must be >= 1".into()));
            }
            phis.map(|p| lat_long(eps * (mode as f64 * p).sin(), p)).collect()
        }
        CurveKind::Lissajous { p, q, amplitude } => {
            if p == 0 || q == 0 {
                return Err(Error::Parameter("Lissajous frequencies must be >= 1".into()));
            }
            if !(0.0..=0.9).contains(&amplitude) {
                return Err(Error::Parameter(format!("Lissajous amplitude {amplitude} not in [0, 0.9]")));
            }
            let (pf, qf) = (p as f64, q as f64);
            phis.map(|t| lat_long(amplitude * (qf * t).sin(), t + amplitude * (pf * t).sin() / pf))
                .collect()
        }
    };
    BoundaryCurve::new(samples)
}

/// Periodic C² cubic spline through points with prescribed knot spacings.
struct PeriodicSpline {
    knots: Vec<f64>,
    points: Vec<Vector3<f64>>,
    second: Vec<Vector3<f64>>,
    period: f64,
}

impl PeriodicSpline {
    fn new(points: &[Vector3<f64>], spacing: &[f64]) -> Result<Self> {
        let n = points.len();
        if spacing.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Degenerate("zero-length curve segment".into()));
        }
        let mut knots = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        knots.push(0.0);
        for h in spacing {
            acc += h;
            knots.push(acc);
        }
        // cyclic tridiagonal system for second derivatives M_i:
        // h_{i-1} M_{i-1} + 2(h_{i-1}+h_i) M_i + h_i M_{i+1} = 6 (d_i - d_{i-1})
        let h = |i: usize| spacing[i % n];
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![Vector3::zeros(); n];
        for i in 0..n {
            let hp = h(i + n - 1);
            let hn = h(i);
            sub[i] = hp;
            diag[i] = 2.0 * (hp + hn);
            sup[i] = hn;
            let dn = (points[(i + 1) % n] - points[i]) / hn;
            let dp = (points[i] - points[(i + n - 1) % n]) / hp;
            rhs[i] = (dn - dp) * 6.0;
        }
        let second = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
        Ok(Self {
            knots,
            points: points.to_vec(),
            second,
            period: acc,
        })
    }

    fn period(&self) -> f64 {
        self.period
    }

    fn eval(&self, t: f64) -> Vector3<f64> {
        let n = self.points.len();
        let t = t.rem_euclid(self.period);
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = 1.0 - a;
        let (p0, p1) = (self.points[i], self.points[(i + 1) % n]);
        let (m0, m1) = (self.second[i], self.second[(i + 1) % n]);
        p0 * a + p1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0)
    }
}

/// Sherman–Morrison solution of a cyclic tridiagonal system.
fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[Vector3<f64>],
) -> Vec<Vector3<f64>> {
    let n = diag.len();
    let alpha = sup[n - 1]; // A[n-1][0]
    let beta = sub[0]; // A[0][n-1]
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let solve = |r: &[Vector3<f64>]| -> Vec<Vector3<f64>> {
        let mut c = vec![0.0; n];
        let mut x = r.to_vec();
        c[0] = sup[0] / d[0];
        x[0] /= d[0];
        for i in 1..n {
            let m = d[i] - sub[i] * c[i - 1];
            c[i] = if i < n - 1 { sup[i] / m } else { 0.0 };
            let prev = x[i - 1];
            x[i] = (x[i] - prev * sub[i]) / m;
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= next * c[i];
        }
        x
    };
    let y = solve(rhs);
    let mut u = vec![Vector3::zeros(); n];
    u[0] = Vector3::repeat(gamma);
    u[n - 1] = Vector3::repeat(alpha);
    let z = solve(&u);
    let fac_num = y[0] + y[n - 1] * (beta / gamma);
    let fac_den = z[0] + z[n - 1] * (beta / gamma);
    (0..n)
        .map(|i| {
            Vector3::new(
                y[i].x - z[i].x * fac_num.x / (1.0 + fac_den.x),
                y[i].y - z[i].y * fac_num.y / (1.0 + fac_den.y),
                y[i].z - z[i].z * fac_num.z / (1.0 + fac_den.z),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn great_circle_length() {
        let c = make_curve(CurveKind::GreatCircle, 256).unwrap();
        assert!((curve_length(&c).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn latitude_length() {
        let th = PI / 4.0;
        let c = make_curve(CurveKind::Latitude { theta: th }, 256).unwrap();
        let l = curve_length(&c).unwrap();
        assert!((l - 2.0 * PI * th.sin()).abs() < 1e-4, "{l}");
        assert!((2.0 * PI * th.sin() - 4.4429).abs() < 1e-4);
    }

    #[test]
    fn length_refinement_is_second_order() {
        let kind = CurveKind::Fourier { eps: 0.2, mode: 3 };
        let l1 = curve_length(&make_curve(kind, 64).unwrap()).unwrap();
        let l2 = curve_length(&make_curve(kind, 128).unwrap()).unwrap();
        let l4 = curve_length(&make_curve(kind, 256).unwrap()).unwrap();
        let ratio = (l2 - l1) / (l4 - l2);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn curvature_of_circles() {
        let g = spherical_geodesic_curvature(&make_curve(CurveKind::GreatCircle, 256).unwrap()).unwrap();
        assert!(g.k_sphere.iter().all(|k| k.norm() < 1e-6));
        assert!(g.k_infinity < 1e-8);
        let th = PI / 3.0;
        let g = spherical_geodesic_curvature(&make_curve(CurveKind::Latitude { theta: th }, 256).unwrap())
            .unwrap();
        for k in &g.k_sphere {
            assert!((k.norm() - 1.0 / th.tan()).abs() < 1e-4);
        }
        let th = PI / 4.0;
        let g = spherical_geodesic_curvature(&make_curve(CurveKind::Latitude { theta: th }, 256).unwrap())
            .unwrap();
        let expected = 2.0 * PI * th.sin() / (th.tan() * th.tan());
        assert!((g.k_infinity - expected).abs() < 1e-3, "{} vs {expected}", g.k_infinity);
    }

    #[test]
    fn curvature_is_tangent_to_sphere_and_normal_to_curve() {
        let g = spherical_geodesic_curvature(&make_curve(CurveKind::Fourier { eps: 0.25, mode: 2 }, 200).unwrap())
            .unwrap();
        let n = g.points.len();
        for i in 0..n {
            let t = (g.points[(i + 1) % n] - g.points[(i + n - 1) % n]).normalize();
            assert!(g.k_sphere[i].dot(&g.points[i]).abs() < 1e-8);
            assert!(g.k_sphere[i].dot(&t).abs() < 1e-8);
        }
    }

    #[test]
    fn catalog_edge_cases() {
        let gc = make_curve(CurveKind::GreatCircle, 64).unwrap();
        assert_eq!(make_curve(CurveKind::Fourier { eps: 0.0, mode: 2 }, 64).unwrap(), gc);
        let eq = make_curve(CurveKind::Latitude { theta: PI / 2.0 }, 64).unwrap();
        for (a, b) in eq.samples().iter().zip(gc.samples()) {
            assert!((a - b).norm() < 1e-15);
        }
        let lj = make_curve(CurveKind::Lissajous { p: 2, q: 3, amplitude: 0.4 }, 256).unwrap();
        assert!(lj.min_nonadjacent_distance(1) > 0.0);
        assert!(lj.is_embedded());
        assert!(make_curve(CurveKind::Fourier { eps: 0.31, mode: 2 }, 64).is_err());
        assert!(make_curve(CurveKind::Latitude { theta: 0.0 }, 64).is_err());
        assert!(make_curve(CurveKind::GreatCircle, 8).is_err());
    }

    #[test]
    fn construction_rejects_bad_samples() {
        let mut s: Vec<_> = make_curve(CurveKind::GreatCircle, 32).unwrap().samples().to_vec();
        s[3] *= 1.001;
        assert!(matches!(BoundaryCurve::new(s.clone()), Err(Error::Domain(_))));
        s[3] = s[2];
        assert!(matches!(BoundaryCurve::new(s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn resampling_equalises_spacing() {
        let c = make_curve(CurveKind::Fourier { eps: 0.3, mode: 4 }, 128).unwrap();
        let r = c.resample_arclength(128).unwrap();
        let seg = r.segment_lengths();
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        // chords of a curved arc are shorter by O(κ²h²)
        assert!(seg.iter().all(|h| (h - mean).abs() < 5e-3 * mean));
        assert!((curve_length(&r).unwrap() - curve_length(&c).unwrap()).abs() < 5e-3);
    }

    #[test]
    fn csv_round_trip() {
        let c = make_curve(CurveKind::Lissajous { p: 2, q: 3, amplitude: 0.4 }, 40).unwrap();
        let back = BoundaryCurve::from_csv(&c.to_csv()).unwrap();
        for (a, b) in c.samples().iter().zip(back.samples()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
