//! Poincaré ball model primitives.
//!
//! The ball model of hyperbolic n-space is the open unit ball with metric
//! `4 |dx|² / (1 - |x|²)²`. Everything here is a pure function on small
//! value types; the dimension is a const parameter that defaults to 3.
//!
//! Möbius convention: `ball_translation(a, ·)` is the hyperbolic translation
//! that moves `a` to the origin,
//!
//! ```text
//! T_a(x) = ((1 - 2 a·x + |x|²)(-a) + (1 - |a|²) x) / (1 - 2 a·x + |a|²|x|²)
//! ```
//!
//! (Möbius addition `(-a) ⊕ x`), and `sphere_mobius(a, ·)` is its restriction
//! to the unit sphere. Any other normalisation differs by an orthogonal map,
//! which leaves every length and area computed in this crate unchanged.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// Points closer than this to the unit sphere are rejected.
pub const BALL_MARGIN: f64 = 1e-14;

pub type Vector<const N: usize> = SVector<f64, N>;

/// A point of the open unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPoint<const N: usize = 3>(Vector<N>);

impl<const N: usize> BallPoint<N> {
    pub fn new(x: Vector<N>) -> Result<Self> {
        let norm = x.norm();
        if !norm.is_finite() || norm >= 1.0 - BALL_MARGIN {
            return Err(Error::Domain(format!(
                "|x| = {norm} is not inside the open unit ball"
            )));
        }
        Ok(Self(x))
    }

    pub fn origin() -> Self {
        Self(Vector::<N>::zeros())
    }

    pub fn coords(&self) -> &Vector<N> {
        &self.0
    }

    pub fn into_inner(self) -> Vector<N> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `1 - |x|²`, computed as `(1 - |x|)(1 + |x|)` to keep relative accuracy
    /// near the sphere.
    pub fn one_minus_norm_sq(&self) -> f64 {
        one_minus_norm_sq(&self.0)
    }
}

impl BallPoint<3> {
    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vector::<3>::new(x, y, z))
    }
}

pub(crate) fn one_minus_norm_sq<const N: usize>(x: &Vector<N>) -> f64 {
    let r = x.norm();
    (1.0 - r) * (1.0 + r)
}

/// Parameter of a Möbius transformation of the sphere, `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusParam<const N: usize = 3>(Vector<N>);

impl<const N: usize> MobiusParam<N> {
    pub fn new(a: Vector<N>) -> Result<Self> {
        let norm = a.norm();
        if !norm.is_finite() || norm >= 1.0 {
            return Err(Error::Domain(format!("Möbius parameter has |a| = {norm} >= 1")));
        }
        Ok(Self(a))
    }

    pub fn zero() -> Self {
        Self(Vector::<N>::zeros())
    }

    pub fn coords(&self) -> &Vector<N> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn inverse(&self) -> Self {
        Self(-self.0)
    }
}

impl<const N: usize> From<BallPoint<N>> for MobiusParam<N> {
    fn from(p: BallPoint<N>) -> Self {
        Self(p.0)
    }
}

/// Hyperbolic distance between two points of the ball.
///
/// Evaluated as `2 asinh(|p - q| / sqrt((1-|p|²)(1-|q|²)))`, which equals
/// `arccosh(1 + 2|p-q|² / ((1-|p|²)(1-|q|²)))` but keeps full accuracy for
/// nearby points.
pub fn poincare_distance<const N: usize>(p: &BallPoint<N>, q: &BallPoint<N>) -> f64 {
    let diff = (p.0 - q.0).norm();
    if diff == 0.0 {
        return 0.0;
    }
    let denom = (p.one_minus_norm_sq() * q.one_minus_norm_sq()).sqrt();
    2.0 * (diff / denom).asinh()
}

/// Hyperbolic distance between two points given in geodesic polar
/// coordinates about the origin: hyperbolic radii `r1`, `r2` and the angle
/// `angle` between their directions. Stays finite far beyond the radius at
/// which ball coordinates round to the unit sphere.
pub fn polar_distance(r1: f64, r2: f64, angle: f64) -> f64 {
    // cosh d = cosh r1 cosh r2 - sinh r1 sinh r2 cos(angle)
    //        = cosh(r1 - r2) + sinh r1 sinh r2 (1 - cos angle)
    let half = (0.5 * angle).sin();
    let extra = 2.0 * r1.sinh() * r2.sinh() * half * half;
    let cosh_d = (r1 - r2).cosh() + extra;
    if cosh_d <= 1.0 {
        return (r1 - r2).abs();
    }
    // acosh(1 + y) = log1p(y + sqrt(y (2 + y)))
    let y = cosh_d - 1.0;
    (y + (y * (2.0 + y)).sqrt()).ln_1p()
}

/// Length scale factor `2 / (1 - |x|²)` of the Poincaré metric.
pub fn conformal_factor<const N: usize>(p: &BallPoint<N>) -> f64 {
    2.0 / p.one_minus_norm_sq()
}

/// Area density `4 / (1 - |x|²)²` of the Poincaré metric on a surface.
pub fn area_density(x: &Vector<3>) -> f64 {
    let d = one_minus_norm_sq(x);
    4.0 / (d * d)
}

/// Hyperbolic radius `R`, Euclidean ball radius `s` and boundary defining
/// value `eps` describing one truncation sphere about the origin.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RadiusTriple {
    pub r: f64,
    pub s: f64,
    pub eps: f64,
}

impl RadiusTriple {
    pub fn from_r(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Domain(format!("hyperbolic radius R = {r} must be >= 0")));
        }
        Ok(Self {
            r,
            s: (0.5 * r).tanh(),
            eps: 2.0 * (-r).exp(),
        })
    }

    pub fn from_s(s: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::Domain(format!("Euclidean radius s = {s} must lie in [0, 1)")));
        }
        // R = ln((1+s)/(1-s)) = 2 atanh(s)
        let r = 2.0 * s.atanh();
        Ok(Self {
            r,
            s,
            eps: 2.0 * (1.0 - s) / (1.0 + s),
        })
    }

    pub fn from_eps(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(Error::Domain(format!("boundary defining value eps = {eps} must lie in (0, 2]")));
        }
        let r = -(0.5 * eps).ln();
        Ok(Self {
            r,
            s: (2.0 - eps) / (2.0 + eps),
            eps,
        })
    }

    /// `cosh R = 1/eps + eps/4`, exact in terms of `eps`.
    pub fn cosh_r(&self) -> f64 {
        1.0 / self.eps + 0.25 * self.eps
    }

    pub fn sinh_r(&self) -> f64 {
        1.0 / self.eps - 0.25 * self.eps
    }
}

/// Which quantity a radius conversion starts from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Hyperbolic(f64),
    Euclidean(f64),
    BoundaryDefining(f64),
}

pub fn radius_convert(input: Radius) -> Result<RadiusTriple> {
    match input {
        Radius::Hyperbolic(r) => RadiusTriple::from_r(r),
        Radius::Euclidean(s) => RadiusTriple::from_s(s),
        Radius::BoundaryDefining(eps) => RadiusTriple::from_eps(eps),
    }
}

/// Hyperbolic isometry of the ball sending `a` to the origin.
pub fn ball_translation<const N: usize>(a: &MobiusParam<N>, p: &BallPoint<N>) -> BallPoint<N> {
    let image = mobius_translate(&a.0, &p.0);
    // The image of an interior point is interior; rounding can only push it
    // outward by a few ulps, so the unchecked constructor is fine here.
    BallPoint(image)
}

/// `(-a) ⊕ x` for any `x` in the closed ball.
pub(crate) fn mobius_translate<const N: usize>(a: &Vector<N>, x: &Vector<N>) -> Vector<N> {
    let ax = a.dot(x);
    let aa = a.norm_squared();
    let xx = x.norm_squared();
    let num = -a * (1.0 - 2.0 * ax + xx) + x * (1.0 - aa);
    let den = 1.0 - 2.0 * ax + aa * xx;
    num / den
}

/// Boundary action of `ball_translation(a, ·)` on the unit sphere.
pub fn sphere_mobius<const N: usize>(a: &MobiusParam<N>, u: &Vector<N>) -> Vector<N> {
    let v = mobius_translate(&a.0, u);
    // |v| = 1 analytically; renormalise away rounding.
    v / v.norm()
}

/// Length distortion `|D T_a(u)|` of `sphere_mobius(a, ·)` at a unit vector `u`.
pub fn sphere_mobius_stretch<const N: usize>(a: &MobiusParam<N>, u: &Vector<N>) -> f64 {
    let aa = a.0.norm_squared();
    (1.0 - aa) / (1.0 - 2.0 * a.0.dot(u) + aa)
}

/// Splits `x` into the part inside the span of `basis` and the part
/// orthogonal to it. The basis must be orthonormal.
pub fn tangential_normal_split<const N: usize>(
    x: &Vector<N>,
    basis: &[Vector<N>],
) -> Result<(Vector<N>, Vector<N>)> {
    for (i, e) in basis.iter().enumerate() {
        for (j, f) in basis.iter().enumerate().skip(i) {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (e.dot(f) - expected).abs() > 1e-10 {
                return Err(Error::Degenerate(format!(
                    "tangent basis is not orthonormal (<e{i}, e{j}> = {})",
                    e.dot(f)
                )));
            }
        }
    }
    let tangential = basis.iter().fold(Vector::<N>::zeros(), |acc, e| acc + e * e.dot(x));
    Ok((tangential, x - tangential))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p3(x: f64, y: f64, z: f64) -> BallPoint<3> {
        BallPoint::from_xyz(x, y, z).unwrap()
    }

    #[test]
    fn rejects_points_on_the_sphere() {
        assert!(BallPoint::from_xyz(1.0, 0.0, 0.0).is_err());
        assert!(BallPoint::from_xyz(0.0, 1.0 - 1e-15, 0.0).is_err());
        assert!(BallPoint::from_xyz(0.0, 1.0 - 1e-12, 0.0).is_ok());
        assert!(MobiusParam::new(Vector::<3>::new(0.6, 0.8, 0.0)).is_err());
    }

    #[test]
    fn distance_from_origin_is_radial_integral() {
        let o = BallPoint::<3>::origin();
        assert_eq!(poincare_distance(&o, &o), 0.0);
        let d = poincare_distance(&o, &p3(0.5, 0.0, 0.0));
        assert!((d - 3f64.ln()).abs() < 1e-14);
        for &s in &[0.1, 0.9, 0.999] {
            let d = poincare_distance(&o, &p3(0.0, 0.0, s));
            assert!((d - ((1.0 + s) / (1.0 - s)).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_distance_matches_ball_distance() {
        let r1: f64 = 1.3;
        let r2: f64 = 2.1;
        let ang: f64 = 0.7;
        let p = p3((r1 / 2.0).tanh(), 0.0, 0.0);
        let q = p3((r2 / 2.0).tanh() * ang.cos(), (r2 / 2.0).tanh() * ang.sin(), 0.0);
        assert!((polar_distance(r1, r2, ang) - poincare_distance(&p, &q)).abs() < 1e-12);
        assert!((polar_distance(3.0, 3.0, 0.0)).abs() < 1e-12);
        // far beyond the representable ball
        assert!((polar_distance(200.0, 0.0, 1.0) - 200.0).abs() < 1e-9);
    }

    #[test]
    fn conformal_factor_values() {
        assert_eq!(conformal_factor(&BallPoint::<3>::origin()), 2.0);
        assert!((conformal_factor(&p3(0.5, 0.0, 0.0)) - 8.0 / 3.0).abs() < 1e-15);
        let mut last = 0.0;
        for i in 0..100 {
            let f = conformal_factor(&p3(i as f64 / 101.0, 0.0, 0.0));
            assert!(f > last);
            last = f;
        }
    }

    #[test]
    fn radius_conversions() {
        let t = radius_convert(Radius::Hyperbolic(0.0)).unwrap();
        assert_eq!((t.s, t.eps), (0.0, 2.0));
        let t = radius_convert(Radius::BoundaryDefining(0.2)).unwrap();
        assert!((t.r - 10f64.ln()).abs() < 1e-14);
        assert!((t.cosh_r() - 5.05).abs() < 1e-14);
        assert!((t.r.cosh() - 5.05).abs() < 1e-13);
        for k in 1..=10 {
            let r = k as f64;
            let a = RadiusTriple::from_r(r).unwrap();
            let b = RadiusTriple::from_s(a.s).unwrap();
            let c = RadiusTriple::from_eps(a.eps).unwrap();
            assert!((b.r - r).abs() < 1e-12 * r.max(1.0), "R={r}: {}", b.r);
            assert!((c.r - r).abs() < 1e-12);
            assert!((c.s - a.s).abs() < 1e-12);
            assert!((a.cosh_r() - r.cosh()).abs() < 1e-12 * r.cosh());
        }
        assert!(radius_convert(Radius::Euclidean(1.0)).is_err());
        assert!(radius_convert(Radius::Hyperbolic(-1.0)).is_err());
        assert!(radius_convert(Radius::BoundaryDefining(2.5)).is_err());
        assert!(radius_convert(Radius::BoundaryDefining(0.0)).is_err());
    }

    #[test]
    fn translation_basics() {
        let a = MobiusParam::new(Vector::<3>::new(0.3, -0.2, 0.1)).unwrap();
        let pa = BallPoint::new(*a.coords()).unwrap();
        assert!(ball_translation(&a, &pa).norm() < 1e-15);
        let p = p3(0.1, 0.4, -0.3);
        let id = ball_translation(&MobiusParam::zero(), &p);
        assert!((id.coords() - p.coords()).norm() < 1e-15);
    }

    #[test]
    fn sphere_mobius_basics() {
        let a = MobiusParam::new(Vector::<3>::new(0.5, 0.1, -0.3)).unwrap();
        let u = Vector::<3>::new(0.0, 0.6, 0.8);
        let v = sphere_mobius(&a, &u);
        assert!((v.norm() - 1.0).abs() < 1e-14);
        let back = sphere_mobius(&a.inverse(), &v);
        assert!((back - u).norm() < 1e-12);
        assert!((sphere_mobius(&MobiusParam::zero(), &u) - u).norm() < 1e-15);
    }

    #[test]
    fn sphere_mobius_is_boundary_trace() {
        let a = MobiusParam::new(Vector::<3>::new(0.2, 0.4, -0.1)).unwrap();
        for k in 0..20 {
            let th = 0.3 + k as f64 * 0.13;
            let ph = k as f64 * 0.71;
            let u = Vector::<3>::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
            let x = BallPoint::new(u * (1.0 - 1e-6)).unwrap();
            let img = ball_translation(&a, &x).into_inner();
            assert!((img / img.norm() - sphere_mobius(&a, &u)).norm() < 1e-4);
        }
    }

    #[test]
    fn stretch_integrates_to_length() {
        // Image of the equator under a translation along x has length 2π.
        let a = MobiusParam::new(Vector::<3>::new(0.6, 0.0, 0.0)).unwrap();
        let n = 2000;
        let mut len = 0.0;
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            let u = Vector::<3>::new(t.cos(), t.sin(), 0.0);
            len += sphere_mobius_stretch(&a, &u) * 2.0 * PI / n as f64;
        }
        assert!((len - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn split_cases() {
        let e1 = Vector::<3>::new(1.0, 0.0, 0.0);
        let e2 = Vector::<3>::new(0.0, 1.0, 0.0);
        let (t, n) = tangential_normal_split(&Vector::<3>::new(0.2, 0.3, 0.0), &[e1, e2]).unwrap();
        assert!(n.norm() < 1e-15 && (t.norm() - 0.13f64.sqrt()).abs() < 1e-15);
        let (t, n) = tangential_normal_split(&Vector::<3>::new(0.0, 0.0, 0.4), &[e1, e2]).unwrap();
        assert!(t.norm() < 1e-15 && (n.norm() - 0.4).abs() < 1e-15);
        let x = Vector::<3>::new(0.1, -0.5, 0.3);
        let (t, n) = tangential_normal_split(&x, &[e1, e2]).unwrap();
        assert!((t.norm_squared() + n.norm_squared() - x.norm_squared()).abs() < 1e-15);
        assert!(tangential_normal_split(&x, &[e1, e1]).is_err());
    }
}
