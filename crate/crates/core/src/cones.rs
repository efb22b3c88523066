//! Geodesic cones over the origin.
//!
//! A cone of density `Θ` has truncation length `L_ρ = 2πΘ sinh ρ` and area
//! `A_ρ = 2πΘ (cosh ρ − 1)`, normalized so that `L_R` is the length of the
//! link at the cap radius `R`. It satisfies `L² = 4πΘA + A²`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::RadiusTriple;
use crate::mesh::TriangulatedSurface;

/// Radial layers of [`discrete_cone`].
pub const CONE_LAYERS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeData {
    pub theta: f64,
    /// Cap radius.
    pub r: f64,
    /// Hyperbolic length of the link on the sphere of radius `r`.
    pub boundary_length: f64,
}

impl ConeData {
    pub fn new(boundary_length: f64, r: f64) -> Result<Self> {
        if !(boundary_length > 0.0) || !(r > 0.0) || !r.is_finite() {
            return Err(Error::Parameter(format!("cone with length {boundary_length} at radius {r}")));
        }
        Ok(Self {
            theta: boundary_length / (2.0 * PI * r.sinh()),
            r,
            boundary_length,
        })
    }

    /// Cone over the boundary loop of a surface.
    pub fn of_surface(m: &TriangulatedSurface) -> Result<Self> {
        Self::new(m.hyperbolic_boundary_length(), RadiusTriple::from_s(m.s())?.r)
    }
}

/// `(L_ρ, A_ρ)` of the cone truncated at radius `ρ ∈ (0, R]`.
pub fn cone_profile(cd: &ConeData, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho <= cd.r) {
        return Err(Error::Parameter(format!("radius {rho} not in (0, {}]", cd.r)));
    }
    let l = cd.boundary_length * rho.sinh() / cd.r.sinh();
    let a = 2.0 * PI * cd.theta * (rho.cosh() - 1.0);
    Ok((l, a))
}

/// `L² − 4πΘA − A²` of a cone profile.
pub fn cone_identity_residual(theta: f64, l: f64, a: f64) -> f64 {
    l * l - 4.0 * PI * theta * a - a * a
}

/// `L² − 2LA / sinh ρ − A²` of a cone profile.
pub fn cone_length_identity_residual(rho: f64, l: f64, a: f64) -> f64 {
    l * l - 2.0 * l * a / rho.sinh() - a * a
}

/// Cone over the boundary loop of `m` from the origin. The rays are
/// diameters, layers are equally spaced in hyperbolic radius (so clustered
/// toward the sphere in Euclidean terms) and keep the loop's angular
/// resolution. Each strip lies in a plane through the origin, so the cone is
/// exactly the union of flat geodesic sectors over the boundary chords.
pub fn discrete_cone(m: &TriangulatedSurface) -> Result<TriangulatedSurface> {
    let s = m.s();
    let big_r = RadiusTriple::from_s(s)?.r;
    let loop_pts: Vec<_> = m.boundary_loop().iter().map(|&i| m.vertices()[i] / s).collect();
    let n = loop_pts.len();
    let mut verts = vec![nalgebra::Vector3::zeros()];
    for k in 1..=CONE_LAYERS {
        let e = if k == CONE_LAYERS {
            s
        } else {
            (0.5 * big_r * k as f64 / CONE_LAYERS as f64).tanh()
        };
        verts.extend(loop_pts.iter().map(|u| u * e));
    }
    let at = |k: usize, i: usize| 1 + (k - 1) * n + i % n;
    let mut tris = Vec::with_capacity(n * (2 * CONE_LAYERS - 1));
    for i in 0..n {
        tris.push([0, at(1, i), at(1, i + 1)]);
    }
    for k in 1..CONE_LAYERS {
        for i in 0..n {
            tris.push([at(k, i), at(k + 1, i), at(k, i + 1)]);
            tris.push([at(k, i + 1), at(k + 1, i), at(k + 1, i + 1)]);
        }
    }
    let boundary = (0..n).map(|i| at(CONE_LAYERS, i)).collect();
    TriangulatedSurface::new(verts, tris, boundary, s)
}

/// Divergence of the calibration field `X = ((cosh r − 1)/sinh r) ∇r` along a
/// surface with `|∇_Γ r|² = grad_norm_sq`:
/// `1 + ((cosh r − 1)² + 1)/sinh² r · (1 − |∇_Γ r|²)`.
pub fn calibration_divergence(r: f64, grad_norm_sq: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Parameter(format!("distance {r} must be positive")));
    }
    if !(0.0..=1.0).contains(&grad_norm_sq) {
        return Err(Error::Parameter(format!("|∇r|² = {grad_norm_sq} not in [0, 1]")));
    }
    let c = r.cosh() - 1.0;
    let sh = r.sinh();
    Ok(1.0 + (c * c + 1.0) / (sh * sh) * (1.0 - grad_norm_sq))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_at_cap_is_boundary_length() {
        let cd = ConeData::new(7.0, 3.0).unwrap();
        let (l, _) = cone_profile(&cd, 3.0).unwrap();
        assert!((l - 7.0).abs() < 1e-12);
        assert!(cone_profile(&cd, 3.5).is_err());
        assert!(cone_profile(&cd, 0.0).is_err());
    }

    #[test]
    fn divergence_rejects_origin() {
        assert!(calibration_divergence(0.0, 0.5).is_err());
        assert_eq!(calibration_divergence(2.0, 1.0).unwrap(), 1.0);
    }
}
