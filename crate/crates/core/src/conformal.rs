//! Conformal length: the supremum of the spherical length of a curve over
//! all Möbius images.
//!
//! The length of a Möbius image is an integral of a stretch factor over the
//! curve. Two parameterizations of the stretch are available:
//!
//! * [`MobiusFamily::Direct`]: `sqrt(1 - |a|²) / (1 - a·x)`,
//! * [`MobiusFamily::Jacobian`]: `(1 - |b|²) / (1 - 2 b·x + |b|²)`, the
//!   boundary stretch of the ball translation by `b`.
//!
//! They agree pointwise under `a = 2b / (1 + |b|²)`, see [`jacobian_to_direct`].

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::hyperbolic::MobiusParam;

/// Largest `|a|` accepted by [`conformal_length_at`].
pub const MAX_PARAM_NORM: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MobiusFamily {
    #[default]
    Direct,
    Jacobian,
}

impl MobiusFamily {
    pub fn stretch(self, a: &Vector3<f64>, x: &Vector3<f64>) -> f64 {
        let a2 = a.norm_squared();
        let ax = a.dot(x);
        match self {
            MobiusFamily::Direct => (1.0 - a2).sqrt() / (1.0 - ax),
            MobiusFamily::Jacobian => (1.0 - a2) / (1.0 - 2.0 * ax + a2),
        }
    }
}

/// Maps a Jacobian-family parameter to the direct-family parameter with the
/// same stretch function.
pub fn jacobian_to_direct(b: &Vector3<f64>) -> Vector3<f64> {
    b * (2.0 / (1.0 + b.norm_squared()))
}

/// Inverse of [`jacobian_to_direct`]. The result is the ball point that the
/// corresponding translation moves to the origin.
pub fn direct_to_jacobian(a: &Vector3<f64>) -> Vector3<f64> {
    a / (1.0 + (1.0 - a.norm_squared()).max(0.0).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformalLengthResult {
    pub lambda_c: f64,
    pub argmax_a: [f64; 3],
    pub family: MobiusFamily,
    /// Grid samples `(a, value)` when requested.
    #[serde(skip)]
    pub landscape: Option<Vec<(Vector3<f64>, f64)>>,
    /// Gradient norm below `grad_tol` at the returned point.
    pub converged: bool,
    /// The best point sits on the trust-region boundary.
    pub boundary_limited: bool,
    pub grad_norm: f64,
    pub iterations: usize,
}

impl ConformalLengthResult {
    pub fn argmax(&self) -> Vector3<f64> {
        Vector3::from(self.argmax_a)
    }

    /// Ball point corresponding to the maximizing Möbius transformation.
    pub fn argmax_ball_point(&self) -> Vector3<f64> {
        match self.family {
            MobiusFamily::Direct => direct_to_jacobian(&self.argmax()),
            MobiusFamily::Jacobian => self.argmax(),
        }
    }

    pub fn landscape_csv(&self) -> Option<String> {
        let land = self.landscape.as_ref()?;
        let mut s = String::from("a_x,a_y,a_z,value\n");
        for (a, v) in land {
            let _ = writeln!(s, "{:.6},{:.6},{:.6},{:.15e}", a.x, a.y, a.z, v);
        }
        Some(s)
    }

    pub fn write_landscape(&self, path: &Path) -> Result<()> {
        let csv = self
            .landscape_csv()
            .ok_or_else(|| Error::Parameter("no landscape was recorded".into()))?;
        std::fs::write(path, csv)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ConformalOptions {
    pub family: MobiusFamily,
    pub grid_step: f64,
    pub grid_radius: f64,
    pub seeds: usize,
    pub fd_step: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub trust_radius: f64,
    pub keep_landscape: bool,
}

impl Default for ConformalOptions {
    fn default() -> Self {
        Self {
            family: MobiusFamily::Direct,
            grid_step: 0.1,
            grid_radius: 0.95,
            seeds: 5,
            fd_step: 1e-6,
            grad_tol: 1e-8,
            max_iter: 500,
            trust_radius: 1.0 - 1e-3,
            keep_landscape: false,
        }
    }
}

/// Length of the Möbius image of `c` with direct-family parameter `a`.
pub fn conformal_length_at(c: &BoundaryCurve, a: &MobiusParam<3>) -> Result<f64> {
    conformal_length_with(c, a.coords(), MobiusFamily::Direct)
}

/// Length of the Möbius image of `c` in the chosen family.
pub fn conformal_length_with(c: &BoundaryCurve, a: &Vector3<f64>, family: MobiusFamily) -> Result<f64> {
    if !(a.norm() <= MAX_PARAM_NORM) {
        return Err(Error::Domain(format!("|a| = {} exceeds {MAX_PARAM_NORM}", a.norm())));
    }
    Ok(eval(c, &c.trapezoid_weights(), a, family))
}

fn eval(c: &BoundaryCurve, w: &[f64], a: &Vector3<f64>, family: MobiusFamily) -> f64 {
    c.samples()
        .iter()
        .zip(w)
        .map(|(x, w)| w * family.stretch(a, x))
        .sum()
}

/// Richardson estimate of the sampling error of the value at `a`: the
/// polygon length converges at second order, so the error is a third of the
/// change when every other sample is dropped. Zero for curves that are
/// unions of great-circle arcs between samples.
pub fn sampling_error(c: &BoundaryCurve, a: &Vector3<f64>, family: MobiusFamily) -> Result<f64> {
    let half = BoundaryCurve::new(c.samples().iter().step_by(2).copied().collect())?;
    Ok((conformal_length_with(c, a, family)? - conformal_length_with(&half, a, family)?).abs() / 3.0)
}

/// Maximizes the image length over the Möbius group.
pub fn conformal_length(c: &BoundaryCurve) -> Result<ConformalLengthResult> {
    conformal_length_opts(c, &ConformalOptions::default())
}

pub fn conformal_length_opts(c: &BoundaryCurve, opts: &ConformalOptions) -> Result<ConformalLengthResult> {
    if !(opts.trust_radius > 0.0 && opts.trust_radius <= MAX_PARAM_NORM) {
        return Err(Error::Parameter(format!("trust radius {} out of range", opts.trust_radius)));
    }
    if !(opts.grid_step > 0.0) || opts.seeds == 0 {
        return Err(Error::Parameter("grid step and seed count must be positive".into()));
    }
    let w = c.trapezoid_weights();
    let f = |a: &Vector3<f64>| eval(c, &w, a, opts.family);

    let k = (opts.grid_radius / opts.grid_step).floor() as i64;
    let mut grid = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            for l in -k..=k {
                let a = Vector3::new(i as f64, j as f64, l as f64) * opts.grid_step;
                if a.norm() <= opts.grid_radius + 1e-12 {
                    grid.push(a);
                }
            }
        }
    }
    let values: Vec<(Vector3<f64>, f64)> = grid.par_iter().map(|a| (*a, f(a))).collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].1.total_cmp(&values[i].1).then(i.cmp(&j)));

    let mut best: Option<Ascent> = None;
    for &idx in order.iter().take(opts.seeds) {
        let run = ascend(&f, values[idx].0, opts);
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one seed");
    Ok(ConformalLengthResult {
        lambda_c: best.value,
        argmax_a: [best.a.x, best.a.y, best.a.z],
        family: opts.family,
        landscape: opts.keep_landscape.then_some(values),
        converged: best.grad_norm < opts.grad_tol.max(1e-6),
        boundary_limited: best.a.norm() >= opts.trust_radius - 1e-9,
        grad_norm: best.grad_norm,
        iterations: best.iterations,
    })
}

struct Ascent {
    a: Vector3<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
}

fn fd_gradient<F: Fn(&Vector3<f64>) -> f64>(f: &F, a: &Vector3<f64>, h: f64) -> Vector3<f64> {
    let mut g = Vector3::zeros();
    for i in 0..3 {
        let mut p = *a;
        let mut m = *a;
        p[i] += h;
        m[i] -= h;
        g[i] = (f(&p) - f(&m)) / (2.0 * h);
    }
    g
}

fn project(a: Vector3<f64>, radius: f64) -> Vector3<f64> {
    let n = a.norm();
    if n > radius {
        a * (radius / n)
    } else {
        a
    }
}

/// Projected gradient ascent with backtracking.
fn ascend<F: Fn(&Vector3<f64>) -> f64>(f: &F, start: Vector3<f64>, opts: &ConformalOptions) -> Ascent {
    let radius = opts.trust_radius;
    // keep finite-difference probes inside the ball
    let probe_radius = radius - 2.0 * opts.fd_step;
    let mut a = project(start, probe_radius);
    let mut fa = f(&a);
    let mut step = 0.1;
    let mut iterations = 0;
    let mut g = fd_gradient(f, &a, opts.fd_step);
    while iterations < opts.max_iter {
        // projected gradient: drop the outward component on the boundary
        let mut pg = g;
        if a.norm() >= probe_radius - 1e-12 {
            let n = a / a.norm();
            let out = pg.dot(&n);
            if out > 0.0 {
                pg -= n * out;
            }
        }
        if pg.norm() < opts.grad_tol {
            break;
        }
        iterations += 1;
        let mut t = step;
        let mut moved = false;
        while t > 1e-14 {
            let cand = project(a + g * t, probe_radius);
            let fc = f(&cand);
            if fc > fa {
                a = cand;
                fa = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
        step = (2.0 * t).min(1.0);
        g = fd_gradient(f, &a, opts.fd_step);
    }
    let mut pg = g;
    if a.norm() >= probe_radius - 1e-12 {
        let n = a / a.norm();
        let out = pg.dot(&n);
        if out > 0.0 {
            pg -= n * out;
        }
    }
    Ascent {
        a,
        value: fa,
        grad_norm: pg.norm(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{curve_length, make_curve, CurveKind};
    use std::f64::consts::PI;

    #[test]
    fn zero_parameter_gives_length() {
        let c = make_curve(CurveKind::Latitude { theta: PI / 3.0 }, 256).unwrap();
        let v = conformal_length_at(&c, &MobiusParam::zero()).unwrap();
        assert!((v - curve_length(&c).unwrap()).abs() < 1e-12);
        assert!((v - 5.4414).abs() < 1e-3);
    }

    #[test]
    fn great_circle_is_flat_in_plane() {
        let c = make_curve(CurveKind::GreatCircle, 256).unwrap();
        for t in [0.0, 0.3, 0.6, 0.9] {
            let a = MobiusParam::new(Vector3::new(t, 0.0, 0.0)).unwrap();
            assert!((conformal_length_at(&c, &a).unwrap() - 2.0 * PI).abs() < 1e-6);
        }
    }

    #[test]
    fn near_unit_parameter_rejected() {
        let c = make_curve(CurveKind::GreatCircle, 64).unwrap();
        let a = Vector3::new(1.0 - 1e-7, 0.0, 0.0);
        assert!(matches!(conformal_length_with(&c, &a, MobiusFamily::Direct), Err(Error::Domain(_))));
    }

    #[test]
    fn families_agree_pointwise() {
        let b = Vector3::new(0.3, -0.2, 0.5);
        let a = jacobian_to_direct(&b);
        assert!((direct_to_jacobian(&a) - b).norm() < 1e-14);
        for x in [Vector3::x(), Vector3::new(0.6, 0.0, 0.8), Vector3::new(0.0, -0.6, -0.8)] {
            let p = MobiusFamily::Direct.stretch(&a, &x);
            let j = MobiusFamily::Jacobian.stretch(&b, &x);
            assert!((p - j).abs() < 1e-13, "{p} vs {j}");
        }
    }

    #[test]
    fn latitude_circle_reaches_two_pi() {
        let c = make_curve(CurveKind::Latitude { theta: PI / 3.0 }, 256).unwrap();
        let r = conformal_length(&c).unwrap();
        assert!((r.lambda_c - 2.0 * PI).abs() < 1e-4, "{}", r.lambda_c);
        // displaced toward the circle's centre direction
        assert!(r.argmax_a[2] > 0.1);
    }
}
