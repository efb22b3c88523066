//! Closed forms and independent evaluations against the library.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::Vector3;
use proptest::prelude::*;
use renarea::cones::{calibration_divergence, cone_identity_residual, cone_length_identity_residual, cone_profile, ConeData};
use renarea::conformal::conformal_length;
use renarea::curves::{curve_length, make_curve, CurveKind};
use renarea::entropy::{heat_kernel_h2, HeatKernelEvaluator, RadialKernelTable};
use renarea::hyperbolic::{
    ball_translation, poincare_distance, radius_convert, BallPoint, MobiusParam, Radius, RadiusTriple,
};
use renarea::renormalized::{fit_expansion, isoperimetric_margins, TruncationSeries, DEFAULT_SCHEDULE};
use renarea::surface::{solve_plateau_with, MeshParams, SolveOptions};

fn disk_series() -> TruncationSeries {
    TruncationSeries::from_fn(&DEFAULT_SCHEDULE, |r| (2.0 * PI * r.sinh(), 2.0 * PI * (r.cosh() - 1.0))).unwrap()
}

#[test]
fn disk_fit_is_exact() {
    let c = fit_expansion(&disk_series()).unwrap();
    assert_relative_eq!(c.l_inf, 2.0 * PI, epsilon = 1e-10);
    assert!(c.k_inf.abs() < 1e-10);
    assert_relative_eq!(c.a_inf, -2.0 * PI, epsilon = 1e-10);
}

#[test]
fn synthetic_expansion_is_recovered() {
    let (l, k, a) = (5.0, 0.3, -7.0);
    let t = TruncationSeries::from_fn(&DEFAULT_SCHEDULE, |r| {
        (l * r.sinh() - k * (-r).exp(), l * r.cosh() + a + 0.2 * (-r).exp())
    })
    .unwrap();
    let c = fit_expansion(&t).unwrap();
    assert_relative_eq!(c.l_inf, l, epsilon = 1e-8);
    assert_relative_eq!(c.k_inf, k, epsilon = 1e-8);
    assert_relative_eq!(c.a_inf, a, epsilon = 1e-8);
    assert!(c.a_inf_error < 1e-8);
}

#[test]
fn disk_isoperimetric_margin_vanishes() {
    for m in isoperimetric_margins(&disk_series()) {
        assert!(m.abs() < 1e-12, "{m}");
    }
}

#[test]
fn calibration_divergence_closed_value() {
    // r = ln 2: cosh r = 5/4, sinh r = 3/4
    let d = calibration_divergence(2f64.ln(), 0.5).unwrap();
    assert_relative_eq!(d, 35.0 / 18.0, epsilon = 1e-14);
}

#[test]
fn cosh_from_boundary_defining_radius() {
    for r in [1e-3, 0.2, 1.0, 4.0, 12.0] {
        let t = RadiusTriple::from_r(r).unwrap();
        assert_relative_eq!(t.cosh_r(), r.cosh(), max_relative = 1e-13);
        assert_relative_eq!(t.sinh_r(), r.sinh(), max_relative = 1e-12);
        assert_relative_eq!(t.eps, 2.0 * (-r).exp(), max_relative = 1e-15);
        assert_relative_eq!(t.s, (0.5 * r).tanh(), max_relative = 1e-15);
    }
}

#[test]
fn latitude_conformal_length_is_round() {
    let c = make_curve(CurveKind::Latitude { theta: std::f64::consts::FRAC_PI_3 }, 512).unwrap();
    let lc = conformal_length(&c).unwrap();
    assert!((lc.lambda_c - 2.0 * PI).abs() < 1e-4, "{}", lc.lambda_c);
}

#[test]
fn fourier_length_matches_simpson() {
    let (eps, mode) = (0.2, 2.0);
    let n = 4000;
    let h = 2.0 * PI / n as f64;
    let speed = |p: f64| {
        let lat = eps * (mode * p).sin();
        let d = eps * mode * (mode * p).cos();
        (lat.cos().powi(2) + d * d).sqrt()
    };
    let simpson: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * speed(i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    let c = make_curve(CurveKind::Fourier { eps, mode: 2 }, 2048).unwrap();
    assert_relative_eq!(curve_length(&c).unwrap(), simpson, max_relative = 1e-5);
}

/// `K₂` by composite Simpson in `s = ρ + u²`, without the library quadrature.
fn kernel_simpson(t: f64, rho: f64) -> f64 {
    let u_max = ((rho * rho + 400.0 * t).sqrt() + 1.0 - rho).sqrt();
    let n = 20_000;
    let h = u_max / n as f64;
    let f = |u: f64| {
        if u == 0.0 {
            // limit of the integrand; zero when ρ = 0
            return if rho > 0.0 { 2.0 * rho * (-rho * rho / (4.0 * t)).exp() / rho.sinh().sqrt() } else { 0.0 };
        }
        let s = rho + u * u;
        2.0 * u * s * (-s * s / (4.0 * t)).exp() / (s.cosh() - rho.cosh()).sqrt()
    };
    let sum: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(i as f64 * h)
        })
        .sum();
    2f64.sqrt() * (-0.25 * t).exp() * (4.0 * PI * t).powf(-1.5) * sum * h / 3.0
}

#[test]
fn kernel_matches_independent_quadrature() {
    for (t, rho) in [(0.5, 0.0), (0.5, 1.0), (2.0, 3.0), (5.0, 0.2)] {
        let k = heat_kernel_h2(t, rho).unwrap();
        assert_relative_eq!(k, kernel_simpson(t, rho), max_relative = 1e-6);
    }
}

#[test]
fn kernel_small_time_limit() {
    let t = 1e-3;
    for rho in [0.0f64, 0.03, 0.08] {
        let gauss = (-rho * rho / (4.0 * t)).exp() / (4.0 * PI * t);
        let geom = if rho == 0.0 { 1.0 } else { (rho / rho.sinh()).sqrt() };
        let k = heat_kernel_h2(t, rho).unwrap();
        assert_relative_eq!(k, gauss * geom, max_relative = 2e-3);
    }
}

#[test]
fn kernel_decreases_in_distance() {
    let eval = HeatKernelEvaluator::default();
    let mut prev = f64::INFINITY;
    for i in 0..40 {
        let k = eval.kernel(1.5, 0.25 * i as f64).unwrap();
        assert!(k < prev);
        prev = k;
    }
}

#[test]
fn kernel_is_normalized() {
    let eval = HeatKernelEvaluator::default();
    for t in [0.05, 0.3, 1.0, 5.0, 20.0] {
        let n = RadialKernelTable::new(&eval, t).unwrap().normalization();
        assert!((n - 1.0).abs() < 1e-6, "t = {t}: {n}");
    }
}

#[test]
fn solve_does_not_depend_on_the_seed() {
    let c = make_curve(CurveKind::Fourier { eps: 0.15, mode: 2 }, 256).unwrap();
    let mesh = MeshParams { boundary_samples: 64, radial_step: 0.3 };
    let areas: Vec<f64> = [1, 2]
        .into_iter()
        .map(|seed| {
            let opts = SolveOptions { perturbation: 0.05, seed, ..Default::default() };
            solve_plateau_with(&c, 0.99, &mesh, &opts).unwrap().surface.hyperbolic_area()
        })
        .collect();
    assert_relative_eq!(areas[0], areas[1], max_relative = 1e-6);
}

proptest! {
    #[test]
    fn cone_identities_hold(theta in 0.05f64..5.0, rho in 0.01f64..12.0) {
        let cd = ConeData::new(2.0 * PI * theta * rho.sinh(), rho).unwrap();
        let (l, a) = cone_profile(&cd, rho).unwrap();
        prop_assert!(cone_identity_residual(theta, l, a).abs() <= 1e-12 * l * l);
        prop_assert!(cone_length_identity_residual(rho, l, a).abs() <= 1e-12 * l * l);
    }

    #[test]
    fn calibration_divergence_at_least_one(r in 0.01f64..20.0, g in 0.0f64..=1.0) {
        prop_assert!(calibration_divergence(r, g).unwrap() >= 1.0);
    }

    #[test]
    fn radius_round_trips(r in 1e-3f64..16.0, s in 1e-3f64..0.9999, eps in 1e-6f64..2.0) {
        // each round trip starts from the quantity it returns to
        let back_r = radius_convert(Radius::BoundaryDefining(RadiusTriple::from_r(r).unwrap().eps)).unwrap().r;
        let back_s = radius_convert(Radius::Hyperbolic(RadiusTriple::from_s(s).unwrap().r)).unwrap().s;
        let back_eps = radius_convert(Radius::Hyperbolic(RadiusTriple::from_eps(eps).unwrap().r)).unwrap().eps;
        prop_assert!((back_r - r).abs() <= 1e-12 * r.max(1.0));
        prop_assert!((back_s - s).abs() <= 1e-12 * s);
        prop_assert!((back_eps - eps).abs() <= 1e-12 * eps);
        let t = RadiusTriple::from_r(r).unwrap();
        prop_assert!(t.cosh_r() == 1.0 / t.eps + t.eps / 4.0);
    }

    #[test]
    fn translations_are_isometries(
        a in prop::array::uniform3(-0.5f64..0.5),
        p in prop::array::uniform3(-0.5f64..0.5),
        q in prop::array::uniform3(-0.5f64..0.5),
    ) {
        let a = MobiusParam::new(Vector3::from(a)).unwrap();
        let p = BallPoint::new(Vector3::from(p)).unwrap();
        let q = BallPoint::new(Vector3::from(q)).unwrap();
        let d0 = poincare_distance(&p, &q);
        let d1 = poincare_distance(&ball_translation(&a, &p), &ball_translation(&a, &q));
        prop_assert!((d0 - d1).abs() <= 1e-10 * d0.max(1.0));
    }
}
