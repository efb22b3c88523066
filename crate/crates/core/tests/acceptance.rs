//! The nine acceptance criteria, each reported on one line.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::{Rotation3, Vector3};
use renarea::cones::{cone_identity_residual, cone_length_identity_residual, cone_profile, discrete_cone, ConeData};
use renarea::conformal::{conformal_length, sampling_error, ConformalLengthResult};
use renarea::curvature::{boundary_normal_component, measure, mean_curvature_residual, SurfaceMeasurements};
use renarea::curves::{make_curve, BoundaryCurve, CurveKind};
use renarea::entropy::{hyperbolic_entropy_with, EntropyOptions, HeatKernelEvaluator, RadialKernelTable};
use renarea::hyperbolic::{radius_convert, MobiusParam, Radius, RadiusTriple};
use renarea::mesh::TriangulatedSurface;
use renarea::renormalized::{
    fit_expansion, isoperimetric_margins, radial_ratio_fit, renormalized_area_gauss_bonnet, series_from_surface,
    truncation_length_fit, ExpansionCoefficients, TruncationSeries, DEFAULT_SCHEDULE, ISOPERIMETRIC_TOL,
};
use renarea::surface::{solve_plateau_with, MeshParams, SolveOptions};

const S: f64 = 0.9999;
const SAMPLES: usize = 512;

/// Length and `∫ k_g² dl` of the Fourier curve `lat = eps sin(mode φ)`,
/// from the parametrization by composite Simpson.
fn fourier_oracle(eps: f64, mode: f64) -> (f64, f64) {
    let n = 20_000;
    let h = 2.0 * PI / n as f64;
    let (mut len, mut bend) = (0.0, 0.0);
    for i in 0..=n {
        let p = i as f64 * h;
        let lat = eps * (mode * p).sin();
        let d1 = eps * mode * (mode * p).cos();
        let d2 = -eps * mode * mode * (mode * p).sin();
        let g = Vector3::new(lat.cos() * p.cos(), lat.cos() * p.sin(), lat.sin());
        // first and second derivatives of the position in φ
        let g1 = Vector3::new(
            -lat.sin() * d1 * p.cos() - lat.cos() * p.sin(),
            -lat.sin() * d1 * p.sin() + lat.cos() * p.cos(),
            lat.cos() * d1,
        );
        let g2 = Vector3::new(
            -lat.cos() * d1 * d1 * p.cos() - lat.sin() * d2 * p.cos() + 2.0 * lat.sin() * d1 * p.sin()
                - lat.cos() * p.cos(),
            -lat.cos() * d1 * d1 * p.sin() - lat.sin() * d2 * p.sin() - 2.0 * lat.sin() * d1 * p.cos()
                - lat.cos() * p.sin(),
            -lat.sin() * d1 * d1 + lat.cos() * d2,
        );
        let speed = g1.norm();
        let kg = g.dot(&g1.cross(&g2)) / speed.powi(3);
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        len += w * speed;
        bend += w * kg * kg * speed;
    }
    (len * h / 3.0, bend * h / 3.0)
}

struct Case {
    name: &'static str,
    curve: BoundaryCurve,
    lambda: ConformalLengthResult,
    lambda_error: f64,
    surface: TriangulatedSurface,
    series: TruncationSeries,
    coeffs: ExpansionCoefficients,
    meas: SurfaceMeasurements,
    a_gb: f64,
    elapsed: Duration,
}

fn run_case(name: &'static str, curve: BoundaryCurve, mesh: &MeshParams) -> Case {
    let t = Instant::now();
    let lambda = conformal_length(&curve).unwrap();
    let lambda_error = sampling_error(&curve, &lambda.argmax(), lambda.family).unwrap();
    let surface = solve_plateau_with(&curve, S, mesh, &SolveOptions::default()).unwrap().surface;
    let series = series_from_surface(&surface, &DEFAULT_SCHEDULE).unwrap();
    let coeffs = fit_expansion(&series).unwrap();
    let meas = measure(&surface).unwrap();
    let a_gb = renormalized_area_gauss_bonnet(&meas).unwrap();
    Case {
        name,
        curve,
        lambda,
        lambda_error,
        surface,
        series,
        coeffs,
        meas,
        a_gb,
        elapsed: t.elapsed(),
    }
}

fn entropy_ratio(c: &Case) -> (f64, Duration) {
    let t = Instant::now();
    let opts = EntropyOptions {
        seeds: vec![c.lambda.argmax_ball_point()],
        ..Default::default()
    };
    let e = hyperbolic_entropy_with(&c.surface, &opts).unwrap();
    (e.lambda_h, t.elapsed())
}

struct Line {
    pass: bool,
    text: String,
}

fn line(n: usize, pass: bool, text: String) -> Line {
    Line {
        pass,
        text: format!("criterion {n} {}: {text}", if pass { "PASS" } else { "FAIL" }),
    }
}

fn emit(l: &Line) {
    // written past the test harness capture so the lines always show
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", l.text);
    let _ = out.flush();
}

#[test]
fn acceptance() {
    let mesh = MeshParams::default();
    let mut lines = Vec::new();
    let mut record = |l: Line| {
        emit(&l);
        lines.push(l);
    };

    // 1. great circle, tilted so that the surface is not a coordinate plane
    let rot = Rotation3::from_axis_angle(&Vector3::x_axis(), 0.4);
    let gc = run_case("great circle", make_curve(CurveKind::GreatCircle, SAMPLES).unwrap().rotated(&rot), &mesh);
    let (gc_lh, gc_entropy_time) = entropy_ratio(&gc);
    let gc_time = gc.elapsed + gc_entropy_time;
    let ok = (gc.lambda.lambda_c - 2.0 * PI).abs() < 1e-4
        && (gc.coeffs.a_inf / (-2.0 * PI) - 1.0).abs() < 0.02
        && (gc.a_gb / (-2.0 * PI) - 1.0).abs() < 0.02
        && gc.coeffs.k_inf.abs() < 1e-6
        && (gc_lh - 1.0).abs() < 1e-3
        && gc_time < Duration::from_secs(120);
    record(line(
        1,
        ok,
        format!(
            "lambda_c {:.10}, A_inf fit {:.8}, A_inf GB {:.8}, K_inf {:.2e}, lambda_H {:.6}, {} vertices, {:.1?}",
            gc.lambda.lambda_c,
            gc.coeffs.a_inf,
            gc.a_gb,
            gc.coeffs.k_inf,
            gc_lh,
            gc.surface.vertices().len(),
            gc_time
        ),
    ));

    // 2. fourier(0.2, 2)
    let f2 = run_case("fourier(0.2,2)", make_curve(CurveKind::Fourier { eps: 0.2, mode: 2 }, SAMPLES).unwrap(), &mesh);
    let combined = f2.lambda_error.hypot(f2.coeffs.a_inf_error);
    let margin = -f2.lambda.lambda_c - f2.coeffs.a_inf;
    let ok = f2.lambda.lambda_c > 2.0 * PI + 1e-3 && margin > 3.0 * combined && f2.elapsed < Duration::from_secs(600);
    record(line(
        2,
        ok,
        format!(
            "lambda_c {:.8}, -lambda_c - A_inf = {:.6} vs 3 x error {:.2e}, {:.1?}",
            f2.lambda.lambda_c,
            margin,
            3.0 * combined,
            f2.elapsed
        ),
    ));

    // 3. fit fidelity
    let disk = TruncationSeries::from_fn(&DEFAULT_SCHEDULE, |r| (2.0 * PI * r.sinh(), 2.0 * PI * (r.cosh() - 1.0)))
        .unwrap();
    let dc = fit_expansion(&disk).unwrap();
    let disk_ok =
        (dc.l_inf - 2.0 * PI).abs() < 1e-10 && dc.k_inf.abs() < 1e-10 && (dc.a_inf + 2.0 * PI).abs() < 1e-10;
    let (f_len, f_bend) = fourier_oracle(0.2, 2.0);
    let mut solved_ok = true;
    let mut detail = Vec::new();
    for (c, len, bend) in [(&gc, 2.0 * PI, 0.0), (&f2, f_len, f_bend)] {
        let l_ok = (c.coeffs.l_inf / len - 1.0).abs() < 5e-3;
        let k_ok = (c.coeffs.k_inf - bend).abs() <= (0.1 * bend).max(1e-6);
        solved_ok &= l_ok && k_ok;
        detail.push(format!(
            "{}: L_inf {:.6}/{:.6}, K_inf {:.4}/{:.4}",
            c.name, c.coeffs.l_inf, len, c.coeffs.k_inf, bend
        ));
    }
    record(line(
        3,
        disk_ok && solved_ok,
        format!(
            "disk ({:.2e}, {:.2e}, {:.2e}); {}",
            dc.l_inf - 2.0 * PI,
            dc.k_inf,
            dc.a_inf + 2.0 * PI,
            detail.join("; ")
        ),
    ));

    // 4. isoperimetric margins
    let disk_margin = isoperimetric_margins(&disk).iter().fold(0.0f64, |a, m| a.max(m.abs()));
    let least = [&gc, &f2]
        .iter()
        .flat_map(|c| isoperimetric_margins(&c.series))
        .fold(f64::INFINITY, f64::min);
    record(line(
        4,
        disk_margin < 1e-12 && least >= -ISOPERIMETRIC_TOL,
        format!("disk |margin| {disk_margin:.2e}, smallest solved margin {least:.3e}"),
    ));

    // 6 needs more solves; they also feed the area comparison of 5
    let t = Instant::now();
    let fine = solve_plateau_with(&f2.curve, S, &mesh.refined(), &SolveOptions::default()).unwrap().surface;
    let fine_res = mean_curvature_residual(&fine).unwrap();
    let refine_time = t.elapsed();
    let mut xperp = Vec::new();
    let mut extra = Vec::new();
    for s in [0.99, 0.999] {
        let m = solve_plateau_with(&f2.curve, s, &mesh, &SolveOptions::default()).unwrap().surface;
        xperp.push(boundary_normal_component(&m));
        extra.push(m);
    }
    xperp.push(boundary_normal_component(&f2.surface));
    let f3 = run_case("fourier(0.1,3)", make_curve(CurveKind::Fourier { eps: 0.1, mode: 3 }, SAMPLES).unwrap(), &mesh);
    let a = MobiusParam::new(Vector3::new(0.3, 0.0, 0.0)).unwrap();
    let moved = run_case("translated", f2.curve.mobius_image(&a).unwrap(), &mesh);

    // 5. cones
    let mut identity = 0.0f64;
    for theta in [0.5, 1.0, 1.7, 3.0] {
        for rho in [0.1, 1.0, 4.0, 9.0] {
            let cd = ConeData::new(2.0 * PI * theta * f64::sinh(rho), rho).unwrap();
            let (l, a) = cone_profile(&cd, rho).unwrap();
            identity = identity
                .max(cone_identity_residual(theta, l, a).abs() / (l * l))
                .max(cone_length_identity_residual(rho, l, a).abs() / (l * l));
        }
    }
    let mut cone_area_err = 0.0f64;
    let mut comparison = f64::INFINITY;
    let surfaces: Vec<&TriangulatedSurface> =
        [&gc.surface, &f2.surface, &f3.surface, &moved.surface, &fine].into_iter().chain(extra.iter()).collect();
    for m in &surfaces {
        let cd = ConeData::of_surface(m).unwrap();
        let cone_area = discrete_cone(m).unwrap().hyperbolic_area();
        let closed = cone_profile(&cd, cd.r).unwrap().1;
        cone_area_err = cone_area_err.max((cone_area / closed - 1.0).abs());
        comparison = comparison.min((cone_area - m.hyperbolic_area()) / cone_area);
    }
    record(line(
        5,
        identity < 1e-12 && cone_area_err < 5e-3 && comparison >= -1e-9,
        format!(
            "identity residual {identity:.2e}, cone area error {cone_area_err:.2e}, \
             min (cone - surface)/cone {comparison:.2e} over {} surfaces",
            surfaces.len()
        ),
    ));

    // 6. claims
    let res = f2.meas.h_residual;
    let decays = xperp.windows(2).all(|w| w[1] < w[0]);
    let c4 = truncation_length_fit(&f2.series).unwrap();
    let c5 = radial_ratio_fit(&f2.series).unwrap();
    let c4_ok = (c4.quadratic / (-0.5 * f2.coeffs.k_inf) - 1.0).abs() < 0.15;
    let c5_ok = c5.quadratic.abs() <= 2.0 * c5.quadratic_error;
    record(line(
        6,
        res < 1e-3 && fine_res <= 0.5 * res && decays && c4_ok && c5_ok,
        format!(
            "residual {res:.2e} -> {fine_res:.2e} ({refine_time:.1?}), x_perp [{}], \
             quadratic {:.4} vs -K_inf/2 {:.4}, radial ratio quadratic {:.4} +/- {:.4}",
            xperp.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(", "),
            c4.quadratic,
            -0.5 * f2.coeffs.k_inf,
            c5.quadratic,
            c5.quadratic_error
        ),
    ));

    // 7. entropy
    let mut worst = ((2.0 * PI * gc_lh) / gc.lambda.lambda_c - 1.0).abs();
    let mut parts = vec![format!("great circle {gc_lh:.6}")];
    for c in [&f2, &f3] {
        let (lh, time) = entropy_ratio(c);
        worst = worst.max((2.0 * PI * lh / c.lambda.lambda_c - 1.0).abs());
        parts.push(format!("{} 2 pi lambda_H {:.6} vs lambda_c {:.6} ({time:.1?})", c.name, 2.0 * PI * lh, c.lambda.lambda_c));
    }
    let eval = HeatKernelEvaluator::default();
    let mut norm = 0.0f64;
    for t in [0.05, 0.3, 1.0, 5.0, 20.0] {
        norm = norm.max((RadialKernelTable::new(&eval, t).unwrap().normalization() - 1.0).abs());
    }
    record(line(
        7,
        worst < 0.02 && norm < 1e-6,
        format!("worst relative gap {worst:.2e}; {}; kernel normalization error {norm:.2e}", parts.join("; ")),
    ));

    // 8. independence of the base point
    let shift = (moved.coeffs.a_inf - f2.coeffs.a_inf).abs();
    let a_err = f2.coeffs.a_inf_error.hypot(moved.coeffs.a_inf_error);
    let l_shift = (moved.coeffs.l_inf - f2.coeffs.l_inf).abs();
    let l_err = f2.coeffs.l_inf_error.hypot(moved.coeffs.l_inf_error);
    record(line(
        8,
        shift < 2.0 * a_err && l_shift > 5.0 * l_err,
        format!("A_inf shift {shift:.2e} vs 2 x error {:.2e}; L_inf shift {l_shift:.2e} vs 5 x error {:.2e}", 2.0 * a_err, 5.0 * l_err),
    ));

    // 9. radius conversions
    let mut cosh_err = 0.0f64;
    let mut trip = 0.0f64;
    for r in [0.01, 0.5, 1.0, 3.0, 7.6, 9.9, 15.0] {
        let t = RadiusTriple::from_r(r).unwrap();
        cosh_err = cosh_err.max((t.cosh_r() / r.cosh() - 1.0).abs());
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        trip = trip.max(rel(radius_convert(Radius::BoundaryDefining(t.eps)).unwrap().r, r));
        let from_s = RadiusTriple::from_s(t.s).unwrap();
        trip = trip.max(rel(radius_convert(Radius::Hyperbolic(from_s.r)).unwrap().s, t.s));
        let from_eps = RadiusTriple::from_eps(t.eps).unwrap();
        trip = trip.max(rel(radius_convert(Radius::Hyperbolic(from_eps.r)).unwrap().eps, t.eps));
    }
    record(line(9, cosh_err < 1e-12 && trip < 1e-12, format!("cosh R error {cosh_err:.1e}, round trip {trip:.1e}")));

    let failed: Vec<&str> = lines.iter().filter(|l| !l.pass).map(|l| l.text.as_str()).collect();
    assert!(failed.is_empty(), "failed:\n{}", failed.join("\n"));
}
