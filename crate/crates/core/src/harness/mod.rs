//! Pipeline orchestration behind the `renarea` binary: curve, conformal
//! length, solved surface, truncation series, fits, cones, entropy and the
//! verification report.

mod config;

pub use config::{CurveChoice, ExperimentConfig, CHECK_NAMES, KEYS};

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{
    calibration_divergence, cone_identity_residual, cone_length_identity_residual, cone_profile, discrete_cone,
    ConeData,
};
use crate::conformal::{conformal_length, sampling_error, ConformalLengthResult};
use crate::curvature::{boundary_normal_component, boundary_radial_curvature, measure, SurfaceMeasurements};
use crate::curves::{curve_length, sample_curvatures, spherical_geodesic_curvature, BoundaryCurve};
use crate::entropy::{hyperbolic_entropy_with, EntropyOptions, EntropyResult};
use crate::error::{Error, Result};
use crate::mesh::TriangulatedSurface;
use crate::renormalized::{
    check_isoperimetric, check_main_theorem, fit_expansion, gauss_equation_check, isoperimetric_margins,
    radial_ratio_fit, renormalized_area_gauss_bonnet, series_from_surface, truncation_length_fit, BoundaryExpansionFit,
    Check, ExpansionCoefficients, TheoremInputs, TheoremTolerances, TruncationSeries, VerificationReport,
};
use crate::surface::{solve_plateau_with, PlateauSolution, SolveOptions, S_RANGE};

/// Fewest truncation radii for which the expansion is fitted.
pub const MIN_SCHEDULE: usize = 3;

/// Relative slack of the area comparison with the cone. The two areas agree
/// to round-off on a geodesic disk.
pub const CONE_AREA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Too few admissible truncation radii to fit the expansion.
    Inconclusive,
}

/// Process exit code for a module error: usage errors are 2, numerical ones 3.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) | Error::Parse(_) | Error::Io(_) => 2,
        _ => 3,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub curve_length: f64,
    pub k_inf_direct: f64,
    pub vertices: usize,
    pub solver_iterations: usize,
    pub gauss_equation_deviation: f64,
    /// Relative L² error of `A(x̂, x̂)` against the curve's geodesic curvature.
    pub boundary_curvature_error: f64,
    /// `(s, max |x^⊥|)` next to the boundary, for increasing `s`.
    pub boundary_normal: Vec<(f64, f64)>,
    pub isoperimetric_margins: Vec<f64>,
    pub truncation_length_fit: Option<BoundaryExpansionFit>,
    pub radial_ratio_fit: Option<BoundaryExpansionFit>,
    pub cone_area: Option<f64>,
    pub cone_area_closed_form: Option<f64>,
    pub refined_residual: Option<f64>,
}

/// Everything `verify` computes.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub status: Status,
    pub config: ExperimentConfig,
    pub report: VerificationReport,
    pub lambda_c: ConformalLengthResult,
    pub measurements: SurfaceMeasurements,
    pub coefficients: Option<ExpansionCoefficients>,
    pub a_inf_gauss_bonnet: f64,
    pub entropy: Option<EntropyResult>,
    pub diagnostics: Diagnostics,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub surface: TriangulatedSurface,
    #[serde(skip)]
    pub cone: Option<TriangulatedSurface>,
    #[serde(skip)]
    pub series: Option<TruncationSeries>,
}

impl VerifyOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass | Status::Inconclusive => 0,
            Status::Fail => 1,
        }
    }
}

fn solve(c: &BoundaryCurve, s: f64, cfg: &ExperimentConfig, mesh: &crate::surface::MeshParams) -> Result<PlateauSolution> {
    let opts = SolveOptions {
        rel_tol: cfg.rel_tol,
        perturbation: cfg.perturbation,
        seed: cfg.seed,
        ..Default::default()
    };
    solve_plateau_with(c, s, mesh, &opts)
}

fn boundary_curvature_error(m: &TriangulatedSurface) -> Result<f64> {
    let a = boundary_radial_curvature(m, 6)?;
    let dirs = m.boundary_loop().iter().map(|&i| m.vertices()[i].normalize());
    let k = sample_curvatures(&BoundaryCurve::from_directions(dirs)?)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (a, k) in a.iter().zip(&k) {
        num += (a - k).norm_squared();
        den += k.norm_squared();
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

/// Cone identities at three radii, relative to `L²`, plus the calibration
/// divergence on a small grid.
fn cone_identity_checks(cd: &ConeData) -> Result<VerificationReport> {
    let mut r = VerificationReport::default();
    for rho in [0.25 * cd.r, 0.5 * cd.r, cd.r] {
        let (l, a) = cone_profile(cd, rho)?;
        let scale = (l * l).max(1.0);
        r.push(Check::close(
            format!("cone identity L^2 = 4 pi Theta A + A^2 at rho={rho:.4}"),
            cone_identity_residual(cd.theta, l, a) / scale,
            0.0,
            1e-12,
        ));
        r.push(Check::close(
            format!("cone identity L^2 = 2LA/sinh rho + A^2 at rho={rho:.4}"),
            cone_length_identity_residual(rho, l, a) / scale,
            0.0,
            1e-12,
        ));
    }
    let mut least = f64::INFINITY;
    for i in 1..=20 {
        for j in 0..=10 {
            least = least.min(calibration_divergence(0.25 * i as f64, 0.1 * j as f64)?);
        }
    }
    r.push(Check::at_least("calibration divergence >= 1", least, 1.0, least - 1.0, 1e-12));
    Ok(r)
}

/// Runs the full pipeline for one configuration.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyOutcome> {
    cfg.validate()?;
    let curve = cfg.curve()?;
    let mut notes = Vec::new();
    let lambda_c = conformal_length(&curve)?;
    let lambda_c_error = sampling_error(&curve, &lambda_c.argmax(), lambda_c.family)?;
    let geometry = spherical_geodesic_curvature(&curve)?;
    let length = curve_length(&curve)?;
    let sol = solve(&curve, cfg.max_s, cfg, &cfg.mesh)?;
    let m = sol.surface;
    let meas = measure(&m)?;
    let a_gb = renormalized_area_gauss_bonnet(&meas)?;
    let schedule = cfg.truncation_schedule();
    let series = if schedule.len() >= MIN_SCHEDULE {
        Some(series_from_surface(&m, &schedule)?)
    } else {
        notes.push(format!(
            "only {} truncation radii fit inside max-s = {}; the expansion is not fitted and the \
             area-dependent checks are skipped",
            schedule.len(),
            cfg.max_s
        ));
        None
    };
    let coefficients = series.as_ref().map(fit_expansion).transpose()?;
    let mut report = VerificationReport::default();
    let tolerances = TheoremTolerances {
        chain_factor: cfg.chain_factor,
        rigidity: cfg.rigidity_tol,
    };

    if cfg.enabled("theorem") {
        match &coefficients {
            Some(c) => {
                let mut inp = TheoremInputs::new(&lambda_c, c);
                inp.lambda_c_error = lambda_c_error;
                inp.bending_energy = Some(meas.bending_energy);
                report.extend(check_main_theorem(&inp, &tolerances));
            }
            None => report.push(Check::at_least(
                "-2pi >= -lambda_c",
                -2.0 * PI,
                -lambda_c.lambda_c,
                lambda_c.lambda_c - 2.0 * PI,
                (cfg.chain_factor * lambda_c_error).max(1e-12),
            )),
        }
    }
    if let (true, Some(c)) = (cfg.enabled("gauss-bonnet"), &coefficients) {
        let tol = (cfg.two_route_tol * c.a_inf.abs()).max(2.0 * c.a_inf_error);
        report.push(Check::close("A_inf fit vs Gauss-Bonnet", c.a_inf, a_gb, tol));
    }
    let mut iso = Vec::new();
    if let Some(t) = &series {
        iso = isoperimetric_margins(t);
        if cfg.enabled("isoperimetric") {
            report.extend(check_isoperimetric(t, cfg.iso_tol));
        }
    }

    let (mut cone, mut cone_area, mut cone_closed) = (None, None, None);
    if cfg.enabled("cones") {
        let cd = ConeData::of_surface(&m)?;
        report.extend(cone_identity_checks(&cd)?);
        let dc = discrete_cone(&m)?;
        let (area, closed) = (dc.hyperbolic_area(), cone_profile(&cd, cd.r)?.1);
        report.push(Check::close("discrete cone area vs closed form", area / closed, 1.0, 5e-3));
        let surface_area = m.hyperbolic_area();
        report.push(Check::at_least(
            "area(surface) <= area(cone)",
            area,
            surface_area,
            area - surface_area,
            CONE_AREA_TOL * area,
        ));
        cone = Some(dc);
        cone_area = Some(area);
        cone_closed = Some(closed);
    }

    let mut boundary_normal = Vec::new();
    let (mut claim4, mut claim5, mut refined_residual) = (None, None, None);
    if cfg.enabled("claims") {
        report.push(Check::below("mean curvature residual", meas.h_residual, cfg.residual_tol));
        for k in [100.0, 10.0] {
            let s = 1.0 - k * (1.0 - cfg.max_s);
            if s >= S_RANGE.0 {
                let coarse = solve(&curve, s, cfg, &cfg.mesh)?;
                boundary_normal.push((s, boundary_normal_component(&coarse.surface)));
            }
        }
        boundary_normal.push((cfg.max_s, boundary_normal_component(&m)));
        if boundary_normal.len() >= 2 {
            // identically zero on totally geodesic surfaces
            let decays = boundary_normal.windows(2).all(|w| w[1].1 < w[0].1 || w[1].1 < 1e-12);
            let last = boundary_normal[boundary_normal.len() - 1].1;
            let first = boundary_normal[0].1;
            let mut c = Check::below("boundary x^perp decays with s", last, first);
            c.pass = decays;
            report.push(c);
        }
        if let (Some(t), Some(c)) = (&series, &coefficients) {
            report.push(Check::close("L_inf vs curve length", c.l_inf, length, 5e-3 * length));
            report.push(Check::close(
                "K_inf fit vs direct integral",
                c.k_inf,
                geometry.k_infinity,
                (0.1 * geometry.k_infinity).max(1e-6),
            ));
            let f4 = truncation_length_fit(t)?;
            let target = -0.5 * geometry.k_infinity;
            report.push(Check::close(
                "truncation length quadratic = -K_inf/2",
                f4.quadratic,
                target,
                (0.15 * target.abs()).max(2.0 * f4.quadratic_error),
            ));
            let f5 = radial_ratio_fit(t)?;
            report.push(Check::close(
                "radial ratio quadratic = 0",
                f5.quadratic,
                0.0,
                (2.0 * f5.quadratic_error).max(1e-9),
            ));
            claim4 = Some(f4);
            claim5 = Some(f5);
        }
    }
    if cfg.enabled("refinement") {
        let fine = solve(&curve, cfg.max_s, cfg, &cfg.mesh.refined())?;
        let r = crate::curvature::mean_curvature_residual(&fine.surface)?;
        report.push(Check::below("residual halves under refinement", r, 0.5 * meas.h_residual));
        refined_residual = Some(r);
    }

    let mut entropy = None;
    if cfg.enabled("entropy") {
        let opts = EntropyOptions {
            seeds: vec![lambda_c.argmax_ball_point()],
            ..Default::default()
        };
        let e = hyperbolic_entropy_with(&m, &opts)?;
        report.push(Check::close(
            "2 pi lambda_H / lambda_c",
            2.0 * PI * e.lambda_h / lambda_c.lambda_c,
            1.0,
            cfg.entropy_tol,
        ));
        if e.tau_at_bound {
            notes.push(format!(
                "lambda_H is attained at the end of the tau range (tau = {:.3}); {:.1}% of it comes from the \
                 modelled end beyond the mesh",
                e.argmax_tau,
                100.0 * e.tail_fraction
            ));
        }
        entropy = Some(e);
    }

    let diagnostics = Diagnostics {
        curve_length: length,
        k_inf_direct: geometry.k_infinity,
        vertices: m.vertices().len(),
        solver_iterations: sol.iterations,
        gauss_equation_deviation: gauss_equation_check(&m)?,
        boundary_curvature_error: boundary_curvature_error(&m)?,
        boundary_normal,
        isoperimetric_margins: iso,
        truncation_length_fit: claim4,
        radial_ratio_fit: claim5,
        cone_area,
        cone_area_closed_form: cone_closed,
        refined_residual,
    };
    let status = if !report.passed() {
        Status::Fail
    } else if coefficients.is_none() {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(VerifyOutcome {
        status,
        config: cfg.clone(),
        report,
        lambda_c,
        measurements: meas,
        coefficients,
        a_inf_gauss_bonnet: a_gb,
        entropy,
        diagnostics,
        notes,
        surface: m,
        cone,
        series,
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Writes `report.json`, `coefficients.json`, `series.csv` and the meshes.
pub fn write_verify(o: &VerifyOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), to_json(o))?;
    #[derive(Serialize)]
    struct Coefficients<'a> {
        fit: &'a Option<ExpansionCoefficients>,
        a_inf_gauss_bonnet: f64,
        lambda_c: f64,
        curve_length: f64,
        k_inf_direct: f64,
    }
    let coeffs = Coefficients {
        fit: &o.coefficients,
        a_inf_gauss_bonnet: o.a_inf_gauss_bonnet,
        lambda_c: o.lambda_c.lambda_c,
        curve_length: o.diagnostics.curve_length,
        k_inf_direct: o.diagnostics.k_inf_direct,
    };
    std::fs::write(dir.join("coefficients.json"), to_json(&coeffs))?;
    if let Some(t) = &o.series {
        t.write_csv(&dir.join("series.csv"))?;
    }
    o.surface.write_off(&dir.join("surface.off"))?;
    if let Some(c) = &o.cone {
        c.write_off(&dir.join("cone.off"))?;
    }
    Ok(())
}

/// `report.json` body for a run that stopped with an error.
pub fn error_report(cfg: &ExperimentConfig, err: &Error) -> String {
    #[derive(Serialize)]
    struct Failed<'a> {
        status: &'static str,
        config: &'a ExperimentConfig,
        error: ErrorBody,
    }
    #[derive(Serialize)]
    struct ErrorBody {
        kind: &'static str,
        message: String,
        exit_code: i32,
    }
    let kind = match err {
        Error::Domain(_) => "domain",
        Error::Degenerate(_) => "degenerate",
        Error::Parameter(_) => "parameter",
        Error::NoConvergence { .. } => "no-convergence",
        Error::IllConditioned(_) => "ill-conditioned",
        Error::Io(_) => "io",
        Error::Parse(_) => "parse",
    };
    to_json(&Failed {
        status: "error",
        config: cfg,
        error: ErrorBody {
            kind,
            message: err.to_string(),
            exit_code: exit_code(err),
        },
    })
}

/// One row of a sweep over the Fourier amplitude.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub lambda_c: f64,
    pub a_inf_fit: f64,
    pub a_inf_error: f64,
    pub a_inf_gauss_bonnet: f64,
    pub k_inf: f64,
    pub lambda_h: f64,
    /// `λ_c − 2π`.
    pub conformal_margin: f64,
    /// `−λ_c − A∞`.
    pub area_margin: f64,
    pub min_isoperimetric_margin: f64,
    pub status: String,
    pub error: String,
}

/// Runs `verify` for each value of `eps-values` on the Fourier family,
/// rows in parallel. Failed rows are recorded, not fatal.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if cfg.eps_values.is_empty() {
        return Err(Error::Parameter("eps-values is empty".into()));
    }
    let rows = cfg
        .eps_values
        .par_iter()
        .map(|&eps| {
            let mut c = cfg.clone();
            c.curve = CurveChoice::Fourier;
            c.eps = eps;
            let nan = f64::NAN;
            let mut row = SweepRow {
                eps,
                lambda_c: nan,
                a_inf_fit: nan,
                a_inf_error: nan,
                a_inf_gauss_bonnet: nan,
                k_inf: nan,
                lambda_h: nan,
                conformal_margin: nan,
                area_margin: nan,
                min_isoperimetric_margin: nan,
                status: String::new(),
                error: String::new(),
            };
            match run_verify(&c) {
                Ok(o) => {
                    row.lambda_c = o.lambda_c.lambda_c;
                    row.a_inf_gauss_bonnet = o.a_inf_gauss_bonnet;
                    row.conformal_margin = o.lambda_c.lambda_c - 2.0 * PI;
                    if let Some(k) = &o.coefficients {
                        row.a_inf_fit = k.a_inf;
                        row.a_inf_error = k.a_inf_error;
                        row.k_inf = k.k_inf;
                        row.area_margin = -o.lambda_c.lambda_c - k.a_inf;
                    }
                    if let Some(e) = &o.entropy {
                        row.lambda_h = e.lambda_h;
                    }
                    row.min_isoperimetric_margin =
                        o.diagnostics.isoperimetric_margins.iter().copied().fold(nan, f64::min);
                    row.status = format!("{:?}", o.status).to_lowercase();
                }
                Err(e) => {
                    row.status = "error".into();
                    row.error = e.to_string();
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

/// CSV of sweep rows, one line per amplitude.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(
        "eps,lambda_c,a_inf_fit,a_inf_error,a_inf_gauss_bonnet,k_inf,lambda_h,conformal_margin,area_margin,\
         min_isoperimetric_margin,status,error\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.12e},{:.12e},{:.6e},{:.12e},{:.12e},{:.12e},{:.6e},{:.6e},{:.6e},{},\"{}\"",
            r.eps,
            r.lambda_c,
            r.a_inf_fit,
            r.a_inf_error,
            r.a_inf_gauss_bonnet,
            r.k_inf,
            r.lambda_h,
            r.conformal_margin,
            r.area_margin,
            r.min_isoperimetric_margin,
            r.status,
            r.error.replace('"', "'")
        );
    }
    s
}

/// Whether the area margins of the successful rows increase with `eps`.
pub fn sweep_margins_increase(rows: &[SweepRow]) -> bool {
    let mut ok: Vec<&SweepRow> = rows.iter().filter(|r| r.area_margin.is_finite()).collect();
    ok.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    ok.windows(2).all(|w| w[1].area_margin >= w[0].area_margin)
}

/// `λ_c` of the configured curve with the check `λ_c ≥ 2π`.
pub fn run_lambda_c(cfg: &ExperimentConfig) -> Result<(ConformalLengthResult, VerificationReport)> {
    cfg.validate()?;
    let curve = cfg.curve()?;
    let lc = conformal_length(&curve)?;
    let err = sampling_error(&curve, &lc.argmax(), lc.family)?;
    let mut r = VerificationReport::default();
    r.push(Check::at_least(
        "lambda_c >= 2pi",
        lc.lambda_c,
        2.0 * PI,
        lc.lambda_c - 2.0 * PI,
        (cfg.chain_factor * err).max(1e-12),
    ));
    Ok((lc, r))
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyOutcome {
    pub entropy: EntropyResult,
    pub lambda_c: f64,
    pub report: VerificationReport,
}

/// `λ_H` of the solved surface, compared with `λ_c / 2π`.
pub fn run_entropy(cfg: &ExperimentConfig) -> Result<EntropyOutcome> {
    cfg.validate()?;
    let curve = cfg.curve()?;
    let lc = conformal_length(&curve)?;
    let m = solve(&curve, cfg.max_s, cfg, &cfg.mesh)?.surface;
    let opts = EntropyOptions {
        seeds: vec![lc.argmax_ball_point()],
        ..Default::default()
    };
    let e = hyperbolic_entropy_with(&m, &opts)?;
    let mut r = VerificationReport::default();
    r.push(Check::close("2 pi lambda_H / lambda_c", 2.0 * PI * e.lambda_h / lc.lambda_c, 1.0, cfg.entropy_tol));
    Ok(EntropyOutcome {
        entropy: e,
        lambda_c: lc.lambda_c,
        report: r,
    })
}

/// Closed-form cone identities for density `theta` at radius `rho`, and the
/// calibration divergence bound.
pub fn run_cone_check(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    if !(cfg.theta > 0.0) {
        return Err(Error::Parameter(format!("cone density {} must be positive", cfg.theta)));
    }
    let cd = ConeData::new(2.0 * PI * cfg.theta * cfg.rho.sinh(), cfg.rho)?;
    cone_identity_checks(&cd)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub measurements: SurfaceMeasurements,
    pub iterations: usize,
    pub energy: f64,
    pub gradient_norm: f64,
    pub vertices: usize,
    #[serde(skip)]
    pub surface: TriangulatedSurface,
    #[serde(skip)]
    pub series: Option<TruncationSeries>,
}

/// Solves the configured Plateau problem and samples its truncation series.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let sol = solve(&cfg.curve()?, cfg.max_s, cfg, &cfg.mesh)?;
    let schedule = cfg.truncation_schedule();
    let series = if schedule.is_empty() {
        None
    } else {
        Some(series_from_surface(&sol.surface, &schedule)?)
    };
    Ok(SolveOutcome {
        measurements: measure(&sol.surface)?,
        iterations: sol.iterations,
        energy: sol.energy,
        gradient_norm: sol.gradient_norm,
        vertices: sol.surface.vertices().len(),
        surface: sol.surface,
        series,
    })
}

/// Writes a serializable value as pretty JSON.
pub fn write_json<T: Serialize>(v: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, to_json(v))?;
    Ok(())
}
