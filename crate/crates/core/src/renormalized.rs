//! Renormalized area from truncation series.
//!
//! A truncation series samples one solved surface at several centred spheres.
//! The hyperbolic boundary length and area satisfy
//! `L_R = L∞ sinh R − K∞ e^{−R} + o(e^{−R})` and
//! `A_R = L∞ cosh R + A∞ + o(1)`, and the renormalized area `A∞` is also the
//! limit of `A_R − L_R`. The Gauss–Bonnet route gives it independently as
//! `−2πχ − ½∫|A|²`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conformal::ConformalLengthResult;
use crate::curvature::{hyperbolic_gauss_curvature, mean_curvature_residuals, traceless_curvature, SurfaceMeasurements};
use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::hyperbolic::RadiusTriple;
use crate::mesh::TriangulatedSurface;

/// Truncation radii used when none are given.
pub const DEFAULT_SCHEDULE: [f64; 5] = [0.95, 0.98, 0.99, 0.995, 0.999];

/// Largest condition number accepted for a column-scaled design matrix.
pub const MAX_CONDITION: f64 = 1e10;

/// One truncation of a surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub s: f64,
    pub r: f64,
    pub l_r: f64,
    pub a_r: f64,
    pub bending_energy: f64,
    pub h_residual: f64,
    /// Euclidean length of the truncation curve, when measured on a mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euclidean_length: Option<f64>,
    /// `∫ |x| / |x^⊤| dl` over the truncation curve, when measured on a mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_ratio_integral: Option<f64>,
}

impl SeriesEntry {
    /// Entry carrying only `s`, `L_R` and `A_R`.
    pub fn new(s: f64, l_r: f64, a_r: f64) -> Result<Self> {
        Ok(Self {
            s,
            r: RadiusTriple::from_s(s)?.r,
            l_r,
            a_r,
            bending_energy: 0.0,
            h_residual: 0.0,
            euclidean_length: None,
            radial_ratio_integral: None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TruncationSeries {
    entries: Vec<SeriesEntry>,
    curve: Option<BoundaryCurve>,
}

impl TruncationSeries {
    pub fn new(entries: Vec<SeriesEntry>, curve: Option<BoundaryCurve>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Parameter("empty truncation series".into()));
        }
        for w in entries.windows(2) {
            if !(w[1].s > w[0].s) {
                return Err(Error::Parameter("truncation radii must increase strictly".into()));
            }
        }
        for e in &entries {
            let r = RadiusTriple::from_s(e.s)?.r;
            if (r - e.r).abs() > 1e-9 * r.max(1.0) {
                return Err(Error::Parameter(format!("R = {} does not match s = {}", e.r, e.s)));
            }
            if !(e.l_r > 0.0 && e.a_r > 0.0) {
                return Err(Error::Parameter(format!("non-positive L_R or A_R at s = {}", e.s)));
            }
        }
        Ok(Self { entries, curve })
    }

    /// Series of exact values `(L_R, A_R) = f(R)` on the given radii.
    pub fn from_fn(schedule: &[f64], f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let entries = schedule
            .iter()
            .map(|&s| {
                let r = RadiusTriple::from_s(s)?.r;
                let (l, a) = f(r);
                SeriesEntry::new(s, l, a)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries, None)
    }

    pub fn entries(&self) -> &[SeriesEntry] {
        &self.entries
    }

    pub fn curve(&self) -> Option<&BoundaryCurve> {
        self.curve.as_ref()
    }

    /// CSV with header `s,R,L_R,A_R,bending,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,R,L_R,A_R,bending,residual\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                e.s, e.r, e.l_r, e.a_r, e.bending_energy, e.h_residual
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Samples a solved surface at the radii of `schedule`, all below the
/// surface's own truncation radius.
pub fn series_from_surface(m: &TriangulatedSurface, schedule: &[f64]) -> Result<TruncationSeries> {
    let residuals = mean_curvature_residuals(m);
    let a2 = traceless_curvature(m)?;
    let entries = schedule
        .iter()
        .map(|&s| {
            if !(s < m.s()) {
                return Err(Error::Parameter(format!(
                    "truncation radius {s} not below the surface radius {}",
                    m.s()
                )));
            }
            let ls = m.level_set(s)?;
            let h = m
                .vertices()
                .iter()
                .zip(&residuals)
                .filter(|(v, _)| v.norm() <= s)
                .fold(0.0f64, |a, (_, r)| a.max(r.abs()));
            Ok(SeriesEntry {
                s,
                r: RadiusTriple::from_s(s)?.r,
                l_r: ls.hyperbolic_length,
                a_r: ls.area,
                bending_energy: bending_within(m, &a2, s),
                h_residual: h,
                euclidean_length: Some(ls.euclidean_length),
                radial_ratio_integral: Some(ls.radial_ratio_integral),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TruncationSeries::new(entries, m.source_curve().cloned())
}

fn bending_within(m: &TriangulatedSurface, a2: &[f64], s: f64) -> f64 {
    let areas = m.mixed_areas();
    m.vertices()
        .iter()
        .zip(a2.iter().zip(&areas))
        .filter(|(v, _)| v.norm() <= s)
        .map(|(_, (k, a))| k * a)
        .sum()
}

/// Ordinary least squares with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Standard errors; zero when there are no residual degrees of freedom.
    pub standard_errors: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Solves `min |X β − y|` after scaling the columns of `X` to unit norm;
/// fails when the scaled design has condition number above [`MAX_CONDITION`].
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let n = rows.len();
    let p = rows.first().map_or(0, |r| r.len());
    if n < p || p == 0 || y.len() != n {
        return Err(Error::IllConditioned(format!("{n} observations for {p} coefficients")));
    }
    let mut x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let scale: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::IllConditioned("zero column in the design matrix".into()));
    }
    for (j, s) in scale.iter().enumerate() {
        x.column_mut(j).unscale_mut(*s);
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(Error::IllConditioned(format!(
            "design matrix condition number {:e}; truncation radii too clustered",
            smax / smin
        )));
    }
    let yv = DVector::from_column_slice(y);
    let beta = svd
        .solve(&yv, 0.0)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let res = &yv - &x * &beta;
    let dof = n - p;
    let sigma2 = if dof > 0 { res.norm_squared() / dof as f64 } else { 0.0 };
    let xtx_inv = (x.transpose() * &x)
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("singular normal equations".into()))?;
    Ok(LinearFit {
        coefficients: (0..p).map(|j| beta[j] / scale[j]).collect(),
        standard_errors: (0..p).map(|j| (sigma2 * xtx_inv[(j, j)]).max(0.0).sqrt() / scale[j]).collect(),
        residuals: res.iter().copied().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// `A∞` is the intercept of `A_R − L∞ cosh R` regressed on `e^{−R}`.
    Regression,
    /// `A∞` is `A_R − L_R` extrapolated linearly in `e^{−R}` to `R = ∞`.
    Difference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    pub l_inf: f64,
    pub k_inf: f64,
    /// Renormalized area by `method`.
    pub a_inf: f64,
    pub a_inf_regression: f64,
    pub a_inf_difference: f64,
    pub l_inf_error: f64,
    pub k_inf_error: f64,
    pub a_inf_error: f64,
    /// `(L_R − L∞ sinh R + K∞ e^{−R} − …) / sinh R` per entry.
    pub fit_residuals: Vec<f64>,
    pub method: FitMethod,
}

struct RawFit {
    l: LinearFit,
    a_reg: LinearFit,
    a_diff: LinearFit,
}

fn raw_fit(entries: &[SeriesEntry]) -> Result<RawFit> {
    let cubic = entries.len() >= 4;
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for e in entries {
        let (sh, em) = (e.r.sinh(), (-e.r).exp());
        let mut row = vec![1.0, -em / sh];
        if cubic {
            row.push(em * em / sh);
        }
        rows.push(row);
        y.push(e.l_r / sh);
    }
    let l = least_squares(&rows, &y)?;
    let l_inf = l.coefficients[0];
    let rows2: Vec<Vec<f64>> = entries.iter().map(|e| vec![1.0, (-e.r).exp()]).collect();
    let y_reg: Vec<f64> = entries.iter().map(|e| e.a_r - l_inf * e.r.cosh()).collect();
    let y_diff: Vec<f64> = entries.iter().map(|e| e.a_r - e.l_r).collect();
    Ok(RawFit {
        l,
        a_reg: least_squares(&rows2, &y_reg)?,
        a_diff: least_squares(&rows2, &y_diff)?,
    })
}

/// Fits the expansion with `A∞` from the regression estimator.
pub fn fit_expansion(t: &TruncationSeries) -> Result<ExpansionCoefficients> {
    fit_expansion_with(t, FitMethod::Regression)
}

/// Fits `L_R / sinh R` on `(1, −e^{−R}/sinh R, e^{−2R}/sinh R)` (the last
/// column only with four or more entries) and both `A∞` estimators.
///
/// Error bars are the larger of the least-squares standard error and the
/// change when the smallest-radius entry is dropped; the `A∞` error also
/// covers half the gap between the two estimators.
pub fn fit_expansion_with(t: &TruncationSeries, method: FitMethod) -> Result<ExpansionCoefficients> {
    let entries = t.entries();
    if entries.len() < 3 {
        return Err(Error::IllConditioned(format!("{} entries; at least 3 needed", entries.len())));
    }
    let full = raw_fit(entries)?;
    let dropped = if entries.len() >= 4 { Some(raw_fit(&entries[1..])?) } else { None };
    let pick = |f: &RawFit| match method {
        FitMethod::Regression => f.a_reg.coefficients[0],
        FitMethod::Difference => f.a_diff.coefficients[0],
    };
    let window = |a: f64, b: Option<f64>| b.map_or(0.0, |b| (a - b).abs());
    let l_inf = full.l.coefficients[0];
    let k_inf = full.l.coefficients[1];
    let a_reg = full.a_reg.coefficients[0];
    let a_diff = full.a_diff.coefficients[0];
    let a_inf = pick(&full);
    let se_a = match method {
        FitMethod::Regression => full.a_reg.standard_errors[0],
        FitMethod::Difference => full.a_diff.standard_errors[0],
    };
    let coeffs = ExpansionCoefficients {
        l_inf,
        k_inf,
        a_inf,
        a_inf_regression: a_reg,
        a_inf_difference: a_diff,
        l_inf_error: full.l.standard_errors[0].max(window(l_inf, dropped.as_ref().map(|d| d.l.coefficients[0]))),
        k_inf_error: full.l.standard_errors[1].max(window(k_inf, dropped.as_ref().map(|d| d.l.coefficients[1]))),
        a_inf_error: se_a
            .max(window(a_inf, dropped.as_ref().map(pick)))
            .max(0.5 * (a_reg - a_diff).abs()),
        fit_residuals: full.l.residuals.clone(),
        method,
    };
    if !(coeffs.l_inf > 0.0) {
        return Err(Error::Degenerate(format!("fitted L∞ = {} is not positive", coeffs.l_inf)));
    }
    Ok(coeffs)
}

/// `A(Σ) = −2πχ − ½ ∫|A|²`.
pub fn renormalized_area_gauss_bonnet(m: &SurfaceMeasurements) -> Result<f64> {
    if !m.bending_energy.is_finite() || m.bending_energy < 0.0 {
        return Err(Error::Parameter(format!("invalid bending energy {}", m.bending_energy)));
    }
    Ok(-2.0 * PI * m.euler_characteristic as f64 - 0.5 * m.bending_energy)
}

/// One inequality or identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `margin >= -tolerance`.
    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
        }
    }

    /// Passes when `|lhs − rhs| <= tolerance`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = (lhs - rhs).abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin <= tolerance,
        }
    }

    /// Passes when `lhs < rhs`; the margin is `rhs − lhs`.
    pub fn below(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            tolerance: 0.0,
            pass: lhs < rhs,
        }
    }
}

/// Which side of the rigidity dichotomy the data falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RigidityFlags {
    /// Both margins below the rigidity tolerance.
    pub equality_case: bool,
    /// `λ_c > 2π` beyond the chain tolerance.
    pub strict_conformal: bool,
    /// `−λ_c > A∞` beyond the chain tolerance.
    pub strict_area: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rigidity: Option<RigidityFlags>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        if other.rigidity.is_some() {
            self.rigidity = other.rigidity;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Relative tolerance of the isoperimetric check.
pub const ISOPERIMETRIC_TOL: f64 = 1e-6;

/// `(L_R² − 2 L_R A_R / sinh R − A_R²) / L_R²` per entry.
pub fn isoperimetric_margins(t: &TruncationSeries) -> Vec<f64> {
    t.entries()
        .iter()
        .map(|e| {
            let l = e.l_r;
            (l * l - 2.0 * l * e.a_r / e.r.sinh() - e.a_r * e.a_r) / (l * l)
        })
        .collect()
}

/// `L_R² ≥ 2 L_R A_R / sinh R + A_R²` at every entry, margins relative to `L_R²`.
pub fn check_isoperimetric(t: &TruncationSeries, tol: f64) -> VerificationReport {
    let mut report = VerificationReport::default();
    for (e, m) in t.entries().iter().zip(isoperimetric_margins(t)) {
        let l2 = e.l_r * e.l_r;
        report.push(Check::at_least(
            format!("isoperimetric s={}", e.s),
            l2,
            l2 * (1.0 - m),
            m,
            tol,
        ));
    }
    report
}

/// Inputs of the main inequality chain `−2π ≥ −λ_c ≥ A∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremInputs {
    pub lambda_c: f64,
    pub lambda_c_error: f64,
    pub a_inf: f64,
    pub a_inf_error: f64,
    pub k_inf: Option<f64>,
    pub bending_energy: Option<f64>,
}

impl TheoremInputs {
    pub fn new(lambda: &ConformalLengthResult, coeffs: &ExpansionCoefficients) -> Self {
        Self {
            lambda_c: lambda.lambda_c,
            lambda_c_error: 0.0,
            a_inf: coeffs.a_inf,
            a_inf_error: coeffs.a_inf_error,
            k_inf: Some(coeffs.k_inf),
            bending_energy: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremTolerances {
    /// Multiple of the combined error bar allowed as slack in each inequality.
    pub chain_factor: f64,
    /// Absolute scale below which a margin counts as equality.
    pub rigidity: f64,
}

impl Default for TheoremTolerances {
    fn default() -> Self {
        Self {
            chain_factor: 3.0,
            rigidity: 1e-2,
        }
    }
}

/// Checks `−2π ≥ −λ_c ≥ A∞` and classifies the rigidity branch. In the
/// equality case `K∞` and the bending energy must vanish too.
pub fn check_main_theorem(inp: &TheoremInputs, tol: &TheoremTolerances) -> VerificationReport {
    let combined = (inp.lambda_c_error.powi(2) + inp.a_inf_error.powi(2)).sqrt();
    let chain = tol.chain_factor * combined;
    let chain_left = tol.chain_factor * inp.lambda_c_error;
    let m1 = inp.lambda_c - 2.0 * PI;
    let m2 = -inp.lambda_c - inp.a_inf;
    let mut report = VerificationReport::default();
    report.push(Check::at_least("-2pi >= -lambda_c", -2.0 * PI, -inp.lambda_c, m1, chain_left.max(1e-12)));
    report.push(Check::at_least("-lambda_c >= A_inf", -inp.lambda_c, inp.a_inf, m2, chain));
    let equality = m1.abs() < tol.rigidity && m2.abs() < tol.rigidity;
    if equality {
        if let Some(k) = inp.k_inf {
            report.push(Check::below("rigidity K_inf", k.abs(), tol.rigidity));
        }
        if let Some(b) = inp.bending_energy {
            report.push(Check::below("rigidity bending", b, tol.rigidity));
        }
    }
    report.rigidity = Some(RigidityFlags {
        equality_case: equality,
        strict_conformal: m1 > chain_left.max(1e-12),
        strict_area: m2 > chain,
    });
    report
}

/// Residuals of the three expansions used in the proof of the main
/// inequality, per entry: `L_R² − (L∞² sinh²R − L∞K∞)`,
/// `2L_R A_R / sinh R − (2L∞² cosh R + 2L∞A∞)` and
/// `A_R² − (L∞² cosh²R + 2L∞A∞ cosh R + A∞²)`.
pub fn expansion_residuals(t: &TruncationSeries, c: &ExpansionCoefficients) -> Vec<[f64; 3]> {
    let (l, k, a) = (c.l_inf, c.k_inf, c.a_inf);
    t.entries()
        .iter()
        .map(|e| {
            let (sh, ch) = (e.r.sinh(), e.r.cosh());
            [
                e.l_r * e.l_r - (l * l * sh * sh - l * k),
                2.0 * e.l_r * e.a_r / sh - (2.0 * l * l * ch + 2.0 * l * a),
                e.a_r * e.a_r - (l * l * ch * ch + 2.0 * l * a * ch + a * a),
            ]
        })
        .collect()
}

/// Maximum over interior vertices of `|K + 1 + ½|A|²|`, with `K` the
/// hyperbolic angle-defect curvature and `|A|² = ((1 − |x|²)/2)² |Å_E|²`.
pub fn gauss_equation_check(m: &TriangulatedSurface) -> Result<f64> {
    let k = hyperbolic_gauss_curvature(m);
    let a2 = traceless_curvature(m)?;
    let dev = m
        .vertices()
        .iter()
        .zip(k.iter().zip(&a2))
        .filter(|(_, (k, _))| !k.is_nan())
        .map(|(x, (k, a))| {
            let q = 0.5 * (1.0 - x.norm_squared());
            (k + 1.0 + 0.5 * q * q * a).abs()
        })
        .fold(0.0f64, f64::max);
    if !dev.is_finite() {
        return Err(Error::Degenerate("Gauss curvature is not finite".into()));
    }
    Ok(dev)
}

/// Fit of a truncation-curve quantity `f(s) ≈ a s + b (1−s)² + c (1−s)³`.
/// The error of `b` is the larger of its standard error and its change when
/// the smallest `s` is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryExpansionFit {
    pub linear: f64,
    pub quadratic: f64,
    pub cubic: f64,
    pub quadratic_error: f64,
}

fn boundary_fit(points: &[(f64, f64)]) -> Result<BoundaryExpansionFit> {
    let solve = |points: &[(f64, f64)]| {
        let rows: Vec<Vec<f64>> = points
            .iter()
            .map(|&(s, _)| vec![s, (1.0 - s).powi(2), (1.0 - s).powi(3)])
            .collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        least_squares(&rows, &y)
    };
    let f = solve(points)?;
    let window = if points.len() >= 4 {
        (solve(&points[1..])?.coefficients[1] - f.coefficients[1]).abs()
    } else {
        0.0
    };
    Ok(BoundaryExpansionFit {
        linear: f.coefficients[0],
        quadratic: f.coefficients[1],
        cubic: f.coefficients[2],
        quadratic_error: f.standard_errors[1].max(window),
    })
}

fn extras(t: &TruncationSeries, pick: impl Fn(&SeriesEntry) -> Option<f64>) -> Result<Vec<(f64, f64)>> {
    t.entries()
        .iter()
        .map(|e| {
            pick(e)
                .map(|v| (e.s, v))
                .ok_or_else(|| Error::Parameter("series lacks truncation-curve measurements".into()))
        })
        .collect()
}

/// Euclidean length of the truncation curves against `s`; the quadratic
/// coefficient approximates `−K∞/2`.
pub fn truncation_length_fit(t: &TruncationSeries) -> Result<BoundaryExpansionFit> {
    boundary_fit(&extras(t, |e| e.euclidean_length)?)
}

/// `∫ |x|/|x^⊤| dl` over the truncation curves against `s`; the quadratic
/// coefficient vanishes.
pub fn radial_ratio_fit(t: &TruncationSeries) -> Result<BoundaryExpansionFit> {
    boundary_fit(&extras(t, |e| e.radial_ratio_integral)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_line() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 2.0 - 0.5 * i as f64).collect();
        let f = least_squares(&rows, &y).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-13);
        assert!((f.coefficients[1] + 0.5).abs() < 1e-13);
    }

    #[test]
    fn clustered_radii_are_ill_conditioned() {
        let rows = vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14], vec![1.0, 1.0]];
        assert!(matches!(least_squares(&rows, &[1.0, 2.0, 3.0]), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn series_rejects_unsorted() {
        let a = SeriesEntry::new(0.99, 1.0, 1.0).unwrap();
        let b = SeriesEntry::new(0.95, 1.0, 1.0).unwrap();
        assert!(TruncationSeries::new(vec![a, b], None).is_err());
    }
}
