//! Renormalized area by fitting the truncation series and by Gauss–Bonnet.

use renarea::curvature::measure;
use renarea::curves::{make_curve, CurveKind};
use renarea::renormalized::{
    fit_expansion, isoperimetric_margins, renormalized_area_gauss_bonnet, series_from_surface, DEFAULT_SCHEDULE,
};
use renarea::surface::{solve_plateau_with, MeshParams, SolveOptions};

fn main() -> renarea::Result<()> {
    for eps in [0.0, 0.1, 0.2] {
        let c = make_curve(CurveKind::Fourier { eps, mode: 2 }, 512)?;
        let m = solve_plateau_with(&c, 0.9999, &MeshParams::default(), &SolveOptions::default())?.surface;
        let series = series_from_surface(&m, &DEFAULT_SCHEDULE)?;
        let fit = fit_expansion(&series)?;
        let gb = renormalized_area_gauss_bonnet(&measure(&m)?)?;
        let worst = isoperimetric_margins(&series).into_iter().fold(f64::INFINITY, f64::min);
        println!(
            "eps {eps}: L_inf {:.6}  K_inf {:.4}  A_inf {:.6} +/- {:.1e}  Gauss-Bonnet {:.6}  min isoperimetric margin {worst:.2e}",
            fit.l_inf, fit.k_inf, fit.a_inf, fit.a_inf_error, gb
        );
    }
    Ok(())
}
