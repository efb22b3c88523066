//! Solves the truncated Plateau problem and writes the mesh as OFF.

use renarea::curvature::measure;
use renarea::curves::{make_curve, CurveKind};
use renarea::surface::{solve_plateau_with, MeshParams, SolveOptions};

fn main() -> renarea::Result<()> {
    let c = make_curve(CurveKind::Fourier { eps: 0.2, mode: 2 }, 512)?;
    let sol = solve_plateau_with(&c, 0.9999, &MeshParams::default(), &SolveOptions::default())?;
    let m = measure(&sol.surface)?;
    println!(
        "{} vertices, {} iterations, A_R {:.6}, L_R {:.6}, R {:.4}, H residual {:.2e}",
        sol.surface.vertices().len(),
        sol.iterations,
        m.a_r,
        m.l_r,
        m.r,
        m.h_residual
    );
    let path = std::env::temp_dir().join("plateau_fourier.off");
    sol.surface.write_off(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
