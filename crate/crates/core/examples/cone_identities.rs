//! Cones over solved surfaces: the two identities and the area comparison.

use renarea::cones::{cone_identity_residual, cone_length_identity_residual, cone_profile, discrete_cone, ConeData};
use renarea::curves::{make_curve, CurveKind};
use renarea::surface::{solve_plateau_with, MeshParams, SolveOptions};

fn main() -> renarea::Result<()> {
    let c = make_curve(CurveKind::Fourier { eps: 0.2, mode: 2 }, 512)?;
    let m = solve_plateau_with(&c, 0.999, &MeshParams::default(), &SolveOptions::default())?.surface;
    let cd = ConeData::of_surface(&m)?;
    println!("density {:.6} at R = {:.4}", cd.theta, cd.r);
    for frac in [0.25, 0.5, 1.0] {
        let rho = frac * cd.r;
        let (l, a) = cone_profile(&cd, rho)?;
        println!(
            "rho {rho:.3}: L {l:.6} A {a:.6} residuals {:.1e} {:.1e}",
            cone_identity_residual(cd.theta, l, a) / (l * l),
            cone_length_identity_residual(rho, l, a) / (l * l)
        );
    }
    let cone = discrete_cone(&m)?;
    println!(
        "area: surface {:.6} <= cone {:.6} (closed form {:.6})",
        m.hyperbolic_area(),
        cone.hyperbolic_area(),
        cone_profile(&cd, cd.r)?.1
    );
    Ok(())
}
