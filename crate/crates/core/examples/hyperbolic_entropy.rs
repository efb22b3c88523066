//! Hyperbolic entropy of a coarse great-circle disk and of a perturbed disk.

use std::f64::consts::PI;

use renarea::conformal::conformal_length;
use renarea::curves::{make_curve, CurveKind};
use renarea::entropy::{hyperbolic_entropy_with, EntropyOptions};
use renarea::surface::{solve_plateau_with, MeshParams, SolveOptions};

fn main() -> renarea::Result<()> {
    let mesh = MeshParams { boundary_samples: 96, radial_step: 0.25 };
    for kind in [CurveKind::GreatCircle, CurveKind::Fourier { eps: 0.2, mode: 2 }] {
        let c = make_curve(kind, 512)?;
        let lc = conformal_length(&c)?;
        let m = solve_plateau_with(&c, 0.9999, &mesh, &SolveOptions::default())?.surface;
        let opts = EntropyOptions { seeds: vec![lc.argmax_ball_point()], ..Default::default() };
        let e = hyperbolic_entropy_with(&m, &opts)?;
        println!(
            "{kind:?}: lambda_H {:.6}, 2 pi lambda_H / lambda_c {:.6}, tau {:.3}, tail share {:.3}",
            e.lambda_h,
            2.0 * PI * e.lambda_h / lc.lambda_c,
            e.argmax_tau,
            e.tail_fraction
        );
    }
    Ok(())
}
