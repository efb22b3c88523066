//! Built-in boundary curves with their length and total squared geodesic curvature.

use renarea::curves::{curve_length, make_curve, spherical_geodesic_curvature, CurveKind};

fn main() -> renarea::Result<()> {
    let kinds = [
        ("great circle", CurveKind::GreatCircle),
        ("latitude 1.0", CurveKind::Latitude { theta: 1.0 }),
        ("fourier 0.2, 2", CurveKind::Fourier { eps: 0.2, mode: 2 }),
        ("fourier 0.1, 3", CurveKind::Fourier { eps: 0.1, mode: 3 }),
        ("lissajous 2, 3", CurveKind::Lissajous { p: 2, q: 3, amplitude: 0.15 }),
    ];
    for (name, kind) in kinds {
        let c = make_curve(kind, 1024)?;
        let g = spherical_geodesic_curvature(&c)?;
        println!(
            "{name:<16} length {:.8}  int k_g^2 {:.6}  embedded {}",
            curve_length(&c)?,
            g.k_infinity,
            c.is_embedded()
        );
    }
    Ok(())
}
