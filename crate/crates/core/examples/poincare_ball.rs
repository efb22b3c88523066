//! Distances, translations and the three ways of naming a truncation radius.

use nalgebra::Vector3;
use renarea::hyperbolic::{ball_translation, poincare_distance, BallPoint, MobiusParam, RadiusTriple};

fn main() -> renarea::Result<()> {
    let p = BallPoint::from_xyz(0.3, 0.0, 0.0)?;
    let q = BallPoint::from_xyz(0.0, -0.5, 0.2)?;
    let a = MobiusParam::new(Vector3::new(0.1, 0.4, -0.2))?;
    let before = poincare_distance(&p, &q);
    let after = poincare_distance(&ball_translation(&a, &p), &ball_translation(&a, &q));
    println!("d(p, q) = {before:.15}, after translating by a: {after:.15}");

    println!("{:>6} {:>20} {:>20} {:>22}", "R", "s", "eps", "1/eps + eps/4 - cosh R");
    for r in [0.5, 2.0, 5.0, 9.9] {
        let t = RadiusTriple::from_r(r)?;
        println!("{r:>6} {:>20.15} {:>20.15e} {:>22.3e}", t.s, t.eps, t.cosh_r() - r.cosh());
    }
    Ok(())
}
