//! Conformal length of a few curves, with the sampling error estimate.

use renarea::conformal::{conformal_length, sampling_error};
use renarea::curves::{make_curve, CurveKind};

fn main() -> renarea::Result<()> {
    for kind in [
        CurveKind::GreatCircle,
        CurveKind::Latitude { theta: 0.6 },
        CurveKind::Fourier { eps: 0.2, mode: 2 },
        CurveKind::Lissajous { p: 2, q: 3, amplitude: 0.15 },
    ] {
        let c = make_curve(kind, 512)?;
        let lc = conformal_length(&c)?;
        let err = sampling_error(&c, &lc.argmax(), lc.family)?;
        println!(
            "{kind:?}: lambda_c {:.10} +/- {err:.1e}, argmax {:.4?}, {} iterations",
            lc.lambda_c, lc.argmax_a, lc.iterations
        );
    }
    Ok(())
}
