//! Full verification run through the harness, as `renarea verify` does.

use renarea::harness::{run_verify, ExperimentConfig};

fn main() -> renarea::Result<()> {
    // the mode-3 curve bends more than the default mesh resolves
    let cfg = ExperimentConfig::from_text(
        "curve = fourier
eps = 0.15
mode = 3
boundary-samples = 240
radial-step = 0.12
checks = theorem,gauss-bonnet,isoperimetric,cones,claims
",
    )?;
    let out = run_verify(&cfg)?;
    for c in &out.report.checks {
        println!("{} {}: {:.8} vs {:.8}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.lhs, c.rhs);
    }
    for n in &out.notes {
        println!("note: {n}");
    }
    println!("status {:?}", out.status);
    Ok(())
}
