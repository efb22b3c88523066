use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use renarea::harness::{self, ExperimentConfig};
use renarea::renormalized::VerificationReport;
use renarea::Error;

/// Renormalized area, conformal length and hyperbolic entropy of minimal
/// surfaces in hyperbolic 3-space.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline and the inequality chain; writes report.json, series.csv,
    /// coefficients.json and OFF meshes.
    Verify(Opts),
    /// Verify over eps-values on the Fourier family; writes sweep.csv.
    Sweep(Opts),
    /// Conformal length of the curve.
    LambdaC(Opts),
    /// Hyperbolic entropy of the solved surface.
    Entropy(Opts),
    /// Cone identities for density --theta at radius --rho.
    ConeCheck(Opts),
    /// Solve the Plateau problem; writes surface.off and series.csv.
    Solve(Opts),
}

/// Every config key is also a flag of the same name.
#[derive(Args)]
struct Opts {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "RENAREA_JOBS")]
    jobs: Option<usize>,
    /// great-circle, latitude, fourier, lissajous or file.
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    lissajous_p: Option<String>,
    #[arg(long)]
    lissajous_q: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    curve_file: Option<String>,
    #[arg(long)]
    tilt: Option<String>,
    #[arg(long)]
    translate: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    boundary_samples: Option<String>,
    #[arg(long)]
    radial_step: Option<String>,
    #[arg(long)]
    max_s: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    perturbation: Option<String>,
    #[arg(long)]
    rel_tol: Option<String>,
    /// Comma-separated subset of theorem, gauss-bonnet, isoperimetric,
    /// cones, claims, entropy, refinement.
    #[arg(long)]
    checks: Option<String>,
    #[arg(long)]
    chain_factor: Option<String>,
    #[arg(long)]
    rigidity_tol: Option<String>,
    #[arg(long)]
    iso_tol: Option<String>,
    #[arg(long)]
    two_route_tol: Option<String>,
    #[arg(long)]
    residual_tol: Option<String>,
    #[arg(long)]
    entropy_tol: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    eps_values: Option<String>,
    #[arg(long)]
    rho: Option<String>,
}

impl Opts {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("curve", &self.curve),
            ("eps", &self.eps),
            ("mode", &self.mode),
            ("theta", &self.theta),
            ("lissajous-p", &self.lissajous_p),
            ("lissajous-q", &self.lissajous_q),
            ("amplitude", &self.amplitude),
            ("curve-file", &self.curve_file),
            ("tilt", &self.tilt),
            ("translate", &self.translate),
            ("samples", &self.samples),
            ("boundary-samples", &self.boundary_samples),
            ("radial-step", &self.radial_step),
            ("max-s", &self.max_s),
            ("schedule", &self.schedule),
            ("seed", &self.seed),
            ("perturbation", &self.perturbation),
            ("rel-tol", &self.rel_tol),
            ("checks", &self.checks),
            ("chain-factor", &self.chain_factor),
            ("rigidity-tol", &self.rigidity_tol),
            ("iso-tol", &self.iso_tol),
            ("two-route-tol", &self.two_route_tol),
            ("residual-tol", &self.residual_tol),
            ("entropy-tol", &self.entropy_tol),
            ("out", &self.out),
            ("eps-values", &self.eps_values),
            ("rho", &self.rho),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                c.set(k, v)?;
            }
        }
        if let Some(j) = self.jobs {
            c.jobs = j;
        }
        c.validate()?;
        Ok(c)
    }
}

fn print_checks(r: &VerificationReport) {
    for c in &r.checks {
        println!(
            "{} {}: lhs {:.10} rhs {:.10} margin {:.3e} tol {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.lhs,
            c.rhs,
            c.margin,
            c.tolerance
        );
    }
}

fn checked(r: &VerificationReport) -> i32 {
    if r.passed() {
        0
    } else {
        1
    }
}

fn run(command: Command) -> i32 {
    let (opts, name) = match &command {
        Command::Verify(o) => (o, "verify"),
        Command::Sweep(o) => (o, "sweep"),
        Command::LambdaC(o) => (o, "lambda-c"),
        Command::Entropy(o) => (o, "entropy"),
        Command::ConeCheck(o) => (o, "cone-check"),
        Command::Solve(o) => (o, "solve"),
    };
    let cfg = match opts.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("renarea {name}: {e}");
            return 2;
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global() {
        eprintln!("renarea: thread pool: {e}");
    }
    let out = cfg.out.clone();
    let result: Result<i32, Error> = (|| match command {
        Command::Verify(_) => match harness::run_verify(&cfg) {
            Ok(o) => {
                print_checks(&o.report);
                for n in &o.notes {
                    println!("note: {n}");
                }
                harness::write_verify(&o, &out)?;
                println!("status {:?}, outputs in {}", o.status, out.display());
                Ok(o.exit_code())
            }
            Err(e) => {
                std::fs::create_dir_all(&out)?;
                std::fs::write(out.join("report.json"), harness::error_report(&cfg, &e))?;
                Err(e)
            }
        },
        Command::Sweep(_) => {
            let rows = harness::run_sweep(&cfg)?;
            let csv = harness::sweep_csv(&rows);
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("sweep.csv"), &csv)?;
            print!("{csv}");
            println!(
                "area margins increase with eps: {}",
                harness::sweep_margins_increase(&rows)
            );
            let failed = rows.iter().any(|r| r.status != "pass" && r.status != "inconclusive");
            Ok(i32::from(failed))
        }
        Command::LambdaC(_) => {
            let (lc, r) = harness::run_lambda_c(&cfg)?;
            println!("lambda_c {:.12} at a = {:?}", lc.lambda_c, lc.argmax_a);
            print_checks(&r);
            harness::write_json(&lc, &out.join("lambda_c.json"))?;
            Ok(checked(&r))
        }
        Command::Entropy(_) => {
            let e = harness::run_entropy(&cfg)?;
            println!(
                "lambda_H {:.10} at p0 = {:?}, tau = {:.4} (tail share {:.3})",
                e.entropy.lambda_h, e.entropy.argmax_p0, e.entropy.argmax_tau, e.entropy.tail_fraction
            );
            print_checks(&e.report);
            harness::write_json(&e, &out.join("entropy.json"))?;
            Ok(checked(&e.report))
        }
        Command::ConeCheck(_) => {
            let r = harness::run_cone_check(&cfg)?;
            print_checks(&r);
            harness::write_json(&r, &out.join("cone_check.json"))?;
            Ok(checked(&r))
        }
        Command::Solve(_) => {
            let s = harness::run_solve(&cfg)?;
            println!(
                "{} vertices, {} iterations, A_R {:.10}, L_R {:.10}, residual {:.3e}",
                s.vertices, s.iterations, s.measurements.a_r, s.measurements.l_r, s.measurements.h_residual
            );
            std::fs::create_dir_all(&out)?;
            s.surface.write_off(&out.join("surface.off"))?;
            if let Some(t) = &s.series {
                t.write_csv(&out.join("series.csv"))?;
            }
            harness::write_json(&s, &out.join("solve.json"))?;
            Ok(0)
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("renarea {name}: {e}");
            harness::exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(cli.command) as u8)
}
