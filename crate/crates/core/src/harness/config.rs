//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Rotation3, Vector3};
use serde::Serialize;

use crate::curves::{make_curve, BoundaryCurve, CurveKind, MIN_SAMPLES};
use crate::error::{Error, Result};
use crate::hyperbolic::MobiusParam;
use crate::renormalized::DEFAULT_SCHEDULE;
use crate::surface::{MeshParams, S_RANGE};

/// Every key accepted in a config file or as a `--key` flag.
pub const KEYS: &[&str] = &[
    "curve",
    "eps",
    "mode",
    "theta",
    "lissajous-p",
    "lissajous-q",
    "amplitude",
    "curve-file",
    "tilt",
    "translate",
    "samples",
    "boundary-samples",
    "radial-step",
    "max-s",
    "schedule",
    "seed",
    "perturbation",
    "rel-tol",
    "checks",
    "chain-factor",
    "rigidity-tol",
    "iso-tol",
    "two-route-tol",
    "residual-tol",
    "entropy-tol",
    "out",
    "jobs",
    "eps-values",
    "rho",
];

/// Optional stages of `verify`.
pub const CHECK_NAMES: &[&str] = &["theorem", "gauss-bonnet", "isoperimetric", "cones", "claims", "entropy", "refinement"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveChoice {
    GreatCircle,
    Latitude,
    Fourier,
    Lissajous,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub curve: CurveChoice,
    pub eps: f64,
    pub mode: u32,
    /// Polar angle of `latitude`; cone density for `cone-check`.
    pub theta: f64,
    pub lissajous_p: u32,
    pub lissajous_q: u32,
    pub amplitude: f64,
    pub curve_file: Option<PathBuf>,
    /// Rotation of the curve about the x axis, radians.
    pub tilt: f64,
    /// Möbius parameter applied to the curve after the tilt.
    pub translate: [f64; 3],
    pub samples: usize,
    pub mesh: MeshParams,
    pub max_s: f64,
    /// Level-set radii of the truncation series; derived from `max_s` when unset.
    pub schedule: Option<Vec<f64>>,
    pub seed: u64,
    pub perturbation: f64,
    pub rel_tol: f64,
    pub checks: Vec<String>,
    pub chain_factor: f64,
    pub rigidity_tol: f64,
    pub iso_tol: f64,
    pub two_route_tol: f64,
    pub residual_tol: f64,
    pub entropy_tol: f64,
    pub out: PathBuf,
    pub jobs: usize,
    pub eps_values: Vec<f64>,
    pub rho: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            curve: CurveChoice::GreatCircle,
            eps: 0.2,
            mode: 2,
            theta: 1.0,
            lissajous_p: 2,
            lissajous_q: 3,
            amplitude: 0.2,
            curve_file: None,
            tilt: 0.0,
            translate: [0.0; 3],
            samples: 512,
            mesh: MeshParams::default(),
            max_s: S_RANGE.1,
            schedule: None,
            seed: 0,
            perturbation: 0.0,
            rel_tol: 1e-8,
            checks: ["theorem", "gauss-bonnet", "isoperimetric", "cones", "claims", "entropy"]
                .map(String::from)
                .to_vec(),
            chain_factor: 3.0,
            rigidity_tol: 1e-2,
            iso_tol: crate::renormalized::ISOPERIMETRIC_TOL,
            two_route_tol: 0.02,
            residual_tol: 1e-3,
            entropy_tol: 0.02,
            out: PathBuf::from("renarea-out"),
            jobs: 1,
            eps_values: vec![0.0, 0.05, 0.1, 0.2],
            rho: 2.0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect()
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Sets one key; unknown keys are errors.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "curve" => {
                self.curve = match v {
                    "great-circle" => CurveChoice::GreatCircle,
                    "latitude" => CurveChoice::Latitude,
                    "fourier" => CurveChoice::Fourier,
                    "lissajous" => CurveChoice::Lissajous,
                    "file" => CurveChoice::File,
                    _ => return Err(Error::Parse(format!("unknown curve {v:?}"))),
                }
            }
            "eps" => self.eps = parse(key, v)?,
            "mode" => self.mode = parse(key, v)?,
            "theta" => self.theta = parse(key, v)?,
            "lissajous-p" => self.lissajous_p = parse(key, v)?,
            "lissajous-q" => self.lissajous_q = parse(key, v)?,
            "amplitude" => self.amplitude = parse(key, v)?,
            "curve-file" => {
                self.curve_file = Some(PathBuf::from(v));
                self.curve = CurveChoice::File;
            }
            "tilt" => self.tilt = parse(key, v)?,
            "translate" => {
                let a = parse_list(key, v)?;
                if a.len() != 3 {
                    return Err(Error::Parse(format!("translate needs 3 components, got {}", a.len())));
                }
                self.translate = [a[0], a[1], a[2]];
            }
            "samples" => self.samples = parse(key, v)?,
            "boundary-samples" => self.mesh.boundary_samples = parse(key, v)?,
            "radial-step" => self.mesh.radial_step = parse(key, v)?,
            "max-s" => self.max_s = parse(key, v)?,
            "schedule" => self.schedule = Some(parse_list(key, v)?),
            "seed" => self.seed = parse(key, v)?,
            "perturbation" => self.perturbation = parse(key, v)?,
            "rel-tol" => self.rel_tol = parse(key, v)?,
            "checks" => {
                self.checks = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            }
            "chain-factor" => self.chain_factor = parse(key, v)?,
            "rigidity-tol" => self.rigidity_tol = parse(key, v)?,
            "iso-tol" => self.iso_tol = parse(key, v)?,
            "two-route-tol" => self.two_route_tol = parse(key, v)?,
            "residual-tol" => self.residual_tol = parse(key, v)?,
            "entropy-tol" => self.entropy_tol = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "jobs" => self.jobs = parse(key, v)?,
            "eps-values" => self.eps_values = parse_list(key, v)?,
            "rho" => self.rho = parse(key, v)?,
            _ => return Err(Error::Parse(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn enabled(&self, check: &str) -> bool {
        self.checks.iter().any(|c| c == check)
    }

    /// Checks every parameter against the preconditions of the modules it
    /// feeds, before anything is computed.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.samples < MIN_SAMPLES {
            return bad(format!("samples = {} < {MIN_SAMPLES}", self.samples));
        }
        if self.mesh.boundary_samples < MIN_SAMPLES || !(self.mesh.radial_step > 0.0 && self.mesh.radial_step < 1.0) {
            return bad(format!("mesh resolution {:?} out of range", self.mesh));
        }
        if !(S_RANGE.0..=S_RANGE.1 + 1e-15).contains(&self.max_s) {
            return bad(format!("max-s {} not in [{}, {}]", self.max_s, S_RANGE.0, S_RANGE.1));
        }
        if let Some(s) = &self.schedule {
            if s.windows(2).any(|w| !(w[0] < w[1])) || s.iter().any(|&x| !(x > 0.0 && x < self.max_s)) {
                return bad(format!("schedule {s:?} must increase inside (0, max-s)"));
            }
        }
        if self.translate.iter().map(|x| x * x).sum::<f64>() >= 1.0 {
            return bad(format!("translate {:?} must lie in the open ball", self.translate));
        }
        for c in &self.checks {
            if !CHECK_NAMES.contains(&c.as_str()) {
                return bad(format!("unknown check {c:?}; known: {}", CHECK_NAMES.join(", ")));
            }
        }
        let positive = [
            ("rel-tol", self.rel_tol),
            ("chain-factor", self.chain_factor),
            ("rigidity-tol", self.rigidity_tol),
            ("iso-tol", self.iso_tol),
            ("two-route-tol", self.two_route_tol),
            ("residual-tol", self.residual_tol),
            ("entropy-tol", self.entropy_tol),
            ("rho", self.rho),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{k} = {v} must be positive"));
            }
        }
        if self.perturbation < 0.0 || self.jobs == 0 {
            return bad("perturbation must be non-negative and jobs positive".into());
        }
        self.curve()?;
        Ok(())
    }

    /// Catalog kind of the configured curve (`None` for a file).
    pub fn curve_kind(&self) -> Option<CurveKind> {
        match self.curve {
            CurveChoice::GreatCircle => Some(CurveKind::GreatCircle),
            CurveChoice::Latitude => Some(CurveKind::Latitude { theta: self.theta }),
            CurveChoice::Fourier => Some(CurveKind::Fourier { eps: self.eps, mode: self.mode }),
            CurveChoice::Lissajous => Some(CurveKind::Lissajous {
                p: self.lissajous_p,
                q: self.lissajous_q,
                amplitude: self.amplitude,
            }),
            CurveChoice::File => None,
        }
    }

    /// The boundary curve after tilt and translation.
    pub fn curve(&self) -> Result<BoundaryCurve> {
        let mut c = match self.curve_kind() {
            Some(kind) => make_curve(kind, self.samples)?,
            None => {
                let path = self
                    .curve_file
                    .as_ref()
                    .ok_or_else(|| Error::Parameter("curve = file needs curve-file".into()))?;
                BoundaryCurve::read_csv(path)?
            }
        };
        if self.tilt != 0.0 {
            c = c.rotated(&Rotation3::from_axis_angle(&Vector3::x_axis(), self.tilt));
        }
        let a = Vector3::from(self.translate);
        if a.norm() > 0.0 {
            c = c.mobius_image(&MobiusParam::new(a)?)?;
        }
        Ok(c)
    }

    /// The configured schedule, or the default radii that stay inside the
    /// part of the mesh where level sets are exact.
    pub fn truncation_schedule(&self) -> Vec<f64> {
        match &self.schedule {
            Some(s) => s.clone(),
            None => {
                let limit = 1.0 - 10.0 * (1.0 - self.max_s);
                DEFAULT_SCHEDULE.iter().copied().filter(|&s| s <= limit + 1e-12).collect()
            }
        }
    }

    /// `key = value` lines reproducing this config.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let curve = match self.curve {
            CurveChoice::GreatCircle => "great-circle",
            CurveChoice::Latitude => "latitude",
            CurveChoice::Fourier => "fourier",
            CurveChoice::Lissajous => "lissajous",
            CurveChoice::File => "file",
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("curve", curve.into());
        kv("eps", self.eps.to_string());
        kv("mode", self.mode.to_string());
        kv("theta", self.theta.to_string());
        kv("lissajous-p", self.lissajous_p.to_string());
        kv("lissajous-q", self.lissajous_q.to_string());
        kv("amplitude", self.amplitude.to_string());
        if let Some(p) = &self.curve_file {
            kv("curve-file", p.display().to_string());
        }
        kv("tilt", self.tilt.to_string());
        kv("translate", list(&self.translate));
        kv("samples", self.samples.to_string());
        kv("boundary-samples", self.mesh.boundary_samples.to_string());
        kv("radial-step", self.mesh.radial_step.to_string());
        kv("max-s", self.max_s.to_string());
        if let Some(sch) = &self.schedule {
            kv("schedule", list(sch));
        }
        kv("seed", self.seed.to_string());
        kv("perturbation", self.perturbation.to_string());
        kv("rel-tol", self.rel_tol.to_string());
        kv("checks", self.checks.join(","));
        kv("chain-factor", self.chain_factor.to_string());
        kv("rigidity-tol", self.rigidity_tol.to_string());
        kv("iso-tol", self.iso_tol.to_string());
        kv("two-route-tol", self.two_route_tol.to_string());
        kv("residual-tol", self.residual_tol.to_string());
        kv("entropy-tol", self.entropy_tol.to_string());
        kv("out", self.out.display().to_string());
        kv("jobs", self.jobs.to_string());
        kv("eps-values", list(&self.eps_values));
        kv("rho", self.rho.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_errors() {
        assert!(ExperimentConfig::from_text("curve = fourier\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_text("eps 0.1").is_err());
    }

    #[test]
    fn text_round_trips() {
        let mut c = ExperimentConfig::from_text("# a comment\ncurve = fourier\neps = 0.1\nschedule = 0.9,0.95\n").unwrap();
        c.set("translate", "0.3,0,0").unwrap();
        assert_eq!(ExperimentConfig::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn default_schedule_follows_truncation() {
        let mut c = ExperimentConfig::default();
        assert_eq!(c.truncation_schedule(), DEFAULT_SCHEDULE.to_vec());
        c.max_s = 0.999;
        assert_eq!(c.truncation_schedule(), vec![0.95, 0.98, 0.99]);
        c.max_s = 0.95;
        assert!(c.truncation_schedule().is_empty());
    }
}
