//! Run configuration: built-in defaults, an optional `key = value` file with
//! `[section]` headers, then command-line overrides, in that order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fracwave_core::stepper::{EpsRule, DEFAULT_CG_TOL, DEFAULT_Q};
use fracwave_core::{Material, MeshKind, ProblemKind, Scheme};
use ini::{Ini, Properties};

use crate::error::CliError;

/// Which schemes a command runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Fast,
    Direct,
    Both,
}

impl SchemeChoice {
    pub fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeChoice::Fast => vec![Scheme::Fast],
            SchemeChoice::Direct => vec![Scheme::Direct],
            SchemeChoice::Both => vec![Scheme::Fast, Scheme::Direct],
        }
    }
}

impl FromStr for SchemeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fast" => Ok(SchemeChoice::Fast),
            "direct" => Ok(SchemeChoice::Direct),
            "both" => Ok(SchemeChoice::Both),
            other => Err(format!("unknown scheme {other:?} (expected fast, direct or both)")),
        }
    }
}

impl fmt::Display for SchemeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeChoice::Fast => "fast",
            SchemeChoice::Direct => "direct",
            SchemeChoice::Both => "both",
        })
    }
}

/// How the spatial ladder picks its time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// `Δt = h²/2` with `h = √2/n`, i.e. `Δt = 1/n²`.
    HSquaredHalf,
    /// The same number of steps on every level.
    FixedSteps(usize),
}

impl Coupling {
    pub fn steps(self, n: usize, final_time: f64) -> usize {
        match self {
            Coupling::HSquaredHalf => ((final_time * (n * n) as f64).round() as usize).max(1),
            Coupling::FixedSteps(k) => k,
        }
    }
}

impl FromStr for Coupling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("h2-over-2") {
            return Ok(Coupling::HSquaredHalf);
        }
        if let Some(v) = s.strip_prefix("fixed:") {
            return match v.trim().parse::<usize>() {
                Ok(k) if k > 0 => Ok(Coupling::FixedSteps(k)),
                _ => Err(format!("bad step count {v:?} in coupling")),
            };
        }
        Err(format!("unknown coupling {s:?} (expected h2-over-2 or fixed:N)"))
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::HSquaredHalf => f.write_str("h2-over-2"),
            Coupling::FixedSteps(k) => write!(f, "fixed:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub mesh: MeshKind,
    pub alphas: Vec<f64>,
    pub scheme: SchemeChoice,
    pub final_time: f64,
    pub out: PathBuf,
    pub jobs: usize,

    pub q: f64,
    pub eps_rule: EpsRule,
    pub cg_tol: f64,

    pub space_ladder: Vec<usize>,
    pub coupling: Coupling,
    pub time_mesh: usize,
    pub time_ladder: Vec<usize>,
    pub bench_mesh: usize,
    pub bench_steps: Vec<usize>,
    /// Timed repetitions per bench level; timings keep the minimum.
    pub bench_repeats: usize,

    /// Material with `alpha` ignored; each run substitutes its own.
    pub material: Material,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Ex61,
            mesh: MeshKind::Quadrilateral,
            alphas: vec![0.5],
            scheme: SchemeChoice::Fast,
            final_time: 1.0,
            out: PathBuf::from("results"),
            jobs: 1,
            q: DEFAULT_Q,
            eps_rule: EpsRule::DtOver10,
            cg_tol: DEFAULT_CG_TOL,
            space_ladder: vec![4, 8, 16, 32, 64],
            coupling: Coupling::HSquaredHalf,
            time_mesh: 64,
            time_ladder: vec![5, 10, 20, 40, 80],
            bench_mesh: 64,
            bench_steps: vec![1000, 2000, 4000],
            bench_repeats: 1,
            material: Material::reference(0.5),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_source(&text)
    }

    /// Parses a config document on top of the defaults.
    pub fn from_str_source(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut cfg = Self::default();
        for (section, props) in ini.iter() {
            match section {
                None if props.is_empty() => {}
                None => return Err(CliError::Config("keys must appear inside a [section]".into())),
                Some("run") => cfg.apply_run(props)?,
                Some("soe") => cfg.apply_soe(props)?,
                Some("solver") => cfg.apply_solver(props)?,
                Some("space") => cfg.apply_space(props)?,
                Some("time") => cfg.apply_time(props)?,
                Some("bench") => cfg.apply_bench(props)?,
                Some("material") => cfg.apply_material(props)?,
                Some(other) => return Err(CliError::Config(format!("unknown section [{other}]"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_run(&mut self, props: &Properties) -> Result<(), CliError> {
        for (key, value) in props.iter() {
            match key {
                "problem" => self.problem = parse_value("run", key, value)?,
                "mesh" => self.mesh = parse_value("run", key, value)?,
                "alpha" => self.alphas = parse_list("run", key, value)?,
                "scheme" => self.scheme = parse_value("run", key, value)?,
                "final_time" => self.final_time = parse_value("run", key, value)?,
                "out" => self.out = PathBuf::from(value.trim()),
                "jobs" => self.jobs = parse_value("run", key, value)?,
                _ => return Err(unknown_key("run", key)),
            }
        }
        Ok(())
    }

    fn apply_soe(&mut self, props: &Properties) -> Result<(), CliError> {
        for (key, value) in props.iter() {
            match key {
                "q" => self.q = parse_value("soe", key, value)?,
                "eps_rule" => self.eps_rule = parse_value("soe", key, value)?,
                _ => return Err(unknown_key("soe", key)),
            }
        }
        Ok(())
    }

    fn apply_solver(&mut self, props: &Properties) -> Result<(), CliError> {
        for (key, value) in props.iter() {
            match key {
                "cg_tol" => self.cg_tol = parse_value("solver", key, value)?,
                _ => return Err(unknown_key("solver", key)),
            }
        }
        Ok(())
    }

    fn apply_space(&mut self, props: &Properties) -> Result<(), CliError> {
        for (key, value) in props.iter() {
            match key {
                "ladder" => self.space_ladder = parse_list("space", key, value)?,
                "coupling" => self.coupling = parse_value("space", key, value)?,
                _ => return Err(unknown_key("space", key)),
            }
        }
        Ok(())
    }

    fn apply_time(&mut self, props: &Properties) -> Result<(), CliError> {
        for (key, value) in props.iter() {
            match key {
                "n" => self.time_mesh = parse_value("time", key, value)?,
                "steps" => self.time_ladder = parse_list("time", key, value)?,
                _ => return Err(unknown_key("time", key)),
            }
        }
        Ok(())
    }

    fn apply_bench(&mut self, props: &Properties) -> Result<(), CliError> {
        for (key, value) in props.iter() {
            match key {
                "n" => self.bench_mesh = parse_value("bench", key, value)?,
                "steps" => self.bench_steps = parse_list("bench", key, value)?,
                "repeats" => self.bench_repeats = parse_value("bench", key, value)?,
                _ => return Err(unknown_key("bench", key)),
            }
        }
        Ok(())
    }

    fn apply_material(&mut self, props: &Properties) -> Result<(), CliError> {
        let m = &mut self.material;
        for (key, value) in props.iter() {
            let slot = match key {
                "rho" => &mut m.rho,
                "tau_sigma" => &mut m.tau_sigma,
                "tau_eps" => &mut m.tau_eps,
                "mu_c" => &mut m.mu_c,
                "lambda_c" => &mut m.lambda_c,
                "mu_d" => &mut m.mu_d,
                "lambda_d" => &mut m.lambda_d,
                _ => return Err(unknown_key("material", key)),
            };
            *slot = parse_value("material", key, value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.alphas.is_empty() {
            return bad("at least one alpha is required".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return bad(format!("alpha must lie in (0, 1], got {a}"));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return bad(format!("final_time must be positive, got {}", self.final_time));
        }
        if self.jobs == 0 || self.bench_repeats == 0 {
            return bad("jobs and bench repeats must be at least 1".into());
        }
        if !(self.q > 1.0) {
            return bad(format!("q must exceed 1, got {}", self.q));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return bad(format!("cg_tol must lie in (0, 1), got {}", self.cg_tol));
        }
        for (name, ladder) in [("space ladder", &self.space_ladder), ("time ladder", &self.time_ladder), ("bench steps", &self.bench_steps)] {
            if ladder.is_empty() || ladder.contains(&0) {
                return bad(format!("{name} must be a nonempty list of positive integers"));
            }
        }
        if self.space_ladder.iter().any(|&n| n < 2) || self.time_mesh < 2 || self.bench_mesh < 2 {
            return bad("meshes need at least 2 cells per side".into());
        }
        self.material_for(self.alphas[0]).validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn material_for(&self, alpha: f64) -> Material {
        Material { alpha, ..self.material }
    }
}

fn unknown_key(section: &str, key: &str) -> CliError {
    CliError::Config(format!("unknown key {key:?} in [{section}]"))
}

fn parse_value<T>(section: &str, key: &str, value: &str) -> Result<T, CliError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("[{section}] {key} = {value:?}: {e}")))
}

/// Comma-separated list.
pub fn parse_list<T>(section: &str, key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(section, key, s))
        .collect()
}
