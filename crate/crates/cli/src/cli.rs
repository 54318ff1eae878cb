//! Command-line surface.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use fracwave_core::stepper::EpsRule;
use fracwave_core::{MeshKind, ProblemKind};

use crate::commands;
use crate::config::{Coupling, RunConfig, SchemeChoice};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fracwave", version, about = "Fast SOE solver for fractional viscoelastic waves: convergence and timing experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every solver-driving subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Config file (`key = value` lines under [run], [soe], [solver], [space], [time], [bench], [material])
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Manufactured problem: ex61 or ex62
    #[arg(long)]
    pub problem: Option<ProblemKind>,
    /// Mesh kind: tri or quad
    #[arg(long)]
    pub mesh: Option<MeshKind>,
    /// Fractional order(s), comma separated
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// fast, direct or both
    #[arg(long)]
    pub scheme: Option<SchemeChoice>,
    /// SOE tolerance rule: dt-over-10 or fixed:EPS
    #[arg(long)]
    pub eps_rule: Option<EpsRule>,
    /// SOE panel ratio
    #[arg(long)]
    pub q: Option<f64>,
    /// Relative CG tolerance per step
    #[arg(long)]
    pub cg_tol: Option<f64>,
    /// Final time T
    #[arg(long)]
    pub final_time: Option<f64>,
    /// Worker threads for ladder levels (bench always runs serially)
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.problem {
            cfg.problem = p;
        }
        if let Some(m) = self.mesh {
            cfg.mesh = m;
        }
        if !self.alpha.is_empty() {
            cfg.alphas = self.alpha.clone();
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(s) = self.scheme {
            cfg.scheme = s;
        }
        if let Some(e) = self.eps_rule {
            cfg.eps_rule = e;
        }
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if let Some(t) = self.cg_tol {
            cfg.cg_tol = t;
        }
        if let Some(t) = self.final_time {
            cfg.final_time = t;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error and order under mesh refinement
    ConvergenceSpace {
        #[command(flatten)]
        common: CommonArgs,
        /// Cells per side, comma separated
        #[arg(long, value_delimiter = ',')]
        ladder: Vec<usize>,
        /// Time step rule: h2-over-2 or fixed:N
        #[arg(long)]
        coupling: Option<Coupling>,
    },
    /// Error and order under time-step refinement on a fixed mesh
    ConvergenceTime {
        #[command(flatten)]
        common: CommonArgs,
        /// Cells per side of the fixed mesh
        #[arg(long)]
        n: Option<usize>,
        /// Step counts, comma separated
        #[arg(long, value_delimiter = ',')]
        steps: Vec<usize>,
    },
    /// Wall time and history memory of the fast and direct schemes
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        steps: Vec<usize>,
        /// Timed repetitions per level (timings keep the minimum)
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Build, certify and print a sum-of-exponentials table
    SoeTable {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 10.0)]
        q: f64,
        /// Lower end of the certified range (normalized time)
        #[arg(long, default_value_t = 1e-4)]
        t_min: f64,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        /// Also write the table into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One run per selected scheme
    SingleRun {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Defaults to n² (the h²/2 coupling)
        #[arg(long)]
        steps: Option<usize>,
    },
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::ConvergenceSpace { common, ladder, coupling } => {
            let mut cfg = common.resolve()?;
            if !ladder.is_empty() {
                cfg.space_ladder = ladder;
            }
            if let Some(c) = coupling {
                cfg.coupling = c;
            }
            cfg.validate()?;
            for scheme in cfg.scheme.schemes() {
                let rows = commands::convergence_space(&cfg, scheme)?;
                commands::emit_convergence(&cfg, scheme, &rows, false, out)?;
            }
        }
        Command::ConvergenceTime { common, n, steps } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = n {
                cfg.time_mesh = n;
            }
            if !steps.is_empty() {
                cfg.time_ladder = steps;
            }
            cfg.validate()?;
            for scheme in cfg.scheme.schemes() {
                let rows = commands::convergence_time(&cfg, scheme)?;
                commands::emit_convergence(&cfg, scheme, &rows, true, out)?;
            }
        }
        Command::Bench { common, n, steps, repeats } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = n {
                cfg.bench_mesh = n;
            }
            if !steps.is_empty() {
                cfg.bench_steps = steps;
            }
            if let Some(r) = repeats {
                cfg.bench_repeats = r;
            }
            cfg.validate()?;
            let rows = commands::bench(&cfg)?;
            commands::emit_bench(&cfg, "bench", &rows, out)?;
        }
        Command::SoeTable { alpha, eps, q, t_min, t_max, out: dir } => {
            let soe = commands::soe_table(alpha, eps, q, t_min, t_max)?;
            let text = commands::soe_table_text(&soe);
            out.write_all(text.as_bytes())?;
            if let Some(dir) = dir {
                commands::ensure_dir(&dir)?;
                std::fs::write(dir.join(format!("soe_alpha{alpha}_eps{eps:e}.txt")), text)?;
            }
        }
        Command::SingleRun { common, n, steps } => {
            let cfg = common.resolve()?;
            cfg.validate()?;
            if n < 2 {
                return Err(CliError::Usage(format!("n must be at least 2, got {n}")));
            }
            let steps = steps.unwrap_or_else(|| Coupling::HSquaredHalf.steps(n, cfg.final_time));
            if steps == 0 {
                return Err(CliError::Usage("steps must be positive".into()));
            }
            let rows = commands::single_run(&cfg, n, steps)?;
            commands::emit_bench(&cfg, "single", &rows, out)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// writing reports to `out` and diagnostics to stderr. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fracwave: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let c = run_cli(std::iter::once("fracwave").chain(args.iter().copied()), &mut buf);
        (c, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(code(&["no-such-command"]).0, 1);
        assert_eq!(code(&["convergence-space", "--mesh", "hex"]).0, 1);
        assert_eq!(code(&["soe-table", "--alpha", "1.0"]).0, 1);
        assert_eq!(code(&[]).0, 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(code(&["--help"]).0, 0);
    }

    #[test]
    fn soe_table_prints_certificate() {
        let (c, text) = code(&["soe-table", "--alpha", "0.5", "--eps", "1e-3"]);
        assert_eq!(c, 0);
        assert!(text.lines().last().unwrap().contains("<= eps"));
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "[run]\nproblem = ex62\nmesh = tri\nalpha = 0.3\n").unwrap();
        let args = CommonArgs { config: Some(path), mesh: Some(MeshKind::Quadrilateral), ..CommonArgs::default() };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.problem, ProblemKind::Ex62);
        assert_eq!(cfg.mesh, MeshKind::Quadrilateral);
        assert_eq!(cfg.alphas, vec![0.3]);
    }

    #[test]
    fn missing_config_is_exit_one() {
        assert_eq!(code(&["single-run", "--config", "/nonexistent/x.cfg"]).0, 1);
    }
}
