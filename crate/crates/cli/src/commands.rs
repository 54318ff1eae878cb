//! The experiment drivers behind each subcommand.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use fracwave_core::soe::build_soe;
use fracwave_core::stepper::{run, soe_for_run};
use fracwave_core::{ManufacturedProblem, Mesh, RunOptions, RunOutcome, Scheme, SoeApprox};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{
    loglog_svg, observed_orders, sci, write_bench_csv, write_convergence_csv, BenchRow, ConvergenceRow, Series,
};

/// One solver run in a ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub alpha: f64,
    pub n: usize,
    pub steps: usize,
}

pub fn run_options(cfg: &RunConfig) -> RunOptions {
    RunOptions { q: cfg.q, eps_rule: cfg.eps_rule, cg_tol: cfg.cg_tol, ..RunOptions::default() }
}

pub fn problem_for(cfg: &RunConfig, alpha: f64) -> Result<ManufacturedProblem, CliError> {
    ManufacturedProblem::with_material(cfg.problem, cfg.material_for(alpha), cfg.final_time)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn solve_level(cfg: &RunConfig, scheme: Scheme, level: Level, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let problem = problem_for(cfg, level.alpha)?;
    let mesh = Mesh::new(cfg.mesh, level.n).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(run(&problem, &mesh, scheme, level.steps, opts)?)
}

/// Runs `levels` on up to `jobs` worker threads; results keep the input order.
pub fn run_levels(cfg: &RunConfig, scheme: Scheme, levels: &[Level]) -> Result<Vec<RunOutcome>, CliError> {
    let opts = run_options(cfg);
    let workers = cfg.jobs.min(levels.len()).max(1);
    if workers == 1 {
        return levels.iter().map(|&l| solve_level(cfg, scheme, l, &opts)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RunOutcome, CliError>>>> = Mutex::new((0..levels.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= levels.len() {
                    break;
                }
                let r = solve_level(cfg, scheme, levels[i], &opts);
                slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every level is claimed by a worker"))
        .collect()
}

fn ladder_rows(cfg: &RunConfig, levels: &[Level], outcomes: &[RunOutcome], by_time: bool) -> Vec<ConvergenceRow> {
    let mut rows = Vec::with_capacity(levels.len());
    for &alpha in &cfg.alphas {
        let idx: Vec<usize> = (0..levels.len()).filter(|&i| levels[i].alpha == alpha).collect();
        let sizes: Vec<f64> = idx
            .iter()
            .map(|&i| if by_time { outcomes[i].dt } else { 1.0 / levels[i].n as f64 })
            .collect();
        let errors: Vec<f64> = idx.iter().map(|&i| outcomes[i].error).collect();
        for (k, order) in observed_orders(&sizes, &errors).into_iter().enumerate() {
            let i = idx[k];
            rows.push(ConvergenceRow {
                mesh_kind: cfg.mesh.to_string(),
                alpha,
                n: levels[i].n,
                h_over_sqrt2: 1.0 / levels[i].n as f64,
                dt: outcomes[i].dt,
                error: outcomes[i].error,
                order,
            });
        }
    }
    rows
}

/// Spatial ladder with the configured time-step coupling.
pub fn convergence_space(cfg: &RunConfig, scheme: Scheme) -> Result<Vec<ConvergenceRow>, CliError> {
    let levels: Vec<Level> = cfg
        .alphas
        .iter()
        .flat_map(|&alpha| {
            cfg.space_ladder
                .iter()
                .map(move |&n| Level { alpha, n, steps: cfg.coupling.steps(n, cfg.final_time) })
        })
        .collect();
    let outcomes = run_levels(cfg, scheme, &levels)?;
    Ok(ladder_rows(cfg, &levels, &outcomes, false))
}

/// Temporal ladder on the fixed mesh `time_mesh`.
pub fn convergence_time(cfg: &RunConfig, scheme: Scheme) -> Result<Vec<ConvergenceRow>, CliError> {
    let levels: Vec<Level> = cfg
        .alphas
        .iter()
        .flat_map(|&alpha| cfg.time_ladder.iter().map(move |&steps| Level { alpha, n: cfg.time_mesh, steps }))
        .collect();
    let outcomes = run_levels(cfg, scheme, &levels)?;
    Ok(ladder_rows(cfg, &levels, &outcomes, true))
}

fn bench_row(cfg: &RunConfig, level: Level, out: &RunOutcome) -> BenchRow {
    BenchRow {
        scheme: out.scheme.to_string(),
        mesh_kind: cfg.mesh.to_string(),
        n: level.n,
        n_steps: level.steps,
        alpha: level.alpha,
        n_exp: out.n_exp,
        error: out.error,
        wall_time_total: out.timings.total.as_secs_f64(),
        wall_time_history: out.timings.history.as_secs_f64(),
        peak_history_bytes: out.peak_history_bytes,
    }
}

/// Fast-vs-direct timing. Runs serially regardless of `jobs`. Each alpha
/// builds one SOE, certified for the smallest step, and reuses it for every
/// step count; one warmup run per alpha is discarded. With several repeats
/// the step counts are interleaved and each timing keeps its minimum.
pub fn bench(cfg: &RunConfig) -> Result<Vec<BenchRow>, CliError> {
    let schemes = cfg.scheme.schemes();
    let max_steps = *cfg.bench_steps.iter().max().unwrap_or(&1);
    let min_steps = *cfg.bench_steps.iter().min().unwrap_or(&1);
    let mut rows = Vec::new();
    for &alpha in &cfg.alphas {
        let problem = problem_for(cfg, alpha)?;
        let mut opts = run_options(cfg);
        if schemes.contains(&Scheme::Fast) {
            opts.soe = Some(soe_for_run(&problem, cfg.final_time / max_steps as f64, &opts)?);
        }
        let mesh = Mesh::new(cfg.mesh, cfg.bench_mesh).map_err(|e| CliError::Config(e.to_string()))?;
        run(&problem, &mesh, schemes[0], min_steps, &opts)?;
        for &scheme in &schemes {
            let mut best: Vec<Option<BenchRow>> = vec![None; cfg.bench_steps.len()];
            for _ in 0..cfg.bench_repeats {
                for (slot, &steps) in best.iter_mut().zip(&cfg.bench_steps) {
                    let out = run(&problem, &mesh, scheme, steps, &opts)?;
                    let row = bench_row(cfg, Level { alpha, n: cfg.bench_mesh, steps }, &out);
                    *slot = Some(match slot.take() {
                        None => row,
                        Some(prev) => BenchRow {
                            wall_time_total: prev.wall_time_total.min(row.wall_time_total),
                            wall_time_history: prev.wall_time_history.min(row.wall_time_history),
                            ..prev
                        },
                    });
                }
            }
            rows.extend(best.into_iter().flatten());
        }
    }
    Ok(rows)
}

/// One run per scheme at the given level.
pub fn single_run(cfg: &RunConfig, n: usize, steps: usize) -> Result<Vec<BenchRow>, CliError> {
    let opts = run_options(cfg);
    let mut rows = Vec::new();
    for &alpha in &cfg.alphas {
        for scheme in cfg.scheme.schemes() {
            let level = Level { alpha, n, steps };
            let out = solve_level(cfg, scheme, level, &opts)?;
            rows.push(bench_row(cfg, level, &out));
        }
    }
    Ok(rows)
}

/// Certified approximation for the standalone table.
pub fn soe_table(alpha: f64, eps: f64, q: f64, t_min: f64, t_max: f64) -> Result<SoeApprox, CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("soe-table needs 0 < alpha < 1, got {alpha}")));
    }
    if !(eps > 0.0 && eps < 1.0) || !(q > 1.0) || !(t_min > 0.0 && t_max > t_min) {
        return Err(CliError::Usage("soe-table needs 0 < eps < 1, q > 1 and 0 < t_min < t_max".into()));
    }
    Ok(build_soe(alpha, eps, q, t_min, t_max)?)
}

pub fn soe_table_text(soe: &SoeApprox) -> String {
    let (t0, t1) = soe.certified_range();
    format!(
        "# alpha {} q {} K {} J {} refine {} n_exp {}\n{}# certified {} <= eps {} on [{}, {}]\n",
        soe.alpha(),
        soe.q(),
        soe.big_k(),
        soe.j_per_panel(),
        soe.refine_levels(),
        soe.n_exp(),
        soe.to_table(),
        sci(soe.eps_certified()),
        sci(soe.eps_target()),
        sci(t0),
        sci(t1),
    )
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

fn stem(cfg: &RunConfig, prefix: &str) -> String {
    format!("{prefix}_{}_{}", cfg.problem, cfg.mesh)
}

/// Writes the ladder CSV and plot, and echoes the table to `out`.
pub fn emit_convergence(
    cfg: &RunConfig,
    scheme: Scheme,
    rows: &[ConvergenceRow],
    by_time: bool,
    out: &mut dyn Write,
) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let base = format!("{}_{scheme}", stem(cfg, if by_time { "time" } else { "space" }));
    let csv_path = cfg.out.join(format!("{base}.csv"));
    write_convergence_csv(&csv_path, rows)?;

    let series: Vec<Series> = cfg
        .alphas
        .iter()
        .map(|&a| Series {
            label: format!("alpha = {a}"),
            points: rows
                .iter()
                .filter(|r| r.alpha == a)
                .map(|r| (if by_time { r.dt } else { r.h_over_sqrt2 }, r.error))
                .collect(),
        })
        .collect();
    let (title, x_label) = if by_time {
        (format!("{} {} temporal convergence ({scheme})", cfg.problem, cfg.mesh), "dt")
    } else {
        (format!("{} {} spatial convergence ({scheme})", cfg.problem, cfg.mesh), "h/sqrt(2)")
    };
    let svg_path = cfg.out.join(format!("{base}.svg"));
    std::fs::write(&svg_path, loglog_svg(&title, x_label, "L2 error at T", &series))?;

    writeln!(out, "{:>6} {:>6} {:>12} {:>12} {:>12} {:>7}", "alpha", "n", "h/sqrt2", "dt", "error", "order")?;
    for r in rows {
        let order = r.order.map(|o| format!("{o:.2}")).unwrap_or_default();
        writeln!(
            out,
            "{:>6} {:>6} {:>12} {:>12} {:>12} {:>7}",
            r.alpha,
            r.n,
            sci(r.h_over_sqrt2),
            sci(r.dt),
            sci(r.error),
            order
        )?;
    }
    Ok(vec![csv_path, svg_path])
}

/// Writes the bench CSV and the history-time and memory plots.
pub fn emit_bench(cfg: &RunConfig, prefix: &str, rows: &[BenchRow], out: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let base = stem(cfg, prefix);
    let csv_path = cfg.out.join(format!("{base}.csv"));
    write_bench_csv(&csv_path, rows)?;
    let mut paths = vec![csv_path];

    if prefix == "bench" {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in rows {
            if !keys.iter().any(|(s, a)| *s == r.scheme && *a == r.alpha) {
                keys.push((r.scheme.clone(), r.alpha));
            }
        }
        let series = |f: &dyn Fn(&BenchRow) -> f64| -> Vec<Series> {
            keys.iter()
                .map(|(s, a)| Series {
                    label: format!("{s}, alpha = {a}"),
                    points: rows.iter().filter(|r| r.scheme == *s && r.alpha == *a).map(|r| (r.n_steps as f64, f(r))).collect(),
                })
                .collect()
        };
        let time_path = cfg.out.join(format!("{base}_history_time.svg"));
        std::fs::write(&time_path, loglog_svg("History wall time", "time steps N", "seconds", &series(&|r| r.wall_time_history)))?;
        let mem_path = cfg.out.join(format!("{base}_memory.svg"));
        std::fs::write(&mem_path, loglog_svg("Peak history memory", "time steps N", "bytes", &series(&|r| r.peak_history_bytes as f64)))?;
        paths.push(time_path);
        paths.push(mem_path);
    }

    writeln!(
        out,
        "{:>7} {:>6} {:>5} {:>7} {:>6} {:>12} {:>12} {:>12} {:>14}",
        "scheme", "alpha", "n", "steps", "n_exp", "error", "total_s", "history_s", "history_bytes"
    )?;
    for r in rows {
        writeln!(
            out,
            "{:>7} {:>6} {:>5} {:>7} {:>6} {:>12} {:>12} {:>12} {:>14}",
            r.scheme,
            r.alpha,
            r.n,
            r.n_steps,
            r.n_exp,
            sci(r.error),
            sci(r.wall_time_total),
            sci(r.wall_time_history),
            r.peak_history_bytes
        )?;
    }
    Ok(paths)
}
