//! Command-line front end: single solves, fixture tables, and exports.

pub mod angle;
pub mod args;
pub mod record;
pub mod svg;
pub mod table;

use anyhow::{Context, Result};
use args::{Cli, Command, OutputArgs, SolverArgs, TableArgs};
use capspec_core::{continuation_solve, BvpFailure, ProblemSpec, SolveError, SolverConfig};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use record::{analyze_minimum, RunRecord};
use serde::Serialize;
use std::ffi::OsString;
use std::path::Path;
use svg::PlotOptions;
use table::{row_label, run_table, write_table_csv, TableId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

/// Environment override for the number of table workers.
pub const JOBS_ENV: &str = "CAPSPEC_JOBS";

enum Failure {
    Usage { subcommand: &'static str, message: String },
    Solver(String),
    Io(anyhow::Error),
}

fn usage(subcommand: &'static str, message: impl ToString) -> Failure {
    Failure::Usage {
        subcommand,
        message: message.to_string(),
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => {
                    // Value errors come without the usage line.
                    if !e.render().to_string().contains("Usage:") {
                        eprintln!("\n{}", Cli::command().render_usage());
                    }
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::P1(a) => ProblemSpec::p1(a.b, a.psib, a.solver.kappa)
            .map_err(|e| usage("p1", e))
            .and_then(|spec| run_single("p1", spec, &a.solver, &a.output)),
        Command::P2(a) => ProblemSpec::p2(a.a, a.b, a.psia, a.psib, a.solver.kappa)
            .map_err(|e| usage("p2", e))
            .and_then(|spec| run_single("p2", spec, &a.solver, &a.output)),
        Command::P3(a) => ProblemSpec::p3(a.a, a.b, a.psia, a.psib, a.solver.kappa)
            .map_err(|e| usage("p3", e))
            .and_then(|spec| run_single("p3", spec, &a.solver, &a.output)),
        Command::Table(a) => run_table_command(&a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage { subcommand, message }) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd
                .find_subcommand_mut(subcommand)
                .map(|c| c.render_usage().to_string())
                .unwrap_or_default();
            eprintln!("error: {message}\n\n{usage}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::Solver(diagnostics)) => {
            eprintln!("{diagnostics}");
            EXIT_SOLVER
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn solver_config(args: &SolverArgs) -> Result<SolverConfig, capspec_core::Error> {
    let mut cfg = SolverConfig::default();
    if let Some(v) = args.tol_newton {
        cfg.tol_newton = v;
    }
    if let Some(v) = args.tol_bvp {
        cfg.tol_bvp = v;
    }
    if let Some(v) = args.n0 {
        cfg.n0 = v;
    }
    if let Some(v) = args.max_iter_newton {
        cfg.max_iter_newton = v;
    }
    if let Some(v) = args.max_iter_bvp {
        cfg.max_iter_bvp = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct RefinementEntry {
    n: usize,
    trigger: &'static str,
}

#[derive(Serialize)]
struct FailureReport<'a> {
    status: &'static str,
    problem: &'static str,
    params: record::Params,
    reason: &'a str,
    failed_angles: [f64; 2],
    n: usize,
    refinements: Vec<RefinementEntry>,
    newton_iterations: &'a [usize],
    res_newton: f64,
    res_bvp: f64,
    wall_time_s: f64,
}

/// JSON diagnostics for a solve that did not converge.
pub fn failure_json(spec: &ProblemSpec, cfg: &SolverConfig, failure: &BvpFailure) -> String {
    let last = &failure.last_report;
    let report = FailureReport {
        status: "failed",
        problem: spec.kind.as_str(),
        params: record::Params::new(spec, cfg),
        reason: &failure.reason,
        failed_angles: [failure.angles.0, failure.angles.1],
        n: last.n(),
        refinements: last
            .refinements
            .iter()
            .map(|r| RefinementEntry {
                n: r.n,
                trigger: r.trigger.as_str(),
            })
            .collect(),
        newton_iterations: &last.newton_iterations,
        res_newton: last.res_newton_final,
        res_bvp: last.res_bvp_final,
        wall_time_s: last.wall_time,
    };
    serde_json::to_string(&report).expect("diagnostics serialize")
}

fn check_output_paths(subcommand: &'static str, out: &OutputArgs) -> Result<(), Failure> {
    if let Some(path) = &out.out {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json" | "csv") => {}
            _ => return Err(usage(subcommand, format!("--out {}: expected a .json or .csv path", path.display()))),
        }
    }
    if let Some(path) = &out.plot {
        if path.extension().and_then(|e| e.to_str()) != Some("svg") {
            return Err(usage(subcommand, format!("--plot {}: expected an .svg path", path.display())));
        }
    }
    Ok(())
}

fn run_single(subcommand: &'static str, spec: ProblemSpec, solver: &SolverArgs, out: &OutputArgs) -> Result<(), Failure> {
    let cfg = solver_config(solver).map_err(|e| usage(subcommand, e))?;
    check_output_paths(subcommand, out)?;
    let report = match continuation_solve(&spec, &cfg) {
        Ok(r) => r,
        Err(SolveError::Bvp(f)) => return Err(Failure::Solver(failure_json(&spec, &cfg, &f))),
        Err(SolveError::Invalid(e)) => return Err(usage(subcommand, e)),
    };
    let record = RunRecord::new(&report, &cfg);
    if let Some(path) = &out.out {
        record.export(path).map_err(Failure::Io)?;
    }
    if let Some(path) = &out.plot {
        let highlight = out.mark_min.then(|| {
            let m = analyze_minimum(&report.grid, &report.state, cfg.tol_bvp);
            (m.x_min, m.u_min)
        });
        let opts = PlotOptions {
            equal_axes: !out.stretch,
            highlight,
        };
        svg::write_svg(&record, &opts, path).map_err(Failure::Io)?;
    }
    if !out.quiet {
        println!(
            "{} converged: n={} ell={} res_newton={:e} res_bvp={:e} iterations={} time={:.4}s",
            row_label(&spec),
            record.n,
            record.ell,
            record.res_newton,
            record.res_bvp,
            record.iterations,
            record.wall_time_s
        );
    }
    Ok(())
}

/// Worker count: the environment wins over the flag, which wins over the
/// machine's parallelism.
pub fn resolve_jobs(flag: Option<usize>, env: Option<&str>) -> Result<usize, String> {
    if let Some(text) = env {
        return match text.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("{JOBS_ENV}={text:?}: expected a positive integer")),
        };
    }
    match flag {
        Some(0) => Err("--jobs must be positive".into()),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn write_plots(id: TableId, results: &[table::RowResult], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let cfg = id.config();
    for (k, row) in results.iter().enumerate() {
        if let Ok(report) = &row.outcome {
            let record = RunRecord::new(report, &cfg);
            let opts = PlotOptions {
                equal_axes: id != TableId::Fig8,
                highlight: row.minimum.map(|m| (m.x_min, m.u_min)),
            };
            svg::write_svg(&record, &opts, &dir.join(format!("{}_{:03}.svg", id.as_str(), k)))?;
        }
    }
    Ok(())
}

fn run_table_command(args: &TableArgs) -> Result<(), Failure> {
    let env = std::env::var(JOBS_ENV).ok();
    let jobs = resolve_jobs(args.jobs, env.as_deref()).map_err(|e| usage("table", e))?;
    if let Some(path) = &args.out {
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            return Err(usage("table", format!("--out {}: expected a .csv path", path.display())));
        }
    }
    let results = run_table(args.id, jobs).map_err(Failure::Io)?;
    match &args.out {
        Some(path) => write_table_csv(args.id, &results, path).map_err(Failure::Io)?,
        None => print!("{}", table::table_csv(args.id, &results).map_err(Failure::Io)?),
    }
    if let Some(dir) = &args.plot_dir {
        write_plots(args.id, &results, dir).map_err(Failure::Io)?;
    }
    let failed: Vec<String> = results
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| format!("failed: {}: {e}", row_label(&r.spec))))
        .collect();
    if !args.quiet {
        eprintln!(
            "{}: {}/{} rows converged",
            args.id.as_str(),
            results.len() - failed.len(),
            results.len()
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Solver(failed.join("\n")))
    }
}
