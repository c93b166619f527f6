//! Batch fixtures reproducing the published result tables.

use crate::angle::pi_frac;
use crate::record::{analyze_minimum, MinimumAnalysis};
use anyhow::{Context, Result};
use capspec_core::{continuation_solve, ProblemKind, ProblemSpec, SolveError, SolveReport, SolverConfig};
use clap::ValueEnum;
use rayon::prelude::*;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableId {
    Disc1,
    Disc2,
    Ann1,
    Ann2,
    Ann3,
    Fig8,
}

impl TableId {
    pub fn as_str(self) -> &'static str {
        match self {
            TableId::Disc1 => "disc1",
            TableId::Disc2 => "disc2",
            TableId::Ann1 => "ann1",
            TableId::Ann2 => "ann2",
            TableId::Ann3 => "ann3",
            TableId::Fig8 => "fig8",
        }
    }

    /// Solver settings of the fixture; the wide planar gap needs more room.
    pub fn config(self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if self == TableId::Fig8 {
            cfg.max_iter_newton = 100;
            cfg.max_iter_bvp = 500;
        }
        cfg
    }

    /// Every solve of the fixture, κ = 1.
    pub fn rows(self) -> Vec<ProblemSpec> {
        let p1 = |b: f64, psi: f64| ProblemSpec::p1(b, psi, 1.0).expect("fixture spec");
        let both = |a: f64, b: f64, pa: f64, pb: f64| {
            [
                ProblemSpec::p2(a, b, pa, pb, 1.0).expect("fixture spec"),
                ProblemSpec::p3(a, b, pa, pb, 1.0).expect("fixture spec"),
            ]
        };
        let mut rows = vec![];
        match self {
            TableId::Disc1 => {
                for (k, m) in [(1, 6), (1, 3), (1, 2), (2, 3), (1, 1)] {
                    rows.push(p1(1.0, pi_frac(k, m)));
                }
            }
            TableId::Disc2 => {
                for b in [0.05, 0.1, 0.5, 1.0, 2.0, 10.0, 20.0] {
                    rows.push(p1(b, pi_frac(3, 8)));
                    rows.push(p1(b, pi_frac(7, 8)));
                }
            }
            TableId::Ann1 => {
                for (k, m) in [(1, 6), (1, 3), (1, 2), (2, 3), (1, 1)] {
                    for (ka, ma) in [(0, 1), (-1, 6), (-1, 3), (-1, 2), (-2, 3), (-1, 1)] {
                        for sign in [1, -1] {
                            rows.extend(both(1.0, 3.0, pi_frac(ka, ma), pi_frac(sign * k, m)));
                        }
                    }
                }
            }
            TableId::Ann2 => {
                for (ka, kb) in [(-3, 3), (-3, 7), (-7, 3), (-7, 7)] {
                    for b in [1.05, 1.1, 1.5, 2.0, 10.0, 15.0] {
                        for sign in [1, -1] {
                            rows.extend(both(1.0, b, pi_frac(ka, 8), pi_frac(sign * kb, 8)));
                        }
                    }
                }
            }
            TableId::Ann3 => {
                for (ka, kb) in [(-3, 3), (-3, 5), (-5, 3), (-5, 5)] {
                    for a in [0.1, 0.5] {
                        for sign in [1, -1] {
                            rows.extend(both(a, 1.0, pi_frac(ka, 8), pi_frac(sign * kb, 8)));
                        }
                    }
                }
            }
            TableId::Fig8 => {
                for b in [100.0, 99.0] {
                    rows.push(ProblemSpec::p3(1.0, b, pi_frac(-7, 8), pi_frac(7, 8), 1.0).expect("fixture spec"));
                }
            }
        }
        rows
    }
}

#[derive(Debug)]
pub struct RowResult {
    pub spec: ProblemSpec,
    pub outcome: Result<SolveReport, SolveError>,
    /// Only for fig8.
    pub minimum: Option<MinimumAnalysis>,
}

/// Solve every row of `id` on `jobs` threads, keeping fixture order.
pub fn run_table(id: TableId, jobs: usize) -> Result<Vec<RowResult>> {
    let cfg = id.config();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("starting worker threads")?;
    let rows = id.rows();
    Ok(pool.install(|| {
        rows.par_iter()
            .map(|spec| {
                let outcome = continuation_solve(spec, &cfg);
                let minimum = match (&outcome, id) {
                    (Ok(report), TableId::Fig8) => Some(analyze_minimum(&report.grid, &report.state, cfg.tol_bvp)),
                    _ => None,
                };
                RowResult {
                    spec: *spec,
                    outcome,
                    minimum,
                }
            })
            .collect()
    }))
}

fn angle_cell(x: f64) -> String {
    format!("{x}")
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

pub fn table_csv(id: TableId, results: &[RowResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    let mut header = vec![
        "problem",
        "a",
        "b",
        "psi_a",
        "psi_b",
        "n_final",
        "newton_iters_total",
        "res_bvp",
        "wall_time_s",
    ];
    if id == TableId::Fig8 {
        header.extend(["u_min", "tau_min", "x_min", "band_length"]);
    }
    w.write_record(&header)?;
    for row in results {
        let s = &row.spec;
        let mut rec = vec![
            s.kind.as_str().to_string(),
            format!("{}", s.a),
            format!("{}", s.b),
            angle_cell(s.psi_a),
            angle_cell(s.psi_b),
        ];
        match &row.outcome {
            Ok(r) => rec.extend([
                r.n().to_string(),
                r.total_newton_iterations().to_string(),
                format!("{}", r.res_bvp_final),
                format!("{}", r.wall_time),
            ]),
            Err(_) => rec.extend(std::iter::repeat_n(String::new(), 4)),
        }
        if id == TableId::Fig8 {
            let m = row.minimum;
            rec.extend([
                opt_cell(m.map(|m| m.u_min)),
                opt_cell(m.map(|m| m.tau_min)),
                opt_cell(m.map(|m| m.x_min)),
                opt_cell(m.and_then(|m| m.band_length())),
            ]);
        }
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn write_table_csv(id: TableId, results: &[RowResult], path: &Path) -> Result<()> {
    std::fs::write(path, table_csv(id, results)?).with_context(|| format!("writing {}", path.display()))
}

pub fn row_label(spec: &ProblemSpec) -> String {
    match spec.kind {
        ProblemKind::P1 => format!("p1 b={} psi_b={}", spec.b, spec.psi_b),
        k => format!("{k} a={} b={} psi_a={} psi_b={}", spec.a, spec.b, spec.psi_a, spec.psi_b),
    }
}
