//! Converged solves flattened into exportable tables.

use anyhow::{Context, Result};
use capspec_core::chebcore::square_diffmat;
use capspec_core::{bary_eval, ChebGrid, ProblemKind, ProblemSpec, SolveReport, SolverConfig, StateVector};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Equispaced samples per Chebyshev node in exported curves.
pub const SAMPLES_PER_NODE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub r: f64,
    pub u: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub psi_a: f64,
    pub psi_b: f64,
    pub kappa: f64,
    pub tol_newton: f64,
    pub tol_bvp: f64,
    pub n0: usize,
    pub max_iter_newton: usize,
    pub max_iter_bvp: usize,
}

impl Params {
    pub fn new(spec: &ProblemSpec, cfg: &SolverConfig) -> Self {
        Params {
            a: spec.a,
            b: spec.b,
            psi_a: spec.psi_a,
            psi_b: spec.psi_b,
            kappa: spec.kappa,
            tol_newton: cfg.tol_newton,
            tol_bvp: cfg.tol_bvp,
            n0: cfg.n0,
            max_iter_newton: cfg.max_iter_newton,
            max_iter_bvp: cfg.max_iter_bvp,
        }
    }
}

/// JSON layout of a converged run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub params: Params,
    pub n: usize,
    pub ell: f64,
    pub res_newton: f64,
    pub res_bvp: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub nodes: Vec<Sample>,
    pub samples: Vec<Sample>,
}

fn evaluate(grid: &ChebGrid, state: &StateVector, taus: &[f64]) -> Vec<Sample> {
    let at = |v: &[f64]| bary_eval(grid, v, taus).expect("sample points lie in [-1, 1]");
    let (r, u, psi) = (at(&state.r), at(&state.u), at(&state.psi));
    (0..taus.len())
        .map(|i| Sample {
            tau: taus[i],
            r: r[i],
            u: u[i],
            psi: psi[i],
        })
        .collect()
}

/// `m` equispaced points in `[-1, 1]` merged with the grid nodes.
fn sample_taus(grid: &ChebGrid, m: usize) -> Vec<f64> {
    let mut taus: Vec<f64> = (0..m).map(|k| -1.0 + 2.0 * k as f64 / (m - 1) as f64).collect();
    taus.extend_from_slice(grid.points());
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus
}

impl RunRecord {
    pub fn new(report: &SolveReport, cfg: &SolverConfig) -> Self {
        let grid = &report.grid;
        let state = &report.state;
        let nodes = (0..grid.n())
            .map(|j| Sample {
                tau: grid.points()[j],
                r: state.r[j],
                u: state.u[j],
                psi: state.psi[j],
            })
            .collect();
        let samples = evaluate(grid, state, &sample_taus(grid, SAMPLES_PER_NODE * grid.n()));
        RunRecord {
            problem: report.spec.kind.as_str().to_string(),
            params: Params::new(&report.spec, cfg),
            n: grid.n(),
            ell: state.ell,
            res_newton: report.res_newton_final,
            res_bvp: report.res_bvp_final,
            iterations: report.total_newton_iterations(),
            wall_time_s: report.wall_time,
            nodes,
            samples,
        }
    }

    pub fn kind(&self) -> Result<ProblemKind> {
        match self.problem.as_str() {
            "p1" => Ok(ProblemKind::P1),
            "p2" => Ok(ProblemKind::P2),
            "p3" => Ok(ProblemKind::P3),
            other => anyhow::bail!("unknown problem {other:?}"),
        }
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        let p = &self.params;
        let spec = ProblemSpec {
            kind: self.kind()?,
            a: p.a,
            b: p.b,
            psi_a: p.psi_a,
            psi_b: p.psi_b,
            kappa: p.kappa,
        };
        Ok(spec.validated()?)
    }

    /// State rebuilt from the node table.
    pub fn state(&self) -> StateVector {
        StateVector {
            r: self.nodes.iter().map(|s| s.r).collect(),
            u: self.nodes.iter().map(|s| s.u).collect(),
            psi: self.nodes.iter().map(|s| s.psi).collect(),
            ell: self.ell,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        for s in &self.samples {
            w.serialize(s)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).with_context(|| format!("writing {}", path.display()))
    }

    /// Write JSON or CSV depending on the extension of `path`.
    pub fn export(&self, path: &Path) -> Result<()> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => self.write_json(path),
            Some("csv") => self.write_csv(path),
            _ => anyhow::bail!("{}: output must end in .json or .csv", path.display()),
        }
    }
}

/// Lowest point of a curve and the stretch where it sits below `height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimumAnalysis {
    pub u_min: f64,
    pub tau_min: f64,
    pub x_min: f64,
    /// `(τ, x)` where the curve crosses `height` on either side of the minimum.
    pub band: Option<((f64, f64), (f64, f64))>,
}

impl MinimumAnalysis {
    pub fn band_length(&self) -> Option<f64> {
        self.band.map(|((_, x0), (_, x1))| x1 - x0)
    }
}

const SCAN_PER_NODE: usize = 40;

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Locate the minimum of `U` and the crossings of `U = height` around it.
pub fn analyze_minimum(grid: &ChebGrid, state: &StateVector, height: f64) -> MinimumAnalysis {
    let m = SCAN_PER_NODE * grid.n();
    let taus: Vec<f64> = (0..m).map(|k| -1.0 + 2.0 * k as f64 / (m - 1) as f64).collect();
    let u = bary_eval(grid, &state.u, &taus).expect("scan points lie in [-1, 1]");
    let (k, _) = u
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bk, bv), (k, &v)| if v < bv { (k, v) } else { (bk, bv) });

    let u_at = |t: f64| bary_eval(grid, &state.u, &[t]).expect("in range")[0];
    let x_at = |t: f64| bary_eval(grid, &state.r, &[t]).expect("in range")[0];

    // Polish the scan minimum on the derivative when it is interior.
    let du = square_diffmat(grid).apply(&state.u);
    let slope = |t: f64| bary_eval(grid, &du, &[t]).expect("in range")[0];
    let mut tau_min = taus[k];
    if k > 0 && k + 1 < m && slope(taus[k - 1]) < 0.0 && slope(taus[k + 1]) > 0.0 {
        let t = bisect(slope, taus[k - 1], taus[k + 1]);
        if u_at(t) <= u[k] {
            tau_min = t;
        }
    }
    let u_min = u_at(tau_min);

    let above = |t: f64| u_at(t) - height;
    let left = (0..k).rev().find(|&j| u[j] > height).map(|j| bisect(above, taus[j], taus[j + 1]));
    let right = (k + 1..m).find(|&j| u[j] > height).map(|j| bisect(above, taus[j - 1], taus[j]));
    let band = match (left, right) {
        (Some(l), Some(r)) if u_min < height => Some(((l, x_at(l)), (r, x_at(r)))),
        _ => None,
    };
    MinimumAnalysis {
        u_min,
        tau_min,
        x_min: x_at(tau_min),
        band,
    }
}
