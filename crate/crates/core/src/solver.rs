//! Newton iteration with the angle safeguards, adaptive grid refinement
//! and angle continuation.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use thiserror::Error;

use crate::chebcore::{cheb_points, interp_matrix, resample, ChebGrid};
use crate::error::Error;
use crate::guess::{initial_guess, needs_reflection};
use crate::linalg::{norm2, solve_checked, SolveFailure};
use crate::model::{
    jacobian_flat, residual_flat, select_formulation, Discretization, Formulation, ProblemKind,
    ProblemSpec, StateVector,
};

/// First differences smaller than this fraction of `max(1, max|Ψ|)` count
/// as ties when looking for oscillation. Under-resolved curves on wide flat
/// stretches wiggle at tiny amplitudes, so the floor sits near rounding level.
pub const OSCILLATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative Newton step tolerance `‖dv‖/‖v‖`.
    pub tol_newton: f64,
    /// Relative residual tolerance `‖N(v)‖/‖v‖`.
    pub tol_bvp: f64,
    /// Initial grid size; odd.
    pub n0: usize,
    pub max_iter_newton: usize,
    pub max_iter_bvp: usize,
    /// Grid growth after a Newton or residual failure; even, so parity is kept.
    pub newton_increment: usize,
    pub continuation_steps: usize,
    /// `|Ψ|` above this is reset to `±π` after each Newton step.
    pub psi_clamp: f64,
    /// How many times one Newton run may replace an oscillating `Ψ` by the
    /// linear interpolant between the boundary angles. Off by default: the
    /// reset tends to undo nearly converged iterates on wide domains, and the
    /// outer loop already refines grids whose solutions oscillate.
    pub oscillation_resets: usize,
    pub n_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_newton: 1e-13,
            tol_bvp: 1e-12,
            n0: 15,
            max_iter_newton: 30,
            max_iter_bvp: 100,
            newton_increment: 4,
            continuation_steps: 10,
            psi_clamp: 3.5,
            oscillation_resets: 0,
            n_max: 2001,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(self.tol_newton) || !unit(self.tol_bvp) {
            return bad(format!(
                "tolerances must lie in (0, 1), got tol_newton = {} and tol_bvp = {}",
                self.tol_newton, self.tol_bvp
            ));
        }
        if self.n0 < 5 || self.n0 % 2 == 0 {
            return bad(format!("n0 must be odd and at least 5, got {}", self.n0));
        }
        if self.newton_increment == 0 || self.newton_increment % 2 == 1 {
            return bad(format!("newton_increment must be even and positive, got {}", self.newton_increment));
        }
        if self.max_iter_newton == 0 || self.max_iter_bvp == 0 {
            return bad("iteration caps must be positive".into());
        }
        if self.continuation_steps < 2 {
            return bad(format!("continuation needs at least 2 steps, got {}", self.continuation_steps));
        }
        if !(self.psi_clamp >= PI) {
            return bad(format!("psi_clamp must be at least pi, got {}", self.psi_clamp));
        }
        if self.n_max < self.n0 {
            return bad(format!("n_max {} is below n0 {}", self.n_max, self.n0));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementTrigger {
    NewtonFail,
    ResidualFail,
    Oscillation,
}

impl RefinementTrigger {
    pub fn as_str(self) -> &'static str {
        match self {
            RefinementTrigger::NewtonFail => "newton_fail",
            RefinementTrigger::ResidualFail => "residual_fail",
            RefinementTrigger::Oscillation => "oscillation",
        }
    }
}

/// A grid change: the new size and what forced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Refinement {
    pub n: usize,
    pub trigger: RefinementTrigger,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Problem actually solved (original orientation).
    pub spec: ProblemSpec,
    pub state: StateVector,
    pub grid: ChebGrid,
    /// Newton iterations spent on each grid, in order.
    pub newton_iterations: Vec<usize>,
    /// Newton iterations per continuation step (one entry without continuation).
    pub step_iterations: Vec<usize>,
    pub refinements: Vec<Refinement>,
    pub res_newton_final: f64,
    pub res_bvp_final: f64,
    /// `(ψa, ψb)` of every continuation step.
    pub continuation_trace: Vec<(f64, f64)>,
    /// Seconds.
    pub wall_time: f64,
}

impl SolveReport {
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn total_newton_iterations(&self) -> usize {
        self.newton_iterations.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonFailureReason {
    MaxIters,
    SingularMatrix,
    NonFinite,
}

#[derive(Debug, Clone, Error)]
#[error("Newton iteration stopped ({reason:?}) after {iterations} iterations")]
pub struct NewtonFailure {
    pub reason: NewtonFailureReason,
    pub iterations: usize,
    /// Last finite iterate.
    pub state: StateVector,
    pub res_newton: f64,
    /// `Ψ` of the final iterate oscillates on the refined grid.
    pub oscillating: bool,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub state: StateVector,
    pub iterations: usize,
    pub res_newton: f64,
}

#[derive(Debug, Clone)]
pub struct BvpFailure {
    pub reason: String,
    /// Boundary angles of the failing solve.
    pub angles: (f64, f64),
    pub last_report: Box<SolveReport>,
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("no converged solution for angles ({:.6}, {:.6}): {}", .0.angles.0, .0.angles.1, .0.reason)]
    Bvp(BvpFailure),
}

/// Replace angles beyond the clamp by `±π`. Returns whether anything changed.
fn clamp_in_place(psi: &mut [f64], limit: f64) -> bool {
    let mut changed = false;
    for p in psi.iter_mut() {
        if p.abs() > limit {
            *p = PI.copysign(*p);
            changed = true;
        }
    }
    changed
}

pub fn clamp_psi(v: &StateVector, cfg: &SolverConfig) -> StateVector {
    let mut out = v.clone();
    clamp_in_place(&mut out.psi, cfg.psi_clamp);
    out
}

/// Sign changes between consecutive first differences, ignoring ties.
pub fn count_turns(samples: &[f64]) -> usize {
    let scale = samples.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let floor = OSCILLATION_FLOOR * scale;
    let mut turns = 0;
    let mut last = 0.0_f64;
    for pair in samples.windows(2) {
        let d = pair[1] - pair[0];
        if d.abs() <= floor {
            continue;
        }
        if last != 0.0 && (d > 0.0) != (last > 0.0) {
            turns += 1;
        }
        last = d;
    }
    turns
}

/// Refined sampling used by the oscillation test.
struct OscillationProbe {
    interp: crate::linalg::DenseMatrix,
}

impl OscillationProbe {
    fn new(grid: &ChebGrid) -> Self {
        let fine = cheb_points(2 * grid.n()).expect("refined grid is large enough");
        Self {
            interp: interp_matrix(grid, fine.points()),
        }
    }

    fn oscillates(&self, psi: &[f64]) -> bool {
        count_turns(&self.interp.apply(psi)) >= 2
    }
}

fn linear_psi(grid: &ChebGrid, spec: &ProblemSpec) -> Vec<f64> {
    let (_, left) = spec.left_boundary();
    let (_, right) = spec.right_boundary();
    grid.points()
        .iter()
        .map(|&t| 0.5 * (1.0 - t) * left + 0.5 * (1.0 + t) * right)
        .collect()
}

/// If `Ψ` turns back at least twice on a refined grid, replace it by the
/// linear interpolant between the boundary angles of `spec`.
pub fn oscillation_reset(
    v: &StateVector,
    grid: &ChebGrid,
    spec: &ProblemSpec,
    _cfg: &SolverConfig,
) -> (StateVector, bool) {
    let probe = OscillationProbe::new(grid);
    if probe.oscillates(&v.psi) {
        let mut out = v.clone();
        out.psi = linear_psi(grid, spec);
        (out, true)
    } else {
        (v.clone(), false)
    }
}

/// Full-step Newton iteration on a fixed grid.
pub fn newton_solve(
    spec: &ProblemSpec,
    form: Formulation,
    disc: &Discretization,
    v0: &StateVector,
    cfg: &SolverConfig,
) -> Result<NewtonOutcome, NewtonFailure> {
    let n = disc.n();
    let probe = OscillationProbe::new(disc.grid());
    let reset_psi = linear_psi(disc.grid(), spec);
    let mut v = v0.to_flat();
    let mut res_newton = f64::INFINITY;
    let mut oscillating = false;
    let mut resets = 0;
    let mut iterations = 0;
    // Failures hand back the iterate with the smallest residual; a diverged
    // last iterate makes a useless start on the refined grid.
    let mut best = v.clone();
    let mut best_res = f64::INFINITY;

    let fail = |reason, iterations, v: &[f64], res_newton, oscillating| NewtonFailure {
        reason,
        iterations,
        state: StateVector::from_flat(v).expect("state layout is fixed"),
        res_newton,
        oscillating,
    };

    if v.len() != disc.system_size() {
        return Err(fail(NewtonFailureReason::NonFinite, 0, &v, res_newton, false));
    }

    while iterations < cfg.max_iter_newton {
        iterations += 1;
        let step = residual_flat(spec, form, disc, &v)
            .and_then(|res| jacobian_flat(spec, form, disc, &v).map(|jac| (res, jac)));
        let (res, jac) = match step {
            Ok(pair) => pair,
            Err(_) => return Err(fail(NewtonFailureReason::NonFinite, iterations, &best, res_newton, oscillating)),
        };
        let rel = norm2(&res) / norm2(&v);
        if rel < best_res {
            best_res = rel;
            best.clone_from(&v);
        }
        let dv = match solve_checked(&jac, &res) {
            Ok(dv) => dv,
            Err(SolveFailure::Singular) => {
                return Err(fail(NewtonFailureReason::SingularMatrix, iterations, &best, res_newton, oscillating))
            }
            Err(SolveFailure::NonFinite) => {
                return Err(fail(NewtonFailureReason::NonFinite, iterations, &best, res_newton, oscillating))
            }
        };
        let mut next: Vec<f64> = v.iter().zip(&dv).map(|(a, d)| a - d).collect();
        if next.iter().any(|x| !x.is_finite()) {
            return Err(fail(NewtonFailureReason::NonFinite, iterations, &best, res_newton, oscillating));
        }
        res_newton = norm2(&dv) / norm2(&next);

        let clamped = clamp_in_place(&mut next[2 * n..3 * n], cfg.psi_clamp);
        oscillating = probe.oscillates(&next[2 * n..3 * n]);
        let reset = oscillating && resets < cfg.oscillation_resets;
        if reset {
            next[2 * n..3 * n].copy_from_slice(&reset_psi);
            resets += 1;
        }
        v = next;

        if res_newton <= cfg.tol_newton && !clamped && !reset {
            return Ok(NewtonOutcome {
                state: StateVector::from_flat(&v).expect("state layout is fixed"),
                iterations,
                res_newton,
            });
        }
    }
    Err(fail(NewtonFailureReason::MaxIters, iterations, &best, res_newton, oscillating))
}

/// `‖N(v)‖ / ‖v‖`, infinite when the residual cannot be evaluated.
pub fn relative_residual(spec: &ProblemSpec, disc: &Discretization, v: &StateVector) -> f64 {
    let form = select_formulation(spec);
    match residual_flat(spec, form, disc, &v.to_flat()) {
        Ok(res) => norm2(&res) / v.norm(),
        Err(_) => f64::INFINITY,
    }
}

pub fn resample_state(v: &StateVector, from: &ChebGrid, to: &ChebGrid) -> StateVector {
    let go = |xs: &[f64]| resample(from, xs, to).expect("state matches its grid");
    StateVector {
        r: go(&v.r),
        u: go(&v.u),
        psi: go(&v.psi),
        ell: v.ell,
    }
}

fn next_odd(n: usize) -> usize {
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

/// Bookkeeping shared by the adaptive loop and continuation.
struct Trace {
    newton_iterations: Vec<usize>,
    step_iterations: Vec<usize>,
    refinements: Vec<Refinement>,
    continuation_trace: Vec<(f64, f64)>,
    res_newton: f64,
    res_bvp: f64,
}

impl Trace {
    fn new() -> Self {
        Self {
            newton_iterations: Vec::new(),
            step_iterations: Vec::new(),
            refinements: Vec::new(),
            continuation_trace: Vec::new(),
            res_newton: f64::INFINITY,
            res_bvp: f64::INFINITY,
        }
    }

    fn into_report(self, spec: ProblemSpec, state: StateVector, grid: ChebGrid, started: Instant) -> SolveReport {
        SolveReport {
            spec,
            state,
            grid,
            newton_iterations: self.newton_iterations,
            step_iterations: self.step_iterations,
            refinements: self.refinements,
            res_newton_final: self.res_newton,
            res_bvp_final: self.res_bvp,
            continuation_trace: self.continuation_trace,
            wall_time: started.elapsed().as_secs_f64(),
        }
    }
}

struct Stalled {
    reason: String,
    state: StateVector,
}

/// Outer adaptive loop: Newton on the current grid, grow the grid until
/// the relative residual meets `tol_bvp`.
fn refine(spec: &ProblemSpec, cfg: &SolverConfig, start: StateVector, trace: &mut Trace) -> Result<StateVector, Stalled> {
    let form = select_formulation(spec);
    let mut state = start;
    let step_start = trace.newton_iterations.len();
    let finish_step = |trace: &mut Trace| {
        let spent = trace.newton_iterations[step_start..].iter().sum();
        trace.step_iterations.push(spent);
    };
    for _ in 0..cfg.max_iter_bvp {
        let n = state.n();
        let disc = match Discretization::new(n) {
            Ok(d) => d,
            Err(e) => {
                finish_step(trace);
                return Err(Stalled { reason: e.to_string(), state });
            }
        };
        let (candidate, trigger) = match newton_solve(spec, form, &disc, &state, cfg) {
            Ok(out) => {
                trace.newton_iterations.push(out.iterations);
                trace.res_newton = out.res_newton;
                trace.res_bvp = relative_residual(spec, &disc, &out.state);
                let osc = OscillationProbe::new(disc.grid()).oscillates(&out.state.psi);
                if trace.res_bvp <= cfg.tol_bvp && !osc {
                    finish_step(trace);
                    return Ok(out.state);
                }
                let trigger = if osc {
                    RefinementTrigger::Oscillation
                } else {
                    RefinementTrigger::ResidualFail
                };
                (out.state, trigger)
            }
            Err(fail) => {
                trace.newton_iterations.push(fail.iterations);
                trace.res_newton = fail.res_newton;
                trace.res_bvp = relative_residual(spec, &disc, &fail.state);
                let trigger = if fail.oscillating {
                    RefinementTrigger::Oscillation
                } else {
                    RefinementTrigger::NewtonFail
                };
                (fail.state, trigger)
            }
        };
        let new_n = match trigger {
            RefinementTrigger::Oscillation => next_odd(n + 2 * (n - 1) - 1),
            _ => n + cfg.newton_increment,
        };
        if new_n > cfg.n_max {
            finish_step(trace);
            return Err(Stalled {
                reason: format!("grid would grow to {new_n} points, above n_max = {}", cfg.n_max),
                state: candidate,
            });
        }
        let new_grid = cheb_points(new_n).expect("grid grows");
        state = resample_state(&candidate, disc.grid(), &new_grid);
        trace.refinements.push(Refinement { n: new_n, trigger });
    }
    finish_step(trace);
    Err(Stalled {
        reason: format!("no convergence within max_iter_bvp = {} grid refinements", cfg.max_iter_bvp),
        state,
    })
}

fn flat_report(spec: &ProblemSpec, cfg: &SolverConfig, started: Instant) -> SolveReport {
    let grid = cheb_points(cfg.n0).expect("n0 is validated");
    let state = StateVector::flat(spec, &grid);
    let disc = Discretization::new(cfg.n0).expect("n0 is validated");
    let mut trace = Trace::new();
    trace.res_newton = 0.0;
    trace.res_bvp = relative_residual(spec, &disc, &state);
    trace.step_iterations.push(0);
    trace.continuation_trace.push(spec.angles());
    trace.into_report(*spec, state, grid, started)
}

fn is_flat(spec: &ProblemSpec) -> bool {
    let (pa, pb) = spec.angles();
    pa == 0.0 && pb == 0.0
}

/// Canonical orientation: returns the problem to solve and whether the
/// result must be mirrored back.
fn orient(spec: &ProblemSpec) -> (ProblemSpec, bool) {
    let (pa, pb) = spec.angles();
    if needs_reflection(pa, pb) {
        (spec.with_angles(-spec.psi_a, -spec.psi_b), true)
    } else {
        (*spec, false)
    }
}

fn mirror_angles(angles: (f64, f64), flip: bool) -> (f64, f64) {
    if flip {
        (-angles.0, -angles.1)
    } else {
        angles
    }
}

fn failure(spec: &ProblemSpec, stalled: Stalled, angles: (f64, f64), trace: Trace, started: Instant) -> SolveError {
    let grid = cheb_points(stalled.state.n()).expect("state grid is valid");
    SolveError::Bvp(BvpFailure {
        reason: stalled.reason,
        angles,
        last_report: Box::new(trace.into_report(*spec, stalled.state, grid, started)),
    })
}

/// Adaptive solve for boundary angles within `[-π/2, π/2]`, starting from
/// the arc guess on `cfg.n0` points.
pub fn adaptive_solve(spec: &ProblemSpec, psi_a_t: f64, psi_b_t: f64, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    let target = spec.with_angles(psi_a_t, psi_b_t);
    target.validate()?;
    cfg.validate()?;
    let (pa, pb) = target.angles();
    if pa.abs() > FRAC_PI_2 + 1e-12 || pb.abs() > FRAC_PI_2 + 1e-12 {
        return Err(Error::InvalidProblem(format!(
            "adaptive solve needs |psi| <= pi/2, got ({pa}, {pb}); use continuation"
        ))
        .into());
    }
    let started = Instant::now();
    if is_flat(&target) {
        return Ok(flat_report(&target, cfg, started));
    }
    let (work, flip) = orient(&target);
    let grid = cheb_points(cfg.n0)?;
    let guess = initial_guess(&work, &grid, work.psi_a, work.psi_b)?;
    run_steps(&target, &work, flip, cfg, vec![work.angles()], guess, started)
}

/// Adaptive solve of `spec` from an arbitrary starting state.
pub fn solve_from_state(spec: &ProblemSpec, start: StateVector, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    spec.validate()?;
    cfg.validate()?;
    cheb_points(start.n())?;
    let started = Instant::now();
    run_steps(spec, spec, false, cfg, vec![spec.angles()], start, started)
}

/// Solve any admissible problem, continuing in the boundary angles when
/// some `|ψ| > π/2`.
pub fn continuation_solve(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    spec.validate()?;
    cfg.validate()?;
    let started = Instant::now();
    if is_flat(spec) {
        return Ok(flat_report(spec, cfg, started));
    }
    let (work, flip) = orient(spec);
    let clamp = |p: f64| p.clamp(-FRAC_PI_2, FRAC_PI_2);
    let start_a = if work.kind == ProblemKind::P1 { 0.0 } else { clamp(work.psi_a) };
    let start_b = clamp(work.psi_b);
    let steep = start_b != work.psi_b || (work.kind != ProblemKind::P1 && start_a != work.psi_a);

    let schedule: Vec<(f64, f64)> = if steep {
        let last = (cfg.continuation_steps - 1) as f64;
        (0..cfg.continuation_steps)
            .map(|k| {
                let w = k as f64 / last;
                let lerp = |s: f64, t: f64| if k + 1 == cfg.continuation_steps { t } else { s + (t - s) * w };
                (lerp(start_a, work.psi_a), lerp(start_b, work.psi_b))
            })
            .map(|(pa, pb)| work.with_angles(pa, pb).angles())
            .collect()
    } else {
        vec![work.angles()]
    };

    let first = work.with_angles(schedule[0].0, schedule[0].1);
    let grid = cheb_points(cfg.n0)?;
    let guess = initial_guess(&first, &grid, first.angles().0, first.angles().1)?;
    run_steps(spec, &work, flip, cfg, schedule, guess, started)
}

fn run_steps(
    original: &ProblemSpec,
    work: &ProblemSpec,
    flip: bool,
    cfg: &SolverConfig,
    schedule: Vec<(f64, f64)>,
    start: StateVector,
    started: Instant,
) -> Result<SolveReport, SolveError> {
    let mut trace = Trace::new();
    let mut state = start;
    for &(pa, pb) in &schedule {
        let step = work.with_angles(pa, pb);
        trace.continuation_trace.push(mirror_angles(step.angles(), flip));
        match refine(&step, cfg, state, &mut trace) {
            Ok(next) => state = next,
            Err(mut stalled) => {
                if flip {
                    stalled.state = stalled.state.reflected();
                }
                return Err(failure(original, stalled, mirror_angles(step.angles(), flip), trace, started));
            }
        }
    }
    let state = if flip { state.reflected() } else { state };
    let grid = cheb_points(state.n())?;
    Ok(trace.into_report(*original, state, grid, started))
}

#[cfg(test)]
mod invariants;
