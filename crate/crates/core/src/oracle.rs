//! Independent check of collocation solutions: integrate the generating
//! curve ODEs in arclength with classical RK4 from a point of the computed
//! curve and compare against the curve's interpolant.
//!
//! Only the barycentric interpolant is shared with the solver.

use crate::chebcore::{bary_eval, ChebGrid};
use crate::error::Error;
use crate::model::{ProblemKind, ProblemSpec, StateVector};

/// Fewest RK4 steps `validate` will take.
pub const MIN_STEPS: usize = 1000;

const CHECKPOINTS: usize = 20;

/// Start of the integration for disk problems; the axis `r = 0` is singular.
const P1_START: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpState {
    pub r: f64,
    pub u: f64,
    pub psi: f64,
}

impl IvpState {
    fn axpy(self, h: f64, d: IvpState) -> IvpState {
        IvpState {
            r: self.r + h * d.r,
            u: self.u + h * d.u,
            psi: self.psi + h * d.psi,
        }
    }

    fn distance(self, other: IvpState) -> f64 {
        (self.r - other.r)
            .abs()
            .max((self.u - other.u).abs())
            .max((self.psi - other.psi).abs())
    }
}

fn rhs(kind: ProblemKind, kappa: f64, y: IvpState) -> IvpState {
    let (s, c) = y.psi.sin_cos();
    let bend = match kind {
        ProblemKind::P3 => kappa * y.u,
        _ => kappa * y.u - s / y.r,
    };
    IvpState { r: c, u: s, psi: bend }
}

/// Integrate over arclength `length` with `steps` equal RK4 steps.
pub fn integrate(kind: ProblemKind, kappa: f64, init: IvpState, length: f64, steps: usize) -> IvpState {
    let h = length / steps as f64;
    let mut y = init;
    for _ in 0..steps {
        let k1 = rhs(kind, kappa, y);
        let k2 = rhs(kind, kappa, y.axpy(0.5 * h, k1));
        let k3 = rhs(kind, kappa, y.axpy(0.5 * h, k2));
        let k4 = rhs(kind, kappa, y.axpy(h, k3));
        y = IvpState {
            r: y.r + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r),
            u: y.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            psi: y.psi + h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi),
        };
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationResult {
    /// `|r(end) − b|`.
    pub endpoint_position_error: f64,
    /// `|ψ(end) − ψb|`.
    pub endpoint_angle_error: f64,
    /// Largest componentwise gap to the interpolant at the checkpoints.
    pub interior_max_error: f64,
}

impl ValidationResult {
    pub fn max_error(&self) -> f64 {
        self.endpoint_position_error
            .max(self.endpoint_angle_error)
            .max(self.interior_max_error)
    }
}

fn sample(grid: &ChebGrid, state: &StateVector, t: f64) -> Result<IvpState, Error> {
    let at = |xs: &[f64]| bary_eval(grid, xs, &[t]).map(|v| v[0]);
    Ok(IvpState {
        r: at(&state.r)?,
        u: at(&state.u)?,
        psi: at(&state.psi)?,
    })
}

/// Integrate from the computed curve and measure the disagreement. Uses
/// at least `steps` RK4 steps, rounded up to fill the checkpoints evenly.
pub fn validate(spec: &ProblemSpec, grid: &ChebGrid, state: &StateVector, steps: usize) -> Result<ValidationResult, Error> {
    if state.n() != grid.n() {
        return Err(Error::DimensionMismatch {
            expected: grid.n(),
            got: state.n(),
        });
    }
    let t0 = match spec.kind {
        ProblemKind::P1 => P1_START,
        _ => -1.0,
    };
    let segments = CHECKPOINTS + 1;
    let per_segment = steps.max(MIN_STEPS).div_ceil(segments);
    let dt = (1.0 - t0) / segments as f64;

    let mut y = sample(grid, state, t0)?;
    let mut interior = 0.0_f64;
    for k in 1..=segments {
        y = integrate(spec.kind, spec.kappa, y, state.ell * dt, per_segment);
        if k < segments {
            let expect = sample(grid, state, t0 + k as f64 * dt)?;
            interior = interior.max(y.distance(expect));
        }
    }
    let (b, psi_b) = spec.right_boundary();
    Ok(ValidationResult {
        endpoint_position_error: (y.r - b).abs(),
        endpoint_angle_error: (y.psi - psi_b).abs(),
        interior_max_error: interior,
    })
}
