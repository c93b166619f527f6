//! Problem definitions and the discretized operator `N(v)` with its
//! Fréchet derivative.
//!
//! The state `v = [R; U; Ψ; ℓ]` holds nodal values on an `n`-point grid and
//! the half arclength `ℓ`. Rows of `N` are ordered as the three collocated
//! equations (each on the `n - 1` down-sampled points) followed by the
//! boundary rows `R(-1)`, `R(1)`, `Ψ(-1)`, `Ψ(1)`.

use std::f64::consts::PI;

use crate::chebcore::{cheb_points, diffmat, ChebGrid, RectOp};
use crate::error::Error;
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Disk-type interface, symmetric about the vertical axis.
    P1,
    /// Annular interface between radii `a` and `b`.
    P2,
    /// Lower-dimensional (planar) interface between abscissae `a` and `b`.
    P3,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::P1 => "p1",
            ProblemKind::P2 => "p2",
            ProblemKind::P3 => "p3",
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Physical data of one boundary value problem.
///
/// For `P1` the fields `a` and `psi_a` are ignored; the left boundary is
/// pinned to `(-b, -psi_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub a: f64,
    pub b: f64,
    pub psi_a: f64,
    pub psi_b: f64,
    pub kappa: f64,
}

// Angles parsed from "pi" land exactly on π; allow a hair of slack for
// decimal input.
const ANGLE_SLACK: f64 = 1e-12;

impl ProblemSpec {
    pub fn p1(b: f64, psi_b: f64, kappa: f64) -> Result<Self, Error> {
        Self {
            kind: ProblemKind::P1,
            a: 0.0,
            b,
            psi_a: 0.0,
            psi_b,
            kappa,
        }
        .validated()
    }

    pub fn p2(a: f64, b: f64, psi_a: f64, psi_b: f64, kappa: f64) -> Result<Self, Error> {
        Self {
            kind: ProblemKind::P2,
            a,
            b,
            psi_a,
            psi_b,
            kappa,
        }
        .validated()
    }

    pub fn p3(a: f64, b: f64, psi_a: f64, psi_b: f64, kappa: f64) -> Result<Self, Error> {
        Self {
            kind: ProblemKind::P3,
            a,
            b,
            psi_a,
            psi_b,
            kappa,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self, Error> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        let angle_ok = |psi: f64| psi.is_finite() && psi.abs() <= PI + ANGLE_SLACK;
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return bad(format!("capillary constant must be positive, got {}", self.kappa));
        }
        if !self.b.is_finite() {
            return bad(format!("radius b must be finite, got {}", self.b));
        }
        if !angle_ok(self.psi_b) {
            return bad(format!("psi_b must lie in [-pi, pi], got {}", self.psi_b));
        }
        match self.kind {
            ProblemKind::P1 => {
                if self.b <= 0.0 {
                    return bad(format!("radius b must be positive, got {}", self.b));
                }
            }
            ProblemKind::P2 | ProblemKind::P3 => {
                if !angle_ok(self.psi_a) {
                    return bad(format!("psi_a must lie in [-pi, pi], got {}", self.psi_a));
                }
                if !self.a.is_finite() {
                    return bad(format!("a must be finite, got {}", self.a));
                }
                if self.kind == ProblemKind::P2 && self.a <= 0.0 {
                    return bad(format!("inner radius a must be positive, got {}", self.a));
                }
                if self.a >= self.b {
                    return bad(format!("need a < b, got a = {} and b = {}", self.a, self.b));
                }
            }
        }
        Ok(())
    }

    /// Prescribed `(position, angle)` at `τ = -1`.
    pub fn left_boundary(&self) -> (f64, f64) {
        match self.kind {
            ProblemKind::P1 => (-self.b, -self.psi_b),
            _ => (self.a, self.psi_a),
        }
    }

    /// Prescribed `(position, angle)` at `τ = 1`.
    pub fn right_boundary(&self) -> (f64, f64) {
        (self.b, self.psi_b)
    }

    /// Same geometry with different boundary angles. `psi_a` is ignored for P1.
    pub fn with_angles(&self, psi_a: f64, psi_b: f64) -> Self {
        let mut out = *self;
        out.psi_b = psi_b;
        if self.kind != ProblemKind::P1 {
            out.psi_a = psi_a;
        }
        out
    }

    /// `(psi_a, psi_b)`, with `psi_a` reported as `-psi_b` for P1.
    pub fn angles(&self) -> (f64, f64) {
        (self.left_boundary().1, self.psi_b)
    }
}

/// Unknowns of the collocation system on an `n`-point grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    /// `R` for P1/P2, `X` for P3.
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub psi: Vec<f64>,
    /// Half arclength.
    pub ell: f64,
}

impl StateVector {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Flattened `[R; U; Ψ; ℓ]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.n() + 1);
        v.extend_from_slice(&self.r);
        v.extend_from_slice(&self.u);
        v.extend_from_slice(&self.psi);
        v.push(self.ell);
        v
    }

    pub fn from_flat(v: &[f64]) -> Result<Self, Error> {
        if v.len() < 13 || (v.len() - 1) % 3 != 0 {
            return Err(Error::DimensionMismatch {
                expected: 3 * (v.len().saturating_sub(1) / 3) + 1,
                got: v.len(),
            });
        }
        let n = (v.len() - 1) / 3;
        Ok(Self {
            r: v[..n].to_vec(),
            u: v[n..2 * n].to_vec(),
            psi: v[2 * n..3 * n].to_vec(),
            ell: v[3 * n],
        })
    }

    pub fn norm(&self) -> f64 {
        let sq = |xs: &[f64]| xs.iter().map(|x| x * x).sum::<f64>();
        (sq(&self.r) + sq(&self.u) + sq(&self.psi) + self.ell * self.ell).sqrt()
    }

    /// Mirror image about the horizontal axis: `U → -U`, `Ψ → -Ψ`.
    pub fn reflected(&self) -> Self {
        Self {
            r: self.r.clone(),
            u: self.u.iter().map(|x| -x).collect(),
            psi: self.psi.iter().map(|x| -x).collect(),
            ell: self.ell,
        }
    }

    /// Exact flat interface of `spec` on `grid` (all angles zero).
    pub fn flat(spec: &ProblemSpec, grid: &ChebGrid) -> Self {
        let (left, _) = spec.left_boundary();
        let mid = 0.5 * (left + spec.b);
        let half = 0.5 * (spec.b - left);
        let n = grid.n();
        Self {
            r: grid.points().iter().map(|&t| mid + half * t).collect(),
            u: vec![0.0; n],
            psi: vec![0.0; n],
            ell: half,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// `Ψ' + ℓ sinΨ / R − κℓU`.
    Divided,
    /// `RΨ' + ℓ sinΨ − κℓRU`, free of the division by `R`.
    Multiplied,
    /// `Ψ' − κℓU` for the lower-dimensional problem.
    Planar,
}

pub fn select_formulation(spec: &ProblemSpec) -> Formulation {
    match spec.kind {
        ProblemKind::P1 if spec.b <= 1.0 => Formulation::Multiplied,
        ProblemKind::P2 if spec.a <= 1.0 => Formulation::Multiplied,
        ProblemKind::P1 | ProblemKind::P2 => Formulation::Divided,
        ProblemKind::P3 => Formulation::Planar,
    }
}

fn check_formulation(spec: &ProblemSpec, form: Formulation) -> Result<(), Error> {
    let planar = spec.kind == ProblemKind::P3;
    if planar != (form == Formulation::Planar) {
        return Err(Error::InvalidProblem(format!(
            "formulation {form:?} does not apply to problem {}",
            spec.kind
        )));
    }
    Ok(())
}

/// Grid together with its down-sampling (`d0`) and differentiation (`d1`)
/// operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: ChebGrid,
    target: ChebGrid,
    d0: RectOp,
    d1: RectOp,
}

impl Discretization {
    pub fn new(n: usize) -> Result<Self, Error> {
        let grid = cheb_points(n)?;
        let target = cheb_points(n - 1)?;
        Ok(Self {
            d0: diffmat(n - 1, n, 0)?,
            d1: diffmat(n - 1, n, 1)?,
            grid,
            target,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn grid(&self) -> &ChebGrid {
        &self.grid
    }

    /// The `(n - 1)`-point collocation grid.
    pub fn target(&self) -> &ChebGrid {
        &self.target
    }

    pub fn d0(&self) -> &RectOp {
        &self.d0
    }

    pub fn d1(&self) -> &RectOp {
        &self.d1
    }

    /// Size of the square system, `3n + 1`.
    pub fn system_size(&self) -> usize {
        3 * self.n() + 1
    }
}

/// Collocated fields shared by the residual and Jacobian.
struct Collocated {
    r: Vec<f64>,
    u: Vec<f64>,
    psi: Vec<f64>,
    dr: Vec<f64>,
    du: Vec<f64>,
    dpsi: Vec<f64>,
    ell: f64,
}

fn collocate(disc: &Discretization, v: &[f64]) -> Result<Collocated, Error> {
    let n = disc.n();
    if v.len() != 3 * n + 1 {
        return Err(Error::DimensionMismatch {
            expected: 3 * n + 1,
            got: v.len(),
        });
    }
    let (r, u, psi) = (&v[..n], &v[n..2 * n], &v[2 * n..3 * n]);
    Ok(Collocated {
        r: disc.d0.apply(r),
        u: disc.d0.apply(u),
        psi: disc.d0.apply(psi),
        dr: chord_derivative(disc, r),
        du: disc.d1.apply(u),
        dpsi: disc.d1.apply(psi),
        ell: v[3 * n],
    })
}

/// `D1 r` taken as the derivative of `r` minus its endpoint chord plus the
/// chord slope. Equal in exact arithmetic, but the radius is close to linear
/// and this keeps the rounding of the large `D1` entries off the chord part.
fn chord_derivative(disc: &Discretization, r: &[f64]) -> Vec<f64> {
    let n = r.len();
    let (mid, half) = (0.5 * (r[0] + r[n - 1]), 0.5 * (r[n - 1] - r[0]));
    let rest: Vec<f64> = r.iter().zip(disc.grid.points()).map(|(x, t)| x - (mid + half * t)).collect();
    disc.d1.apply(&rest).into_iter().map(|d| d + half).collect()
}

/// `N(v)` on a flattened state.
pub fn residual_flat(
    spec: &ProblemSpec,
    form: Formulation,
    disc: &Discretization,
    v: &[f64],
) -> Result<Vec<f64>, Error> {
    check_formulation(spec, form)?;
    let c = collocate(disc, v)?;
    let n = disc.n();
    let m = n - 1;
    let kappa = spec.kappa;
    let ell = c.ell;
    let mut out = Vec::with_capacity(3 * n + 1);
    for i in 0..m {
        out.push(c.dr[i] - ell * c.psi[i].cos());
    }
    for i in 0..m {
        out.push(c.du[i] - ell * c.psi[i].sin());
    }
    for i in 0..m {
        let s = c.psi[i].sin();
        let row = match form {
            Formulation::Divided => c.dpsi[i] + ell * s / c.r[i] - kappa * ell * c.u[i],
            Formulation::Multiplied => c.r[i] * c.dpsi[i] + ell * s - kappa * ell * c.r[i] * c.u[i],
            Formulation::Planar => c.dpsi[i] - kappa * ell * c.u[i],
        };
        out.push(row);
    }
    let (left_pos, left_psi) = spec.left_boundary();
    let (right_pos, right_psi) = spec.right_boundary();
    out.push(v[0] - left_pos);
    out.push(v[n - 1] - right_pos);
    out.push(v[2 * n] - left_psi);
    out.push(v[3 * n - 1] - right_psi);
    if let Some(row) = out.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row });
    }
    Ok(out)
}

pub fn residual(
    spec: &ProblemSpec,
    form: Formulation,
    disc: &Discretization,
    v: &StateVector,
) -> Result<Vec<f64>, Error> {
    residual_flat(spec, form, disc, &v.to_flat())
}

/// Analytic Fréchet derivative `L(v)` of [`residual_flat`].
pub fn jacobian_flat(
    spec: &ProblemSpec,
    form: Formulation,
    disc: &Discretization,
    v: &[f64],
) -> Result<DenseMatrix, Error> {
    check_formulation(spec, form)?;
    let c = collocate(disc, v)?;
    let n = disc.n();
    let m = n - 1;
    let size = 3 * n + 1;
    let kappa = spec.kappa;
    let ell = c.ell;
    let (d0, d1) = (&disc.d0, &disc.d1);
    let (col_r, col_u, col_psi, col_ell) = (0, n, 2 * n, 3 * n);
    let mut jac = DenseMatrix::zeros(size, size);

    // Writes `alpha * D0[i, :] + beta * D1[i, :]` into a column block.
    let put = |row: &mut [f64], offset: usize, i: usize, alpha: f64, beta: f64| {
        let dst = &mut row[offset..offset + n];
        for ((x, &a), &b) in dst.iter_mut().zip(d0.row(i)).zip(d1.row(i)) {
            *x = alpha * a + beta * b;
        }
    };

    for i in 0..m {
        let (s, co) = c.psi[i].sin_cos();

        let row = jac.row_mut(i);
        put(row, col_r, i, 0.0, 1.0);
        put(row, col_psi, i, ell * s, 0.0);
        row[col_ell] = -co;

        let row = jac.row_mut(m + i);
        put(row, col_u, i, 0.0, 1.0);
        put(row, col_psi, i, -ell * co, 0.0);
        row[col_ell] = -s;

        let row = jac.row_mut(2 * m + i);
        match form {
            Formulation::Divided => {
                let r = c.r[i];
                put(row, col_r, i, -ell * s / (r * r), 0.0);
                put(row, col_u, i, -kappa * ell, 0.0);
                put(row, col_psi, i, ell * co / r, 1.0);
                row[col_ell] = s / r - kappa * c.u[i];
            }
            Formulation::Multiplied => {
                let r = c.r[i];
                put(row, col_r, i, c.dpsi[i] - kappa * ell * c.u[i], 0.0);
                put(row, col_u, i, -kappa * ell * r, 0.0);
                put(row, col_psi, i, ell * co, r);
                row[col_ell] = s - kappa * c.u[i] * r;
            }
            Formulation::Planar => {
                put(row, col_u, i, -kappa * ell, 0.0);
                put(row, col_psi, i, 0.0, 1.0);
                row[col_ell] = -kappa * c.u[i];
            }
        }
    }
    jac.set(3 * m, col_r, 1.0);
    jac.set(3 * m + 1, col_r + n - 1, 1.0);
    jac.set(3 * m + 2, col_psi, 1.0);
    jac.set(3 * m + 3, col_psi + n - 1, 1.0);

    if let Some(pos) = jac.as_slice().iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: pos / size });
    }
    Ok(jac)
}

pub fn jacobian(
    spec: &ProblemSpec,
    form: Formulation,
    disc: &Discretization,
    v: &StateVector,
) -> Result<DenseMatrix, Error> {
    jacobian_flat(spec, form, disc, &v.to_flat())
}
