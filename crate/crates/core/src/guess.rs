//! Initial curves for Newton's method.
//!
//! P1 guesses are circular arcs whose radius and tip height come from the
//! small-tube asymptotics (Laplace's height and Finn's bracketing arcs).
//! P2/P3 guesses are "u-shaped" when the boundary angles have opposite
//! signs and "s-shaped" otherwise. Every construction is done for the
//! upward-oriented case and mirrored (`U → -U`, `Ψ → -Ψ`) afterwards, so
//! `guess(-ψa, -ψb)` is the exact mirror image of `guess(ψa, ψb)`.

use std::f64::consts::FRAC_PI_2;

use crate::chebcore::ChebGrid;
use crate::error::Error;
use crate::model::{ProblemKind, ProblemSpec, StateVector};

/// Initial guess; same layout as the collocation state.
pub type GuessCurve = StateVector;

const ANGLE_SLACK: f64 = 1e-12;

/// Laplace's estimate of the height of the interface on the axis of a
/// tube of radius `b`, with contact angle `γ = π/2 − ψb`.
pub fn laplace_height(b: f64, psi_b: f64, kappa: f64) -> f64 {
    let gamma = FRAC_PI_2 - psi_b;
    let (sg, cg) = gamma.sin_cos();
    2.0 * cg / (kappa * b) - (b * cg / 3.0) * (1.0 + 2.0 * sg) / ((1.0 + sg) * (1.0 + sg))
}

/// Height of the lower bracketing arc: radius `2/(κu0)`, tip at `u0`.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn lower_arc_height(r: f64, u0: f64, kappa: f64) -> f64 {
    let radius = 2.0 / (kappa * u0);
    u0 + radius - (radius * radius - r * r).sqrt()
}

/// Height of the upper bracketing arc: radius `b / sin ψb`, tip at `u0`.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn upper_arc_height(r: f64, u0: f64, b: f64, psi_b: f64) -> f64 {
    let radius = b / psi_b.sin();
    u0 + radius - (radius * radius - r * r).sqrt()
}

fn mirror(mut curve: GuessCurve, flip: bool) -> GuessCurve {
    if flip {
        curve.u.iter_mut().for_each(|x| *x = -*x);
        curve.psi.iter_mut().for_each(|x| *x = -*x);
    }
    curve
}

/// Circular-arc guess for the disk problem targeting boundary angle
/// `psi_target`, with `0 < |psi_target| ≤ π/2`.
pub fn guess_p1(spec: &ProblemSpec, grid: &ChebGrid, psi_target: f64) -> Result<GuessCurve, Error> {
    if spec.kind != ProblemKind::P1 {
        return Err(Error::InvalidGuess(format!("disk guess requested for {}", spec.kind)));
    }
    if psi_target == 0.0 {
        return Err(Error::InvalidGuess("zero angle has no arc guess; use the flat state".into()));
    }
    let psi = psi_target.abs();
    if !(psi <= FRAC_PI_2 + ANGLE_SLACK) {
        return Err(Error::InvalidGuess(format!("arc guess needs |psi| <= pi/2, got {psi_target}")));
    }
    let (b, kappa) = (spec.b, spec.kappa);
    let upper_radius = b / psi.sin();
    let (radius, tip) = if b < 1.0 {
        let tip = laplace_height(b, psi, kappa);
        let lower_radius = 2.0 / (kappa * tip);
        (0.5 * (lower_radius + upper_radius), tip)
    } else {
        (upper_radius, 2.0 / (kappa * upper_radius))
    };
    let psi0: Vec<f64> = grid.points().iter().map(|&t| t * psi).collect();
    let curve = GuessCurve {
        r: psi0.iter().map(|p| radius * p.sin()).collect(),
        u: psi0.iter().map(|p| tip + radius * (1.0 - p.cos())).collect(),
        ell: (radius * psi).abs(),
        psi: psi0,
    };
    Ok(mirror(curve, psi_target < 0.0))
}

/// Whether `(psi_a, psi_b)` is handled by mirroring the flipped pair.
pub(crate) fn needs_reflection(psi_a: f64, psi_b: f64) -> bool {
    psi_b < 0.0 || (psi_b == 0.0 && psi_a < 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    U,
    S,
}

pub fn classify(psi_a: f64, psi_b: f64) -> Shape {
    if psi_a * psi_b < 0.0 {
        Shape::U
    } else {
        Shape::S
    }
}

fn annular_guess(
    spec: &ProblemSpec,
    grid: &ChebGrid,
    psi_a_t: f64,
    psi_b_t: f64,
    shape: Shape,
) -> Result<GuessCurve, Error> {
    if psi_a_t == 0.0 && psi_b_t == 0.0 {
        return Ok(StateVector::flat(spec, grid));
    }
    let flip = needs_reflection(psi_a_t, psi_b_t);
    let (pa, pb) = if flip { (-psi_a_t, -psi_b_t) } else { (psi_a_t, psi_b_t) };
    let (a, b) = (spec.a, spec.b);
    let gap = b - a;

    let (radius, ell) = match shape {
        Shape::U => {
            let denom = (-pa).sin() + pb.sin();
            if !(denom > 0.0) {
                return Err(Error::InvalidGuess(format!(
                    "u-shaped arc undefined for angles ({psi_a_t}, {psi_b_t})"
                )));
            }
            let radius = gap / denom;
            (radius, radius * (pb - pa).abs())
        }
        Shape::S => {
            let denom = pa.sin() + pb.sin();
            if denom == 0.0 {
                return Err(Error::InvalidGuess(format!(
                    "s-shaped arc undefined for angles ({psi_a_t}, {psi_b_t})"
                )));
            }
            let radius = gap / denom;
            (radius, (radius * (pb + pa)).abs())
        }
    };

    let psi0: Vec<f64> = grid
        .points()
        .iter()
        .map(|&t| 0.5 * (1.0 - t) * pa + 0.5 * (1.0 + t) * pb)
        .collect();
    let base = |p: f64| 0.5 * (a + b) + radius * p.sin();
    // Affine correction so the curve meets both walls exactly. It is a
    // pure shift for symmetric u-shaped data.
    let (lo, hi) = (base(pa), base(pb));
    let shift = 0.5 * (a + b - lo - hi);
    let tilt = 0.5 * (gap - (hi - lo));
    let r: Vec<f64> = psi0
        .iter()
        .zip(grid.points())
        .map(|(&p, &t)| base(p) + shift + tilt * t)
        .collect();
    let u: Vec<f64> = match shape {
        Shape::U => {
            let tip = 1.0 / radius;
            psi0.iter().map(|p| tip + radius * (1.0 - p.cos())).collect()
        }
        Shape::S => grid.points().iter().map(|&t| t / gap).collect(),
    };
    Ok(mirror(GuessCurve { r, u, psi: psi0, ell }, flip))
}

fn check_kind(spec: &ProblemSpec, kind: ProblemKind) -> Result<(), Error> {
    if spec.kind != kind {
        return Err(Error::InvalidGuess(format!(
            "{} guess requested for {}",
            kind, spec.kind
        )));
    }
    Ok(())
}

fn check_pair(psi_a_t: f64, psi_b_t: f64) -> Result<(), Error> {
    let ok = |p: f64| p.is_finite() && p.abs() <= FRAC_PI_2 + ANGLE_SLACK;
    if !(ok(psi_a_t) && ok(psi_b_t)) {
        return Err(Error::InvalidGuess(format!(
            "arc guesses need |psi| <= pi/2, got ({psi_a_t}, {psi_b_t})"
        )));
    }
    Ok(())
}

/// u-shaped annular guess; requires `psi_a_t * psi_b_t < 0`.
pub fn guess_p2_u(spec: &ProblemSpec, grid: &ChebGrid, psi_a_t: f64, psi_b_t: f64) -> Result<GuessCurve, Error> {
    check_pair(psi_a_t, psi_b_t)?;
    if classify(psi_a_t, psi_b_t) != Shape::U {
        return Err(Error::InvalidGuess(format!(
            "u-shaped guess needs opposite angle signs, got ({psi_a_t}, {psi_b_t})"
        )));
    }
    annular_guess(spec, grid, psi_a_t, psi_b_t, Shape::U)
}

/// s-shaped annular guess; requires `psi_a_t * psi_b_t >= 0`.
pub fn guess_p2_s(spec: &ProblemSpec, grid: &ChebGrid, psi_a_t: f64, psi_b_t: f64) -> Result<GuessCurve, Error> {
    check_pair(psi_a_t, psi_b_t)?;
    if classify(psi_a_t, psi_b_t) != Shape::S {
        return Err(Error::InvalidGuess(format!(
            "s-shaped guess needs angles of equal sign, got ({psi_a_t}, {psi_b_t})"
        )));
    }
    annular_guess(spec, grid, psi_a_t, psi_b_t, Shape::S)
}

/// Annular guess dispatched on the angle signs.
pub fn guess_p2(spec: &ProblemSpec, grid: &ChebGrid, psi_a_t: f64, psi_b_t: f64) -> Result<GuessCurve, Error> {
    check_kind(spec, ProblemKind::P2)?;
    check_pair(psi_a_t, psi_b_t)?;
    annular_guess(spec, grid, psi_a_t, psi_b_t, classify(psi_a_t, psi_b_t))
}

/// Lower-dimensional guess: the annular construction with `X` for `R`.
pub fn guess_p3(spec: &ProblemSpec, grid: &ChebGrid, psi_a_t: f64, psi_b_t: f64) -> Result<GuessCurve, Error> {
    check_kind(spec, ProblemKind::P3)?;
    check_pair(psi_a_t, psi_b_t)?;
    annular_guess(spec, grid, psi_a_t, psi_b_t, classify(psi_a_t, psi_b_t))
}

/// Starting state for the solver at target angles within `[-π/2, π/2]`.
///
/// The annular arc formulas give `ℓ₀` as the length of the whole arc, while
/// the state carries the half arclength, so the solver is seeded with half
/// of it.
pub fn initial_guess(spec: &ProblemSpec, grid: &ChebGrid, psi_a_t: f64, psi_b_t: f64) -> Result<GuessCurve, Error> {
    let halve = |mut g: GuessCurve| {
        if psi_a_t != 0.0 || psi_b_t != 0.0 {
            g.ell *= 0.5;
        }
        g
    };
    match spec.kind {
        ProblemKind::P1 if psi_b_t == 0.0 => Ok(StateVector::flat(spec, grid)),
        ProblemKind::P1 => guess_p1(spec, grid, psi_b_t),
        ProblemKind::P2 => guess_p2(spec, grid, psi_a_t, psi_b_t).map(halve),
        ProblemKind::P3 => guess_p3(spec, grid, psi_a_t, psi_b_t).map(halve),
    }
}
