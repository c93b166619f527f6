//! Properties of converged solves across the three problem classes.

use crate::chebcore::{bary_eval, square_diffmat, ChebGrid};
use crate::model::{residual, select_formulation, Discretization, ProblemKind, ProblemSpec, StateVector};
use crate::solver::{continuation_solve, SolveReport, SolverConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

fn solve(spec: &ProblemSpec) -> SolveReport {
    continuation_solve(spec, &SolverConfig::default()).unwrap_or_else(|e| panic!("{spec:?}: {e}"))
}

fn cases() -> Vec<ProblemSpec> {
    let mut out = vec![];
    for psi in [FRAC_PI_6, FRAC_PI_3, FRAC_PI_2, 2.0 * FRAC_PI_3, PI] {
        out.push(ProblemSpec::p1(1.0, psi, 1.0).unwrap());
    }
    out.push(ProblemSpec::p1(0.1, 3.0 * PI / 8.0, 1.0).unwrap());
    out.push(ProblemSpec::p1(2.0, 7.0 * PI / 8.0, 1.0).unwrap());
    for (pa, pb) in [(-FRAC_PI_3, FRAC_PI_6), (-5.0 * PI / 8.0, 3.0 * PI / 8.0), (-FRAC_PI_6, -2.0 * FRAC_PI_3), (0.0, PI)] {
        out.push(ProblemSpec::p2(1.0, 3.0, pa, pb, 1.0).unwrap());
        out.push(ProblemSpec::p3(1.0, 3.0, pa, pb, 1.0).unwrap());
    }
    out.push(ProblemSpec::p2(0.1, 1.0, -3.0 * PI / 8.0, 5.0 * PI / 8.0, 1.0).unwrap());
    out
}

struct Curve {
    grid: ChebGrid,
    state: StateVector,
    dr: Vec<f64>,
    du: Vec<f64>,
    dpsi: Vec<f64>,
}

impl Curve {
    fn new(report: &SolveReport) -> Self {
        let d = square_diffmat(&report.grid);
        Curve {
            grid: report.grid.clone(),
            state: report.state.clone(),
            dr: d.apply(&report.state.r),
            du: d.apply(&report.state.u),
            dpsi: d.apply(&report.state.psi),
        }
    }

    fn at(&self, values: &[f64], t: f64) -> f64 {
        bary_eval(&self.grid, values, &[t]).unwrap()[0]
    }
}

fn random_taus(seed: u64, count: usize, kind: ProblemKind) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| match kind {
            // The disk equations are singular on the axis.
            ProblemKind::P1 => {
                let t: f64 = rng.gen_range(0.1..1.0);
                if rng.gen_bool(0.5) { t } else { -t }
            }
            _ => rng.gen_range(-1.0..1.0),
        })
        .collect()
}

#[test]
fn converged_states_meet_residual_and_boundaries() {
    for spec in cases() {
        let report = solve(&spec);
        assert!(report.res_bvp_final <= 1e-12, "{spec:?}: {}", report.res_bvp_final);
        let disc = Discretization::new(report.n()).unwrap();
        let res = residual(&spec, select_formulation(&spec), &disc, &report.state).unwrap();
        for (k, r) in res[3 * report.n() - 3..].iter().enumerate() {
            assert!(r.abs() <= 1e-11, "{spec:?}: boundary row {k} = {r:e}");
        }
    }
}

#[test]
fn disk_curves_are_symmetric() {
    for spec in cases().into_iter().filter(|s| s.kind == ProblemKind::P1) {
        let report = solve(&spec);
        let c = Curve::new(&report);
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let t: f64 = rng.gen_range(-1.0..1.0);
            let s = &c.state;
            assert!((c.at(&s.r, -t) + c.at(&s.r, t)).abs() < 1e-9, "{spec:?} R at {t}");
            assert!((c.at(&s.u, -t) - c.at(&s.u, t)).abs() < 1e-9, "{spec:?} U at {t}");
            assert!((c.at(&s.psi, -t) + c.at(&s.psi, t)).abs() < 1e-9, "{spec:?} Psi at {t}");
        }
    }
}

#[test]
fn speed_equals_half_arclength_on_collocation_points() {
    for spec in cases() {
        let report = solve(&spec);
        let c = Curve::new(&report);
        let ell = c.state.ell;
        let disc = Discretization::new(report.n()).unwrap();
        for &t in disc.target().points() {
            let speed = c.at(&c.dr, t).hypot(c.at(&c.du, t));
            assert!((speed - ell).abs() / ell < 1e-9, "{spec:?} at {t}: {speed} vs {ell}");
        }
    }
}

// Between collocation points the match is only as good as the grid, so
// this runs on a grid that resolves every case.
#[test]
fn interpolants_solve_the_arclength_system() {
    let cfg = SolverConfig {
        n0: 81,
        ..SolverConfig::default()
    };
    for spec in cases() {
        let report = continuation_solve(&spec, &cfg).unwrap();
        let c = Curve::new(&report);
        let ell = c.state.ell;
        for t in random_taus(23, 50, spec.kind) {
            let (r, u, psi) = (c.at(&c.state.r, t), c.at(&c.state.u, t), c.at(&c.state.psi, t));
            let bend = match spec.kind {
                ProblemKind::P3 => spec.kappa * u,
                _ => spec.kappa * u - psi.sin() / r,
            };
            assert!((c.at(&c.dr, t) / ell - psi.cos()).abs() < 1e-8, "{spec:?} dr/ds at {t}");
            assert!((c.at(&c.du, t) / ell - psi.sin()).abs() < 1e-8, "{spec:?} du/ds at {t}");
            assert!((c.at(&c.dpsi, t) / ell - bend).abs() < 1e-8, "{spec:?} dpsi/ds at {t}");
        }
    }
}

#[test]
fn mirrored_angles_mirror_the_solution() {
    for spec in cases() {
        let mirrored = match spec.kind {
            ProblemKind::P1 => spec.with_angles(0.0, -spec.psi_b),
            _ => spec.with_angles(-spec.psi_a, -spec.psi_b),
        };
        let (p, m) = (solve(&spec), solve(&mirrored));
        assert_eq!(p.n(), m.n(), "{spec:?}");
        let gap = |x: &[f64], y: &[f64], sign: f64| x.iter().zip(y).fold(0.0_f64, |g, (a, b)| g.max((a - sign * b).abs()));
        assert!(gap(&p.state.r, &m.state.r, 1.0) < 1e-10, "{spec:?}");
        assert!(gap(&p.state.u, &m.state.u, -1.0) < 1e-10, "{spec:?}");
        assert!(gap(&p.state.psi, &m.state.psi, -1.0) < 1e-10, "{spec:?}");
        assert!((p.state.ell - m.state.ell).abs() < 1e-10, "{spec:?}");
    }
}

#[test]
fn refinements_grow_through_odd_sizes() {
    let spec = ProblemSpec::p1(20.0, 7.0 * PI / 8.0, 1.0).unwrap();
    let report = solve(&spec);
    assert!(!report.refinements.is_empty());
    let mut last = SolverConfig::default().n0;
    for r in &report.refinements {
        assert!(r.n > last && r.n % 2 == 1, "{:?}", report.refinements);
        last = r.n;
    }
    assert_eq!(last, report.n());
}

#[test]
fn annulus_sweep_stays_on_the_coarse_grid() {
    for pb in [FRAC_PI_6, FRAC_PI_3, FRAC_PI_2, 2.0 * FRAC_PI_3, PI] {
        for pa in [0.0, -FRAC_PI_6, -FRAC_PI_3, -FRAC_PI_2, -2.0 * FRAC_PI_3, -PI] {
            for spec in [ProblemSpec::p2(1.0, 3.0, pa, pb, 1.0).unwrap(), ProblemSpec::p3(1.0, 3.0, pa, pb, 1.0).unwrap()] {
                let report = solve(&spec);
                assert!(report.n() <= 17, "{spec:?}: n = {}", report.n());
            }
        }
    }
}
