//! Fixture cases shared by the benchmarks.

use capspec_core::ProblemSpec;
use std::f64::consts::PI;

/// Named solves spanning the three problem classes, cheapest first.
pub fn cases() -> Vec<(&'static str, ProblemSpec)> {
    vec![
        ("p1_b1_pi3", ProblemSpec::p1(1.0, PI / 3.0, 1.0).unwrap()),
        ("p1_b1_pi", ProblemSpec::p1(1.0, PI, 1.0).unwrap()),
        ("p2_a1_b3", ProblemSpec::p2(1.0, 3.0, -PI / 3.0, PI / 6.0, 1.0).unwrap()),
        ("p3_a1_b3", ProblemSpec::p3(1.0, 3.0, -PI / 3.0, PI / 6.0, 1.0).unwrap()),
        ("p1_b20_7pi8", ProblemSpec::p1(20.0, 7.0 * PI / 8.0, 1.0).unwrap()),
        ("p2_fig6", ProblemSpec::p2(0.05, 1.0, -7.0 * PI / 8.0, PI, 1.0).unwrap()),
    ]
}
