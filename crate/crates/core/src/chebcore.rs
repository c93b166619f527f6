//! Chebyshev–Lobatto grids, rectangular collocation operators and
//! barycentric interpolation on `[-1, 1]`.
//!
//! Unknowns live on an `n`-point second-kind grid. The differential
//! equations are collocated on the `(n - 1)`-point second-kind grid, which
//! frees four rows of the square system for boundary conditions. For odd
//! `n` the down-sampled grid has an even number of points and therefore
//! never contains `τ = 0`.

use std::f64::consts::PI;

use crate::error::Error;
use crate::linalg::DenseMatrix;

/// Smallest grid accepted by [`cheb_points`].
pub const MIN_POINTS: usize = 4;

/// Rectangular operator mapping nodal values to values on another grid.
pub type RectOp = DenseMatrix;

/// Second-kind Chebyshev points in increasing order with their
/// barycentric weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebGrid {
    #[inline]
    pub fn n(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node equal to `x`, if any.
    fn node_index(&self, x: f64) -> Option<usize> {
        // Points are sorted; the comparison is exact on purpose.
        self.points
            .binary_search_by(|p| p.partial_cmp(&x).expect("grid points are finite"))
            .ok()
    }
}

/// `n` Chebyshev–Lobatto points `cos(jπ/(n-1))`, sorted from −1 to 1.
pub fn cheb_points(n: usize) -> Result<ChebGrid, Error> {
    if n < MIN_POINTS {
        return Err(Error::GridTooSmall { n, min: MIN_POINTS });
    }
    Ok(grid_unchecked(n))
}

// The sine form is exactly antisymmetric and gives an exact 0 for odd n.
pub(crate) fn grid_unchecked(n: usize) -> ChebGrid {
    assert!(n >= 2);
    let m = (n - 1) as f64;
    let points = (0..n)
        .map(|j| {
            let k = 2.0 * j as f64 - m;
            (PI * k / (2.0 * m)).sin()
        })
        .collect();
    let weights = (0..n)
        .map(|j| {
            let sign = if (n - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect();
    ChebGrid { points, weights }
}

/// Square first-derivative matrix on `grid`, diagonal by negative row sums.
pub fn square_diffmat(grid: &ChebGrid) -> DenseMatrix {
    let n = grid.n();
    let x = grid.points();
    let w = grid.weights();
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d.set(i, j, v);
                diag -= v;
            }
        }
        d.set(i, i, diag);
    }
    d
}

/// Barycentric interpolation matrix from `source` nodes to the `targets`.
pub fn interp_matrix(source: &ChebGrid, targets: &[f64]) -> DenseMatrix {
    let n = source.n();
    let x = source.points();
    let w = source.weights();
    let mut p = DenseMatrix::zeros(targets.len(), n);
    for (i, &t) in targets.iter().enumerate() {
        if let Some(j) = source.node_index(t) {
            p.set(i, j, 1.0);
            continue;
        }
        let row = p.row_mut(i);
        let mut denom = 0.0;
        for j in 0..n {
            let c = w[j] / (t - x[j]);
            row[j] = c;
            denom += c;
        }
        row.iter_mut().for_each(|c| *c /= denom);
    }
    p
}

/// Rectangular collocation operator of the given derivative order from the
/// `source_n`-point grid to the `target_m`-point grid.
///
/// Only `target_m == source_n - 1` and `order ∈ {0, 1}` are supported.
pub fn diffmat(target_m: usize, source_n: usize, order: u8) -> Result<RectOp, Error> {
    if source_n < MIN_POINTS || target_m + 1 != source_n || order > 1 {
        return Err(Error::UnsupportedOperator {
            rows: target_m,
            cols: source_n,
            order,
        });
    }
    let source = grid_unchecked(source_n);
    let target = grid_unchecked(target_m);
    let p = interp_matrix(&source, target.points());
    Ok(match order {
        0 => p,
        _ => p.matmul(&square_diffmat(&source)),
    })
}

/// Barycentric (second form) evaluation of the interpolant through
/// `values` at each query point.
pub fn bary_eval(grid: &ChebGrid, values: &[f64], query: &[f64]) -> Result<Vec<f64>, Error> {
    if values.len() != grid.n() {
        return Err(Error::DimensionMismatch {
            expected: grid.n(),
            got: values.len(),
        });
    }
    query
        .iter()
        .map(|&t| {
            if !(-1.0..=1.0).contains(&t) {
                return Err(Error::QueryOutOfRange(t));
            }
            Ok(bary_point(grid, values, t))
        })
        .collect()
}

pub(crate) fn bary_point(grid: &ChebGrid, values: &[f64], t: f64) -> f64 {
    if let Some(j) = grid.node_index(t) {
        return values[j];
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&x, &w), &f) in grid.points.iter().zip(&grid.weights).zip(values) {
        let c = w / (t - x);
        num += c * f;
        den += c;
    }
    num / den
}

/// Values of the `old_grid` interpolant at the nodes of `new_grid`.
pub fn resample(old_grid: &ChebGrid, values: &[f64], new_grid: &ChebGrid) -> Result<Vec<f64>, Error> {
    if old_grid == new_grid {
        if values.len() != old_grid.n() {
            return Err(Error::DimensionMismatch {
                expected: old_grid.n(),
                got: values.len(),
            });
        }
        return Ok(values.to_vec());
    }
    bary_eval(old_grid, values, new_grid.points())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sample(grid: &ChebGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.points().iter().map(|&x| f(x)).collect()
    }

    #[test]
    fn three_points() {
        let g = grid_unchecked(3);
        assert_eq!(g.points(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn five_points() {
        let g = cheb_points(5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [-1.0, -h, 0.0, h, 1.0];
        for (p, e) in g.points().iter().zip(expected) {
            assert_abs_diff_eq!(*p, e, epsilon = 4e-16);
        }
    }

    #[test]
    fn fifteen_points() {
        let g = cheb_points(15).unwrap();
        assert_eq!(g.n(), 15);
        assert_eq!(g.points()[0], -1.0);
        assert_eq!(g.points()[14], 1.0);
        assert_eq!(g.points()[7], 0.0);
        for (j, p) in g.points().iter().enumerate() {
            let reference = (((14 - j) as f64) * PI / 14.0).cos();
            assert_abs_diff_eq!(*p, reference, epsilon = 4e-16);
        }
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_small_grids() {
        assert!(matches!(cheb_points(3), Err(Error::GridTooSmall { n: 3, .. })));
    }

    #[test]
    fn zero_only_for_odd_n() {
        for n in 4..40 {
            let g = cheb_points(n).unwrap();
            assert_eq!(g.points().contains(&0.0), n % 2 == 1, "n = {n}");
        }
    }

    #[test]
    fn weights_alternate_with_half_endpoints() {
        for n in [4, 7, 16] {
            let g = cheb_points(n).unwrap();
            let w = g.weights();
            for pair in w.windows(2) {
                assert!(pair[0] * pair[1] < 0.0);
            }
            assert_eq!(w[0].abs(), 0.5);
            assert_eq!(w[n - 1].abs(), 0.5);
            assert!(w[1..n - 1].iter().all(|x| x.abs() == 1.0));
        }
    }

    #[test]
    fn diffmat_shapes() {
        assert!(diffmat(7, 8, 0).is_ok());
        assert!(diffmat(8, 8, 1).is_err());
        assert!(diffmat(7, 8, 2).is_err());
        assert!(diffmat(2, 3, 0).is_err());
    }

    #[test]
    fn constant_reproduction() {
        let d0 = diffmat(9, 10, 0).unwrap();
        let out = d0.apply(&[1.0; 10]);
        assert_eq!(out.len(), 9);
        for v in out {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_of_square() {
        let src = cheb_points(8).unwrap();
        let tgt = cheb_points(7).unwrap();
        let d1 = diffmat(7, 8, 1).unwrap();
        let out = d1.apply(&sample(&src, |x| x * x));
        for (v, &t) in out.iter().zip(tgt.points()) {
            assert!((v - 2.0 * t).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let src = cheb_points(15).unwrap();
        let tgt = cheb_points(14).unwrap();
        let d1 = diffmat(14, 15, 1).unwrap();
        let out = d1.apply(&sample(&src, f64::sin));
        for (v, &t) in out.iter().zip(tgt.points()) {
            assert!((v - t.cos()).abs() < 1e-12, "{} vs {}", v, t.cos());
        }
    }

    #[test]
    fn bary_reproduces_nodes() {
        let g = cheb_points(9).unwrap();
        let vals = sample(&g, |x| (3.0 * x).exp());
        let out = bary_eval(&g, &vals, g.points()).unwrap();
        assert_eq!(out, vals);
    }

    #[test]
    fn bary_cubic() {
        let g = cheb_points(6).unwrap();
        let out = bary_eval(&g, &sample(&g, |x| x.powi(3)), &[0.3]).unwrap();
        assert_abs_diff_eq!(out[0], 0.027, epsilon = 1e-14);
    }

    #[test]
    fn bary_exponential() {
        let g = cheb_points(20).unwrap();
        let out = bary_eval(&g, &sample(&g, f64::exp), &[0.5]).unwrap();
        let e = 0.5f64.exp();
        assert!(((out[0] - e) / e).abs() < 1e-13);
    }

    #[test]
    fn bary_rejects_out_of_range() {
        let g = cheb_points(6).unwrap();
        let v = vec![0.0; 6];
        assert!(matches!(bary_eval(&g, &v, &[1.5]), Err(Error::QueryOutOfRange(_))));
        assert!(matches!(bary_eval(&g, &v[..5], &[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn resample_identity_and_constant() {
        let g = cheb_points(11).unwrap();
        let vals = sample(&g, f64::cos);
        assert_eq!(resample(&g, &vals, &g).unwrap(), vals);
        let h = cheb_points(23).unwrap();
        for v in resample(&g, &[2.5; 11], &h).unwrap() {
            assert_abs_diff_eq!(v, 2.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn resample_quartic() {
        let g = cheb_points(8).unwrap();
        let h = cheb_points(12).unwrap();
        let out = resample(&g, &sample(&g, |x| x.powi(4)), &h).unwrap();
        for (v, &t) in out.iter().zip(h.points()) {
            assert!((v - t.powi(4)).abs() < 1e-13);
        }
    }

    #[test]
    fn polynomial_exactness() {
        for n in 4..=64 {
            let src = cheb_points(n).unwrap();
            let tgt = grid_unchecked(n - 1);
            let d0 = diffmat(n - 1, n, 0).unwrap();
            let d1 = diffmat(n - 1, n, 1).unwrap();
            for k in 0..n {
                let f = sample(&src, |x| x.powi(k as i32));
                let v0 = d0.apply(&f);
                let v1 = d1.apply(&f);
                for ((a, b), &t) in v0.iter().zip(&v1).zip(tgt.points()) {
                    let e0 = t.powi(k as i32);
                    let e1 = if k == 0 { 0.0 } else { k as f64 * t.powi(k as i32 - 1) };
                    assert!((a - e0).abs() <= 1e-10 * e0.abs().max(1.0), "n={n} k={k}");
                    assert!((b - e1).abs() <= 1e-10 * (k as f64).max(1.0) * e1.abs().max(1.0), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn row_sums() {
        for n in [4, 5, 15, 33, 64] {
            let d0 = diffmat(n - 1, n, 0).unwrap();
            let d1 = diffmat(n - 1, n, 1).unwrap();
            for i in 0..n - 1 {
                let s0: f64 = d0.row(i).iter().sum();
                let s1: f64 = d1.row(i).iter().sum();
                assert!((s0 - 1.0).abs() < 1e-12);
                assert!(s1.abs() < 1e-12, "n={n} row={i} sum={s1}");
            }
        }
    }

    #[test]
    fn odd_grids_downsample_away_from_origin() {
        for n in (5..200).step_by(2) {
            let tgt = grid_unchecked(n - 1);
            assert!(tgt.points().iter().all(|&t| t != 0.0));
        }
    }

    #[test]
    fn runge_spectral_decay() {
        let f = |x: f64| 1.0 / (1.0 + 25.0 * x * x);
        let probes: Vec<f64> = (0..=400).map(|i| -1.0 + i as f64 / 200.0).collect();
        let mut errors = Vec::new();
        for n in [8, 16, 32, 64, 128] {
            let g = cheb_points(n).unwrap();
            let vals = bary_eval(&g, &sample(&g, f), &probes).unwrap();
            let err = vals.iter().zip(&probes).map(|(v, &x)| (v - f(x)).abs()).fold(0.0, f64::max);
            errors.push(err);
        }
        for pair in errors.windows(2) {
            assert!(pair[1] <= 1.1 * pair[0], "{errors:?}");
        }
        assert!(errors[4] < 1e-6);
    }

    proptest! {
        #[test]
        fn resample_preserves_low_degree(n in 4usize..30, extra in 0usize..20, coeffs in prop::collection::vec(-2.0f64..2.0, 4)) {
            let g = cheb_points(n).unwrap();
            let h = cheb_points(n + extra).unwrap();
            let p = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
            let out = resample(&g, &sample(&g, p), &h).unwrap();
            for (v, &t) in out.iter().zip(h.points()) {
                prop_assert!((v - p(t)).abs() < 1e-12);
            }
        }
    }
}
