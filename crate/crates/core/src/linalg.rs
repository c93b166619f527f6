//! Dense row-major matrices and the LU solve used by Newton.

use faer::prelude::*;
use faer::Mat;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Matrix-vector product. Panics if `x.len() != cols`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "operand length does not match matrix columns");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Dense product `self * rhs`.
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, a) in sums.iter_mut().zip(self.row(i)) {
                *s += a.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveFailure {
    Singular,
    NonFinite,
}

/// Condition estimate above which a system counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e15;

/// LU factorization with partial pivoting of a square matrix.
pub struct LuFactors {
    lu: faer::linalg::solvers::PartialPivLu<f64>,
    dim: usize,
    norm_one: f64,
}

impl LuFactors {
    pub fn new(a: &DenseMatrix) -> Result<Self, SolveFailure> {
        assert_eq!(a.rows, a.cols, "LU requires a square matrix");
        if a.data.iter().any(|x| !x.is_finite()) {
            return Err(SolveFailure::NonFinite);
        }
        let dim = a.rows;
        let m = Mat::<f64>::from_fn(dim, dim, |i, j| a.get(i, j));
        let lu = m.partial_piv_lu();
        Ok(Self {
            lu,
            dim,
            norm_one: a.norm_one(),
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(self.dim, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.dim).map(|i| x[(i, 0)]).collect()
    }

    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(self.dim, 1, |i, _| b[i]);
        let x = self.lu.solve_transpose(&rhs);
        (0..self.dim).map(|i| x[(i, 0)]).collect()
    }

    /// Hager–Higham estimate of the 1-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim;
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let y_norm: f64 = y.iter().map(|v| v.abs()).sum();
            if !y_norm.is_finite() {
                return f64::INFINITY;
            }
            if y_norm <= estimate {
                break;
            }
            estimate = y_norm;
            let xi: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .fold((0, 0.0_f64), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            x[jmax] = 1.0;
        }
        estimate * self.norm_one
    }
}

/// Solve `a x = b`, rejecting non-finite input and near-singular systems.
pub fn solve_checked(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, SolveFailure> {
    let lu = LuFactors::new(a)?;
    let cond = lu.condition_estimate();
    if !(cond < SINGULAR_CONDITION) {
        return Err(SolveFailure::Singular);
    }
    let x = lu.solve(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolveFailure::NonFinite);
    }
    Ok(x)
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
