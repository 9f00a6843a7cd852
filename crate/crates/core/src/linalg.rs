//! Dense row-major matrices plus the two factorizations the pipeline needs:
//! a cyclic Jacobi symmetric eigensolver and a Cholesky factorization.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, so guard the empty-column case.
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(self.rows)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Gathers the given rows into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape");
        self.row_iter().map(|r| dot(r, v)).collect()
    }

    /// `selfᵀ · v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "tr_mul_vec shape");
        let mut out = vec![0.0; self.cols];
        for (r, &s) in self.row_iter().zip(v) {
            for (o, x) in out.iter_mut().zip(r) {
                *o += s * x;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Sorted descending; ties keep their original diagonal order.
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver. Converges when the off-diagonal Frobenius
/// norm falls below 1e-12 (relative to the full norm when that exceeds 1).
pub fn symmetric_eigen(a: &Matrix) -> SymmetricEigen {
    assert_eq!(a.rows(), a.cols(), "eigen of non-square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let total = m.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_TOL * total.max(1.0);

    let off_norm = |m: &Matrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS && off_norm(&m) > tol {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps index order on exact ties.
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cholesky {
    lower: Matrix,
}

impl Cholesky {
    /// Returns `None` if a pivot is not strictly positive (relative to the
    /// largest diagonal entry) or not finite.
    pub fn factor(a: &Matrix) -> Option<Cholesky> {
        assert_eq!(a.rows(), a.cols(), "cholesky of non-square matrix");
        let n = a.rows();
        let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
        let floor = max_diag * 1e-15;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !d.is_finite() || d <= 0.0 || d <= floor {
                return None;
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(Cholesky { lower: l })
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let l = &self.lower;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }

    /// `L Lᵀ`
    pub fn reconstruct(&self) -> Matrix {
        self.lower.matmul(&self.lower.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_known_matrix() {
        let a = Matrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]]);
        let e = symmetric_eigen(&a);
        let expect = [5.0, 3.0, 1.0];
        for (v, x) in e.values.iter().zip(expect) {
            assert!((v - x).abs() < 1e-12, "{v} vs {x}");
        }
        // A V = V Λ
        let av = a.matmul(&e.vectors);
        for j in 0..3 {
            for i in 0..3 {
                assert!((av[(i, j)] - e.vectors[(i, j)] * e.values[j]).abs() < 1e-12);
            }
        }
        let gram = e.vectors.transpose().matmul(&e.vectors);
        assert!(gram.max_abs_diff(&Matrix::identity(3)) < 1e-12);
    }

    #[test]
    fn jacobi_ties_keep_index_order() {
        let e = symmetric_eigen(&Matrix::identity(3));
        assert_eq!(e.vectors, Matrix::identity(3));
    }

    #[test]
    fn cholesky_reconstructs_and_solves() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]);
        let c = Cholesky::factor(&a).unwrap();
        assert!(c.reconstruct().max_abs_diff(&a) < 1e-14);
        let y = c.solve_lower(&[2.0, 1.0]);
        let back = c.lower().mul_vec(&y);
        assert!((back[0] - 2.0).abs() < 1e-14 && (back[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite_and_zero() {
        assert!(Cholesky::factor(&Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]])).is_none());
        assert!(Cholesky::factor(&Matrix::zeros(2, 2)).is_none());
    }

    #[test]
    fn matmul_and_transpose_agree() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let ata = a.transpose().matmul(&a);
        assert_eq!(ata[(0, 0)], 17.0);
        assert_eq!(ata[(1, 2)], 2.0 * 3.0 + 5.0 * 6.0);
        assert_eq!(a.tr_mul_vec(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
    }
}
