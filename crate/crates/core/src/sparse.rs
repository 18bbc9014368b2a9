//! Compressed-row matrices and the vector kernels shared by the solvers.
//!
//! Reductions are split into fixed-size chunks whose partial sums are added in
//! chunk order, so results do not depend on the number of worker threads.

use rayon::prelude::*;

/// Rows per parallel work item. Fixed so reductions are reproducible.
const CHUNK: usize = 1 << 13;

/// Square sparse matrix in compressed-row form, columns ascending per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from raw arrays. Panics if the structure is inconsistent.
    pub fn from_parts(n: usize, row_ptr: Vec<usize>, cols: Vec<u32>, vals: Vec<f64>) -> Self {
        assert_eq!(row_ptr.len(), n + 1, "row pointer length");
        assert_eq!(cols.len(), vals.len(), "column/value length");
        assert_eq!(*row_ptr.last().unwrap(), cols.len(), "row pointer end");
        assert!(n <= u32::MAX as usize, "matrix too large for u32 columns");
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let row = &cols[row_ptr[i]..row_ptr[i + 1]];
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]), "row {i} not sorted");
            if let Ok(p) = row.binary_search(&(i as u32)) {
                diag[i] = vals[row_ptr[i] + p];
            }
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
            diag,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(n, (0..=n).collect(), (0..n as u32).collect(), vec![1.0; n])
    }

    /// Dense row-major input; exact zeros off the diagonal are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n);
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 || i == j {
                    cols.push(j as u32);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self::from_parts(n, row_ptr, cols, vals)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (c, v) = self.row(i);
        c.binary_search(&(j as u32)).ok().map(|p| v[p])
    }

    pub fn max_row_nnz(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, ys)| {
            let base = c * CHUNK;
            for (k, yi) in ys.iter_mut().enumerate() {
                *yi = self.row_dot(base + k, x);
            }
        });
    }

    /// `r = b - A x`.
    pub fn residual(&self, x: &[f64], b: &[f64], r: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        assert_eq!(r.len(), self.n);
        r.par_chunks_mut(CHUNK).enumerate().for_each(|(c, rs)| {
            let base = c * CHUNK;
            for (k, ri) in rs.iter_mut().enumerate() {
                let i = base + k;
                *ri = b[i] - self.row_dot(i, x);
            }
        });
    }

    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (c, v) = self.row(i);
        let mut s = 0.0;
        for (&j, &a) in c.iter().zip(v) {
            s += a * x[j as usize];
        }
        s
    }

    /// Entry `(i, j)` present iff `(j, i)` is, with bitwise equal values.
    pub fn is_symmetric_bitwise(&self) -> bool {
        (0..self.n).all(|i| {
            let (c, v) = self.row(i);
            c.iter()
                .zip(v)
                .all(|(&j, &a)| self.get(j as usize, i).map(f64::to_bits) == Some(a.to_bits()))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                row[j as usize] = a;
            }
        }
        d
    }
}

/// Deterministic dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean norm over entries where `skip[i]` is false.
pub fn masked_norm2(a: &[f64], skip: &[bool]) -> f64 {
    assert_eq!(a.len(), skip.len());
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(skip.par_chunks(CHUNK))
        .map(|(x, m)| {
            x.iter()
                .zip(m)
                .filter(|(_, &s)| !s)
                .map(|(v, _)| v * v)
                .sum::<f64>()
        })
        .collect();
    partial.iter().sum::<f64>().sqrt()
}

/// `y += alpha x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(ys, xs)| {
            for (yi, xi) in ys.iter_mut().zip(xs) {
                *yi += alpha * xi;
            }
        });
}

/// `p = z + beta p`.
pub fn xpby(z: &[f64], beta: f64, p: &mut [f64]) {
    p.par_chunks_mut(CHUNK)
        .zip(z.par_chunks(CHUNK))
        .for_each(|(ps, zs)| {
            for (pi, zi) in ps.iter_mut().zip(zs) {
                *pi = zi + beta * *pi;
            }
        });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            d[i][i] = 2.0;
            if i > 0 {
                d[i][i - 1] = -1.0;
                d[i - 1][i] = -1.0;
            }
        }
        CsrMatrix::from_dense(&d)
    }

    #[test]
    fn matvec_and_residual() {
        let a = tridiag(4);
        let x = [1.0, 2.0, 3.0, 4.0];
        let mut y = [0.0; 4];
        a.matvec(&x, &mut y);
        assert_eq!(y, [0.0, 0.0, 0.0, 5.0]);
        let mut r = [0.0; 4];
        a.residual(&x, &[1.0; 4], &mut r);
        assert_eq!(r, [1.0, 1.0, 1.0, -4.0]);
        assert_eq!(a.diagonal(), &[2.0; 4]);
        assert_eq!(a.get(0, 1), Some(-1.0));
        assert_eq!(a.get(0, 2), None);
        assert!(a.is_symmetric_bitwise());
        assert_eq!(a.max_row_nnz(), 3);
    }

    #[test]
    fn asymmetry_detected() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.5], vec![0.25, 1.0]]);
        assert!(!a.is_symmetric_bitwise());
    }

    #[test]
    fn reductions_independent_of_threads() {
        let v: Vec<f64> = (0..100_003).map(|i| ((i as f64) * 0.37).sin()).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| dot(&v, &v));
        let b = four.install(|| dot(&v, &v));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn masked_norm_skips_entries() {
        let v = [3.0, 100.0, 4.0];
        assert_eq!(masked_norm2(&v, &[false, true, false]), 5.0);
    }
}
