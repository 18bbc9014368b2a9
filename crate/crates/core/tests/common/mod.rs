#![allow(dead_code)]

use ecmg::assembly::{assemble, LinearSystem};
use ecmg::grid::GridLevel;
use ecmg::problems::ProblemSpec;

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        x.swap(k, p);
        let pivot = m[k][k];
        assert!(pivot != 0.0, "singular matrix");
        let (top, rest) = m.split_at_mut(k + 1);
        let row_k = &top[k];
        for (i, row) in rest.iter_mut().enumerate() {
            let f = row[k] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                row[j] -= f * row_k[j];
            }
            x[k + 1 + i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

pub fn system(p: &ProblemSpec, cells: [usize; 3]) -> LinearSystem {
    let g = GridLevel::new(p.origin, p.extent, cells, 0).unwrap();
    assemble(&g, p).unwrap()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn dirichlet_intact(sys: &LinearSystem, x: &[f64]) -> bool {
    sys.constrained
        .iter()
        .zip(x.iter().zip(&sys.prescribed))
        .all(|(&c, (xi, g))| !c || xi.to_bits() == g.to_bits())
}
