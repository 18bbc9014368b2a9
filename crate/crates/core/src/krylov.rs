//! Conjugate gradients, Jacobi-preconditioned CG and Gauss–Seidel sweeps.
//!
//! Convergence is always judged on the recomputed residual `b − A x`, never
//! on the CG recurrence, so the reported relative residual is the true one.

use crate::error::SolveError;
use crate::sparse::{axpy, dot, masked_norm2, norm2, xpby, CsrMatrix};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖A x − b‖₂ / ‖b‖₂` after the last update.
    pub final_relative_residual: f64,
    pub converged: bool,
}

/// Stopping rule for a solve.
#[derive(Debug, Clone, Copy)]
pub struct Control<'a> {
    pub eps: f64,
    pub max_iter: usize,
    /// Rows left out of `‖b‖` (Dirichlet identity rows).
    pub constrained: Option<&'a [bool]>,
}

impl<'a> Control<'a> {
    pub fn new(eps: f64, max_iter: usize) -> Self {
        Control {
            eps,
            max_iter,
            constrained: None,
        }
    }

    pub fn with_constrained(mut self, constrained: &'a [bool]) -> Self {
        self.constrained = Some(constrained);
        self
    }

    fn rhs_norm(&self, b: &[f64]) -> f64 {
        match self.constrained {
            Some(mask) => masked_norm2(b, mask),
            None => norm2(b),
        }
    }
}

fn check_dims(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<(), SolveError> {
    for len in [x.len(), b.len()] {
        if len != a.dim() {
            return Err(SolveError::DimensionMismatch {
                expected: a.dim(),
                found: len,
            });
        }
    }
    Ok(())
}

/// Plain conjugate gradients, updating `x` in place.
pub fn cg(a: &CsrMatrix, x: &mut [f64], b: &[f64], control: &Control<'_>) -> Result<SolveStats, SolveError> {
    pcg(a, x, b, None, control)
}

/// CG preconditioned by `diag(A)⁻¹`.
pub fn jcg(a: &CsrMatrix, x: &mut [f64], b: &[f64], control: &Control<'_>) -> Result<SolveStats, SolveError> {
    let inv = inverse_diagonal(a)?;
    pcg(a, x, b, Some(&inv), control)
}

fn inverse_diagonal(a: &CsrMatrix) -> Result<Vec<f64>, SolveError> {
    a.diagonal()
        .iter()
        .enumerate()
        .map(|(row, &d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(SolveError::NonPositiveDiagonal { row, value: d })
            }
        })
        .collect()
}

fn precondition(inv_diag: Option<&[f64]>, r: &[f64], z: &mut [f64]) {
    match inv_diag {
        Some(d) => {
            for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                *zi = ri * di;
            }
        }
        None => z.copy_from_slice(r),
    }
}

/// The recurrence residual is replaced by the true one once it falls this far below it.
const DRIFT: f64 = 1e-2;
/// Iterations without a new best residual, after a replacement, that count as a stall.
const STALL_WINDOW: usize = 50;

fn pcg(
    a: &CsrMatrix,
    x: &mut [f64],
    b: &[f64],
    inv_diag: Option<&[f64]>,
    control: &Control<'_>,
) -> Result<SolveStats, SolveError> {
    check_dims(a, x, b)?;
    let n = a.dim();
    let bnorm = control.rhs_norm(b);
    let rel = |r: &[f64]| {
        let rn = norm2(r);
        if bnorm == 0.0 {
            rn
        } else {
            rn / bnorm
        }
    };

    let mut r = vec![0.0; n];
    a.residual(x, b, &mut r);
    let mut res = rel(&r);
    if res <= control.eps {
        return Ok(SolveStats {
            iterations: 0,
            final_relative_residual: res,
            converged: true,
        });
    }

    let mut z = vec![0.0; n];
    precondition(inv_diag, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut true_r = vec![0.0; n];
    let mut best = res;
    let mut since_best = 0;
    let mut replaced = false;

    for it in 1..=control.max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SolveError::Breakdown {
                iteration: it,
                curvature: pap,
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);

        a.residual(x, b, &mut true_r);
        res = rel(&true_r);
        if res <= control.eps {
            return Ok(SolveStats {
                iterations: it,
                final_relative_residual: res,
                converged: true,
            });
        }

        if res < best {
            best = res;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if replaced && since_best >= STALL_WINDOW {
            return Ok(SolveStats {
                iterations: it,
                final_relative_residual: res,
                converged: false,
            });
        }

        if norm2(&r) < DRIFT * norm2(&true_r) {
            r.copy_from_slice(&true_r);
            precondition(inv_diag, &r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            replaced = true;
            continue;
        }
        precondition(inv_diag, &r, &mut z);
        let rz_new = dot(&r, &z);
        xpby(&z, rz_new / rz, &mut p);
        rz = rz_new;
    }
    Ok(SolveStats {
        iterations: control.max_iter,
        final_relative_residual: res,
        converged: false,
    })
}

/// One forward lexicographic Gauss–Seidel sweep.
pub fn gauss_seidel_sweep(a: &CsrMatrix, x: &mut [f64], b: &[f64]) -> Result<(), SolveError> {
    check_dims(a, x, b)?;
    if let Some(row) = a.diagonal().iter().position(|&d| d == 0.0) {
        return Err(SolveError::ZeroDiagonal { row });
    }
    let diag = a.diagonal();
    for i in 0..a.dim() {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            if j as usize != i {
                s -= v * x[j as usize];
            }
        }
        x[i] = s / diag[i];
    }
    Ok(())
}

/// Relative residual demanded of the coarse-level solve.
pub const COARSE_TOLERANCE: f64 = 1e-14;

/// Relative residual below which `b − A x` is dominated by rounding in its own
/// evaluation: `√m · u · ‖ |A||x| + |b| ‖₂ / ‖b‖₂`, with `m` the longest row.
pub fn rounding_floor(a: &CsrMatrix, x: &[f64], b: &[f64], constrained: Option<&[bool]>) -> f64 {
    let mag: Vec<f64> = (0..a.dim())
        .map(|i| {
            let (c, v) = a.row(i);
            c.iter().zip(v).map(|(&j, &aij)| (aij * x[j as usize]).abs()).sum::<f64>() + b[i].abs()
        })
        .collect();
    let bnorm = match constrained {
        Some(m) => masked_norm2(b, m),
        None => norm2(b),
    };
    if bnorm == 0.0 {
        return 0.0;
    }
    (a.max_row_nnz() as f64).sqrt() * f64::EPSILON / 2.0 * norm2(&mag) / bnorm
}

/// Solve standing in for a direct factorization on the coarsest grids:
/// JCG to a relative residual of [`COARSE_TOLERANCE`].
///
/// The iteration starts from `b` on `constrained` rows and zero elsewhere.
/// When the iteration stalls above the tolerance, the result is accepted if
/// its residual is at the [`rounding_floor`], so the attained level is the
/// better of the two.
pub fn coarse_solve(a: &CsrMatrix, b: &[f64], constrained: Option<&[bool]>) -> Result<(Vec<f64>, SolveStats), SolveError> {
    let mut x = vec![0.0; a.dim()];
    if let Some(mask) = constrained {
        for ((xi, &m), &bi) in x.iter_mut().zip(mask).zip(b) {
            if m {
                *xi = bi;
            }
        }
    }
    let mut control = Control::new(COARSE_TOLERANCE, 10 * a.dim().max(10));
    control.constrained = constrained;
    let iterations = match jcg(a, &mut x, b, &control) {
        Ok(stats) if stats.converged => return Ok((x, stats)),
        Ok(stats) => stats.iterations,
        // An exactly vanishing search direction: the recurrence residual has
        // underflowed while the true one sits at rounding level.
        Err(SolveError::Breakdown { iteration, curvature }) if curvature == 0.0 => iteration,
        Err(e) => return Err(e),
    };
    let mut r = vec![0.0; a.dim()];
    a.residual(&x, b, &mut r);
    let bnorm = control.rhs_norm(b);
    let res = if bnorm == 0.0 { norm2(&r) } else { norm2(&r) / bnorm };
    if res <= rounding_floor(a, &x, b, constrained) {
        Ok((
            x,
            SolveStats {
                iterations,
                final_relative_residual: res,
                converged: true,
            },
        ))
    } else {
        Err(SolveError::NotConverged {
            iterations,
            relative_residual: res,
        })
    }
}
