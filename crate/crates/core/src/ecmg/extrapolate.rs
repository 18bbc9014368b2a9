//! The two extrapolation operators of the cascade.
//!
//! Both are linear in their input pair and local: every output value reads
//! only nodal data of the block or cell that contains it. Neither touches
//! boundary data; callers overwrite Dirichlet entries afterwards.

use rayon::prelude::*;

use super::serendipity::{label, SerendipityTable, SEEDS};
use crate::error::{Error, Result};
use crate::grid::GridLevel;

fn check_pair(coarse: &GridLevel, fine: &GridLevel) -> Result<()> {
    if coarse.is_refined_by(fine) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("{fine} is not a refinement of {coarse}")))
    }
}

fn check_len(grid: &GridLevel, v: &[f64]) -> Result<()> {
    if v.len() == grid.node_count() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: grid.node_count(),
            found: v.len(),
        })
    }
}

/// How the extrapolated values of a 4h cell are spread over its fine nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// 20-node tri-quadratic Serendipity on corners and edge midpoints.
    #[default]
    Serendipity,
    /// 27-node tri-quadratic Lagrange; face and cell centers are extrapolated
    /// by averaging the midpoint rule over the diagonals through them.
    Lagrange27,
}

/// Seed values on the 2h grid: extrapolated values at nodes shared with the
/// 4h grid and corrected values at 4h edge midpoints. With `centers`, 4h face
/// and cell centers are filled too; otherwise those entries stay zero and are
/// never read.
fn seed_field(u_2h: &[f64], u_4h: &[f64], g4: &GridLevel, g2: &GridLevel, centers: bool) -> Vec<f64> {
    let mut s = vec![0.0; g2.node_count()];
    let delta = |i: usize, j: usize, k: usize| u_2h[g2.linear(2 * i, 2 * j, 2 * k)] - u_4h[g4.linear(i, j, k)];
    let [nx, ny, _] = g2.cells;
    s.par_chunks_mut((nx + 1) * (ny + 1)).enumerate().for_each(|(iz, plane)| {
        for iy in 0..=ny {
            for ix in 0..=nx {
                let idx = [ix, iy, iz];
                let odd = idx.iter().filter(|&&i| i % 2 == 1).count();
                let here = u_2h[g2.linear(ix, iy, iz)];
                let v = match odd {
                    0 => 1.25 * here - 0.25 * u_4h[g4.linear(ix / 2, iy / 2, iz / 2)],
                    1 => {
                        let a = idx.iter().position(|&i| i % 2 == 1).unwrap();
                        let lo = idx.map(|i| i / 2);
                        let mut hi = lo;
                        hi[a] += 1;
                        here + 0.125 * (delta(lo[0], lo[1], lo[2]) + delta(hi[0], hi[1], hi[2]))
                    }
                    _ if !centers => continue,
                    m => {
                        // Mean of the midpoint rule over the 2^(m-1) diagonals.
                        let lo = idx.map(|i| i / 2);
                        let mut sum = 0.0;
                        for dz in 0..=iz % 2 {
                            for dy in 0..=iy % 2 {
                                for dx in 0..=ix % 2 {
                                    sum += delta(lo[0] + dx, lo[1] + dy, lo[2] + dz);
                                }
                            }
                        }
                        here + sum / (1 << (m + 2)) as f64
                    }
                };
                plane[ix + (nx + 1) * iy] = v;
            }
        }
    });
    s
}

/// Block owning fine index `i` along an axis with `nb` coarse cells.
#[inline]
fn owner(i: usize, nb: usize) -> usize {
    (i / 4).min(nb - 1)
}

/// 1D quadratic Lagrange weights on nodes −1, 0, 1 at the five local positions.
const LAGRANGE: [[f64; 3]; 5] = [
    [1.0, 0.0, 0.0],
    [0.375, 0.75, -0.125],
    [0.0, 1.0, 0.0],
    [-0.125, 0.75, 0.375],
    [0.0, 0.0, 1.0],
];

fn lagrange_value(seeds: &[f64], g2: &GridLevel, block: [usize; 3], local: [usize; 3]) -> f64 {
    let [wx, wy, wz] = [LAGRANGE[local[0]], LAGRANGE[local[1]], LAGRANGE[local[2]]];
    let mut s = 0.0;
    for (kz, &cz) in wz.iter().enumerate() {
        for (ky, &cy) in wy.iter().enumerate() {
            for (kx, &cx) in wx.iter().enumerate() {
                let w = cx * cy * cz;
                if w != 0.0 {
                    s += w * seeds[g2.linear(2 * block[0] + kx, 2 * block[1] + ky, 2 * block[2] + kz)];
                }
            }
        }
    }
    s
}

/// Fine value at local indices `local` of the 4h block `block`, computed from
/// that block's seeds alone.
pub(crate) fn block_value(seeds: &[f64], g2: &GridLevel, block: [usize; 3], local: [usize; 3], table: &SerendipityTable) -> f64 {
    let at = |l: [usize; 3]| seeds[g2.linear(2 * block[0] + l[0] / 2, 2 * block[1] + l[1] / 2, 2 * block[2] + l[2] / 2)];
    let lab = label(local[0], local[1], local[2]);
    match table.row(lab) {
        None => at(local),
        Some(row) => {
            let mut s = 0.0;
            for (w, &sl) in row.iter().zip(table.seeds()) {
                let l = super::serendipity::indices(sl);
                s += w * at(l);
            }
            s
        }
    }
}

/// Initial guess on grid h from converged solutions on grids 2h and 4h.
///
/// Values at 4h nodes are `(5 u_2h − u_4h)/4`; at 4h edge midpoints
/// `u_2h + (δ_a + δ_b)/8` with `δ = u_2h − u_4h` at the edge ends. These 20
/// seeds per 4h cell are spread over its 125 fine nodes by Serendipity
/// interpolation.
pub fn exp_finite(
    u_2h: &[f64],
    u_4h: &[f64],
    grids: [&GridLevel; 3],
    table: &SerendipityTable,
) -> Result<Vec<f64>> {
    exp_finite_with(u_2h, u_4h, grids, table, Interpolation::Serendipity)
}

/// [`exp_finite`] with a choice of interpolation inside each 4h cell.
pub fn exp_finite_with(
    u_2h: &[f64],
    u_4h: &[f64],
    grids: [&GridLevel; 3],
    table: &SerendipityTable,
    interpolation: Interpolation,
) -> Result<Vec<f64>> {
    let [g4, g2, gh] = grids;
    check_pair(g4, g2)?;
    check_pair(g2, gh)?;
    check_len(g4, u_4h)?;
    check_len(g2, u_2h)?;
    let lagrange = interpolation == Interpolation::Lagrange27;
    let seeds = seed_field(u_2h, u_4h, g4, g2, lagrange);
    debug_assert_eq!(table.seeds().len(), SEEDS);
    let [nx, ny, _] = gh.cells;
    let nb = g4.cells;
    let mut out = vec![0.0; gh.node_count()];
    out.par_chunks_mut((nx + 1) * (ny + 1)).enumerate().for_each(|(iz, plane)| {
        let bz = owner(iz, nb[2]);
        for iy in 0..=ny {
            let by = owner(iy, nb[1]);
            for ix in 0..=nx {
                let bx = owner(ix, nb[0]);
                let local = [ix - 4 * bx, iy - 4 * by, iz - 4 * bz];
                let b = [bx, by, bz];
                plane[ix + (nx + 1) * iy] = if lagrange {
                    lagrange_value(&seeds, g2, b, local)
                } else {
                    block_value(&seeds, g2, b, local, table)
                };
            }
        }
    });
    Ok(out)
}

/// Richardson extrapolant on grid h from converged solutions on grids h and 2h.
///
/// With `δ = u_h − u_2h` at 2h nodes: `u_h + δ/3` at 2h nodes, and
/// `u_h + (δ_a + δ_b)/6` averaged over the 1, 2 or 4 segments through an edge
/// midpoint, face center or cell center whose ends are 2h nodes.
pub fn exp_true(u_h: &[f64], u_2h: &[f64], grids: [&GridLevel; 2]) -> Result<Vec<f64>> {
    let [g2, gh] = grids;
    check_pair(g2, gh)?;
    check_len(g2, u_2h)?;
    check_len(gh, u_h)?;
    let delta: Vec<f64> = (0..g2.node_count())
        .map(|l| {
            let n = g2.node_of(l);
            u_h[gh.linear(2 * n.ix, 2 * n.iy, 2 * n.iz)] - u_2h[l]
        })
        .collect();
    const COEF: [f64; 4] = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0];
    let [nx, ny, _] = gh.cells;
    let mut out = vec![0.0; gh.node_count()];
    out.par_chunks_mut((nx + 1) * (ny + 1)).enumerate().for_each(|(iz, plane)| {
        let rz = span(iz);
        for iy in 0..=ny {
            let ry = span(iy);
            for ix in 0..=nx {
                let rx = span(ix);
                let m = (rx.1 - 1) + (ry.1 - 1) + (rz.1 - 1);
                let mut s = 0.0;
                for z in rz.0..rz.0 + rz.1 {
                    for y in ry.0..ry.0 + ry.1 {
                        for x in rx.0..rx.0 + rx.1 {
                            s += delta[g2.linear(x, y, z)];
                        }
                    }
                }
                let i = ix + (nx + 1) * iy;
                plane[i] = u_h[gh.linear(ix, iy, iz)] + COEF[m] * s;
            }
        }
    });
    Ok(out)
}

/// First 2h index bracketing fine index `i`, and how many there are.
#[inline]
fn span(i: usize) -> (usize, usize) {
    (i / 2, 1 + i % 2)
}
