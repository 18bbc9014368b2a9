//! Trilinear finite element discretization.
//!
//! Volume terms use 2×2×2 Gauss–Legendre quadrature and Robin face terms 2×2,
//! which integrate the bilinear forms exactly for constant coefficients.
//! Dirichlet nodes stay in the system as identity rows; their couplings are
//! moved to the right-hand side of the free rows, so the matrix stays
//! symmetric and every level keeps the full node numbering.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Face, GridHierarchy, GridLevel, NodeIndex, NodeKind};
use crate::krylov::{Control, SolveStats};
use crate::problems::{FaceCondition, ProblemSpec, ScalarField};
use crate::sparse::{masked_norm2, norm2, CsrMatrix};

pub type ElementMatrix = [[f64; 8]; 8];
pub type ElementVector = [f64; 8];

/// Tensor-product quadrature on `[-1, 1]^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
}

impl<const D: usize> QuadratureRule<D> {
    /// Two-point Gauss–Legendre in every direction.
    pub fn gauss2() -> Self {
        let g = 1.0 / 3f64.sqrt();
        Self::tensor(&[-g, g], &[1.0, 1.0])
    }

    /// Three-point Gauss–Legendre in every direction.
    pub fn gauss3() -> Self {
        let g = (0.6f64).sqrt();
        Self::tensor(&[-g, 0.0, g], &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
    }

    /// Tensor product of a 1D rule, first coordinate fastest.
    pub fn tensor(nodes: &[f64], weights: &[f64]) -> Self {
        let m = nodes.len();
        let count = m.pow(D as u32);
        let mut points = Vec::with_capacity(count);
        let mut ws = Vec::with_capacity(count);
        for k in 0..count {
            let mut p = [0.0; D];
            let mut w = 1.0;
            let mut r = k;
            for pd in p.iter_mut() {
                *pd = nodes[r % m];
                w *= weights[r % m];
                r /= m;
            }
            points.push(p);
            ws.push(w);
        }
        QuadratureRule { points, weights: ws }
    }
}

/// Axis-aligned box element: lower corner and edge lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lo: [f64; 3],
    pub size: [f64; 3],
}

impl Cell {
    fn check(&self) -> Result<()> {
        if self.size.iter().all(|&s| s > 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(Error::DegenerateElement(self.size))
        }
    }

    fn map(&self, xi: [f64; 3]) -> [f64; 3] {
        [
            self.lo[0] + 0.5 * (xi[0] + 1.0) * self.size[0],
            self.lo[1] + 0.5 * (xi[1] + 1.0) * self.size[1],
            self.lo[2] + 0.5 * (xi[2] + 1.0) * self.size[2],
        ]
    }
}

/// Natural coordinates of local node `a`; bit `d` of `a` selects the side along axis `d`.
#[inline]
fn corner(a: usize) -> [f64; 3] {
    [
        if a & 1 == 0 { -1.0 } else { 1.0 },
        if a & 2 == 0 { -1.0 } else { 1.0 },
        if a & 4 == 0 { -1.0 } else { 1.0 },
    ]
}

#[inline]
fn shape(a: usize, xi: [f64; 3]) -> f64 {
    let c = corner(a);
    0.125 * (1.0 + c[0] * xi[0]) * (1.0 + c[1] * xi[1]) * (1.0 + c[2] * xi[2])
}

/// Physical gradient of shape function `a` at natural point `xi`.
#[inline]
fn shape_grad(a: usize, xi: [f64; 3], size: [f64; 3]) -> [f64; 3] {
    let c = corner(a);
    let (fx, fy, fz) = (1.0 + c[0] * xi[0], 1.0 + c[1] * xi[1], 1.0 + c[2] * xi[2]);
    [
        0.25 * c[0] * fy * fz / size[0],
        0.25 * c[1] * fx * fz / size[1],
        0.25 * c[2] * fx * fy / size[2],
    ]
}

/// `K_ab = ∫ beta ∇φ_a·∇φ_b` over the cell.
pub fn element_stiffness(beta: &ScalarField, cell: &Cell) -> Result<ElementMatrix> {
    cell.check()?;
    let rule = QuadratureRule::<3>::gauss2();
    let jac = cell.size[0] * cell.size[1] * cell.size[2] / 8.0;
    let mut k = [[0.0; 8]; 8];
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let scale = beta.eval(cell.map(*xi)) * w * jac;
        let grads: [[f64; 3]; 8] = std::array::from_fn(|a| shape_grad(a, *xi, cell.size));
        for a in 0..8 {
            for b in 0..8 {
                let (ga, gb) = (grads[a], grads[b]);
                k[a][b] += scale * (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2]);
            }
        }
    }
    Ok(k)
}

/// `F_a = ∫ f φ_a` over the cell.
pub fn element_load(f: &ScalarField, cell: &Cell) -> Result<ElementVector> {
    cell.check()?;
    let mut out = [0.0; 8];
    if f.is_zero() {
        return Ok(out);
    }
    let rule = QuadratureRule::<3>::gauss2();
    let jac = cell.size[0] * cell.size[1] * cell.size[2] / 8.0;
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let v = f.eval(cell.map(*xi)) * w * jac;
        for (a, o) in out.iter_mut().enumerate() {
            *o += v * shape(a, *xi);
        }
    }
    Ok(out)
}

/// Axis-aligned boundary rectangle spanned by `axes[0]` and `axes[1]`.
/// Its four nodes are ordered `(0,0), (1,0), (0,1), (1,1)` in those axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceRect {
    pub lo: [f64; 3],
    pub axes: [usize; 2],
    pub lengths: [f64; 2],
}

/// Robin terms `∫ alpha φ_a φ_b` and `∫ g φ_a` on one element face.
pub fn robin_face_contribution(
    alpha: &ScalarField,
    data: &ScalarField,
    rect: &FaceRect,
) -> Result<([[f64; 4]; 4], [f64; 4])> {
    if !rect.lengths.iter().all(|&l| l > 0.0 && l.is_finite()) {
        return Err(Error::DegenerateElement([rect.lengths[0], rect.lengths[1], 0.0]));
    }
    let rule = QuadratureRule::<2>::gauss2();
    let jac = rect.lengths[0] * rect.lengths[1] / 4.0;
    let mut m = [[0.0; 4]; 4];
    let mut g = [0.0; 4];
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let mut p = rect.lo;
        p[rect.axes[0]] += 0.5 * (xi[0] + 1.0) * rect.lengths[0];
        p[rect.axes[1]] += 0.5 * (xi[1] + 1.0) * rect.lengths[1];
        let phi: [f64; 4] = std::array::from_fn(|k| {
            let su = if k & 1 == 0 { -1.0 } else { 1.0 };
            let sv = if k & 2 == 0 { -1.0 } else { 1.0 };
            0.25 * (1.0 + su * xi[0]) * (1.0 + sv * xi[1])
        });
        let a = alpha.eval(p);
        if a < 0.0 {
            return Err(Error::NegativeRobin { alpha: a, point: p });
        }
        let am = a * w * jac;
        let gv = data.eval(p) * w * jac;
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] += am * (phi[r] * phi[c]);
            }
            g[r] += gv * phi[r];
        }
    }
    Ok((m, g))
}

/// Element-local node numbers of the four nodes on `face`, in [`FaceRect`] order.
fn face_nodes(face: Face) -> ([usize; 4], [usize; 2]) {
    let n = face.axis();
    let t: [usize; 2] = match n {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let side = usize::from(face.is_max());
    let nodes = std::array::from_fn(|k| {
        let bu = k & 1;
        let bv = (k >> 1) & 1;
        (side << n) | (bu << t[0]) | (bv << t[1])
    });
    (nodes, t)
}

/// `A u = f` on one grid level, with identity rows at Dirichlet nodes.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub grid: GridLevel,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// True at Dirichlet nodes.
    pub constrained: Vec<bool>,
    /// Boundary values at Dirichlet nodes, zero elsewhere.
    pub prescribed: Vec<f64>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn free_count(&self) -> usize {
        self.constrained.iter().filter(|c| !**c).count()
    }

    /// Overwrites Dirichlet entries with the prescribed values.
    pub fn apply_dirichlet(&self, x: &mut [f64]) {
        for ((xi, &c), &g) in x.iter_mut().zip(&self.constrained).zip(&self.prescribed) {
            if c {
                *xi = g;
            }
        }
    }

    /// Zero on free nodes, boundary data on Dirichlet nodes.
    pub fn initial_guess(&self) -> Vec<f64> {
        self.prescribed.clone()
    }

    /// `‖A x − f‖₂ / ‖f‖₂` with `‖f‖` taken over the free rows; the
    /// absolute residual when that norm vanishes.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let mut r = vec![0.0; self.dim()];
        self.matrix.residual(x, &self.rhs, &mut r);
        let num = norm2(&r);
        let den = masked_norm2(&self.rhs, &self.constrained);
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    pub fn control(&self, eps: f64) -> Control<'_> {
        Control::new(eps, 10 * self.dim()).with_constrained(&self.constrained)
    }

    pub fn stats_for(&self, x: &[f64], iterations: usize, eps: f64) -> SolveStats {
        let r = self.relative_residual(x);
        SolveStats {
            iterations,
            final_relative_residual: r,
            converged: r <= eps,
        }
    }
}

struct ElementData {
    k: ElementMatrix,
    f: ElementVector,
}

struct Line {
    lens: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
}

fn element_layer(grid: &GridLevel, problem: &ProblemSpec, ez: usize, k_const: Option<&ElementMatrix>) -> Result<Vec<ElementData>> {
    let [nx, ny, nz] = grid.cells;
    let h = grid.spacing;
    (0..nx * ny)
        .into_par_iter()
        .map(|e| {
            let (ex, ey) = (e % nx, e / nx);
            let cell = Cell {
                lo: grid.coord(ex, ey, ez),
                size: h,
            };
            let mut k = match k_const {
                Some(k) => *k,
                None => element_stiffness(&problem.beta, &cell)?,
            };
            let mut f = element_load(&problem.source, &cell)?;
            let idx = [ex, ey, ez];
            let n = [nx, ny, nz];
            for face in Face::ALL {
                let a = face.axis();
                let on_face = if face.is_max() { idx[a] + 1 == n[a] } else { idx[a] == 0 };
                if !on_face {
                    continue;
                }
                let FaceCondition::Robin { alpha, data } = problem.face(face) else {
                    continue;
                };
                if alpha.is_zero() && data.is_zero() {
                    continue;
                }
                let (nodes, t) = face_nodes(face);
                let mut lo = cell.lo;
                if face.is_max() {
                    lo[a] += h[a];
                }
                let rect = FaceRect {
                    lo,
                    axes: t,
                    lengths: [h[t[0]], h[t[1]]],
                };
                let (m, g) = robin_face_contribution(alpha, data, &rect)?;
                for r in 0..4 {
                    for c in 0..4 {
                        k[nodes[r]][nodes[c]] += m[r][c];
                    }
                    f[nodes[r]] += g[r];
                }
            }
            Ok(ElementData { k, f })
        })
        .collect()
}

/// Assembles the system for `problem` on `grid`.
pub fn assemble(grid: &GridLevel, problem: &ProblemSpec) -> Result<LinearSystem> {
    let tags = problem.tags();
    let n = grid.node_count();
    let [nx, ny, nz] = grid.cells;

    let mut constrained = vec![false; n];
    let mut prescribed = vec![0.0; n];
    for l in 0..n {
        let node = grid.node_of(l);
        if grid.classify_node(node, &tags) == NodeKind::Dirichlet {
            constrained[l] = true;
            let p = grid.coord(node.ix, node.iy, node.iz);
            let g = grid
                .faces_of(node)
                .find_map(|f| match problem.face(f) {
                    FaceCondition::Dirichlet { value } => Some(value.eval(p)),
                    _ => None,
                })
                .unwrap_or(0.0);
            prescribed[l] = g;
        }
    }

    let k_const = match problem.beta.as_constant() {
        Some(_) => Some(element_stiffness(
            &problem.beta,
            &Cell {
                lo: grid.origin,
                size: grid.spacing,
            },
        )?),
        None => None,
    };

    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0usize);
    let mut cols: Vec<u32> = Vec::with_capacity(n * 27);
    let mut vals: Vec<f64> = Vec::with_capacity(n * 27);
    let mut rhs = Vec::with_capacity(n);

    let mut below: Option<Vec<ElementData>> = None;
    let mut above = Some(element_layer(grid, problem, 0, k_const.as_ref())?);
    for iz in 0..=nz {
        let layers = [below.as_ref(), above.as_ref()];
        let lines: Vec<Line> = (0..=ny)
            .into_par_iter()
            .map(|iy| {
                let mut line = Line {
                    lens: Vec::with_capacity(nx + 1),
                    cols: Vec::with_capacity((nx + 1) * 27),
                    vals: Vec::with_capacity((nx + 1) * 27),
                    rhs: Vec::with_capacity(nx + 1),
                };
                for ix in 0..=nx {
                    assemble_row(grid, [ix, iy, iz], &layers, &constrained, &prescribed, &mut line);
                }
                line
            })
            .collect();
        for line in lines {
            for len in line.lens {
                row_ptr.push(row_ptr.last().unwrap() + len);
            }
            cols.extend_from_slice(&line.cols);
            vals.extend_from_slice(&line.vals);
            rhs.extend_from_slice(&line.rhs);
        }
        below = above.take();
        if iz + 1 < nz {
            above = Some(element_layer(grid, problem, iz + 1, k_const.as_ref())?);
        }
    }

    Ok(LinearSystem {
        grid: grid.clone(),
        matrix: CsrMatrix::from_parts(n, row_ptr, cols, vals),
        rhs,
        constrained,
        prescribed,
    })
}

/// Sums the element contributions of one node in ascending element order, so
/// entries `(i, j)` and `(j, i)` see the same additions in the same order.
fn assemble_row(
    grid: &GridLevel,
    node: [usize; 3],
    layers: &[Option<&Vec<ElementData>>; 2],
    constrained: &[bool],
    prescribed: &[f64],
    line: &mut Line,
) {
    let [ix, iy, iz] = node;
    let [nx, ny, nz] = grid.cells;
    let i = grid.linear(ix, iy, iz);
    if constrained[i] {
        line.lens.push(1);
        line.cols.push(i as u32);
        line.vals.push(1.0);
        line.rhs.push(prescribed[i]);
        return;
    }
    let mut acc = [0.0f64; 27];
    let mut present = [false; 27];
    let mut f = 0.0;
    for (li, ez) in [iz.wrapping_sub(1), iz].into_iter().enumerate() {
        if ez >= nz {
            continue;
        }
        let layer = layers[li].expect("element layer");
        for ey in [iy.wrapping_sub(1), iy] {
            if ey >= ny {
                continue;
            }
            for ex in [ix.wrapping_sub(1), ix] {
                if ex >= nx {
                    continue;
                }
                let e = &layer[ex + nx * ey];
                let a = (ix - ex) | ((iy - ey) << 1) | ((iz - ez) << 2);
                for b in 0..8 {
                    // Offset of local node b relative to the row node, in {0,1,2}.
                    let dx = ex + (b & 1) + 1 - ix;
                    let dy = ey + ((b >> 1) & 1) + 1 - iy;
                    let dz = ez + ((b >> 2) & 1) + 1 - iz;
                    let slot = dx + 3 * dy + 9 * dz;
                    acc[slot] += e.k[a][b];
                    present[slot] = true;
                }
                f += e.f[a];
            }
        }
    }
    let mut len = 0;
    for slot in 0..27 {
        if !present[slot] {
            continue;
        }
        let j = grid.linear(ix + slot % 3 - 1, iy + (slot / 3) % 3 - 1, iz + slot / 9 - 1);
        if constrained[j] {
            f -= acc[slot] * prescribed[j];
        } else {
            line.cols.push(j as u32);
            line.vals.push(acc[slot]);
            len += 1;
        }
    }
    line.lens.push(len);
    line.rhs.push(f);
}

/// Assembled systems for every level of a hierarchy.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub hierarchy: GridHierarchy,
    pub systems: Vec<LinearSystem>,
}

impl Discretization {
    pub fn new(hierarchy: GridHierarchy, problem: &ProblemSpec) -> Result<Self> {
        let systems = hierarchy
            .levels()
            .iter()
            .map(|g| assemble(g, problem))
            .collect::<Result<Vec<_>>>()?;
        Ok(Discretization { hierarchy, systems })
    }

    pub fn levels(&self) -> usize {
        self.systems.len()
    }

    pub fn system(&self, k: usize) -> &LinearSystem {
        &self.systems[k]
    }

    pub fn grid(&self, k: usize) -> &GridLevel {
        self.hierarchy.level(k)
    }
}

/// Exact solution sampled at the nodes of `grid`.
pub fn interpolate(grid: &GridLevel, u: &ScalarField) -> Vec<f64> {
    (0..grid.node_count())
        .into_par_iter()
        .map(|l| {
            let NodeIndex { ix, iy, iz } = grid.node_of(l);
            u.eval(grid.coord(ix, iy, iz))
        })
        .collect()
}
