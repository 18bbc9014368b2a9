//! Tri-quadratic Serendipity interpolation on a 5×5×5 block of fine nodes.
//!
//! Local nodes carry labels `1 + ix + 5 iy + 25 iz` with `ix, iy, iz ∈ 0..5`
//! and natural coordinates `ix / 2 − 1 ∈ {−1, −½, 0, ½, 1}`. The 20 seed
//! nodes are the block corners and edge midpoints.

/// Number of local nodes in a block.
pub const BLOCK_NODES: usize = 125;
/// Number of seed nodes (8 corners, 12 edge midpoints).
pub const SEEDS: usize = 20;
/// Number of interpolated nodes.
pub const TARGETS: usize = BLOCK_NODES - SEEDS;

/// Local label of the node with local indices `(ix, iy, iz)`.
#[inline]
pub const fn label(ix: usize, iy: usize, iz: usize) -> usize {
    1 + ix + 5 * iy + 25 * iz
}

/// Local indices of a label.
#[inline]
pub const fn indices(label: usize) -> [usize; 3] {
    let l = label - 1;
    [l % 5, (l / 5) % 5, l / 25]
}

/// Natural coordinates of a label.
pub fn natural(label: usize) -> [f64; 3] {
    indices(label).map(|i| i as f64 / 2.0 - 1.0)
}

/// A node is a seed when each local index is even and at most one of them is 2.
pub const fn is_seed(label: usize) -> bool {
    let [x, y, z] = indices(label);
    let even = x % 2 == 0 && y % 2 == 0 && z % 2 == 0;
    let mids = (x == 2) as usize + (y == 2) as usize + (z == 2) as usize;
    even && mids <= 1
}

/// Seed labels in ascending order.
pub fn seed_labels() -> [usize; SEEDS] {
    let mut out = [0; SEEDS];
    let mut k = 0;
    for l in 1..=BLOCK_NODES {
        if is_seed(l) {
            out[k] = l;
            k += 1;
        }
    }
    out
}

/// Serendipity shape function of seed `s` (natural coordinates) at `p`.
pub fn shape(s: [f64; 3], p: [f64; 3]) -> f64 {
    let mid = s.iter().position(|&c| c == 0.0);
    match mid {
        None => {
            let sum = s[0] * p[0] + s[1] * p[1] + s[2] * p[2];
            0.125 * (1.0 + s[0] * p[0]) * (1.0 + s[1] * p[1]) * (1.0 + s[2] * p[2]) * (sum - 2.0)
        }
        Some(a) => {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            0.25 * (1.0 - p[a] * p[a]) * (1.0 + s[b] * p[b]) * (1.0 + s[c] * p[c])
        }
    }
}

/// Weights of every non-seed node over the seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SerendipityTable {
    seeds: [usize; SEEDS],
    targets: Vec<usize>,
    rows: Vec<[f64; SEEDS]>,
    /// Row index per label, `None` for seeds.
    row_of: [Option<usize>; BLOCK_NODES + 1],
}

impl SerendipityTable {
    pub fn build() -> Self {
        let seeds = seed_labels();
        let seed_nat = seeds.map(natural);
        let mut targets = Vec::with_capacity(TARGETS);
        let mut rows = Vec::with_capacity(TARGETS);
        let mut row_of = [None; BLOCK_NODES + 1];
        for l in (1..=BLOCK_NODES).filter(|&l| !is_seed(l)) {
            let p = natural(l);
            let mut row = [0.0; SEEDS];
            for (w, &s) in row.iter_mut().zip(&seed_nat) {
                *w = shape(s, p);
            }
            row_of[l] = Some(rows.len());
            targets.push(l);
            rows.push(row);
        }
        SerendipityTable {
            seeds,
            targets,
            rows,
            row_of,
        }
    }

    pub fn seeds(&self) -> &[usize; SEEDS] {
        &self.seeds
    }

    /// Non-seed labels in ascending order, matching [`Self::rows`].
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn rows(&self) -> &[[f64; SEEDS]] {
        &self.rows
    }

    /// Weights for `label`, or `None` if it is a seed.
    pub fn row(&self, label: usize) -> Option<&[f64; SEEDS]> {
        self.row_of.get(label).copied().flatten().map(|r| &self.rows[r])
    }

    /// Weight of seed `seed` in the row of `label`.
    pub fn weight(&self, label: usize, seed: usize) -> Option<f64> {
        let k = self.seeds.iter().position(|&s| s == seed)?;
        self.row(label).map(|r| r[k])
    }

    /// Interpolated value at `label` from seed values given in seed order.
    pub fn apply(&self, label: usize, seed_values: &[f64; SEEDS]) -> f64 {
        match self.row(label) {
            Some(r) => r.iter().zip(seed_values).map(|(w, v)| w * v).sum(),
            None => {
                let k = self.seeds.iter().position(|&s| s == label).unwrap();
                seed_values[k]
            }
        }
    }
}

impl Default for SerendipityTable {
    fn default() -> Self {
        Self::build()
    }
}
