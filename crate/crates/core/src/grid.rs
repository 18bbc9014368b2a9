//! Embedded uniform hexahedral grids on an axis-aligned box.
//!
//! A [`GridHierarchy`] is a sequence of [`GridLevel`]s where level `k + 1`
//! halves every spacing of level `k`. Nodes are numbered lexicographically
//! with `x` running fastest, so a node `(ix, iy, iz)` of level `k` coincides
//! with node `(2ix, 2iy, 2iz)` of level `k + 1`.

use std::fmt;

use crate::error::{Error, Result};

/// One of the six faces of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMin,
        Face::XMax,
        Face::YMin,
        Face::YMax,
        Face::ZMin,
        Face::ZMax,
    ];

    /// Coordinate axis normal to the face.
    pub fn axis(self) -> usize {
        match self {
            Face::XMin | Face::XMax => 0,
            Face::YMin | Face::YMax => 1,
            Face::ZMin | Face::ZMax => 2,
        }
    }

    pub fn is_max(self) -> bool {
        matches!(self, Face::XMax | Face::YMax | Face::ZMax)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::XMin => "x_min",
            Face::XMax => "x_max",
            Face::YMin => "y_min",
            Face::YMax => "y_max",
            Face::ZMin => "z_min",
            Face::ZMax => "z_max",
        }
    }
}

/// Boundary condition type attached to a face. Robin with `alpha = 0` is Neumann.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Dirichlet,
    Robin,
}

/// Kind of every face, indexed by [`Face::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryTags(pub [BoundaryKind; 6]);

impl BoundaryTags {
    pub fn all(kind: BoundaryKind) -> Self {
        BoundaryTags([kind; 6])
    }

    pub fn kind(&self, face: Face) -> BoundaryKind {
        self.0[face.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Interior,
    Dirichlet,
    Robin,
}

/// Integer grid coordinates of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeIndex {
    pub ix: usize,
    pub iy: usize,
    pub iz: usize,
}

impl NodeIndex {
    pub fn new(ix: usize, iy: usize, iz: usize) -> Self {
        NodeIndex { ix, iy, iz }
    }

    pub fn get(&self, axis: usize) -> usize {
        match axis {
            0 => self.ix,
            1 => self.iy,
            _ => self.iz,
        }
    }
}

/// A uniform grid of `nx × ny × nz` hexahedral cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLevel {
    pub cells: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub extent: [f64; 3],
    /// Position in the hierarchy, 0 = coarsest.
    pub level: usize,
}

impl GridLevel {
    pub fn new(origin: [f64; 3], extent: [f64; 3], cells: [usize; 3], level: usize) -> Result<Self> {
        for axis in 0..3 {
            if cells[axis] == 0 {
                return Err(Error::InvalidGrid(format!("zero cells along axis {axis}")));
            }
            if !(extent[axis] > 0.0) || !extent[axis].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "extent {} along axis {axis} is not positive",
                    extent[axis]
                )));
            }
            if !origin[axis].is_finite() {
                return Err(Error::InvalidGrid(format!("non-finite origin along axis {axis}")));
            }
        }
        let spacing = [
            extent[0] / cells[0] as f64,
            extent[1] / cells[1] as f64,
            extent[2] / cells[2] as f64,
        ];
        Ok(GridLevel {
            cells,
            spacing,
            origin,
            extent,
            level,
        })
    }

    pub fn nx(&self) -> usize {
        self.cells[0]
    }

    pub fn ny(&self) -> usize {
        self.cells[1]
    }

    pub fn nz(&self) -> usize {
        self.cells[2]
    }

    /// Nodes per axis, `cells + 1`.
    pub fn nodes_per_axis(&self) -> [usize; 3] {
        [self.cells[0] + 1, self.cells[1] + 1, self.cells[2] + 1]
    }

    pub fn node_count(&self) -> usize {
        let [a, b, c] = self.nodes_per_axis();
        a * b * c
    }

    pub fn cell_count(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Lexicographic index, `x` fastest. The caller guarantees the bounds.
    #[inline]
    pub fn linear(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + (self.cells[0] + 1) * (iy + (self.cells[1] + 1) * iz)
    }

    pub fn linear_index(&self, n: NodeIndex) -> Result<usize> {
        self.check(n)?;
        Ok(self.linear(n.ix, n.iy, n.iz))
    }

    #[inline]
    pub fn node_of(&self, linear: usize) -> NodeIndex {
        let sx = self.cells[0] + 1;
        let sy = self.cells[1] + 1;
        NodeIndex {
            ix: linear % sx,
            iy: (linear / sx) % sy,
            iz: linear / (sx * sy),
        }
    }

    fn check(&self, n: NodeIndex) -> Result<()> {
        if n.ix > self.cells[0] || n.iy > self.cells[1] || n.iz > self.cells[2] {
            return Err(Error::NodeOutOfRange {
                ix: n.ix,
                iy: n.iy,
                iz: n.iz,
                nx: self.cells[0],
                ny: self.cells[1],
                nz: self.cells[2],
            });
        }
        Ok(())
    }

    /// Physical coordinates of a node, `origin + index * spacing`.
    pub fn node_coord(&self, n: NodeIndex) -> Result<[f64; 3]> {
        self.check(n)?;
        Ok(self.coord(n.ix, n.iy, n.iz))
    }

    #[inline]
    pub fn coord(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        [
            self.origin[0] + ix as f64 * self.spacing[0],
            self.origin[1] + iy as f64 * self.spacing[1],
            self.origin[2] + iz as f64 * self.spacing[2],
        ]
    }

    /// Faces of the box touched by node `n`, in [`Face::ALL`] order.
    pub fn faces_of(&self, n: NodeIndex) -> impl Iterator<Item = Face> + '_ {
        Face::ALL.into_iter().filter(move |f| {
            let i = n.get(f.axis());
            if f.is_max() {
                i == self.cells[f.axis()]
            } else {
                i == 0
            }
        })
    }

    /// Interior, or the dominant boundary kind of the faces the node touches.
    /// Dirichlet wins over Robin on shared edges and corners.
    pub fn classify_node(&self, n: NodeIndex, tags: &BoundaryTags) -> NodeKind {
        let mut kind = NodeKind::Interior;
        for face in self.faces_of(n) {
            match tags.kind(face) {
                BoundaryKind::Dirichlet => return NodeKind::Dirichlet,
                BoundaryKind::Robin => kind = NodeKind::Robin,
            }
        }
        kind
    }

    /// Same box with every cell count halved, if they are all even.
    pub fn coarsened(&self) -> Option<GridLevel> {
        if self.level == 0 || self.cells.iter().any(|c| c % 2 != 0) {
            return None;
        }
        GridLevel::new(
            self.origin,
            self.extent,
            [self.cells[0] / 2, self.cells[1] / 2, self.cells[2] / 2],
            self.level - 1,
        )
        .ok()
    }

    pub fn refined(&self) -> GridLevel {
        GridLevel {
            cells: [self.cells[0] * 2, self.cells[1] * 2, self.cells[2] * 2],
            spacing: [
                self.extent[0] / (2 * self.cells[0]) as f64,
                self.extent[1] / (2 * self.cells[1]) as f64,
                self.extent[2] / (2 * self.cells[2]) as f64,
            ],
            origin: self.origin,
            extent: self.extent,
            level: self.level + 1,
        }
    }

    /// True when `fine` is this grid refined once on the same box.
    pub fn is_refined_by(&self, fine: &GridLevel) -> bool {
        self.origin == fine.origin
            && self.extent == fine.extent
            && (0..3).all(|a| fine.cells[a] == 2 * self.cells[a])
    }

    /// `"32x32x32"`.
    pub fn mesh_label(&self) -> String {
        format!("{}x{}x{}", self.cells[0], self.cells[1], self.cells[2])
    }
}

impl fmt::Display for GridLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level {} ({})", self.level, self.mesh_label())
    }
}

/// Nested grids from coarsest to finest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHierarchy {
    levels: Vec<GridLevel>,
}

impl GridHierarchy {
    /// Builds `num_levels` grids, the `k`-th with `coarsest * 2^k` cells per axis.
    ///
    /// At least 2 coarse cells per axis and 3 levels are required so that the
    /// extrapolation on the third level has a complete coarse element.
    pub fn build(
        origin: [f64; 3],
        extent: [f64; 3],
        coarsest: [usize; 3],
        num_levels: usize,
    ) -> Result<Self> {
        if coarsest.iter().any(|&c| c < 2) {
            return Err(Error::InvalidGrid(format!(
                "coarsest grid {coarsest:?} needs at least 2 cells per axis"
            )));
        }
        if num_levels < 3 {
            return Err(Error::InvalidGrid(format!(
                "{num_levels} levels requested, at least 3 are needed"
            )));
        }
        if num_levels > 16 {
            return Err(Error::InvalidGrid(format!("{num_levels} levels is unreasonably deep")));
        }
        let mut levels = Vec::with_capacity(num_levels);
        levels.push(GridLevel::new(origin, extent, coarsest, 0)?);
        for _ in 1..num_levels {
            let next = levels.last().unwrap().refined();
            levels.push(next);
        }
        Ok(GridHierarchy { levels })
    }

    pub fn levels(&self) -> &[GridLevel] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &GridLevel {
        &self.levels[k]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn finest(&self) -> &GridLevel {
        self.levels.last().unwrap()
    }

    pub fn coarsest(&self) -> &GridLevel {
        &self.levels[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> GridLevel {
        GridLevel::new([0.0; 3], [1.0; 3], [n; 3], 0).unwrap()
    }

    fn problem1_tags() -> BoundaryTags {
        use BoundaryKind::*;
        BoundaryTags([Dirichlet, Robin, Dirichlet, Robin, Dirichlet, Robin])
    }

    #[test]
    fn hierarchy_sizes() {
        let h = GridHierarchy::build([0.0; 3], [1.0; 3], [8, 8, 8], 7).unwrap();
        assert_eq!(h.finest().cells, [512, 512, 512]);
        assert_eq!(h.finest().spacing[0], 1.0 / 512.0);

        let h = GridHierarchy::build([0.0; 3], [1.0; 3], [10, 4, 5], 7).unwrap();
        assert_eq!(h.finest().cells, [640, 256, 320]);

        let h = GridHierarchy::build([0.0; 3], [1.0; 3], [2, 2, 2], 3).unwrap();
        let counts: Vec<_> = h.levels().iter().map(|g| g.node_count()).collect();
        assert_eq!(counts, vec![27, 125, 729]);
        assert_eq!(h.level(2).cells, [8, 8, 8]);
    }

    #[test]
    fn hierarchy_rejects_bad_input() {
        assert!(GridHierarchy::build([0.0; 3], [1.0; 3], [1, 4, 4], 3).is_err());
        assert!(GridHierarchy::build([0.0; 3], [1.0; 3], [4, 4, 4], 2).is_err());
        assert!(GridHierarchy::build([0.0; 3], [0.0, 1.0, 1.0], [4, 4, 4], 3).is_err());
        assert!(GridHierarchy::build([0.0; 3], [-1.0, 1.0, 1.0], [4, 4, 4], 3).is_err());
        assert!(GridLevel::new([0.0; 3], [1.0; 3], [0, 4, 4], 0).is_err());
    }

    #[test]
    fn coordinates() {
        let g = unit(8);
        assert_eq!(g.node_coord(NodeIndex::new(0, 0, 0)).unwrap(), [0.0, 0.0, 0.0]);
        assert_eq!(g.node_coord(NodeIndex::new(8, 8, 8)).unwrap(), [1.0, 1.0, 1.0]);
        assert_eq!(g.node_coord(NodeIndex::new(4, 0, 0)).unwrap(), [0.5, 0.0, 0.0]);
        assert!(g.node_coord(NodeIndex::new(9, 0, 0)).is_err());
    }

    #[test]
    fn linearization_matches_block_labels() {
        // On a 4x4x4 block the 1-based label is 1 + ix + 5 iy + 25 iz.
        let g = unit(4);
        assert_eq!(g.linear(4, 1, 1) + 1, 35);
        assert_eq!(g.linear(4, 4, 4) + 1, 125);
        for l in 0..g.node_count() {
            let n = g.node_of(l);
            assert_eq!(g.linear_index(n).unwrap(), l);
        }
    }

    #[test]
    fn coincident_nodes_agree_bitwise() {
        let h = GridHierarchy::build([0.0; 3], [1.0; 3], [10, 4, 5], 4).unwrap();
        for k in 1..h.len() {
            let (c, f) = (h.level(k - 1), h.level(k));
            assert!(c.is_refined_by(f));
            for l in 0..c.node_count() {
                let n = c.node_of(l);
                let cf = f.coord(2 * n.ix, 2 * n.iy, 2 * n.iz);
                assert_eq!(c.coord(n.ix, n.iy, n.iz), cf);
            }
        }
    }

    #[test]
    fn classification() {
        let g = unit(8);
        let tags = problem1_tags();
        assert_eq!(g.classify_node(NodeIndex::new(0, 4, 4), &tags), NodeKind::Dirichlet);
        assert_eq!(g.classify_node(NodeIndex::new(8, 4, 4), &tags), NodeKind::Robin);
        assert_eq!(g.classify_node(NodeIndex::new(0, 8, 8), &tags), NodeKind::Dirichlet);
        assert_eq!(g.classify_node(NodeIndex::new(8, 8, 8), &tags), NodeKind::Robin);
        assert_eq!(g.classify_node(NodeIndex::new(3, 4, 5), &tags), NodeKind::Interior);
    }

    #[test]
    fn classification_ignores_face_order() {
        // Build the same tags with faces visited in a different order.
        let g = unit(4);
        let tags = problem1_tags();
        let mut rev = BoundaryTags::all(BoundaryKind::Robin);
        for f in Face::ALL.iter().rev() {
            rev.0[f.index()] = tags.kind(*f);
        }
        for l in 0..g.node_count() {
            let n = g.node_of(l);
            assert_eq!(g.classify_node(n, &tags), g.classify_node(n, &rev));
        }
    }

    #[test]
    fn coarsen_roundtrip() {
        let h = GridHierarchy::build([0.0; 3], [1.0; 3], [4, 2, 6], 3).unwrap();
        assert_eq!(h.level(2).coarsened().as_ref(), Some(h.level(1)));
        assert_eq!(h.level(0).coarsened(), None);
    }
}
