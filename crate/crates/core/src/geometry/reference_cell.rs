//! The reference unit-cell: a tensor-product Lagrange mesh of a lattice
//! pattern on `[0,1]^d`, with nodes classified as interior / face / corner.

use std::collections::BTreeMap;

use crate::error::Error;

/// Classification of a reference-cell node relative to `[0,1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Face,
    Corner,
}

/// Built-in lattice patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellPattern {
    Solid2d,
    CrossHollowSquare2d,
    Plus2d,
    Solid3d,
    Bcc3d,
}

impl CellPattern {
    pub fn parse(name: &str) -> Result<Self, Error> {
        match name {
            "solid2d" => Ok(Self::Solid2d),
            "cross-hollow-square2d" => Ok(Self::CrossHollowSquare2d),
            "plus2d" => Ok(Self::Plus2d),
            "solid3d" => Ok(Self::Solid3d),
            "bcc3d" => Ok(Self::Bcc3d),
            other => Err(Error::UnknownPattern(other.to_string())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Solid2d | Self::CrossHollowSquare2d | Self::Plus2d => 2,
            Self::Solid3d | Self::Bcc3d => 3,
        }
    }

    /// Base element grid resolution (before refinement).
    fn base_resolution(&self) -> usize {
        match self {
            Self::Solid2d | Self::Solid3d => 1,
            Self::CrossHollowSquare2d | Self::Plus2d | Self::Bcc3d => 8,
        }
    }

    /// Occupancy of base element `(i, j, k)` on an `n^d` grid.
    fn occupied(&self, idx: [usize; 3], n: usize, strut: f64) -> bool {
        match self {
            Self::Solid2d | Self::Solid3d => true,
            Self::CrossHollowSquare2d => {
                let frame = ((strut * n as f64).round() as usize).clamp(1, n / 2);
                let (i, j) = (idx[0], idx[1]);
                let on_frame = i < frame || i >= n - frame || j < frame || j >= n - frame;
                let band = ((strut * n as f64 / 2.0).round() as usize).max(1) - 1;
                let on_diag = i.abs_diff(j) <= band || (i + j).abs_diff(n - 1) <= band;
                on_frame || on_diag
            }
            Self::Plus2d => {
                let frame = ((strut * n as f64).round() as usize).clamp(1, n / 2);
                let (i, j) = (idx[0], idx[1]);
                let on_frame = i < frame || i >= n - frame || j < frame || j >= n - frame;
                let lo = (n - frame) / 2;
                let hi = lo + frame;
                let on_plus = (lo..hi).contains(&i) || (lo..hi).contains(&j);
                on_frame || on_plus
            }
            Self::Bcc3d => {
                // occupied when the element center lies within a strut of
                // radius strut/2 around one of the four body diagonals
                let h = 1.0 / n as f64;
                let radius = (0.5 * strut).max(0.8 * h);
                let c = [
                    (idx[0] as f64 + 0.5) * h,
                    (idx[1] as f64 + 0.5) * h,
                    (idx[2] as f64 + 0.5) * h,
                ];
                let dirs = [
                    [1.0, 1.0, 1.0],
                    [1.0, 1.0, -1.0],
                    [1.0, -1.0, 1.0],
                    [-1.0, 1.0, 1.0],
                ];
                let origins = [
                    [0.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0],
                    [0.0, 1.0, 0.0],
                    [1.0, 0.0, 0.0],
                ];
                let inv_sqrt3 = 1.0 / 3.0f64.sqrt();
                dirs.iter().zip(origins.iter()).any(|(dir, org)| {
                    let rel = [c[0] - org[0], c[1] - org[1], c[2] - org[2]];
                    let proj =
                        (rel[0] * dir[0] + rel[1] * dir[1] + rel[2] * dir[2]) * inv_sqrt3;
                    let mut dist2 = 0.0;
                    for a in 0..3 {
                        let p = rel[a] - proj * dir[a] * inv_sqrt3;
                        dist2 += p * p;
                    }
                    dist2.sqrt() <= radius
                })
            }
        }
    }
}

/// One tensor-product Lagrange element of the reference mesh.
#[derive(Debug, Clone)]
pub struct Element {
    /// Cell-local node ids, lexicographic with the first axis fastest.
    pub nodes: Vec<usize>,
    /// Lower corner of the element box in `[0,1]^d`.
    pub origin: [f64; 3],
    /// Element box size per axis.
    pub h: [f64; 3],
}

/// Finite-element mesh of the unit cell.
#[derive(Debug, Clone)]
pub struct ReferenceCell {
    pub dim: usize,
    pub degree: usize,
    /// Fine element grid resolution per axis.
    pub elems_per_axis: usize,
    pub nodes: Vec<[f64; 3]>,
    pub node_class: Vec<NodeClass>,
    pub elements: Vec<Element>,
    /// Fine node-lattice coordinates of each node.
    lattice: Vec<[usize; 3]>,
}

impl ReferenceCell {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Total displacement DOF of one cell.
    pub fn n_dofs(&self) -> usize {
        self.dim * self.nodes.len()
    }

    pub fn lattice_coord(&self, node: usize) -> [usize; 3] {
        self.lattice[node]
    }

    /// Highest lattice coordinate per axis.
    pub fn lattice_max(&self) -> usize {
        self.degree * self.elems_per_axis
    }

    /// Nodes on the cell face `xi_axis = side` (side false -> 0, true -> 1),
    /// sorted by transverse lattice coordinates.
    ///
    /// The sort keys run over the remaining axes in increasing axis order,
    /// so matched faces of two cells align index by index.
    pub fn face_nodes(&self, axis: usize, side: bool) -> Vec<usize> {
        let m = self.lattice_max();
        let want = if side { m } else { 0 };
        let mut ids: Vec<usize> = (0..self.n_nodes())
            .filter(|&i| self.lattice[i][axis] == want)
            .collect();
        ids.sort_by_key(|&i| {
            let c = self.lattice[i];
            let mut key = [0usize; 3];
            let mut k = 0;
            for a in 0..self.dim {
                if a != axis {
                    key[k] = c[a];
                    k += 1;
                }
            }
            (key[0], key[1])
        });
        ids
    }

    /// Elements owning a face on the cell boundary `xi_axis = side`.
    pub fn boundary_elements(&self, axis: usize, side: bool) -> Vec<usize> {
        let n = self.elems_per_axis;
        let h = 1.0 / n as f64;
        let want = if side { (n - 1) as f64 * h } else { 0.0 };
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| (e.origin[axis] - want).abs() < 0.5 * h)
            .map(|(i, _)| i)
            .collect()
    }

    fn validate(&self) -> Result<(), Error> {
        let m = self.lattice_max();
        // every unit-cube vertex hosts exactly one node
        let mut corner_count = 0usize;
        for (i, c) in self.lattice.iter().enumerate() {
            let extremes = (0..self.dim).filter(|&a| c[a] == 0 || c[a] == m).count();
            let class = if extremes == self.dim {
                corner_count += 1;
                NodeClass::Corner
            } else if extremes > 0 {
                NodeClass::Face
            } else {
                NodeClass::Interior
            };
            if self.node_class[i] != class {
                return Err(Error::InvalidInput(format!(
                    "inconsistent classification for node {i}"
                )));
            }
        }
        if corner_count != 1 << self.dim {
            return Err(Error::InvalidInput(format!(
                "pattern does not reach all cell corners ({corner_count} of {})",
                1 << self.dim
            )));
        }

        // matching opposite faces under unit translation
        for axis in 0..self.dim {
            let lo = self.face_nodes(axis, false);
            let hi = self.face_nodes(axis, true);
            if lo.len() != hi.len() {
                return Err(Error::InvalidInput(format!(
                    "opposite faces along axis {axis} have different node counts"
                )));
            }
            for (&a, &b) in lo.iter().zip(hi.iter()) {
                let ca = self.lattice[a];
                let cb = self.lattice[b];
                for t in 0..self.dim {
                    if t != axis && ca[t] != cb[t] {
                        return Err(Error::InvalidInput(format!(
                            "faces along axis {axis} do not match under translation"
                        )));
                    }
                }
            }
        }

        // connectivity via shared nodes
        let mut comp = vec![usize::MAX; self.n_nodes()];
        let mut stack = Vec::new();
        if let Some(e0) = self.elements.first() {
            for &nd in &e0.nodes {
                if comp[nd] == usize::MAX {
                    comp[nd] = 0;
                    stack.push(nd);
                }
            }
        }
        // node -> elements adjacency
        let mut node_elems: Vec<Vec<usize>> = vec![Vec::new(); self.n_nodes()];
        for (ei, e) in self.elements.iter().enumerate() {
            for &nd in &e.nodes {
                node_elems[nd].push(ei);
            }
        }
        let mut visited_elem = vec![false; self.elements.len()];
        if !self.elements.is_empty() {
            visited_elem[0] = true;
        }
        while let Some(nd) = stack.pop() {
            for &ei in &node_elems[nd] {
                if !visited_elem[ei] {
                    visited_elem[ei] = true;
                    for &other in &self.elements[ei].nodes {
                        if comp[other] == usize::MAX {
                            comp[other] = 0;
                            stack.push(other);
                        }
                    }
                }
            }
        }
        if comp.iter().any(|&c| c == usize::MAX) {
            return Err(Error::InvalidInput(
                "reference cell mesh is disconnected".into(),
            ));
        }
        Ok(())
    }
}

/// Build the reference unit-cell mesh for a pattern.
///
/// `refinement` halves the element size that many times; `strut` is the
/// strut thickness of the patterned cells in cell widths.
pub fn build_reference_cell(
    pattern: CellPattern,
    degree: usize,
    refinement: usize,
    strut: f64,
) -> Result<ReferenceCell, Error> {
    if !(1..=2).contains(&degree) {
        return Err(Error::InvalidInput(format!(
            "element degree must be 1 or 2, got {degree}"
        )));
    }
    if !(strut > 0.0 && strut <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "strut thickness must lie in (0, 0.5], got {strut}"
        )));
    }
    let d = pattern.dim();
    let base = pattern.base_resolution();
    let scale = 1usize << refinement;
    let n = base * scale;
    let h = 1.0 / n as f64;

    // occupancy on the fine grid, inherited from the base grid
    let fine_index = |i: usize, j: usize, k: usize| (k * n + j) * n + i;
    let count_elems = if d == 2 { n * n } else { n * n * n };
    let mut occupied = vec![false; count_elems];
    let kz = if d == 3 { n } else { 1 };
    for k in 0..kz {
        for j in 0..n {
            for i in 0..n {
                let bidx = [i / scale, j / scale, k / scale];
                let occ = pattern.occupied(bidx, base, strut);
                let idx = if d == 2 { j * n + i } else { fine_index(i, j, k) };
                occupied[idx] = occ;
            }
        }
    }

    // collect nodes of occupied elements
    let p = degree;
    let mut node_ids: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut lattice = Vec::new();
    let mut elements = Vec::new();
    let lat_max = p * n;
    let coord = |l: usize| l as f64 / lat_max as f64;

    for k in 0..kz {
        for j in 0..n {
            for i in 0..n {
                let idx = if d == 2 { j * n + i } else { fine_index(i, j, k) };
                if !occupied[idx] {
                    continue;
                }
                let mut conn = Vec::with_capacity((p + 1).pow(d as u32));
                let cz = if d == 3 { p + 1 } else { 1 };
                for c in 0..cz {
                    for b in 0..=p {
                        for a in 0..=p {
                            let lat = [p * i + a, p * j + b, p * k + c];
                            let id = *node_ids.entry(lat).or_insert_with(|| {
                                nodes.push([
                                    coord(lat[0]),
                                    coord(lat[1]),
                                    if d == 3 { coord(lat[2]) } else { 0.0 },
                                ]);
                                lattice.push(lat);
                                nodes.len() - 1
                            });
                            conn.push(id);
                        }
                    }
                }
                elements.push(Element {
                    nodes: conn,
                    origin: [
                        i as f64 * h,
                        j as f64 * h,
                        if d == 3 { k as f64 * h } else { 0.0 },
                    ],
                    h: [h, h, if d == 3 { h } else { 1.0 }],
                });
            }
        }
    }

    let node_class = lattice
        .iter()
        .map(|c| {
            let extremes = (0..d).filter(|&a| c[a] == 0 || c[a] == lat_max).count();
            if extremes == d {
                NodeClass::Corner
            } else if extremes > 0 {
                NodeClass::Face
            } else {
                NodeClass::Interior
            }
        })
        .collect();

    let rc = ReferenceCell {
        dim: d,
        degree,
        elems_per_axis: n,
        nodes,
        node_class,
        elements,
        lattice,
    };
    rc.validate()?;
    Ok(rc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solid2d_refinement0_is_one_element() {
        let rc = build_reference_cell(CellPattern::Solid2d, 1, 0, 0.25).unwrap();
        assert_eq!(rc.elements.len(), 1);
        assert_eq!(rc.n_nodes(), 4);
        assert!(rc
            .node_class
            .iter()
            .all(|c| matches!(c, NodeClass::Corner)));
        assert_eq!(rc.n_dofs(), 8);
    }

    #[test]
    fn solid2d_refinement2_counts() {
        let rc = build_reference_cell(CellPattern::Solid2d, 1, 2, 0.25).unwrap();
        assert_eq!(rc.elements.len(), 16);
        assert_eq!(rc.n_nodes(), 25);
        let corners = rc
            .node_class
            .iter()
            .filter(|c| matches!(c, NodeClass::Corner))
            .count();
        let faces = rc
            .node_class
            .iter()
            .filter(|c| matches!(c, NodeClass::Face))
            .count();
        let interior = rc
            .node_class
            .iter()
            .filter(|c| matches!(c, NodeClass::Interior))
            .count();
        assert_eq!((corners, faces, interior), (4, 12, 9));
    }

    #[test]
    fn cross_hollow_square_is_valid_and_hollow() {
        let rc = build_reference_cell(CellPattern::CrossHollowSquare2d, 2, 1, 0.25).unwrap();
        // strictly fewer elements than the solid cell at the same resolution
        let n = rc.elems_per_axis;
        assert!(rc.elements.len() < n * n);
        // validate() already checked connectivity and face matching
        assert!(rc
            .node_class
            .iter()
            .any(|c| matches!(c, NodeClass::Interior)));
    }

    #[test]
    fn plus2d_and_bcc3d_build() {
        build_reference_cell(CellPattern::Plus2d, 1, 0, 0.25).unwrap();
        let rc = build_reference_cell(CellPattern::Bcc3d, 1, 0, 0.25).unwrap();
        assert_eq!(rc.dim, 3);
        let n = rc.elems_per_axis;
        assert!(rc.elements.len() < n * n * n);
    }

    #[test]
    fn unknown_pattern_is_rejected() {
        assert!(matches!(
            CellPattern::parse("hexagon"),
            Err(Error::UnknownPattern(_))
        ));
    }

    #[test]
    fn face_lists_align_under_translation() {
        let rc = build_reference_cell(CellPattern::CrossHollowSquare2d, 2, 0, 0.25).unwrap();
        for axis in 0..2 {
            let lo = rc.face_nodes(axis, false);
            let hi = rc.face_nodes(axis, true);
            assert_eq!(lo.len(), hi.len());
            for (&a, &b) in lo.iter().zip(hi.iter()) {
                let ca = rc.lattice_coord(a);
                let cb = rc.lattice_coord(b);
                let other = 1 - axis;
                assert_eq!(ca[other], cb[other]);
            }
        }
    }
}
