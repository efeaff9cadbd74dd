//! Structured quadrilateral meshes of the rectangular cracked domain
//! `[0, Lx] × [0, Ly]`.
//!
//! The crack occupies the bottom edge from `x = 0` to the crack tip; the
//! remainder of the bottom edge is the symmetry line (ligament). Nodes are
//! numbered row by row, `id = j (nx + 1) + i`, and elements list their
//! corners counter-clockwise starting bottom-left.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Left,
    Right,
    Top,
    CrackFace,
    Ligament,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::Left,
        BoundaryTag::Right,
        BoundaryTag::Top,
        BoundaryTag::CrackFace,
        BoundaryTag::Ligament,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryTag::Left => "Left",
            BoundaryTag::Right => "Right",
            BoundaryTag::Top => "Top",
            BoundaryTag::CrackFace => "CrackFace",
            BoundaryTag::Ligament => "Ligament",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshSpec {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub crack_tip: [f64; 2],
    /// Geometric growth factor of element size away from the tip; 1 is uniform.
    pub grading: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            lx: 2.0,
            ly: 1.0,
            nx: 64,
            ny: 32,
            crack_tip: [1.0, 0.0],
            grading: 1.15,
        }
    }
}

impl MeshSpec {
    pub fn uniform(lx: f64, ly: f64, nx: usize, ny: usize, crack_tip: [f64; 2]) -> Self {
        MeshSpec {
            lx,
            ly,
            nx,
            ny,
            crack_tip,
            grading: 1.0,
        }
    }

    /// Number of element columns left of the tip, if the tip falls on a grid line.
    fn tip_column(&self) -> Result<usize> {
        let cols = self.crack_tip[0] / self.lx * self.nx as f64;
        let rounded = cols.round();
        if (cols - rounded).abs() > 1e-9 || rounded < 1.0 || rounded >= self.nx as f64 {
            return Err(Error::InvalidMeshSpec(format!(
                "crack tip x = {} does not coincide with an interior grid line of {} columns",
                self.crack_tip[0], self.nx
            )));
        }
        Ok(rounded as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMeshSpec(msg));
        if !(self.lx.is_finite() && self.lx > 0.0 && self.ly.is_finite() && self.ly > 0.0) {
            return bad(format!("extents must be positive, got {} x {}", self.lx, self.ly));
        }
        if self.nx < 1 || self.ny < 1 {
            return bad(format!("element counts must be >= 1, got {} x {}", self.nx, self.ny));
        }
        if !(self.grading.is_finite() && self.grading >= 1.0) {
            return bad(format!("grading must be >= 1, got {}", self.grading));
        }
        let [tx, ty] = self.crack_tip;
        if !(tx > 0.0 && tx < self.lx) || ty != 0.0 {
            return bad(format!("crack tip ({tx}, {ty}) must satisfy 0 < x < Lx, y = 0"));
        }
        self.tip_column().map(|_| ())
    }
}

/// Breakpoints of `n` cells over `[0, length]`, sizes growing by `ratio`
/// per cell away from `x = 0`.
pub fn graded_breakpoints(length: f64, n: usize, ratio: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(0.0);
    if ratio == 1.0 {
        for k in 1..n {
            pts.push(length * k as f64 / n as f64);
        }
    } else {
        let first = length * (ratio - 1.0) / (ratio.powi(n as i32) - 1.0);
        let mut size = first;
        let mut x = 0.0;
        for _ in 1..n {
            x += size;
            pts.push(x);
            size *= ratio;
        }
    }
    pts.push(length);
    pts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 4]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub lx: f64,
    pub ly: f64,
    pub crack_tip: [f64; 2],
}

/// Builds the tensor-product mesh described by `spec`.
pub fn generate(spec: &MeshSpec) -> Result<Mesh> {
    spec.validate()?;
    let left_cols = spec.tip_column()?;
    let right_cols = spec.nx - left_cols;
    let tip_x = spec.crack_tip[0];

    // x lines: graded toward the tip from both sides
    let mut xs: Vec<f64> = graded_breakpoints(tip_x, left_cols, spec.grading)
        .iter()
        .rev()
        .map(|d| tip_x - d)
        .collect();
    xs[0] = 0.0;
    let right = graded_breakpoints(spec.lx - tip_x, right_cols, spec.grading);
    xs.extend(right.iter().skip(1).map(|d| tip_x + d));
    *xs.last_mut().unwrap() = spec.lx;

    let ys = graded_breakpoints(spec.ly, spec.ny, spec.grading);

    let nx1 = spec.nx + 1;
    let id = |i: usize, j: usize| j * nx1 + i;
    let mut nodes = Vec::with_capacity(nx1 * (spec.ny + 1));
    for &y in &ys {
        for &x in &xs {
            nodes.push([x, y]);
        }
    }
    let mut elements = Vec::with_capacity(spec.nx * spec.ny);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }

    let mut boundary_edges = Vec::with_capacity(2 * (spec.nx + spec.ny));
    for i in 0..spec.nx {
        let tag = if i < left_cols {
            BoundaryTag::CrackFace
        } else {
            BoundaryTag::Ligament
        };
        boundary_edges.push(BoundaryEdge {
            nodes: [id(i, 0), id(i + 1, 0)],
            tag,
        });
    }
    for j in 0..spec.ny {
        boundary_edges.push(BoundaryEdge {
            nodes: [id(spec.nx, j), id(spec.nx, j + 1)],
            tag: BoundaryTag::Right,
        });
    }
    for i in (0..spec.nx).rev() {
        boundary_edges.push(BoundaryEdge {
            nodes: [id(i + 1, spec.ny), id(i, spec.ny)],
            tag: BoundaryTag::Top,
        });
    }
    for j in (0..spec.ny).rev() {
        boundary_edges.push(BoundaryEdge {
            nodes: [id(0, j + 1), id(0, j)],
            tag: BoundaryTag::Left,
        });
    }

    Ok(Mesh {
        nodes,
        elements,
        boundary_edges,
        lx: spec.lx,
        ly: spec.ly,
        crack_tip: spec.crack_tip,
    })
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, element: usize) -> [[f64; 2]; 4] {
        let e = &self.elements[element];
        [self.nodes[e[0]], self.nodes[e[1]], self.nodes[e[2]], self.nodes[e[3]]]
    }

    /// Signed area by the shoelace formula (exact for straight-sided quads).
    pub fn element_area(&self, element: usize) -> f64 {
        let c = self.element_coords(element);
        let mut a = 0.0;
        for k in 0..4 {
            let p = c[k];
            let q = c[(k + 1) % 4];
            a += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * a
    }

    /// Sorted, deduplicated nodes lying on edges with the given tag.
    pub fn nodes_with_tag(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.nodes)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn crack_tip_node(&self) -> Option<usize> {
        let [tx, ty] = self.crack_tip;
        self.nodes
            .iter()
            .position(|p| (p[0] - tx).abs() < 1e-12 * self.lx && (p[1] - ty).abs() < 1e-12 * self.ly)
    }

    /// Plain-text dump: node, element and edge listings.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# slfem mesh v1");
        let _ = writeln!(
            s,
            "# domain {:.17e} {:.17e} tip {:.17e} {:.17e}",
            self.lx, self.ly, self.crack_tip[0], self.crack_tip[1]
        );
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "{i} {:.17e} {:.17e}", p[0], p[1]);
        }
        let _ = writeln!(s, "elements {}", self.elements.len());
        for (i, e) in self.elements.iter().enumerate() {
            let _ = writeln!(s, "{i} {} {} {} {}", e[0], e[1], e[2], e[3]);
        }
        let _ = writeln!(s, "edges {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.name());
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshDefect {
    NonPositiveJacobian { element: usize, corner: usize, det: f64 },
    UntaggedExteriorEdge { nodes: [usize; 2] },
    MultiplyTaggedEdge { nodes: [usize; 2], count: usize },
    TaggedInteriorEdge { nodes: [usize; 2] },
    NodeOutOfBounds { node: usize, point: [f64; 2] },
    BadNodeIndex { element: usize, index: usize },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeshDiagnostics {
    pub defects: Vec<MeshDefect>,
}

impl MeshDiagnostics {
    pub fn is_ok(&self) -> bool {
        self.defects.is_empty()
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Checks corner Jacobians, boundary tag completeness and node bounds.
/// Collects every defect instead of stopping at the first.
pub fn validate(mesh: &Mesh) -> MeshDiagnostics {
    let mut defects = Vec::new();
    let tol = 1e-12 * mesh.lx.max(mesh.ly);

    for (n, p) in mesh.nodes.iter().enumerate() {
        let inside = p[0] >= -tol && p[0] <= mesh.lx + tol && p[1] >= -tol && p[1] <= mesh.ly + tol;
        if !inside || !p[0].is_finite() || !p[1].is_finite() {
            defects.push(MeshDefect::NodeOutOfBounds { node: n, point: *p });
        }
    }

    let mut edge_use: HashMap<(usize, usize), usize> = HashMap::new();
    for (el, conn) in mesh.elements.iter().enumerate() {
        if let Some(&index) = conn.iter().find(|&&i| i >= mesh.nodes.len()) {
            defects.push(MeshDefect::BadNodeIndex { element: el, index });
            continue;
        }
        let c = mesh.element_coords(el);
        for k in 0..4 {
            let prev = c[(k + 3) % 4];
            let here = c[k];
            let next = c[(k + 1) % 4];
            let det = (next[0] - here[0]) * (prev[1] - here[1]) - (next[1] - here[1]) * (prev[0] - here[0]);
            if !(det > 0.0) {
                defects.push(MeshDefect::NonPositiveJacobian {
                    element: el,
                    corner: k,
                    det,
                });
            }
        }
        for k in 0..4 {
            *edge_use.entry(edge_key(conn[k], conn[(k + 1) % 4])).or_default() += 1;
        }
    }

    let mut tag_count: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &mesh.boundary_edges {
        *tag_count.entry(edge_key(e.nodes[0], e.nodes[1])).or_default() += 1;
    }

    let mut exterior: Vec<(usize, usize)> = edge_use
        .iter()
        .filter(|(_, &uses)| uses == 1)
        .map(|(&k, _)| k)
        .collect();
    exterior.sort_unstable();
    for key in exterior {
        match tag_count.get(&key).copied().unwrap_or(0) {
            0 => defects.push(MeshDefect::UntaggedExteriorEdge { nodes: [key.0, key.1] }),
            1 => {}
            count => defects.push(MeshDefect::MultiplyTaggedEdge {
                nodes: [key.0, key.1],
                count,
            }),
        }
    }
    let mut tagged: Vec<(usize, usize)> = tag_count.keys().copied().collect();
    tagged.sort_unstable();
    for key in tagged {
        if edge_use.get(&key).copied().unwrap_or(0) != 1 {
            defects.push(MeshDefect::TaggedInteriorEdge { nodes: [key.0, key.1] });
        }
    }

    MeshDiagnostics { defects }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Mesh {
        generate(&MeshSpec::uniform(2.0, 1.0, 2, 2, [1.0, 0.0])).unwrap()
    }

    #[test]
    fn two_by_two_counts() {
        let m = small();
        assert_eq!(m.num_nodes(), 9);
        assert_eq!(m.num_elements(), 4);
        assert_eq!(m.boundary_edges.len(), 8);
        let count = |t| m.boundary_edges.iter().filter(|e| e.tag == t).count();
        assert_eq!(count(BoundaryTag::Top), 2);
        assert_eq!(count(BoundaryTag::Left), 2);
        assert_eq!(count(BoundaryTag::Right), 2);
        assert_eq!(count(BoundaryTag::CrackFace), 1);
        assert_eq!(count(BoundaryTag::Ligament), 1);
        assert!(validate(&m).is_ok());
    }

    #[test]
    fn uniform_areas_equal() {
        let m = generate(&MeshSpec::uniform(2.0, 1.0, 8, 4, [1.0, 0.0])).unwrap();
        for e in 0..m.num_elements() {
            assert!((m.element_area(e) - 0.25 * 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn tip_off_grid_rejected() {
        let spec = MeshSpec::uniform(2.0, 1.0, 3, 2, [1.0, 0.0]);
        assert!(matches!(generate(&spec), Err(Error::InvalidMeshSpec(_))));
    }

    #[test]
    fn bad_specs_rejected() {
        let base = MeshSpec::uniform(2.0, 1.0, 2, 2, [1.0, 0.0]);
        for spec in [
            MeshSpec { nx: 0, ..base },
            MeshSpec { grading: 0.5, ..base },
            MeshSpec {
                crack_tip: [2.0, 0.0],
                ..base
            },
            MeshSpec {
                crack_tip: [1.0, 0.1],
                ..base
            },
            MeshSpec { lx: -1.0, ..base },
        ] {
            assert!(generate(&spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn swapped_nodes_flagged() {
        let mut m = small();
        m.elements[0].swap(1, 3);
        let d = validate(&m);
        assert!(d
            .defects
            .iter()
            .any(|x| matches!(x, MeshDefect::NonPositiveJacobian { element: 0, .. })));
    }

    #[test]
    fn missing_tag_flagged() {
        let mut m = small();
        m.boundary_edges
            .retain(|e| e.tag != BoundaryTag::Right || e.nodes[0] != 2);
        let d = validate(&m);
        assert_eq!(d.defects, vec![MeshDefect::UntaggedExteriorEdge { nodes: [2, 5] }]);
    }

    #[test]
    fn tip_node_splits_tags() {
        let m = generate(&MeshSpec::default()).unwrap();
        let tip = m.crack_tip_node().unwrap();
        let crack = m.nodes_with_tag(BoundaryTag::CrackFace);
        let lig = m.nodes_with_tag(BoundaryTag::Ligament);
        let both: Vec<_> = crack.iter().filter(|n| lig.contains(n)).collect();
        assert_eq!(both, vec![&tip]);
        for e in &m.boundary_edges {
            let mid = 0.5 * (m.nodes[e.nodes[0]][0] + m.nodes[e.nodes[1]][0]);
            match e.tag {
                BoundaryTag::CrackFace => assert!(mid < 1.0),
                BoundaryTag::Ligament => assert!(mid > 1.0),
                _ => {}
            }
        }
    }

    #[test]
    fn text_dump_header() {
        let s = small().to_text();
        assert!(s.starts_with("# slfem mesh v1\n"));
        assert!(s.contains("nodes 9\n"));
        assert!(s.contains("elements 4\n"));
        assert!(s.contains("edges 8\n"));
    }
}
