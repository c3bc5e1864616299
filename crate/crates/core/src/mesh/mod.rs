//! Conforming quadrilateral meshes of the reference domain with subdomain
//! labels and boundary markers.

mod builders;
mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub use builders::{
    beam_mesh, fsi_benchmark_mesh, flapping_mesh, rectangle_mesh, FlappingGeometry,
    BENCHMARK_TIP, CYLINDER_CENTER, CYLINDER_RADIUS,
};

use crate::tensor::Mat2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subdomain {
    Fluid,
    Solid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Inflow,
    Outflow,
    Wall,
    Cylinder,
    Interface,
    DragBoundary,
}

impl Marker {
    pub const ALL: [Marker; 6] = [
        Marker::Inflow,
        Marker::Outflow,
        Marker::Wall,
        Marker::Cylinder,
        Marker::Interface,
        Marker::DragBoundary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Marker::Inflow => "inflow",
            Marker::Outflow => "outflow",
            Marker::Wall => "wall",
            Marker::Cylinder => "cylinder",
            Marker::Interface => "interface",
            Marker::DragBoundary => "drag",
        }
    }

    pub fn from_name(name: &str) -> Option<Marker> {
        Marker::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name.trim()))
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Circle onto which vertices of the facets carrying `marker` are snapped
/// during refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    pub fn project(&self, p: [f64; 2]) -> [f64; 2] {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [
            self.center[0] + self.radius * d[0] / n,
            self.center[1] + self.radius * d[1] / n,
        ]
    }

    pub fn distance(&self, p: [f64; 2]) -> f64 {
        ((p[0] - self.center[0]).hypot(p[1] - self.center[1]) - self.radius).abs()
    }
}

/// Unordered vertex pair identifying a facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FacetKey(pub usize, pub usize);

impl FacetKey {
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            FacetKey(a, b)
        } else {
            FacetKey(b, a)
        }
    }
}

/// Local edge `e` of a cell joins local vertices `e` and `(e + 1) % 4`.
pub const CELL_EDGES: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex indices.
    pub cells: Vec<[usize; 4]>,
    pub subdomains: Vec<Subdomain>,
    /// Non-zero tags mark cells of the controlled subregion.
    pub cell_tags: Vec<u32>,
    pub facet_markers: BTreeMap<FacetKey, BTreeSet<Marker>>,
    pub refinement_level: usize,
    pub curves: Vec<(Marker, Circle)>,
}

/// Edge connectivity derived from the cell list.
#[derive(Clone, Debug)]
pub struct Topology {
    pub edges: Vec<FacetKey>,
    pub cell_edges: Vec<[usize; 4]>,
    /// `(cell, local edge)` pairs touching each edge.
    pub edge_cells: Vec<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    InvertedCell { cell: usize, point: [f64; 2], det: f64 },
    UnmarkedInterface { facet: FacetKey },
    OverSharedFacet { facet: FacetKey, count: usize },
    HangingNode { vertex: usize, facet: FacetKey },
    DuplicateCell { cell: usize, other: usize },
    InconsistentLengths,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvertedCell { cell, point, det } => write!(
                f,
                "cell {cell}: non-positive geometric Jacobian {det:.3e} at reference point ({}, {})",
                point[0], point[1]
            ),
            Violation::UnmarkedInterface { facet } => write!(
                f,
                "facet ({}, {}) separates fluid and solid but is not marked interface",
                facet.0, facet.1
            ),
            Violation::OverSharedFacet { facet, count } => write!(
                f,
                "facet ({}, {}) is shared by {count} cells",
                facet.0, facet.1
            ),
            Violation::HangingNode { vertex, facet } => write!(
                f,
                "vertex {vertex} hangs on boundary facet ({}, {})",
                facet.0, facet.1
            ),
            Violation::DuplicateCell { cell, other } => {
                write!(f, "cells {cell} and {other} use the same vertices")
            }
            Violation::InconsistentLengths => {
                f.write_str("cell, subdomain and tag arrays differ in length")
            }
        }
    }
}

/// Bilinear shape functions on the unit square, CCW from the origin.
#[inline]
pub fn bilinear_shape(xi: f64, eta: f64) -> [f64; 4] {
    [
        (1.0 - xi) * (1.0 - eta),
        xi * (1.0 - eta),
        xi * eta,
        (1.0 - xi) * eta,
    ]
}

#[inline]
fn bilinear_grad(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    [
        [-(1.0 - eta), -(1.0 - xi)],
        [1.0 - eta, -xi],
        [eta, xi],
        [-eta, 1.0 - xi],
    ]
}

impl Mesh {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn count(&self, subdomain: Subdomain) -> usize {
        self.subdomains.iter().filter(|&&s| s == subdomain).count()
    }

    pub fn cell_vertices(&self, cell: usize) -> [[f64; 2]; 4] {
        self.cells[cell].map(|v| self.vertices[v])
    }

    /// Maps reference coordinates of `cell` to physical coordinates.
    pub fn map_point(&self, cell: usize, xi: f64, eta: f64) -> [f64; 2] {
        let n = bilinear_shape(xi, eta);
        let x = self.cell_vertices(cell);
        let mut p = [0.0; 2];
        for (ni, xi) in n.iter().zip(x.iter()) {
            p[0] += ni * xi[0];
            p[1] += ni * xi[1];
        }
        p
    }

    /// Geometry Jacobian `∂x/∂ξ` (columns are the reference directions).
    pub fn map_jacobian(&self, cell: usize, xi: f64, eta: f64) -> Mat2<f64> {
        let g = bilinear_grad(xi, eta);
        let x = self.cell_vertices(cell);
        let mut m = Mat2::zero();
        for (gi, xi) in g.iter().zip(x.iter()) {
            for r in 0..2 {
                for c in 0..2 {
                    m[(r, c)] += xi[r] * gi[c];
                }
            }
        }
        m
    }

    /// Largest vertex-to-vertex distance of a cell.
    pub fn diameter(&self, cell: usize) -> f64 {
        let x = self.cell_vertices(cell);
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                d = d.max((x[i][0] - x[j][0]).hypot(x[i][1] - x[j][1]));
            }
        }
        d
    }

    pub fn area(&self, cell: usize) -> f64 {
        let x = self.cell_vertices(cell);
        let mut a = 0.0;
        for i in 0..4 {
            let j = (i + 1) % 4;
            a += x[i][0] * x[j][1] - x[j][0] * x[i][1];
        }
        0.5 * a
    }

    pub fn markers(&self, a: usize, b: usize) -> Option<&BTreeSet<Marker>> {
        self.facet_markers.get(&FacetKey::new(a, b))
    }

    pub fn has_marker(&self, a: usize, b: usize, marker: Marker) -> bool {
        self.markers(a, b).is_some_and(|s| s.contains(&marker))
    }

    pub fn add_marker(&mut self, a: usize, b: usize, marker: Marker) {
        self.facet_markers
            .entry(FacetKey::new(a, b))
            .or_default()
            .insert(marker);
    }

    pub fn uses_marker(&self, marker: Marker) -> bool {
        self.facet_markers.values().any(|s| s.contains(&marker))
    }

    pub fn topology(&self) -> Topology {
        let mut index: HashMap<FacetKey, usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_cells: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut cell_edges = Vec::with_capacity(self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            let mut ce = [0; 4];
            for (e, &(i, j)) in CELL_EDGES.iter().enumerate() {
                let key = FacetKey::new(cell[i], cell[j]);
                let id = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_cells.push(Vec::new());
                    edges.len() - 1
                });
                edge_cells[id].push((c, e));
                ce[e] = id;
            }
            cell_edges.push(ce);
        }
        Topology {
            edges,
            cell_edges,
            edge_cells,
        }
    }

    /// Marks every facet shared by a fluid and a solid cell as interface.
    pub fn mark_interfaces(&mut self) {
        let topo = self.topology();
        for (e, cells) in topo.edge_cells.iter().enumerate() {
            if cells.len() == 2 && self.subdomains[cells[0].0] != self.subdomains[cells[1].0] {
                let k = topo.edges[e];
                self.add_marker(k.0, k.1, Marker::Interface);
            }
        }
    }

    /// `(cell, local edge)` for every facet carrying `marker`, seen from a
    /// cell of the requested subdomain (or any cell when `None`).
    pub fn marked_facets(&self, marker: Marker, side: Option<Subdomain>) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (c, cell) in self.cells.iter().enumerate() {
            if side.is_some_and(|s| s != self.subdomains[c]) {
                continue;
            }
            for (e, &(i, j)) in CELL_EDGES.iter().enumerate() {
                if self.has_marker(cell[i], cell[j], marker) {
                    out.push((c, e));
                }
            }
        }
        out
    }

    /// Splits every quad into four; markers and tags are inherited and
    /// vertices created on curved facets are snapped to their circle.
    pub fn refine_uniform(&self) -> Mesh {
        let topo = self.topology();
        let mut vertices = self.vertices.clone();
        let mut midpoint = Vec::with_capacity(topo.edges.len());
        for key in &topo.edges {
            let (a, b) = (self.vertices[key.0], self.vertices[key.1]);
            let mut m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            if let Some(set) = self.facet_markers.get(key) {
                if let Some((_, circle)) = self.curves.iter().find(|(mk, _)| set.contains(mk)) {
                    m = circle.project(m);
                }
            }
            vertices.push(m);
            midpoint.push(vertices.len() - 1);
        }
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        let mut subdomains = Vec::with_capacity(4 * self.cells.len());
        let mut cell_tags = Vec::with_capacity(4 * self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            let center = self.map_point(c, 0.5, 0.5);
            vertices.push(center);
            let ctr = vertices.len() - 1;
            let m = topo.cell_edges[c].map(|e| midpoint[e]);
            let [v0, v1, v2, v3] = *cell;
            for child in [
                [v0, m[0], ctr, m[3]],
                [m[0], v1, m[1], ctr],
                [ctr, m[1], v2, m[2]],
                [m[3], ctr, m[2], v3],
            ] {
                cells.push(child);
                subdomains.push(self.subdomains[c]);
                cell_tags.push(self.cell_tags[c]);
            }
        }
        let mut facet_markers = BTreeMap::new();
        let edge_id: HashMap<FacetKey, usize> =
            topo.edges.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        for (key, set) in &self.facet_markers {
            let Some(&e) = edge_id.get(key) else { continue };
            let m = midpoint[e];
            facet_markers.insert(FacetKey::new(key.0, m), set.clone());
            facet_markers.insert(FacetKey::new(m, key.1), set.clone());
        }
        Mesh {
            vertices,
            cells,
            subdomains,
            cell_tags,
            facet_markers,
            refinement_level: self.refinement_level + 1,
            curves: self.curves.clone(),
        }
    }

    pub fn refined(&self, times: usize) -> Mesh {
        let mut m = self.clone();
        for _ in 0..times {
            m = m.refine_uniform();
        }
        m
    }

    /// Lists all violations of the mesh invariants; empty for a valid mesh.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.cells.len() != self.subdomains.len() || self.cells.len() != self.cell_tags.len() {
            out.push(Violation::InconsistentLengths);
            return out;
        }
        let g = 0.5 * (1.0 - (3.0f64 / 5.0).sqrt());
        let samples = [0.0, g, 0.5, 1.0 - g, 1.0];
        for c in 0..self.cells.len() {
            'cell: for &xi in &samples {
                for &eta in &samples {
                    let det = self.map_jacobian(c, xi, eta).det();
                    if det <= 0.0 {
                        out.push(Violation::InvertedCell {
                            cell: c,
                            point: [xi, eta],
                            det,
                        });
                        break 'cell;
                    }
                }
            }
        }
        let topo = self.topology();
        let mut boundary = Vec::new();
        for (e, cells) in topo.edge_cells.iter().enumerate() {
            let key = topo.edges[e];
            match cells.len() {
                1 => boundary.push(key),
                2 => {
                    let (a, b) = (cells[0].0, cells[1].0);
                    if self.subdomains[a] != self.subdomains[b]
                        && !self.has_marker(key.0, key.1, Marker::Interface)
                    {
                        out.push(Violation::UnmarkedInterface { facet: key });
                    }
                }
                n => out.push(Violation::OverSharedFacet {
                    facet: key,
                    count: n,
                }),
            }
        }
        for key in &boundary {
            let (a, b) = (self.vertices[key.0], self.vertices[key.1]);
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            for (v, p) in self.vertices.iter().enumerate() {
                if v == key.0 || v == key.1 {
                    continue;
                }
                let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2;
                if t <= 1e-9 || t >= 1.0 - 1e-9 {
                    continue;
                }
                let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                if (p[0] - q[0]).hypot(p[1] - q[1]) < 1e-10 * len2.sqrt() {
                    out.push(Violation::HangingNode {
                        vertex: v,
                        facet: *key,
                    });
                }
            }
        }
        let mut seen: HashMap<[usize; 4], usize> = HashMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            let mut k = *cell;
            k.sort_unstable();
            if let Some(&other) = seen.get(&k) {
                out.push(Violation::DuplicateCell { cell: c, other });
            } else {
                seen.insert(k, c);
            }
        }
        out
    }

    /// Finds a cell containing `x` and its reference coordinates. Cells of
    /// the preferred subdomain are searched first.
    pub fn locate(&self, x: [f64; 2], prefer: Option<Subdomain>) -> Option<(usize, [f64; 2])> {
        let mut order: Vec<usize> = (0..self.cells.len()).collect();
        if let Some(p) = prefer {
            order.sort_by_key(|&c| self.subdomains[c] != p);
        }
        let tol = 1e-10;
        for c in order {
            let v = self.cell_vertices(c);
            let (lo, hi) = v.iter().fold(
                ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
                |(lo, hi), p| {
                    (
                        [lo[0].min(p[0]), lo[1].min(p[1])],
                        [hi[0].max(p[0]), hi[1].max(p[1])],
                    )
                },
            );
            let pad = 1e-9 * self.diameter(c);
            if x[0] < lo[0] - pad || x[0] > hi[0] + pad || x[1] < lo[1] - pad || x[1] > hi[1] + pad
            {
                continue;
            }
            if let Some(r) = self.inverse_map(c, x) {
                if r.iter().all(|&s| (-tol..=1.0 + tol).contains(&s)) {
                    return Some((c, r.map(|s| s.clamp(0.0, 1.0))));
                }
            }
        }
        None
    }

    fn inverse_map(&self, cell: usize, x: [f64; 2]) -> Option<[f64; 2]> {
        let mut r = [0.5, 0.5];
        for _ in 0..50 {
            let p = self.map_point(cell, r[0], r[1]);
            let res = [p[0] - x[0], p[1] - x[1]];
            let jac = self.map_jacobian(cell, r[0], r[1]);
            let det = jac.det();
            if det.abs() < 1e-300 {
                return None;
            }
            let inv = jac.inverse_with_det(det);
            let d = [
                inv[(0, 0)] * res[0] + inv[(0, 1)] * res[1],
                inv[(1, 0)] * res[0] + inv[(1, 1)] * res[1],
            ];
            r = [r[0] - d[0], r[1] - d[1]];
            if d[0].abs() + d[1].abs() < 1e-14 {
                return Some(r);
            }
        }
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_refines_to_four() {
        let m = rectangle_mesh(1, 1, [0.0, 1.0], [0.0, 1.0], Subdomain::Fluid);
        let r = m.refine_uniform();
        assert_eq!(r.num_cells(), 4);
        assert!(r.validate().is_empty());
        let total: f64 = (0..4).map(|c| r.area(c)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn markers_survive_refinement() {
        let mut m = rectangle_mesh(1, 1, [0.0, 1.0], [0.0, 1.0], Subdomain::Fluid);
        m.add_marker(0, 1, Marker::Wall);
        let r = m.refine_uniform();
        let walls = r.marked_facets(Marker::Wall, None);
        assert_eq!(walls.len(), 2);
        for (c, e) in walls {
            let (i, j) = CELL_EDGES[e];
            let (a, b) = (r.vertices[r.cells[c][i]], r.vertices[r.cells[c][j]]);
            assert_eq!(a[1], 0.0);
            assert_eq!(b[1], 0.0);
        }
    }

    #[test]
    fn inverted_cell_is_reported() {
        let mut m = rectangle_mesh(2, 1, [0.0, 2.0], [0.0, 1.0], Subdomain::Fluid);
        m.cells[1].reverse();
        let report = m.validate();
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::InvertedCell { cell: 1, .. })));
    }

    #[test]
    fn unmarked_interface_is_reported() {
        let mut m = rectangle_mesh(2, 1, [0.0, 2.0], [0.0, 1.0], Subdomain::Fluid);
        m.subdomains[1] = Subdomain::Solid;
        let report = m.validate();
        assert_eq!(report.len(), 1);
        let Violation::UnmarkedInterface { facet } = report[0] else {
            panic!("unexpected {report:?}")
        };
        let (a, b) = (m.vertices[facet.0], m.vertices[facet.1]);
        assert_eq!((a[0], b[0]), (1.0, 1.0));
        m.mark_interfaces();
        assert!(m.validate().is_empty());
    }

    #[test]
    fn hanging_node_is_reported() {
        // Two cells on the left, one tall cell on the right.
        let vertices = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [0.0, 0.5],
            [1.0, 1.0],
            [0.0, 1.0],
            [2.0, 0.0],
            [2.0, 1.0],
        ];
        let m = Mesh {
            vertices,
            cells: vec![[0, 1, 2, 3], [3, 2, 4, 5], [1, 6, 7, 4]],
            subdomains: vec![Subdomain::Fluid; 3],
            cell_tags: vec![0; 3],
            facet_markers: BTreeMap::new(),
            refinement_level: 0,
            curves: vec![],
        };
        assert!(m
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::HangingNode { vertex: 2, .. })));
    }

    #[test]
    fn locate_inverts_the_bilinear_map() {
        let mut m = rectangle_mesh(2, 2, [0.0, 1.0], [0.0, 1.0], Subdomain::Fluid);
        m.vertices[4] = [0.55, 0.45];
        let (c, r) = m.locate([0.3, 0.7], None).unwrap();
        let p = m.map_point(c, r[0], r[1]);
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] - 0.7).abs() < 1e-12);
        assert!(m.locate([1.5, 0.5], None).is_none());
    }
}
