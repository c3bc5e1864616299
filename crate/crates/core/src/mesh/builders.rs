//! Programmatic coarse meshes for the shipped configurations.

use std::collections::{BTreeMap, HashMap};

use super::{Circle, Marker, Mesh, Subdomain};

pub const CYLINDER_CENTER: [f64; 2] = [0.2, 0.2];
pub const CYLINDER_RADIUS: f64 = 0.05;
pub const BENCHMARK_TIP: [f64; 2] = [0.6, 0.2];

const CHANNEL_LENGTH: f64 = 2.5;
const CHANNEL_HEIGHT: f64 = 0.41;
const BEAM_LOW: f64 = 0.19;
const BEAM_HIGH: f64 = 0.21;

/// Collects quads given by coordinates and merges coincident vertices.
#[derive(Default)]
struct Builder {
    vertices: Vec<[f64; 2]>,
    lookup: HashMap<(i64, i64), usize>,
    cells: Vec<[usize; 4]>,
    subdomains: Vec<Subdomain>,
    tags: Vec<u32>,
}

impl Builder {
    fn vertex(&mut self, p: [f64; 2]) -> usize {
        let key = ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        *self.lookup.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            self.vertices.len() - 1
        })
    }

    fn quad(&mut self, corners: [[f64; 2]; 4], subdomain: Subdomain, tag: u32) {
        let ids = corners.map(|p| self.vertex(p));
        self.cells.push(ids);
        self.subdomains.push(subdomain);
        self.tags.push(tag);
    }

    /// Tensor grid over column breaks `xs` where column `i` spans the row
    /// breaks `ys(i)` on its left and `ys(i + 1)` on its right.
    fn strip(
        &mut self,
        xs: &[f64],
        ys: impl Fn(usize) -> Vec<f64>,
        kind: impl Fn(usize, usize) -> (Subdomain, u32),
    ) {
        for i in 0..xs.len() - 1 {
            let (left, right) = (ys(i), ys(i + 1));
            for j in 0..left.len() - 1 {
                let (s, t) = kind(i, j);
                self.quad(
                    [
                        [xs[i], left[j]],
                        [xs[i + 1], right[j]],
                        [xs[i + 1], right[j + 1]],
                        [xs[i], left[j + 1]],
                    ],
                    s,
                    t,
                );
            }
        }
    }

    fn finish(self, curves: Vec<(Marker, Circle)>) -> Mesh {
        Mesh {
            vertices: self.vertices,
            cells: self.cells,
            subdomains: self.subdomains,
            cell_tags: self.tags,
            facet_markers: BTreeMap::new(),
            refinement_level: 0,
            curves,
        }
    }
}

/// Marks boundary facets whose two end points both satisfy `pred`.
fn mark_boundary(mesh: &mut Mesh, marker: Marker, pred: impl Fn([f64; 2]) -> bool) {
    let topo = mesh.topology();
    for (e, cells) in topo.edge_cells.iter().enumerate() {
        if cells.len() != 1 {
            continue;
        }
        let k = topo.edges[e];
        if pred(mesh.vertices[k.0]) && pred(mesh.vertices[k.1]) {
            mesh.add_marker(k.0, k.1, marker);
        }
    }
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-10
}

/// Channel with cylinder and elastic beam.
///
/// Coarse layout (51 cells, 4 of them solid):
/// * an O-grid of six cells between the circle and the box [0.1,0.3]²,
///   split at the circle angles 225°, 315°, ±asin(0.01/0.05), 45°, 135°;
///   the cell between the two beam attachment angles is the first beam cell;
/// * a column [0,0.1] and caps above/below the box;
/// * three beam columns up to x = 0.6 with rows 0/0.1/0.19/0.21/0.3/0.41,
///   the middle row solid;
/// * five wake columns at x = 0.6/0.8/1.1/1.5/2.0/2.5 where the thin middle
///   row fans out to 0.17/0.23 and then 0.15/0.25.
pub fn fsi_benchmark_mesh(refinements: usize) -> Mesh {
    let c = CYLINDER_CENTER;
    let r = CYLINDER_RADIUS;
    let on_circle = |deg: f64| {
        let a = deg.to_radians();
        [c[0] + r * a.cos(), c[1] + r * a.sin()]
    };
    let attach = (0.01f64 / r).asin().to_degrees();
    let (c_bl, c_br, c_tr, c_tl) = (
        on_circle(225.0),
        on_circle(315.0),
        on_circle(45.0),
        on_circle(135.0),
    );
    let (p_lo, p_hi) = (on_circle(-attach), on_circle(attach));
    let (bl, br, tr, tl) = ([0.1, 0.1], [0.3, 0.1], [0.3, 0.3], [0.1, 0.3]);
    let (r_lo, r_hi) = ([0.3, BEAM_LOW], [0.3, BEAM_HIGH]);

    let mut b = Builder::default();
    let f = Subdomain::Fluid;
    b.quad([bl, br, c_br, c_bl], f, 0);
    b.quad([br, r_lo, p_lo, c_br], f, 0);
    b.quad([p_lo, r_lo, r_hi, p_hi], Subdomain::Solid, 0);
    b.quad([p_hi, r_hi, tr, c_tr], f, 0);
    b.quad([c_tl, c_tr, tr, tl], f, 0);
    b.quad([bl, c_bl, c_tl, tl], f, 0);

    let h = CHANNEL_HEIGHT;
    b.strip(&[0.0, 0.1], |_| vec![0.0, 0.1, 0.3, h], |_, _| (f, 0));
    b.quad([[0.1, 0.0], [0.3, 0.0], br, bl], f, 0);
    b.quad([tl, tr, [0.3, h], [0.1, h]], f, 0);

    let beam_rows = vec![0.0, 0.1, BEAM_LOW, BEAM_HIGH, 0.3, h];
    b.strip(
        &[0.3, 0.4, 0.5, 0.6],
        |_| beam_rows.clone(),
        |_, j| if j == 2 { (Subdomain::Solid, 0) } else { (f, 0) },
    );
    let wake_x = [0.6, 0.8, 1.1, 1.5, 2.0, CHANNEL_LENGTH];
    b.strip(
        &wake_x,
        |i| match i {
            0 => beam_rows.clone(),
            1 => vec![0.0, 0.1, 0.17, 0.23, 0.3, h],
            _ => vec![0.0, 0.1, 0.15, 0.25, 0.3, h],
        },
        |_, _| (f, 0),
    );

    let circle = Circle { center: c, radius: r };
    let mut mesh = b.finish(vec![(Marker::Cylinder, circle)]);
    mark_boundary(&mut mesh, Marker::Inflow, |p| near(p[0], 0.0));
    mark_boundary(&mut mesh, Marker::Outflow, |p| near(p[0], CHANNEL_LENGTH));
    mark_boundary(&mut mesh, Marker::Wall, |p| near(p[1], 0.0));
    mark_boundary(&mut mesh, Marker::Wall, |p| near(p[1], h));
    mark_boundary(&mut mesh, Marker::Cylinder, |p| circle.distance(p) < 1e-10);
    mesh.mark_interfaces();
    mesh.refined(refinements)
}

/// Channel geometry of the flapping-valve configuration (cgs units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlappingGeometry {
    /// Opening between the two flap tips. Not given numerically by the
    /// source geometry; 0.61 is an approximation.
    pub gap: f64,
}

impl Default for FlappingGeometry {
    fn default() -> Self {
        Self { gap: 0.61 }
    }
}

impl FlappingGeometry {
    pub const LENGTH: f64 = 8.0;
    pub const WALL: f64 = 0.1;
    pub const INNER_HEIGHT: f64 = 1.51;
    pub const FLAP_X: [f64; 2] = [1.9788, 2.0];

    pub fn flap_height(&self) -> f64 {
        0.5 * (Self::INNER_HEIGHT - self.gap)
    }
}

/// Channel [0,8]×[−0.1,1.61] with solid wall layers and two thin flaps
/// (tag 1) at x ∈ [1.9788, 2.0]. 90 cells at level 0.
pub fn flapping_mesh(refinements: usize, geometry: FlappingGeometry) -> Mesh {
    let l = geometry.flap_height();
    let top = FlappingGeometry::INNER_HEIGHT;
    let [fx0, fx1] = FlappingGeometry::FLAP_X;
    let xs = [0.0, 1.0, 1.6, fx0, fx1, 2.4, 3.0, 4.5, 6.0, FlappingGeometry::LENGTH];
    let ys = vec![
        -FlappingGeometry::WALL,
        0.0,
        l / 3.0,
        2.0 * l / 3.0,
        l,
        0.5 * top,
        top - l,
        top - 2.0 * l / 3.0,
        top - l / 3.0,
        top,
        top + FlappingGeometry::WALL,
    ];
    let rows = ys.len() - 1;
    let mut b = Builder::default();
    b.strip(
        &xs,
        |_| ys.clone(),
        |i, j| {
            if j == 0 || j == rows - 1 {
                (Subdomain::Solid, 0)
            } else if i == 3 && (j <= 3 || j >= rows - 4) {
                (Subdomain::Solid, 1)
            } else {
                (Subdomain::Fluid, 0)
            }
        },
    );
    let mut mesh = b.finish(vec![]);
    mark_boundary(&mut mesh, Marker::Inflow, |p| near(p[0], 0.0));
    mark_boundary(&mut mesh, Marker::Outflow, |p| near(p[0], FlappingGeometry::LENGTH));
    mark_boundary(&mut mesh, Marker::Wall, |p| near(p[1], -FlappingGeometry::WALL));
    mark_boundary(&mut mesh, Marker::Wall, |p| {
        near(p[1], top + FlappingGeometry::WALL)
    });
    mesh.mark_interfaces();
    let topo = mesh.topology();
    for k in &topo.edges {
        let (a, b) = (mesh.vertices[k.0], mesh.vertices[k.1]);
        if near(a[1], 0.0) && near(b[1], 0.0) && a[0] >= fx1 - 1e-10 && b[0] >= fx1 - 1e-10 {
            mesh.add_marker(k.0, k.1, Marker::DragBoundary);
        }
    }
    mesh.refined(refinements)
}

/// Solid strip [0,length]×[0,thickness] clamped (Wall) on its left edge.
pub fn beam_mesh(nx: usize, ny: usize, length: f64, thickness: f64) -> Mesh {
    let mut mesh = rectangle_mesh(nx, ny, [0.0, length], [0.0, thickness], Subdomain::Solid);
    mark_boundary(&mut mesh, Marker::Wall, |p| near(p[0], 0.0));
    mesh
}

/// Structured nx×ny grid; vertex `(i, j)` has index `j * (nx + 1) + i`.
/// No facet markers are set.
pub fn rectangle_mesh(
    nx: usize,
    ny: usize,
    xr: [f64; 2],
    yr: [f64; 2],
    subdomain: Subdomain,
) -> Mesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([
                xr[0] + (xr[1] - xr[0]) * i as f64 / nx as f64,
                yr[0] + (yr[1] - yr[0]) * j as f64 / ny as f64,
            ]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh {
        vertices,
        subdomains: vec![subdomain; cells.len()],
        cell_tags: vec![0; cells.len()],
        cells,
        facet_markers: BTreeMap::new(),
        refinement_level: 0,
        curves: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::CELL_EDGES;

    #[test]
    fn benchmark_coarse_counts_and_validity() {
        let m = fsi_benchmark_mesh(0);
        assert_eq!(m.num_cells(), 51);
        assert_eq!(m.count(Subdomain::Solid), 4);
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let area: f64 = (0..m.num_cells()).map(|c| m.area(c)).sum();
        // polygonal hole at level 0 is slightly smaller than the circle
        let exact = 2.5 * 0.41 - std::f64::consts::PI * 0.05 * 0.05;
        assert!(area > exact && area < exact + 2.5e-3, "{area}");
    }

    #[test]
    fn benchmark_tip_is_on_the_interface() {
        let m = fsi_benchmark_mesh(0);
        let hits = m
            .marked_facets(Marker::Interface, Some(Subdomain::Solid))
            .into_iter()
            .filter(|&(c, e)| {
                let (i, j) = CELL_EDGES[e];
                let (a, b) = (m.vertices[m.cells[c][i]], m.vertices[m.cells[c][j]]);
                near(0.5 * (a[0] + b[0]), 0.6) && near(0.5 * (a[1] + b[1]), 0.2)
            })
            .count();
        assert_eq!(hits, 1);
    }

    #[test]
    fn cylinder_vertices_on_circle() {
        for level in 0..3 {
            let m = fsi_benchmark_mesh(level);
            let circle = Circle {
                center: CYLINDER_CENTER,
                radius: CYLINDER_RADIUS,
            };
            let mut n = 0;
            for (k, set) in &m.facet_markers {
                if set.contains(&Marker::Cylinder) {
                    for v in [k.0, k.1] {
                        assert!(circle.distance(m.vertices[v]) < 1e-12);
                    }
                    n += 1;
                }
            }
            assert_eq!(n, 6 << level);
        }
    }

    #[test]
    fn refinement_quadruples_and_halves() {
        let m0 = fsi_benchmark_mesh(0);
        let m1 = fsi_benchmark_mesh(1);
        let m2 = fsi_benchmark_mesh(2);
        assert_eq!(m1.num_cells(), 4 * m0.num_cells());
        assert!(m1.validate().is_empty());
        assert!(m2.validate().is_empty());
        let min_d = |m: &Mesh| {
            (0..m.num_cells())
                .map(|c| m.diameter(c))
                .fold(f64::INFINITY, f64::min)
        };
        let (d0, d1, d2) = (min_d(&m0), min_d(&m1), min_d(&m2));
        assert!((d1 / d0 - 0.5).abs() < 0.02, "{d0} {d1}");
        assert!((d2 / d1 - 0.5).abs() < 0.02, "{d1} {d2}");
    }

    #[test]
    fn flapping_layout() {
        let m = flapping_mesh(0, FlappingGeometry::default());
        assert_eq!(m.num_cells(), 90);
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let flaps: Vec<usize> = (0..90).filter(|&c| m.cell_tags[c] == 1).collect();
        assert_eq!(flaps.len(), 6);
        for &c in &flaps {
            let v = m.cell_vertices(c);
            let w = v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max)
                - v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            assert!(w <= 0.0212 + 1e-12);
            assert_eq!(m.subdomains[c], Subdomain::Solid);
        }
        let drag = m.marked_facets(Marker::DragBoundary, Some(Subdomain::Fluid));
        assert_eq!(drag.len(), 5);
        for (c, e) in drag {
            let (i, j) = CELL_EDGES[e];
            let (a, b) = (m.vertices[m.cells[c][i]], m.vertices[m.cells[c][j]]);
            assert!(a[1] == 0.0 && b[1] == 0.0 && a[0] >= 2.0 && b[0] >= 2.0);
        }
        let m1 = flapping_mesh(1, FlappingGeometry::default());
        assert_eq!(m1.count(Subdomain::Solid), 4 * m.count(Subdomain::Solid));
        assert_eq!(m1.count(Subdomain::Fluid), 4 * m.count(Subdomain::Fluid));
        assert!(m1.validate().is_empty());
    }
}
