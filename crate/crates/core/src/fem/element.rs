//! Q2 (biquadratic, continuous) and P1dc (linear, discontinuous) shape
//! functions on the unit square.
//!
//! Q2 node order: vertices 0..4 counterclockwise from the origin, then the
//! midpoints of edges 0..4 (edge `e` joins vertices `e` and `e + 1`), then
//! the cell center.

use crate::tensor::Mat2;

pub const Q2_NODES: usize = 9;
pub const P1_DOFS: usize = 3;

pub const Q2_NODE_COORDS: [[f64; 2]; Q2_NODES] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [1.0, 1.0],
    [0.0, 1.0],
    [0.5, 0.0],
    [1.0, 0.5],
    [0.5, 1.0],
    [0.0, 0.5],
    [0.5, 0.5],
];

/// 1D Lagrange index per direction: 0 at s = 0, 1 at s = 1, 2 at s = ½.
const NODE_IJ: [(usize, usize); Q2_NODES] = [
    (0, 0),
    (1, 0),
    (1, 1),
    (0, 1),
    (2, 0),
    (1, 2),
    (2, 1),
    (0, 2),
    (2, 2),
];

/// Local Q2 nodes lying on edge `e`: its two vertices and its midpoint.
pub fn edge_nodes(e: usize) -> [usize; 3] {
    [e, (e + 1) % 4, 4 + e]
}

/// Reference point at parameter `s ∈ [0,1]` along edge `e`, traversed
/// counterclockwise.
pub fn edge_point(e: usize, s: f64) -> [f64; 2] {
    match e {
        0 => [s, 0.0],
        1 => [1.0, s],
        2 => [1.0 - s, 1.0],
        3 => [0.0, 1.0 - s],
        _ => panic!("edge index {e} out of range"),
    }
}

#[inline]
fn lagrange(s: f64) -> [f64; 3] {
    [
        2.0 * (s - 0.5) * (s - 1.0),
        2.0 * s * (s - 0.5),
        -4.0 * s * (s - 1.0),
    ]
}

#[inline]
fn lagrange_deriv(s: f64) -> [f64; 3] {
    [4.0 * s - 3.0, 4.0 * s - 1.0, 4.0 - 8.0 * s]
}

pub fn q2_values(xi: f64, eta: f64) -> [f64; Q2_NODES] {
    let (lx, ly) = (lagrange(xi), lagrange(eta));
    NODE_IJ.map(|(i, j)| lx[i] * ly[j])
}

/// Gradients with respect to the reference coordinates.
pub fn q2_gradients(xi: f64, eta: f64) -> [[f64; 2]; Q2_NODES] {
    let (lx, ly) = (lagrange(xi), lagrange(eta));
    let (dx, dy) = (lagrange_deriv(xi), lagrange_deriv(eta));
    NODE_IJ.map(|(i, j)| [dx[i] * ly[j], lx[i] * dy[j]])
}

/// Pressure basis {1, ξ − ½, η − ½}.
pub fn p1_values(xi: f64, eta: f64) -> [f64; P1_DOFS] {
    [1.0, xi - 0.5, eta - 0.5]
}

/// Shape data of one cell at one reference point.
#[derive(Clone, Debug)]
pub struct PointShape {
    pub reference: [f64; 2],
    pub values: [f64; Q2_NODES],
    /// Gradients with respect to the reference-configuration coordinates x̂.
    pub gradients: [[f64; 2]; Q2_NODES],
    pub pressure: [f64; P1_DOFS],
    /// Geometry Jacobian ∂x̂/∂ξ.
    pub map: Mat2<f64>,
}

impl PointShape {
    pub fn new(map: Mat2<f64>, xi: f64, eta: f64) -> Self {
        let det = map.det();
        let inv_t = map.inverse_with_det(det).transpose();
        let rg = q2_gradients(xi, eta);
        let gradients = rg.map(|g| {
            [
                inv_t[(0, 0)] * g[0] + inv_t[(0, 1)] * g[1],
                inv_t[(1, 0)] * g[0] + inv_t[(1, 1)] * g[1],
            ]
        });
        Self {
            reference: [xi, eta],
            values: q2_values(xi, eta),
            gradients,
            pressure: p1_values(xi, eta),
            map,
        }
    }
}
