//! Bilinear (Q1) isoparametric shape functions.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::tensor::{SymTensor2, SQRT_2};

use super::NodalField;

/// Reference coordinates of the four element corners, counter-clockwise.
pub const REFERENCE_CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Shape function values and their reference gradients `(∂/∂ξ, ∂/∂η)`.
pub fn shape_eval(xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let mut n = [0.0; 4];
    let mut dn = [[0.0; 2]; 4];
    for (a, c) in REFERENCE_CORNERS.iter().enumerate() {
        let sx = 1.0 + c[0] * xi;
        let sy = 1.0 + c[1] * eta;
        n[a] = 0.25 * sx * sy;
        dn[a] = [0.25 * c[0] * sy, 0.25 * c[1] * sx];
    }
    (n, dn)
}

/// Shape data mapped to a physical element at one reference point.
#[derive(Clone, Copy, Debug)]
pub struct MappedPoint {
    pub values: [f64; 4],
    /// Physical gradients `(∂/∂x, ∂/∂y)` per corner.
    pub grads: [[f64; 2]; 4],
    pub det_j: f64,
    pub x: [f64; 2],
}

pub fn map_point(coords: &[[f64; 2]; 4], xi: f64, eta: f64) -> Option<MappedPoint> {
    let (values, dn) = shape_eval(xi, eta);
    // J = [[dx/dξ, dx/dη], [dy/dξ, dy/dη]]
    let mut j = [[0.0; 2]; 2];
    let mut x = [0.0; 2];
    for a in 0..4 {
        for r in 0..2 {
            x[r] += values[a] * coords[a][r];
            for c in 0..2 {
                j[r][c] += coords[a][r] * dn[a][c];
            }
        }
    }
    let det_j = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(det_j > 0.0) {
        return None;
    }
    let inv = [[j[1][1] / det_j, -j[0][1] / det_j], [-j[1][0] / det_j, j[0][0] / det_j]];
    let mut grads = [[0.0; 2]; 4];
    for a in 0..4 {
        grads[a] = [
            dn[a][0] * inv[0][0] + dn[a][1] * inv[1][0],
            dn[a][0] * inv[0][1] + dn[a][1] * inv[1][1],
        ];
    }
    Some(MappedPoint {
        values,
        grads,
        det_j,
        x,
    })
}

pub(crate) fn map_element_point(mesh: &Mesh, element: usize, xi: f64, eta: f64) -> Result<MappedPoint> {
    let coords = mesh.element_coords(element);
    map_point(&coords, xi, eta).ok_or_else(|| {
        let (_, dn) = shape_eval(xi, eta);
        let mut j = [[0.0; 2]; 2];
        for a in 0..4 {
            for r in 0..2 {
                for c in 0..2 {
                    j[r][c] += coords[a][r] * dn[a][c];
                }
            }
        }
        Error::SingularElement {
            element,
            det: j[0][0] * j[1][1] - j[0][1] * j[1][0],
        }
    })
}

/// Mandel strain-displacement rows for corner `a`: columns are `(u_x, u_y)`.
#[inline]
pub fn b_block(grad: [f64; 2]) -> [[f64; 2]; 3] {
    let h = 1.0 / SQRT_2;
    [[grad[0], 0.0], [0.0, grad[1]], [h * grad[1], h * grad[0]]]
}

/// Symmetric gradient of the interpolated element displacement.
pub fn strain_from_grads(grads: &[[f64; 2]; 4], ue: &[[f64; 2]; 4]) -> SymTensor2 {
    let mut dudx = [[0.0; 2]; 2];
    for a in 0..4 {
        for i in 0..2 {
            for j in 0..2 {
                dudx[i][j] += ue[a][i] * grads[a][j];
            }
        }
    }
    SymTensor2::from_components(dudx[0][0], dudx[1][1], 0.5 * (dudx[0][1] + dudx[1][0]))
}

pub fn element_displacements(mesh: &Mesh, element: usize, u: &NodalField) -> [[f64; 2]; 4] {
    let conn = &mesh.elements[element];
    [u.node(conn[0]), u.node(conn[1]), u.node(conn[2]), u.node(conn[3])]
}

/// Strain of `u` at reference point `(ξ, η)` of `element`.
pub fn strain_at(mesh: &Mesh, element: usize, xi: f64, eta: f64, u: &NodalField) -> Result<SymTensor2> {
    let p = map_element_point(mesh, element, xi, eta)?;
    Ok(strain_from_grads(&p.grads, &element_displacements(mesh, element, u)))
}
