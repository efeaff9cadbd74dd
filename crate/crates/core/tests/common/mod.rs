//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's constitutive or assembly code.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3};
use slfem::constitutive::MaterialModel;
use slfem::fem::NodalField;
use slfem::mesh::Mesh;

/// `E_ijkl = μ(δ_ik δ_jl + δ_il δ_jk) + λ δ_ij δ_kl + γ M_ij M_kl` in 2D.
pub fn elasticity_4(model: &MaterialModel) -> [[[[f64; 2]; 2]; 2]; 2] {
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let a = [model.fiber_angle.cos(), model.fiber_angle.sin()];
    let m = |i: usize, j: usize| a[i] * a[j];
    let mut e = [[[[0.0; 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    e[i][j][k][l] = model.mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
                        + model.lambda_lame * d(i, j) * d(k, l)
                        + model.gamma * m(i, j) * m(k, l);
                }
            }
        }
    }
    e
}

/// Mandel matrix of the fourth-order tensor above, built from the basis
/// `e1⊗e1, e2⊗e2, (e1⊗e2 + e2⊗e1)/√2`.
pub fn elasticity_mandel(model: &MaterialModel) -> Matrix3<f64> {
    let e = elasticity_4(model);
    let h = 1.0 / 2f64.sqrt();
    let basis = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]], [[0.0, h], [h, 0.0]]];
    Matrix3::from_fn(|p, q| {
        let mut v = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        v += basis[p][i][j] * e[i][j][k][l] * basis[q][k][l];
                    }
                }
            }
        }
        v
    })
}

pub fn psi_oracle(s: f64, beta: f64, alpha: f64) -> f64 {
    1.0 / (1.0 - (beta * s).powf(alpha)).powf(1.0 / alpha)
}

/// Bilinear shape values and reference derivatives, corners counter-clockwise
/// from `(−1, −1)`.
fn q1(xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let sx = [-1.0, 1.0, 1.0, -1.0];
    let sy = [-1.0, -1.0, 1.0, 1.0];
    let mut n = [0.0; 4];
    let mut dn = [[0.0; 2]; 4];
    for a in 0..4 {
        n[a] = 0.25 * (1.0 + sx[a] * xi) * (1.0 + sy[a] * eta);
        dn[a] = [0.25 * sx[a] * (1.0 + sy[a] * eta), 0.25 * sy[a] * (1.0 + sx[a] * xi)];
    }
    (n, dn)
}

/// Physical gradients and `det J` at a reference point.
fn physical(coords: &[[f64; 2]; 4], xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4], f64, [f64; 2]) {
    let (n, dn) = q1(xi, eta);
    let jac = nalgebra::Matrix2::from_fn(|r, c| (0..4).map(|a| coords[a][r] * dn[a][c]).sum::<f64>());
    let det = jac.determinant();
    let inv = jac.try_inverse().expect("singular oracle element");
    let mut g = [[0.0; 2]; 4];
    for a in 0..4 {
        for k in 0..2 {
            g[a][k] = dn[a][0] * inv[(0, k)] + dn[a][1] * inv[(1, k)];
        }
    }
    let x = [
        (0..4).map(|a| n[a] * coords[a][0]).sum(),
        (0..4).map(|a| n[a] * coords[a][1]).sum(),
    ];
    (n, g, det, x)
}

/// Symmetric gradient of basis function `(a, c)` as a 2×2 tensor.
fn basis_strain(g: &[[f64; 2]; 4], a: usize, c: usize) -> [[f64; 2]; 2] {
    let mut e = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let gi = if i == c { g[a][j] } else { 0.0 };
            let gj = if j == c { g[a][i] } else { 0.0 };
            e[i][j] = 0.5 * (gi + gj);
        }
    }
    e
}

fn contract(e: &[[[[f64; 2]; 2]; 2]; 2], x: &[[f64; 2]; 2], y: &[[f64; 2]; 2]) -> f64 {
    let mut v = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    v += x[i][j] * e[i][j][k][l] * y[k][l];
                }
            }
        }
    }
    v
}

/// Strain tensor of `u` at a reference point of `element`.
pub fn strain_oracle(mesh: &Mesh, element: usize, xi: f64, eta: f64, u: &NodalField) -> [[f64; 2]; 2] {
    let conn = mesh.elements[element];
    let coords = conn.map(|n| mesh.nodes[n]);
    let (_, g, _, _) = physical(&coords, xi, eta);
    let mut eps = [[0.0; 2]; 2];
    for a in 0..4 {
        for c in 0..2 {
            let b = basis_strain(&g, a, c);
            let v = u.values[2 * conn[a] + c];
            for i in 0..2 {
                for j in 0..2 {
                    eps[i][j] += v * b[i][j];
                }
            }
        }
    }
    eps
}

/// Brute-force stiffness: loops over every pair of global basis functions
/// and every element, with `Ψ` frozen at `u_prev` at the 2×2 Gauss points.
pub fn dense_stiffness(mesh: &Mesh, model: &MaterialModel, u_prev: &NodalField) -> DMatrix<f64> {
    let e = elasticity_4(model);
    let g = 1.0 / 3f64.sqrt();
    let points = [[-g, -g], [g, -g], [g, g], [-g, g]];
    let n = 2 * mesh.num_nodes();
    let mut k = DMatrix::zeros(n, n);
    for row in 0..n {
        for col in 0..n {
            let (na, ca) = (row / 2, row % 2);
            let (nb, cb) = (col / 2, col % 2);
            let mut v = 0.0;
            for (el, conn) in mesh.elements.iter().enumerate() {
                let (Some(a), Some(b)) = (conn.iter().position(|&x| x == na), conn.iter().position(|&x| x == nb))
                else {
                    continue;
                };
                let coords = conn.map(|x| mesh.nodes[x]);
                for p in &points {
                    let (_, grads, det, _) = physical(&coords, p[0], p[1]);
                    let eps = strain_oracle(mesh, el, p[0], p[1], u_prev);
                    let s = contract(&e, &eps, &eps).sqrt();
                    let psi = psi_oracle(s, model.beta, model.alpha);
                    let ea = basis_strain(&grads, a, ca);
                    let eb = basis_strain(&grads, b, cb);
                    v += psi * contract(&e, &ea, &eb) * det;
                }
            }
            k[(row, col)] = v;
        }
    }
    k
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
}

/// Fourth-order central difference of `f` at `x` along axis `k`.
pub fn d4<F: Fn([f64; 2]) -> f64>(f: &F, x: [f64; 2], k: usize, h: f64) -> f64 {
    let at = |t: f64| {
        let mut y = x;
        y[k] += t;
        f(y)
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}
