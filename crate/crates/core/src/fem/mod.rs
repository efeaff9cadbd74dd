//! Q1 finite elements: dof numbering, frozen-coefficient assembly of the
//! discrete weak form, Dirichlet elimination and the sparse SPD solve.

pub mod assembly;
pub mod bc;
pub mod cg;
pub mod quadrature;
pub mod shape;
pub mod sparse;

pub use assembly::{
    assemble, assemble_with_coefficients, coefficients_from_displacement, coefficients_from_stress, internal_force,
    load_vector, BodyForce, CoefficientField, LinearizedSystem, LoadSpec,
};
pub use bc::{apply_constraints, BoundaryConditions, ConstrainedSystem, DirichletCondition, DirichletValue};
pub use cg::{pcg, CgOutcome};
pub use quadrature::QuadratureRule;
pub use shape::{shape_eval, strain_at};
pub use sparse::CsrMatrix;

use crate::error::{Error, Result};

/// Node-major numbering: `dof(node, c) = 2 node + c`, `c = 0` for x.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofMap {
    pub num_nodes: usize,
}

impl DofMap {
    pub fn new(num_nodes: usize) -> Self {
        DofMap { num_nodes }
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.num_nodes
    }

    #[inline]
    pub fn dof(&self, node: usize, component: usize) -> usize {
        2 * node + component
    }

    #[inline]
    pub fn node_component(&self, dof: usize) -> (usize, usize) {
        (dof / 2, dof % 2)
    }
}

/// Displacement vector over a [`DofMap`].
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(num_nodes: usize) -> Self {
        NodalField {
            values: vec![0.0; 2 * num_nodes],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        NodalField { values }
    }

    /// Nodal interpolant of a vector function.
    pub fn from_fn(nodes: &[[f64; 2]], f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut values = Vec::with_capacity(2 * nodes.len());
        for &p in nodes {
            let v = f(p);
            values.extend_from_slice(&v);
        }
        NodalField { values }
    }

    pub fn num_nodes(&self) -> usize {
        self.values.len() / 2
    }

    #[inline]
    pub fn node(&self, node: usize) -> [f64; 2] {
        [self.values[2 * node], self.values[2 * node + 1]]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        NodalField {
            values: self.values.iter().map(|v| factor * v).collect(),
        }
    }

    pub fn check_len(&self, num_nodes: usize) -> Result<()> {
        if self.values.len() != 2 * num_nodes {
            return Err(Error::DimensionMismatch {
                expected: 2 * num_nodes,
                got: self.values.len(),
            });
        }
        Ok(())
    }

    /// Euclidean norm of the dof vector.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Solves a constrained system with Jacobi-preconditioned CG.
pub fn solve_spd(system: &ConstrainedSystem, rel_tol: f64) -> Result<NodalField> {
    solve_spd_from(system, rel_tol, None).map(|(u, _)| u)
}

pub(crate) fn solve_spd_from(
    system: &ConstrainedSystem,
    rel_tol: f64,
    start: Option<&NodalField>,
) -> Result<(NodalField, CgOutcome)> {
    let out = pcg(
        &system.matrix,
        &system.rhs,
        start.map(|u| u.values.as_slice()),
        rel_tol,
        None,
    )?;
    Ok((NodalField::from_values(out.x.clone()), out))
}
