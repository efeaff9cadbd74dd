//! Dirichlet data and its symmetric elimination from the linear system.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};

use super::assembly::LinearizedSystem;
use super::sparse::CsrMatrix;

#[derive(Clone)]
pub enum DirichletValue {
    Constant(f64),
    Field(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
}

impl DirichletValue {
    pub fn at(&self, p: [f64; 2]) -> f64 {
        match self {
            DirichletValue::Constant(v) => *v,
            DirichletValue::Field(f) => f(p),
        }
    }
}

impl fmt::Debug for DirichletValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirichletValue::Constant(v) => write!(f, "Constant({v})"),
            DirichletValue::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Prescribes displacement component `component` on every node of `tag`.
#[derive(Clone, Debug)]
pub struct DirichletCondition {
    pub tag: BoundaryTag,
    pub component: usize,
    pub value: DirichletValue,
}

#[derive(Clone, Debug, Default)]
pub struct BoundaryConditions {
    pub conditions: Vec<DirichletCondition>,
}

impl BoundaryConditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: BoundaryTag, component: usize, value: f64) -> Self {
        self.conditions.push(DirichletCondition {
            tag,
            component,
            value: DirichletValue::Constant(value),
        });
        self
    }

    /// Half model of the edge crack: `u_x = 0` on the left edge and the
    /// symmetry condition `u_y = 0` on the ligament only. The crack face stays
    /// traction free.
    pub fn mode_one_crack() -> Self {
        Self::new()
            .with(BoundaryTag::Left, 0, 0.0)
            .with(BoundaryTag::Ligament, 1, 0.0)
    }

    /// Same supports with the whole bottom edge held, i.e. no crack.
    pub fn uncracked() -> Self {
        Self::mode_one_crack().with(BoundaryTag::CrackFace, 1, 0.0)
    }

    /// Both components prescribed by `exact` on the whole boundary.
    pub fn everywhere(exact: Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>) -> Self {
        let mut bcs = Self::new();
        for tag in BoundaryTag::ALL {
            for component in 0..2 {
                let f = exact.clone();
                bcs.conditions.push(DirichletCondition {
                    tag,
                    component,
                    value: DirichletValue::Field(Arc::new(move |p| f(p)[component])),
                });
            }
        }
        bcs
    }

    /// Constrained dofs with their values, sorted by dof. A dof hit by
    /// several conditions must receive the same value from each.
    pub fn resolve(&self, mesh: &Mesh) -> Result<Vec<(usize, f64)>> {
        let mut map: BTreeMap<usize, f64> = BTreeMap::new();
        for c in &self.conditions {
            for node in mesh.nodes_with_tag(c.tag) {
                let dof = 2 * node + c.component;
                let v = c.value.at(mesh.nodes[node]);
                if let Some(&prev) = map.get(&dof) {
                    if prev != v {
                        return Err(Error::ConflictingConstraint {
                            dof,
                            first: prev,
                            second: v,
                        });
                    }
                } else {
                    map.insert(dof, v);
                }
            }
        }
        Ok(map.into_iter().collect())
    }
}

/// System after symmetric elimination of the Dirichlet dofs.
#[derive(Clone, Debug)]
pub struct ConstrainedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub constrained: Vec<bool>,
}

/// Zeroes constrained rows and columns, puts 1 on their diagonal, moves the
/// known values to the right-hand side. Symmetry is preserved.
pub fn apply_constraints(system: LinearizedSystem) -> Result<ConstrainedSystem> {
    let LinearizedSystem {
        mut matrix,
        mut rhs,
        constraints,
    } = system;
    let n = matrix.nrows;
    let mut constrained = vec![false; n];
    let mut value = vec![0.0; n];
    for &(dof, v) in &constraints {
        if dof >= n {
            return Err(Error::DimensionMismatch { expected: n, got: dof });
        }
        if constrained[dof] && value[dof] != v {
            return Err(Error::ConflictingConstraint {
                dof,
                first: value[dof],
                second: v,
            });
        }
        constrained[dof] = true;
        value[dof] = v;
    }
    for i in 0..n {
        for k in matrix.row_ptr[i]..matrix.row_ptr[i + 1] {
            let j = matrix.col_idx[k];
            if constrained[j] && !constrained[i] {
                rhs[i] -= matrix.values[k] * value[j];
            }
            if constrained[i] || constrained[j] {
                matrix.values[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
    for i in 0..n {
        if constrained[i] {
            rhs[i] = value[i];
        }
    }
    Ok(ConstrainedSystem {
        matrix,
        rhs,
        constrained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, MeshSpec};

    #[test]
    fn crack_constraint_count() {
        let mesh = generate(&MeshSpec::uniform(2.0, 1.0, 2, 2, [1.0, 0.0])).unwrap();
        let c = BoundaryConditions::mode_one_crack().resolve(&mesh).unwrap();
        let left = mesh.nodes_with_tag(BoundaryTag::Left).len();
        let lig = mesh.nodes_with_tag(BoundaryTag::Ligament).len();
        assert_eq!(c.len(), left + lig);
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn conflicting_values_rejected() {
        let mesh = generate(&MeshSpec::uniform(2.0, 1.0, 2, 2, [1.0, 0.0])).unwrap();
        let bcs = BoundaryConditions::new()
            .with(BoundaryTag::Left, 1, 0.0)
            .with(BoundaryTag::CrackFace, 1, 1.0);
        assert!(matches!(
            bcs.resolve(&mesh),
            Err(Error::ConflictingConstraint { dof: 1, .. })
        ));
    }
}
