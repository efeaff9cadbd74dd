//! Assembly of the Picard-linearized system
//!
//! ```text
//! Σ_K ∫_K c(x) E[ε(u)] : ε(φ_i) dx = ∫ f·φ_i dx + ∫_ΓN g·φ_i ds
//! ```
//!
//! where `c` is a scalar coefficient frozen at the quadrature points
//! (`c = Ψ(‖E^½ ε(u_prev)‖)` for the plain Picard step).

use std::fmt;
use std::sync::Arc;

use crate::constitutive::{psi, psi_guarded, ConstitutiveLaw, MaterialModel};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};

use super::bc::BoundaryConditions;
use super::quadrature::QuadratureRule;
use super::shape::{b_block, element_displacements, map_element_point, strain_from_grads};
use super::sparse::CsrMatrix;
use super::NodalField;

#[derive(Clone)]
pub enum BodyForce {
    Constant([f64; 2]),
    Field(Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>),
}

impl fmt::Debug for BodyForce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyForce::Constant(v) => write!(f, "Constant({v:?})"),
            BodyForce::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Body force and piecewise-constant tractions on tagged boundary parts.
#[derive(Clone, Debug)]
pub struct LoadSpec {
    pub body_force: BodyForce,
    pub tractions: Vec<(BoundaryTag, [f64; 2])>,
}

impl LoadSpec {
    pub fn none() -> Self {
        LoadSpec {
            body_force: BodyForce::Constant([0.0, 0.0]),
            tractions: Vec::new(),
        }
    }

    /// Uniform normal tension `σ_T` on the top edge.
    pub fn top_tension(sigma_t: f64) -> Self {
        LoadSpec {
            body_force: BodyForce::Constant([0.0, 0.0]),
            tractions: vec![(BoundaryTag::Top, [0.0, sigma_t])],
        }
    }

    pub fn with_body_force(mut self, body_force: BodyForce) -> Self {
        self.body_force = body_force;
        self
    }
}

/// One scalar per element quadrature point (2×2 rule, element-major).
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    pub values: Vec<f64>,
}

impl CoefficientField {
    pub const POINTS_PER_ELEMENT: usize = 4;

    pub fn constant(num_elements: usize, value: f64) -> Self {
        CoefficientField {
            values: vec![value; Self::POINTS_PER_ELEMENT * num_elements],
        }
    }

    #[inline]
    pub fn at(&self, element: usize, qp: usize) -> f64 {
        self.values[Self::POINTS_PER_ELEMENT * element + qp]
    }
}

#[derive(Clone, Debug)]
pub struct LinearizedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `(dof, prescribed value)`, sorted by dof.
    pub constraints: Vec<(usize, f64)>,
}

/// `Ψ(‖E^½ ε(u)‖)` at every quadrature point. With `clamp_delta = Some(δ)`
/// inadmissible points are clamped to `(β s)^α = 1 − δ` and counted;
/// with `None` they are an error.
pub fn coefficients_from_displacement(
    mesh: &Mesh,
    law: &ConstitutiveLaw,
    u: &NodalField,
    clamp_delta: Option<f64>,
) -> Result<(CoefficientField, usize)> {
    u.check_len(mesh.num_nodes())?;
    let rule = QuadratureRule::stiffness();
    let (beta, alpha) = (law.beta(), law.alpha());
    let mut values = Vec::with_capacity(rule.len() * mesh.num_elements());
    let mut clamped = 0;
    for el in 0..mesh.num_elements() {
        let ue = element_displacements(mesh, el, u);
        for p in &rule.points {
            let mp = map_element_point(mesh, el, p[0], p[1])?;
            let s = law.energy_norm(&strain_from_grads(&mp.grads, &ue));
            let c = match clamp_delta {
                Some(delta) => {
                    let (v, hit) = psi_guarded(s, beta, alpha, delta);
                    clamped += usize::from(hit);
                    v
                }
                None => psi(s, beta, alpha)?,
            };
            values.push(c);
        }
    }
    Ok((CoefficientField { values }, clamped))
}

/// Stress-based secant update. With `c` the coefficient the displacement
/// `u` was solved with, the stress there has energy measure `t = c s(u)`
/// and the new coefficient is `(1 + (β t)^α)^(1/α)`, the secant modulus of
/// the inverted law at that stress. The fixed points are those of
/// [`coefficients_from_displacement`], the update is defined for every `u`
/// and never exceeds the pole.
pub fn coefficients_from_stress(
    mesh: &Mesh,
    law: &ConstitutiveLaw,
    u: &NodalField,
    current: &CoefficientField,
) -> Result<CoefficientField> {
    u.check_len(mesh.num_nodes())?;
    let rule = QuadratureRule::stiffness();
    if current.values.len() != rule.len() * mesh.num_elements() {
        return Err(Error::DimensionMismatch {
            expected: rule.len() * mesh.num_elements(),
            got: current.values.len(),
        });
    }
    let (beta, alpha) = (law.beta(), law.alpha());
    let mut values = Vec::with_capacity(current.values.len());
    for el in 0..mesh.num_elements() {
        let ue = element_displacements(mesh, el, u);
        for (q, p) in rule.points.iter().enumerate() {
            let mp = map_element_point(mesh, el, p[0], p[1])?;
            let s = law.energy_norm(&strain_from_grads(&mp.grads, &ue));
            let t = current.at(el, q) * s;
            values.push(secant_from_stress(beta * t, alpha));
        }
    }
    Ok(CoefficientField { values })
}

/// `(1 + x^α)^(1/α)` without overflow for large `x`.
fn secant_from_stress(x: f64, alpha: f64) -> f64 {
    if x <= 1.0 {
        (1.0 + x.powf(alpha)).powf(1.0 / alpha)
    } else {
        x * (1.0 + x.powf(-alpha)).powf(1.0 / alpha)
    }
}

/// Consistent load vector of body force and tractions.
pub fn load_vector(mesh: &Mesh, load: &LoadSpec) -> Result<Vec<f64>> {
    let mut f = vec![0.0; 2 * mesh.num_nodes()];
    let rule = QuadratureRule::stiffness();
    let constant_zero = matches!(load.body_force, BodyForce::Constant([x, y]) if x == 0.0 && y == 0.0);
    if !constant_zero {
        for el in 0..mesh.num_elements() {
            let conn = mesh.elements[el];
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let mp = map_element_point(mesh, el, p[0], p[1])?;
                let bf = match &load.body_force {
                    BodyForce::Constant(v) => *v,
                    BodyForce::Field(func) => func(mp.x),
                };
                let jw = w * mp.det_j;
                for a in 0..4 {
                    f[2 * conn[a]] += jw * mp.values[a] * bf[0];
                    f[2 * conn[a] + 1] += jw * mp.values[a] * bf[1];
                }
            }
        }
    }
    for &(tag, g) in &load.tractions {
        for edge in mesh.boundary_edges.iter().filter(|e| e.tag == tag) {
            let [a, b] = edge.nodes;
            let pa = mesh.nodes[a];
            let pb = mesh.nodes[b];
            let half = 0.5 * ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            for n in [a, b] {
                f[2 * n] += half * g[0];
                f[2 * n + 1] += half * g[1];
            }
        }
    }
    Ok(f)
}

/// Assembles the system with a given coefficient field.
pub fn assemble_with_coefficients(
    mesh: &Mesh,
    law: &ConstitutiveLaw,
    coefficients: &CoefficientField,
    load: &LoadSpec,
    bcs: &BoundaryConditions,
) -> Result<LinearizedSystem> {
    let rule = QuadratureRule::stiffness();
    if coefficients.values.len() != rule.len() * mesh.num_elements() {
        return Err(Error::DimensionMismatch {
            expected: rule.len() * mesh.num_elements(),
            got: coefficients.values.len(),
        });
    }
    let e = &law.elasticity.a;
    let mut matrix = CsrMatrix::from_mesh_pattern(mesh);
    for el in 0..mesh.num_elements() {
        let mut ke = [[0.0; 8]; 8];
        for (q, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let mp = map_element_point(mesh, el, p[0], p[1])?;
            let scale = w * mp.det_j * coefficients.at(el, q);
            let blocks: Vec<[[f64; 2]; 3]> = mp.grads.iter().map(|g| b_block(*g)).collect();
            for a in 0..4 {
                // E B_a, 3×2
                let mut eb = [[0.0; 2]; 3];
                for r in 0..3 {
                    for c in 0..2 {
                        eb[r][c] = (0..3).map(|k| e[r][k] * blocks[a][k][c]).sum();
                    }
                }
                for b in 0..4 {
                    for i in 0..2 {
                        for j in 0..2 {
                            let v: f64 = (0..3).map(|r| blocks[b][r][i] * eb[r][j]).sum();
                            ke[2 * b + i][2 * a + j] += scale * v;
                        }
                    }
                }
            }
        }
        let conn = mesh.elements[el];
        for a in 0..4 {
            for i in 0..2 {
                let row = 2 * conn[a] + i;
                for b in 0..4 {
                    for j in 0..2 {
                        matrix.add(row, 2 * conn[b] + j, ke[2 * a + i][2 * b + j]);
                    }
                }
            }
        }
    }

    let rhs = load_vector(mesh, load)?;
    let constraints = bcs.resolve(mesh)?;
    if constraints.is_empty() {
        let fx: f64 = rhs.iter().step_by(2).sum();
        let fy: f64 = rhs.iter().skip(1).step_by(2).sum();
        let scale: f64 = rhs.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        if fx.abs() > 1e-12 * scale || fy.abs() > 1e-12 * scale {
            return Err(Error::IncompatibleNeumannData { fx, fy });
        }
    }
    Ok(LinearizedSystem {
        matrix,
        rhs,
        constraints,
    })
}

/// Picard-linearized system with `Ψ` frozen at `u_prev`. Returns the number
/// of clamped quadrature points alongside.
pub fn assemble(
    mesh: &Mesh,
    model: &MaterialModel,
    u_prev: &NodalField,
    load: &LoadSpec,
    bcs: &BoundaryConditions,
    clamp_delta: Option<f64>,
) -> Result<(LinearizedSystem, usize)> {
    let law = ConstitutiveLaw::new(model)?;
    let (coefficients, clamped) = coefficients_from_displacement(mesh, &law, u_prev, clamp_delta)?;
    let system = assemble_with_coefficients(mesh, &law, &coefficients, load, bcs)?;
    Ok((system, clamped))
}

/// `F_i = ∫ Ψ(‖E^½ ε(u)‖) E[ε(u)] : ε(φ_i) dx`, with `Ψ` evaluated at `u`
/// itself. Clamping follows [`coefficients_from_displacement`].
pub fn internal_force(
    mesh: &Mesh,
    law: &ConstitutiveLaw,
    u: &NodalField,
    clamp_delta: Option<f64>,
) -> Result<(Vec<f64>, usize)> {
    u.check_len(mesh.num_nodes())?;
    let rule = QuadratureRule::stiffness();
    let (beta, alpha) = (law.beta(), law.alpha());
    let mut f = vec![0.0; 2 * mesh.num_nodes()];
    let mut clamped = 0;
    for el in 0..mesh.num_elements() {
        let ue = element_displacements(mesh, el, u);
        let conn = mesh.elements[el];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let mp = map_element_point(mesh, el, p[0], p[1])?;
            let eps = strain_from_grads(&mp.grads, &ue);
            let s = law.energy_norm(&eps);
            let c = match clamp_delta {
                Some(delta) => {
                    let (v, hit) = psi_guarded(s, beta, alpha, delta);
                    clamped += usize::from(hit);
                    v
                }
                None => psi(s, beta, alpha)?,
            };
            let stress = law.elasticity.apply(&eps).m;
            let scale = w * mp.det_j * c;
            for a in 0..4 {
                let b = b_block(mp.grads[a]);
                for i in 0..2 {
                    let v: f64 = (0..3).map(|r| b[r][i] * stress[r]).sum();
                    f[2 * conn[a] + i] += scale * v;
                }
            }
        }
    }
    Ok((f, clamped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, MeshSpec};

    fn linear_model() -> MaterialModel {
        MaterialModel {
            mu: 1.0,
            lambda_lame: 1.0,
            gamma: 0.0,
            beta: 0.0,
            alpha: 1.0,
            fiber_angle: 0.0,
        }
    }

    #[test]
    fn rigid_translation_in_kernel() {
        let mesh = generate(&MeshSpec::uniform(2.0, 1.0, 4, 2, [1.0, 0.0])).unwrap();
        let model = MaterialModel::default();
        let (sys, _) = assemble(
            &mesh,
            &model,
            &NodalField::zeros(mesh.num_nodes()),
            &LoadSpec::none(),
            &BoundaryConditions::mode_one_crack(),
            None,
        )
        .unwrap();
        for t in [[1.0, 0.0], [0.0, 1.0]] {
            let tf = NodalField::from_fn(&mesh.nodes, |_| t);
            let at = sys.matrix.mul_vec(&tf.values);
            assert!(at.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn zero_previous_field_is_linear_assembly() {
        let mesh = generate(&MeshSpec::uniform(2.0, 1.0, 4, 2, [1.0, 0.0])).unwrap();
        let zero = NodalField::zeros(mesh.num_nodes());
        let bcs = BoundaryConditions::mode_one_crack();
        let load = LoadSpec::top_tension(0.1);
        let (a, _) = assemble(
            &mesh,
            &MaterialModel::default().with_beta(5.0),
            &zero,
            &load,
            &bcs,
            None,
        )
        .unwrap();
        let (b, _) = assemble(
            &mesh,
            &MaterialModel::default().with_beta(0.0),
            &zero,
            &load,
            &bcs,
            None,
        )
        .unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn traction_resultant() {
        let mesh = generate(&MeshSpec::uniform(2.0, 1.0, 8, 4, [1.0, 0.0])).unwrap();
        let f = load_vector(&mesh, &LoadSpec::top_tension(0.1)).unwrap();
        let fy: f64 = f.iter().skip(1).step_by(2).sum();
        assert!((fy - 0.2).abs() < 1e-15);
    }

    #[test]
    fn pure_neumann_compatibility() {
        let mesh = generate(&MeshSpec::uniform(2.0, 1.0, 2, 2, [1.0, 0.0])).unwrap();
        let law = ConstitutiveLaw::new(&linear_model()).unwrap();
        let c = CoefficientField::constant(mesh.num_elements(), 1.0);
        let none = BoundaryConditions::new();
        let err = assemble_with_coefficients(&mesh, &law, &c, &LoadSpec::top_tension(1.0), &none);
        assert!(matches!(err, Err(Error::IncompatibleNeumannData { .. })));
        let balanced = LoadSpec {
            body_force: BodyForce::Constant([0.0, 0.0]),
            tractions: vec![
                (BoundaryTag::Top, [0.0, 1.0]),
                (BoundaryTag::CrackFace, [0.0, -1.0]),
                (BoundaryTag::Ligament, [0.0, -1.0]),
            ],
        };
        assert!(assemble_with_coefficients(&mesh, &law, &c, &balanced, &none).is_ok());
    }

    #[test]
    fn inadmissible_previous_field() {
        let mesh = generate(&MeshSpec::uniform(2.0, 1.0, 2, 2, [1.0, 0.0])).unwrap();
        let u = NodalField::from_fn(&mesh.nodes, |p| [p[0], 0.0]);
        let model = MaterialModel::default().with_beta(10.0);
        let bcs = BoundaryConditions::mode_one_crack();
        let load = LoadSpec::none();
        assert!(matches!(
            assemble(&mesh, &model, &u, &load, &bcs, None),
            Err(Error::InadmissibleStrain { .. })
        ));
        let (_, clamped) = assemble(&mesh, &model, &u, &load, &bcs, Some(1e-8)).unwrap();
        assert_eq!(clamped, 16);
    }
}
