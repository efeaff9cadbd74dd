//! Point evaluation of recovered fields, radial paths toward the crack tip,
//! crack-opening profiles and L2 distances between displacement fields.

use crate::constitutive::{psi_guarded, ConstitutiveLaw, MaterialModel};
use crate::error::{Error, Result};
use crate::fem::quadrature::QuadratureRule;
use crate::fem::shape::{element_displacements, map_point, strain_from_grads};
use crate::fem::NodalField;
use crate::mesh::{BoundaryTag, Mesh};
use crate::tensor::SymTensor2;

/// Recovered state at one physical point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub point: [f64; 2],
    pub eps: SymTensor2,
    pub stress: SymTensor2,
    pub psi_value: f64,
    /// `T : ε`.
    pub energy: f64,
    pub dist_to_tip: f64,
    /// True when the interpolated strain lay outside the admissible set and
    /// `Ψ` was evaluated with the solver's guard.
    pub clamped: bool,
}

/// Guard used for point evaluation; equal to the solver's default.
pub const SAMPLE_CLAMP_DELTA: f64 = 1e-8;

/// Tolerance on reference coordinates when deciding whether a point lies in
/// an element.
const REF_TOL: f64 = 1e-10;

/// Element containing `p` and the reference coordinates of `p` in it.
/// Points on shared edges or vertices go to the element of smallest index.
pub fn locate(mesh: &Mesh, p: [f64; 2]) -> Result<(usize, [f64; 2])> {
    for el in 0..mesh.num_elements() {
        let c = mesh.element_coords(el);
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &c {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let pad = 1e-12 * (hi[0] - lo[0] + hi[1] - lo[1]);
        if p[0] < lo[0] - pad || p[0] > hi[0] + pad || p[1] < lo[1] - pad || p[1] > hi[1] + pad {
            continue;
        }
        if let Some(r) = inverse_map(&c, p) {
            if r[0].abs() <= 1.0 + REF_TOL && r[1].abs() <= 1.0 + REF_TOL {
                return Ok((el, [r[0].clamp(-1.0, 1.0), r[1].clamp(-1.0, 1.0)]));
            }
        }
    }
    Err(Error::PointOutsideDomain { x: p[0], y: p[1] })
}

/// Newton iteration for the reference point mapping onto `p`.
fn inverse_map(coords: &[[f64; 2]; 4], p: [f64; 2]) -> Option<[f64; 2]> {
    let mut r = [0.0, 0.0];
    for _ in 0..30 {
        let m = map_point(coords, r[0], r[1])?;
        let d = [p[0] - m.x[0], p[1] - m.x[1]];
        let (_, dn) = crate::fem::shape_eval(r[0], r[1]);
        let mut j = [[0.0; 2]; 2];
        for a in 0..4 {
            for row in 0..2 {
                for col in 0..2 {
                    j[row][col] += coords[a][row] * dn[a][col];
                }
            }
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let step = [
            (j[1][1] * d[0] - j[0][1] * d[1]) / det,
            (-j[1][0] * d[0] + j[0][0] * d[1]) / det,
        ];
        r[0] += step[0];
        r[1] += step[1];
        if step[0].abs() + step[1].abs() < 1e-15 {
            break;
        }
        if r[0].abs() > 10.0 || r[1].abs() > 10.0 {
            return None;
        }
    }
    Some(r)
}

fn sample_with_law(u: &NodalField, point: [f64; 2], mesh: &Mesh, law: &ConstitutiveLaw) -> Result<FieldSample> {
    u.check_len(mesh.num_nodes())?;
    let (el, r) = locate(mesh, point)?;
    let coords = mesh.element_coords(el);
    let mp = map_point(&coords, r[0], r[1]).ok_or(Error::SingularElement { element: el, det: 0.0 })?;
    let eps = strain_from_grads(&mp.grads, &element_displacements(mesh, el, u));
    // Admissibility is enforced at quadrature points only, so interpolated
    // strains near the tip can exceed the limit.
    let (psi_value, clamped) = psi_guarded(law.energy_norm(&eps), law.beta(), law.alpha(), SAMPLE_CLAMP_DELTA);
    let stress = psi_value * law.elasticity.apply(&eps);
    let tip = mesh.crack_tip;
    Ok(FieldSample {
        point,
        eps,
        stress,
        psi_value,
        energy: stress.ddot(&eps),
        dist_to_tip: ((point[0] - tip[0]).powi(2) + (point[1] - tip[1]).powi(2)).sqrt(),
        clamped,
    })
}

/// Strain, stress, Ψ and energy density of `u` at `point`.
pub fn sample_at(u: &NodalField, point: [f64; 2], mesh: &Mesh, model: &MaterialModel) -> Result<FieldSample> {
    sample_with_law(u, point, mesh, &ConstitutiveLaw::new(model)?)
}

/// Shortest element edge incident to the crack-tip node, or `None` when the
/// tip is not a mesh node.
pub fn tip_element_size(mesh: &Mesh) -> Option<f64> {
    let tip = mesh.crack_tip_node()?;
    let mut h = f64::INFINITY;
    for conn in mesh.elements.iter() {
        if let Some(k) = conn.iter().position(|&n| n == tip) {
            for nb in [conn[(k + 1) % 4], conn[(k + 3) % 4]] {
                let (a, b) = (mesh.nodes[tip], mesh.nodes[nb]);
                h = h.min(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
    }
    h.is_finite().then_some(h)
}

/// Smallest sampling radius: the tip element size, so that no sample falls
/// inside the elements touching the tip, capped at `r_max / 2`.
pub fn default_r_min(mesh: &Mesh, r_max: f64) -> f64 {
    tip_element_size(mesh).unwrap_or(1e-3 * r_max).min(0.5 * r_max)
}

/// Radial sampling line emanating from the crack tip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSpec {
    pub origin: [f64; 2],
    /// Radians from the positive x axis.
    pub angle: f64,
    pub r_max: f64,
    pub r_min: f64,
    pub n_samples: usize,
    /// Shift along the path normal `(−sin θ, cos θ)`.
    pub offset: f64,
}

impl PathSpec {
    /// Path straight ahead of the tip of `mesh`, offset by `1e-6 Lx`. The
    /// smallest radius is [`default_r_min`].
    pub fn ahead_of_tip(mesh: &Mesh) -> Self {
        let r_max = 0.9 * (mesh.lx - mesh.crack_tip[0]).min(mesh.ly);
        PathSpec {
            origin: mesh.crack_tip,
            angle: 0.0,
            r_max,
            r_min: default_r_min(mesh, r_max),
            n_samples: 64,
            offset: 1e-6 * mesh.lx,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::config("path.r_max", "must be > 0"));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return Err(Error::config("path.r_min", "must lie in (0, r_max)"));
        }
        if self.n_samples < 2 {
            return Err(Error::config("path.n_samples", "must be >= 2"));
        }
        if !(self.offset >= 0.0 && self.offset.is_finite()) {
            return Err(Error::config("path.offset", "must be >= 0"));
        }
        Ok(())
    }

    /// Geometrically spaced radii from `r_min` to `r_max`, increasing.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.n_samples;
        let ratio = self.r_min / self.r_max;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.r_max
                } else if k == 0 {
                    self.r_min
                } else {
                    self.r_max * ratio.powf((n - 1 - k) as f64 / (n - 1) as f64)
                }
            })
            .collect()
    }

    pub fn point_at(&self, r: f64) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [
            self.origin[0] + r * c - self.offset * s,
            self.origin[1] + r * s + self.offset * c,
        ]
    }
}

/// One point of a radial path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialSample {
    pub r: f64,
    pub sample: FieldSample,
    /// `(T11, T22, T12) / σ_T`; NaN when `σ_T = 0`.
    pub stress_normalized: [f64; 3],
}

/// Samples along `spec`, ordered by increasing radius.
pub fn radial_samples(
    u: &NodalField,
    spec: &PathSpec,
    mesh: &Mesh,
    model: &MaterialModel,
    sigma_t: f64,
) -> Result<Vec<RadialSample>> {
    spec.validate()?;
    let law = ConstitutiveLaw::new(model)?;
    let radii = spec.radii();
    // report the radius nearest the tip that leaves the domain
    for &r in &radii {
        let p = spec.point_at(r);
        if p[0] < 0.0 || p[0] > mesh.lx || p[1] < 0.0 || p[1] > mesh.ly || locate(mesh, p).is_err() {
            return Err(Error::PathOutsideDomain { r });
        }
    }
    radii
        .into_iter()
        .map(|r| {
            let sample = sample_with_law(u, spec.point_at(r), mesh, &law)?;
            let (t11, t22, t12) = sample.stress.components();
            let stress_normalized = if sigma_t != 0.0 {
                [t11 / sigma_t, t22 / sigma_t, t12 / sigma_t]
            } else {
                [f64::NAN; 3]
            };
            Ok(RadialSample {
                r,
                sample,
                stress_normalized,
            })
        })
        .collect()
}

/// Vertical displacement along the crack face, mouth to tip.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrackOpeningProfile {
    /// `(x, u₂)` sorted by `x`.
    pub points: Vec<(f64, f64)>,
}

impl CrackOpeningProfile {
    pub fn is_nonincreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

pub fn crack_opening(u: &NodalField, mesh: &Mesh) -> Result<CrackOpeningProfile> {
    u.check_len(mesh.num_nodes())?;
    let mut points: Vec<(f64, f64)> = mesh
        .nodes_with_tag(BoundaryTag::CrackFace)
        .into_iter()
        .map(|n| (mesh.nodes[n][0], u.node(n)[1]))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(CrackOpeningProfile { points })
}

/// `‖u_a − u_b‖_{L2}` of the interpolated fields.
pub fn field_distance(u_a: &NodalField, u_b: &NodalField, mesh: &Mesh) -> Result<f64> {
    u_a.check_len(mesh.num_nodes())?;
    u_b.check_len(mesh.num_nodes())?;
    let diff = NodalField::from_values(u_a.values.iter().zip(&u_b.values).map(|(a, b)| a - b).collect());
    l2_error_against(&diff, mesh, |_| [0.0, 0.0])
}

/// `‖u_h − u‖_{L2}` for an exact field `u`, by 3×3 Gauss quadrature.
pub fn l2_error_against(u: &NodalField, mesh: &Mesh, exact: impl Fn([f64; 2]) -> [f64; 2]) -> Result<f64> {
    u.check_len(mesh.num_nodes())?;
    let rule = QuadratureRule::gauss(3);
    let mut sum = 0.0_f64;
    for el in 0..mesh.num_elements() {
        let coords = mesh.element_coords(el);
        let ue = element_displacements(mesh, el, u);
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let mp = map_point(&coords, p[0], p[1]).ok_or(Error::SingularElement { element: el, det: 0.0 })?;
            let mut uh = [0.0; 2];
            for a in 0..4 {
                uh[0] += mp.values[a] * ue[a][0];
                uh[1] += mp.values[a] * ue[a][1];
            }
            let ex = exact(mp.x);
            sum += w * mp.det_j * ((uh[0] - ex[0]).powi(2) + (uh[1] - ex[1]).powi(2));
        }
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, MeshSpec};

    fn mesh() -> Mesh {
        generate(&MeshSpec {
            nx: 8,
            ny: 4,
            ..MeshSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn locate_vertex_prefers_smallest_element() {
        let m = generate(&MeshSpec::uniform(2.0, 1.0, 2, 2, [1.0, 0.0])).unwrap();
        let (el, r) = locate(&m, [1.0, 0.5]).unwrap();
        assert_eq!(el, 0);
        assert_eq!(r, [1.0, 1.0]);
        assert!(matches!(locate(&m, [2.5, 0.5]), Err(Error::PointOutsideDomain { .. })));
    }

    #[test]
    fn affine_field_recovered() {
        let m = mesh();
        let u = NodalField::from_fn(&m.nodes, |p| [0.1 + 0.02 * p[0], -0.3 + 0.05 * p[1]]);
        let model = MaterialModel::default().with_beta(0.0);
        let s = sample_at(&u, [0.37, 0.61], &m, &model).unwrap();
        assert!(s.eps.max_component_diff(&SymTensor2::from_components(0.02, 0.05, 0.0)) < 1e-14);
        let e = crate::constitutive::elasticity_tensor(&model).unwrap();
        assert!(s.stress.max_component_diff(&e.apply(&s.eps)) < 1e-13);
    }

    #[test]
    fn two_sample_path() {
        let m = mesh();
        let spec = PathSpec {
            r_max: 0.5,
            n_samples: 2,
            ..PathSpec::ahead_of_tip(&m)
        };
        let u = NodalField::zeros(m.num_nodes());
        let s = radial_samples(&u, &spec, &m, &MaterialModel::default(), 0.1).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].sample.point, [1.0 + spec.r_min, spec.offset]);
        assert_eq!(s[1].sample.point, [1.5, spec.offset]);
    }

    #[test]
    fn path_leaving_domain_names_radius() {
        let m = mesh();
        let spec = PathSpec {
            r_max: 1.5,
            ..PathSpec::ahead_of_tip(&m)
        };
        let u = NodalField::zeros(m.num_nodes());
        match radial_samples(&u, &spec, &m, &MaterialModel::default(), 0.1) {
            Err(Error::PathOutsideDomain { r }) => assert!(r > 1.0 && r <= 1.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn distance_of_scaled_field() {
        let m = generate(&MeshSpec::uniform(1.0, 1.0, 4, 4, [0.5, 0.0])).unwrap();
        let u = NodalField::from_fn(&m.nodes, |p| [p[0] * p[1], 1.0 - p[0]]);
        let d = field_distance(&u, &u.scaled(2.0), &m).unwrap();
        let n = l2_error_against(&u, &m, |_| [0.0, 0.0]).unwrap();
        assert!((d - n).abs() < 1e-15);
        assert_eq!(field_distance(&u, &u, &m).unwrap(), 0.0);
        // ∫ (xy)² + (1 − x)² over the unit square
        assert!((n - (1.0f64 / 9.0 + 1.0 / 3.0).sqrt()).abs() < 1e-14);
    }
}
