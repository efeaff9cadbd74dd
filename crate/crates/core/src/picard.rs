//! Picard iteration for the quasilinear problem.
//!
//! The iteration starts from the linear (β = 0) solution, then repeatedly
//! freezes the nonlinear coefficient at quadrature points, solves the
//! resulting linear system, and monitors the fully nonlinear residual
//! `r_i = a_h(u; u, φ_i) − l_h(φ_i)` over the unconstrained dofs.
//!
//! Two coefficient updates are available. [`Linearization::FrozenStrain`]
//! sets `c = Ψ(s(uⁿ⁻¹))`; it contracts only while `β s < 1/2` and needs the
//! admissibility guard whenever an iterate overshoots the strain limit.
//! [`Linearization::StressSecant`] (the default) takes the secant modulus of
//! the inverted law at the last computed stress, which is defined for every
//! iterate. Both share the same fixed points. The coefficient sequence can
//! optionally be accelerated by Anderson mixing.

use std::fmt::Write as _;

use crate::constitutive::{ConstitutiveLaw, MaterialModel};
use crate::error::{Error, Result};
use crate::fem::{
    apply_constraints, assemble_with_coefficients, coefficients_from_displacement, coefficients_from_stress,
    internal_force, load_vector, BoundaryConditions, CoefficientField, LoadSpec, NodalField,
};
use crate::mesh::Mesh;

/// How the frozen coefficient is computed from the previous iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Linearization {
    /// `c = (1 + (β c_prev s(u))^α)^(1/α)`.
    #[default]
    StressSecant,
    /// `c = Ψ(s(u))`, clamped when inadmissible.
    FrozenStrain,
}

impl Linearization {
    pub fn name(self) -> &'static str {
        match self {
            Linearization::StressSecant => "stress-secant",
            Linearization::FrozenStrain => "frozen-strain",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "stress-secant" => Some(Linearization::StressSecant),
            "frozen-strain" => Some(Linearization::FrozenStrain),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub clamp_delta: f64,
    pub linear_rel_tol: f64,
    /// Under-relaxation of the update, `u ← ω u_new + (1 − ω) u_old`.
    pub relaxation: f64,
    pub linearization: Linearization,
    /// Number of previous coefficient updates used by Anderson mixing;
    /// 0 gives the plain fixed-point iteration.
    pub anderson_depth: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-6,
            max_iter: 10,
            clamp_delta: 1e-8,
            linear_rel_tol: 1e-12,
            relaxation: 1.0,
            linearization: Linearization::StressSecant,
            anderson_depth: 3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::config("solver.tol", "must be > 0"));
        }
        if self.max_iter < 1 {
            return Err(Error::config("solver.max_iter", "must be >= 1"));
        }
        if !(self.clamp_delta > 0.0 && self.clamp_delta < 1.0) {
            return Err(Error::config("solver.clamp_delta", "must lie in (0, 1)"));
        }
        if !(self.linear_rel_tol > 0.0 && self.linear_rel_tol < 1.0) {
            return Err(Error::config("solver.linear_rel_tol", "must lie in (0, 1)"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::config("solver.relaxation", "must lie in (0, 1]"));
        }
        if self.anderson_depth > 20 {
            return Err(Error::config("solver.anderson_depth", "must be <= 20"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationReport {
    pub residuals: Vec<f64>,
    /// Quadrature points clamped per iteration (assembly and residual).
    pub clamp_counts: Vec<usize>,
    /// Conjugate-gradient iterations per Picard step.
    pub linear_iterations: Vec<usize>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl IterationReport {
    /// True when the admissibility guard fired at least once.
    pub fn clamped(&self) -> bool {
        self.clamp_counts.iter().any(|&c| c > 0)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    /// Iteration table: one `iteration residual` line per Picard step.
    pub fn to_table(&self) -> String {
        let mut s = String::from("# iteration residual clamped_points\n");
        for (n, (r, c)) in self.residuals.iter().zip(&self.clamp_counts).enumerate() {
            let _ = writeln!(s, "{} {:.16e} {}", n + 1, r, c);
        }
        s
    }
}

/// Problem data shared by all Picard steps.
struct Problem<'a> {
    mesh: &'a Mesh,
    law: ConstitutiveLaw,
    load: &'a LoadSpec,
    bcs: &'a BoundaryConditions,
    external: Vec<f64>,
    constrained: Vec<bool>,
}

impl<'a> Problem<'a> {
    fn new(mesh: &'a Mesh, model: &MaterialModel, load: &'a LoadSpec, bcs: &'a BoundaryConditions) -> Result<Self> {
        let law = ConstitutiveLaw::new(model)?;
        let external = load_vector(mesh, load)?;
        let mut constrained = vec![false; 2 * mesh.num_nodes()];
        for (dof, _) in bcs.resolve(mesh)? {
            constrained[dof] = true;
        }
        Ok(Problem {
            mesh,
            law,
            load,
            bcs,
            external,
            constrained,
        })
    }

    fn linear_solve(
        &self,
        coefficients: &CoefficientField,
        rel_tol: f64,
        start: Option<&NodalField>,
    ) -> Result<(NodalField, usize)> {
        let system = assemble_with_coefficients(self.mesh, &self.law, coefficients, self.load, self.bcs)?;
        let constrained = apply_constraints(system)?;
        let (u, out) = crate::fem::solve_spd_from(&constrained, rel_tol, start)?;
        Ok((u, out.iterations))
    }

    fn residual(&self, u: &NodalField, clamp_delta: Option<f64>) -> Result<(f64, usize)> {
        let (fint, clamped) = internal_force(self.mesh, &self.law, u, clamp_delta)?;
        let norm = fint
            .iter()
            .zip(&self.external)
            .zip(&self.constrained)
            .filter(|(_, &c)| !c)
            .map(|((fi, fe), _)| (fi - fe).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok((norm, clamped))
    }
}

/// Solution of the linear (β = 0) problem under the same data.
pub fn initial_guess(
    mesh: &Mesh,
    model: &MaterialModel,
    load: &LoadSpec,
    bcs: &BoundaryConditions,
    config: &SolverConfig,
) -> Result<NodalField> {
    let problem = Problem::new(mesh, model, load, bcs)?;
    let ones = CoefficientField::constant(mesh.num_elements(), 1.0);
    problem.linear_solve(&ones, config.linear_rel_tol, None).map(|(u, _)| u)
}

/// Euclidean norm of the nonlinear residual over unconstrained dofs, with
/// the number of quadrature points the admissibility guard clamped.
pub fn residual_norm(
    mesh: &Mesh,
    model: &MaterialModel,
    u: &NodalField,
    load: &LoadSpec,
    bcs: &BoundaryConditions,
    clamp_delta: f64,
) -> Result<(f64, usize)> {
    Problem::new(mesh, model, load, bcs)?.residual(u, Some(clamp_delta))
}

pub fn solve(
    mesh: &Mesh,
    model: &MaterialModel,
    load: &LoadSpec,
    bcs: &BoundaryConditions,
    config: &SolverConfig,
) -> Result<(NodalField, IterationReport)> {
    solve_observed(mesh, model, load, bcs, config, |_, _| {})
}

/// [`solve`] with a callback receiving every Picard iterate `(n, u_n)`.
pub fn solve_observed(
    mesh: &Mesh,
    model: &MaterialModel,
    load: &LoadSpec,
    bcs: &BoundaryConditions,
    config: &SolverConfig,
    mut observer: impl FnMut(usize, &NodalField),
) -> Result<(NodalField, IterationReport)> {
    config.validate()?;
    let problem = Problem::new(mesh, model, load, bcs)?;
    let guard = Some(config.clamp_delta);

    let ones = CoefficientField::constant(mesh.num_elements(), 1.0);
    let (mut u, _) = problem.linear_solve(&ones, config.linear_rel_tol, None)?;
    if !u.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }

    let mut report = IterationReport::default();
    let mut coefficients = ones;
    let mut mixer = Anderson::new(config.anderson_depth);
    for n in 1..=config.max_iter {
        let (update, clamped_assembly) = match config.linearization {
            Linearization::StressSecant => (coefficients_from_stress(mesh, &problem.law, &u, &coefficients)?, 0),
            Linearization::FrozenStrain => coefficients_from_displacement(mesh, &problem.law, &u, guard)?,
        };
        coefficients = mixer.mix(&coefficients, update);
        let (mut next, cg_iters) = problem.linear_solve(&coefficients, config.linear_rel_tol, Some(&u))?;
        if config.relaxation != 1.0 {
            let w = config.relaxation;
            for (v, old) in next.values.iter_mut().zip(&u.values) {
                *v = w * *v + (1.0 - w) * old;
            }
        }
        if !next.is_finite() {
            return Err(Error::Divergence { iteration: n });
        }
        u = next;
        let (res, clamped_residual) = problem.residual(&u, guard)?;
        if !res.is_finite() {
            return Err(Error::Divergence { iteration: n });
        }
        observer(n, &u);
        report.residuals.push(res);
        report.clamp_counts.push(clamped_assembly + clamped_residual);
        report.linear_iterations.push(cg_iters);
        report.iterations_used = n;
        if res <= config.tol {
            report.converged = true;
            break;
        }
    }
    Ok((u, report))
}

/// One frozen-strain Picard step from `u`: the solution of the linear
/// problem with `c = Ψ(s(u))`. At a fixed point this reproduces `u`.
pub fn picard_step(
    mesh: &Mesh,
    model: &MaterialModel,
    u: &NodalField,
    load: &LoadSpec,
    bcs: &BoundaryConditions,
    config: &SolverConfig,
) -> Result<NodalField> {
    config.validate()?;
    let problem = Problem::new(mesh, model, load, bcs)?;
    let (c, _) = coefficients_from_displacement(mesh, &problem.law, u, Some(config.clamp_delta))?;
    problem.linear_solve(&c, config.linear_rel_tol, Some(u)).map(|(v, _)| v)
}

/// Anderson mixing of a coefficient fixed-point map `c ↦ g(c)`.
///
/// Keeps the last `depth + 1` pairs `(g_k, f_k = g_k − c_k)` and returns
/// `g − ΔG γ` with `γ` minimizing `‖f − ΔF γ‖`. Results are bounded below by
/// 1, the smallest value any coefficient can take.
struct Anderson {
    depth: usize,
    g: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Anderson {
            depth,
            g: Vec::new(),
            f: Vec::new(),
        }
    }

    fn mix(&mut self, current: &CoefficientField, update: CoefficientField) -> CoefficientField {
        if self.depth == 0 {
            return update;
        }
        let f: Vec<f64> = update.values.iter().zip(&current.values).map(|(g, c)| g - c).collect();
        self.g.push(update.values);
        self.f.push(f);
        if self.g.len() > self.depth + 1 {
            self.g.remove(0);
            self.f.remove(0);
        }
        let last = self.g.len() - 1;
        let mut mixed = self.g[last].clone();
        if last == 0 {
            return CoefficientField { values: mixed };
        }
        let diff = |h: &[Vec<f64>], i: usize| -> Vec<f64> { h[i + 1].iter().zip(&h[i]).map(|(a, b)| a - b).collect() };
        let df: Vec<Vec<f64>> = (0..last).map(|i| diff(&self.f, i)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut gram = vec![vec![0.0; last]; last];
        let mut rhs = vec![0.0; last];
        for i in 0..last {
            rhs[i] = dot(&df[i], &self.f[last]);
            for j in 0..last {
                gram[i][j] = dot(&df[i], &df[j]);
            }
        }
        let Some(gamma) = solve_regularized(gram, rhs) else {
            return CoefficientField { values: mixed };
        };
        for (i, &gi) in gamma.iter().enumerate() {
            let dg = diff(&self.g, i);
            for (m, d) in mixed.iter_mut().zip(&dg) {
                *m -= gi * d;
            }
        }
        for m in &mut mixed {
            *m = m.max(1.0);
        }
        CoefficientField { values: mixed }
    }
}

/// Cholesky solve of the small normal equations with a relative Tikhonov
/// shift; `None` when the history is degenerate.
fn solve_regularized(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let trace: f64 = (0..n).map(|i| a[i][i]).sum();
    if !(trace > 0.0 && trace.is_finite()) {
        return None;
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += 1e-10 * trace;
    }
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= a[i][k] * a[j][k];
            }
            a[i][j] = v / d;
        }
    }
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, MeshSpec};

    fn small_problem() -> (Mesh, LoadSpec, BoundaryConditions) {
        let mesh = generate(&MeshSpec::uniform(2.0, 1.0, 8, 4, [1.0, 0.0])).unwrap();
        (mesh, LoadSpec::top_tension(0.1), BoundaryConditions::mode_one_crack())
    }

    #[test]
    fn linear_model_converges_in_one_step() {
        let (mesh, load, bcs) = small_problem();
        let model = MaterialModel::default().with_beta(0.0);
        for linearization in [Linearization::StressSecant, Linearization::FrozenStrain] {
            let cfg = SolverConfig {
                linearization,
                ..SolverConfig::default()
            };
            let (_, rep) = solve(&mesh, &model, &load, &bcs, &cfg).unwrap();
            assert!(rep.converged);
            assert_eq!(rep.iterations_used, 1);
            assert!(!rep.clamped());
        }
    }

    #[test]
    fn linearizations_share_fixed_point() {
        let (mesh, load, bcs) = small_problem();
        let model = MaterialModel::default().with_beta(0.5);
        let base = SolverConfig {
            tol: 1e-11,
            max_iter: 200,
            ..SolverConfig::default()
        };
        let (a, ra) = solve(&mesh, &model, &load, &bcs, &base).unwrap();
        let frozen = SolverConfig {
            linearization: Linearization::FrozenStrain,
            anderson_depth: 0,
            ..base
        };
        let (b, rb) = solve(&mesh, &model, &load, &bcs, &frozen).unwrap();
        assert!(ra.converged && rb.converged);
        let d = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn bad_config_names_key() {
        let cfg = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        match cfg.validate() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "solver.tol"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn regularized_solve_matches_direct() {
        let x = solve_regularized(vec![vec![4.0, 1.0], vec![1.0, 3.0]], vec![1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-9);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-9);
        assert!(solve_regularized(vec![vec![0.0]], vec![1.0]).is_none());
    }

    #[test]
    fn table_format() {
        let rep = IterationReport {
            residuals: vec![0.5],
            clamp_counts: vec![0],
            linear_iterations: vec![3],
            converged: false,
            iterations_used: 1,
        };
        assert_eq!(
            rep.to_table(),
            "# iteration residual clamped_points\n1 5.0000000000000000e-1 0\n"
        );
    }

    #[test]
    fn linearization_names_round_trip() {
        for l in [Linearization::StressSecant, Linearization::FrozenStrain] {
            assert_eq!(Linearization::from_name(l.name()), Some(l));
        }
    }
}
