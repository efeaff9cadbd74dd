//! TOML run configuration.
//!
//! Every key is optional; omitted keys take the documented defaults and
//! unknown keys are rejected. Errors name the offending key as
//! `table.key`.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::constitutive::{elasticity_tensor, MaterialModel};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, MeshSpec};
use crate::picard::{Linearization, SolverConfig};
use crate::postprocess::{default_r_min, PathSpec};

pub const DEFAULT_BETA_SWEEP: [f64; 4] = [0.0, 0.1, 1.0, 10.0];
pub const DEFAULT_ALPHA_SWEEP: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_SIGMA_SWEEP: [f64; 3] = [0.05, 0.1, 0.2];

/// Fallbacks used when only one of Young's modulus and Poisson's ratio is given.
pub const DEFAULT_YOUNG: f64 = 1.0;
pub const DEFAULT_POISSON: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scenario {
    /// Fibers along x, `θ = 0`.
    FiberX,
    /// Fibers along y, `θ = π/2`.
    FiberY,
    Custom(f64),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::FiberX => "fiber-x",
            Scenario::FiberY => "fiber-y",
            Scenario::Custom(_) => "custom",
        }
    }

    pub fn fiber_angle(&self) -> f64 {
        match *self {
            Scenario::FiberX => 0.0,
            Scenario::FiberY => FRAC_PI_2,
            Scenario::Custom(theta) => theta,
        }
    }
}

/// Optional radial-path overrides; unset fields derive from the mesh.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PathConfig {
    pub angle: f64,
    pub r_max: Option<f64>,
    pub r_min: Option<f64>,
    pub n_samples: Option<usize>,
    pub offset: Option<f64>,
}

impl PathConfig {
    pub fn resolve(&self, mesh: &Mesh) -> PathSpec {
        let base = PathSpec::ahead_of_tip(mesh);
        let r_max = self.r_max.unwrap_or(base.r_max);
        PathSpec {
            origin: mesh.crack_tip,
            angle: self.angle,
            r_max,
            r_min: self.r_min.unwrap_or_else(|| default_r_min(mesh, r_max)),
            n_samples: self.n_samples.unwrap_or(base.n_samples),
            offset: self.offset.unwrap_or(base.offset),
        }
    }
}

/// One point of the parameter sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunPoint {
    pub beta: f64,
    pub alpha: f64,
    pub sigma_t: f64,
}

impl RunPoint {
    /// Directory name, e.g. `beta1_alpha1_sigmaT0.1`.
    pub fn tag(&self) -> String {
        format!("beta{}_alpha{}_sigmaT{}", self.beta, self.alpha, self.sigma_t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub mesh: MeshSpec,
    /// Base material; `beta` and `alpha` are replaced per sweep point and
    /// `fiber_angle` comes from the scenario.
    pub material: MaterialModel,
    pub sigma_t: f64,
    pub body_force: [f64; 2],
    pub solver: SolverConfig,
    pub path: PathConfig,
    pub beta_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let material = MaterialModel::default();
        RunConfig {
            scenario: Scenario::FiberX,
            mesh: MeshSpec::default(),
            material,
            sigma_t: 0.1,
            body_force: [0.0, 0.0],
            solver: SolverConfig::default(),
            path: PathConfig::default(),
            beta_values: vec![material.beta],
            alpha_values: vec![material.alpha],
            sigma_values: vec![0.1],
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Sweep points in β-major, then α, then σ_T order.
    pub fn points(&self) -> Vec<RunPoint> {
        let mut out = Vec::new();
        for &beta in &self.beta_values {
            for &alpha in &self.alpha_values {
                for &sigma_t in &self.sigma_values {
                    out.push(RunPoint { beta, alpha, sigma_t });
                }
            }
        }
        out
    }

    pub fn model_for(&self, p: &RunPoint) -> MaterialModel {
        MaterialModel {
            beta: p.beta,
            alpha: p.alpha,
            fiber_angle: self.scenario.fiber_angle(),
            ..self.material
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    fiber_angle: Option<f64>,
    output_dir: Option<PathBuf>,
    mesh: Option<RawMesh>,
    material: Option<RawMaterial>,
    load: Option<RawLoad>,
    solver: Option<RawSolver>,
    path: Option<RawPath>,
    sweep: Option<RawSweep>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    lx: Option<f64>,
    ly: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
    crack_tip: Option<[f64; 2]>,
    grading: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    mu: Option<f64>,
    lambda: Option<f64>,
    young: Option<f64>,
    poisson: Option<f64>,
    gamma: Option<f64>,
    beta: Option<f64>,
    alpha: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLoad {
    sigma_t: Option<f64>,
    body_force: Option<[f64; 2]>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tol: Option<f64>,
    max_iter: Option<usize>,
    clamp_delta: Option<f64>,
    linear_rel_tol: Option<f64>,
    relaxation: Option<f64>,
    linearization: Option<String>,
    anderson_depth: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPath {
    angle: Option<f64>,
    r_max: Option<f64>,
    r_min: Option<f64>,
    n_samples: Option<usize>,
    offset: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSweepValues {
    List(Vec<f64>),
    Keyword(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    beta: Option<RawSweepValues>,
    alpha: Option<RawSweepValues>,
    sigma_t: Option<RawSweepValues>,
}

fn sweep_values(key: &str, raw: Option<RawSweepValues>, defaults: &[f64], base: f64) -> Result<Vec<f64>> {
    match raw {
        None => Ok(vec![base]),
        Some(RawSweepValues::Keyword(k)) if k == "default" => Ok(defaults.to_vec()),
        Some(RawSweepValues::Keyword(k)) => Err(Error::config(
            key,
            format!("expected a list or \"default\", got \"{k}\""),
        )),
        Some(RawSweepValues::List(v)) if v.is_empty() => Err(Error::config(key, "list must not be empty")),
        Some(RawSweepValues::List(v)) => Ok(v),
    }
}

fn require(key: &str, v: f64, ok: bool, what: &str) -> Result<()> {
    if v.is_finite() && ok {
        Ok(())
    } else {
        Err(Error::config(key, format!("{what}, got {v}")))
    }
}

/// Key of the TOML entry at byte `offset`, qualified by its table.
fn key_at(src: &str, offset: usize) -> Option<String> {
    let line_start = src[..offset.min(src.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = src[line_start..].lines().next()?;
    let key = line.split('=').next()?.trim();
    if key.is_empty() || key.starts_with('[') {
        return None;
    }
    let table = src[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && !l.starts_with("[["))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    Some(match table {
        Some(t) => format!("{t}.{key}"),
        None => key.to_string(),
    })
}

/// Parses configuration text.
pub fn parse_config_str(src: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let key = e
            .span()
            .and_then(|s| key_at(src, s.start))
            .unwrap_or_else(|| "<document>".to_string());
        Error::config(key, e.message().trim().to_string())
    })?;
    resolve(raw)
}

/// Reads and parses a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&src)
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let d = RunConfig::default();

    let scenario = match raw.scenario.as_deref().unwrap_or("fiber-x") {
        "fiber-x" => Scenario::FiberX,
        "fiber-y" => Scenario::FiberY,
        "custom" => {
            let theta = raw
                .fiber_angle
                .ok_or_else(|| Error::config("fiber_angle", "required for scenario \"custom\""))?;
            require("fiber_angle", theta, true, "must be finite")?;
            Scenario::Custom(theta)
        }
        other => {
            return Err(Error::config(
                "scenario",
                format!("unknown scenario \"{other}\" (expected fiber-x, fiber-y or custom)"),
            ))
        }
    };
    if raw.fiber_angle.is_some() && !matches!(scenario, Scenario::Custom(_)) {
        return Err(Error::config("fiber_angle", "only allowed with scenario = \"custom\""));
    }

    let m = raw.mesh.unwrap_or_default();
    let mesh = MeshSpec {
        lx: m.lx.unwrap_or(d.mesh.lx),
        ly: m.ly.unwrap_or(d.mesh.ly),
        nx: m.nx.unwrap_or(d.mesh.nx),
        ny: m.ny.unwrap_or(d.mesh.ny),
        crack_tip: m.crack_tip.unwrap_or(d.mesh.crack_tip),
        grading: m.grading.unwrap_or(d.mesh.grading),
    };
    require("mesh.lx", mesh.lx, mesh.lx > 0.0, "must be > 0")?;
    require("mesh.ly", mesh.ly, mesh.ly > 0.0, "must be > 0")?;
    if mesh.nx < 1 {
        return Err(Error::config("mesh.nx", "must be >= 1"));
    }
    if mesh.ny < 1 {
        return Err(Error::config("mesh.ny", "must be >= 1"));
    }
    require("mesh.grading", mesh.grading, mesh.grading >= 1.0, "must be >= 1")?;
    mesh.validate()
        .map_err(|e| Error::config("mesh.crack_tip", e.to_string()))?;

    let mat = raw.material.unwrap_or_default();
    let (mu, lambda_lame) = match (mat.mu, mat.lambda, mat.young, mat.poisson) {
        (mu, lambda, None, None) => (mu.unwrap_or(d.material.mu), lambda.unwrap_or(d.material.lambda_lame)),
        (None, None, young, poisson) => {
            let young = young.unwrap_or(DEFAULT_YOUNG);
            let poisson = poisson.unwrap_or(DEFAULT_POISSON);
            require("material.young", young, young > 0.0, "must be > 0")?;
            require(
                "material.poisson",
                poisson,
                poisson > -1.0 && poisson < 0.5,
                "must lie in (-1, 0.5)",
            )?;
            MaterialModel::lame_from_young_poisson(young, poisson)
        }
        _ => {
            return Err(Error::config(
                "material",
                "give either (mu, lambda) or (young, poisson), not both",
            ))
        }
    };
    let material = MaterialModel {
        mu,
        lambda_lame,
        gamma: mat.gamma.unwrap_or(d.material.gamma),
        beta: mat.beta.unwrap_or(d.material.beta),
        alpha: mat.alpha.unwrap_or(d.material.alpha),
        fiber_angle: scenario.fiber_angle(),
    };
    require("material.mu", material.mu, material.mu > 0.0, "must be > 0")?;
    require(
        "material.lambda",
        material.lambda_lame,
        material.lambda_lame > 0.0,
        "must be > 0",
    )?;
    require("material.gamma", material.gamma, material.gamma >= 0.0, "must be >= 0")?;
    require("material.beta", material.beta, material.beta >= 0.0, "must be >= 0")?;
    require("material.alpha", material.alpha, material.alpha > 0.0, "must be > 0")?;
    elasticity_tensor(&material).map_err(|e| Error::config("material", e.to_string()))?;

    let load = raw.load.unwrap_or_default();
    let sigma_t = load.sigma_t.unwrap_or(d.sigma_t);
    require("load.sigma_t", sigma_t, true, "must be finite")?;
    let body_force = load.body_force.unwrap_or(d.body_force);
    for (i, v) in body_force.iter().enumerate() {
        require(&format!("load.body_force[{i}]"), *v, true, "must be finite")?;
    }

    let s = raw.solver.unwrap_or_default();
    let solver = SolverConfig {
        tol: s.tol.unwrap_or(d.solver.tol),
        max_iter: s.max_iter.unwrap_or(d.solver.max_iter),
        clamp_delta: s.clamp_delta.unwrap_or(d.solver.clamp_delta),
        linear_rel_tol: s.linear_rel_tol.unwrap_or(d.solver.linear_rel_tol),
        relaxation: s.relaxation.unwrap_or(d.solver.relaxation),
        linearization: match s.linearization.as_deref() {
            None => d.solver.linearization,
            Some(name) => Linearization::from_name(name).ok_or_else(|| {
                Error::config(
                    "solver.linearization",
                    format!("unknown value \"{name}\" (expected stress-secant or frozen-strain)"),
                )
            })?,
        },
        anderson_depth: s.anderson_depth.unwrap_or(d.solver.anderson_depth),
    };
    solver.validate()?;

    let p = raw.path.unwrap_or_default();
    let path = PathConfig {
        angle: p.angle.unwrap_or(0.0),
        r_max: p.r_max,
        r_min: p.r_min,
        n_samples: p.n_samples,
        offset: p.offset,
    };
    require("path.angle", path.angle, true, "must be finite")?;
    // path.* keys are checked against the mesh they will be used with
    let probe_mesh = crate::mesh::generate(&mesh)?;
    path.resolve(&probe_mesh).validate()?;

    let sw = raw.sweep.unwrap_or_default();
    let beta_values = sweep_values("sweep.beta", sw.beta, &DEFAULT_BETA_SWEEP, material.beta)?;
    let alpha_values = sweep_values("sweep.alpha", sw.alpha, &DEFAULT_ALPHA_SWEEP, material.alpha)?;
    let sigma_values = sweep_values("sweep.sigma_t", sw.sigma_t, &DEFAULT_SIGMA_SWEEP, sigma_t)?;
    for &b in &beta_values {
        require("sweep.beta", b, b >= 0.0, "values must be >= 0")?;
    }
    for &a in &alpha_values {
        require("sweep.alpha", a, a > 0.0, "values must be > 0")?;
    }
    for &t in &sigma_values {
        require("sweep.sigma_t", t, true, "values must be finite")?;
    }

    Ok(RunConfig {
        scenario,
        mesh,
        material,
        sigma_t,
        body_force,
        solver,
        path,
        beta_values,
        alpha_values,
        sigma_values,
        output_dir: raw.output_dir.unwrap_or(d.output_dir),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(src: &str) -> String {
        match parse_config_str(src) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_is_default() {
        let c = parse_config_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.scenario, Scenario::FiberX);
        assert_eq!(c.sigma_t, 0.1);
        assert_eq!((c.material.alpha, c.material.beta), (1.0, 1.0));
        assert_eq!((c.solver.tol, c.solver.max_iter), (1e-6, 10));
        assert_eq!(c.points().len(), 1);
    }

    #[test]
    fn negative_alpha_names_key() {
        assert_eq!(key_of("[material]\nalpha = -1.0\n"), "material.alpha");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config_str("[material]\nalfa = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("alfa"), "{err}");
    }

    #[test]
    fn type_error_names_key() {
        assert_eq!(key_of("[solver]\ntol = \"small\"\n"), "solver.tol");
    }

    #[test]
    fn beta_sweep_schedules_four_runs() {
        let c = parse_config_str("[sweep]\nbeta = [0, 0.1, 1, 10]\n").unwrap();
        let betas: Vec<f64> = c.points().iter().map(|p| p.beta).collect();
        assert_eq!(betas, vec![0.0, 0.1, 1.0, 10.0]);
    }

    #[test]
    fn default_keyword_and_product() {
        let c = parse_config_str("[sweep]\nalpha = \"default\"\nsigma_t = [0.1, 0.2]\n").unwrap();
        assert_eq!(c.points().len(), 6);
        assert_eq!(key_of("[sweep]\nalpha = \"many\"\n"), "sweep.alpha");
    }

    #[test]
    fn scenarios() {
        let y = parse_config_str("scenario = \"fiber-y\"\n").unwrap();
        assert_eq!(y.model_for(&y.points()[0]).fiber_angle, FRAC_PI_2);
        let c = parse_config_str("scenario = \"custom\"\nfiber_angle = 0.3\n").unwrap();
        assert_eq!(c.scenario, Scenario::Custom(0.3));
        assert_eq!(key_of("scenario = \"custom\"\n"), "fiber_angle");
        assert_eq!(key_of("scenario = \"diagonal\"\n"), "scenario");
    }

    #[test]
    fn young_poisson_alternative() {
        let c = parse_config_str("[material]\nyoung = 2.6\npoisson = 0.3\n").unwrap();
        assert!((c.material.mu - 1.0).abs() < 1e-15);
        assert!((c.material.lambda_lame - 1.5).abs() < 1e-14);
        assert_eq!(key_of("[material]\nmu = 1.0\nyoung = 1.0\n"), "material");
    }

    #[test]
    fn tag_format() {
        let p = RunPoint {
            beta: 10.0,
            alpha: 0.5,
            sigma_t: 0.1,
        };
        assert_eq!(p.tag(), "beta10_alpha0.5_sigmaT0.1");
    }
}
