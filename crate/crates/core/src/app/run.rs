//! Sweep orchestration and per-run output.
//!
//! Each sweep point writes into `<output_dir>/<scenario>/<tag>/`:
//! `iterations.txt`, `radial.csv`, `opening.csv`, `field.vtk`,
//! `manifest.txt` and `timing.txt`. All files except `timing.txt` are
//! deterministic functions of the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{BodyForce, BoundaryConditions, LoadSpec, NodalField};
use crate::mesh::{generate, Mesh};
use crate::picard::{solve, IterationReport};
use crate::postprocess::{crack_opening, export_opening_csv, export_vtk, radial_samples, write_atomic};

use super::config::{RunConfig, RunPoint};

pub const ITERATIONS_FILE: &str = "iterations.txt";
pub const RADIAL_FILE: &str = "radial.csv";
pub const OPENING_FILE: &str = "opening.csv";
pub const FIELD_FILE: &str = "field.vtk";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const TIMING_FILE: &str = "timing.txt";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    NotConverged,
    Failed,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::NotConverged => "not-converged",
            RunStatus::Failed => "failed",
        }
    }
}

/// Record of one sweep point.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub scenario: String,
    pub point: RunPoint,
    pub directory: PathBuf,
    pub status: RunStatus,
    pub error: Option<String>,
    pub report: Option<IterationReport>,
    /// File names inside `directory`, in write order.
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn succeeded(&self) -> bool {
        self.status == RunStatus::Converged
    }
}

/// True when every run converged; the CLI exit code is 0 exactly then.
pub fn all_converged(manifests: &[RunManifest]) -> bool {
    manifests.iter().all(RunManifest::succeeded)
}

fn toml_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

fn toml_str(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Manifest text (TOML). Wall-clock time is kept out of it so that reruns
/// reproduce it byte for byte; `timing.txt` holds the time.
pub fn manifest_text(config: &RunConfig, m: &RunManifest) -> String {
    let model = config.model_for(&m.point);
    let mut s = String::from("# slfem run manifest\n");
    let _ = writeln!(s, "scenario = {}", toml_str(&m.scenario));
    let _ = writeln!(s, "tag = {}", toml_str(&m.point.tag()));
    let _ = writeln!(s, "status = {}", toml_str(m.status.name()));
    if let Some(e) = &m.error {
        let _ = writeln!(s, "error = {}", toml_str(e));
    }
    let _ = writeln!(s, "timing_file = {}", toml_str(TIMING_FILE));
    let list = |v: &[String]| v.iter().map(|f| toml_str(f)).collect::<Vec<_>>().join(", ");
    let _ = writeln!(s, "files = [{}]", list(&m.files));

    let mesh = &config.mesh;
    let _ = writeln!(s, "\n[mesh]");
    let _ = writeln!(s, "lx = {}\nly = {}", toml_f64(mesh.lx), toml_f64(mesh.ly));
    let _ = writeln!(s, "nx = {}\nny = {}", mesh.nx, mesh.ny);
    let _ = writeln!(
        s,
        "crack_tip = [{}, {}]",
        toml_f64(mesh.crack_tip[0]),
        toml_f64(mesh.crack_tip[1])
    );
    let _ = writeln!(s, "grading = {}", toml_f64(mesh.grading));

    let _ = writeln!(s, "\n[material]");
    let _ = writeln!(
        s,
        "mu = {}\nlambda = {}",
        toml_f64(model.mu),
        toml_f64(model.lambda_lame)
    );
    let _ = writeln!(s, "gamma = {}\nbeta = {}", toml_f64(model.gamma), toml_f64(model.beta));
    let _ = writeln!(
        s,
        "alpha = {}\nfiber_angle = {}",
        toml_f64(model.alpha),
        toml_f64(model.fiber_angle)
    );

    let _ = writeln!(s, "\n[load]");
    let _ = writeln!(s, "sigma_t = {}", toml_f64(m.point.sigma_t));
    let _ = writeln!(
        s,
        "body_force = [{}, {}]",
        toml_f64(config.body_force[0]),
        toml_f64(config.body_force[1])
    );

    let sv = &config.solver;
    let _ = writeln!(s, "\n[solver]");
    let _ = writeln!(s, "tol = {}\nmax_iter = {}", toml_f64(sv.tol), sv.max_iter);
    let _ = writeln!(s, "clamp_delta = {}", toml_f64(sv.clamp_delta));
    let _ = writeln!(s, "linear_rel_tol = {}", toml_f64(sv.linear_rel_tol));
    let _ = writeln!(s, "relaxation = {}", toml_f64(sv.relaxation));
    let _ = writeln!(s, "linearization = {}", toml_str(sv.linearization.name()));
    let _ = writeln!(s, "anderson_depth = {}", sv.anderson_depth);

    if let Some(r) = &m.report {
        let _ = writeln!(s, "\n[report]");
        let _ = writeln!(s, "converged = {}", r.converged);
        let _ = writeln!(s, "iterations_used = {}", r.iterations_used);
        let res: Vec<String> = r.residuals.iter().map(|&v| toml_f64(v)).collect();
        let _ = writeln!(s, "residuals = [{}]", res.join(", "));
        let cl: Vec<String> = r.clamp_counts.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "clamp_counts = [{}]", cl.join(", "));
    }
    s
}

/// Runs every sweep point of `config` with up to `jobs` in parallel and
/// returns the manifests in sweep order. Per-run failures are recorded in
/// the manifests; only setup errors abort.
pub fn run(config: &RunConfig, jobs: usize) -> Result<Vec<RunManifest>> {
    let mesh = generate(&config.mesh)?;
    let scenario_dir = config.output_dir.join(config.scenario.name());
    fs::create_dir_all(&scenario_dir).map_err(|e| Error::io(&scenario_dir, e))?;
    let points = config.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    pool.install(|| {
        points
            .par_iter()
            .map(|p| run_point(config, &mesh, &scenario_dir, p))
            .collect()
    })
}

fn run_point(config: &RunConfig, mesh: &Mesh, scenario_dir: &Path, point: &RunPoint) -> Result<RunManifest> {
    let dir = scenario_dir.join(point.tag());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let start = Instant::now();
    let mut manifest = RunManifest {
        scenario: config.scenario.name().to_string(),
        point: *point,
        directory: dir.clone(),
        status: RunStatus::Failed,
        error: None,
        report: None,
        files: Vec::new(),
        wall_clock_seconds: 0.0,
    };
    if let Err(e) = solve_and_write(config, mesh, point, &dir, &mut manifest) {
        manifest.status = RunStatus::Failed;
        manifest.error = Some(e.to_string());
    }
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    let timing = format!("wall_clock_seconds = {}\n", manifest.wall_clock_seconds);
    write_atomic(&dir.join(TIMING_FILE), timing.as_bytes())?;
    manifest.files.push(MANIFEST_FILE.to_string());
    write_atomic(&dir.join(MANIFEST_FILE), manifest_text(config, &manifest).as_bytes())?;
    Ok(manifest)
}

fn solve_and_write(
    config: &RunConfig,
    mesh: &Mesh,
    point: &RunPoint,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let model = config.model_for(point);
    let load = LoadSpec::top_tension(point.sigma_t).with_body_force(BodyForce::Constant(config.body_force));
    let bcs = BoundaryConditions::mode_one_crack();
    let (u, report): (NodalField, IterationReport) = solve(mesh, &model, &load, &bcs, &config.solver)?;
    write_atomic(&dir.join(ITERATIONS_FILE), report.to_table().as_bytes())?;
    manifest.files.push(ITERATIONS_FILE.to_string());
    manifest.status = if report.converged {
        RunStatus::Converged
    } else {
        RunStatus::NotConverged
    };
    manifest.report = Some(report);

    let spec = config.path.resolve(mesh);
    let samples = radial_samples(&u, &spec, mesh, &model, point.sigma_t)?;
    crate::postprocess::export_csv(&samples, &dir.join(RADIAL_FILE))?;
    manifest.files.push(RADIAL_FILE.to_string());

    export_opening_csv(&crack_opening(&u, mesh)?, &dir.join(OPENING_FILE))?;
    manifest.files.push(OPENING_FILE.to_string());

    export_vtk(&u, mesh, &model, &dir.join(FIELD_FILE))?;
    manifest.files.push(FIELD_FILE.to_string());
    Ok(())
}
