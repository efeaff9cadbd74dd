//! CSV and legacy-VTK writers.
//!
//! Numbers are written with `{:.16e}` (17 significant digits), which
//! round-trips every `f64` exactly. Files are written to a temporary sibling
//! and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::constitutive::{ConstitutiveLaw, MaterialModel};
use crate::error::{Error, Result};
use crate::fem::quadrature::QuadratureRule;
use crate::fem::shape::{element_displacements, strain_from_grads};
use crate::fem::NodalField;
use crate::mesh::Mesh;

use super::sample::{CrackOpeningProfile, RadialSample};

pub const RADIAL_HEADER: &str = "r,eps11,eps22,eps12,T11,T22,T12,T11_norm,T22_norm,T12_norm,psi,energy,clamped";
pub const OPENING_HEADER: &str = "x,u2";

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Radial samples as CSV text, one row per sample.
pub fn radial_csv(samples: &[RadialSample]) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::EmptyData("radial samples"));
    }
    let mut s = String::with_capacity(256 * (samples.len() + 1));
    s.push_str(RADIAL_HEADER);
    s.push('\n');
    for rs in samples {
        let f = &rs.sample;
        let (e11, e22, e12) = f.eps.components();
        let (t11, t22, t12) = f.stress.components();
        let [n11, n22, n12] = rs.stress_normalized;
        let row = [rs.r, e11, e22, e12, t11, t22, t12, n11, n22, n12, f.psi_value, f.energy];
        push_row(&mut s, &row);
        s.pop();
        s.push_str(if f.clamped { ",1\n" } else { ",0\n" });
    }
    Ok(s)
}

pub fn opening_csv(profile: &CrackOpeningProfile) -> Result<String> {
    if profile.points.is_empty() {
        return Err(Error::EmptyData("crack-opening profile"));
    }
    let mut s = String::from(OPENING_HEADER);
    s.push('\n');
    for &(x, u2) in &profile.points {
        push_row(&mut s, &[x, u2]);
    }
    Ok(s)
}

fn push_row(s: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s.push('\n');
}

pub fn export_csv(samples: &[RadialSample], path: &Path) -> Result<()> {
    write_atomic(path, radial_csv(samples)?.as_bytes())
}

pub fn export_opening_csv(profile: &CrackOpeningProfile, path: &Path) -> Result<()> {
    write_atomic(path, opening_csv(profile)?.as_bytes())
}

/// Per-element averages over the 2×2 quadrature points.
struct CellData {
    eps: Vec<[f64; 3]>,
    stress: Vec<[f64; 3]>,
    psi: Vec<f64>,
    energy: Vec<f64>,
}

fn cell_data(u: &NodalField, mesh: &Mesh, law: &ConstitutiveLaw) -> Result<CellData> {
    let rule = QuadratureRule::stiffness();
    let n = mesh.num_elements();
    let mut out = CellData {
        eps: Vec::with_capacity(n),
        stress: Vec::with_capacity(n),
        psi: Vec::with_capacity(n),
        energy: Vec::with_capacity(n),
    };
    let w = 1.0 / rule.len() as f64;
    for el in 0..n {
        let ue = element_displacements(mesh, el, u);
        let (mut e, mut t, mut p, mut en) = ([0.0; 3], [0.0; 3], 0.0, 0.0);
        for q in &rule.points {
            let mp = crate::fem::shape::map_element_point(mesh, el, q[0], q[1])?;
            let eps = strain_from_grads(&mp.grads, &ue);
            let stress = law.stress_from_strain(&eps)?;
            let (e11, e22, e12) = eps.components();
            let (t11, t22, t12) = stress.components();
            for (acc, v) in e.iter_mut().zip([e11, e22, e12]) {
                *acc += w * v;
            }
            for (acc, v) in t.iter_mut().zip([t11, t22, t12]) {
                *acc += w * v;
            }
            p += w * law.psi_of_strain(&eps)?;
            en += w * stress.ddot(&eps);
        }
        out.eps.push(e);
        out.stress.push(t);
        out.psi.push(p);
        out.energy.push(en);
    }
    Ok(out)
}

/// Legacy ASCII VTK unstructured grid of `u` on `mesh`.
pub fn vtk_string(u: &NodalField, mesh: &Mesh, model: &MaterialModel) -> Result<String> {
    u.check_len(mesh.num_nodes())?;
    let law = ConstitutiveLaw::new(model)?;
    let cells = cell_data(u, mesh, &law)?;
    let (np, nc) = (mesh.num_nodes(), mesh.num_elements());
    let mut s = String::with_capacity(64 * np + 512 * nc);
    s.push_str(
        "# vtk DataFile Version 3.0\nslfem displacement and recovered fields\nASCII\nDATASET UNSTRUCTURED_GRID\n",
    );
    let _ = writeln!(s, "POINTS {np} double");
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {nc} {}", 5 * nc);
    for e in &mesh.elements {
        let _ = writeln!(s, "4 {} {} {} {}", e[0], e[1], e[2], e[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        s.push_str("9\n");
    }
    let _ = writeln!(s, "POINT_DATA {np}\nVECTORS displacement double");
    for i in 0..np {
        let d = u.node(i);
        let _ = writeln!(s, "{:.16e} {:.16e} 0", d[0], d[1]);
    }
    let _ = writeln!(s, "CELL_DATA {nc}");
    let scalar = |s: &mut String, name: &str, values: &mut dyn Iterator<Item = f64>| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{v:.16e}");
        }
    };
    let names = ["eps11", "eps22", "eps12"];
    for (k, name) in names.iter().enumerate() {
        scalar(&mut s, name, &mut cells.eps.iter().map(|e| e[k]));
    }
    let names = ["T11", "T22", "T12"];
    for (k, name) in names.iter().enumerate() {
        scalar(&mut s, name, &mut cells.stress.iter().map(|t| t[k]));
    }
    scalar(&mut s, "psi", &mut cells.psi.iter().copied());
    scalar(&mut s, "energy", &mut cells.energy.iter().copied());
    Ok(s)
}

pub fn export_vtk(u: &NodalField, mesh: &Mesh, model: &MaterialModel, path: &Path) -> Result<()> {
    write_atomic(path, vtk_string(u, mesh, model)?.as_bytes())
}
