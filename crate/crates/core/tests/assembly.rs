//! Assembly, strain recovery and linear solves checked against brute-force
//! oracles.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slfem::constitutive::{ConstitutiveLaw, MaterialModel};
use slfem::fem::{
    apply_constraints, assemble, internal_force, load_vector, solve_spd, strain_at, BoundaryConditions, LoadSpec,
    NodalField,
};
use slfem::mesh::{generate, Mesh, MeshSpec};

fn random_field(mesh: &Mesh, amplitude: f64, seed: u64) -> NodalField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    NodalField::from_values(
        (0..2 * mesh.num_nodes())
            .map(|_| rng.gen_range(-amplitude..amplitude))
            .collect(),
    )
}

fn graded(nx: usize, ny: usize) -> Mesh {
    generate(&MeshSpec {
        nx,
        ny,
        grading: 1.3,
        ..MeshSpec::default()
    })
    .unwrap()
}

#[test]
fn strain_matches_oracle_on_graded_mesh() {
    let mesh = graded(6, 4);
    let u = random_field(&mesh, 0.1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for el in 0..mesh.num_elements() {
        let (xi, eta) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let lib = strain_at(&mesh, el, xi, eta, &u).unwrap();
        let oracle = common::strain_oracle(&mesh, el, xi, eta, &u);
        let (e11, e22, e12) = lib.components();
        let scale = 1.0 + e11.abs().max(e22.abs()).max(e12.abs());
        assert!((e11 - oracle[0][0]).abs() < 1e-12 * scale);
        assert!((e22 - oracle[1][1]).abs() < 1e-12 * scale);
        assert!((e12 - oracle[0][1]).abs() < 1e-12 * scale);
    }
}

#[test]
fn stiffness_matches_dense_oracle_on_graded_mesh() {
    let mesh = graded(4, 2);
    for (beta, angle) in [(0.0, 0.0), (1.0, 0.4), (10.0, 1.2)] {
        let model = MaterialModel::default().with_beta(beta).with_fiber_angle(angle);
        let u_prev = random_field(&mesh, 2e-4, 3);
        let (sys, clamped) = assemble(
            &mesh,
            &model,
            &u_prev,
            &LoadSpec::none(),
            &BoundaryConditions::mode_one_crack(),
            None,
        )
        .unwrap();
        assert_eq!(clamped, 0);
        let sparse = common::to_dmatrix(&sys.matrix.to_dense());
        let dense = common::dense_stiffness(&mesh, &model, &u_prev);
        let scale = dense.amax();
        assert!((sparse - dense).amax() <= 1e-13 * scale);
    }
}

#[test]
fn constrained_matrix_is_spd() {
    let mesh = graded(4, 3);
    for seed in 0..4 {
        let model = MaterialModel::default().with_beta(0.5 * seed as f64);
        let u_prev = random_field(&mesh, 1e-3, 10 + seed);
        let (sys, _) = assemble(
            &mesh,
            &model,
            &u_prev,
            &LoadSpec::top_tension(0.1),
            &BoundaryConditions::mode_one_crack(),
            None,
        )
        .unwrap();
        let k = common::to_dmatrix(&apply_constraints(sys).unwrap().matrix.to_dense());
        assert!((&k - k.transpose()).amax() <= 1e-14 * k.amax());
        let eig = nalgebra::SymmetricEigen::new(k).eigenvalues;
        assert!(eig.min() > 0.0);
    }
}

#[test]
fn traction_load_sums_to_applied_force() {
    let mesh = graded(8, 4);
    let f = load_vector(&mesh, &LoadSpec::top_tension(0.3)).unwrap();
    let fx: f64 = f.iter().step_by(2).sum();
    let fy: f64 = f.iter().skip(1).step_by(2).sum();
    assert!(fx.abs() < 1e-15);
    assert!((fy - 0.3 * mesh.lx).abs() < 1e-14);
}

#[test]
fn internal_force_is_stiffness_times_displacement_when_linear() {
    let mesh = graded(6, 3);
    let model = MaterialModel::default().with_beta(0.0);
    let u = random_field(&mesh, 0.05, 4);
    let k = common::dense_stiffness(&mesh, &model, &u);
    let ku = &k * nalgebra::DVector::from_vec(u.values.clone());
    let (f, clamped) = internal_force(&mesh, &ConstitutiveLaw::new(&model).unwrap(), &u, None).unwrap();
    assert_eq!(clamped, 0);
    for (a, b) in f.iter().zip(ku.iter()) {
        assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn linear_solve_matches_dense_lu() {
    let mesh = graded(6, 3);
    let model = MaterialModel::default().with_beta(0.0);
    let (sys, _) = assemble(
        &mesh,
        &model,
        &NodalField::zeros(mesh.num_nodes()),
        &LoadSpec::top_tension(0.1),
        &BoundaryConditions::mode_one_crack(),
        None,
    )
    .unwrap();
    let constrained = apply_constraints(sys).unwrap();
    let u = solve_spd(&constrained, 1e-13).unwrap();
    let k = common::to_dmatrix(&constrained.matrix.to_dense());
    let x = k
        .lu()
        .solve(&nalgebra::DVector::from_vec(constrained.rhs.clone()))
        .unwrap();
    let scale = x.amax();
    for (a, b) in u.values.iter().zip(x.iter()) {
        assert!((a - b).abs() < 1e-10 * scale);
    }
}

#[test]
fn clamping_is_counted_for_inadmissible_iterates() {
    let mesh = graded(4, 2);
    let model = MaterialModel::default().with_beta(10.0);
    let u = random_field(&mesh, 1.0, 5);
    let bcs = BoundaryConditions::mode_one_crack();
    assert!(assemble(&mesh, &model, &u, &LoadSpec::none(), &bcs, None).is_err());
    let (_, clamped) = assemble(&mesh, &model, &u, &LoadSpec::none(), &bcs, Some(1e-8)).unwrap();
    assert!(clamped > 0);
}
