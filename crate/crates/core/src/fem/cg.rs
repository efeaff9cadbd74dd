//! Jacobi-preconditioned conjugate gradients for SPD systems.

use crate::error::{Error, Result};

use super::sparse::CsrMatrix;

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖`, recomputed from the returned `x`.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.matvec(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Solves `A x = b` to `‖b − A x‖ ≤ rel_tol ‖b‖`.
///
/// `max_iter` defaults to ten times the system size. The recursively
/// updated residual is confirmed against the true residual before
/// returning; on disagreement the recurrence restarts from the current `x`.
pub fn pcg(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, rel_tol: f64, max_iter: Option<usize>) -> Result<CgOutcome> {
    let n = a.nrows;
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let max_iter = max_iter.unwrap_or(10 * n.max(1));
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let target = rel_tol * b_norm;

    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        _ => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    'restart: loop {
        true_residual(a, b, &x, &mut r);
        if dot(&r, &r).sqrt() <= target {
            break 'restart;
        }
        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        loop {
            if iterations >= max_iter {
                true_residual(a, b, &x, &mut r);
                return Err(Error::LinearSolveFailed {
                    iterations,
                    residual: dot(&r, &r).sqrt() / b_norm,
                });
            }
            iterations += 1;
            a.matvec(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                // breakdown: loss of positive definiteness or exact solve
                continue 'restart;
            }
            let step = rz / pap;
            for i in 0..n {
                x[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            if dot(&r, &r).sqrt() <= target {
                continue 'restart;
            }
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            let rz_new = dot(&r, &z);
            let ratio = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + ratio * p[i];
            }
        }
    }

    let relative_residual = dot(&r, &r).sqrt() / b_norm;
    Ok(CgOutcome {
        x,
        iterations,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_iteration() {
        let a = CsrMatrix::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        let out = pcg(&a, &b, None, 1e-12, None).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b.to_vec());
    }

    #[test]
    fn small_spd_against_inverse() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 0.0], vec![0.0, 0.0, 2.0]]);
        let out = pcg(&a, &[1.0, 2.0, 3.0], None, 1e-12, None).unwrap();
        // inverse of the leading 2x2 block is [[3,-1],[-1,4]]/11
        let expect = [1.0 / 11.0, 7.0 / 11.0, 1.5];
        for (x, e) in out.x.iter().zip(expect) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = CsrMatrix::identity(3);
        let out = pcg(&a, &[0.0; 3], None, 1e-12, None).unwrap();
        assert_eq!(out.x, vec![0.0; 3]);
    }

    #[test]
    fn iteration_cap_reported() {
        let n = 50;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match (i as i64 - j as i64).abs() {
                        0 => 2.0,
                        1 => -1.0,
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        let a = CsrMatrix::from_dense(&rows);
        let b = vec![1.0; n];
        match pcg(&a, &b, None, 1e-14, Some(3)) {
            Err(Error::LinearSolveFailed { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-14);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
