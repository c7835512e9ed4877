//! Dense Lyapunov and continuous algebraic Riccati solvers for small systems.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const LYAP_TOL: f64 = 1e-8;
const CARE_TOL: f64 = 1e-8;
const SIGN_MAX_ITER: usize = 100;
const KLEINMAN_MAX_ITER: usize = 8;

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Solves `F P + P F^T + Q = 0` through the Kronecker-sum linear system.
///
/// The system is uniquely solvable whenever no two eigenvalues of `F` sum to
/// zero, so an unstable `F` still yields a (generally indefinite) solution.
pub fn solve_lyapunov(f: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = f.nrows();
    if f.shape() != (n, n) || q.shape() != (n, n) {
        return Err(Error::InvalidParameter(format!(
            "lyapunov: F is {:?}, Q is {:?}",
            f.shape(),
            q.shape()
        )));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let op = eye.kronecker(f) + f.kronecker(&eye);
    let rhs = -DMatrix::from_column_slice(n * n, 1, q.as_slice());
    let sol = op.lu().solve(&rhs).ok_or(Error::NonConvergence {
        solver: "lyapunov",
        residual: f64::INFINITY,
    })?;
    let mut p = DMatrix::from_column_slice(n, n, sol.as_slice());
    if *q == q.transpose() {
        p = symmetrize(&p);
    }
    let residual = (f * &p + &p * f.transpose() + q).norm();
    let scale = q.norm().max(f64::MIN_POSITIVE);
    if !residual.is_finite() || residual > LYAP_TOL * scale {
        return Err(Error::NonConvergence {
            solver: "lyapunov",
            residual: residual / scale,
        });
    }
    Ok(p)
}

/// Relative residual of `A^T X + X A - X G X + Q` with `G = B R^-1 B^T`.
pub fn care_residual(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> f64 {
    let atx = a.transpose() * x;
    let xgx = x * g * x;
    let res = &atx + atx.transpose() - &xgx + q;
    let scale = q
        .norm()
        .max(xgx.norm())
        .max(atx.norm())
        .max(f64::MIN_POSITIVE);
    res.norm() / scale
}

/// Stabilizing solution of `A^T X + X A - X B R^-1 B^T X + Q = 0`.
///
/// The Hamiltonian matrix sign function (Newton iteration with determinant
/// scaling) gives the stable invariant subspace; a few Newton–Kleinman sweeps
/// then polish the result down to the Lyapunov solver's accuracy.
pub fn solve_care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let m = b.ncols();
    if a.shape() != (n, n) || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(Error::InvalidParameter(
            "care: inconsistent dimensions".into(),
        ));
    }
    let r_chol = r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("care: R is not positive definite".into()))?;
    let r_inv_bt = r_chol.solve(&b.transpose());
    let g = symmetrize(&(b * &r_inv_bt));

    let mut z = DMatrix::zeros(2 * n, 2 * n);
    z.view_mut((0, 0), (n, n)).copy_from(a);
    z.view_mut((0, n), (n, n)).copy_from(&(-&g));
    z.view_mut((n, 0), (n, n)).copy_from(&(-q));
    z.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let mut scaling = true;
    let mut converged = false;
    for _ in 0..SIGN_MAX_ITER {
        let lu = z.clone().lu();
        let log_det: f64 = lu.u().diagonal().iter().map(|d| d.abs().ln()).sum();
        let inv = lu.try_inverse().ok_or(Error::NonConvergence {
            solver: "care (Hamiltonian has imaginary-axis eigenvalues)",
            residual: f64::INFINITY,
        })?;
        let c = if scaling && log_det.is_finite() {
            (-log_det / (2 * n) as f64).exp()
        } else {
            1.0
        };
        let next = (&z * c + inv / c) * 0.5;
        let change = (&next - &z).norm() / next.norm();
        z = next;
        if change < 1e-2 {
            scaling = false;
        }
        if change < 1e-13 {
            converged = true;
            break;
        }
    }
    if !converged && z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence {
            solver: "care",
            residual: f64::INFINITY,
        });
    }

    let eye = DMatrix::<f64>::identity(n, n);
    let mut lhs = DMatrix::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n))
        .copy_from(&z.view((0, n), (n, n)));
    lhs.view_mut((n, 0), (n, n))
        .copy_from(&(z.view((n, n), (n, n)) + &eye));
    let mut rhs = DMatrix::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n))
        .copy_from(&(-(z.view((0, 0), (n, n)) + &eye)));
    rhs.view_mut((n, 0), (n, n))
        .copy_from(&(-z.view((n, 0), (n, n))));
    let mut x = lhs
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::NonConvergence {
            solver: "care",
            residual: f64::INFINITY,
        })?;
    x = symmetrize(&x);

    let mut best = care_residual(a, &g, q, &x);
    for _ in 0..KLEINMAN_MAX_ITER {
        if best < 1e-14 {
            break;
        }
        let k = &r_inv_bt * &x;
        let closed = a - b * &k;
        let forcing = q + k.transpose() * r * &k;
        let Ok(candidate) = solve_lyapunov(&closed.transpose(), &forcing) else {
            break;
        };
        let res = care_residual(a, &g, q, &candidate);
        if res >= best {
            break;
        }
        best = res;
        x = candidate;
    }
    if !best.is_finite() || best > CARE_TOL {
        return Err(Error::NonConvergence {
            solver: "care",
            residual: best,
        });
    }
    Ok(x)
}
