//! Constructive check of the H₂ estimation LMIs for a given gain.
//!
//! For `F = A + L Cy` and `B = Bw + L Dw` the certificate is built from the
//! closed-loop Gramian: `Y` solves `F Y + Y F^T + B B^T + eps M = 0` with
//! `M = B B^T + mu I`, `X = Y^-1`, `W = X L`, and the slack `Q` sits just above
//! `Cz Y Cz^T`. The blocks are evaluated on the problem normalized by `gamma`
//! (noise inputs divided by `gamma`, bound 1), which is the same inequality
//! set but keeps the strictness tolerance independent of the noise scale.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::max_real_eigenvalue;
use super::riccati::solve_lyapunov;
use crate::linearization::LinearModel;

/// A block counts as negative definite when its largest eigenvalue is below this.
pub const STRICTNESS: f64 = -1e-9;
/// Relative identity margin added to the Gramian forcing term.
const IDENTITY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmiReport {
    pub feasible: bool,
    pub closed_loop_max_real_eig: f64,
    /// Largest eigenvalue of `[X A + W Cy + (.)^T, X Bw + W Dw; *, -I]`.
    pub block1_max_eig: f64,
    /// Largest eigenvalue of `[-Q, Cz; *, -X]`.
    pub block2_max_eig: f64,
    /// `trace(Q)` in the original (unnormalized) units.
    pub trace_q: f64,
    pub gamma_sq: f64,
}

impl LmiReport {
    fn infeasible(closed_loop_max_real_eig: f64, gamma: f64) -> Self {
        Self {
            feasible: false,
            closed_loop_max_real_eig,
            block1_max_eig: f64::NAN,
            block2_max_eig: f64::NAN,
            trace_q: f64::NAN,
            gamma_sq: gamma * gamma,
        }
    }
}

fn max_sym_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().max()
}

pub fn verify_lmi(m: &LinearModel, l: &DMatrix<f64>, gamma: f64) -> LmiReport {
    let n = m.n_states();
    let f = &m.a + l * &m.cy;
    let cl_eig = max_real_eigenvalue(&f);
    if !(gamma.is_finite() && gamma > 0.0) || l.iter().any(|v| !v.is_finite()) {
        return LmiReport::infeasible(cl_eig, gamma);
    }

    let bw = &m.bw / gamma;
    let dw = &m.dw / gamma;
    let b_cl = &bw + l * &dw;
    let bbt = &b_cl * b_cl.transpose();
    let mu = IDENTITY_MARGIN * (bbt.trace() / n as f64).max(f64::MIN_POSITIVE);
    let forcing = &bbt + DMatrix::identity(n, n) * mu;

    let (Ok(gram), Ok(gram_margin)) = (solve_lyapunov(&f, &bbt), solve_lyapunov(&f, &forcing))
    else {
        return LmiReport::infeasible(cl_eig, gamma);
    };
    let cz = &m.cz;
    let nz = cz.nrows();
    let h2_sq = (cz * &gram * cz.transpose()).trace();
    let margin_trace = (cz * &gram_margin * cz.transpose()).trace();
    let slack = 1.0 - h2_sq;
    let eps = if slack > 0.0 && margin_trace > 0.0 {
        0.5 * slack / margin_trace
    } else {
        IDENTITY_MARGIN
    };
    let delta = if slack > 0.0 {
        0.25 * slack / nz.max(1) as f64
    } else {
        0.0
    };

    let y = &gram + &gram_margin * eps;
    let y = (&y + y.transpose()) * 0.5;
    let Some(x) = y.clone().try_inverse() else {
        return LmiReport::infeasible(cl_eig, gamma);
    };
    let x = (&x + x.transpose()) * 0.5;
    let w = &x * l;

    let xa_wc = &x * &m.a + &w * &m.cy;
    let mut block1 = DMatrix::zeros(n + bw.ncols(), n + bw.ncols());
    block1
        .view_mut((0, 0), (n, n))
        .copy_from(&(&xa_wc + xa_wc.transpose()));
    let off = &x * &bw + &w * &dw;
    block1.view_mut((0, n), (n, bw.ncols())).copy_from(&off);
    block1
        .view_mut((n, 0), (bw.ncols(), n))
        .copy_from(&off.transpose());
    block1
        .view_mut((n, n), (bw.ncols(), bw.ncols()))
        .copy_from(&(-DMatrix::identity(bw.ncols(), bw.ncols())));

    let q = cz * &y * cz.transpose() + DMatrix::identity(nz, nz) * delta;
    let mut block2 = DMatrix::zeros(nz + n, nz + n);
    block2.view_mut((0, 0), (nz, nz)).copy_from(&(-&q));
    block2.view_mut((0, nz), (nz, n)).copy_from(cz);
    block2.view_mut((nz, 0), (n, nz)).copy_from(&cz.transpose());
    block2.view_mut((nz, nz), (n, n)).copy_from(&(-&x));

    let b1 = max_sym_eig(&block1);
    let b2 = max_sym_eig(&block2);
    let trace_q = q.trace();
    LmiReport {
        feasible: b1 < STRICTNESS && b2 < STRICTNESS && trace_q < 1.0,
        closed_loop_max_real_eig: cl_eig,
        block1_max_eig: b1,
        block2_max_eig: b2,
        trace_q: trace_q * gamma * gamma,
        gamma_sq: gamma * gamma,
    }
}
