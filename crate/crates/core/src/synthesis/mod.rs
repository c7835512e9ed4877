//! H₂-optimal estimator gain for a [`LinearModel`].
//!
//! The gain is obtained from the filter Riccati equation (the dual of the LMI
//! formulation) and then certified against the LMIs by [`verify_lmi`]. The
//! estimator convention is `x̂' = A x̂ + Bu u + L (Cy x̂ + Du u - y)`, so the
//! error dynamics are `A + L Cy` and `L` is the negated Kalman–Bucy gain.

pub mod gain_file;
pub mod lmi;
pub mod riccati;

use nalgebra::{Complex, DMatrix, Matrix6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::LinearModel;

pub use gain_file::{read_matrix, write_matrix};
pub use lmi::{verify_lmi, LmiReport};
pub use riccati::{solve_care, solve_lyapunov};

/// Relative relaxation applied to the achieved norm when reporting `gamma`.
pub const GAMMA_RELAXATION: f64 = 1e-9;
/// Relaxation at which the certificate is checked against the LMIs.
pub const CERTIFICATE_RELAXATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainCertificate {
    pub l: DMatrix<f64>,
    pub gamma: f64,
    pub max_closedloop_real_eig: f64,
    pub lmi_feasible: bool,
    pub h2_norm: f64,
    pub lmi: LmiReport,
}

impl GainCertificate {
    /// The gain as a fixed 6×6 matrix for the attitude filter.
    pub fn gain6(&self) -> Result<Matrix6<f64>> {
        if self.l.shape() != (6, 6) {
            return Err(Error::InvalidParameter(format!(
                "gain is {:?}, expected (6, 6)",
                self.l.shape()
            )));
        }
        Ok(Matrix6::from_column_slice(self.l.as_slice()))
    }
}

pub fn max_real_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// PBH test: every eigenvalue with nonnegative real part must be observable.
pub fn is_detectable(a: &DMatrix<f64>, c: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let p = c.nrows();
    let scale = a.norm().max(c.norm()).max(1.0);
    for lambda in a.complex_eigenvalues().iter() {
        if lambda.re < -1e-9 * scale {
            continue;
        }
        let mut pbh = DMatrix::<Complex<f64>>::zeros(n + p, n);
        for i in 0..n {
            for j in 0..n {
                let diag = if i == j {
                    *lambda
                } else {
                    Complex::new(0.0, 0.0)
                };
                pbh[(i, j)] = Complex::new(a[(i, j)], 0.0) - diag;
            }
        }
        for i in 0..p {
            for j in 0..n {
                pbh[(n + i, j)] = Complex::new(c[(i, j)], 0.0);
            }
        }
        let sv = pbh.singular_values();
        if sv.min() <= 1e-9 * scale {
            return false;
        }
    }
    true
}

/// `||Cz (sI - (A + L Cy))^-1 (Bw + L Dw)||_2` from the closed-loop Gramian.
pub fn h2_norm_of_error_system(m: &LinearModel, l: &DMatrix<f64>) -> Result<f64> {
    let f = &m.a + l * &m.cy;
    let max_real_eig = max_real_eigenvalue(&f);
    if max_real_eig >= 0.0 || !max_real_eig.is_finite() {
        return Err(Error::UnstableClosedLoop { max_real_eig });
    }
    let b = &m.bw + l * &m.dw;
    let p = solve_lyapunov(&f, &(&b * b.transpose()))?;
    Ok((&m.cz * p * m.cz.transpose()).trace().max(0.0).sqrt())
}

pub fn synthesize_gain(m: &LinearModel) -> Result<GainCertificate> {
    let r = &m.dw * m.dw.transpose();
    let r_chol = r.clone().cholesky().ok_or_else(|| {
        Error::SynthesisFailure(
            "Dw Dw^T is singular: some measurement channel carries no noise".into(),
        )
    })?;
    let r_eigs = r.symmetric_eigenvalues();
    if r_eigs.min() <= 1e-14 * r_eigs.max() {
        return Err(Error::SynthesisFailure(
            "Dw Dw^T is numerically singular".into(),
        ));
    }
    if !is_detectable(&m.a, &m.cy) {
        return Err(Error::SynthesisFailure("(A, Cy) is not detectable".into()));
    }

    let s = &m.bw * m.dw.transpose();
    let r_inv_cy = r_chol.solve(&m.cy);
    let r_inv_st = r_chol.solve(&s.transpose());
    let a_bar = &m.a - &s * &r_inv_cy;
    let q_bar = &m.bw * m.bw.transpose() - &s * &r_inv_st;
    let q_bar = (&q_bar + q_bar.transpose()) * 0.5;

    let p = solve_care(&a_bar.transpose(), &m.cy.transpose(), &q_bar, &r)
        .map_err(|e| Error::SynthesisFailure(format!("filter Riccati equation: {e}")))?;
    let l = -(&p * m.cy.transpose() + &s) * r_chol.inverse();

    let closed = &m.a + &l * &m.cy;
    let max_closedloop_real_eig = max_real_eigenvalue(&closed);
    if max_closedloop_real_eig >= 0.0 {
        return Err(Error::SynthesisFailure(format!(
            "Riccati gain does not stabilize the error dynamics (max real eigenvalue {max_closedloop_real_eig:e})"
        )));
    }
    let h2_norm = h2_norm_of_error_system(m, &l)?;
    let gamma = h2_norm * (1.0 + GAMMA_RELAXATION);
    let lmi = verify_lmi(m, &l, gamma * (1.0 + CERTIFICATE_RELAXATION));
    Ok(GainCertificate {
        l,
        gamma,
        max_closedloop_real_eig,
        lmi_feasible: lmi.feasible,
        h2_norm,
        lmi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::nominal_model;
    use crate::sensors::{NoiseParams, WorldConstants};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn d(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    fn scalar_model() -> LinearModel {
        LinearModel::new(
            d(1, 1, &[-1.0]),
            d(1, 1, &[0.0]),
            d(1, 2, &[1.0, 0.0]),
            d(1, 1, &[1.0]),
            d(1, 1, &[0.0]),
            d(1, 2, &[0.0, 1.0]),
            d(1, 1, &[1.0]),
        )
        .unwrap()
    }

    #[test]
    fn scalar_system_matches_hand_riccati() {
        // -2p - p^2 + 1 = 0  =>  p = sqrt(2) - 1, L = -p.
        // Closed loop -sqrt(2) driven by [1, -p]: variance (1 + p^2) / (2 sqrt 2) = sqrt(2) - 1.
        let p = 2f64.sqrt() - 1.0;
        let cert = synthesize_gain(&scalar_model()).unwrap();
        assert_abs_diff_eq!(cert.l[(0, 0)], -p, epsilon = 1e-12);
        assert_abs_diff_eq!(cert.h2_norm, p.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(cert.max_closedloop_real_eig, -2f64.sqrt(), epsilon = 1e-12);
        assert!(cert.lmi_feasible);
        assert!(cert.h2_norm <= cert.gamma * (1.0 + 1e-6));
    }

    #[test]
    fn no_measurement_gives_zero_gain() {
        let mut m = scalar_model();
        m.cy = d(1, 1, &[0.0]);
        let cert = synthesize_gain(&m).unwrap();
        assert_eq!(cert.l[(0, 0)], 0.0);
        assert_abs_diff_eq!(cert.h2_norm, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn scalar_h2_norm_open_loop() {
        let m = LinearModel::new(
            d(1, 1, &[-1.0]),
            d(1, 1, &[0.0]),
            d(1, 1, &[1.0]),
            d(1, 1, &[1.0]),
            d(1, 1, &[0.0]),
            d(1, 1, &[0.0]),
            d(1, 1, &[1.0]),
        )
        .unwrap();
        let zero = d(1, 1, &[0.0]);
        assert_abs_diff_eq!(
            h2_norm_of_error_system(&m, &zero).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-14
        );
        let mut m0 = m.clone();
        m0.cz = d(1, 1, &[0.0]);
        assert_eq!(h2_norm_of_error_system(&m0, &zero).unwrap(), 0.0);
        let mut unstable = m;
        unstable.a = d(1, 1, &[1.0]);
        assert!(matches!(
            h2_norm_of_error_system(&unstable, &zero),
            Err(Error::UnstableClosedLoop { .. })
        ));
    }

    #[test]
    fn singular_measurement_noise_rejected() {
        let mut m = scalar_model();
        m.dw = d(1, 2, &[0.0, 0.0]);
        assert!(matches!(
            synthesize_gain(&m),
            Err(Error::SynthesisFailure(_))
        ));
    }

    #[test]
    fn undetectable_pair_rejected() {
        let mut m = scalar_model();
        m.a = d(1, 1, &[1.0]);
        m.cy = d(1, 1, &[0.0]);
        let err = synthesize_gain(&m).unwrap_err();
        assert!(err.to_string().contains("detectable"), "{err}");
    }

    #[test]
    fn nominal_attitude_model_certifies() {
        let m = nominal_model(&NoiseParams::default(), &WorldConstants::default()).unwrap();
        let cert = synthesize_gain(&m).unwrap();
        assert!(cert.lmi_feasible, "{:?}", cert.lmi);
        assert!(cert.max_closedloop_real_eig < 0.0);
        assert!(verify_lmi(&m, &cert.l, cert.gamma * 1.01).feasible);
    }

    #[test]
    fn lmi_rejects_flipped_gain_and_zero_gamma() {
        let m = nominal_model(&NoiseParams::default(), &WorldConstants::default()).unwrap();
        let cert = synthesize_gain(&m).unwrap();
        let flipped = verify_lmi(&m, &(-&cert.l), cert.gamma * 1.01);
        assert!(!flipped.feasible);
        assert!(flipped.closed_loop_max_real_eig > 0.0);
        assert!(
            flipped.block1_max_eig > 0.0 || flipped.block2_max_eig > 0.0,
            "{flipped:?}"
        );
        assert!(!verify_lmi(&m, &cert.l, 0.0).feasible);
        assert!(!verify_lmi(&m, &cert.l, cert.h2_norm * 0.99).feasible);
    }

    #[test]
    fn synthesized_gain_is_locally_optimal() {
        let m = nominal_model(&NoiseParams::default(), &WorldConstants::default()).unwrap();
        let cert = synthesize_gain(&m).unwrap();
        let mut rng = crate::RandomSource::seed_from_u64(99);
        let scale = 0.1 * cert.l.norm();
        for _ in 0..20 {
            let delta = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
            let delta = &delta * (scale * rng.random_range(0.01..1.0) / delta.norm());
            let perturbed = &cert.l + delta;
            if let Ok(norm) = h2_norm_of_error_system(&m, &perturbed) {
                assert!(cert.h2_norm <= norm, "{} > {}", cert.h2_norm, norm);
            }
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let m = nominal_model(&NoiseParams::default(), &WorldConstants::default()).unwrap();
        let a = synthesize_gain(&m).unwrap();
        let b = synthesize_gain(&m).unwrap();
        assert_eq!(a.l.as_slice(), b.l.as_slice());
    }
}
