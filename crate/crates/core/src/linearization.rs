//! Jacobians of the process and measurement models and the linear plant used
//! for gain synthesis.
//!
//! Noise channels are stacked as `w = [n_w; n_b; n_a; n_m]` (12 entries). The
//! process matrix `Bw` only touches the first six columns and `Dw` only the last
//! six. Noise standard deviations are folded into those columns so the
//! synthesis sees unit-intensity white noise.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix3x6, Matrix6, Matrix6x3, Vector3};

use crate::dynamics::EulerState;
use crate::error::{Error, Result};
use crate::kinematics::{check_gimbal, rot_x, rot_y, rot_z, AttitudeTrig, EulerAngles};
use crate::sensors::{NoiseParams, WorldConstants};

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessJacobians {
    pub a: Matrix6<f64>,
    pub bu: Matrix6x3<f64>,
    /// Columns ordered `[n_w; n_b]`, unscaled.
    pub bw: Matrix6<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementJacobians {
    pub cy: Matrix6<f64>,
    /// Columns ordered `[n_a; n_m]`, unscaled.
    pub dw: Matrix6<f64>,
}

/// State-space plant `x' = A x + Bu u + Bw w`, `y = Cy x + Du u + Dw w`, `z = Cz x`.
///
/// Dynamically sized so the synthesis routines also accept small test systems;
/// [`assemble_model`] produces the 6-state attitude plant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub a: DMatrix<f64>,
    pub bu: DMatrix<f64>,
    pub bw: DMatrix<f64>,
    pub cy: DMatrix<f64>,
    pub du: DMatrix<f64>,
    pub dw: DMatrix<f64>,
    pub cz: DMatrix<f64>,
}

impl LinearModel {
    /// Checks that all dimensions agree and every entry is finite.
    pub fn new(
        a: DMatrix<f64>,
        bu: DMatrix<f64>,
        bw: DMatrix<f64>,
        cy: DMatrix<f64>,
        du: DMatrix<f64>,
        dw: DMatrix<f64>,
        cz: DMatrix<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        let (ny, nw, nu) = (cy.nrows(), bw.ncols(), bu.ncols());
        let shapes = [
            ("A", a.shape(), (n, n)),
            ("Bu", bu.shape(), (n, nu)),
            ("Bw", bw.shape(), (n, nw)),
            ("Cy", cy.shape(), (ny, n)),
            ("Du", du.shape(), (ny, nu)),
            ("Dw", dw.shape(), (ny, nw)),
            ("Cz", cz.shape(), (cz.nrows(), n)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::InvalidParameter(format!(
                    "{name} is {got:?}, expected {want:?}"
                )));
            }
        }
        let m = Self {
            a,
            bu,
            bw,
            cy,
            du,
            dw,
            cz,
        };
        if [&m.a, &m.bu, &m.bw, &m.cy, &m.du, &m.dw, &m.cz]
            .iter()
            .any(|x| x.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite("linear model"));
        }
        Ok(m)
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.cy.nrows()
    }
}

/// Partials of `T(phi, theta) v` with respect to `(phi, theta, psi)`.
fn rate_map_attitude_partials(trig: &AttitudeTrig, v: &Vector3<f64>) -> Matrix3<f64> {
    let AttitudeTrig {
        sphi,
        cphi,
        sth,
        cth,
        ..
    } = *trig;
    let tth = sth / cth;
    let sec = 1.0 / cth;
    let s = sphi * v.y + cphi * v.z;
    let d = cphi * v.y - sphi * v.z;
    Matrix3::new(
        tth * d,
        sec * sec * s,
        0.0,
        -sphi * v.y - cphi * v.z,
        0.0,
        0.0,
        sec * d,
        s * sth * sec * sec,
        0.0,
    )
}

/// Jacobians of `f(x, u, w) = [T(att) (u - b - n_w); n_b]` at `(x, u, 0)`.
pub fn jacobians_process(x: &EulerState, u: &Vector3<f64>) -> Result<ProcessJacobians> {
    check_gimbal(x.attitude.theta)?;
    let trig = AttitudeTrig::from_angles(&x.attitude);
    let t = trig.rate_matrix();
    let mut a = Matrix6::zeros();
    a.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&rate_map_attitude_partials(&trig, &(u - x.bias)));
    a.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-t));
    let mut bu = Matrix6x3::zeros();
    bu.fixed_view_mut::<3, 3>(0, 0).copy_from(&t);
    let mut bw = Matrix6::zeros();
    bw.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-t));
    bw.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&Matrix3::identity());
    Ok(ProcessJacobians { a, bu, bw })
}

/// Partial derivatives of the DCM with respect to roll, pitch and yaw.
pub fn dcm_partials(e: &EulerAngles) -> [Matrix3<f64>; 3] {
    let (r1, r2, r3) = (rot_x(e.phi), rot_y(e.theta), rot_z(e.psi));
    let (s1, c1) = e.phi.sin_cos();
    let (s2, c2) = e.theta.sin_cos();
    let (s3, c3) = e.psi.sin_cos();
    let d1 = Matrix3::new(0.0, 0.0, 0.0, 0.0, -s1, c1, 0.0, -c1, -s1);
    let d2 = Matrix3::new(-s2, 0.0, -c2, 0.0, 0.0, 0.0, c2, 0.0, -s2);
    let d3 = Matrix3::new(-s3, c3, 0.0, -c3, -s3, 0.0, 0.0, 0.0, 0.0);
    [d1 * r2 * r3, r1 * d2 * r3, r1 * r2 * d3]
}

/// `dh/dx` at an arbitrary attitude; bias columns are zero.
pub fn measurement_jacobian(e: &EulerAngles, w: &WorldConstants) -> Matrix6<f64> {
    let partials = dcm_partials(e);
    let mut cy = Matrix6::zeros();
    for (j, dr) in partials.iter().enumerate() {
        let dg = dr * w.g_inertial;
        let dh = dr * w.h_inertial;
        for i in 0..3 {
            cy[(i, j)] = dg[i];
            cy[(i + 3, j)] = dh[i];
        }
    }
    cy
}

pub fn jacobians_measurement(x: &EulerState, w: &WorldConstants) -> Result<MeasurementJacobians> {
    if !x.attitude.clear_of_gimbal_lock() {
        return Err(Error::GimbalLock {
            theta: x.attitude.theta,
        });
    }
    Ok(MeasurementJacobians {
        cy: measurement_jacobian(&x.attitude, w),
        dw: Matrix6::identity(),
    })
}

/// Central-difference Jacobian; column `j` is `(f(x + eps e_j) - f(x - eps e_j)) / (2 eps)`.
pub fn finite_difference_jacobian<F>(func: F, x0: &DVector<f64>, eps: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let f0 = func(x0);
    let mut jac = DMatrix::zeros(f0.len(), x0.len());
    for j in 0..x0.len() {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[j] += eps;
        xm[j] -= eps;
        let col = (func(&xp) - func(&xm)) / (2.0 * eps);
        jac.set_column(j, &col);
    }
    jac
}

/// Output of interest is the attitude: `Cz = [I3 0]`.
pub fn attitude_output() -> Matrix3x6<f64> {
    let mut cz = Matrix3x6::zeros();
    cz.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&Matrix3::identity());
    cz
}

/// Stacks the Jacobians into the 6-state, 12-noise plant with noise scaling.
pub fn assemble_model(
    process: &ProcessJacobians,
    meas: &MeasurementJacobians,
    noise: &NoiseParams,
    cz: &Matrix3x6<f64>,
) -> Result<LinearModel> {
    let mut bw = DMatrix::zeros(6, 12);
    let mut dw = DMatrix::zeros(6, 12);
    for j in 0..6 {
        let std_proc = if j < 3 { noise.n_w } else { noise.n_b };
        let std_meas = if j < 3 { noise.n_a } else { noise.n_m };
        for i in 0..6 {
            bw[(i, j)] = process.bw[(i, j)] * std_proc;
            dw[(i, j + 6)] = meas.dw[(i, j)] * std_meas;
        }
    }
    LinearModel::new(
        DMatrix::from_column_slice(6, 6, process.a.as_slice()),
        DMatrix::from_column_slice(6, 3, process.bu.as_slice()),
        bw,
        DMatrix::from_column_slice(6, 6, meas.cy.as_slice()),
        DMatrix::zeros(6, 3),
        dw,
        DMatrix::from_column_slice(3, 6, cz.as_slice()),
    )
}

/// Plant linearized at `(x0, u0, w0) = 0` for the given noise and reference vectors.
pub fn nominal_model(noise: &NoiseParams, world: &WorldConstants) -> Result<LinearModel> {
    noise.validate()?;
    world.validate()?;
    let x0 = EulerState::default();
    let process = jacobians_process(&x0, &Vector3::zeros())?;
    let meas = jacobians_measurement(&x0, world)?;
    assemble_model(&process, &meas, noise, &attitude_output())
}
