//! Chassis equations of motion.
//!
//! The longitudinal acceleration is explicit; the lateral, yaw and roll
//! accelerations are coupled and solved together as a 3x3 linear system.

use nalgebra::{Matrix3, Vector3};

use super::params::VehicleParams;
use super::state::VehicleState;
use super::tire::TireOutput;
use super::Wheel;
use crate::error::{Error, Result};

/// Relative residual bound for the 3x3 solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct ChassisAccel {
    pub udot: f64,
    pub vdot: f64,
    pub wzdot: f64,
    pub wxdot: f64,
    /// Relative residual of the 3x3 solve, for invariant checks.
    pub residual: f64,
}

/// Chassis accelerations from the body-frame tire forces.
///
/// Expects `tires` indexed lf, rf, lr, rr with forces already rotated into
/// the body frame.
pub fn chassis_accelerations(
    state: &VehicleState,
    tires: &[TireOutput; 4],
    params: &VehicleParams,
) -> Result<ChassisAccel> {
    let p = params;
    let m_total = p.m_total();
    let h_rc = p.h_rc();

    let sum_fx: f64 = tires.iter().map(|t| t.f_xg).sum();
    let sum_fy: f64 = tires.iter().map(|t| t.f_yg).sum();
    let [lf, rf, lr, rr] = [
        tires[Wheel::LeftFront.index()],
        tires[Wheel::RightFront.index()],
        tires[Wheel::LeftRear.index()],
        tires[Wheel::RightRear.index()],
    ];

    let udot = (sum_fx + p.m_ur * (p.a - p.b) * state.wz * state.wz
        - 2.0 * h_rc * p.m * state.wz * state.wx)
        / m_total
        + state.wz * state.v;

    // Coupled equations in (v', wz', wx'). The unsprung-mass offset and the
    // roll-center height couple all three; the matrix is a constant
    // symmetric inertia matrix for a given parameter set.
    let off = p.m_ur * (p.b - p.a);
    let yaw_moment = (lf.f_yg + rf.f_yg) * p.a - (lr.f_yg + rr.f_yg) * p.b
        + (rf.f_xg - lf.f_xg) * p.c_f / 2.0
        + (rr.f_xg - lr.f_xg) * p.c_r / 2.0;
    let roll_moment = p.m * p.g * h_rc * state.phi
        - (p.k_phi_f + p.k_phi_r) * state.phi
        - (p.b_phi_f + p.b_phi_r) * state.wx;

    let a_mat = Matrix3::new(
        m_total, -off, -h_rc * p.m, //
        -off, p.j_z, p.j_xz, //
        -h_rc * p.m, p.j_xz, p.j_x_hat(),
    );
    let rhs = Vector3::new(
        sum_fy - m_total * state.wz * state.u,
        yaw_moment + off * state.wz * state.u,
        roll_moment + h_rc * p.m * state.wz * state.u,
    );

    let solution = a_mat
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularMassMatrix {
            t: f64::NAN,
            residual: f64::INFINITY,
        })?;

    let residual_vec = a_mat * solution - rhs;
    let scale = rhs.amax().max(a_mat.amax() * solution.amax()).max(1.0);
    let residual = residual_vec.amax() / scale;
    if !residual.is_finite() || residual > SOLVE_RESIDUAL_TOL {
        return Err(Error::SingularMassMatrix {
            t: f64::NAN,
            residual,
        });
    }

    Ok(ChassisAccel {
        udot,
        vdot: solution[0],
        wzdot: solution[1],
        wxdot: solution[2],
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::tire::Regime;
    use crate::dynamics::test_params;
    use approx::assert_relative_eq;

    fn tire_with(f_xg: f64, f_yg: f64) -> TireOutput {
        TireOutput {
            s: 0.0,
            alpha: 0.0,
            r_inst: 0.47,
            f_z: 5000.0,
            f_xt: f_xg,
            f_yt: f_yg,
            f_xg,
            f_yg,
            long_regime: Regime::Elastic,
            lat_regime: Regime::Elastic,
        }
    }

    #[test]
    fn no_forces_no_motion() {
        let params = test_params();
        let state = VehicleState::default();
        let tires = [tire_with(0.0, 0.0); 4];
        let acc = chassis_accelerations(&state, &tires, &params).unwrap();
        assert_eq!(acc.udot, 0.0);
        assert_eq!(acc.vdot, 0.0);
        assert_eq!(acc.wzdot, 0.0);
        assert_eq!(acc.wxdot, 0.0);
    }

    #[test]
    fn symmetric_straight_line_reduces_to_longitudinal() {
        let params = test_params();
        let state = VehicleState {
            u: 12.0,
            ..Default::default()
        };
        let tires = [tire_with(800.0, 0.0); 4];
        let acc = chassis_accelerations(&state, &tires, &params).unwrap();
        assert_relative_eq!(acc.udot, 4.0 * 800.0 / params.m_total(), max_relative = 1e-12);
        assert_eq!(acc.vdot, 0.0);
        assert_eq!(acc.wzdot, 0.0);
        assert_eq!(acc.wxdot, 0.0);
    }

    #[test]
    fn solve_residual_is_tiny() {
        let params = test_params();
        let state = VehicleState {
            u: 15.0,
            v: 0.5,
            wz: 0.4,
            wx: 0.1,
            phi: 0.05,
            ..Default::default()
        };
        let mut tires = [tire_with(300.0, -900.0); 4];
        tires[1].f_yg = -1100.0;
        tires[3].f_xg = 450.0;
        let acc = chassis_accelerations(&state, &tires, &params).unwrap();
        assert!(acc.residual < SOLVE_RESIDUAL_TOL);
    }
}
