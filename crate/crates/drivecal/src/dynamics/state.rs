use serde::{Deserialize, Serialize};

use super::params::VehicleParams;
use super::{loads, tire, Wheel};

/// Instantaneous state of the 8-DOF model.
///
/// Velocities are expressed in the body frame; `x`, `y`, `psi` track the
/// global pose for trajectory output. `ax_prev`/`ay_prev` hold the previous
/// step's body-frame acceleration terms (u' - wz*v) and (v' + wz*u) that the
/// quasi-static load transfer needs; they start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// Longitudinal velocity, m/s.
    pub u: f64,
    /// Lateral velocity, m/s.
    pub v: f64,
    /// Yaw rate, rad/s.
    pub wz: f64,
    /// Roll rate, rad/s.
    pub wx: f64,
    /// Roll angle, rad.
    pub phi: f64,
    /// Yaw angle, rad.
    pub psi: f64,
    /// Global position, m.
    pub x: f64,
    /// Global position, m.
    pub y: f64,
    /// Wheel angular velocities, rad/s, indexed lf, rf, lr, rr.
    pub omega: [f64; 4],
    /// Previous-step (u' - wz*v), m/s^2.
    pub ax_prev: f64,
    /// Previous-step (v' + wz*u), m/s^2.
    pub ay_prev: f64,
}

impl Default for VehicleState {
    fn default() -> Self {
        VehicleState {
            u: 0.0,
            v: 0.0,
            wz: 0.0,
            wx: 0.0,
            phi: 0.0,
            psi: 0.0,
            x: 0.0,
            y: 0.0,
            omega: [0.0; 4],
            ax_prev: 0.0,
            ay_prev: 0.0,
        }
    }
}

impl VehicleState {
    /// State moving straight ahead at `u0` with free-rolling wheels.
    ///
    /// Wheel speeds are set so the slip ratio is zero at the static loads.
    pub fn warm_start(u0: f64, params: &VehicleParams) -> Self {
        let mut state = VehicleState {
            u: u0,
            ..Default::default()
        };
        let (f_z, _) = loads::vertical_loads(&state, params);
        for wheel in Wheel::ALL {
            let r = tire::instantaneous_radius(f_z[wheel.index()], params, wheel);
            state.omega[wheel.index()] = u0 / r;
        }
        state
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite()
            && self.v.is_finite()
            && self.wz.is_finite()
            && self.wx.is_finite()
            && self.phi.is_finite()
            && self.psi.is_finite()
            && self.x.is_finite()
            && self.y.is_finite()
            && self.omega.iter().all(|w| w.is_finite())
            && self.ax_prev.is_finite()
            && self.ay_prev.is_finite()
    }
}
