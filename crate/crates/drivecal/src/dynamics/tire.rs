//! Tire kinematics and the Fiala force model.
//!
//! Slips follow the usual steady-state definitions with a low-speed floor on
//! the denominators; forces have an elastic (linear) regime and a complete
//! sliding regime, both capped by the friction circle per axis.

use serde::{Deserialize, Serialize};

use super::params::VehicleParams;
use super::state::VehicleState;
use super::Wheel;

/// Floor applied to contact-patch speed in the slip denominators, m/s.
///
/// The model is not meant to start from rest; the floor keeps the slips
/// finite if a simulation drifts to very low speed.
pub const SLIP_SPEED_FLOOR: f64 = 0.1;

/// Minimum instantaneous radius, as a fraction of the unloaded radius.
const MIN_RADIUS_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Elastic,
    Sliding,
}

/// Per-wheel tire quantities computed during one step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TireOutput {
    /// Longitudinal slip ratio.
    pub s: f64,
    /// Lateral slip angle, rad.
    pub alpha: f64,
    /// Instantaneous (loaded) radius, m.
    pub r_inst: f64,
    /// Vertical load, N (clamped at zero).
    pub f_z: f64,
    /// Tire-frame longitudinal force, N.
    pub f_xt: f64,
    /// Tire-frame lateral force, N.
    pub f_yt: f64,
    /// Body-frame longitudinal force, N.
    pub f_xg: f64,
    /// Body-frame lateral force, N.
    pub f_yg: f64,
    pub long_regime: Regime,
    pub lat_regime: Regime,
}

/// Body-frame velocity of a wheel's contact patch.
///
/// Right wheels add +wz*c/2 to u and left wheels subtract it; front wheels
/// add +wz*a to v and rear wheels subtract wz*b.
pub fn contact_patch_velocity(
    state: &VehicleState,
    params: &VehicleParams,
    wheel: Wheel,
) -> (f64, f64) {
    let half_track = if wheel.is_front() {
        params.c_f / 2.0
    } else {
        params.c_r / 2.0
    };
    let u_g = if wheel.is_left() {
        state.u - state.wz * half_track
    } else {
        state.u + state.wz * half_track
    };
    let v_g = if wheel.is_front() {
        state.v + state.wz * params.a
    } else {
        state.v - state.wz * params.b
    };
    (u_g, v_g)
}

/// Longitudinal slip ratio and lateral slip angle.
///
/// Both denominators are floored at [`SLIP_SPEED_FLOOR`] so the slips stay
/// finite at low speed.
pub fn compute_slips(u_g: f64, v_g: f64, omega_w: f64, r_inst: f64, delta: f64) -> (f64, f64) {
    debug_assert!(r_inst > 0.0);
    let patch_speed = u_g * delta.cos() + v_g * delta.sin();
    let s = (r_inst * omega_w - patch_speed) / patch_speed.abs().max(SLIP_SPEED_FLOOR);
    let u_clamped = if u_g >= 0.0 {
        u_g.max(SLIP_SPEED_FLOOR)
    } else {
        u_g.min(-SLIP_SPEED_FLOOR)
    };
    let alpha = (v_g / u_clamped).atan() - delta;
    (s, alpha)
}

/// Loaded tire radius from the linear vertical compression model.
pub fn instantaneous_radius(f_z: f64, params: &VehicleParams, wheel: Wheel) -> f64 {
    let k_t = if wheel.is_front() {
        params.k_tf
    } else {
        params.k_tr
    };
    (params.r0 - f_z / k_t).max(MIN_RADIUS_FRACTION * params.r0)
}

/// Longitudinal Fiala force.
///
/// Elastic up to the critical slip ratio mu*|F_z|/(2*C_x), complete sliding
/// beyond it; magnitude never exceeds mu*F_z.
pub fn fiala_longitudinal(s: f64, f_z: f64, c_x: f64, mu: f64) -> (f64, Regime) {
    debug_assert!(f_z >= 0.0 && c_x > 0.0);
    let s_critical = mu * f_z.abs() / (2.0 * c_x);
    if s.abs() <= s_critical {
        return (c_x * s, Regime::Elastic);
    }
    let f_x1 = mu * f_z.abs();
    let f_x2 = (mu * f_z) * (mu * f_z) / (4.0 * s.abs() * c_x);
    let force = s.signum() * (f_x1 - f_x2);
    debug_assert!(force.abs() <= mu * f_z.abs() * (1.0 + 1e-12));
    (force, Regime::Sliding)
}

/// Lateral Fiala force.
///
/// Elastic while H = 1 - C_y|tan a|/(3 mu |F_z|) stays positive, complete
/// sliding otherwise; magnitude never exceeds mu*F_z.
pub fn fiala_lateral(alpha: f64, f_z: f64, c_y: f64, mu: f64) -> (f64, Regime) {
    debug_assert!(f_z >= 0.0 && c_y > 0.0);
    let sign = if alpha > 0.0 {
        1.0
    } else if alpha < 0.0 {
        -1.0
    } else {
        0.0
    };
    if f_z == 0.0 {
        return (0.0, Regime::Sliding);
    }
    let h = 1.0 - c_y * alpha.tan().abs() / (3.0 * mu * f_z.abs());
    if h > 0.0 {
        let force = -mu * f_z.abs() * (1.0 - h * h * h) * sign;
        debug_assert!(force.abs() <= mu * f_z.abs() * (1.0 + 1e-12));
        (force, Regime::Elastic)
    } else {
        (-mu * f_z * sign, Regime::Sliding)
    }
}

/// Rotate tire-frame forces into the body frame by the road-wheel angle.
pub fn tire_to_body(f_xt: f64, f_yt: f64, delta: f64) -> (f64, f64) {
    let (sin_d, cos_d) = delta.sin_cos();
    (f_xt * cos_d - f_yt * sin_d, f_xt * sin_d + f_yt * cos_d)
}

/// Drive, brake and rolling-resistance torques on one wheel, N*m.
///
/// The motor torque at the current motor speed is scaled by the throttle,
/// multiplied by the driveline ratio and split equally across the four
/// wheels. Brake and rolling-resistance torques oppose the wheel's spin.
pub fn wheel_torques(
    throttle: f64,
    braking: f64,
    omega_w: f64,
    f_z: f64,
    params: &VehicleParams,
) -> (f64, f64, f64) {
    let motor_speed = omega_w * params.gear_ratio;
    let t_d = throttle * params.torque_map.torque_at(motor_speed) * params.gear_ratio / 4.0;
    let t_b = braking * params.max_brake_torque * sgn(omega_w);
    let t_r = params.rr * f_z.abs() * sgn(omega_w);
    (t_d, t_b, t_r)
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
