//! Quasi-static vertical tire loads.
//!
//! Lateral and longitudinal load transfers are evaluated with the previous
//! step's acceleration terms, which breaks the algebraic loop between loads
//! and accelerations at the cost of an O(dt) lag. Negative loads are clamped
//! to zero and flagged as wheel lift.

use super::params::VehicleParams;
use super::state::VehicleState;

/// Vertical load per wheel (lf, rf, lr, rr) and a wheel-lift flag for any
/// load that was clamped at zero.
pub fn vertical_loads(state: &VehicleState, params: &VehicleParams) -> ([f64; 4], [bool; 4]) {
    let p = params;
    let wheelbase = p.a + p.b;

    // Lateral transfer terms, proportional to (v' + wz*u) from the previous step.
    let f_f = (p.m_uf * p.h_uf / p.c_f + p.m * p.b * (p.h - p.h_rcf) / (p.c_f * wheelbase))
        * state.ay_prev;
    let f_r = (p.m_ur * p.h_ur / p.c_r + p.m * p.a * (p.h - p.h_rcr) / (p.c_r * wheelbase))
        * state.ay_prev;
    // Longitudinal transfer term, proportional to (u' - wz*v) from the previous step.
    let f_c = (p.m * p.h + p.m_uf * p.h_uf + p.m_ur * p.h_ur) * state.ax_prev / (2.0 * wheelbase);

    let front_static = p.m * p.g * p.b / (2.0 * wheelbase) + p.m_uf * p.g / 2.0;
    let rear_static = p.m * p.g * p.a / (2.0 * wheelbase) + p.m_ur * p.g / 2.0;
    let front_roll = (p.k_phi_f * state.phi + p.b_phi_f * state.wx) / p.c_f;
    let rear_roll = (p.k_phi_r * state.phi + p.b_phi_r * state.wx) / p.c_r;

    let raw = [
        front_static - f_f - front_roll - f_c,
        front_static + f_f + front_roll - f_c,
        rear_static - f_r - rear_roll + f_c,
        rear_static + f_r + rear_roll + f_c,
    ];

    let mut loads = [0.0; 4];
    let mut lifted = [false; 4];
    for i in 0..4 {
        if raw[i] < 0.0 {
            lifted[i] = true;
        } else {
            loads[i] = raw[i];
        }
    }
    (loads, lifted)
}
