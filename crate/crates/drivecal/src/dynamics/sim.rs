//! Time stepping: one half-implicit step and maneuver-level simulation.

use indexmap::IndexMap;

use super::chassis::{self, ChassisAccel};
use super::loads;
use super::params::VehicleParams;
use super::state::VehicleState;
use super::tire::{self, TireOutput};
use super::Wheel;
use crate::data::TimeSeries;
use crate::driver::{ControlSample, ControlSchedule};
use crate::error::{Error, Result};

/// Channels produced by [`simulate`], in output order (after `t`).
pub const STATE_CHANNELS: [&str; 12] = [
    "u", "v", "wz", "wx", "phi", "psi", "x", "y", "omega_lf", "omega_rf", "omega_lr", "omega_rr",
];

#[derive(Debug, Clone, Copy)]
pub struct StepOutput {
    pub state: VehicleState,
    pub tires: [TireOutput; 4],
    pub accel: ChassisAccel,
    /// Wheels whose vertical load was clamped at zero this step.
    pub lifted: [bool; 4],
}

/// Wheel-lift event recorded during a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub t: f64,
    pub wheel: Wheel,
}

/// Advance the state by one half-implicit (semi-implicit Euler) step.
///
/// Forces and accelerations come from the current state; velocities are
/// updated explicitly and the configuration (roll, yaw, position) is then
/// integrated with the new velocities. `t` is the time at the start of the
/// step and is used for error reporting only.
pub fn step(
    state: &VehicleState,
    controls: &ControlSample,
    params: &VehicleParams,
    t: f64,
    dt: f64,
) -> Result<StepOutput> {
    debug_assert!(dt > 0.0);
    let (f_z, lifted) = loads::vertical_loads(state, params);

    let mut tires = [TireOutput {
        s: 0.0,
        alpha: 0.0,
        r_inst: params.r0,
        f_z: 0.0,
        f_xt: 0.0,
        f_yt: 0.0,
        f_xg: 0.0,
        f_yg: 0.0,
        long_regime: tire::Regime::Elastic,
        lat_regime: tire::Regime::Elastic,
    }; 4];

    for wheel in Wheel::ALL {
        let i = wheel.index();
        let delta = if wheel.is_front() {
            controls.steering * params.max_steer_angle
        } else {
            0.0
        };
        let (c_x, c_y) = if wheel.is_front() {
            (params.c_xf, params.c_yf)
        } else {
            (params.c_xr, params.c_yr)
        };
        let r_inst = tire::instantaneous_radius(f_z[i], params, wheel);
        let (u_g, v_g) = tire::contact_patch_velocity(state, params, wheel);
        let (s, alpha) = tire::compute_slips(u_g, v_g, state.omega[i], r_inst, delta);
        let (f_xt, long_regime) = tire::fiala_longitudinal(s, f_z[i], c_x, params.mu);
        let (f_yt, lat_regime) = tire::fiala_lateral(alpha, f_z[i], c_y, params.mu);
        let (f_xg, f_yg) = tire::tire_to_body(f_xt, f_yt, delta);
        tires[i] = TireOutput {
            s,
            alpha,
            r_inst,
            f_z: f_z[i],
            f_xt,
            f_yt,
            f_xg,
            f_yg,
            long_regime,
            lat_regime,
        };
    }

    let accel = chassis::chassis_accelerations(state, &tires, params).map_err(|e| match e {
        Error::SingularMassMatrix { residual, .. } => Error::SingularMassMatrix { t, residual },
        other => other,
    })?;

    let mut next = *state;
    next.u += accel.udot * dt;
    next.v += accel.vdot * dt;
    next.wz += accel.wzdot * dt;
    next.wx += accel.wxdot * dt;
    for wheel in Wheel::ALL {
        let i = wheel.index();
        let (t_d, t_b, t_r) =
            tire::wheel_torques(controls.throttle, controls.braking, state.omega[i], f_z[i], params);
        let omega_dot = (t_d - t_b - t_r - tires[i].r_inst * tires[i].f_xt) / params.j_w;
        next.omega[i] += omega_dot * dt;
    }

    // Configuration update with the new velocities.
    next.phi += next.wx * dt;
    next.psi += next.wz * dt;
    let (sin_psi, cos_psi) = next.psi.sin_cos();
    next.x += (next.u * cos_psi - next.v * sin_psi) * dt;
    next.y += (next.u * sin_psi + next.v * cos_psi) * dt;

    // Acceleration terms for the next step's load transfer.
    next.ax_prev = accel.udot - state.wz * state.v;
    next.ay_prev = accel.vdot + state.wz * state.u;

    if !next.is_finite() {
        return Err(Error::NonFiniteState { t });
    }

    Ok(StepOutput {
        state: next,
        tires,
        accel,
        lifted,
    })
}

/// Simulate a maneuver and sample the state channels every `sample_dt`.
///
/// Deterministic: identical inputs produce bit-identical output. Both end
/// points are sampled; `sample_dt` must be an integer multiple of `dt`.
pub fn simulate(
    params: &VehicleParams,
    schedule: &ControlSchedule,
    init: &VehicleState,
    t0: f64,
    tf: f64,
    dt: f64,
    sample_dt: f64,
) -> Result<TimeSeries> {
    let (series, events) = simulate_with_events(params, schedule, init, t0, tf, dt, sample_dt)?;
    if !events.is_empty() {
        log::debug!(
            "{} wheel-lift events during [{t0}, {tf}] s (first at t = {:.4} s)",
            events.len(),
            events[0].t
        );
    }
    Ok(series)
}

/// [`simulate`] variant that also returns the wheel-lift event log.
pub fn simulate_with_events(
    params: &VehicleParams,
    schedule: &ControlSchedule,
    init: &VehicleState,
    t0: f64,
    tf: f64,
    dt: f64,
    sample_dt: f64,
) -> Result<(TimeSeries, Vec<SimEvent>)> {
    params.validate()?;
    if !(dt > 0.0) || !(tf > t0) {
        return Err(Error::Config(format!(
            "simulation window [{t0}, {tf}] with dt = {dt} is invalid"
        )));
    }
    let stride = (sample_dt / dt).round() as usize;
    if stride == 0 || (stride as f64 * dt - sample_dt).abs() > 1e-9 {
        return Err(Error::SampleInterval { dt, sample_dt });
    }
    if !init.is_finite() {
        return Err(Error::NonFiniteState { t: t0 });
    }

    let n_samples = ((tf - t0) / sample_dt + 1e-9).floor() as usize + 1;
    let mut t_axis = Vec::with_capacity(n_samples);
    let mut channels: Vec<Vec<f64>> = vec![Vec::with_capacity(n_samples); STATE_CHANNELS.len()];
    let mut events = Vec::new();

    let record = |t: f64, state: &VehicleState, t_axis: &mut Vec<f64>, channels: &mut Vec<Vec<f64>>| {
        t_axis.push(t);
        let values = [
            state.u,
            state.v,
            state.wz,
            state.wx,
            state.phi,
            state.psi,
            state.x,
            state.y,
            state.omega[0],
            state.omega[1],
            state.omega[2],
            state.omega[3],
        ];
        for (channel, value) in channels.iter_mut().zip(values) {
            channel.push(value);
        }
    };

    let mut state = *init;
    record(t0, &state, &mut t_axis, &mut channels);
    for sample in 1..n_samples {
        for sub in 0..stride {
            let t = t0 + ((sample - 1) * stride + sub) as f64 * dt;
            let controls = schedule.eval(t);
            let out = step(&state, &controls, params, t, dt)?;
            for wheel in Wheel::ALL {
                if out.lifted[wheel.index()] {
                    events.push(SimEvent { t, wheel });
                }
            }
            state = out.state;
        }
        record(t0 + sample as f64 * sample_dt, &state, &mut t_axis, &mut channels);
    }

    let mut map = IndexMap::new();
    for (name, values) in STATE_CHANNELS.iter().zip(channels) {
        map.insert(name.to_string(), values);
    }
    let series = TimeSeries::new(t_axis, map)?;
    Ok((series, events))
}

/// Extract the full state at a sample of a simulated series.
///
/// Only the channels produced by [`simulate`] are read; the lagged
/// acceleration terms are not in the output and are reset to zero, which
/// introduces a one-step O(dt) transient when restarting from the result.
pub fn state_at_sample(series: &TimeSeries, index: usize) -> Result<VehicleState> {
    let get = |name: &str| -> Result<f64> {
        series
            .channel(name)
            .ok_or_else(|| Error::UnknownChannel {
                name: name.to_string(),
                available: series.channel_names().join(", "),
            })
            .map(|c| c[index])
    };
    Ok(VehicleState {
        u: get("u")?,
        v: get("v")?,
        wz: get("wz")?,
        wx: get("wx")?,
        phi: get("phi")?,
        psi: get("psi")?,
        x: get("x")?,
        y: get("y")?,
        omega: [
            get("omega_lf")?,
            get("omega_rf")?,
            get("omega_lr")?,
            get("omega_rr")?,
        ],
        ax_prev: 0.0,
        ay_prev: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::test_params;
    use crate::driver::maneuvers::{self, LongitudinalRamp};
    use approx::assert_relative_eq;

    fn zero_schedule() -> ControlSchedule {
        ControlSchedule::constant(0.0, 0.0, 0.0)
    }

    #[test]
    fn equilibrium_state_stays_put() {
        let params = test_params();
        let state = VehicleState::default();
        let controls = ControlSample {
            throttle: 0.0,
            steering: 0.0,
            braking: 0.0,
        };
        let out = step(&state, &controls, &params, 0.0, 5e-3).unwrap();
        assert_eq!(out.state.u, 0.0);
        assert_eq!(out.state.v, 0.0);
        assert_eq!(out.state.omega, [0.0; 4]);
        assert_eq!(out.state.phi, 0.0);
    }

    #[test]
    fn straight_line_symmetry_holds_for_many_steps() {
        let params = test_params();
        let schedule = maneuvers::longitudinal_ramp(&LongitudinalRamp::default());
        let mut state = VehicleState::warm_start(5.0, &params);
        for k in 0..10_000 {
            let t = k as f64 * 5e-4;
            let controls = schedule.eval(t);
            state = step(&state, &controls, &params, t, 5e-4).unwrap().state;
            assert!(state.v.abs() < 1e-12);
            assert!(state.wz.abs() < 1e-12);
            assert!(state.wx.abs() < 1e-12);
            assert!(state.phi.abs() < 1e-12);
            assert!(state.psi.abs() < 1e-12);
            assert_eq!(state.omega[0], state.omega[1]);
            assert_eq!(state.omega[2], state.omega[3]);
        }
        assert!(state.u > 5.0);
    }

    #[test]
    fn sample_count_includes_both_endpoints() {
        let params = test_params();
        let init = VehicleState::warm_start(5.0, &params);
        let series = simulate(&params, &zero_schedule(), &init, 0.0, 1.0, 5e-3, 0.01).unwrap();
        assert_eq!(series.len(), 101);
        assert_eq!(series.channel_names().len(), 12);
    }

    #[test]
    fn simulate_is_deterministic() {
        let params = test_params();
        let schedule = maneuvers::longitudinal_ramp(&LongitudinalRamp::default());
        let init = VehicleState::warm_start(2.0, &params);
        let a = simulate(&params, &schedule, &init, 0.0, 2.0, 5e-3, 0.01).unwrap();
        let b = simulate(&params, &schedule, &init, 0.0, 2.0, 5e-3, 0.01).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_sample_interval() {
        let params = test_params();
        let init = VehicleState::default();
        let err = simulate(&params, &zero_schedule(), &init, 0.0, 1.0, 5e-3, 0.012).unwrap_err();
        assert!(matches!(err, Error::SampleInterval { .. }));
    }

    #[test]
    fn coastdown_speed_is_strictly_decreasing() {
        let params = test_params();
        let init = VehicleState::warm_start(20.0, &params);
        let series = simulate(&params, &zero_schedule(), &init, 0.0, 5.0, 5e-3, 0.01).unwrap();
        let u = series.channel("u").unwrap();
        for w in u.windows(2) {
            assert!(w[1] < w[0], "u not strictly decreasing: {} -> {}", w[0], w[1]);
        }
    }

    /// Brute-force explicit-Euler reference for the coast-down check: both
    /// velocity and configuration are advanced with the old derivatives.
    fn explicit_euler_coast(params: &VehicleParams, u0: f64, tf: f64, dt: f64) -> f64 {
        let controls = ControlSample {
            throttle: 0.0,
            steering: 0.0,
            braking: 0.0,
        };
        let mut state = VehicleState::warm_start(u0, params);
        let mut t = 0.0;
        while t < tf - dt / 2.0 {
            let (f_z, _) = loads::vertical_loads(&state, params);
            let mut tires = Vec::with_capacity(4);
            for wheel in Wheel::ALL {
                let i = wheel.index();
                let r_inst = tire::instantaneous_radius(f_z[i], params, wheel);
                let (u_g, v_g) = tire::contact_patch_velocity(&state, params, wheel);
                let (s, alpha) = tire::compute_slips(u_g, v_g, state.omega[i], r_inst, 0.0);
                let c_x = if wheel.is_front() { params.c_xf } else { params.c_xr };
                let c_y = if wheel.is_front() { params.c_yf } else { params.c_yr };
                let (f_xt, _) = tire::fiala_longitudinal(s, f_z[i], c_x, params.mu);
                let (f_yt, _) = tire::fiala_lateral(alpha, f_z[i], c_y, params.mu);
                tires.push((r_inst, f_xt, f_yt, f_z[i]));
            }
            let sum_fx: f64 = tires.iter().map(|t| t.1).sum();
            let udot = sum_fx / params.m_total();
            let mut next = state;
            next.u += udot * dt;
            for wheel in Wheel::ALL {
                let i = wheel.index();
                let (t_d, t_b, t_r) =
                    tire::wheel_torques(controls.throttle, controls.braking, state.omega[i], f_z[i], params);
                let omega_dot = (t_d - t_b - t_r - tires[i].0 * tires[i].1) / params.j_w;
                next.omega[i] += omega_dot * dt;
            }
            next.ax_prev = udot;
            state = next;
            t += dt;
        }
        state.u
    }

    #[test]
    fn coastdown_matches_explicit_euler_reference() {
        let params = test_params();
        let init = VehicleState::warm_start(20.0, &params);
        let series = simulate(&params, &zero_schedule(), &init, 0.0, 5.0, 5e-3, 0.01).unwrap();
        let u_final = *series.channel("u").unwrap().last().unwrap();
        let u_ref = explicit_euler_coast(&params, 20.0, 5.0, 1e-4);
        assert_relative_eq!(u_final, u_ref, epsilon = 5e-3);
    }

    #[test]
    fn dt_halving_shows_first_order_convergence() {
        let params = test_params();
        let schedule = maneuvers::longitudinal_ramp(&LongitudinalRamp {
            duration: 10.0,
            throttle_end: 0.4,
        });
        let init = VehicleState::warm_start(5.0, &params);
        let final_u = |dt: f64| {
            let series = simulate(&params, &schedule, &init, 0.0, 5.0, dt, 0.05).unwrap();
            *series.channel("u").unwrap().last().unwrap()
        };
        // Successive halving differences |u(h) - u(h/2)| scale linearly with
        // h for a first-order method, so their ratio should be 2.
        let u_coarse = final_u(5e-3);
        let u_mid = final_u(2.5e-3);
        let u_fine = final_u(1.25e-3);
        let ratio = (u_coarse - u_mid).abs() / (u_mid - u_fine).abs();
        assert!(
            (1.7..=2.3).contains(&ratio),
            "dt-halving error ratio {ratio} outside [1.7, 2.3]"
        );
        // And against a fine reference the error itself shrinks with dt.
        let u_ref = final_u(6.25e-4 / 8.0);
        assert!((u_mid - u_ref).abs() < (u_coarse - u_ref).abs());
    }
}
