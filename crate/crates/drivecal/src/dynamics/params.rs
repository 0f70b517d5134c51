use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear motor torque curve, (motor speed rad/s, torque N*m) pairs.
///
/// Speeds must be strictly increasing and torques non-negative. Evaluation is
/// held constant beyond the first/last point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TorqueMapRaw", into = "TorqueMapRaw")]
pub struct TorqueMap {
    points: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct TorqueMapRaw {
    points: Vec<(f64, f64)>,
}

impl TryFrom<TorqueMapRaw> for TorqueMap {
    type Error = Error;
    fn try_from(raw: TorqueMapRaw) -> Result<Self> {
        TorqueMap::new(raw.points)
    }
}

impl From<TorqueMap> for TorqueMapRaw {
    fn from(map: TorqueMap) -> Self {
        TorqueMapRaw { points: map.points }
    }
}

impl TorqueMap {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParams("torque map has no points".into()));
        }
        for (i, &(speed, torque)) in points.iter().enumerate() {
            if !speed.is_finite() || !torque.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "torque map point {i} is not finite"
                )));
            }
            if torque < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "torque map torque at point {i} is negative"
                )));
            }
            if i > 0 && speed <= points[i - 1].0 {
                return Err(Error::InvalidParams(format!(
                    "torque map speeds must be strictly increasing (point {i})"
                )));
            }
        }
        Ok(TorqueMap { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Torque at the given motor speed; clamped to the end points.
    pub fn torque_at(&self, speed: f64) -> f64 {
        let pts = &self.points;
        if speed <= pts[0].0 {
            return pts[0].1;
        }
        if speed >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let i = pts.partition_point(|&(s, _)| s <= speed);
        let (s0, t0) = pts[i - 1];
        let (s1, t1) = pts[i];
        t0 + (t1 - t0) * (speed - s0) / (s1 - s0)
    }
}

/// Physical parameters of the 8-DOF handling model.
///
/// Masses, inertias, geometry and tire properties, plus the powertrain,
/// brake and steering configuration. Units are SI throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// Sprung mass, kg.
    pub m: f64,
    /// Front unsprung mass, kg.
    pub m_uf: f64,
    /// Rear unsprung mass, kg.
    pub m_ur: f64,
    /// Sprung mass roll inertia, kg*m^2.
    pub j_x: f64,
    /// Sprung mass yaw inertia, kg*m^2.
    pub j_z: f64,
    /// Sprung mass XZ product of inertia, kg*m^2 (any sign).
    pub j_xz: f64,
    /// Wheel spin inertia, kg*m^2.
    pub j_w: f64,
    /// Distance of sprung-mass CM from the front axle, m.
    pub a: f64,
    /// Distance of sprung-mass CM from the rear axle, m.
    pub b: f64,
    /// Sprung-mass CM height, m.
    pub h: f64,
    /// Front track width, m.
    pub c_f: f64,
    /// Rear track width, m.
    pub c_r: f64,
    /// Front roll-center distance below the sprung-mass CM, m.
    pub h_rcf: f64,
    /// Rear roll-center distance below the sprung-mass CM, m.
    pub h_rcr: f64,
    /// Front unsprung-mass CM height, m.
    pub h_uf: f64,
    /// Rear unsprung-mass CM height, m.
    pub h_ur: f64,
    /// Front roll stiffness, N*m/rad.
    pub k_phi_f: f64,
    /// Rear roll stiffness, N*m/rad.
    pub k_phi_r: f64,
    /// Front roll damping, N*m*s/rad.
    pub b_phi_f: f64,
    /// Rear roll damping, N*m*s/rad.
    pub b_phi_r: f64,
    /// Front tire vertical stiffness, N/m.
    pub k_tf: f64,
    /// Rear tire vertical stiffness, N/m.
    pub k_tr: f64,
    /// Front tire longitudinal stiffness, N.
    pub c_xf: f64,
    /// Rear tire longitudinal stiffness, N.
    pub c_xr: f64,
    /// Front tire lateral stiffness, N/rad.
    pub c_yf: f64,
    /// Rear tire lateral stiffness, N/rad.
    pub c_yr: f64,
    /// Tire rolling resistance coefficient, m.
    pub rr: f64,
    /// Unloaded tire radius, m.
    pub r0: f64,
    /// Tire-road friction coefficient, dimensionless.
    pub mu: f64,
    /// Overall driveline ratio (motor speed / wheel speed), dimensionless.
    pub gear_ratio: f64,
    /// Motor torque vs. motor speed.
    pub torque_map: TorqueMap,
    /// Maximum brake torque per wheel at unit braking input, N*m.
    pub max_brake_torque: f64,
    /// Road-wheel steer angle at unit normalized steering input, rad.
    pub max_steer_angle: f64,
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
}

impl VehicleParams {
    /// Vertical distance from the sprung-mass CM to the vehicle roll center, m.
    pub fn h_rc(&self) -> f64 {
        (self.h_rcf * self.b + self.h_rcr * self.a) / (self.a + self.b)
    }

    /// Roll inertia about the vehicle roll center, kg*m^2.
    pub fn j_x_hat(&self) -> f64 {
        self.j_x + self.m * self.h_rc() * self.h_rc()
    }

    /// Total vehicle mass, kg.
    pub fn m_total(&self) -> f64 {
        self.m + self.m_uf + self.m_ur
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, f64); 28] = [
            ("m", self.m),
            ("m_uf", self.m_uf),
            ("m_ur", self.m_ur),
            ("j_x", self.j_x),
            ("j_z", self.j_z),
            ("j_w", self.j_w),
            ("a", self.a),
            ("b", self.b),
            ("h", self.h),
            ("c_f", self.c_f),
            ("c_r", self.c_r),
            ("h_rcf", self.h_rcf),
            ("h_rcr", self.h_rcr),
            ("h_uf", self.h_uf),
            ("h_ur", self.h_ur),
            ("k_phi_f", self.k_phi_f),
            ("k_phi_r", self.k_phi_r),
            ("b_phi_f", self.b_phi_f),
            ("b_phi_r", self.b_phi_r),
            ("k_tf", self.k_tf),
            ("k_tr", self.k_tr),
            ("c_xf", self.c_xf),
            ("c_xr", self.c_xr),
            ("c_yf", self.c_yf),
            ("c_yr", self.c_yr),
            ("r0", self.r0),
            ("mu", self.mu),
            ("g", self.g),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        if !self.j_xz.is_finite() {
            return Err(Error::InvalidParams("j_xz must be finite".into()));
        }
        if !(self.rr >= 0.0) || !self.rr.is_finite() {
            return Err(Error::InvalidParams(format!(
                "rr must be non-negative, got {}",
                self.rr
            )));
        }
        for (name, value) in [
            ("gear_ratio", self.gear_ratio),
            ("max_brake_torque", self.max_brake_torque),
            ("max_steer_angle", self.max_steer_angle),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Look up a mutable reference to a scalar field by name.
    ///
    /// Used by the calibration engine to overlay sampled parameter values.
    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "m" => &mut self.m,
            "m_uf" => &mut self.m_uf,
            "m_ur" => &mut self.m_ur,
            "j_x" => &mut self.j_x,
            "j_z" => &mut self.j_z,
            "j_xz" => &mut self.j_xz,
            "j_w" => &mut self.j_w,
            "a" => &mut self.a,
            "b" => &mut self.b,
            "h" => &mut self.h,
            "c_f" => &mut self.c_f,
            "c_r" => &mut self.c_r,
            "h_rcf" => &mut self.h_rcf,
            "h_rcr" => &mut self.h_rcr,
            "h_uf" => &mut self.h_uf,
            "h_ur" => &mut self.h_ur,
            "k_phi_f" => &mut self.k_phi_f,
            "k_phi_r" => &mut self.k_phi_r,
            "b_phi_f" => &mut self.b_phi_f,
            "b_phi_r" => &mut self.b_phi_r,
            "k_tf" => &mut self.k_tf,
            "k_tr" => &mut self.k_tr,
            "c_xf" => &mut self.c_xf,
            "c_xr" => &mut self.c_xr,
            "c_yf" => &mut self.c_yf,
            "c_yr" => &mut self.c_yr,
            "rr" => &mut self.rr,
            "r0" => &mut self.r0,
            "mu" => &mut self.mu,
            "gear_ratio" => &mut self.gear_ratio,
            "max_brake_torque" => &mut self.max_brake_torque,
            "max_steer_angle" => &mut self.max_steer_angle,
            "g" => &mut self.g,
            _ => return None,
        })
    }
}
