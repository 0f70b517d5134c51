//! Open-loop control schedules: throttle, steering and braking vs. time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized control inputs at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSample {
    /// Throttle in [0, 1].
    pub throttle: f64,
    /// Steering in [-1, 1]; positive steers left.
    pub steering: f64,
    /// Braking in [0, 1].
    pub braking: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub t: f64,
    pub throttle: f64,
    pub steering: f64,
    pub braking: f64,
}

/// Piecewise-linear control schedule.
///
/// Values are interpolated linearly between keyframes and held constant
/// before the first and after the last keyframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Keyframe>", into = "Vec<Keyframe>")]
pub struct ControlSchedule {
    keyframes: Vec<Keyframe>,
}

impl TryFrom<Vec<Keyframe>> for ControlSchedule {
    type Error = Error;
    fn try_from(keyframes: Vec<Keyframe>) -> Result<Self> {
        ControlSchedule::new(keyframes)
    }
}

impl From<ControlSchedule> for Vec<Keyframe> {
    fn from(schedule: ControlSchedule) -> Self {
        schedule.keyframes
    }
}

impl ControlSchedule {
    pub fn new(keyframes: Vec<Keyframe>) -> Result<Self> {
        if keyframes.is_empty() {
            return Err(Error::EmptySchedule);
        }
        for (i, kf) in keyframes.iter().enumerate() {
            if !kf.t.is_finite() || (i > 0 && kf.t <= keyframes[i - 1].t) {
                return Err(Error::NonIncreasingKeyframes { index: i });
            }
            for (channel, value, lo, hi) in [
                ("throttle", kf.throttle, 0.0, 1.0),
                ("steering", kf.steering, -1.0, 1.0),
                ("braking", kf.braking, 0.0, 1.0),
            ] {
                if !(value >= lo && value <= hi) {
                    return Err(Error::ControlOutOfRange {
                        index: i,
                        channel,
                        value,
                    });
                }
            }
        }
        Ok(ControlSchedule { keyframes })
    }

    /// Single-keyframe schedule holding the given values forever.
    pub fn constant(throttle: f64, steering: f64, braking: f64) -> Self {
        ControlSchedule::new(vec![Keyframe {
            t: 0.0,
            throttle,
            steering,
            braking,
        }])
        .expect("constant schedule is always valid")
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }

    /// Time of the last keyframe.
    pub fn duration(&self) -> f64 {
        self.keyframes.last().unwrap().t
    }

    pub fn eval(&self, t: f64) -> ControlSample {
        let kfs = &self.keyframes;
        let first = kfs.first().unwrap();
        let last = kfs.last().unwrap();
        if t <= first.t {
            return sample_of(first);
        }
        if t >= last.t {
            return sample_of(last);
        }
        let i = kfs.partition_point(|kf| kf.t <= t);
        let (k0, k1) = (&kfs[i - 1], &kfs[i]);
        let w = (t - k0.t) / (k1.t - k0.t);
        ControlSample {
            throttle: k0.throttle + (k1.throttle - k0.throttle) * w,
            steering: k0.steering + (k1.steering - k0.steering) * w,
            braking: k0.braking + (k1.braking - k0.braking) * w,
        }
    }
}

fn sample_of(kf: &Keyframe) -> ControlSample {
    ControlSample {
        throttle: kf.throttle,
        steering: kf.steering,
        braking: kf.braking,
    }
}

/// Constructors for the stock maneuvers.
///
/// Shapes that the calibration stages rely on are fixed; durations and
/// levels are configurable with the defaults below.
pub mod maneuvers {
    use super::*;

    /// Piecewise-linear evaluation of a single channel's breakpoints, with
    /// end-holding, used to merge independent channels into keyframes.
    fn piecewise(points: &[(f64, f64)], t: f64) -> f64 {
        if t <= points[0].0 {
            return points[0].1;
        }
        let last = points[points.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let i = points.partition_point(|&(pt, _)| pt <= t);
        let (t0, v0) = points[i - 1];
        let (t1, v1) = points[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    fn merge(
        throttle: &[(f64, f64)],
        steering: &[(f64, f64)],
        braking: &[(f64, f64)],
    ) -> ControlSchedule {
        let mut times: Vec<f64> = throttle
            .iter()
            .chain(steering)
            .chain(braking)
            .map(|&(t, _)| t)
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let keyframes = times
            .into_iter()
            .map(|t| Keyframe {
                t,
                throttle: piecewise(throttle, t),
                steering: piecewise(steering, t),
                braking: piecewise(braking, t),
            })
            .collect();
        ControlSchedule::new(keyframes).expect("maneuver construction is valid")
    }

    /// Straight-line acceleration: throttle ramps linearly from zero.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    pub struct LongitudinalRamp {
        pub duration: f64,
        pub throttle_end: f64,
    }

    impl Default for LongitudinalRamp {
        fn default() -> Self {
            LongitudinalRamp {
                duration: 10.0,
                throttle_end: 0.5,
            }
        }
    }

    pub fn longitudinal_ramp(cfg: &LongitudinalRamp) -> ControlSchedule {
        merge(
            &[(0.0, 0.0), (cfg.duration, cfg.throttle_end)],
            &[(0.0, 0.0)],
            &[(0.0, 0.0)],
        )
    }

    /// Accelerate, then ramp the steering in while the throttle ramp holds.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    pub struct LateralSteer {
        pub throttle_ramp_end: f64,
        pub throttle_end: f64,
        pub steer_start: f64,
        pub steer_end: f64,
        pub steer_level: f64,
    }

    impl Default for LateralSteer {
        fn default() -> Self {
            LateralSteer {
                throttle_ramp_end: 10.0,
                throttle_end: 0.5,
                steer_start: 7.0,
                steer_end: 10.7,
                steer_level: 0.2,
            }
        }
    }

    pub fn lateral_steer(cfg: &LateralSteer) -> ControlSchedule {
        merge(
            &[(0.0, 0.0), (cfg.throttle_ramp_end, cfg.throttle_end)],
            &[
                (0.0, 0.0),
                (cfg.steer_start, 0.0),
                (cfg.steer_end, cfg.steer_level),
            ],
            &[(0.0, 0.0)],
        )
    }

    /// Full-throttle run-up followed by a coast.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    pub struct Coastdown {
        pub throttle_level: f64,
        pub throttle_hold_end: f64,
        pub coast_start: f64,
    }

    impl Default for Coastdown {
        fn default() -> Self {
            Coastdown {
                throttle_level: 1.0,
                throttle_hold_end: 5.0,
                coast_start: 5.1,
            }
        }
    }

    pub fn coastdown(cfg: &Coastdown) -> ControlSchedule {
        merge(
            &[
                (0.0, cfg.throttle_level),
                (cfg.throttle_hold_end, cfg.throttle_level),
                (cfg.coast_start, 0.0),
            ],
            &[(0.0, 0.0)],
            &[(0.0, 0.0)],
        )
    }

    /// Held-out test maneuver: steep throttle ramp, left step steer, right
    /// ramp steer, steer back to zero, brake for the final stretch.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    pub struct AcceptanceTest {
        pub throttle_ramp_end: f64,
        pub throttle_peak: f64,
        pub steer_step_time: f64,
        pub steer_level: f64,
        pub left_hold_end: f64,
        pub right_ramp_end: f64,
        pub steer_return_end: f64,
        pub brake_start: f64,
        pub brake_level: f64,
        pub duration: f64,
    }

    impl Default for AcceptanceTest {
        fn default() -> Self {
            AcceptanceTest {
                throttle_ramp_end: 3.5,
                throttle_peak: 0.8,
                steer_step_time: 3.6,
                steer_level: 0.2,
                left_hold_end: 5.5,
                right_ramp_end: 8.5,
                steer_return_end: 9.5,
                brake_start: 9.6,
                brake_level: 0.5,
                duration: 11.5,
            }
        }
    }

    pub fn acceptance_test(cfg: &AcceptanceTest) -> ControlSchedule {
        merge(
            &[
                (0.0, 0.0),
                (cfg.throttle_ramp_end, cfg.throttle_peak),
                (cfg.steer_step_time, 0.0),
            ],
            &[
                (0.0, 0.0),
                (cfg.throttle_ramp_end, 0.0),
                (cfg.steer_step_time, cfg.steer_level),
                (cfg.left_hold_end, cfg.steer_level),
                (cfg.right_ramp_end, -cfg.steer_level),
                (cfg.steer_return_end, 0.0),
            ],
            &[
                (0.0, 0.0),
                (cfg.steer_return_end, 0.0),
                (cfg.brake_start, cfg.brake_level),
                (cfg.duration, cfg.brake_level),
            ],
        )
    }
}
