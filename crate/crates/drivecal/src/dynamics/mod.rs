//! The 8-DOF vehicle handling model.
//!
//! Four chassis degrees of freedom (longitudinal, lateral, yaw, roll) plus
//! the spin of each wheel. Tire forces come from a steady-state Fiala model
//! driven by quasi-static vertical loads; time integration is half-implicit
//! (semi-implicit Euler). All operations are pure functions of their inputs.

pub mod chassis;
pub mod loads;
pub mod params;
pub mod sim;
pub mod state;
pub mod tire;

pub use chassis::{chassis_accelerations, ChassisAccel};
pub use loads::vertical_loads;
pub use params::{TorqueMap, VehicleParams};
pub use sim::{simulate, simulate_with_events, step, SimEvent, StepOutput, STATE_CHANNELS};
pub use state::VehicleState;
pub use tire::{Regime, TireOutput};

use serde::{Deserialize, Serialize};

/// Wheel position, in the lf, rf, lr, rr index order used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wheel {
    LeftFront = 0,
    RightFront = 1,
    LeftRear = 2,
    RightRear = 3,
}

impl Wheel {
    pub const ALL: [Wheel; 4] = [
        Wheel::LeftFront,
        Wheel::RightFront,
        Wheel::LeftRear,
        Wheel::RightRear,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_front(self) -> bool {
        matches!(self, Wheel::LeftFront | Wheel::RightFront)
    }

    pub fn is_left(self) -> bool {
        matches!(self, Wheel::LeftFront | Wheel::LeftRear)
    }

    pub fn label(self) -> &'static str {
        match self {
            Wheel::LeftFront => "lf",
            Wheel::RightFront => "rf",
            Wheel::LeftRear => "lr",
            Wheel::RightRear => "rr",
        }
    }
}

/// Stock parameter set used by unit tests: the default vehicle from the
/// shipped configuration.
#[cfg(test)]
pub(crate) fn test_params() -> VehicleParams {
    crate::config::default_vehicle()
}
