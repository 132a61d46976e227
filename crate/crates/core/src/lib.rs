//! Motor thermal dynamics for electrically actuated quadrupeds.
//!
//! The crate models the robot as a lumped thermal network (twelve motors, the
//! onboard computer and the environment), discretizes it exactly under a
//! zero-order hold, and builds the pieces a thermal-aware locomotion stack
//! needs on top of it:
//!
//! - [`thermal`]: generator, discretization, stepping, steady states and
//!   traces.
//! - [`actuation`]: inner-loop torque windows to Joule heat.
//! - [`reward`]: the locomotion reward suite with the thermal barrier
//!   penalty and the feasibility bound on its rate coefficient.
//! - [`randomize`]: seeded episode randomization.
//! - [`scenario`]: synthetic gait loads, the barrier-filtered torque
//!   throttle and baseline-versus-throttled endurance runs.
//! - [`config`]: versioned JSON files.
//!
//! ```
//! use quadtherm::{ContinuousGenerator, Discretization, HeatInput, ThermalNetwork, ThermalState};
//!
//! let net = ThermalNetwork::placeholder();
//! let mat = ContinuousGenerator::new(&net).discretize(0.02, Discretization::Exact)?;
//! let next = mat.step(&ThermalState::ambient(&net), &HeatInput::aux(&net))?;
//! assert!(next.temperatures[0] > net.ambient());
//! # Ok::<(), quadtherm::Error>(())
//! ```
//!
//! The `book/` directory at the repository root explains the model chapter
//! by chapter; its code blocks run as doctests of this crate.

pub mod actuation;
pub mod config;
pub mod error;
pub mod expm;
pub mod network;
pub mod randomize;
pub mod reward;
pub mod scenario;
pub mod thermal;

pub use actuation::{
    assemble_heat_input, joule_heat, pd_torque, torque_rms, ActuationParams, TorqueWindow,
};
pub use error::{Error, Result};
pub use network::{NodeKind, ThermalEdge, ThermalNetwork, ThermalNode};
pub use randomize::{sample_episode, RandomizationRanges, Range, SampledEpisodeConfig};
pub use reward::{
    cbf_margin, clip_temperatures, max_feasible_gamma, thermal_reward_term, total_reward,
    GammaBound, RewardBreakdown, RewardConfig, RobotSnapshot,
};
pub use scenario::{
    run_endurance, sweep, synth_gait_torques, throttle_scale, time_to_threshold, Controller,
    EnduranceResult, EnduranceScenario, GaitParams,
};
pub use thermal::{
    pairwise_flow, simulate, single_node_analytic, steady_state, ContinuousGenerator,
    Discretization, HeatInput, SimulationTrace, SingleNode, SystemMatrices, ThermalState,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/thermal_network.md")]
    mod thermal_network {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/actuation_heat.md")]
    mod actuation_heat {}
    #[doc = include_str!("../../../book/src/thermal_reward.md")]
    mod thermal_reward {}
    #[doc = include_str!("../../../book/src/gamma_bound.md")]
    mod gamma_bound {}
    #[doc = include_str!("../../../book/src/randomization.md")]
    mod randomization {}
    #[doc = include_str!("../../../book/src/endurance.md")]
    mod endurance {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
