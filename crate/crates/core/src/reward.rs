//! Locomotion reward suite with the thermal barrier penalty.
//!
//! The motor-temperature row turns the constraint `T <= T_max` into the
//! barrier condition
//!
//! ```text
//! -dT/dt + gamma_T (T_max - T_clip) >= 0
//! ```
//!
//! evaluated per motor on a clipped temperature, and penalizes the L1 norm
//! of the violations. [`max_feasible_gamma`] finds the largest `gamma_T`
//! for which a motor held at `clip_max` with no input still satisfies the
//! condition.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ThermalNetwork;
use crate::thermal::SystemMatrices;

/// One policy tick of robot state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSnapshot {
    /// m/s, base frame; z unused.
    pub cmd_lin_vel: [f64; 3],
    /// rad/s
    pub cmd_yaw_rate: f64,
    /// m/s
    pub lin_vel: [f64; 3],
    /// rad/s
    pub ang_vel: [f64; 3],
    /// Unit gravity direction in the base frame.
    pub gravity: [f64; 3],
    pub joint_pos: [f64; 12],
    pub joint_vel: [f64; 12],
    pub joint_acc: [f64; 12],
    /// °C
    pub temperatures: [f64; 12],
    /// °C/s
    pub temp_rate: [f64; 12],
    pub action: [f64; 12],
    pub prev_action: [f64; 12],
    pub prev_prev_action: [f64; 12],
    /// m
    pub base_height: f64,
    /// m
    pub foot_heights: [f64; 4],
    /// Horizontal foot speed, m/s.
    pub foot_xy_speed: [f64; 4],
    /// N
    pub external_force: [f64; 3],
    pub terminated: bool,
}

impl RobotSnapshot {
    pub fn validate(&self) -> Result<()> {
        let norm = self.gravity.iter().map(|g| g * g).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter {
                field: "gravity",
                reason: format!("must have unit norm, got {norm}"),
            });
        }
        if self.foot_xy_speed.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter {
                field: "foot_xy_speed",
                reason: "speeds are magnitudes and cannot be negative".into(),
            });
        }
        Ok(())
    }
}

/// Weights of the reward rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub lin_vel_tracking: f64,
    pub ang_vel_tracking: f64,
    pub lin_vel_z: f64,
    pub ang_vel_xy: f64,
    pub orientation: f64,
    pub joint_acc: f64,
    pub termination: f64,
    pub body_height: f64,
    pub foot_clearance: f64,
    pub action_rate: f64,
    pub smoothness: f64,
    pub motor_temperature: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            lin_vel_tracking: 1.0,
            ang_vel_tracking: 0.8,
            lin_vel_z: -2.0,
            ang_vel_xy: -0.05,
            orientation: -0.2,
            joint_acc: -2.5e-7,
            termination: -200.0,
            body_height: -1.0,
            foot_clearance: -0.01,
            action_rate: -0.01,
            smoothness: -0.01,
            motor_temperature: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub weights: RewardWeights,
    pub sigma: f64,
    /// m
    pub h_target: f64,
    /// m
    pub pz_target: f64,
    /// °C
    pub t_max: f64,
    /// °C
    pub clip_min: f64,
    /// °C
    pub clip_max: f64,
    /// 1/s
    pub gamma_t: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            weights: RewardWeights::default(),
            sigma: 0.25,
            h_target: 0.3,
            pz_target: -0.2,
            t_max: 60.0,
            clip_min: 55.0,
            clip_max: 65.0,
            gamma_t: 0.35,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter {
                field: "sigma",
                reason: format!("must be > 0, got {}", self.sigma),
            });
        }
        if !(self.clip_min <= self.t_max && self.t_max <= self.clip_max) {
            return Err(Error::InvalidParameter {
                field: "t_max",
                reason: format!(
                    "need clip_min <= t_max <= clip_max, got {} <= {} <= {}",
                    self.clip_min, self.t_max, self.clip_max
                ),
            });
        }
        if !(self.gamma_t > 0.0) {
            return Err(Error::InvalidParameter {
                field: "gamma_t",
                reason: format!("must be > 0, got {}", self.gamma_t),
            });
        }
        Ok(())
    }
}

pub fn clip_temperatures(temps: &[f64], cfg: &RewardConfig) -> Vec<f64> {
    temps.iter().map(|t| t.clamp(cfg.clip_min, cfg.clip_max)).collect()
}

/// Per-motor barrier slack `-rate + gamma_T (T_max - T_clip)`.
/// Nonnegative means the constraint holds.
pub fn cbf_margin(temp_rate: &[f64], clipped: &[f64], cfg: &RewardConfig) -> Vec<f64> {
    assert_eq!(temp_rate.len(), clipped.len(), "rate and temperature lengths differ");
    temp_rate
        .iter()
        .zip(clipped)
        .map(|(r, t)| -r + cfg.gamma_t * (cfg.t_max - t))
        .collect()
}

/// Weighted L1 norm of the negative margins, with a minus sign.
pub fn thermal_reward_term(margins: &[f64], cfg: &RewardConfig) -> f64 {
    let violation: f64 = margins.iter().map(|m| (-m).max(0.0)).sum();
    cfg.weights.motor_temperature * -violation
}

/// Motor-temperature row straight from temperatures and their rates.
pub fn thermal_penalty(temps: &[f64], temp_rate: &[f64], cfg: &RewardConfig) -> f64 {
    thermal_reward_term(&cbf_margin(temp_rate, &clip_temperatures(temps, cfg), cfg), cfg)
}

/// Row names of the breakdown, in output order.
pub const REWARD_TERMS: [&str; 12] = [
    "lin_vel_tracking",
    "ang_vel_tracking",
    "lin_vel_z",
    "ang_vel_xy",
    "orientation",
    "joint_acc",
    "termination",
    "body_height",
    "foot_clearance",
    "action_rate",
    "smoothness",
    "motor_temperature",
];

/// Weighted value of every reward row plus their sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub total: f64,
    pub terms: Vec<(&'static str, f64)>,
}

impl RewardBreakdown {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }

    /// Two-line CSV: header `total,<terms...>` and the values.
    pub fn to_csv_string(&self) -> String {
        let mut header = vec!["total".to_string()];
        let mut values = vec![self.total.to_string()];
        for (name, v) in &self.terms {
            header.push(name.to_string());
            values.push(v.to_string());
        }
        format!("{}\n{}\n", header.join(","), values.join(","))
    }
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub fn total_reward(snap: &RobotSnapshot, cfg: &RewardConfig) -> RewardBreakdown {
    let w = &cfg.weights;

    let lin_err = sq(&[
        snap.cmd_lin_vel[0] - snap.lin_vel[0],
        snap.cmd_lin_vel[1] - snap.lin_vel[1],
    ]);
    let yaw_err = (snap.cmd_yaw_rate - snap.ang_vel[2]).powi(2);

    // only the horizontal gravity components carry tilt information
    let tilt = sq(&snap.gravity[..2]);

    let clearance: f64 = snap
        .foot_heights
        .iter()
        .zip(&snap.foot_xy_speed)
        .map(|(pz, v)| (cfg.pz_target - pz).powi(2) * v)
        .sum();

    let rate: Vec<f64> = snap
        .action
        .iter()
        .zip(&snap.prev_action)
        .map(|(a, p)| a - p)
        .collect();
    let jerk: Vec<f64> = (0..12)
        .map(|k| snap.action[k] - 2.0 * snap.prev_action[k] + snap.prev_prev_action[k])
        .collect();

    let terms: Vec<(&'static str, f64)> = vec![
        ("lin_vel_tracking", w.lin_vel_tracking * (-lin_err / cfg.sigma).exp()),
        ("ang_vel_tracking", w.ang_vel_tracking * (-yaw_err / cfg.sigma).exp()),
        ("lin_vel_z", w.lin_vel_z * snap.lin_vel[2].powi(2)),
        ("ang_vel_xy", w.ang_vel_xy * sq(&snap.ang_vel[..2])),
        ("orientation", w.orientation * tilt),
        ("joint_acc", w.joint_acc * sq(&snap.joint_acc)),
        ("termination", if snap.terminated { w.termination } else { 0.0 }),
        ("body_height", w.body_height * (cfg.h_target - snap.base_height).powi(2)),
        ("foot_clearance", w.foot_clearance * clearance),
        ("action_rate", w.action_rate * sq(&rate)),
        ("smoothness", w.smoothness * sq(&jerk)),
        (
            "motor_temperature",
            thermal_penalty(&snap.temperatures, &snap.temp_rate, cfg),
        ),
    ];
    let total = terms.iter().map(|(_, v)| v).sum();
    RewardBreakdown { total, terms }
}

/// Backward-difference temperature rate `(T_k - T_{k-1}) / h`.
pub fn temperature_rate(current: &[f64], previous: &[f64], h: f64) -> Vec<f64> {
    current.iter().zip(previous).map(|(c, p)| (c - p) / h).collect()
}

/// Result of the gamma feasibility solve.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBound {
    /// Largest admissible gamma_T, 1/s.
    pub gamma: f64,
    /// Zero-input rate of each motor at the worst-case state, °C/s.
    pub free_rates: Vec<f64>,
    /// Barrier margins with `gamma` substituted back in.
    pub margins: Vec<f64>,
}

impl GammaBound {
    pub fn admits(&self, gamma_t: f64) -> bool {
        gamma_t <= self.gamma
    }
}

/// Largest gamma_T for which every motor, with all non-environment nodes at
/// `clip_max` and the environment at `worst_case_ambient`, satisfies the
/// barrier condition under zero input.
///
/// The zero-input rate of node `i` over one step is `([A - I] T)_i / h`.
/// The condition `-rate + gamma (T_max - clip_max) >= 0` then bounds gamma
/// from above by `-rate / (clip_max - T_max)`. If some motor would heat up
/// with no input the bound is 0.
///
/// With exact matrices the rate is the one-step average. Euler matrices give
/// `[A - I] / h = G`, the instantaneous rate of the continuous model.
pub fn max_feasible_gamma(
    mat: &SystemMatrices,
    network: &ThermalNetwork,
    cfg: &RewardConfig,
    worst_case_ambient: f64,
) -> Result<GammaBound> {
    if !(cfg.clip_max > cfg.t_max) {
        return Err(Error::GammaBound {
            clip_max: cfg.clip_max,
            t_max: cfg.t_max,
        });
    }
    if mat.len() != network.len() {
        return Err(Error::DimensionMismatch {
            what: "system matrices",
            expected: network.len(),
            found: mat.len(),
        });
    }

    let mut worst = DVector::from_element(network.len(), cfg.clip_max);
    worst[network.env_index()] = worst_case_ambient;
    let next = &mat.a * &worst;

    let headroom = cfg.clip_max - cfg.t_max;
    let free_rates: Vec<f64> = network
        .motor_indices()
        .iter()
        .map(|&i| (next[i] - worst[i]) / mat.h)
        .collect();
    let gamma = if free_rates.iter().any(|&r| r >= 0.0) {
        0.0
    } else {
        free_rates
            .iter()
            .map(|r| -r / headroom)
            .fold(f64::INFINITY, f64::min)
    };
    let margins = free_rates
        .iter()
        .map(|r| -r + gamma * (cfg.t_max - cfg.clip_max))
        .collect();
    Ok(GammaBound {
        gamma,
        free_rates,
        margins,
    })
}
