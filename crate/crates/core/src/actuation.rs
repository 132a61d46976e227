//! Inner-loop torques to thermal-rate heat.
//!
//! The PD loop runs at 200 Hz and the thermal model at 50 Hz, so each
//! thermal tick sees a window of four torque samples per motor. Current is
//! never simulated: Joule heat is `heat_coeff * rms(torque)^2`, where
//! `heat_coeff` absorbs the winding resistance and torque constant.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::network::{ThermalNetwork, DEFAULT_MOTORS};
use crate::thermal::HeatInput;

/// Inner-loop samples per thermal update.
pub const DEFAULT_WINDOW: usize = 4;

/// Torque samples for one thermal update. Row = sample, column = motor.
#[derive(Debug, Clone, PartialEq)]
pub struct TorqueWindow {
    pub samples: DMatrix<f64>,
    /// s
    pub inner_dt: f64,
}

impl TorqueWindow {
    pub fn new(samples: DMatrix<f64>, inner_dt: f64) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::EmptyWindow);
        }
        Ok(TorqueWindow { samples, inner_dt })
    }

    pub fn from_rows(rows: &[Vec<f64>], inner_dt: f64) -> Result<Self> {
        let motors = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != motors) {
            return Err(Error::DimensionMismatch {
                what: "torque window row",
                expected: motors,
                found: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), motors, &flat), inner_dt)
    }

    pub fn motors(&self) -> usize {
        self.samples.ncols()
    }

    /// Multiplies every sample by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        TorqueWindow {
            samples: &self.samples * scale,
            inner_dt: self.inner_dt,
        }
    }
}

/// Per-motor root-mean-square torque over the window, N·m.
pub fn torque_rms(window: &TorqueWindow) -> Vec<f64> {
    let n = window.samples.nrows() as f64;
    window
        .samples
        .column_iter()
        .map(|c| (c.iter().map(|t| t * t).sum::<f64>() / n).sqrt())
        .collect()
}

/// Joint-level PD and heat parameters. Each vector has one entry per joint;
/// a scalar in a config file is broadcast to every joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuationParams {
    /// N·m/rad
    #[serde(deserialize_with = "per_joint")]
    pub kp: Vec<f64>,
    /// N·m·s/rad
    #[serde(deserialize_with = "per_joint")]
    pub kd: Vec<f64>,
    /// N·m
    #[serde(deserialize_with = "per_joint")]
    pub torque_limit: Vec<f64>,
    /// rad
    #[serde(deserialize_with = "per_joint")]
    pub nominal_angles: Vec<f64>,
    /// W/(N·m)^2
    #[serde(deserialize_with = "per_joint")]
    pub heat_coeff: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

fn per_joint<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v; DEFAULT_MOTORS],
        OneOrMany::Many(v) => v,
    })
}

impl Default for ActuationParams {
    /// Placeholder gains. Not identified from any robot.
    fn default() -> Self {
        let mut nominal = Vec::with_capacity(DEFAULT_MOTORS);
        for leg in 0..4 {
            let hip = if leg % 2 == 0 { 0.1 } else { -0.1 };
            nominal.extend([hip, 0.8, -1.5]);
        }
        ActuationParams {
            kp: vec![20.0; DEFAULT_MOTORS],
            kd: vec![0.5; DEFAULT_MOTORS],
            torque_limit: vec![33.5; DEFAULT_MOTORS],
            nominal_angles: nominal,
            heat_coeff: vec![0.12; DEFAULT_MOTORS],
        }
    }
}

impl ActuationParams {
    pub fn joints(&self) -> usize {
        self.kp.len()
    }

    pub fn validate(&self, motors: usize) -> Result<()> {
        let fields: [(&'static str, &Vec<f64>); 5] = [
            ("kp", &self.kp),
            ("kd", &self.kd),
            ("torque_limit", &self.torque_limit),
            ("nominal_angles", &self.nominal_angles),
            ("heat_coeff", &self.heat_coeff),
        ];
        for (field, v) in fields {
            if v.len() != motors {
                return Err(Error::DimensionMismatch {
                    what: field,
                    expected: motors,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: "entries must be finite".into(),
                });
            }
        }
        let check = |field: &'static str, v: &[f64], ok: fn(f64) -> bool, what: &str| {
            if v.iter().all(|&x| ok(x)) {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    reason: format!("entries must be {what}"),
                })
            }
        };
        check("kp", &self.kp, |x| x >= 0.0, ">= 0")?;
        check("kd", &self.kd, |x| x >= 0.0, ">= 0")?;
        check("torque_limit", &self.torque_limit, |x| x > 0.0, "> 0")?;
        check("heat_coeff", &self.heat_coeff, |x| x >= 0.0, ">= 0")?;
        Ok(())
    }
}

/// Joule heat per motor, `heat_coeff * rms^2`.
pub fn joule_heat(rms: &[f64], params: &ActuationParams) -> Result<Vec<f64>> {
    if rms.len() != params.heat_coeff.len() {
        return Err(Error::DimensionMismatch {
            what: "rms torque",
            expected: params.heat_coeff.len(),
            found: rms.len(),
        });
    }
    rms.iter()
        .zip(&params.heat_coeff)
        .enumerate()
        .map(|(motor, (&r, &c))| {
            if r < 0.0 || r.is_nan() {
                Err(Error::NegativeRms { motor, value: r })
            } else {
                Ok(c * r * r)
            }
        })
        .collect()
}

/// Node heat vector: Joule heat on motors plus every node's `aux_heat`.
pub fn assemble_heat_input(joule: &[f64], network: &ThermalNetwork) -> Result<HeatInput> {
    let motors = network.motor_indices();
    if joule.len() != motors.len() {
        return Err(Error::DimensionMismatch {
            what: "joule heat",
            expected: motors.len(),
            found: joule.len(),
        });
    }
    let mut input = HeatInput::aux(network);
    for (&node, &q) in motors.iter().zip(joule) {
        input.watts[node] += q;
    }
    input.watts[network.env_index()] = 0.0;
    Ok(input)
}

/// `clamp(kp (target - pos) - kd vel, -limit, limit)` per joint.
pub fn pd_torque(target: &[f64], pos: &[f64], vel: &[f64], params: &ActuationParams) -> Result<Vec<f64>> {
    let n = params.joints();
    for (what, v) in [("target", target), ("position", pos), ("velocity", vel)] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: v.len(),
            });
        }
    }
    Ok((0..n)
        .map(|k| {
            let raw = params.kp[k] * (target[k] - pos[k]) - params.kd[k] * vel[k];
            raw.clamp(-params.torque_limit[k], params.torque_limit[k])
        })
        .collect())
}

/// PD targets from policy actions: `nominal + action`.
pub fn action_to_target(action: &[f64], params: &ActuationParams) -> Vec<f64> {
    action
        .iter()
        .zip(&params.nominal_angles)
        .map(|(a, n)| a + n)
        .collect()
}
