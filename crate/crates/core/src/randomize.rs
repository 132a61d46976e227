//! Seeded episode randomization.
//!
//! Draws come from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.9).
//! Each value uses one `f64` draw from rand's standard uniform on `[0, 1)`,
//! mapped affinely onto its range. Fields are drawn in declaration order of
//! [`SampledEpisodeConfig`], per-motor and per-axis entries in index order,
//! so the same `(ranges, seed)` reproduces bit-for-bit on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::DEFAULT_MOTORS;

/// Closed interval `[min, max]`, written as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range(pub f64, pub f64);

impl Range {
    pub fn min(&self) -> f64 {
        self.0
    }

    pub fn max(&self) -> f64 {
        self.1
    }

    pub fn contains(&self, v: f64) -> bool {
        self.0 <= v && v <= self.1
    }

    fn check(&self, field: &'static str) -> Result<()> {
        if self.0.is_finite() && self.1.is_finite() && self.0 <= self.1 {
            Ok(())
        } else {
            Err(Error::InvalidRange {
                field,
                min: self.0,
                max: self.1,
            })
        }
    }

    fn uniform(&self, u: f64) -> f64 {
        if self.0 == self.1 {
            self.0
        } else {
            // u < 1, but rounding can land on max; never beyond it
            (self.0 + (self.1 - self.0) * u).min(self.1)
        }
    }

    fn triangular(&self, mode: f64, u: f64) -> f64 {
        let (a, b) = (self.0, self.1);
        if a == b {
            return a;
        }
        let c = mode.clamp(a, b);
        let split = (c - a) / (b - a);
        let v = if u < split {
            a + (u * (b - a) * (c - a)).sqrt()
        } else {
            b - ((1.0 - u) * (b - a) * (b - c)).sqrt()
        };
        v.clamp(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureDistribution {
    #[default]
    Uniform,
    /// Triangular with its peak at `t_max`.
    Triangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizationRanges {
    /// kg
    pub payload_mass: Range,
    /// m, per axis
    pub com_displacement: [Range; 3],
    /// N, per axis
    pub external_force: [Range; 3],
    pub ground_friction: Range,
    /// Multiplier on the nominal joint angles.
    pub init_joint_scale: Range,
    /// In policy periods; multiplied by `delay_dt`.
    pub system_delay_steps: Range,
    /// s
    pub delay_dt: f64,
    /// Multiplier on motor torque.
    pub motor_strength_scale: Range,
    /// °C relative to `t_max`.
    pub init_motor_temp_offset: Range,
    /// °C
    pub t_max: f64,
    pub temp_distribution: TemperatureDistribution,
    /// °C
    pub ambient_temp: Range,
    pub motors: usize,
}

impl Default for RandomizationRanges {
    fn default() -> Self {
        RandomizationRanges {
            payload_mass: Range(0.0, 4.0),
            com_displacement: [Range(-0.1, 0.1); 3],
            external_force: [Range(-30.0, 30.0); 3],
            ground_friction: Range(0.2, 1.25),
            init_joint_scale: Range(0.5, 1.5),
            system_delay_steps: Range(0.0, 3.0),
            delay_dt: 0.02,
            motor_strength_scale: Range(0.8, 1.2),
            init_motor_temp_offset: Range(-25.0, 10.0),
            t_max: 60.0,
            temp_distribution: TemperatureDistribution::Uniform,
            ambient_temp: Range(0.0, 35.0),
            motors: DEFAULT_MOTORS,
        }
    }
}

impl RandomizationRanges {
    pub fn validate(&self) -> Result<()> {
        self.payload_mass.check("payload_mass")?;
        for r in &self.com_displacement {
            r.check("com_displacement")?;
        }
        for r in &self.external_force {
            r.check("external_force")?;
        }
        self.ground_friction.check("ground_friction")?;
        self.init_joint_scale.check("init_joint_scale")?;
        self.system_delay_steps.check("system_delay_steps")?;
        self.motor_strength_scale.check("motor_strength_scale")?;
        self.init_motor_temp_offset.check("init_motor_temp_offset")?;
        self.ambient_temp.check("ambient_temp")?;
        if !(self.delay_dt >= 0.0 && self.delay_dt.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "delay_dt",
                reason: format!("must be >= 0, got {}", self.delay_dt),
            });
        }
        if !self.t_max.is_finite() {
            return Err(Error::InvalidParameter {
                field: "t_max",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// Absolute initial motor temperature range, °C.
    pub fn init_motor_temp(&self) -> Range {
        Range(
            self.t_max + self.init_motor_temp_offset.0,
            self.t_max + self.init_motor_temp_offset.1,
        )
    }

    /// Absolute system delay range, s.
    pub fn system_delay(&self) -> Range {
        Range(
            self.system_delay_steps.0 * self.delay_dt,
            self.system_delay_steps.1 * self.delay_dt,
        )
    }
}

/// One draw per randomized quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledEpisodeConfig {
    pub seed: u64,
    pub payload_mass: f64,
    pub com_displacement: [f64; 3],
    pub external_force: [f64; 3],
    pub ground_friction: f64,
    /// Per joint.
    pub init_joint_scale: Vec<f64>,
    /// s
    pub system_delay: f64,
    pub motor_strength_scale: f64,
    /// °C per motor.
    pub init_motor_temps: Vec<f64>,
    /// °C
    pub ambient_temp: f64,
}

impl SampledEpisodeConfig {
    /// Every scalar value paired with its range, for containment checks.
    pub fn fields(&self, ranges: &RandomizationRanges) -> Vec<(String, f64, Range)> {
        let mut out = vec![("payload_mass".to_string(), self.payload_mass, ranges.payload_mass)];
        for axis in 0..3 {
            out.push((
                format!("com_displacement[{axis}]"),
                self.com_displacement[axis],
                ranges.com_displacement[axis],
            ));
        }
        for axis in 0..3 {
            out.push((
                format!("external_force[{axis}]"),
                self.external_force[axis],
                ranges.external_force[axis],
            ));
        }
        out.push(("ground_friction".into(), self.ground_friction, ranges.ground_friction));
        for (k, &v) in self.init_joint_scale.iter().enumerate() {
            out.push((format!("init_joint_scale[{k}]"), v, ranges.init_joint_scale));
        }
        out.push(("system_delay".into(), self.system_delay, ranges.system_delay()));
        out.push((
            "motor_strength_scale".into(),
            self.motor_strength_scale,
            ranges.motor_strength_scale,
        ));
        for (k, &v) in self.init_motor_temps.iter().enumerate() {
            out.push((format!("init_motor_temps[{k}]"), v, ranges.init_motor_temp()));
        }
        out.push(("ambient_temp".into(), self.ambient_temp, ranges.ambient_temp));
        out
    }
}

pub fn sample_episode(ranges: &RandomizationRanges, seed: u64) -> Result<SampledEpisodeConfig> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |r: Range| r.uniform(rng.random::<f64>());

    let payload_mass = draw(ranges.payload_mass);
    let com_displacement = ranges.com_displacement.map(&mut draw);
    let external_force = ranges.external_force.map(&mut draw);
    let ground_friction = draw(ranges.ground_friction);
    let init_joint_scale = (0..ranges.motors).map(|_| draw(ranges.init_joint_scale)).collect();
    let system_delay = draw(ranges.system_delay());
    let motor_strength_scale = draw(ranges.motor_strength_scale);

    let temp_range = ranges.init_motor_temp();
    let init_motor_temps = (0..ranges.motors)
        .map(|_| {
            let u = rng.random::<f64>();
            match ranges.temp_distribution {
                TemperatureDistribution::Uniform => temp_range.uniform(u),
                TemperatureDistribution::Triangular => temp_range.triangular(ranges.t_max, u),
            }
        })
        .collect();
    let ambient_temp = ranges.ambient_temp.uniform(rng.random::<f64>());

    Ok(SampledEpisodeConfig {
        seed,
        payload_mass,
        com_displacement,
        external_force,
        ground_friction,
        init_joint_scale,
        system_delay,
        motor_strength_scale,
        init_motor_temps,
        ambient_temp,
    })
}
