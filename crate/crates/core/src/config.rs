//! JSON configuration files.
//!
//! Every file carries `"schema_version": 1`; other versions are rejected.
//! Errors name the offending field by its JSON path, or the line and column
//! for syntax errors.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::actuation::{ActuationParams, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::network::ThermalNetwork;
use crate::randomize::{sample_episode, RandomizationRanges};
use crate::reward::RewardConfig;
use crate::scenario::{Controller, EnduranceScenario, GaitParams, SweepBase, Variation};
use crate::thermal::{PiecewiseSchedule, ScheduleSegment};

pub const SCHEMA_VERSION: u64 = 1;

/// Network reference naming the built-in placeholder robot.
pub const PLACEHOLDER_NETWORK: &str = "placeholder";

fn syntax_error(e: serde_json::Error) -> Error {
    Error::Config {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn take_version(value: &mut Value, at: &str) -> Result<()> {
    let obj = value.as_object_mut().ok_or_else(|| Error::Config {
        location: at.to_string(),
        message: "expected a JSON object".into(),
    })?;
    match obj.remove("schema_version") {
        None => Err(Error::Config {
            location: format!("{at}schema_version"),
            message: "missing field".into(),
        }),
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => Ok(()),
        Some(Value::Number(n)) => Err(Error::UnsupportedSchema {
            found: n.as_u64().unwrap_or(u64::MAX),
            supported: SCHEMA_VERSION,
        }),
        Some(_) => Err(Error::Config {
            location: format!("{at}schema_version"),
            message: "must be an integer".into(),
        }),
    }
}

fn from_value<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::Config {
            location: if path == "." {
                prefix.trim_end_matches('.').to_string()
            } else {
                format!("{prefix}{path}")
            },
            message: e.into_inner().to_string(),
        }
    })
}

/// Parses a versioned JSON document into `T`.
pub fn parse_versioned<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut value: Value = serde_json::from_str(text).map_err(syntax_error)?;
    take_version(&mut value, "")?;
    from_value(value, "")
}

/// Serializes `value` with `schema_version` as its first field.
pub fn to_versioned_json<T: Serialize>(value: &T) -> String {
    let mut obj = serde_json::Map::new();
    obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    if let Value::Object(fields) = serde_json::to_value(value).expect("config types serialize") {
        obj.extend(fields);
    }
    serde_json::to_string_pretty(&Value::Object(obj)).expect("value serializes")
}

/// Input schedule for the `simulate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub segments: Vec<ScheduleSegment>,
    /// Per-node start temperatures; ambient when absent.
    #[serde(default)]
    pub initial_temperatures: Option<Vec<f64>>,
}

impl ScheduleFile {
    pub fn schedule(&self) -> PiecewiseSchedule {
        PiecewiseSchedule {
            segments: self.segments.clone(),
        }
    }
}

/// Scenario file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// `"placeholder"`, a path to a network file, or an inline network.
    pub network: Value,
    #[serde(default)]
    pub gait: GaitParams,
    #[serde(default)]
    pub actuation: ActuationParams,
    #[serde(default)]
    pub controller: Controller,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub randomization: Option<RandomizationRanges>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub initial_motor_temps: Option<Vec<f64>>,
    /// Defaults to the top of the randomized ambient range, or 35 °C.
    #[serde(default)]
    pub worst_case_ambient: Option<f64>,
}

fn default_horizon() -> f64 {
    1800.0
}

fn default_h() -> f64 {
    0.02
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

/// A scenario with its network resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: EnduranceScenario,
    pub controller: Controller,
    pub randomization: Option<RandomizationRanges>,
    pub seed: Option<u64>,
}

impl LoadedScenario {
    /// Scenario with the seeded episode applied, if randomization is on and
    /// a seed is known. `seed` overrides the file's seed.
    pub fn prepared(&self, seed: Option<u64>) -> Result<EnduranceScenario> {
        let seed = seed.or(self.seed);
        match (&self.randomization, seed) {
            (Some(ranges), Some(seed)) => self.scenario.with_episode(&sample_episode(ranges, seed)?),
            _ => Ok(self.scenario.clone()),
        }
    }

    pub fn sweep_base(&self) -> SweepBase {
        SweepBase {
            scenario: self.scenario.clone(),
            controller: self.controller,
            randomization: self.randomization.clone(),
        }
    }
}

/// Resolves a network reference: the placeholder name, a path handed to
/// `read`, or an inline object.
pub fn resolve_network<F>(reference: &Value, at: &str, read: &mut F) -> Result<ThermalNetwork>
where
    F: FnMut(&str) -> Result<String>,
{
    match reference {
        Value::String(s) if s == PLACEHOLDER_NETWORK => Ok(ThermalNetwork::placeholder()),
        Value::String(path) => parse_versioned(&read(path)?),
        Value::Object(_) => {
            let mut v = reference.clone();
            if v.get("schema_version").is_some() {
                take_version(&mut v, at)?;
            }
            from_value(v, at)
        }
        _ => Err(Error::Config {
            location: at.trim_end_matches('.').to_string(),
            message: "expected \"placeholder\", a file path or a network object".into(),
        }),
    }
}

impl ScenarioFile {
    pub fn load<F>(self, read: &mut F) -> Result<LoadedScenario>
    where
        F: FnMut(&str) -> Result<String>,
    {
        let network = resolve_network(&self.network, "network.", read)?;
        let worst_case_ambient = self.worst_case_ambient.unwrap_or_else(|| {
            self.randomization
                .as_ref()
                .map_or(35.0, |r| r.ambient_temp.max())
        });
        let scenario = EnduranceScenario {
            network,
            gait: self.gait,
            actuation: self.actuation,
            reward: self.reward,
            horizon: self.horizon,
            h: self.h,
            window: self.window,
            initial_motor_temps: self.initial_motor_temps,
            worst_case_ambient,
        };
        if let Some(r) = &self.randomization {
            r.validate()?;
        }
        scenario.validate()?;
        Ok(LoadedScenario {
            scenario,
            controller: self.controller,
            randomization: self.randomization,
            seed: self.seed,
        })
    }
}

/// Parses and resolves a scenario document.
pub fn load_scenario<F>(text: &str, read: &mut F) -> Result<LoadedScenario>
where
    F: FnMut(&str) -> Result<String>,
{
    parse_versioned::<ScenarioFile>(text)?.load(read)
}

/// Sweep file: a base scenario (path or inline object), variations and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub base: Value,
    pub variations: Vec<Variation>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl SweepFile {
    pub fn base_scenario<F>(&self, read: &mut F) -> Result<LoadedScenario>
    where
        F: FnMut(&str) -> Result<String>,
    {
        match &self.base {
            Value::String(path) => load_scenario(&read(path)?, read),
            Value::Object(_) => {
                let mut v = self.base.clone();
                if v.get("schema_version").is_some() {
                    take_version(&mut v, "base.")?;
                }
                from_value::<ScenarioFile>(v, "base.")?.load(read)
            }
            _ => Err(Error::Config {
                location: "base".into(),
                message: "expected a scenario file path or object".into(),
            }),
        }
    }
}
