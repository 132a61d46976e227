//! Synthetic gait loads, barrier-filtered throttling and endurance runs.
//!
//! The learned policy is not reproduced here. Its thermal effect is
//! emulated by a scalar torque throttle: each tick, every motor's demanded
//! torque is multiplied by the largest `s` in `[0, 1]` for which the
//! one-step predicted temperature rate of every motor still satisfies
//! `rate <= gamma_T (T_max - T)`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actuation::{assemble_heat_input, joule_heat, torque_rms, ActuationParams, TorqueWindow};
use crate::error::{Error, Result};
use crate::network::ThermalNetwork;
use crate::randomize::{sample_episode, RandomizationRanges, SampledEpisodeConfig};
use crate::reward::{max_feasible_gamma, thermal_penalty, RewardConfig};
use crate::thermal::{
    step_count, ContinuousGenerator, Discretization, HeatInput, SimulationTrace, SystemMatrices,
    ThermalState,
};

/// Rate back-off of the throttle, °C/s. Keeps the filtered temperature a
/// few micro-degrees below `T_max` instead of converging onto it.
pub const THROTTLE_RATE_BACKOFF: f64 = 1e-6;

/// Leg phase offsets in default order (FL, FR, RL, RR). Diagonal pairs trot
/// together.
pub const TROT_PHASE: [f64; 4] = [0.0, 0.5, 0.5, 0.0];

/// A value for each joint role of a leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleValues {
    pub hip: f64,
    pub thigh: f64,
    pub knee: f64,
}

impl RoleValues {
    pub fn get(&self, role: usize) -> f64 {
        match role {
            0 => self.hip,
            1 => self.thigh,
            2 => self.knee,
            _ => panic!("joint role {role} out of range"),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        RoleValues {
            hip: self.hip * k,
            thigh: self.thigh * k,
            knee: self.knee * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitParams {
    /// Hz
    pub step_frequency: f64,
    /// Stance fraction of the cycle.
    pub duty_factor: f64,
    /// N·m
    pub base_torque_amplitude: RoleValues,
    /// kg
    #[serde(default)]
    pub payload_mass: f64,
    /// N·m per kg
    #[serde(default = "no_gain")]
    pub payload_torque_gain: RoleValues,
    /// m/s. Descriptive only; the torque profile does not depend on it.
    #[serde(default)]
    pub command_speed: f64,
}

fn no_gain() -> RoleValues {
    RoleValues { hip: 0.0, thigh: 0.0, knee: 0.0 }
}

impl Default for GaitParams {
    /// Loaded forward trot, 3 kg payload at 1 m/s.
    fn default() -> Self {
        GaitParams {
            step_frequency: 2.0,
            duty_factor: 0.6,
            base_torque_amplitude: RoleValues { hip: 6.0, thigh: 14.0, knee: 22.0 },
            payload_mass: 3.0,
            payload_torque_gain: RoleValues { hip: 0.5, thigh: 2.0, knee: 3.0 },
            command_speed: 1.0,
        }
    }
}

impl GaitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_frequency > 0.0 && self.step_frequency.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "step_frequency",
                reason: format!("must be > 0, got {}", self.step_frequency),
            });
        }
        if !(self.duty_factor > 0.0 && self.duty_factor < 1.0) {
            return Err(Error::InvalidParameter {
                field: "duty_factor",
                reason: format!("must lie in (0, 1), got {}", self.duty_factor),
            });
        }
        let amp = self.base_torque_amplitude;
        let gain = self.payload_torque_gain;
        if [amp.hip, amp.thigh, amp.knee, gain.hip, gain.thigh, gain.knee]
            .iter()
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidParameter {
                field: "base_torque_amplitude",
                reason: "amplitudes and payload gains must be >= 0".into(),
            });
        }
        if !(self.payload_mass >= 0.0 && self.payload_mass.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "payload_mass",
                reason: format!("must be >= 0, got {}", self.payload_mass),
            });
        }
        Ok(())
    }

    /// Stance peak torque of a role, `amplitude (1 + gain payload / amplitude)`.
    pub fn peak_torque(&self, role: usize) -> f64 {
        self.base_torque_amplitude.get(role) + self.payload_torque_gain.get(role) * self.payload_mass
    }

    /// Torque of one joint at time `t`.
    pub fn torque(&self, leg: usize, role: usize, t: f64) -> f64 {
        let peak = self.peak_torque(role);
        let duty = self.duty_factor;
        let phase = (self.step_frequency * t + TROT_PHASE[leg]).rem_euclid(1.0);
        if phase < duty {
            peak * (std::f64::consts::PI * phase / duty).sin()
        } else {
            0.1 * peak * (std::f64::consts::PI * (phase - duty) / (1.0 - duty)).sin()
        }
    }
}

/// Inner-loop samples at `t, t + inner_dt, ...` for the twelve default motors.
pub fn synth_gait_torques(gait: &GaitParams, t: f64, samples: usize, inner_dt: f64) -> Result<TorqueWindow> {
    let rows: Vec<Vec<f64>> = (0..samples)
        .map(|m| {
            let ts = t + m as f64 * inner_dt;
            (0..12).map(|j| gait.torque(j / 3, j % 3, ts)).collect()
        })
        .collect();
    TorqueWindow::from_rows(&rows, inner_dt)
}

fn node_vector(network: &ThermalNetwork, per_motor: &[f64]) -> DVector<f64> {
    let mut v = DVector::zeros(network.len());
    for (&node, &q) in network.motor_indices().iter().zip(per_motor) {
        v[node] = q;
    }
    v
}

/// Largest torque scale in `[0, 1]` whose heat keeps every motor's one-step
/// predicted rate within the barrier bound at the current temperature.
///
/// `temps` is the full node temperature vector and `demanded_heat` the Joule
/// heat per motor at full torque. Heat is quadratic in torque, so the
/// returned scale is the square root of the admissible heat fraction.
pub fn throttle_scale(
    temps: &DVector<f64>,
    network: &ThermalNetwork,
    mat: &SystemMatrices,
    demanded_heat: &[f64],
    cfg: &RewardConfig,
) -> f64 {
    let h = mat.h;
    let aux = HeatInput::aux(network).watts;
    let free = (&mat.a * temps - temps + &mat.b * aux) / h;
    let demand = &mat.b * node_vector(network, demanded_heat) / h;

    let mut scale = 1.0f64;
    for &i in network.motor_indices() {
        if demand[i] <= 0.0 {
            continue;
        }
        let slack = cfg.gamma_t * (cfg.t_max - temps[i]) - free[i] - THROTTLE_RATE_BACKOFF;
        let fraction = (slack / demand[i]).clamp(0.0, 1.0);
        scale = scale.min(fraction.sqrt());
    }
    scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Controller {
    /// Full demanded torque; stops at the first `T_max` crossing.
    #[default]
    Baseline,
    /// Barrier-filtered torque; always runs the full horizon.
    Throttled,
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Baseline => "baseline",
            Controller::Throttled => "throttled",
        }
    }
}

impl std::str::FromStr for Controller {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Controller::Baseline),
            "throttled" => Ok(Controller::Throttled),
            other => Err(format!("unknown controller {other:?} (expected baseline or throttled)")),
        }
    }
}

/// Everything an endurance run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnduranceScenario {
    pub network: ThermalNetwork,
    pub gait: GaitParams,
    pub actuation: ActuationParams,
    pub reward: RewardConfig,
    /// s
    pub horizon: f64,
    /// Thermal step, s.
    pub h: f64,
    /// Inner-loop samples per thermal step.
    pub window: usize,
    /// Per-motor starting temperatures; ambient when absent.
    pub initial_motor_temps: Option<Vec<f64>>,
    /// Highest ambient the gamma check must cover, °C.
    pub worst_case_ambient: f64,
}

impl EnduranceScenario {
    /// Placeholder robot, loaded trot, 1800 s at 50 Hz.
    pub fn demo() -> Self {
        EnduranceScenario {
            network: ThermalNetwork::placeholder(),
            gait: GaitParams::default(),
            actuation: ActuationParams::default(),
            reward: RewardConfig::default(),
            horizon: 1800.0,
            h: 0.02,
            window: crate::actuation::DEFAULT_WINDOW,
            initial_motor_temps: None,
            worst_case_ambient: 35.0,
        }
    }

    /// Structural checks plus the gamma feasibility check: `gamma_T` must
    /// not exceed the bound of the network at `worst_case_ambient`.
    pub fn validate(&self) -> Result<()> {
        self.gait.validate()?;
        self.reward.validate()?;
        let motors = self.network.motor_indices().len();
        if motors != 12 {
            return Err(Error::DimensionMismatch {
                what: "motors in network (gait synthesizer drives 12)",
                expected: 12,
                found: motors,
            });
        }
        self.actuation.validate(motors)?;
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "horizon",
                reason: format!("must be >= 0, got {}", self.horizon),
            });
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::NonPositiveStep(self.h));
        }
        if self.window == 0 {
            return Err(Error::EmptyWindow);
        }
        if let Some(t) = &self.initial_motor_temps {
            if t.len() != motors {
                return Err(Error::DimensionMismatch {
                    what: "initial_motor_temps",
                    expected: motors,
                    found: t.len(),
                });
            }
        }
        let mat = ContinuousGenerator::new(&self.network).discretize(self.h, Discretization::Exact)?;
        let bound = max_feasible_gamma(&mat, &self.network, &self.reward, self.worst_case_ambient)?;
        if !bound.admits(self.reward.gamma_t) {
            return Err(Error::InfeasibleGamma {
                gamma: self.reward.gamma_t,
                bound: bound.gamma,
            });
        }
        Ok(())
    }

    pub fn initial_state(&self) -> ThermalState {
        let mut state = ThermalState::ambient(&self.network);
        if let Some(temps) = &self.initial_motor_temps {
            for (&node, &t) in self.network.motor_indices().iter().zip(temps) {
                state.temperatures[node] = t;
            }
        }
        state
    }

    /// Applies a randomized episode: payload, ambient, motor temperatures
    /// and motor strength.
    pub fn with_episode(&self, episode: &SampledEpisodeConfig) -> Result<Self> {
        let mut out = self.clone();
        out.gait.payload_mass = episode.payload_mass;
        out.network = self.network.with_ambient(episode.ambient_temp)?;
        out.initial_motor_temps = Some(episode.init_motor_temps.clone());
        for limit in &mut out.actuation.torque_limit {
            *limit *= episode.motor_strength_scale;
        }
        Ok(out)
    }
}

/// Outcome of one endurance run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnduranceResult {
    pub controller: Controller,
    pub trace: SimulationTrace,
    /// First time any motor reached `T_max`, s.
    pub overheat_time: Option<f64>,
    /// Motor that crossed first, or the one with the highest peak.
    pub hottest_motor: Option<usize>,
    pub completed_horizon: bool,
    /// Torque scale applied each tick.
    pub scales: Vec<f64>,
    /// Applied RMS torque per tick and motor, N·m.
    pub rms_torque: Vec<Vec<f64>>,
    /// Mean motor-temperature reward row over the ticks.
    pub mean_thermal_penalty: f64,
    pub peak_motor_temperature: f64,
}

/// First time `series` reaches `threshold`, interpolating linearly between
/// the bracketing samples. A sample equal to the threshold counts.
pub fn time_to_threshold(series: &[(f64, f64)], threshold: f64) -> Option<f64> {
    let first = series.first()?;
    if first.1 >= threshold {
        return Some(first.0);
    }
    series.windows(2).find_map(|w| {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if v1 >= threshold {
            if v1 == threshold {
                Some(t1)
            } else {
                Some(t0 + (threshold - v0) / (v1 - v0) * (t1 - t0))
            }
        } else {
            None
        }
    })
}

/// Earliest threshold crossing over `nodes` in a trace, with the node.
pub fn first_crossing(trace: &SimulationTrace, nodes: &[usize], threshold: f64) -> Option<(f64, usize)> {
    nodes
        .iter()
        .filter_map(|&n| time_to_threshold(&trace.node_series(n), threshold).map(|t| (t, n)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

pub fn run_endurance(scenario: &EnduranceScenario, controller: Controller) -> Result<EnduranceResult> {
    scenario.validate()?;
    let network = &scenario.network;
    let mat = ContinuousGenerator::new(network).discretize(scenario.h, Discretization::Exact)?;
    let motors = network.motor_indices().to_vec();
    let cfg = &scenario.reward;
    let inner_dt = scenario.h / scenario.window as f64;
    let limits = &scenario.actuation.torque_limit;

    let mut state = scenario.initial_state();
    let mut states = vec![state.clone()];
    let mut inputs = Vec::new();
    let mut scales = Vec::new();
    let mut rms_log = Vec::new();
    let mut penalty_sum = 0.0;
    let mut overheat: Option<(f64, usize)> = motors
        .iter()
        .filter(|&&m| state.temperatures[m] >= cfg.t_max)
        .map(|&m| (state.time, m))
        .next();

    let steps = step_count(scenario.horizon, scenario.h);
    let stop_now = |o: &Option<(f64, usize)>| controller == Controller::Baseline && o.is_some();
    let mut ticks = 0;
    if !stop_now(&overheat) {
        for _ in 0..steps {
            let mut window = synth_gait_torques(&scenario.gait, state.time, scenario.window, inner_dt)?;
            for (j, mut col) in window.samples.column_iter_mut().enumerate() {
                col.apply(|t| *t = t.clamp(-limits[j], limits[j]));
            }
            let scale = match controller {
                Controller::Baseline => 1.0,
                Controller::Throttled => {
                    let demanded = joule_heat(&torque_rms(&window), &scenario.actuation)?;
                    throttle_scale(&state.temperatures, network, &mat, &demanded, cfg)
                }
            };
            let applied = window.scaled(scale);
            let rms = torque_rms(&applied);
            let joule = joule_heat(&rms, &scenario.actuation)?;
            let input = assemble_heat_input(&joule, network)?;
            let next = mat.step(&state, &input)?;

            let now: Vec<f64> = motors.iter().map(|&m| next.temperatures[m]).collect();
            let rate: Vec<f64> = motors
                .iter()
                .map(|&m| (next.temperatures[m] - state.temperatures[m]) / scenario.h)
                .collect();
            penalty_sum += thermal_penalty(&now, &rate, cfg);

            if overheat.is_none() {
                overheat = motors
                    .iter()
                    .filter_map(|&m| {
                        let series = [
                            (state.time, state.temperatures[m]),
                            (next.time, next.temperatures[m]),
                        ];
                        time_to_threshold(&series, cfg.t_max).map(|t| (t, m))
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0));
            }

            scales.push(scale);
            rms_log.push(rms);
            inputs.push(input);
            states.push(next.clone());
            state = next;
            ticks += 1;
            if stop_now(&overheat) {
                break;
            }
        }
    }
    let last_input = inputs
        .last()
        .cloned()
        .unwrap_or_else(|| HeatInput::aux(network));
    inputs.push(last_input);
    let trace = SimulationTrace { states, inputs };

    let peak = trace
        .states
        .iter()
        .flat_map(|s| motors.iter().map(move |&m| (s.temperatures[m], m)))
        .fold((f64::NEG_INFINITY, None), |acc, (t, m)| if t > acc.0 { (t, Some(m)) } else { acc });
    let hottest_motor = overheat.map(|(_, m)| m).or(peak.1);

    Ok(EnduranceResult {
        controller,
        completed_horizon: ticks == steps,
        overheat_time: overheat.map(|(t, _)| t),
        hottest_motor,
        scales,
        rms_torque: rms_log,
        mean_thermal_penalty: if ticks > 0 { penalty_sum / ticks as f64 } else { 0.0 },
        peak_motor_temperature: peak.0,
        trace,
    })
}

/// Per-run summary used by sweeps and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub overheat_time: Option<f64>,
    pub hottest_motor: Option<usize>,
    pub completed_horizon: bool,
    pub final_motor_temps: Vec<f64>,
    pub peak_motor_temperature: f64,
    pub mean_thermal_penalty: f64,
}

impl EnduranceResult {
    pub fn summary(&self, network: &ThermalNetwork) -> RunSummary {
        let last = self.trace.last();
        RunSummary {
            overheat_time: self.overheat_time,
            hottest_motor: self.hottest_motor,
            completed_horizon: self.completed_horizon,
            final_motor_temps: network
                .motor_indices()
                .iter()
                .map(|&m| last.temperatures[m])
                .collect(),
            peak_motor_temperature: self.peak_motor_temperature,
            mean_thermal_penalty: self.mean_thermal_penalty,
        }
    }
}

/// Fields a sweep variation may override. Absent fields keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    #[serde(default)]
    pub controller: Option<Controller>,
    #[serde(default)]
    pub payload_mass: Option<f64>,
    #[serde(default)]
    pub ambient: Option<f64>,
    /// Multiplies every base torque amplitude.
    #[serde(default)]
    pub amplitude_scale: Option<f64>,
    /// Uniform starting temperature of every motor.
    #[serde(default)]
    pub initial_motor_temp: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub gamma_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variation {
    pub label: String,
    #[serde(default)]
    pub overrides: ScenarioOverrides,
}

/// Base scenario shared by every sweep run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    pub scenario: EnduranceScenario,
    pub controller: Controller,
    /// When present, each seed draws an episode that is applied before the
    /// variation's overrides.
    pub randomization: Option<RandomizationRanges>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub seed: u64,
    pub controller: Controller,
    pub payload_mass: f64,
    pub ambient: f64,
    pub outcome: std::result::Result<RunSummary, String>,
}

impl ScenarioOverrides {
    pub fn apply(&self, scenario: &EnduranceScenario, controller: Controller) -> Result<(EnduranceScenario, Controller)> {
        let mut s = scenario.clone();
        if let Some(p) = self.payload_mass {
            s.gait.payload_mass = p;
        }
        if let Some(a) = self.ambient {
            s.network = s.network.with_ambient(a)?;
        }
        if let Some(k) = self.amplitude_scale {
            s.gait.base_torque_amplitude = s.gait.base_torque_amplitude.scaled(k);
        }
        if let Some(t) = self.initial_motor_temp {
            s.initial_motor_temps = Some(vec![t; s.network.motor_indices().len()]);
        }
        if let Some(h) = self.horizon {
            s.horizon = h;
        }
        if let Some(g) = self.gamma_t {
            s.reward.gamma_t = g;
        }
        Ok((s, self.controller.unwrap_or(controller)))
    }
}

fn sweep_job(base: &SweepBase, variation: &Variation, seed: u64) -> SweepRow {
    let prepared = (|| {
        let mut scenario = base.scenario.clone();
        if let Some(ranges) = &base.randomization {
            scenario = scenario.with_episode(&sample_episode(ranges, seed)?)?;
        }
        variation.overrides.apply(&scenario, base.controller)
    })();
    match prepared {
        Ok((scenario, controller)) => SweepRow {
            label: variation.label.clone(),
            seed,
            controller,
            payload_mass: scenario.gait.payload_mass,
            ambient: scenario.network.ambient(),
            outcome: run_endurance(&scenario, controller)
                .map(|r| r.summary(&scenario.network))
                .map_err(|e| e.to_string()),
        },
        Err(e) => SweepRow {
            label: variation.label.clone(),
            seed,
            controller: variation.overrides.controller.unwrap_or(base.controller),
            payload_mass: f64::NAN,
            ambient: f64::NAN,
            outcome: Err(e.to_string()),
        },
    }
}

/// Runs every `(variation, seed)` pair, in parallel, and returns one row per
/// run in variation-major, seed-minor input order. A failing run records its
/// error in its row.
pub fn sweep(base: &SweepBase, variations: &[Variation], seeds: &[u64]) -> Result<Vec<SweepRow>> {
    if variations.is_empty() {
        return Err(Error::InvalidParameter {
            field: "variations",
            reason: "sweep needs at least one variation".into(),
        });
    }
    let seeds: &[u64] = if seeds.is_empty() { &[0] } else { seeds };
    let jobs: Vec<(&Variation, u64)> = variations
        .iter()
        .flat_map(|v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(v, seed)| sweep_job(base, v, seed))
        .collect())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Sweep table as CSV. Columns: `label,seed,controller,payload_mass,ambient,
/// overheat_time,hottest_motor,completed_horizon,peak_motor_temp,
/// mean_thermal_penalty,final_T_0..final_T_{m-1},error`.
pub fn sweep_csv(rows: &[SweepRow], motors: usize) -> String {
    let mut header: Vec<String> = [
        "label",
        "seed",
        "controller",
        "payload_mass",
        "ambient",
        "overheat_time",
        "hottest_motor",
        "completed_horizon",
        "peak_motor_temp",
        "mean_thermal_penalty",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..motors).map(|k| format!("final_T_{k}")));
    header.push("error".into());
    let mut out = header.join(",");
    out.push('\n');

    for row in rows {
        let mut cols = vec![
            csv_field(&row.label),
            row.seed.to_string(),
            row.controller.name().to_string(),
            row.payload_mass.to_string(),
            row.ambient.to_string(),
        ];
        match &row.outcome {
            Ok(s) => {
                cols.push(opt(s.overheat_time));
                cols.push(opt(s.hottest_motor));
                cols.push(s.completed_horizon.to_string());
                cols.push(s.peak_motor_temperature.to_string());
                cols.push(s.mean_thermal_penalty.to_string());
                cols.extend((0..motors).map(|k| opt(s.final_motor_temps.get(k))));
                cols.push(String::new());
            }
            Err(e) => {
                cols.extend(std::iter::repeat_n(String::new(), 5 + motors));
                cols.push(csv_field(e));
            }
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
