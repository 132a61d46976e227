//! Acceptance suite. Each criterion prints one PASS/FAIL line with the
//! measured value and its pinned tolerance; the test fails if any line fails.
//!
//! Run with `cargo test -p quadtherm-cli --test acceptance -- --nocapture`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use quadtherm::config::{load_scenario, parse_versioned};
use quadtherm::randomize::RandomizationRanges;
use quadtherm::{
    cbf_margin, max_feasible_gamma, run_endurance, sample_episode, simulate, synth_gait_torques,
    thermal_reward_term, total_reward, torque_rms, ContinuousGenerator, Controller, Discretization,
    HeatInput, RewardConfig, RobotSnapshot, ThermalNetwork, ThermalState,
};
use rand::Rng;
use support::{max_abs_diff, random_heat, random_network, random_temps, rk4, rng, two_node};

const ANALYTIC_TOL: f64 = 1e-9;
const ANALYTIC_BUDGET_S: f64 = 1.0;
const RK4_TOL: f64 = 1e-6;
const RK4_BUDGET_S: f64 = 10.0;
const ROW_SUM_TOL: f64 = 1e-10;
const ENTRY_FLOOR: f64 = -1e-12;
const FIXED_POINT_TOL: f64 = 1e-10;
const REWARD_TOL: f64 = 1e-12;
const GAMMA_TOL: f64 = 1e-9;
const MARGIN_FLOOR: f64 = -1e-9;
const OVERSHOOT_TOL: f64 = 0.5;
const ENDURANCE_BUDGET_S: f64 = 30.0;
const DRAWS: u64 = 10_000;
/// One-sample KS critical value at the 1% level, times sqrt(n).
const KS_COEFF: f64 = 1.63;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn read_config(name: &str) -> quadtherm::Result<String> {
    std::fs::read_to_string(configs().join(name)).map_err(|e| quadtherm::Error::Config {
        location: name.into(),
        message: e.to_string(),
    })
}

fn analytic_oracle() -> Verdict {
    let clock = Instant::now();
    let (c, r, ambient, start, q) = (0.5, 2.0, 35.0, 50.0, 4.0);
    let net = two_node(c, r, ambient);
    let mut worst: f64 = 0.0;
    for h in [0.001, 0.02, 1.0] {
        let init = ThermalState::new(&net, vec![start, ambient], 0.0).unwrap();
        let input = HeatInput::from_vec(vec![q, 0.0]);
        let trace = simulate(&net, &input, init, 60.0, h, Discretization::Exact).unwrap();
        for s in &trace.states {
            let decay = (-s.time / (r * c)).exp();
            let want = ambient + q * r * (1.0 - decay) + (start - ambient) * decay;
            worst = worst.max((s.temperatures[0] - want).abs());
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    verdict(
        worst <= ANALYTIC_TOL && secs < ANALYTIC_BUDGET_S,
        format!("max error {worst:.2e} °C (tol {ANALYTIC_TOL:e}), {secs:.3} s (budget {ANALYTIC_BUDGET_S} s)"),
    )
}

fn rk4_oracle() -> Verdict {
    let clock = Instant::now();
    let mut r = rng(2);
    let h = 0.02;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = r.random_range(3..=14);
        let net = random_network(&mut r, n);
        let x0 = random_temps(&mut r, &net);
        let q = random_heat(&mut r, &net);
        let mat = ContinuousGenerator::new(&net).discretize(h, Discretization::Exact).unwrap();
        let input = HeatInput::from_vec(q.clone());
        let mut state = ThermalState::new(&net, x0.clone(), 0.0).unwrap();
        let mut oracle = x0;
        for _ in 0..500 {
            state = mat.step(&state, &input).unwrap();
            oracle = rk4(&net, &oracle, &q, h, 20);
            worst = worst.max(max_abs_diff(state.temperatures.as_slice(), &oracle));
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    verdict(
        worst <= RK4_TOL && secs < RK4_BUDGET_S,
        format!("20 networks, max error {worst:.2e} °C (tol {RK4_TOL:e}), {secs:.3} s (budget {RK4_BUDGET_S} s)"),
    )
}

fn matrix_invariants() -> Verdict {
    let mut r = rng(3);
    let (mut row_err, mut min_entry, mut drift) = (0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let n = r.random_range(3..=14);
        let net = random_network(&mut r, n);
        let generator = ContinuousGenerator::new(&net);
        for h in [0.02, 0.5] {
            let mat = generator.discretize(h, Discretization::Exact).unwrap();
            for row in mat.a.row_iter() {
                row_err = row_err.max((row.sum() - 1.0).abs());
                min_entry = min_entry.min(row.min());
            }
            let still = ThermalState::ambient(&net);
            let next = mat.step(&still, &HeatInput::zeros(n)).unwrap();
            drift = drift.max((&next.temperatures - &still.temperatures).amax());
        }
    }
    verdict(
        row_err <= ROW_SUM_TOL && min_entry >= ENTRY_FLOOR && drift <= FIXED_POINT_TOL,
        format!(
            "row-sum error {row_err:.1e} (tol {ROW_SUM_TOL:e}), min entry {min_entry:.1e} (floor {ENTRY_FLOOR:e}), \
             fixed-point drift {drift:.1e} °C (tol {FIXED_POINT_TOL:e})"
        ),
    )
}

fn still_snapshot() -> RobotSnapshot {
    let mut s: RobotSnapshot = parse_versioned(&read_config("snapshot_tracking.json").unwrap()).unwrap();
    s.temperatures = [40.0; 12];
    s
}

fn reward_table() -> Verdict {
    let cfg = RewardConfig::default();
    let margin = cbf_margin(&[1.0], &[65.0], &cfg)[0];
    let mut margins = vec![0.0; 12];
    margins[0] = margin;
    let term = thermal_reward_term(&margins, &cfg);
    let tracking = total_reward(&still_snapshot(), &cfg).total;
    let mut fallen = still_snapshot();
    fallen.terminated = true;
    let termination = total_reward(&fallen, &cfg).total - tracking;

    let mut r = rng(4);
    let mut nonzero = 0;
    for _ in 0..1000 {
        let mut s = still_snapshot();
        for k in 0..12 {
            let t = r.random_range(20.0..80.0);
            let clipped = f64::clamp(t, cfg.clip_min, cfg.clip_max);
            s.temperatures[k] = t;
            s.temp_rate[k] = cfg.gamma_t * (cfg.t_max - clipped) - r.random_range(0.0..5.0);
        }
        if total_reward(&s, &cfg).get("motor_temperature") != Some(0.0) {
            nonzero += 1;
        }
    }
    let ok = (margin + 2.75).abs() <= REWARD_TOL
        && (term + 5.5).abs() <= REWARD_TOL
        && (tracking - 1.8).abs() <= REWARD_TOL
        && (termination + 200.0).abs() <= REWARD_TOL
        && nonzero == 0;
    verdict(
        ok,
        format!(
            "margin {margin} (want -2.75), term {term} (want -5.5), tracking {tracking} (want 1.8), \
             termination {termination} (want -200), nonzero penalties on feasible states {nonzero}/1000"
        ),
    )
}

fn gamma_feasibility() -> Verdict {
    let cfg = RewardConfig::default();
    let single: ThermalNetwork = parse_versioned(&read_config("single_motor_network.json").unwrap()).unwrap();
    let continuous = ContinuousGenerator::new(&single).discretize(0.02, Discretization::Euler).unwrap();
    let g_single = max_feasible_gamma(&continuous, &single, &cfg, 35.0).unwrap().gamma;

    let net: ThermalNetwork = parse_versioned(&read_config("placeholder_network.json").unwrap()).unwrap();
    let mat = ContinuousGenerator::new(&net).discretize(0.02, Discretization::Exact).unwrap();
    let bound = max_feasible_gamma(&mat, &net, &cfg, 35.0).unwrap();
    let min_margin = bound.margins.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        (g_single - 6.0).abs() <= GAMMA_TOL && bound.admits(cfg.gamma_t) && min_margin >= MARGIN_FLOOR,
        format!(
            "single motor gamma* {g_single} (want 6 ± {GAMMA_TOL:e}), placeholder gamma* {:.4} admits {}, \
             min margin {min_margin:.1e} (floor {MARGIN_FLOOR:e})",
            bound.gamma, cfg.gamma_t
        ),
    )
}

fn endurance_analog() -> Verdict {
    let clock = Instant::now();
    let loaded = load_scenario(&read_config("demo_scenario.json").unwrap(), &mut read_config).unwrap();
    let scenario = loaded.scenario;
    let base = run_endurance(&scenario, Controller::Baseline).unwrap();
    let thr = run_endurance(&scenario, Controller::Throttled).unwrap();

    // the baseline stops at its overheat, so compare against the
    // unthrottled demand it would have applied on every tick
    let inner_dt = scenario.h / scenario.window as f64;
    let mut dominated = true;
    for (k, applied) in thr.rms_torque.iter().enumerate() {
        let t = thr.trace.states[k].time;
        let mut demand = synth_gait_torques(&scenario.gait, t, scenario.window, inner_dt).unwrap();
        for (j, mut col) in demand.samples.column_iter_mut().enumerate() {
            let limit = scenario.actuation.torque_limit[j];
            col.apply(|x| *x = x.clamp(-limit, limit));
        }
        let full = torque_rms(&demand);
        if k < base.rms_torque.len() && base.rms_torque[k] != full {
            dominated = false;
        }
        dominated &= applied.iter().zip(&full).all(|(a, f)| a <= f);
    }
    let secs = clock.elapsed().as_secs_f64();
    let limit = scenario.reward.t_max + OVERSHOOT_TOL;
    let ok = base.overheat_time.is_some()
        && thr.completed_horizon
        && thr.peak_motor_temperature <= limit
        && dominated
        && secs < ENDURANCE_BUDGET_S;
    verdict(
        ok,
        format!(
            "baseline overheat {:?} s, throttled completed {} s with peak {:.3} °C (limit {limit}), \
             per-tick rms <= baseline {dominated}, {secs:.2} s (budget {ENDURANCE_BUDGET_S} s)",
            base.overheat_time,
            thr.trace.last().time.round(),
            thr.peak_motor_temperature
        ),
    )
}

fn ks_uniform(mut xs: Vec<f64>, lo: f64, hi: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn randomizer() -> Verdict {
    let ranges: RandomizationRanges = parse_versioned(&read_config("ranges.json").unwrap()).unwrap();
    let mut columns: Vec<(String, quadtherm::Range, Vec<f64>)> = Vec::new();
    let (mut outside, mut mismatched) = (0, 0);
    for seed in 0..DRAWS {
        let ep = sample_episode(&ranges, seed).unwrap();
        let bits = |e: &quadtherm::SampledEpisodeConfig| -> Vec<u64> {
            e.fields(&ranges).iter().map(|f| f.1.to_bits()).collect()
        };
        if bits(&sample_episode(&ranges, seed).unwrap()) != bits(&ep) {
            mismatched += 1;
        }
        for (k, (name, v, range)) in ep.fields(&ranges).into_iter().enumerate() {
            if !range.contains(v) {
                outside += 1;
            }
            if seed == 0 {
                columns.push((name, range, Vec::new()));
            }
            columns[k].2.push(v);
        }
    }
    let critical = KS_COEFF / (DRAWS as f64).sqrt();
    let (worst_field, worst_d) = columns
        .into_iter()
        .map(|(name, range, xs)| (name, ks_uniform(xs, range.min(), range.max())))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    verdict(
        outside == 0 && mismatched == 0 && worst_d < critical,
        format!(
            "{DRAWS} draws, {outside} out of range, {mismatched} replay mismatches, \
             max KS {worst_d:.4} on {worst_field} (critical {critical:.4})"
        ),
    )
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_quadtherm"))
            .arg("endurance")
            .arg("--config")
            .arg(configs().join("randomized_scenario.json"))
            .args(["--controller", "throttled", "--seed", "11", "--horizon", "120", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    verdict(
        a == b && !a.is_empty(),
        format!("two endurance invocations, {} and {} bytes, identical {}", a.len(), b.len(), a == b),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, Check); 8] = [
        ("analytic two-node oracle", analytic_oracle),
        ("fine-step RK4 oracle", rk4_oracle),
        ("matrix invariants", matrix_invariants),
        ("reward unit table", reward_table),
        ("gamma feasibility", gamma_feasibility),
        ("endurance analog", endurance_analog),
        ("randomizer", randomizer),
        ("end-to-end determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!("{} {}. {name}: {}", if v.pass { "PASS" } else { "FAIL" }, k + 1, v.detail);
        if !v.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
