//! Continuous thermal dynamics, zero-order-hold discretization and stepping.
//!
//! For every non-environment node `i`
//!
//! ```text
//! C_i dT_i/dt = -sum_{j in N(i)} (T_i - T_j) / R_ij + Q_i
//! ```
//!
//! and the environment node is held at the ambient temperature. Written as
//! `dT/dt = G T + diag(1/C) Q`, the generator `G` is Metzler with zero row
//! sums, so it is singular. Exact discretization therefore goes through the
//! augmented exponential
//!
//! ```text
//! exp([[G, Bc], [0, 0]] h) = [[A(h), B(h)], [0, I]]
//! ```
//!
//! which needs no inverse of `G`. One step is `T(k+1) = A T(k) + B Q(k)`.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::network::ThermalNetwork;

/// Node temperatures at an instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    /// °C, one entry per node.
    pub temperatures: DVector<f64>,
    /// s
    pub time: f64,
}

impl ThermalState {
    /// Every node at ambient.
    pub fn ambient(network: &ThermalNetwork) -> Self {
        Self::uniform(network, network.ambient())
    }

    /// Every non-environment node at `temp`; the environment stays at ambient.
    pub fn uniform(network: &ThermalNetwork, temp: f64) -> Self {
        let mut temperatures = DVector::from_element(network.len(), temp);
        temperatures[network.env_index()] = network.ambient();
        ThermalState {
            temperatures,
            time: 0.0,
        }
    }

    /// Explicit temperatures. The environment entry must equal the ambient.
    pub fn new(network: &ThermalNetwork, temperatures: Vec<f64>, time: f64) -> Result<Self> {
        if temperatures.len() != network.len() {
            return Err(Error::DimensionMismatch {
                what: "initial temperatures",
                expected: network.len(),
                found: temperatures.len(),
            });
        }
        let env = network.env_index();
        if temperatures[env] != network.ambient() {
            return Err(Error::InvalidParameter {
                field: "temperatures",
                reason: format!(
                    "environment entry {} must equal ambient {}",
                    temperatures[env],
                    network.ambient()
                ),
            });
        }
        if let Some(k) = temperatures.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "temperatures",
                reason: format!("entry {k} is not finite"),
            });
        }
        Ok(ThermalState {
            temperatures: DVector::from_vec(temperatures),
            time,
        })
    }
}

/// Heat generated at each node, W.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatInput {
    pub watts: DVector<f64>,
}

impl HeatInput {
    pub fn zeros(n: usize) -> Self {
        HeatInput {
            watts: DVector::zeros(n),
        }
    }

    pub fn from_vec(watts: Vec<f64>) -> Self {
        HeatInput {
            watts: DVector::from_vec(watts),
        }
    }

    /// The constant `aux_heat` of every node.
    pub fn aux(network: &ThermalNetwork) -> Self {
        HeatInput::from_vec(network.nodes().iter().map(|n| n.aux_heat).collect())
    }

    fn check(&self, n: usize, env: usize) -> Result<()> {
        if self.watts.len() != n {
            return Err(Error::DimensionMismatch {
                what: "heat input",
                expected: n,
                found: self.watts.len(),
            });
        }
        if let Some(node) = self.watts.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidInput {
                node,
                reason: "not finite".into(),
            });
        }
        if self.watts[env] != 0.0 {
            return Err(Error::InvalidInput {
                node: env,
                reason: "environment node cannot receive heat".into(),
            });
        }
        Ok(())
    }
}

/// `dT/dt = conduction * T + input_map * Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousGenerator {
    /// 1/s. Row `i` holds `1/(C_i R_ij)` off the diagonal and their negated
    /// sum on it. The environment row is zero.
    pub conduction: DMatrix<f64>,
    /// Diagonal `1/C_i`, °C/J. Zero for the environment.
    pub input_map: DMatrix<f64>,
    pub env_index: usize,
}

impl ContinuousGenerator {
    pub fn new(network: &ThermalNetwork) -> Self {
        let n = network.len();
        let env = network.env_index();
        let mut conduction = DMatrix::zeros(n, n);
        let mut input_map = DMatrix::zeros(n, n);
        for (i, neighbors) in network.adjacency().iter().enumerate() {
            if i == env {
                continue;
            }
            let c = network.nodes()[i].capacitance;
            let mut diag = 0.0;
            for &(j, r) in neighbors {
                let g = 1.0 / (c * r);
                conduction[(i, j)] += g;
                diag += g;
            }
            conduction[(i, i)] = -diag;
            input_map[(i, i)] = 1.0 / c;
        }
        ContinuousGenerator {
            conduction,
            input_map,
            env_index: env,
        }
    }

    pub fn len(&self) -> usize {
        self.conduction.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Instantaneous `dT/dt`, °C/s.
    pub fn rate(&self, temperatures: &DVector<f64>, input: &HeatInput) -> DVector<f64> {
        &self.conduction * temperatures + &self.input_map * &input.watts
    }

    /// Largest `h` for which forward Euler is stable, `2 / max |G_ii|`.
    pub fn euler_stability_bound(&self) -> f64 {
        let max_diag = (0..self.len())
            .map(|i| self.conduction[(i, i)].abs())
            .fold(0.0, f64::max);
        if max_diag == 0.0 {
            f64::INFINITY
        } else {
            2.0 / max_diag
        }
    }

    pub fn discretize(&self, h: f64, method: Discretization) -> Result<SystemMatrices> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonPositiveStep(h));
        }
        let n = self.len();
        let (a, b) = match method {
            Discretization::Exact => {
                let mut aug = DMatrix::zeros(2 * n, 2 * n);
                aug.view_mut((0, 0), (n, n)).copy_from(&(&self.conduction * h));
                aug.view_mut((0, n), (n, n)).copy_from(&(&self.input_map * h));
                let e = expm(&aug);
                (
                    e.view((0, 0), (n, n)).into_owned(),
                    e.view((0, n), (n, n)).into_owned(),
                )
            }
            Discretization::Euler => (
                DMatrix::identity(n, n) + &self.conduction * h,
                &self.input_map * h,
            ),
        };
        let unstable = method == Discretization::Euler && h > self.euler_stability_bound();
        Ok(SystemMatrices {
            a,
            b,
            h,
            method,
            env_index: self.env_index,
            unstable,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// Zero-order hold through the matrix exponential.
    #[default]
    Exact,
    /// Forward Euler, `A = I + G h`, `B = diag(1/C) h`.
    Euler,
}

/// Discrete-time pair `(A(h), B(h))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: DMatrix<f64>,
    /// °C per J.
    pub b: DMatrix<f64>,
    pub h: f64,
    pub method: Discretization,
    pub env_index: usize,
    /// Set for Euler matrices built above the stability bound.
    pub unstable: bool,
}

impl SystemMatrices {
    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `x(k+1) = A x(k) + B u(k)`.
    pub fn step(&self, state: &ThermalState, input: &HeatInput) -> Result<ThermalState> {
        let n = self.len();
        if state.temperatures.len() != n {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: n,
                found: state.temperatures.len(),
            });
        }
        input.check(n, self.env_index)?;
        let mut next = &self.a * &state.temperatures + &self.b * &input.watts;
        next[self.env_index] = state.temperatures[self.env_index];
        Ok(ThermalState {
            temperatures: next,
            time: state.time + self.h,
        })
    }
}

/// Heat flowing into node `i` from node `j`, W. Negative when `i` is hotter.
pub fn pairwise_flow(state: &ThermalState, network: &ThermalNetwork, i: usize, j: usize) -> Result<f64> {
    let r = network.resistance(i, j).ok_or(Error::NotAnEdge { i, j })?;
    let t = &state.temperatures;
    Ok(-(t[i] - t[j]) / r)
}

/// A single motor coupled only to the environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleNode {
    /// J/°C
    pub capacitance: f64,
    /// motor to environment, °C/W
    pub resistance: f64,
    /// winding resistance, Ω
    pub winding_resistance: f64,
    /// °C
    pub ambient: f64,
}

impl SingleNode {
    pub fn time_constant(&self) -> f64 {
        self.resistance * self.capacitance
    }

    /// Closed-form temperature under constant heat `q` (W).
    pub fn temperature_with_heat(&self, initial: f64, q: f64, t: f64) -> f64 {
        let decay = (-t / self.time_constant()).exp();
        self.ambient + q * self.resistance * (1.0 - decay) + (initial - self.ambient) * decay
    }
}

/// First-order motor temperature at time `t` under constant winding current.
pub fn single_node_analytic(model: &SingleNode, initial: f64, current: f64, t: f64) -> f64 {
    let q = current * current * model.winding_resistance;
    model.temperature_with_heat(initial, q, t)
}

/// Temperatures at which every non-environment node has zero net heat flow.
pub fn steady_state(network: &ThermalNetwork, input: &HeatInput) -> Result<DVector<f64>> {
    let n = network.len();
    let env = network.env_index();
    input.check(n, env)?;

    // unknowns are the non-environment nodes, in node order
    let free: Vec<usize> = (0..n).filter(|&k| k != env).collect();
    let mut slot = vec![usize::MAX; n];
    for (s, &k) in free.iter().enumerate() {
        slot[k] = s;
    }
    let m = free.len();
    let mut lhs = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for e in network.edges() {
        let g = 1.0 / e.resistance;
        for (a, b) in [(e.i, e.j), (e.j, e.i)] {
            if a == env {
                continue;
            }
            lhs[(slot[a], slot[a])] += g;
            if b == env {
                rhs[slot[a]] += g * network.ambient();
            } else {
                lhs[(slot[a], slot[b])] -= g;
            }
        }
    }
    for (s, &k) in free.iter().enumerate() {
        rhs[s] += input.watts[k];
    }
    let solved = lhs.lu().solve(&rhs).ok_or(Error::Singular)?;

    let mut out = DVector::from_element(n, network.ambient());
    for (s, &k) in free.iter().enumerate() {
        out[k] = solved[s];
    }
    Ok(out)
}

/// Heat input as a function of time.
pub trait InputSchedule {
    fn heat_at(&self, t: f64) -> HeatInput;
}

impl<F> InputSchedule for F
where
    F: Fn(f64) -> HeatInput,
{
    fn heat_at(&self, t: f64) -> HeatInput {
        self(t)
    }
}

impl InputSchedule for HeatInput {
    fn heat_at(&self, _t: f64) -> HeatInput {
        self.clone()
    }
}

/// Piecewise-constant schedule: segment `k` applies from its `start` until
/// the next segment begins. Times before the first segment get zero heat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSchedule {
    pub segments: Vec<ScheduleSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSegment {
    /// s
    pub start: f64,
    /// W per node
    pub watts: Vec<f64>,
}

impl PiecewiseSchedule {
    /// Checks ordering and lengths against `network`.
    pub fn validate(&self, network: &ThermalNetwork) -> Result<()> {
        for (k, seg) in self.segments.iter().enumerate() {
            if seg.watts.len() != network.len() {
                return Err(Error::DimensionMismatch {
                    what: "schedule segment watts",
                    expected: network.len(),
                    found: seg.watts.len(),
                });
            }
            if !seg.start.is_finite() || (k > 0 && seg.start <= self.segments[k - 1].start) {
                return Err(Error::InvalidParameter {
                    field: "segments",
                    reason: format!("segment {k} start times must be finite and increasing"),
                });
            }
            HeatInput::from_vec(seg.watts.clone()).check(network.len(), network.env_index())?;
        }
        Ok(())
    }
}

impl InputSchedule for PiecewiseSchedule {
    fn heat_at(&self, t: f64) -> HeatInput {
        let n = self.segments.first().map_or(0, |s| s.watts.len());
        match self.segments.iter().rev().find(|s| s.start <= t) {
            Some(seg) => HeatInput::from_vec(seg.watts.clone()),
            None => HeatInput::zeros(n),
        }
    }
}

/// Sampled trajectory. `inputs[k]` is the heat held from `states[k]` onward;
/// the final row repeats the schedule evaluated at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub states: Vec<ThermalState>,
    pub inputs: Vec<HeatInput>,
}

impl SimulationTrace {
    pub fn new(initial: ThermalState, input: HeatInput) -> Self {
        SimulationTrace {
            states: vec![initial],
            inputs: vec![input],
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &ThermalState {
        self.states.last().expect("trace holds at least the initial state")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.time)
    }

    /// `(time, temperature)` series for one node.
    pub fn node_series(&self, node: usize) -> Vec<(f64, f64)> {
        self.states
            .iter()
            .map(|s| (s.time, s.temperatures[node]))
            .collect()
    }

    /// Header row: `t,T_0..T_{n-1},Q_0..Q_{n-1}`.
    pub fn csv_header(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.temperatures.len());
        let mut cols = vec!["t".to_string()];
        cols.extend((0..n).map(|k| format!("T_{k}")));
        cols.extend((0..n).map(|k| format!("Q_{k}")));
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        for (state, input) in self.states.iter().zip(&self.inputs) {
            let mut line = format!("{}", state.time);
            for v in state.temperatures.iter().chain(input.watts.iter()) {
                line.push(',');
                line.push_str(&v.to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// Number of whole steps of size `h` that fit in `horizon`.
pub fn step_count(horizon: f64, h: f64) -> usize {
    let ratio = horizon / h;
    (ratio + 1e-9 * ratio.max(1.0)).floor() as usize
}

/// Simulates from `initial` for `horizon` seconds with step `h`.
pub fn simulate<S: InputSchedule + ?Sized>(
    network: &ThermalNetwork,
    schedule: &S,
    initial: ThermalState,
    horizon: f64,
    h: f64,
    method: Discretization,
) -> Result<SimulationTrace> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "horizon",
            reason: format!("must be >= 0, got {horizon}"),
        });
    }
    let mat = ContinuousGenerator::new(network).discretize(h, method)?;
    let steps = step_count(horizon, h);
    let first_input = schedule.heat_at(initial.time);
    first_input.check(network.len(), network.env_index())?;
    let mut trace = SimulationTrace::new(initial, first_input);
    for _ in 0..steps {
        let input = trace.inputs.last().unwrap();
        let next = mat.step(trace.last(), input)?;
        let next_input = schedule.heat_at(next.time);
        trace.states.push(next);
        trace.inputs.push(next_input);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{NodeKind, ThermalEdge, ThermalNode};
    use approx::assert_abs_diff_eq;

    pub(crate) fn single_motor(c: f64, r: f64, ambient: f64) -> ThermalNetwork {
        ThermalNetwork::new(
            vec![
                ThermalNode {
                    id: 0,
                    kind: NodeKind::Motor,
                    capacitance: c,
                    winding_resistance: 0.0,
                    aux_heat: 0.0,
                },
                ThermalNode {
                    id: 1,
                    kind: NodeKind::Environment,
                    capacitance: 0.0,
                    winding_resistance: 0.0,
                    aux_heat: 0.0,
                },
            ],
            vec![ThermalEdge { i: 0, j: 1, resistance: r }],
            ambient,
        )
        .unwrap()
    }

    fn chain() -> ThermalNetwork {
        let motor = |id, c| ThermalNode {
            id,
            kind: NodeKind::Motor,
            capacitance: c,
            winding_resistance: 0.1,
            aux_heat: 0.0,
        };
        ThermalNetwork::new(
            vec![
                motor(0, 2.0),
                motor(1, 4.0),
                ThermalNode {
                    id: 2,
                    kind: NodeKind::Environment,
                    capacitance: 0.0,
                    winding_resistance: 0.0,
                    aux_heat: 0.0,
                },
            ],
            vec![
                ThermalEdge { i: 0, j: 1, resistance: 5.0 },
                ThermalEdge { i: 1, j: 2, resistance: 0.5 },
            ],
            20.0,
        )
        .unwrap()
    }

    #[test]
    fn generator_single_motor() {
        let g = ContinuousGenerator::new(&single_motor(0.5, 2.0, 35.0));
        assert_eq!(g.conduction.row(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, 1.0]);
        assert_eq!(g.conduction.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        assert_eq!(g.input_map[(0, 0)], 2.0);
        assert_eq!(g.input_map[(1, 1)], 0.0);
    }

    #[test]
    fn generator_chain_hand_expansion() {
        // node 0: C=2, neighbor 1 via R=5      -> 1/(2*5) = 0.1
        // node 1: C=4, neighbor 0 via R=5      -> 1/(4*5) = 0.05
        //              neighbor env via R=0.5  -> 1/(4*0.5) = 0.5
        let g = ContinuousGenerator::new(&chain());
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[-0.1, 0.1, 0.0, 0.05, -0.55, 0.5, 0.0, 0.0, 0.0],
        );
        assert_abs_diff_eq!(g.conduction, expected, epsilon = 1e-15);
        let uniform = DVector::from_element(3, 42.0);
        assert_abs_diff_eq!(&g.conduction * uniform, DVector::zeros(3), epsilon = 1e-12);
    }

    #[test]
    fn discretize_small_step_is_identity() {
        let g = ContinuousGenerator::new(&ThermalNetwork::placeholder());
        let m = g.discretize(1e-9, Discretization::Exact).unwrap();
        let err = (&m.a - DMatrix::identity(14, 14)).norm();
        assert!(err < 1e-6, "{err}");
        assert!(m.b.norm() < 1e-6);
    }

    #[test]
    fn discretize_scalar_exponential() {
        let g = ContinuousGenerator::new(&single_motor(0.5, 2.0, 0.0));
        let m = g.discretize(1.0, Discretization::Exact).unwrap();
        assert_abs_diff_eq!(m.a[(0, 0)], (-1f64).exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(m.a[(0, 0)], 0.367879441171, epsilon = 1e-12);
        // B = (1 - e^-1) * R for this node
        assert_abs_diff_eq!(m.b[(0, 0)], 2.0 * (1.0 - (-1f64).exp()), epsilon = 1e-13);
        assert_eq!(m.a.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0]);
        assert_eq!(m.b.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
    }

    #[test]
    fn discretize_rejects_bad_step() {
        let g = ContinuousGenerator::new(&chain());
        assert_eq!(
            g.discretize(0.0, Discretization::Exact).unwrap_err(),
            Error::NonPositiveStep(0.0)
        );
        assert!(g.discretize(-1.0, Discretization::Euler).is_err());
    }

    #[test]
    fn euler_warning_flag() {
        let g = ContinuousGenerator::new(&chain());
        let bound = g.euler_stability_bound();
        assert_abs_diff_eq!(bound, 2.0 / 0.55, epsilon = 1e-12);
        assert!(!g.discretize(bound * 0.9, Discretization::Euler).unwrap().unstable);
        assert!(g.discretize(bound * 1.1, Discretization::Euler).unwrap().unstable);
        assert!(!g.discretize(bound * 10.0, Discretization::Exact).unwrap().unstable);
    }

    #[test]
    fn euler_matrix_error_is_second_order() {
        let g = ContinuousGenerator::new(&ThermalNetwork::placeholder());
        let err = |h: f64| {
            let e = g.discretize(h, Discretization::Exact).unwrap();
            let u = g.discretize(h, Discretization::Euler).unwrap();
            (&e.a - &u.a).norm()
        };
        for h in [0.04, 0.02, 0.01] {
            let ratio = err(h) / err(h / 2.0);
            assert!((ratio - 4.0).abs() < 0.2, "h={h}, ratio={ratio}");
        }
    }

    #[test]
    fn step_fixed_point_and_errors() {
        let net = ThermalNetwork::placeholder();
        let m = ContinuousGenerator::new(&net)
            .discretize(0.02, Discretization::Exact)
            .unwrap();
        let s = ThermalState::ambient(&net);
        let next = m.step(&s, &HeatInput::zeros(14)).unwrap();
        assert_abs_diff_eq!(next.temperatures, s.temperatures, epsilon = 1e-10);
        assert_abs_diff_eq!(next.time, 0.02);

        assert!(matches!(
            m.step(&s, &HeatInput::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut hot_env = HeatInput::zeros(14);
        hot_env.watts[13] = 1.0;
        assert!(matches!(m.step(&s, &hot_env), Err(Error::InvalidInput { node: 13, .. })));
    }

    #[test]
    fn flow_examples() {
        let net = chain();
        let mut s = ThermalState::ambient(&net);
        s.temperatures[0] = 60.0;
        s.temperatures[1] = 35.0;
        assert_abs_diff_eq!(pairwise_flow(&s, &net, 0, 1).unwrap(), -5.0);
        assert_abs_diff_eq!(pairwise_flow(&s, &net, 1, 0).unwrap(), 5.0);
        assert_eq!(
            pairwise_flow(&s, &net, 0, 2).unwrap_err(),
            Error::NotAnEdge { i: 0, j: 2 }
        );
        s.temperatures[1] = 60.0;
        assert_eq!(pairwise_flow(&s, &net, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn analytic_examples() {
        let m = SingleNode {
            capacitance: 0.5,
            resistance: 2.0,
            winding_resistance: 1.0,
            ambient: 0.0,
        };
        assert_abs_diff_eq!(single_node_analytic(&m, 0.0, 1.0, 1.0), 1.264241117657, epsilon = 1e-11);
        assert_abs_diff_eq!(single_node_analytic(&m, 0.0, 1.0, 1e4), 2.0, epsilon = 1e-12);
        let warm = SingleNode { ambient: 35.0, ..m };
        for t in [0.0, 0.3, 10.0] {
            assert_eq!(single_node_analytic(&warm, 35.0, 0.0, t), 35.0);
        }
    }

    #[test]
    fn steady_state_examples() {
        let net = single_motor(0.5, 2.0, 35.0);
        let ss = steady_state(&net, &HeatInput::from_vec(vec![1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(ss[0], 37.0, epsilon = 1e-12);
        assert_eq!(ss[1], 35.0);

        let net = ThermalNetwork::placeholder();
        let ss = steady_state(&net, &HeatInput::zeros(14)).unwrap();
        assert_abs_diff_eq!(ss, DVector::from_element(14, 25.0), epsilon = 1e-10);
    }

    #[test]
    fn simulate_zero_horizon_and_repeated_steps() {
        let net = chain();
        let input = HeatInput::from_vec(vec![2.0, 1.0, 0.0]);
        let trace = simulate(&net, &input, ThermalState::ambient(&net), 0.0, 0.1, Discretization::Exact).unwrap();
        assert_eq!(trace.len(), 1);

        let trace = simulate(&net, &input, ThermalState::ambient(&net), 1.0, 0.1, Discretization::Exact).unwrap();
        assert_eq!(trace.len(), 11);
        let m = ContinuousGenerator::new(&net)
            .discretize(0.1, Discretization::Exact)
            .unwrap();
        let mut s = ThermalState::ambient(&net);
        for k in 0..10 {
            s = m.step(&s, &input).unwrap();
            assert_eq!(s, trace.states[k + 1]);
        }
    }

    #[test]
    fn piecewise_schedule_lookup() {
        let sched = PiecewiseSchedule {
            segments: vec![
                ScheduleSegment { start: 0.0, watts: vec![1.0, 0.0, 0.0] },
                ScheduleSegment { start: 2.0, watts: vec![0.0, 3.0, 0.0] },
            ],
        };
        sched.validate(&chain()).unwrap();
        assert_eq!(sched.heat_at(-1.0).watts.as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(sched.heat_at(1.99).watts.as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(sched.heat_at(2.0).watts.as_slice(), &[0.0, 3.0, 0.0]);
    }

    #[test]
    fn csv_layout() {
        let net = single_motor(1.0, 1.0, 20.0);
        let trace = simulate(
            &net,
            &HeatInput::from_vec(vec![1.0, 0.0]),
            ThermalState::ambient(&net),
            0.5,
            0.25,
            Discretization::Exact,
        )
        .unwrap();
        let csv = trace.to_csv_string();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,T_0,T_1,Q_0,Q_1");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,20,20,1,0");
    }
}
