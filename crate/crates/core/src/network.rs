//! Whole-body thermal graph: capacitance nodes joined by thermal resistances.
//!
//! The default layout has fourteen nodes. Motors occupy indices 0..=11 in
//! `(FL, FR, RL, RR) x (hip, thigh, knee)` order, node 12 is the onboard
//! computer and node 13 is the environment. CSV column order follows node
//! order, so this layout is part of the file format.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Leg names in default node order.
pub const LEGS: [&str; 4] = ["FL", "FR", "RL", "RR"];
/// Joint roles within a leg, in default node order.
pub const JOINTS: [&str; 3] = ["hip", "thigh", "knee"];

/// Number of motors on the default robot.
pub const DEFAULT_MOTORS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Motor,
    Computer,
    Environment,
}

/// A lumped thermal mass.
///
/// `capacitance` is ignored for the environment node, which is held at the
/// network's ambient temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalNode {
    pub id: usize,
    pub kind: NodeKind,
    /// J/°C
    pub capacitance: f64,
    /// Ω, motors only.
    #[serde(default)]
    pub winding_resistance: f64,
    /// Constant friction and driver heat, W.
    #[serde(default)]
    pub aux_heat: f64,
}

/// Thermal resistance between two nodes, °C/W. Stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalEdge {
    pub i: usize,
    pub j: usize,
    pub resistance: f64,
}

/// Validated thermal graph.
///
/// Construct with [`ThermalNetwork::new`] or deserialize; both paths run the
/// same validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct ThermalNetwork {
    nodes: Vec<ThermalNode>,
    edges: Vec<ThermalEdge>,
    ambient: f64,
    env_index: usize,
    motors: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    nodes: Vec<ThermalNode>,
    edges: Vec<ThermalEdge>,
    ambient: f64,
}

impl TryFrom<RawNetwork> for ThermalNetwork {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        ThermalNetwork::new(raw.nodes, raw.edges, raw.ambient)
    }
}

impl From<ThermalNetwork> for RawNetwork {
    fn from(net: ThermalNetwork) -> Self {
        RawNetwork {
            nodes: net.nodes,
            edges: net.edges,
            ambient: net.ambient,
        }
    }
}

impl ThermalNetwork {
    pub fn new(nodes: Vec<ThermalNode>, edges: Vec<ThermalEdge>, ambient: f64) -> Result<Self> {
        if !ambient.is_finite() {
            return Err(Error::InvalidParameter {
                field: "ambient",
                reason: format!("must be finite, got {ambient}"),
            });
        }

        let mut env = Vec::new();
        for (pos, node) in nodes.iter().enumerate() {
            if node.id != pos {
                return Err(Error::InvalidNode {
                    node: pos,
                    reason: format!("id {} does not match its position {pos}", node.id),
                });
            }
            match node.kind {
                NodeKind::Environment => env.push(pos),
                NodeKind::Motor | NodeKind::Computer => {
                    if !(node.capacitance > 0.0 && node.capacitance.is_finite()) {
                        return Err(Error::InvalidNode {
                            node: pos,
                            reason: format!(
                                "capacitance must be positive, got {}",
                                node.capacitance
                            ),
                        });
                    }
                }
            }
            if !(node.winding_resistance >= 0.0 && node.winding_resistance.is_finite()) {
                return Err(Error::InvalidNode {
                    node: pos,
                    reason: format!(
                        "winding_resistance must be >= 0, got {}",
                        node.winding_resistance
                    ),
                });
            }
            if node.kind != NodeKind::Motor && node.winding_resistance != 0.0 {
                return Err(Error::InvalidNode {
                    node: pos,
                    reason: "winding_resistance must be 0 for non-motor nodes".into(),
                });
            }
            if !node.aux_heat.is_finite() {
                return Err(Error::InvalidNode {
                    node: pos,
                    reason: "aux_heat must be finite".into(),
                });
            }
            if node.kind == NodeKind::Environment && node.aux_heat != 0.0 {
                return Err(Error::InvalidNode {
                    node: pos,
                    reason: "environment node cannot carry aux_heat".into(),
                });
            }
        }
        if env.len() != 1 {
            return Err(Error::EnvironmentCount(env.len()));
        }
        let env_index = env[0];

        let n = nodes.len();
        let mut seen = std::collections::HashSet::new();
        for (index, e) in edges.iter().enumerate() {
            let bad = |reason: &str| Error::InvalidEdge {
                index,
                i: e.i,
                j: e.j,
                reason: reason.to_string(),
            };
            if e.i >= n || e.j >= n {
                return Err(bad("node index out of range"));
            }
            if e.i == e.j {
                return Err(bad("self-edge"));
            }
            if e.i > e.j {
                return Err(bad("edges must be stored with i < j"));
            }
            if !(e.resistance > 0.0 && e.resistance.is_finite()) {
                return Err(bad(&format!("resistance must be positive, got {}", e.resistance)));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(bad("duplicate edge"));
            }
        }

        let net = ThermalNetwork {
            motors: nodes
                .iter()
                .filter(|n| n.kind == NodeKind::Motor)
                .map(|n| n.id)
                .collect(),
            nodes,
            edges,
            ambient,
            env_index,
        };
        net.check_connected()?;
        Ok(net)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.nodes.len();
        let adj = self.adjacency();
        let mut reached = vec![false; n];
        let mut queue = VecDeque::from([self.env_index]);
        reached[self.env_index] = true;
        while let Some(k) = queue.pop_front() {
            for &(m, _) in &adj[k] {
                if !reached[m] {
                    reached[m] = true;
                    queue.push_back(m);
                }
            }
        }
        match reached.iter().position(|r| !r) {
            Some(node) => Err(Error::Disconnected { node }),
            None => Ok(()),
        }
    }

    /// Neighbor lists `(node, resistance)` for every node.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.i].push((e.j, e.resistance));
            adj[e.j].push((e.i, e.resistance));
        }
        adj
    }

    pub fn nodes(&self) -> &[ThermalNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[ThermalEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ambient temperature T_E, °C.
    pub fn ambient(&self) -> f64 {
        self.ambient
    }

    pub fn env_index(&self) -> usize {
        self.env_index
    }

    /// Node indices of the motors, in node order.
    pub fn motor_indices(&self) -> &[usize] {
        &self.motors
    }

    /// Resistance of the edge joining `i` and `j`, in either order.
    pub fn resistance(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges
            .iter()
            .find(|e| e.i == a && e.j == b)
            .map(|e| e.resistance)
    }

    /// Same topology with a different ambient temperature.
    pub fn with_ambient(&self, ambient: f64) -> Result<Self> {
        ThermalNetwork::new(self.nodes.clone(), self.edges.clone(), ambient)
    }

    /// The shipped placeholder robot.
    ///
    /// These numbers are synthetic. They are chosen to have plausible
    /// magnitudes and are not identified from hardware:
    ///
    /// | quantity                         | value        |
    /// |----------------------------------|--------------|
    /// | motor capacitance                | 8 J/°C       |
    /// | motor winding resistance         | 0.12 Ω       |
    /// | motor aux heat                   | 0.5 W        |
    /// | motor -> environment             | 1.5 °C/W     |
    /// | hip-thigh, thigh-knee            | 3 °C/W       |
    /// | hip -> computer (through body)   | 4 °C/W       |
    /// | computer capacitance             | 150 J/°C     |
    /// | computer aux heat                | 6 W          |
    /// | computer -> environment          | 2 °C/W       |
    /// | ambient                          | 25 °C        |
    pub fn placeholder() -> Self {
        let mut nodes = Vec::with_capacity(14);
        for id in 0..DEFAULT_MOTORS {
            nodes.push(ThermalNode {
                id,
                kind: NodeKind::Motor,
                capacitance: 8.0,
                winding_resistance: 0.12,
                aux_heat: 0.5,
            });
        }
        nodes.push(ThermalNode {
            id: 12,
            kind: NodeKind::Computer,
            capacitance: 150.0,
            winding_resistance: 0.0,
            aux_heat: 6.0,
        });
        nodes.push(ThermalNode {
            id: 13,
            kind: NodeKind::Environment,
            capacitance: 0.0,
            winding_resistance: 0.0,
            aux_heat: 0.0,
        });

        let mut edges = Vec::new();
        for leg in 0..LEGS.len() {
            let hip = 3 * leg;
            edges.push(ThermalEdge { i: hip, j: hip + 1, resistance: 3.0 });
            edges.push(ThermalEdge { i: hip + 1, j: hip + 2, resistance: 3.0 });
            edges.push(ThermalEdge { i: hip, j: 12, resistance: 4.0 });
        }
        for motor in 0..DEFAULT_MOTORS {
            edges.push(ThermalEdge { i: motor, j: 13, resistance: 1.5 });
        }
        edges.push(ThermalEdge { i: 12, j: 13, resistance: 2.0 });

        ThermalNetwork::new(nodes, edges, 25.0).expect("placeholder network is valid")
    }
}

/// Human-readable name of a default-layout node.
pub fn default_node_name(id: usize) -> String {
    match id {
        0..=11 => format!("{}_{}", LEGS[id / 3], JOINTS[id % 3]),
        12 => "computer".into(),
        13 => "environment".into(),
        _ => format!("node_{id}"),
    }
}
