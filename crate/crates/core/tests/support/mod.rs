//! Random networks and a brute-force integrator that only reads the edge
//! list, so it shares no code with the generator under test.

#![allow(dead_code)]

use quadtherm::{NodeKind, ThermalEdge, ThermalNetwork, ThermalNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected network with `n` nodes; the last one is the environment and
/// node 0 is the computer when `n > 3`.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize) -> ThermalNetwork {
    assert!(n >= 2);
    let env = n - 1;
    let nodes = (0..n)
        .map(|id| {
            let kind = if id == env {
                NodeKind::Environment
            } else if id == 0 && n > 3 {
                NodeKind::Computer
            } else {
                NodeKind::Motor
            };
            let motor = kind == NodeKind::Motor;
            ThermalNode {
                id,
                kind,
                capacitance: if id == env { 0.0 } else { rng.random_range(1.0..50.0) },
                winding_resistance: if motor { rng.random_range(0.05..0.5) } else { 0.0 },
                aux_heat: if id == env { 0.0 } else { rng.random_range(0.0..2.0) },
            }
        })
        .collect();

    let mut pairs = std::collections::BTreeSet::new();
    for k in 1..n {
        let parent = rng.random_range(0..k);
        pairs.insert((parent, k));
    }
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(i, j)| ThermalEdge {
            i,
            j,
            resistance: rng.random_range(0.5..10.0),
        })
        .collect();
    ThermalNetwork::new(nodes, edges, rng.random_range(0.0..35.0)).unwrap()
}

/// Random temperatures for the non-environment nodes, ambient for the rest.
pub fn random_temps(rng: &mut ChaCha8Rng, net: &ThermalNetwork) -> Vec<f64> {
    (0..net.len())
        .map(|i| {
            if i == net.env_index() {
                net.ambient()
            } else {
                rng.random_range(0.0..80.0)
            }
        })
        .collect()
}

pub fn random_heat(rng: &mut ChaCha8Rng, net: &ThermalNetwork) -> Vec<f64> {
    (0..net.len())
        .map(|i| if i == net.env_index() { 0.0 } else { rng.random_range(0.0..20.0) })
        .collect()
}

/// dT/dt summed edge by edge.
pub fn derivative(net: &ThermalNetwork, t: &[f64], q: &[f64]) -> Vec<f64> {
    let mut watts = q.to_vec();
    for e in net.edges() {
        let flow = (t[e.j] - t[e.i]) / e.resistance;
        watts[e.i] += flow;
        watts[e.j] -= flow;
    }
    net.nodes()
        .iter()
        .zip(watts)
        .map(|(node, w)| {
            if node.kind == NodeKind::Environment {
                0.0
            } else {
                w / node.capacitance
            }
        })
        .collect()
}

/// Classical RK4 with constant heat over `duration`.
pub fn rk4(net: &ThermalNetwork, start: &[f64], q: &[f64], duration: f64, substeps: usize) -> Vec<f64> {
    let dt = duration / substeps as f64;
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let mut x = start.to_vec();
    for _ in 0..substeps {
        let k1 = derivative(net, &x, q);
        let k2 = derivative(net, &axpy(&x, &k1, dt / 2.0), q);
        let k3 = derivative(net, &axpy(&x, &k2, dt / 2.0), q);
        let k4 = derivative(net, &axpy(&x, &k3, dt), q);
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

/// One motor plus the environment.
pub fn two_node(capacitance: f64, resistance: f64, ambient: f64) -> ThermalNetwork {
    ThermalNetwork::new(
        vec![
            ThermalNode {
                id: 0,
                kind: NodeKind::Motor,
                capacitance,
                winding_resistance: 0.1,
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
        vec![ThermalEdge { i: 0, j: 1, resistance }],
        ambient,
    )
    .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
