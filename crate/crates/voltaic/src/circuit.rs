//! Ideal nonlinear resistive networks as graphs of single-element branches.
//!
//! A network is made of four ideal elements: linear resistors (`i = g v`),
//! constant current sources, constant voltage sources, and ideal diodes
//! (`i = 0` for `v < 0`, `v = 0` for `i > 0`). The network state is the
//! vector of node electrical potentials. The physically realized steady
//! state is the feasible configuration minimizing the energy
//!
//! ```text
//! E(v) = 1/2 * sum_R g_jk (v_j - v_k)^2 + sum_CS i_jk (v_j - v_k)
//! ```
//!
//! over the feasible set defined by the diode inequalities `v_j <= v_k` and
//! the voltage-source equalities `v_j = v_k + v0`.
//!
//! Voltage sources are required to form a single tree containing the ground
//! node, so every node they touch has its potential fixed ("pinned") once
//! ground is set to zero volts. All remaining nodes are free variables.

use std::collections::VecDeque;
use std::error::Error;
use std::fmt;

/// Linear resistor between nodes `a` and `b` with conductance `conductance > 0` siemens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resistor {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
}

/// Constant current source driving `amps` from node `from` into node `to`.
///
/// Contributes `amps * (v_from - v_to)` to the network energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentSource {
    pub from: usize,
    pub to: usize,
    pub amps: f64,
}

/// Constant voltage source enforcing `v[plus] = v[minus] + volts`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageSource {
    pub plus: usize,
    pub minus: usize,
    pub volts: f64,
}

/// Ideal diode constraining `v[anode] <= v[cathode]`.
///
/// In the off-state no current flows and the voltage across is negative; in
/// the on-state a nonnegative current flows from anode to cathode at zero
/// voltage drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diode {
    pub anode: usize,
    pub cathode: usize,
}

/// Construction-time validation failure for a [`CircuitGraph`].
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitError {
    /// The network must contain at least one node.
    NoNodes,
    /// Ground index does not name a node.
    GroundOutOfRange { ground: usize, n_nodes: usize },
    /// A branch endpoint does not name a node.
    NodeOutOfRange { node: usize, n_nodes: usize },
    /// A branch connects a node to itself.
    SelfLoop { node: usize },
    /// Resistor conductances must be finite and strictly positive.
    NonPositiveConductance { a: usize, b: usize, conductance: f64 },
    /// Source values must be finite.
    NonFiniteValue { description: String },
    /// The voltage-source branches contain a cycle.
    VoltageSourceCycle,
    /// A voltage-source branch is not connected to ground through other
    /// voltage sources.
    VoltageSourceDisconnected { node: usize },
    /// A free node has no incident resistor, so its coordinate update is
    /// undefined (zero denominator).
    IsolatedFreeNode { node: usize },
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::NoNodes => write!(f, "network has no nodes"),
            CircuitError::GroundOutOfRange { ground, n_nodes } => {
                write!(f, "ground index {ground} out of range for {n_nodes} nodes")
            }
            CircuitError::NodeOutOfRange { node, n_nodes } => {
                write!(f, "node index {node} out of range for {n_nodes} nodes")
            }
            CircuitError::SelfLoop { node } => {
                write!(f, "branch connects node {node} to itself")
            }
            CircuitError::NonPositiveConductance { a, b, conductance } => {
                write!(f, "resistor ({a},{b}) has non-positive conductance {conductance}")
            }
            CircuitError::NonFiniteValue { description } => {
                write!(f, "non-finite value: {description}")
            }
            CircuitError::VoltageSourceCycle => {
                write!(f, "voltage sources contain a cycle; they must form a tree")
            }
            CircuitError::VoltageSourceDisconnected { node } => {
                write!(
                    f,
                    "voltage source at node {node} is not connected to ground; \
                     voltage sources must form a single tree containing ground"
                )
            }
            CircuitError::IsolatedFreeNode { node } => {
                write!(f, "free node {node} has no incident resistor")
            }
        }
    }
}

impl Error for CircuitError {}

/// A validated ideal nonlinear resistive network.
///
/// Immutable after construction; adjacency and pinning information derived
/// from the branch lists is precomputed once. Shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGraph {
    n_nodes: usize,
    ground: usize,
    resistors: Vec<Resistor>,
    current_sources: Vec<CurrentSource>,
    voltage_sources: Vec<VoltageSource>,
    diodes: Vec<Diode>,
    // Derived, per node:
    resistor_neighbors: Vec<Vec<(usize, f64)>>,
    conductance_sum: Vec<f64>,
    cs_drive: Vec<f64>,
    lower_bound_nodes: Vec<Vec<usize>>,
    upper_bound_nodes: Vec<Vec<usize>>,
    pinned: Vec<bool>,
    pinned_value: Vec<f64>,
}

impl CircuitGraph {
    /// Validates the branch lists and precomputes adjacency and the pinned
    /// potentials implied by the voltage-source tree.
    pub fn new(
        n_nodes: usize,
        ground: usize,
        resistors: Vec<Resistor>,
        current_sources: Vec<CurrentSource>,
        voltage_sources: Vec<VoltageSource>,
        diodes: Vec<Diode>,
    ) -> Result<Self, CircuitError> {
        if n_nodes == 0 {
            return Err(CircuitError::NoNodes);
        }
        if ground >= n_nodes {
            return Err(CircuitError::GroundOutOfRange { ground, n_nodes });
        }
        let check = |a: usize, b: usize| -> Result<(), CircuitError> {
            for node in [a, b] {
                if node >= n_nodes {
                    return Err(CircuitError::NodeOutOfRange { node, n_nodes });
                }
            }
            if a == b {
                return Err(CircuitError::SelfLoop { node: a });
            }
            Ok(())
        };

        let mut resistor_neighbors = vec![Vec::new(); n_nodes];
        let mut conductance_sum = vec![0.0; n_nodes];
        for r in &resistors {
            check(r.a, r.b)?;
            if !(r.conductance > 0.0) || !r.conductance.is_finite() {
                return Err(CircuitError::NonPositiveConductance {
                    a: r.a,
                    b: r.b,
                    conductance: r.conductance,
                });
            }
            resistor_neighbors[r.a].push((r.b, r.conductance));
            resistor_neighbors[r.b].push((r.a, r.conductance));
            conductance_sum[r.a] += r.conductance;
            conductance_sum[r.b] += r.conductance;
        }

        let mut cs_drive = vec![0.0; n_nodes];
        for (i, cs) in current_sources.iter().enumerate() {
            check(cs.from, cs.to)?;
            if !cs.amps.is_finite() {
                return Err(CircuitError::NonFiniteValue {
                    description: format!("current source #{i} ({},{})", cs.from, cs.to),
                });
            }
            cs_drive[cs.to] += cs.amps;
            cs_drive[cs.from] -= cs.amps;
        }

        let mut lower_bound_nodes = vec![Vec::new(); n_nodes];
        let mut upper_bound_nodes = vec![Vec::new(); n_nodes];
        for d in &diodes {
            check(d.anode, d.cathode)?;
            // v[anode] <= v[cathode]: the anode bounds the cathode from below
            // and the cathode bounds the anode from above.
            lower_bound_nodes[d.cathode].push(d.anode);
            upper_bound_nodes[d.anode].push(d.cathode);
        }

        for (i, vs) in voltage_sources.iter().enumerate() {
            check(vs.plus, vs.minus)?;
            if !vs.volts.is_finite() {
                return Err(CircuitError::NonFiniteValue {
                    description: format!("voltage source #{i} ({},{})", vs.plus, vs.minus),
                });
            }
        }

        // The voltage sources must form a single tree containing ground.
        // Breadth-first propagation from ground assigns each tree node the
        // unique potential implied by v[plus] = v[minus] + volts; revisiting a
        // node means the edges contain a cycle.
        let mut vs_adjacency = vec![Vec::new(); n_nodes];
        for (i, vs) in voltage_sources.iter().enumerate() {
            vs_adjacency[vs.plus].push(i);
            vs_adjacency[vs.minus].push(i);
        }
        let mut pinned = vec![false; n_nodes];
        let mut pinned_value = vec![0.0; n_nodes];
        let mut visited_edges = vec![false; voltage_sources.len()];
        pinned[ground] = true;
        let mut queue = VecDeque::from([ground]);
        while let Some(node) = queue.pop_front() {
            for &ei in &vs_adjacency[node] {
                if visited_edges[ei] {
                    continue;
                }
                visited_edges[ei] = true;
                let vs = &voltage_sources[ei];
                let (other, value) = if vs.plus == node {
                    (vs.minus, pinned_value[node] - vs.volts)
                } else {
                    (vs.plus, pinned_value[node] + vs.volts)
                };
                if pinned[other] {
                    return Err(CircuitError::VoltageSourceCycle);
                }
                pinned[other] = true;
                pinned_value[other] = value;
                queue.push_back(other);
            }
        }
        for vs in &voltage_sources {
            for node in [vs.plus, vs.minus] {
                if !pinned[node] {
                    return Err(CircuitError::VoltageSourceDisconnected { node });
                }
            }
        }

        for node in 0..n_nodes {
            if !pinned[node] && resistor_neighbors[node].is_empty() {
                return Err(CircuitError::IsolatedFreeNode { node });
            }
        }

        Ok(CircuitGraph {
            n_nodes,
            ground,
            resistors,
            current_sources,
            voltage_sources,
            diodes,
            resistor_neighbors,
            conductance_sum,
            cs_drive,
            lower_bound_nodes,
            upper_bound_nodes,
            pinned,
            pinned_value,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn resistors(&self) -> &[Resistor] {
        &self.resistors
    }

    pub fn current_sources(&self) -> &[CurrentSource] {
        &self.current_sources
    }

    pub fn voltage_sources(&self) -> &[VoltageSource] {
        &self.voltage_sources
    }

    pub fn diodes(&self) -> &[Diode] {
        &self.diodes
    }

    /// Resistor neighbors of `node` as `(other_node, conductance)` pairs,
    /// with one entry per branch (parallel resistors appear separately).
    pub fn resistor_neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.resistor_neighbors[node]
    }

    /// Total conductance incident to `node`.
    pub fn conductance_sum(&self, node: usize) -> f64 {
        self.conductance_sum[node]
    }

    /// Net source current flowing into `node`.
    pub fn cs_drive(&self, node: usize) -> f64 {
        self.cs_drive[node]
    }

    /// Nodes `j` with a diode `(j, node)`, i.e. sources of lower bounds
    /// `v[node] >= v[j]`.
    pub fn lower_bound_nodes(&self, node: usize) -> &[usize] {
        &self.lower_bound_nodes[node]
    }

    /// Nodes `j` with a diode `(node, j)`, i.e. sources of upper bounds
    /// `v[node] <= v[j]`.
    pub fn upper_bound_nodes(&self, node: usize) -> &[usize] {
        &self.upper_bound_nodes[node]
    }

    /// Whether the node's potential is fixed by the voltage-source tree.
    pub fn is_pinned(&self, node: usize) -> bool {
        self.pinned[node]
    }

    /// Indices of nodes not pinned by the voltage-source tree, ascending.
    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes).filter(|&n| !self.pinned[n]).collect()
    }

    /// Network energy: half the resistor-dissipated power plus the
    /// current-source power.
    pub fn energy(&self, state: &PotentialState) -> f64 {
        assert_eq!(state.v.len(), self.n_nodes, "state length mismatch");
        let mut e = 0.0;
        for r in &self.resistors {
            let dv = state.v[r.a] - state.v[r.b];
            e += 0.5 * r.conductance * dv * dv;
        }
        for cs in &self.current_sources {
            e += cs.amps * (state.v[cs.from] - state.v[cs.to]);
        }
        e
    }

    /// State with ground at zero volts, every voltage-source tree node at its
    /// implied potential, and all free nodes at zero.
    pub fn pin_potentials(&self) -> PotentialState {
        PotentialState {
            v: self.pinned_value.clone(),
            pinned: self.pinned.clone(),
        }
    }

    /// Checks every diode inequality and voltage-source equality against
    /// `tol`, collecting the offending branches.
    pub fn check_feasible(&self, state: &PotentialState, tol: f64) -> FeasibilityReport {
        let mut violations = Vec::new();
        for (index, d) in self.diodes.iter().enumerate() {
            let excess = state.v[d.anode] - state.v[d.cathode];
            if excess > tol {
                violations.push(ConstraintViolation::Diode {
                    index,
                    anode: d.anode,
                    cathode: d.cathode,
                    excess,
                });
            }
        }
        for (index, vs) in self.voltage_sources.iter().enumerate() {
            let error = state.v[vs.plus] - state.v[vs.minus] - vs.volts;
            if error.abs() > tol {
                violations.push(ConstraintViolation::VoltageSource {
                    index,
                    plus: vs.plus,
                    minus: vs.minus,
                    error,
                });
            }
        }
        FeasibilityReport { violations }
    }
}

/// Node electrical potentials plus the mask of nodes fixed by the
/// voltage-source tree. Pinned entries never change during descent.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState {
    pub v: Vec<f64>,
    pub pinned: Vec<bool>,
}

impl PotentialState {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

/// One violated constraint found by [`CircuitGraph::check_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    /// Diode `(anode, cathode)` with `v[anode] - v[cathode] = excess > tol`.
    Diode { index: usize, anode: usize, cathode: usize, excess: f64 },
    /// Voltage source with `v[plus] - v[minus] - volts = error`, `|error| > tol`.
    VoltageSource { index: usize, plus: usize, minus: usize, error: f64 },
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintViolation::Diode { anode, cathode, excess, .. } => {
                write!(f, "diode ({anode},{cathode}) violated by {excess:.3e} V")
            }
            ConstraintViolation::VoltageSource { plus, minus, error, .. } => {
                write!(f, "voltage source ({plus},{minus}) off by {error:.3e} V")
            }
        }
    }
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<ConstraintViolation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}
