//! Exact coordinate descent for network steady states.
//!
//! Each step minimizes the energy exactly in one free node's potential while
//! the others are held fixed: the unconstrained minimizer is the
//! conductance-weighted average of the resistor neighbors plus the source
//! drive,
//!
//! ```text
//! p_k = (sum_j g_kj v_j + i_k) / sum_j g_kj,
//! ```
//!
//! clipped into the interval imposed by the diodes incident to the node.
//! Updates are applied in place (each update sees the latest neighbor
//! values), so the energy is non-increasing from one sweep to the next.

use std::error::Error;
use std::fmt;
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{CircuitGraph, PotentialState};

/// The diode bounds on one node cross: the feasible set is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibleBounds {
    /// Node whose feasible interval is empty.
    pub node: usize,
    /// Anode of the binding lower-bound diode `(lower_node, node)`.
    pub lower_node: usize,
    /// Cathode of the binding upper-bound diode `(node, upper_node)`.
    pub upper_node: usize,
    pub lower: f64,
    pub upper: f64,
}

impl fmt::Display for InfeasibleBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node {}: diodes ({},{}) and ({},{}) force {} <= v <= {}",
            self.node, self.lower_node, self.node, self.node, self.upper_node, self.lower,
            self.upper
        )
    }
}

impl Error for InfeasibleBounds {}

/// The network admits no steady state (empty feasible set).
#[derive(Debug, Clone, PartialEq)]
pub enum InfeasibleProblem {
    /// A free node's diode bounds cross.
    Bounds(InfeasibleBounds),
    /// A diode between two pinned nodes is violated by the source tree.
    PinnedDiode { index: usize, anode: usize, cathode: usize, excess: f64 },
}

impl fmt::Display for InfeasibleProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfeasibleProblem::Bounds(b) => write!(f, "infeasible: {b}"),
            InfeasibleProblem::PinnedDiode { anode, cathode, excess, .. } => write!(
                f,
                "infeasible: diode ({anode},{cathode}) between pinned nodes violated by {excess} V"
            ),
        }
    }
}

impl Error for InfeasibleProblem {}

impl From<InfeasibleBounds> for InfeasibleProblem {
    fn from(b: InfeasibleBounds) -> Self {
        InfeasibleProblem::Bounds(b)
    }
}

/// Order in which free nodes are visited within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Ascending,
    /// Fresh seeded permutation for every sweep.
    RandomPermutation,
}

/// Solver controls.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_sweeps: usize,
    /// Stop when the largest per-node change in a sweep drops below this;
    /// zero disables the check and all `max_sweeps` sweeps run.
    pub tol: f64,
    pub order: SweepOrder,
    pub rng_seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_sweeps: 10_000, tol: 1e-9, order: SweepOrder::Ascending, rng_seed: 0 }
    }
}

/// Energy and step size recorded after one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    pub energy: f64,
    pub max_delta_v: f64,
}

/// Summary of a solve run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub sweeps_run: usize,
    /// Energy of the starting state, before any sweep. The first sweep may
    /// raise the energy while it repairs an infeasible initialization; from
    /// then on the trace is non-increasing.
    pub initial_energy: f64,
    pub final_energy: f64,
    pub trace: Vec<SweepRecord>,
    pub converged: bool,
    pub max_delta_v: f64,
}

impl SolveReport {
    /// Writes the energy trace as CSV with columns `sweep,energy,max_delta_v`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "sweep,energy,max_delta_v")?;
        for rec in &self.trace {
            writeln!(w, "{},{},{}", rec.sweep, rec.energy, rec.max_delta_v)?;
        }
        Ok(())
    }
}

/// Sets free node `k` to the exact minimizer of the energy in its coordinate
/// and returns the new potential.
///
/// Requires `k` free with at least one incident resistor (guaranteed by
/// graph construction).
pub fn update_node(
    graph: &CircuitGraph,
    state: &mut PotentialState,
    k: usize,
) -> Result<f64, InfeasibleBounds> {
    debug_assert!(!state.pinned[k], "update_node called on pinned node {k}");
    let mut numerator = graph.cs_drive(k);
    for &(j, g) in graph.resistor_neighbors(k) {
        numerator += g * state.v[j];
    }
    let p = numerator / graph.conductance_sum(k);

    let mut lower = f64::NEG_INFINITY;
    let mut lower_node = usize::MAX;
    for &j in graph.lower_bound_nodes(k) {
        if state.v[j] > lower {
            lower = state.v[j];
            lower_node = j;
        }
    }
    let mut upper = f64::INFINITY;
    let mut upper_node = usize::MAX;
    for &j in graph.upper_bound_nodes(k) {
        if state.v[j] < upper {
            upper = state.v[j];
            upper_node = j;
        }
    }
    if lower > upper {
        return Err(InfeasibleBounds { node: k, lower_node, upper_node, lower, upper });
    }
    let v = p.max(lower).min(upper);
    state.v[k] = v;
    Ok(v)
}

/// Updates every node in `order` once, in place, returning the largest
/// absolute potential change.
pub fn sweep(
    graph: &CircuitGraph,
    state: &mut PotentialState,
    order: &[usize],
) -> Result<f64, InfeasibleBounds> {
    let mut max_delta: f64 = 0.0;
    for &k in order {
        let before = state.v[k];
        let after = update_node(graph, state, k)?;
        max_delta = max_delta.max((after - before).abs());
    }
    Ok(max_delta)
}

/// Computes the steady state starting from the pinned initialization
/// (free nodes at zero volts).
pub fn solve(
    graph: &CircuitGraph,
    options: &SolveOptions,
) -> Result<(PotentialState, SolveReport), InfeasibleProblem> {
    solve_from(graph, graph.pin_potentials(), options)
}

/// Computes the steady state starting from a caller-provided state (pinned
/// entries must match the source tree).
pub fn solve_from(
    graph: &CircuitGraph,
    mut state: PotentialState,
    options: &SolveOptions,
) -> Result<(PotentialState, SolveReport), InfeasibleProblem> {
    // A violated diode between two pinned nodes can never be repaired.
    for (index, d) in graph.diodes().iter().enumerate() {
        if graph.is_pinned(d.anode) && graph.is_pinned(d.cathode) {
            let excess = state.v[d.anode] - state.v[d.cathode];
            if excess > 0.0 {
                return Err(InfeasibleProblem::PinnedDiode {
                    index,
                    anode: d.anode,
                    cathode: d.cathode,
                    excess,
                });
            }
        }
    }

    let mut order = graph.free_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(options.rng_seed);
    let initial_energy = graph.energy(&state);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut max_delta_v = 0.0;

    for sweep_index in 1..=options.max_sweeps {
        if options.order == SweepOrder::RandomPermutation {
            order.shuffle(&mut rng);
        }
        let delta = sweep(graph, &mut state, &order)?;
        trace.push(SweepRecord { sweep: sweep_index, energy: graph.energy(&state), max_delta_v: delta });
        max_delta_v = delta;
        if options.tol > 0.0 && delta < options.tol {
            converged = true;
            break;
        }
    }

    let final_energy = trace.last().map_or(initial_energy, |r| r.energy);
    let report = SolveReport {
        sweeps_run: trace.len(),
        initial_energy,
        final_energy,
        trace,
        converged,
        max_delta_v,
    };
    Ok((state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CurrentSource, Diode, Resistor, VoltageSource};

    fn two_resistor_divider() -> CircuitGraph {
        // ground -- 1V source -- node 1, resistors 1-2 and 2-0, both 1 S.
        CircuitGraph::new(
            3,
            0,
            vec![
                Resistor { a: 1, b: 2, conductance: 1.0 },
                Resistor { a: 2, b: 0, conductance: 1.0 },
            ],
            vec![],
            vec![VoltageSource { plus: 1, minus: 0, volts: 1.0 }],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn update_node_averages_neighbors() {
        let g = two_resistor_divider();
        let mut state = g.pin_potentials();
        let v = update_node(&g, &mut state, 2).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(state.v[2], 0.5);
    }

    #[test]
    fn update_node_clips_at_lower_bound() {
        // Free node between two 1 S resistors to ground-pinned values 0 and 1,
        // a -0.6 A source pulling it to p = -0.3, and a diode from ground
        // bounding it at 0.
        let g = CircuitGraph::new(
            3,
            0,
            vec![
                Resistor { a: 0, b: 2, conductance: 1.0 },
                Resistor { a: 1, b: 2, conductance: 1.0 },
            ],
            vec![CurrentSource { from: 0, to: 2, amps: -0.6 }],
            vec![VoltageSource { plus: 1, minus: 0, volts: 0.0 }],
            vec![Diode { anode: 0, cathode: 2 }],
        )
        .unwrap();
        let mut state = g.pin_potentials();
        state.v[2] = 0.25;
        let v = update_node(&g, &mut state, 2).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn single_free_node_converges_in_one_sweep() {
        let g = two_resistor_divider();
        let (state, report) = solve(&g, &SolveOptions::default()).unwrap();
        assert_eq!(state.v[2], 0.5);
        assert!(report.converged);
        // one improving sweep plus one confirming sweep
        assert_eq!(report.sweeps_run, 2);
    }

    #[test]
    fn fixed_point_sweep_reports_zero_delta() {
        let g = two_resistor_divider();
        let mut state = g.pin_potentials();
        state.v[2] = 0.5;
        let order = g.free_nodes();
        let delta = sweep(&g, &mut state, &order).unwrap();
        assert_eq!(delta, 0.0);
    }

    #[test]
    fn crossing_bounds_reported_as_infeasible() {
        // Pinned nodes at 1 V and 0 V force 1 <= v[3] <= 0 through diodes.
        let g = CircuitGraph::new(
            4,
            0,
            vec![Resistor { a: 0, b: 3, conductance: 1.0 }],
            vec![],
            vec![
                VoltageSource { plus: 1, minus: 0, volts: 1.0 },
                VoltageSource { plus: 2, minus: 0, volts: 0.0 },
            ],
            vec![Diode { anode: 1, cathode: 3 }, Diode { anode: 3, cathode: 2 }],
        )
        .unwrap();
        let err = solve(&g, &SolveOptions::default()).unwrap_err();
        match err {
            InfeasibleProblem::Bounds(b) => {
                assert_eq!(b.node, 3);
                assert_eq!(b.lower_node, 1);
                assert_eq!(b.upper_node, 2);
            }
            other => panic!("expected crossing bounds, got {other:?}"),
        }
    }

    #[test]
    fn violated_pinned_diode_is_infeasible() {
        let g = CircuitGraph::new(
            3,
            0,
            vec![Resistor { a: 0, b: 2, conductance: 1.0 }],
            vec![],
            vec![VoltageSource { plus: 1, minus: 0, volts: 1.0 }],
            vec![Diode { anode: 1, cathode: 0 }],
        )
        .unwrap();
        let err = solve(&g, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, InfeasibleProblem::PinnedDiode { anode: 1, cathode: 0, .. }));
    }

    #[test]
    fn trace_csv_row_count_matches_sweeps() {
        let g = two_resistor_divider();
        let (_, report) = solve(&g, &SolveOptions::default()).unwrap();
        let mut buf = Vec::new();
        report.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + report.sweeps_run);
    }
}
