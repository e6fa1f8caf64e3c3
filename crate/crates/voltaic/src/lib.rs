//! Simulation and training of ideal nonlinear resistive networks.
//!
//! The steady state of a network of ideal resistors, diodes, voltage sources
//! and current sources is the solution of a convex quadratic program: the
//! node potentials minimize the dissipated power over the set of
//! configurations allowed by the diodes and sources. This crate computes
//! steady states by exact coordinate descent, certifies them against a
//! brute-force KKT solver, and trains layered resistive networks with
//! equilibrium propagation.
//!
//! - [`circuit`] — network representation, energy, pinning, feasibility
//! - [`netlist`] — text format for arbitrary networks
//! - [`solver`] — exact coordinate descent for arbitrary topologies
//! - [`oracle`] — active-set enumeration and KKT residual certification
//! - [`verify`] — randomized cross-validation of solver against oracle
//! - [`drn`] — deep resistive networks with exact block coordinate descent
//! - [`hopfield`] — deep Hopfield networks and the resistive-to-Hopfield map
//! - [`ep`] — equilibrium-propagation training and gradient checking
//! - [`data`] — MNIST IDX loading, synthetic datasets, target encoding
//! - [`model_io`] — binary model containers

pub mod circuit;
pub mod netlist;
pub mod solver;

pub use circuit::{
    CircuitError, CircuitGraph, ConstraintViolation, CurrentSource, Diode, FeasibilityReport,
    PotentialState, Resistor, VoltageSource,
};
pub use netlist::{parse_netlist, serialize_netlist, NetlistError};
pub use solver::{
    solve, solve_from, sweep, update_node, InfeasibleBounds, InfeasibleProblem, SolveOptions,
    SolveReport, SweepOrder, SweepRecord,
};
