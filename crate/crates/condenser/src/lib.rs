//! Discrete p-harmonic potential theory on weighted graphs.
//!
//! The crate computes condenser capacities, capacitary potentials and
//! normalized Green functions for the discrete p-energy
//! Σ_edges c_e |u_i - u_j|^p on finite weighted graphs, together with
//! closed-form radial oracles, a volume-growth hyperbolicity classifier,
//! and truncated Dirichlet solvers with explicit boundary values at
//! infinity. Unbounded spaces are emulated: a finite graph plus an
//! exhaustion schedule stands in for an unbounded space, and every limit
//! at infinity becomes a monotone stage sequence with a stopping rule.

pub mod capacity;
pub mod error;
pub mod model;
pub mod oracle;
pub mod perron;
pub mod potential;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    ball_set, build_grid, exhaust, ExhaustionSchedule, GridSpec, NodeSet, RadialSpace,
    RadialWeight, Weight, WeightedGraph,
};
pub use solver::{p_energy, PartialField, ScalarField, SolverConfig};
