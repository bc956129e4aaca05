//! Diffusively coupled networks of nonlinear integrators with signed,
//! nonlinear edge functions.
//!
//! The crate covers the whole loop: building a network, simulating it,
//! labelling edges by passivity, collapsing two-terminal subnetworks into
//! equivalent edge functions by minimizing cocontent, and predicting whether
//! outputs agree, cluster or drift apart.

pub mod analysis;
pub mod circuit;
pub mod edgefn;
pub mod graph;
pub mod grid;
pub mod network;
pub mod nodes;
pub mod sim;

pub use edgefn::{EdgeFunction, Extrapolation, SampledTable, Sign, SignClass};
pub use graph::Graph;
pub use grid::Grid;
pub use network::NetworkSystem;
pub use nodes::NodeDynamics;

pub use analysis::{predict, Prediction, Verdict};
pub use circuit::{EquivalentEdgeTable, OperatingPoint};
pub use sim::{Outcome, OutcomeClass, SimConfig, Trajectory};
