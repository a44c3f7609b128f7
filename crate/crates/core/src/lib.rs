//! Steiner point removal on weighted graphs.
//!
//! Given a graph and a set of terminals, [`spr::run_spr`] computes a graph
//! minor on the terminals alone whose shortest-path distances dominate the
//! original terminal distances and stay within a bounded factor of them.

pub mod artifacts;
pub mod graph;
pub mod harness;
pub mod io;
pub mod pairs;
pub mod planarity;
pub mod rng;
pub mod scattering;
pub mod shortcut;
pub mod spr;

pub use graph::{GraphError, Minor, TerminalSet, VertexId, WeightedGraph};
pub use pairs::PairSelection;
pub use spr::{run_spr, SprConfig, SprError, SprMinor};
