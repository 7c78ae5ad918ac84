//! Ising partition functions and spin correlations on graphs embedded in the
//! plane or the flat torus, computed from signed sums over non-backtracking
//! walks and checked against brute-force oracles.

pub mod error;
pub mod faces;
pub mod fixtures;
pub mod geometry;
pub mod graph;
pub mod heaps;
pub mod ising;
pub mod loops;
pub mod methods;
pub mod precise;
pub mod subgraph;
pub mod verify;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{load_graph, Dart, EmbeddedGraph, Surface};
