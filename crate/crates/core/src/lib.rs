//! Tree-restricted low-congestion shortcuts for arbitrary graphs.
//!
//! The crate builds shortcuts whose congestion and block number scale with the
//! minor density of the host graph. Whenever a density guess is too small the
//! construction either still succeeds or hands back an explicit dense minor
//! that proves the guess was too small.
//!
//! Modules, bottom-up:
//!
//! * [`graph`]: graphs, BFS trees, partitions and diameter primitives.
//! * [`engine`]: the certifying shortcut construction.
//! * [`audit`]: congestion, dilation and block measurements, minor validation
//!   and the closed-form bounds they are compared against.
//! * [`generators`]: deterministic instance families.
//! * [`sim`]: a synchronous bandwidth-limited message-passing simulator and
//!   the partwise aggregation protocol.
//! * [`apps`]: Boruvka MST and component labeling on top of the simulator.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod apps;
pub mod audit;
pub mod engine;
pub mod generators;
pub mod graph;
pub mod ratio;
pub mod sim;

mod local;

pub use graph::{EdgeId, Graph, NodeId, Partition, RootedTree};
pub use ratio::Fraction;
