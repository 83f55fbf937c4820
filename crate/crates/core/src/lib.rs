//! Core data model for block-based graph processing: immutable CSR graphs,
//! 2D rectilinear blocks, attribute storage, and the kernel-visible
//! primitives (`get_interval`, atomic cells).
//!
//! This crate is `no_std` + `alloc` so the data model can be reused from
//! constrained targets; all threading and IO live in the `blockgraph` crate.

#![no_std]

extern crate alloc;

pub mod attrs;
pub mod block;
pub mod graph;
pub mod interval;
pub mod partition;

pub use attrs::{AttributeStore, AtomicCellF64, AtomicCellI64, AtomicCellU64};
pub use block::{Block, BlockList, VertexRange};
pub use graph::{Graph, GraphError};
pub use interval::get_interval;
pub use partition::{BlockGrid, CutVector, PartitionError};

/// Vertex identifier. Graphs above `u32::MAX` vertices are out of range
/// for this build and rejected at the IO boundary.
pub type VertexId = u32;
