//! Block-based graph processing: IO, partition-aware runtime with a
//! heterogeneity-modeling scheduler, and the shipped graph kernels.

pub mod algorithm;
pub mod algorithms;
pub mod bench;
pub mod gen;
pub mod io;
pub mod queue;
pub mod runtime;

pub use blockgraph_core as core;
pub use blockgraph_core::{
    AttributeStore, Block, BlockGrid, BlockList, CutVector, Graph, VertexId,
};
