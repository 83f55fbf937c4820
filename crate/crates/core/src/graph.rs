//! Immutable undirected graphs in Compressed Sparse Row form.

use alloc::vec::Vec;
use core::fmt;

use crate::VertexId;

/// Immutable graph in CSR form. Undirected edges are stored in both
/// directions, so `num_edges` counts directed edges.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<u64>,
    adjacency: Vec<VertexId>,
    symmetrized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// Offsets array is not a valid non-decreasing prefix array.
    BadOffsets,
    /// An adjacency entry references a vertex >= n.
    NeighborOutOfRange { vertex: VertexId, neighbor: VertexId },
    /// An adjacency run is not sorted ascending or contains duplicates.
    UnsortedAdjacency { vertex: VertexId },
    /// A self-loop was found.
    SelfLoop { vertex: VertexId },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::BadOffsets => write!(f, "offsets are not a valid prefix array"),
            GraphError::NeighborOutOfRange { vertex, neighbor } => {
                write!(f, "vertex {vertex} has out-of-range neighbor {neighbor}")
            }
            GraphError::UnsortedAdjacency { vertex } => {
                write!(f, "adjacency of vertex {vertex} is unsorted or has duplicates")
            }
            GraphError::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
        }
    }
}

impl Graph {
    /// Builds a graph from raw CSR arrays, validating every invariant.
    pub fn from_csr(
        offsets: Vec<u64>,
        adjacency: Vec<VertexId>,
        symmetrized: bool,
    ) -> Result<Self, GraphError> {
        if offsets.is_empty() || offsets[0] != 0 || *offsets.last().unwrap() != adjacency.len() as u64
        {
            return Err(GraphError::BadOffsets);
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(GraphError::BadOffsets);
        }
        let n = offsets.len() - 1;
        for u in 0..n {
            let run = &adjacency[offsets[u] as usize..offsets[u + 1] as usize];
            for pair in run.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(GraphError::UnsortedAdjacency { vertex: u as VertexId });
                }
            }
            for &v in run {
                if v as usize >= n {
                    return Err(GraphError::NeighborOutOfRange { vertex: u as VertexId, neighbor: v });
                }
                if v as usize == u {
                    return Err(GraphError::SelfLoop { vertex: u as VertexId });
                }
            }
        }
        Ok(Graph { offsets, adjacency, symmetrized })
    }

    /// Builds a graph from a directed edge list. Edges are sorted and
    /// deduplicated; self-loops must already be removed by the caller.
    pub fn from_edges(n: usize, mut edges: Vec<(VertexId, VertexId)>, symmetrized: bool) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency = Vec::with_capacity(edges.len());
        offsets.push(0u64);
        let mut next = 0usize;
        for &(u, v) in &edges {
            debug_assert!((u as usize) < n && (v as usize) < n && u != v);
            while next < u as usize {
                offsets.push(adjacency.len() as u64);
                next += 1;
            }
            adjacency.push(v);
        }
        while next < n {
            offsets.push(adjacency.len() as u64);
            next += 1;
        }
        Graph { offsets, adjacency, symmetrized }
    }

    /// CSR constructor that skips invariant validation. For callers that
    /// knowingly keep duplicate edges (dedupe disabled at parse time).
    pub fn from_csr_unchecked(offsets: Vec<u64>, adjacency: Vec<VertexId>, symmetrized: bool) -> Self {
        Graph { offsets, adjacency, symmetrized }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Directed edge count (each undirected edge counts twice).
    pub fn num_edges(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn degree(&self, u: VertexId) -> usize {
        (self.offsets[u as usize + 1] - self.offsets[u as usize]) as usize
    }

    /// Sorted neighbor slice of `u`.
    pub fn neighbors(&self, u: VertexId) -> &[VertexId] {
        &self.adjacency[self.offsets[u as usize] as usize..self.offsets[u as usize + 1] as usize]
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn adjacency(&self) -> &[VertexId] {
        &self.adjacency
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.num_vertices() as VertexId)
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.num_vertices())
            .field("m", &self.num_edges())
            .field("symmetrized", &self.symmetrized)
            .finish()
    }
}
