//! Blocks (tiles of the adjacency matrix) and ordered block-lists.

use alloc::vec::Vec;

use crate::VertexId;

/// Half-open interval of global vertex ids. Blocks cut the vertex order
/// into contiguous ranges, so local<->global mapping is a single offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexRange {
    pub start: VertexId,
    pub end: VertexId,
}

impl VertexRange {
    pub fn new(start: VertexId, end: VertexId) -> Self {
        debug_assert!(start <= end);
        VertexRange { start, end }
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.start <= v && v < self.end
    }

    pub fn to_local(&self, global: VertexId) -> VertexId {
        debug_assert!(self.contains(global));
        global - self.start
    }

    pub fn to_global(&self, local: VertexId) -> VertexId {
        debug_assert!((local as usize) < self.len());
        self.start + local
    }

    pub fn iter_global(&self) -> impl Iterator<Item = VertexId> {
        self.start..self.end
    }
}

/// One tile of the 2D-partitioned graph: the edges from source interval
/// `sources` to destination interval `destinations`, stored as a local CSR
/// over dense local ids.
#[derive(Clone, Debug)]
pub struct Block {
    id: usize,
    row: usize,
    col: usize,
    sources: VertexRange,
    destinations: VertexRange,
    offsets: Vec<u64>,
    adjacency: Vec<VertexId>,
}

impl Block {
    pub fn new(
        id: usize,
        row: usize,
        col: usize,
        sources: VertexRange,
        destinations: VertexRange,
        offsets: Vec<u64>,
        adjacency: Vec<VertexId>,
    ) -> Self {
        debug_assert_eq!(offsets.len(), sources.len() + 1);
        debug_assert_eq!(*offsets.last().unwrap_or(&0) as usize, adjacency.len());
        Block { id, row, col, sources, destinations, offsets, adjacency }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn row(&self) -> usize {
        self.row
    }

    pub fn col(&self) -> usize {
        self.col
    }

    /// Source vertex interval (global ids).
    pub fn sources(&self) -> VertexRange {
        self.sources
    }

    /// Destination vertex interval (global ids).
    pub fn destinations(&self) -> VertexRange {
        self.destinations
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Ascending local-destination neighbors of local source `u` within
    /// this block only.
    pub fn edges(&self, u: VertexId) -> &[VertexId] {
        debug_assert!((u as usize) < self.sources.len(), "local source id out of range");
        &self.adjacency[self.offsets[u as usize] as usize..self.offsets[u as usize + 1] as usize]
    }

    /// Expands the block to global (u, v) edge tuples.
    pub fn global_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.sources.len() as VertexId).flat_map(move |u| {
            self.edges(u).iter().map(move |&v| (self.sources.to_global(u), self.destinations.to_global(v)))
        })
    }

    /// Coordinate-list form, derived from the CSR on demand.
    pub fn to_coo(&self) -> Vec<(VertexId, VertexId)> {
        (0..self.sources.len() as VertexId)
            .flat_map(|u| self.edges(u).iter().map(move |&v| (u, v)))
            .collect()
    }

    /// Compact coordinate list: the source column run-length compressed
    /// into (local source, run length) pairs, plus the destination column.
    pub fn to_ccoo(&self) -> (Vec<(VertexId, u32)>, Vec<VertexId>) {
        let mut runs = Vec::new();
        for u in 0..self.sources.len() as VertexId {
            let deg = self.edges(u).len();
            if deg > 0 {
                runs.push((u, deg as u32));
            }
        }
        (runs, self.adjacency.clone())
    }

    /// Bytes this block occupies when copied into a device arena.
    pub fn footprint_bytes(&self) -> u64 {
        self.offsets.len() as u64 * 8 + self.adjacency.len() as u64 * 4
    }
}

/// Ordered list of block references (by id); the input unit of a kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockList {
    pub list_id: usize,
    pub block_ids: Vec<usize>,
    pub weight: f64,
}

impl BlockList {
    pub fn new(list_id: usize, block_ids: Vec<usize>) -> Self {
        BlockList { list_id, block_ids, weight: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.block_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_ids.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn range_mapping_identity_block() {
        let r = VertexRange::new(0, 4);
        assert_eq!(r.to_global(3), 3);
        assert_eq!(r.to_local(2), 2);
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn range_mapping_offset_block() {
        // block (row 1, col 0) of cuts [0,3,6]: sources 3..6, dests 0..3
        let s = VertexRange::new(3, 6);
        let d = VertexRange::new(0, 3);
        assert_eq!(s.iter_global().collect::<Vec<_>>(), vec![3, 4, 5]);
        assert_eq!(d.iter_global().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(s.to_local(4), 1);
    }

    #[test]
    fn block_edges_and_coo() {
        // K3 in one block
        let b = Block::new(
            0,
            0,
            0,
            VertexRange::new(0, 3),
            VertexRange::new(0, 3),
            vec![0, 2, 4, 6],
            vec![1, 2, 0, 2, 0, 1],
        );
        assert_eq!(b.edges(0), &[1, 2]);
        assert_eq!(b.num_edges(), 6);
        assert_eq!(b.to_coo()[0], (0, 1));
        let (runs, dests) = b.to_ccoo();
        assert_eq!(runs, vec![(0, 2), (1, 2), (2, 2)]);
        assert_eq!(dests.len(), 6);
    }

    #[test]
    fn isolated_vertex_has_no_edges() {
        let b = Block::new(
            0,
            0,
            0,
            VertexRange::new(0, 1),
            VertexRange::new(0, 1),
            vec![0, 0],
            vec![],
        );
        assert!(b.edges(0).is_empty());
        let (runs, _) = b.to_ccoo();
        assert!(runs.is_empty());
    }
}
