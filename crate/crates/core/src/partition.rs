//! Symmetric 2D rectilinear partitioning and block construction.
//!
//! Row and column cuts are the same vector (conformal tiling), block ids
//! are row-major, and every directed edge lands in exactly one block.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::block::{Block, VertexRange};
use crate::graph::Graph;
use crate::VertexId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionError {
    /// p must be at least 1.
    ZeroParts,
}

impl fmt::Display for PartitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionError::ZeroParts => write!(f, "partition count must be >= 1"),
        }
    }
}

/// p+1 cut positions over the vertex order; shared by rows and columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutVector {
    cuts: Vec<VertexId>,
}

impl CutVector {
    pub fn new(cuts: Vec<VertexId>) -> Self {
        debug_assert!(cuts.len() >= 2);
        debug_assert_eq!(cuts[0], 0);
        debug_assert!(cuts.windows(2).all(|w| w[0] <= w[1]));
        CutVector { cuts }
    }

    pub fn parts(&self) -> usize {
        self.cuts.len() - 1
    }

    pub fn cuts(&self) -> &[VertexId] {
        &self.cuts
    }

    pub fn range(&self, part: usize) -> VertexRange {
        VertexRange::new(self.cuts[part], self.cuts[part + 1])
    }

    /// Part index owning global vertex `v`.
    pub fn part_of(&self, v: VertexId) -> usize {
        // cuts are sorted; partition_point yields the first cut > v
        self.cuts.partition_point(|&c| c <= v) - 1
    }
}

/// Balanced-degree-prefix symmetric cuts: cut j is the smallest index
/// where the degree prefix sum reaches j/p of the total. Deterministic.
pub fn symmetric_cuts(graph: &Graph, p: usize) -> Result<CutVector, PartitionError> {
    if p == 0 {
        return Err(PartitionError::ZeroParts);
    }
    let n = graph.num_vertices();
    let total = graph.num_edges() as u128;
    let mut cuts = Vec::with_capacity(p + 1);
    cuts.push(0 as VertexId);
    let mut prefix: u128 = 0;
    let mut v = 0usize;
    for j in 1..p {
        // smallest index where prefix*p >= j*total
        while v < n && prefix * (p as u128) < j as u128 * total {
            prefix += graph.degree(v as VertexId) as u128;
            v += 1;
        }
        cuts.push(v as VertexId);
    }
    cuts.push(n as VertexId);
    fixup_strict(&mut cuts, n);
    Ok(CutVector::new(cuts))
}

/// Makes cuts strictly increasing where n allows it (trailing empty parts
/// only when p > n).
fn fixup_strict(cuts: &mut [VertexId], n: usize) {
    let p = cuts.len() - 1;
    if p <= n {
        for j in 1..p {
            if cuts[j] <= cuts[j - 1] {
                cuts[j] = cuts[j - 1] + 1;
            }
            let max = (n - (p - j)) as VertexId;
            if cuts[j] > max {
                cuts[j] = max;
            }
        }
    } else {
        for j in 1..p {
            cuts[j] = cuts[j].clamp(cuts[j - 1], n as VertexId);
        }
    }
}

/// Contiguous p-way 1D partition minimizing the maximum per-part
/// out-degree sum, found by binary search on the bottleneck value with a
/// greedy feasibility probe.
pub fn optimal_1d_cuts(graph: &Graph, p: usize) -> Result<CutVector, PartitionError> {
    if p == 0 {
        return Err(PartitionError::ZeroParts);
    }
    let n = graph.num_vertices();
    let max_deg = (0..n).map(|v| graph.degree(v as VertexId) as u64).max().unwrap_or(0);
    let mut lo = max_deg;
    let mut hi = graph.num_edges() as u64;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(graph, p, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let bottleneck = lo;
    // greedy construction with the optimal bottleneck
    let mut cuts = Vec::with_capacity(p + 1);
    cuts.push(0 as VertexId);
    let mut load = 0u64;
    for v in 0..n {
        let d = graph.degree(v as VertexId) as u64;
        if load + d > bottleneck && cuts.len() < p {
            cuts.push(v as VertexId);
            load = 0;
        }
        load += d;
    }
    while cuts.len() < p + 1 {
        cuts.push(n as VertexId);
    }
    Ok(CutVector::new(cuts))
}

fn feasible(graph: &Graph, p: usize, bottleneck: u64) -> bool {
    let mut parts = 1usize;
    let mut load = 0u64;
    for v in 0..graph.num_vertices() {
        let d = graph.degree(v as VertexId) as u64;
        if d > bottleneck {
            return false;
        }
        if load + d > bottleneck {
            parts += 1;
            load = 0;
            if parts > p {
                return false;
            }
        }
        load += d;
    }
    true
}

/// The p x p conformal tiling of a graph, blocks in row-major id order.
pub struct BlockGrid {
    cuts: CutVector,
    blocks: Vec<Block>,
    num_edges: usize,
    upper_triangular: bool,
}

impl BlockGrid {
    pub fn parts(&self) -> usize {
        self.cuts.parts()
    }

    pub fn cuts(&self) -> &CutVector {
        &self.cuts
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Total edges across all blocks.
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn block(&self, id: usize) -> &Block {
        &self.blocks[id]
    }

    pub fn block_at(&self, row: usize, col: usize) -> &Block {
        &self.blocks[row * self.parts() + col]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.upper_triangular
    }

    /// Largest single-block footprint, in bytes.
    pub fn max_block_footprint(&self) -> u64 {
        self.blocks.iter().map(Block::footprint_bytes).max().unwrap_or(0)
    }
}

/// Assigns each directed edge (u, v) to block (part(u), part(v)) and
/// builds per-block local CSRs.
pub fn build_blocks(graph: &Graph, cuts: &CutVector) -> BlockGrid {
    let p = cuts.parts();
    let mut blocks = Vec::with_capacity(p * p);
    for row in 0..p {
        let sources = cuts.range(row);
        // per-column CSR accumulators for this block row
        let mut offsets: Vec<Vec<u64>> = (0..p).map(|_| vec![0u64; sources.len() + 1]).collect();
        let mut adjacency: Vec<Vec<VertexId>> = (0..p).map(|_| Vec::new()).collect();
        for u in sources.iter_global() {
            for &v in graph.neighbors(u) {
                let col = cuts.part_of(v);
                adjacency[col].push(cuts.range(col).to_local(v));
            }
            for col in 0..p {
                offsets[col][sources.to_local(u) as usize + 1] = adjacency[col].len() as u64;
            }
        }
        for (col, (offs, adj)) in offsets.into_iter().zip(adjacency).enumerate() {
            blocks.push(Block::new(
                row * p + col,
                row,
                col,
                sources,
                cuts.range(col),
                offs,
                adj,
            ));
        }
    }
    let num_edges = blocks.iter().map(Block::num_edges).sum();
    debug_assert_eq!(num_edges, graph.num_edges());
    BlockGrid { cuts: cuts.clone(), blocks, num_edges, upper_triangular: false }
}

/// Keeps only edges (u, v) with u < v globally. Blocks below the diagonal
/// become empty; diagonal blocks keep their upper-local part.
pub fn upper_triangular_view(grid: &BlockGrid) -> BlockGrid {
    let p = grid.parts();
    let mut blocks = Vec::with_capacity(p * p);
    for b in grid.blocks() {
        let sources = b.sources();
        let dests = b.destinations();
        let mut offsets = vec![0u64; sources.len() + 1];
        let mut adjacency = Vec::new();
        if b.row() <= b.col() {
            for lu in 0..sources.len() as VertexId {
                let gu = sources.to_global(lu);
                for &lv in b.edges(lu) {
                    if dests.to_global(lv) > gu {
                        adjacency.push(lv);
                    }
                }
                offsets[lu as usize + 1] = adjacency.len() as u64;
            }
        }
        blocks.push(Block::new(b.id(), b.row(), b.col(), sources, dests, offsets, adjacency));
    }
    let num_edges = blocks.iter().map(Block::num_edges).sum();
    BlockGrid { cuts: grid.cuts.clone(), blocks, num_edges, upper_triangular: true }
}

/// Default parts-per-dimension for a worker count: ceil(sqrt(2*workers)),
/// clamped to [1, 64].
pub fn default_parts(host_workers: usize) -> usize {
    let target = 2 * host_workers.max(1);
    let mut p = 1usize;
    while p * p < target {
        p += 1;
    }
    p.clamp(1, 64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> Graph {
        Graph::from_edges(4, vec![(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)], true)
    }

    fn k3() -> Graph {
        Graph::from_edges(3, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)], true)
    }

    #[test]
    fn single_part_is_identity() {
        let g = k3();
        let cuts = symmetric_cuts(&g, 1).unwrap();
        assert_eq!(cuts.cuts(), &[0, 3]);
    }

    #[test]
    fn p4_degree_prefix_cuts() {
        // degrees 1,2,2,1; prefix 1,3,5,6; target 3 -> cut at 2
        let cuts = symmetric_cuts(&path4(), 2).unwrap();
        assert_eq!(cuts.cuts(), &[0, 2, 4]);
    }

    #[test]
    fn star_cut_isolates_hub() {
        // star S4 with center last: edges (i,4),(4,i); degrees 1,1,1,1,4
        let mut edges = Vec::new();
        for i in 0..4u32 {
            edges.push((i, 4));
            edges.push((4, i));
        }
        let g = Graph::from_edges(5, edges, true);
        let cuts = symmetric_cuts(&g, 2).unwrap();
        // prefix sums 1,2,3,4,8 vs target 4 -> cut at 4; hub alone in part 1
        assert_eq!(cuts.cuts(), &[0, 4, 5]);
    }

    #[test]
    fn part_of_matches_cuts() {
        let cuts = CutVector::new(vec![0, 2, 3]);
        assert_eq!(cuts.part_of(0), 0);
        assert_eq!(cuts.part_of(1), 0);
        assert_eq!(cuts.part_of(2), 1);
    }

    #[test]
    fn k3_blocks_against_hand_enumeration() {
        let g = k3();
        let cuts = CutVector::new(vec![0, 2, 3]);
        let grid = build_blocks(&g, &cuts);
        let globals = |r: usize, c: usize| -> Vec<(u32, u32)> {
            grid.block_at(r, c).global_edges().collect()
        };
        assert_eq!(globals(0, 0), vec![(0, 1), (1, 0)]);
        assert_eq!(globals(0, 1), vec![(0, 2), (1, 2)]);
        assert_eq!(globals(1, 0), vec![(2, 0), (2, 1)]);
        assert!(grid.block_at(1, 1).is_empty());
        assert_eq!(grid.num_edges(), 6);
    }

    #[test]
    fn k3_single_block_holds_all() {
        let g = k3();
        let grid = build_blocks(&g, &symmetric_cuts(&g, 1).unwrap());
        assert_eq!(grid.block(0).num_edges(), 6);
    }

    #[test]
    fn empty_graph_empty_blocks() {
        let g = Graph::from_edges(0, vec![], true);
        let grid = build_blocks(&g, &CutVector::new(vec![0, 0, 0]));
        assert_eq!(grid.num_blocks(), 4);
        assert!(grid.blocks().iter().all(Block::is_empty));
    }

    #[test]
    fn optimal_1d_p4() {
        // exhaustive optimum for P4 at p=2 is bottleneck 3 with cuts [0,2,4]
        let cuts = optimal_1d_cuts(&path4(), 2).unwrap();
        assert_eq!(cuts.cuts(), &[0, 2, 4]);
    }

    #[test]
    fn optimal_1d_single_part_bottleneck_is_m() {
        let g = path4();
        let cuts = optimal_1d_cuts(&g, 1).unwrap();
        assert_eq!(cuts.cuts(), &[0, 4]);
    }

    #[test]
    fn optimal_1d_many_parts_bottleneck_is_max_degree() {
        let g = path4();
        let cuts = optimal_1d_cuts(&g, 8).unwrap();
        let bottleneck = (0..cuts.parts())
            .map(|j| cuts.range(j).iter_global().map(|v| g.degree(v) as u64).sum::<u64>())
            .max()
            .unwrap();
        assert_eq!(bottleneck, 2);
    }

    #[test]
    fn upper_triangular_k3() {
        let g = k3();
        let grid = build_blocks(&g, &symmetric_cuts(&g, 1).unwrap());
        let ut = upper_triangular_view(&grid);
        let edges: Vec<_> = ut.block(0).global_edges().collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn upper_triangular_halves_edges() {
        let g = path4();
        let grid = build_blocks(&g, &symmetric_cuts(&g, 2).unwrap());
        let ut = upper_triangular_view(&grid);
        assert_eq!(ut.num_edges(), g.num_edges() / 2);
    }

    #[test]
    fn default_parts_bounds() {
        assert_eq!(default_parts(1), 2);
        assert_eq!(default_parts(8), 4);
        assert!(default_parts(10_000) <= 64);
    }
}
