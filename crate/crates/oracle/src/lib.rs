//! Independent brute-force references for triangle counting, connected
//! components, BFS distances, and PageRank.
//!
//! Deliberately simple and single-pass. This crate depends only on the
//! core graph type; it must never pull in the partitioner or runtime, so
//! the references stay independent of the code paths they check.

#![no_std]

extern crate alloc;

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use blockgraph_core::{Graph, VertexId};

/// Adjacency-matrix oracles are capped to keep test time bounded.
const MATRIX_CAP: usize = 2000;

/// Distance sentinel for unreachable vertices.
pub const UNREACHABLE: u64 = u64::MAX;

/// Triple loop over u < v < w with adjacency-matrix membership.
pub fn oracle_triangles(graph: &Graph) -> u64 {
    let n = graph.num_vertices();
    assert!(n <= MATRIX_CAP, "oracle_triangles is capped at n <= {MATRIX_CAP}");
    let mut adj = vec![false; n * n];
    for (u, v) in graph.edges() {
        adj[u as usize * n + v as usize] = true;
    }
    let mut count = 0u64;
    for u in 0..n {
        for v in u + 1..n {
            if !adj[u * n + v] {
                continue;
            }
            for w in v + 1..n {
                if adj[u * n + w] && adj[v * n + w] {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Sequential union-find with path compression; labels are the minimum
/// vertex id of each component.
pub fn oracle_components(graph: &Graph) -> Vec<VertexId> {
    let n = graph.num_vertices();
    let mut parent: Vec<VertexId> = (0..n as VertexId).collect();
    fn find(parent: &mut [VertexId], mut x: VertexId) -> VertexId {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for (u, v) in graph.edges() {
        let ru = find(&mut parent, u);
        let rv = find(&mut parent, v);
        if ru != rv {
            let (hi, lo) = if ru > rv { (ru, rv) } else { (rv, ru) };
            parent[hi as usize] = lo;
        }
    }
    (0..n as VertexId).map(|v| find(&mut parent, v)).collect()
}

/// Sequential queue BFS; `UNREACHABLE` marks vertices not connected to
/// the source.
pub fn oracle_bfs(graph: &Graph, source: VertexId) -> Vec<u64> {
    let n = graph.num_vertices();
    assert!((source as usize) < n, "source out of range");
    let mut dist = vec![UNREACHABLE; n];
    dist[source as usize] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if dist[v as usize] == UNREACHABLE {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Dense power iteration. Dangling (degree-0) mass is redistributed
/// uniformly, keeping the rank sum at 1.
pub fn oracle_pagerank(graph: &Graph, damping: f64, iterations: usize) -> Vec<f64> {
    let n = graph.num_vertices();
    if n == 0 {
        return Vec::new();
    }
    let mut rank = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let dangling: f64 = (0..n)
            .filter(|&u| graph.degree(u as VertexId) == 0)
            .map(|u| rank[u])
            .sum();
        let base = (1.0 - damping) / n as f64 + damping * dangling / n as f64;
        let mut next = vec![base; n];
        for u in 0..n {
            let deg = graph.degree(u as VertexId);
            if deg == 0 {
                continue;
            }
            let share = damping * rank[u] / deg as f64;
            for &v in graph.neighbors(u as VertexId) {
                next[v as usize] += share;
            }
        }
        rank = next;
    }
    rank
}
