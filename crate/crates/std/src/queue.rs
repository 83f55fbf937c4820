//! Level-based frontier queues, bucketed per partition part.
//!
//! Pushes during a level go into per-part next buffers; the driver swaps
//! them into the current frontier between levels, so a global concurrent
//! queue is never needed.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};

use blockgraph_core::VertexId;

pub struct LevelQueue {
    current: RwLock<Vec<Vec<VertexId>>>,
    next: Vec<Mutex<Vec<VertexId>>>,
    pushes: AtomicU64,
}

impl LevelQueue {
    pub fn new(parts: usize) -> Self {
        LevelQueue {
            current: RwLock::new(vec![Vec::new(); parts]),
            next: (0..parts).map(|_| Mutex::new(Vec::new())).collect(),
            pushes: AtomicU64::new(0),
        }
    }

    /// Pushes a vertex into the next frontier of `part`. The caller must
    /// guarantee at-most-once per vertex per level (BFS does this with a
    /// CAS on the parent cell before pushing).
    pub fn push_next(&self, part: usize, v: VertexId) {
        self.next[part].lock().unwrap().push(v);
        self.pushes.fetch_add(1, Ordering::AcqRel);
    }

    /// Number of pushes since the last swap.
    pub fn push_count(&self) -> u64 {
        self.pushes.load(Ordering::Acquire)
    }

    /// Runs `f` over the current frontier of `part`.
    pub fn with_current<R>(&self, part: usize, f: impl FnOnce(&[VertexId]) -> R) -> R {
        f(&self.current.read().unwrap()[part])
    }

    pub fn current_len(&self, part: usize) -> usize {
        self.current.read().unwrap()[part].len()
    }

    pub fn total_current(&self) -> usize {
        self.current.read().unwrap().iter().map(Vec::len).sum()
    }

    /// Iterates every vertex in the current frontier.
    pub fn for_each_current(&self, mut f: impl FnMut(VertexId)) {
        for part in self.current.read().unwrap().iter() {
            for &v in part {
                f(v);
            }
        }
    }

    /// Seeds the current frontier with a single vertex.
    pub fn seed(&self, part: usize, v: VertexId) {
        self.current.write().unwrap()[part].push(v);
    }

    /// Promotes next buffers to the current frontier and resets the push
    /// counter. Driver-thread only.
    pub fn swap_levels(&self) {
        let mut current = self.current.write().unwrap();
        for (cur, next) in current.iter_mut().zip(&self.next) {
            let mut next = next.lock().unwrap();
            cur.clear();
            std::mem::swap(cur, &mut *next);
        }
        self.pushes.store(0, Ordering::Release);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_swap_cycle() {
        let q = LevelQueue::new(2);
        q.seed(0, 3);
        assert_eq!(q.current_len(0), 1);
        q.push_next(1, 7);
        q.push_next(0, 5);
        assert_eq!(q.push_count(), 2);
        q.swap_levels();
        assert_eq!(q.push_count(), 0);
        assert_eq!(q.current_len(0), 1);
        q.with_current(1, |f| assert_eq!(f, &[7]));
        let mut seen = Vec::new();
        q.for_each_current(|v| seen.push(v));
        seen.sort_unstable();
        assert_eq!(seen, vec![5, 7]);
    }
}
