//! Attribute storage shared between kernels.
//!
//! Vertex and edge attributes are named arrays of atomic cells; global
//! attributes are named scalars. Kernels mutate cells only through the
//! atomic operations here, or through caller-guaranteed disjoint
//! intervals (`store_relaxed` on a slice a task owns exclusively).

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicI64, AtomicU64, Ordering};

use crate::block::VertexRange;

/// Atomic `u64` cell with add / compare-and-swap.
#[derive(Debug, Default)]
pub struct AtomicCellU64(AtomicU64);

impl AtomicCellU64 {
    pub fn new(v: u64) -> Self {
        AtomicCellU64(AtomicU64::new(v))
    }

    pub fn load(&self) -> u64 {
        self.0.load(Ordering::Acquire)
    }

    pub fn store(&self, v: u64) {
        self.0.store(v, Ordering::Release)
    }

    pub fn add(&self, delta: u64) {
        self.0.fetch_add(delta, Ordering::AcqRel);
    }

    /// Swaps in `new` iff the current value equals `old`; true on success.
    pub fn cas(&self, old: u64, new: u64) -> bool {
        self.0
            .compare_exchange(old, new, Ordering::AcqRel, Ordering::Acquire)
            .is_ok()
    }
}

/// Atomic `i64` cell with add / compare-and-swap.
#[derive(Debug, Default)]
pub struct AtomicCellI64(AtomicI64);

impl AtomicCellI64 {
    pub fn new(v: i64) -> Self {
        AtomicCellI64(AtomicI64::new(v))
    }

    pub fn load(&self) -> i64 {
        self.0.load(Ordering::Acquire)
    }

    pub fn store(&self, v: i64) {
        self.0.store(v, Ordering::Release)
    }

    pub fn add(&self, delta: i64) {
        self.0.fetch_add(delta, Ordering::AcqRel);
    }

    pub fn cas(&self, old: i64, new: i64) -> bool {
        self.0
            .compare_exchange(old, new, Ordering::AcqRel, Ordering::Acquire)
            .is_ok()
    }
}

/// Atomic `f64` cell backed by bit-cast `u64` storage.
#[derive(Debug)]
pub struct AtomicCellF64(AtomicU64);

impl Default for AtomicCellF64 {
    fn default() -> Self {
        AtomicCellF64::new(0.0)
    }
}

impl AtomicCellF64 {
    pub fn new(v: f64) -> Self {
        AtomicCellF64(AtomicU64::new(v.to_bits()))
    }

    pub fn load(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Acquire))
    }

    pub fn store(&self, v: f64) {
        self.0.store(v.to_bits(), Ordering::Release)
    }

    pub fn add(&self, delta: f64) {
        let mut cur = self.0.load(Ordering::Acquire);
        loop {
            let next = (f64::from_bits(cur) + delta).to_bits();
            match self.0.compare_exchange_weak(cur, next, Ordering::AcqRel, Ordering::Acquire) {
                Ok(_) => return,
                Err(actual) => cur = actual,
            }
        }
    }
}

fn filled_u64(len: usize, v: u64) -> Box<[AtomicCellU64]> {
    (0..len).map(|_| AtomicCellU64::new(v)).collect()
}

fn filled_i64(len: usize, v: i64) -> Box<[AtomicCellI64]> {
    (0..len).map(|_| AtomicCellI64::new(v)).collect()
}

fn filled_f64(len: usize, v: f64) -> Box<[AtomicCellF64]> {
    (0..len).map(|_| AtomicCellF64::new(v)).collect()
}

enum AttrArray {
    U64(Box<[AtomicCellU64]>),
    I64(Box<[AtomicCellI64]>),
    F64(Box<[AtomicCellF64]>),
}

enum GlobalAttr {
    U64(AtomicCellU64),
    F64(AtomicCellF64),
}

/// Named attribute arrays over vertices and edges, plus global scalars.
///
/// Block-scoped views are plain sub-slices of the global arrays
/// restricted to a block's contiguous interval, so writes through a view
/// are globally visible as soon as they land.
#[derive(Default)]
pub struct AttributeStore {
    vertex: BTreeMap<String, AttrArray>,
    edge: BTreeMap<String, AttrArray>,
    global: BTreeMap<String, GlobalAttr>,
}

impl AttributeStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex_u64(&mut self, name: &str, n: usize, init: u64) {
        self.vertex.insert(name.into(), AttrArray::U64(filled_u64(n, init)));
    }

    pub fn add_vertex_i64(&mut self, name: &str, n: usize, init: i64) {
        self.vertex.insert(name.into(), AttrArray::I64(filled_i64(n, init)));
    }

    pub fn add_vertex_f64(&mut self, name: &str, n: usize, init: f64) {
        self.vertex.insert(name.into(), AttrArray::F64(filled_f64(n, init)));
    }

    pub fn add_edge_f64(&mut self, name: &str, m: usize, init: f64) {
        self.edge.insert(name.into(), AttrArray::F64(filled_f64(m, init)));
    }

    pub fn add_global_u64(&mut self, name: &str, init: u64) {
        self.global.insert(name.into(), GlobalAttr::U64(AtomicCellU64::new(init)));
    }

    pub fn add_global_f64(&mut self, name: &str, init: f64) {
        self.global.insert(name.into(), GlobalAttr::F64(AtomicCellF64::new(init)));
    }

    pub fn vertex_u64(&self, name: &str) -> &[AtomicCellU64] {
        match self.vertex.get(name) {
            Some(AttrArray::U64(a)) => a,
            _ => panic!("no u64 vertex attribute named {name:?}"),
        }
    }

    pub fn vertex_i64(&self, name: &str) -> &[AtomicCellI64] {
        match self.vertex.get(name) {
            Some(AttrArray::I64(a)) => a,
            _ => panic!("no i64 vertex attribute named {name:?}"),
        }
    }

    pub fn vertex_f64(&self, name: &str) -> &[AtomicCellF64] {
        match self.vertex.get(name) {
            Some(AttrArray::F64(a)) => a,
            _ => panic!("no f64 vertex attribute named {name:?}"),
        }
    }

    pub fn edge_f64(&self, name: &str) -> &[AtomicCellF64] {
        match self.edge.get(name) {
            Some(AttrArray::F64(a)) => a,
            _ => panic!("no f64 edge attribute named {name:?}"),
        }
    }

    pub fn global_u64(&self, name: &str) -> &AtomicCellU64 {
        match self.global.get(name) {
            Some(GlobalAttr::U64(c)) => c,
            _ => panic!("no u64 global attribute named {name:?}"),
        }
    }

    pub fn global_f64(&self, name: &str) -> &AtomicCellF64 {
        match self.global.get(name) {
            Some(GlobalAttr::F64(c)) => c,
            _ => panic!("no f64 global attribute named {name:?}"),
        }
    }

    /// View of a vertex attribute restricted to a block interval.
    pub fn vertex_u64_view(&self, name: &str, range: VertexRange) -> &[AtomicCellU64] {
        &self.vertex_u64(name)[range.start as usize..range.end as usize]
    }

    pub fn vertex_i64_view(&self, name: &str, range: VertexRange) -> &[AtomicCellI64] {
        &self.vertex_i64(name)[range.start as usize..range.end as usize]
    }

    pub fn vertex_f64_view(&self, name: &str, range: VertexRange) -> &[AtomicCellF64] {
        &self.vertex_f64(name)[range.start as usize..range.end as usize]
    }

    /// Total bytes held by all attribute arrays and globals; the unit of
    /// write-back accounting when device lanes sync.
    pub fn payload_bytes(&self) -> u64 {
        let array_bytes = |a: &AttrArray| -> u64 {
            (match a {
                AttrArray::U64(x) => x.len(),
                AttrArray::I64(x) => x.len(),
                AttrArray::F64(x) => x.len(),
            }) as u64
                * 8
        };
        self.vertex.values().map(array_bytes).sum::<u64>()
            + self.edge.values().map(array_bytes).sum::<u64>()
            + self.global.len() as u64 * 8
    }

    /// Snapshot of a u64 vertex attribute.
    pub fn vertex_u64_values(&self, name: &str) -> Vec<u64> {
        self.vertex_u64(name).iter().map(|c| c.load()).collect()
    }

    pub fn vertex_i64_values(&self, name: &str) -> Vec<i64> {
        self.vertex_i64(name).iter().map(|c| c.load()).collect()
    }

    pub fn vertex_f64_values(&self, name: &str) -> Vec<f64> {
        self.vertex_f64(name).iter().map(|c| c.load()).collect()
    }
}
