//! The user-facing algorithm contract: two kernels, list composition,
//! iteration hooks, and a workload estimator.

use std::sync::Arc;

use blockgraph_core::{get_interval, AttributeStore, Block, BlockGrid, BlockList, Graph};

/// Where a computation runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    HostOnly,
    DeviceOnly,
    Collaborative,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "host" | "host_only" | "host-only" => Some(Mode::HostOnly),
            "device" | "device_only" | "device-only" => Some(Mode::DeviceOnly),
            "collaborative" | "hybrid" => Some(Mode::Collaborative),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::HostOnly => "host_only",
            Mode::DeviceOnly => "device_only",
            Mode::Collaborative => "collaborative",
        }
    }
}

/// Executor a task runs under. Host workers run the body sequentially;
/// device lanes decompose it into `width` strips, modeling the wide
/// internal parallelism of a device.
#[derive(Clone, Copy, Debug)]
pub enum Executor {
    Host,
    Device { width: usize },
}

impl Executor {
    /// Invokes `body` exactly once per index in `[0, count)`.
    pub fn for_each(&self, count: usize, body: impl Fn(usize)) {
        match *self {
            Executor::Host => (0..count).for_each(body),
            Executor::Device { width } => {
                let width = width.max(1).min(count.max(1));
                for strip in 0..width {
                    let (lo, hi) = get_interval(strip, width, count);
                    (lo..hi).for_each(&body);
                }
            }
        }
    }

    /// Sums each body's contribution with `+` (associative, commutative).
    pub fn reduce_u64(&self, count: usize, body: impl Fn(usize) -> u64) -> u64 {
        match *self {
            Executor::Host => (0..count).map(body).sum(),
            Executor::Device { width } => {
                let width = width.max(1).min(count.max(1));
                (0..width)
                    .map(|strip| {
                        let (lo, hi) = get_interval(strip, width, count);
                        (lo..hi).map(&body).sum::<u64>()
                    })
                    .sum()
            }
        }
    }
}

/// Everything a kernel can see while processing one task.
pub struct KernelCtx<'a> {
    pub graph: &'a Graph,
    pub grid: &'a BlockGrid,
    pub store: &'a AttributeStore,
    pub list: &'a BlockList,
    pub iteration: u64,
    /// Position of this task in the sorted task order of the iteration.
    pub task_index: usize,
    pub num_tasks: usize,
    pub executor: Executor,
}

impl<'a> KernelCtx<'a> {
    /// The i-th block of the task's list.
    pub fn block(&self, i: usize) -> &'a Block {
        self.grid.block(self.list.block_ids[i])
    }

    /// This task's unique slice of an array of length `n`.
    pub fn interval(&self, n: usize) -> (usize, usize) {
        get_interval(self.task_index, self.num_tasks, n)
    }
}

/// Hook context for the pre-/post-iteration functors, which run on the
/// driver thread only.
pub struct IterCtx {
    pub iteration: u64,
    mode_override: Option<Mode>,
}

impl IterCtx {
    pub(crate) fn new(iteration: u64) -> Self {
        IterCtx { iteration, mode_override: None }
    }

    /// Selects the execution mode for the upcoming iteration.
    pub fn set_mode(&mut self, mode: Mode) {
        self.mode_override = Some(mode);
    }

    pub(crate) fn mode_override(&self) -> Option<Mode> {
        self.mode_override
    }
}

pub type Kernel = Arc<dyn Fn(&KernelCtx<'_>) + Send + Sync>;
pub type GenericPredicate = Arc<dyn Fn(&BlockGrid, &[usize]) -> bool + Send + Sync>;
pub type CustomComposer = Box<dyn FnMut(&BlockGrid) -> Vec<Vec<usize>>>;
pub type Estimator = Arc<dyn Fn(&BlockGrid, &BlockList) -> f64 + Send + Sync>;
pub type BeforeHook = Box<dyn FnMut(&mut IterCtx)>;
pub type AfterHook = Box<dyn FnMut(&mut IterCtx) -> bool>;

/// A graph algorithm: kernels, block-list composition, iteration control,
/// and an optional workload estimator.
pub struct Algorithm {
    pub name: String,
    pub host_kernel: Option<Kernel>,
    pub device_kernel: Option<Kernel>,
    /// Generic composition: keep every ordered `list_size`-tuple of block
    /// ids the predicate accepts.
    pub generic_filter: Option<GenericPredicate>,
    /// Custom composition: the functor returns the lists verbatim.
    pub custom_composer: Option<CustomComposer>,
    pub before_iteration: Option<BeforeHook>,
    /// Termination hook; the run continues while it returns true.
    pub after_iteration: AfterHook,
    pub estimator: Option<Estimator>,
    pub list_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("algorithm must provide at least one kernel")]
    NoKernel,
    #[error("algorithm must provide exactly one of generic filter / custom composer")]
    CompositionAmbiguous,
    #[error("list_size must be >= 1")]
    BadListSize,
    #[error("host_only mode requires a host kernel")]
    HostKernelMissing,
    #[error("device_only mode requires a device kernel")]
    DeviceKernelMissing,
}

impl Algorithm {
    pub fn validate(&self, mode: Mode) -> Result<(), SpecError> {
        if self.host_kernel.is_none() && self.device_kernel.is_none() {
            return Err(SpecError::NoKernel);
        }
        if self.generic_filter.is_some() == self.custom_composer.is_some() {
            return Err(SpecError::CompositionAmbiguous);
        }
        if self.list_size == 0 {
            return Err(SpecError::BadListSize);
        }
        match mode {
            Mode::HostOnly if self.host_kernel.is_none() => Err(SpecError::HostKernelMissing),
            Mode::DeviceOnly if self.device_kernel.is_none() => Err(SpecError::DeviceKernelMissing),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noop() -> Kernel {
        Arc::new(|_ctx| {})
    }

    fn base() -> Algorithm {
        Algorithm {
            name: "noop".into(),
            host_kernel: Some(noop()),
            device_kernel: None,
            generic_filter: Some(Arc::new(|_, _| true)),
            custom_composer: None,
            before_iteration: None,
            after_iteration: Box::new(|_| false),
            estimator: None,
            list_size: 1,
        }
    }

    #[test]
    fn validation_rules() {
        assert!(base().validate(Mode::HostOnly).is_ok());
        let mut no_kernel = base();
        no_kernel.host_kernel = None;
        assert_eq!(no_kernel.validate(Mode::HostOnly), Err(SpecError::NoKernel));
        let mut both = base();
        both.custom_composer = Some(Box::new(|_| vec![]));
        assert_eq!(both.validate(Mode::HostOnly), Err(SpecError::CompositionAmbiguous));
        assert_eq!(base().validate(Mode::DeviceOnly), Err(SpecError::DeviceKernelMissing));
    }

    #[test]
    fn executors_cover_every_index() {
        for executor in [Executor::Host, Executor::Device { width: 3 }] {
            let hits = std::sync::Mutex::new(vec![0u32; 7]);
            executor.for_each(7, |i| hits.lock().unwrap()[i] += 1);
            assert_eq!(*hits.lock().unwrap(), vec![1; 7]);
        }
    }

    #[test]
    fn reduce_sums_contributions() {
        assert_eq!(Executor::Host.reduce_u64(4, |_| 1), 4);
        assert_eq!(Executor::Device { width: 4 }.reduce_u64(10, |i| i as u64), 45);
    }
}
