//! Disjoint interval assignment for dividing an array among tasks.

/// Returns the half-open slice `[lo, hi)` of `[0, n)` owned by task `i`
/// out of `t`. Intervals over all `i` tile `[0, n)` with no gap or
/// overlap.
pub fn get_interval(i: usize, t: usize, n: usize) -> (usize, usize) {
    debug_assert!(t >= 1 && i < t);
    let lo = (i as u128 * n as u128 / t as u128) as usize;
    let hi = ((i as u128 + 1) * n as u128 / t as u128) as usize;
    (lo, hi)
}
