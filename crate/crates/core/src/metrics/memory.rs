//! Wall time and peak heap measurement around a single solver run.
//!
//! Install [`TrackingAllocator`] as the global allocator to get exact
//! per-thread high-water marks:
//!
//! ```ignore
//! #[global_allocator]
//! static ALLOC: maxcut_core::metrics::TrackingAllocator = maxcut_core::metrics::TrackingAllocator;
//! ```
//!
//! Without it, [`measure_run`] reports the caller's estimate and marks the
//! record [`MemMode::Estimated`].

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use crate::metrics::record::MemMode;

static INSTALLED: AtomicBool = AtomicBool::new(false);

thread_local! {
    static CURRENT: Cell<i64> = const { Cell::new(0) };
    static PEAK: Cell<i64> = const { Cell::new(0) };
}

/// `System` plus per-thread live/peak byte counters. Memory freed on a
/// different thread than it was allocated on skews both threads' counts,
/// so measured closures should stay single-threaded.
pub struct TrackingAllocator;

fn record(delta: i64) {
    let _ = CURRENT.try_with(|c| {
        let now = c.get() + delta;
        c.set(now);
        let _ = PEAK.try_with(|p| {
            if now > p.get() {
                p.set(now);
            }
        });
    });
}

// SAFETY: every call forwards to `System` unchanged; the bookkeeping only
// touches const-initialized thread-locals, which never allocate.
unsafe impl GlobalAlloc for TrackingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            if !INSTALLED.load(Ordering::Relaxed) {
                INSTALLED.store(true, Ordering::Relaxed);
            }
            record(layout.size() as i64);
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc_zeroed(layout) };
        if !p.is_null() {
            if !INSTALLED.load(Ordering::Relaxed) {
                INSTALLED.store(true, Ordering::Relaxed);
            }
            record(layout.size() as i64);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        record(-(layout.size() as i64));
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = unsafe { System.realloc(ptr, layout, new_size) };
        if !p.is_null() {
            record(new_size as i64 - layout.size() as i64);
        }
        p
    }
}

/// Whether the tracking allocator has served any allocation.
pub fn tracking_installed() -> bool {
    INSTALLED.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measured<T> {
    pub value: T,
    pub time_ms: f64,
    pub peak_mem_bytes: u64,
    pub mem_mode: MemMode,
}

/// Runs `f` once, timing it and recording the peak heap growth on this
/// thread above the level at entry. Falls back to `estimate_bytes` when
/// the tracking allocator is not installed. Not reentrant: a nested call
/// resets the enclosing peak.
pub fn measure_run<T>(estimate_bytes: u64, f: impl FnOnce() -> T) -> Measured<T> {
    measure(tracking_installed(), estimate_bytes, f)
}

/// Like [`measure_run`] but always reports the estimate, for runs that
/// share threads or run concurrently.
pub fn measure_run_estimated<T>(estimate_bytes: u64, f: impl FnOnce() -> T) -> Measured<T> {
    measure(false, estimate_bytes, f)
}

fn measure<T>(tracked: bool, estimate_bytes: u64, f: impl FnOnce() -> T) -> Measured<T> {
    let baseline = CURRENT.with(Cell::get);
    PEAK.with(|p| p.set(baseline));
    let start = Instant::now();
    let value = f();
    let time_ms = start.elapsed().as_secs_f64() * 1e3;
    let peak = PEAK.with(Cell::get);
    let (peak_mem_bytes, mem_mode) = if tracked {
        ((peak - baseline).max(0) as u64, MemMode::Tracked)
    } else {
        (estimate_bytes, MemMode::Estimated)
    };
    Measured {
        value,
        time_ms,
        peak_mem_bytes,
        mem_mode,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noop_is_fast() {
        let m = measure_run(0, || ());
        assert!(m.time_ms < 1.0);
        if m.mem_mode == MemMode::Tracked {
            assert_eq!(m.peak_mem_bytes, 0);
        }
    }

    #[test]
    fn estimate_used_without_allocator() {
        // Unit tests run without the global allocator installed.
        let m = measure_run(1234, || vec![0u8; 10]);
        assert_eq!(m.mem_mode, MemMode::Estimated);
        assert_eq!(m.peak_mem_bytes, 1234);
        assert_eq!(m.value.len(), 10);
    }
}
