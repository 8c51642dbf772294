//! A counting global allocator for observing steady-state allocation.
//!
//! Install it in a binary or test target:
//!
//! ```ignore
//! #[global_allocator]
//! static ALLOC: tailsitter::alloc_probe::CountingAlloc = tailsitter::alloc_probe::CountingAlloc;
//! ```
//!
//! Counting is per thread, so concurrent test threads do not disturb a
//! measurement.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;

pub struct CountingAlloc;

thread_local! {
    static COUNT: Cell<u64> = const { Cell::new(0) };
}

fn bump() {
    // try_with: the slot may already be torn down during thread exit.
    let _ = COUNT.try_with(|c| c.set(c.get() + 1));
}

unsafe impl GlobalAlloc for CountingAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        bump();
        System.alloc(layout)
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        bump();
        System.alloc_zeroed(layout)
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        bump();
        System.realloc(ptr, layout, new_size)
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout)
    }
}

/// Allocations made by the current thread so far. Only meaningful when
/// [`CountingAlloc`] is the global allocator.
pub fn allocations() -> u64 {
    COUNT.with(Cell::get)
}

/// Runs `f` and returns its result with the number of allocations it made on
/// this thread.
pub fn count_allocations<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = allocations();
    let out = f();
    (out, allocations() - before)
}
