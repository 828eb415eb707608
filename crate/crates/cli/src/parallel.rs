//! Deterministic fan-out over an index range.
//!
//! Results land in their slot by index, so the output is byte-identical for
//! any worker count: the scheduler only decides who computes what, never
//! what the answer is. Errors are reported at the lowest failing index, again
//! independent of scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Evaluate `f(0..n)` on up to `threads` workers and return results in index
/// order.
pub fn map_indexed<T, E, F>(n: usize, threads: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync,
{
    let workers = threads.max(1).min(n.max(1));
    if workers <= 1 || n <= 1 {
        return (0..n).map(&f).collect();
    }
    let slots: Mutex<Vec<Option<Result<T, E>>>> =
        Mutex::new((0..n).map(|_| None).collect());
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = cursor.fetch_add(1, Ordering::Relaxed);
                if idx >= n {
                    break;
                }
                let result = f(idx);
                slots.lock().expect("no poisoned worker")[idx] = Some(result);
            });
        }
    });
    let results = slots.into_inner().expect("workers joined");
    let mut out = Vec::with_capacity(n);
    for slot in results {
        out.push(slot.expect("every index was computed")?);
    }
    Ok(out)
}

/// Thread count resolution: CLI flag beats the `CDI_SIM_THREADS` environment
/// variable beats hardware parallelism. The choice never changes results.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    if let Some(t) = flag {
        return t.max(1);
    }
    if let Ok(value) = std::env::var("CDI_SIM_THREADS") {
        if let Ok(t) = value.trim().parse::<usize>() {
            return t.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order_for_any_worker_count() {
        let expected: Vec<usize> = (0..500).map(|i| i * i).collect();
        for threads in [1, 2, 3, 8, 64] {
            let got: Vec<usize> =
                map_indexed(500, threads, |i| Ok::<_, ()>(i * i)).unwrap();
            assert_eq!(got, expected, "threads = {threads}");
        }
    }

    #[test]
    fn reports_error_at_lowest_failing_index() {
        for threads in [1, 4] {
            let err = map_indexed(100, threads, |i| {
                if i % 7 == 3 {
                    Err(i)
                } else {
                    Ok(i)
                }
            })
            .unwrap_err();
            assert_eq!(err, 3);
        }
    }
}
