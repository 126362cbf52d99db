use super::{Parameters, Real};
use rayon::prelude::*;
use std::sync::Once;

/// Number of gradient chunks per batch. Fixed, so the reduction order and
/// therefore the floating-point result never depend on the thread count.
pub const GRAD_CHUNKS: usize = 8;

/// Caps the global worker pool from `TRACEBOT_THREADS`; later calls are no-ops.
pub fn configure_threads() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        if let Some(n) = std::env::var("TRACEBOT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

/// Sums `f(item, grad)` losses and gradients over `items`. Items are split
/// into [`GRAD_CHUNKS`] contiguous chunks that accumulate independently and
/// are then reduced in index order.
pub fn chunked_grads<F, M, T, L>(model: &M, items: &[T], f: L) -> (f64, M)
where
    F: Real,
    M: Parameters<F> + Clone + Send + Sync,
    T: Sync,
    L: Fn(usize, &T, &mut M) -> f64 + Sync,
{
    let chunk = items.len().div_ceil(GRAD_CHUNKS).max(1);
    let parts: Vec<(f64, M)> = items
        .par_chunks(chunk)
        .enumerate()
        .map(|(ci, c)| {
            let mut g = model.zeros_like();
            let mut loss = 0.0;
            for (j, item) in c.iter().enumerate() {
                loss += f(ci * chunk + j, item, &mut g);
            }
            (loss, g)
        })
        .collect();
    let mut iter = parts.into_iter();
    let (mut loss, mut total) = iter.next().unwrap_or_else(|| (0.0, model.zeros_like()));
    for (l, g) in iter {
        loss += l;
        total.accumulate(&g);
    }
    (loss, total)
}
