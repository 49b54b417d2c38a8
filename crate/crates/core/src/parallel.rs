//! Reductions whose floating-point result does not depend on the thread count.

use rayon::prelude::*;

use crate::error::Result;

const CHUNK: usize = 1024;

/// `Σ f(i)` for `i < n`: fixed-size chunks summed in parallel, chunk totals
/// summed in index order.
pub fn ordered_sum<F>(n: usize, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                s += f(i)?;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(partial.iter().sum())
}
