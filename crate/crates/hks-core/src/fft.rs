//! Cached FFT plans shared across the crate.
//!
//! Plans are immutable once built and safe to run concurrently; working
//! buffers are owned by each caller.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

type Plan = Arc<dyn Fft<f64>>;

static PLAN_CACHE: Lazy<Mutex<HashMap<(usize, bool), Plan>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, inverse: bool) -> Plan {
    let mut cache = PLAN_CACHE.lock().expect("fft plan cache poisoned");
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place 1D or 2D FFT over a row-major buffer with `n` points per axis.
/// No normalization is applied.
pub fn transform(buf: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let p = plan(n, inverse);
    match dim {
        1 => {
            debug_assert_eq!(buf.len(), n);
            p.process(buf);
        }
        2 => {
            debug_assert_eq!(buf.len(), n * n);
            // Rows (contiguous), then columns via transpose round trip.
            p.process(buf);
            transpose(buf, n);
            p.process(buf);
            transpose(buf, n);
        }
        _ => unreachable!("grid dim is validated to 1 or 2"),
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
