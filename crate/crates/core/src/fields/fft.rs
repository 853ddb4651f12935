//! Multi-axis FFT on row-major buffers plus centring shifts.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)>> = OnceLock::new();
    let cell = PLANS.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cell.lock().expect("fft plan cache poisoned");
    let (planner, cache) = &mut *guard;
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalized transform along every axis; `inverse` uses e^{+i}.
pub(crate) fn fft_nd(buf: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    debug_assert_eq!(buf.len(), total);
    for axis in 0..shape.len() {
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let p = plan(n, inverse);
        if stride == 1 {
            buf.par_chunks_mut(n).for_each(|line| p.process(line));
            continue;
        }
        // Gather strided lines, transform, scatter back.
        let outer = total / (n * stride);
        let lines: Vec<Vec<Complex64>> = (0..outer * stride)
            .into_par_iter()
            .map(|l| {
                let (o, s) = (l / stride, l % stride);
                let base = o * n * stride + s;
                let mut line: Vec<Complex64> = (0..n).map(|k| buf[base + k * stride]).collect();
                p.process(&mut line);
                line
            })
            .collect();
        for (l, line) in lines.into_iter().enumerate() {
            let (o, s) = (l / stride, l % stride);
            let base = o * n * stride + s;
            for (k, v) in line.into_iter().enumerate() {
                buf[base + k * stride] = v;
            }
        }
    }
}

/// Reorder FFT output (index n mod N) into centred order (index n + N/2).
pub(crate) fn shift_to_centered(buf: &[Complex64], shape: &[usize]) -> Vec<Complex64> {
    permute(buf, shape, |k, n| (k + n - n / 2) % n)
}

pub(crate) fn shift_from_centered(buf: &[Complex64], shape: &[usize]) -> Vec<Complex64> {
    permute(buf, shape, |k, n| (k + n / 2) % n)
}

/// out[i] = buf[src(i)] with per-axis source index `f(k, n)`.
fn permute(buf: &[Complex64], shape: &[usize], f: impl Fn(usize, usize) -> usize) -> Vec<Complex64> {
    let d = shape.len();
    let total = buf.len();
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; d];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..d).rev() {
            idx[a] = rem % shape[a];
            rem /= shape[a];
        }
        let src = (0..d).fold(0, |acc, a| acc * shape[a] + f(idx[a], shape[a]));
        *slot = buf[src];
    }
    out
}
