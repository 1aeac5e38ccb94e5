//! Separable unitary DFT over a row-major `N^n` array.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Transforms `data` in place along every axis and applies the `N^{-n/2}` factor.
///
/// Each 1-D line is transformed independently, so the result does not depend on
/// how rayon schedules the work.
pub(crate) fn transform(data: &mut [Complex64], dim: usize, n: usize, direction: Direction) {
    let (fwd, inv) = plans(n);
    let fft = match direction {
        Direction::Forward => fwd,
        Direction::Inverse => inv,
    };
    for axis in 0..dim {
        let inner = n.pow((dim - 1 - axis) as u32);
        let block = n * inner;
        let scratch_len = fft.get_inplace_scratch_len();
        if inner == 1 {
            data.par_chunks_mut(n).for_each_init(
                || vec![Complex64::default(); scratch_len],
                |scratch, line| fft.process_with_scratch(line, scratch),
            );
        } else {
            data.par_chunks_mut(block).for_each_init(
                || (vec![Complex64::default(); n], vec![Complex64::default(); scratch_len]),
                |(line, scratch), chunk| {
                    for offset in 0..inner {
                        for (k, v) in line.iter_mut().enumerate() {
                            *v = chunk[k * inner + offset];
                        }
                        fft.process_with_scratch(line, scratch);
                        for (k, v) in line.iter().enumerate() {
                            chunk[k * inner + offset] = *v;
                        }
                    }
                },
            );
        }
    }
    let scale = (n as f64).powf(-(dim as f64) / 2.0);
    data.par_iter_mut().for_each(|v| *v *= scale);
}
