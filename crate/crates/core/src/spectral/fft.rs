//! Cached 2d FFT plans. Forward and inverse transforms are unnormalized;
//! `inverse` divides by `n^2` so that the round trip is the identity.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: Lazy<Mutex<HashMap<usize, Arc<Plan>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize) -> Arc<Plan> {
    let mut plans = PLANS.lock().expect("fft plan cache poisoned");
    plans
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

fn run(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], n: usize) {
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, n);
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, n);
}

pub(crate) fn forward(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    let p = plan(n);
    run(&p.forward, data, n);
}

pub(crate) fn inverse(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    let p = plan(n);
    run(&p.inverse, data, n);
    let scale = 1.0 / (n * n) as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

/// Forward transform leaving the spectrum transposed (`xi_x` as the slow
/// index). Only valid for multipliers symmetric under `xi_x <-> xi_y`.
pub(crate) fn forward_transposed(data: &mut [Complex64], n: usize) {
    let p = plan(n);
    let mut scratch = vec![Complex64::default(); p.forward.get_inplace_scratch_len()];
    p.forward.process_with_scratch(data, &mut scratch);
    transpose(data, n);
    p.forward.process_with_scratch(data, &mut scratch);
}

/// Inverse of [`forward_transposed`].
pub(crate) fn inverse_transposed(data: &mut [Complex64], n: usize) {
    let p = plan(n);
    let mut scratch = vec![Complex64::default(); p.inverse.get_inplace_scratch_len()];
    p.inverse.process_with_scratch(data, &mut scratch);
    transpose(data, n);
    p.inverse.process_with_scratch(data, &mut scratch);
    let scale = 1.0 / (n * n) as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

/// Forward 1d transform of a single line.
pub(crate) fn forward_1d(data: &mut [Complex64]) {
    let p = plan(data.len());
    p.forward.process(data);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let n = 32;
        let orig: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.37).cos()))
            .collect();
        let mut data = orig.clone();
        forward(&mut data, n);
        inverse(&mut data, n);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn transposed_round_trip_is_identity() {
        let n = 16;
        let orig: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut full = orig.clone();
        forward(&mut full, n);
        let mut data = orig.clone();
        forward_transposed(&mut data, n);
        transpose(&mut data, n);
        for (a, b) in data.iter().zip(&full) {
            assert!((a - b).norm() < 1e-10);
        }
        transpose(&mut data, n);
        inverse_transposed(&mut data, n);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn transpose_twice_is_identity() {
        let n = 48;
        let orig: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let mut data = orig.clone();
        transpose(&mut data, n);
        assert_eq!(data[1], orig[n]);
        transpose(&mut data, n);
        assert_eq!(data, orig);
    }
}
