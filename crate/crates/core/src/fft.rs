//! N-dimensional complex FFT on row-major data, built on rustfft.
//!
//! Conventions: the forward transform carries the 1/M normalization
//! (M = total points), so the coefficient of the zero mode is the field
//! mean and a unit-amplitude cosine splits into a conjugate pair of
//! amplitude 1/2. The inverse transform is the plain unnormalized sum, so
//! `inverse(forward(x)) == x` to round-off.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::exec;

type PlanKey = (usize, bool);

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let direction = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(len, direction)
        })
        .clone()
}

fn transform_rows(data: &mut [Complex<f64>], n: usize, forward: bool) {
    let fft = plan(n, forward);
    let scratch_len = fft.get_inplace_scratch_len();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex::default(); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = vec![Complex::default(); scratch_len];
        for row in data.chunks_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
}

/// Out-of-place square transpose of an n*n block.
fn transpose_square(src: &[Complex<f64>], dst: &mut [Complex<f64>], n: usize) {
    exec::for_each_chunk_mut(dst, n, |row, out| {
        for (col, v) in out.iter_mut().enumerate() {
            *v = src[col * n + row];
        }
    });
}

/// In-place N-D FFT over `shape` (row-major, last axis fastest).
///
/// Only the square shapes used by the crate are supported: every axis has
/// the same length `n` and `data.len()` is a multiple of `n^dim`.
pub fn ndfft(data: &mut [Complex<f64>], n: usize, dim: usize, forward: bool) {
    let points = n.pow(dim as u32);
    debug_assert_eq!(data.len() % points, 0);

    match dim {
        1 => transform_rows(data, n, forward),
        2 => {
            // axis 1 (fastest) as contiguous rows
            transform_rows(data, n, forward);
            // axis 0 via transpose
            let mut scratch = vec![Complex::default(); points];
            for block in data.chunks_mut(points) {
                transpose_square(block, &mut scratch, n);
                transform_rows(&mut scratch, n, forward);
                transpose_square(&scratch, block, n);
            }
        }
        3 => {
            // axis 2 contiguous
            transform_rows(data, n, forward);
            // axes 0 and 1 by strided gather/scatter; fine at the low
            // resolutions 3D is used for.
            let mut line = vec![Complex::default(); n];
            for block in data.chunks_mut(points) {
                for axis in [1usize, 0] {
                    let stride = n.pow((2 - axis) as u32);
                    let lines = points / n;
                    for l in 0..lines {
                        let inner = l % stride;
                        let outer = l / stride;
                        let base = outer * stride * n + inner;
                        for (i, v) in line.iter_mut().enumerate() {
                            *v = block[base + i * stride];
                        }
                        transform_rows(&mut line, n, forward);
                        for (i, v) in line.iter().enumerate() {
                            block[base + i * stride] = *v;
                        }
                    }
                }
            }
        }
        _ => panic!("unsupported dimension {dim}"),
    }

    if forward {
        let scale = 1.0 / points as f64;
        exec::for_each_chunk_mut(data, exec::SUM_CHUNK, |_, chunk| {
            for v in chunk {
                *v *= scale;
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d_identity() {
        let n = 16;
        let mut data: Vec<Complex<f64>> = (0..n * n)
            .map(|i| Complex::new((i as f64 * 0.7).sin(), 0.0))
            .collect();
        let original = data.clone();
        ndfft(&mut data, n, 2, true);
        ndfft(&mut data, n, 2, false);
        for (a, b) in data.iter().zip(&original) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn forward_of_constant_is_mean_in_zero_mode() {
        let n = 8;
        let mut data = vec![Complex::new(3.25, 0.0); n * n];
        ndfft(&mut data, n, 2, true);
        assert!((data[0].re - 3.25).abs() < 1e-13);
        assert!(data.iter().skip(1).all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn single_cosine_splits_into_conjugate_pair() {
        let n = 32;
        let mut data: Vec<Complex<f64>> = (0..n * n)
            .map(|i| {
                let x = (i % n) as f64 * std::f64::consts::TAU / n as f64;
                Complex::new(x.cos(), 0.0)
            })
            .collect();
        ndfft(&mut data, n, 2, true);
        // modes (kx, ky) = (+-1, 0), amplitude 1/2 each
        assert!((data[1].re - 0.5).abs() < 1e-13);
        assert!((data[n - 1].re - 0.5).abs() < 1e-13);
    }
}
