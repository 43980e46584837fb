//! Unnormalised 3D complex FFT on `n³` row-major cubes, built from rustfft
//! line transforms.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `X_k = Σ_x x_x e^{-2πi k·x/n}`
    Forward,
    /// `x_x = Σ_k X_k e^{+2πi k·x/n}` (no `1/n³`)
    Inverse,
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    })
}

/// In-place transform of `data`, indexed `(i * n + j) * n + l`.
pub(crate) fn fft3(data: &mut [Complex64], n: usize, dir: Direction) {
    assert_eq!(data.len(), n * n * n);
    let fft = plan(n, dir);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // contiguous axis
    fft.process_with_scratch(data, &mut scratch);

    let mut line = vec![Complex64::default(); n];
    // middle axis
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                line[j] = data[(i * n + j) * n + l];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for j in 0..n {
                data[(i * n + j) * n + l] = line[j];
            }
        }
    }
    // slowest axis
    for j in 0..n {
        for l in 0..n {
            for i in 0..n {
                line[i] = data[(i * n + j) * n + l];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for i in 0..n {
                data[(i * n + j) * n + l] = line[i];
            }
        }
    }
}
