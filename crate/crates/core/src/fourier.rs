//! FFT helpers for doubly periodic grid fields.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::fields::CartesianGrid2;

/// Signed integer wavenumber of FFT bin `m` out of `n`.
#[inline]
pub fn signed_mode(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Unnormalised 2D forward transform of a row-major field.
pub fn fft2(grid: &CartesianGrid2, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform2(grid, &mut data, false);
    data
}

/// Inverse of [`fft2`], including the 1/N normalisation; returns real parts.
pub fn ifft2_real(grid: &CartesianGrid2, spectrum: &[Complex64]) -> Vec<f64> {
    let mut data = spectrum.to_vec();
    transform2(grid, &mut data, true);
    let n = grid.len() as f64;
    data.iter().map(|c| c.re / n).collect()
}

fn transform2(grid: &CartesianGrid2, data: &mut [Complex64], inverse: bool) {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut planner = FftPlanner::new();
    let (fx, fy) = if inverse {
        (planner.plan_fft_inverse(nx), planner.plan_fft_inverse(ny))
    } else {
        (planner.plan_fft_forward(nx), planner.plan_fft_forward(ny))
    };
    for row in data.chunks_exact_mut(nx) {
        fx.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = data[j * nx + i];
        }
        fy.process(&mut col);
        for j in 0..ny {
            data[j * nx + i] = col[j];
        }
    }
}

/// Spectral first derivative along x (`axis = 0`) or y (`axis = 1`). The
/// Nyquist mode of the derivative is zeroed.
pub fn spectral_derivative(grid: &CartesianGrid2, values: &[f64], axis: usize) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let n = if axis == 0 { nx } else { ny };
    let period = grid.h * n as f64;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut out = vec![0.0; values.len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let lines = if axis == 0 { ny } else { nx };
    for l in 0..lines {
        let at = |k: usize| if axis == 0 { l * nx + k } else { k * nx + l };
        for (k, c) in line.iter_mut().enumerate() {
            *c = Complex64::new(values[at(k)], 0.0);
        }
        fwd.process(&mut line);
        for (m, c) in line.iter_mut().enumerate() {
            if n % 2 == 0 && m == n / 2 {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let kappa = std::f64::consts::TAU * signed_mode(m, n) as f64 / period;
            *c *= Complex64::new(0.0, kappa);
        }
        inv.process(&mut line);
        for (k, c) in line.iter().enumerate() {
            out[at(k)] = c.re / n as f64;
        }
    }
    out
}
