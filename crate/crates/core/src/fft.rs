//! Three-dimensional FFT plumbing with the series normalization
//! `f(x_j) = sum_n fhat(n) e^{i n . x_j}`, `x_j = 2*pi*j/M`.
//!
//! The forward map (grid to coefficients) therefore carries the `M^{-3}`
//! factor and the inverse map none, matching the normalized measure
//! `(2*pi)^{-3} dx` used for every spatial integral in the crate.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::lattice::FrequencyLattice;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(m)
        } else {
            p.plan_fft_forward(m)
        }
    })
}

/// In-place 3D FFT of an `m x m x m` array stored in lexicographic order
/// (last axis contiguous). Unnormalized in both directions.
pub fn fft3(data: &mut [Complex64], m: usize, inverse: bool) {
    assert_eq!(data.len(), m * m * m, "buffer is not an m^3 cube");
    let fft = plan(m, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // Axis 3 is contiguous: transform all m^2 lines in one call.
    fft.process_with_scratch(data, &mut scratch);

    // Axes 1 and 2: gather each strided line, transform, scatter back.
    let mut line = vec![Complex64::default(); m];
    for i1 in 0..m {
        for i3 in 0..m {
            for k in 0..m {
                line[k] = data[(i1 * m + k) * m + i3];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for k in 0..m {
                data[(i1 * m + k) * m + i3] = line[k];
            }
        }
    }
    for i2 in 0..m {
        for i3 in 0..m {
            for k in 0..m {
                line[k] = data[(k * m + i2) * m + i3];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for k in 0..m {
                data[(k * m + i2) * m + i3] = line[k];
            }
        }
    }
}

#[inline]
fn wrap(n: i64, m: usize) -> usize {
    n.rem_euclid(m as i64) as usize
}

/// Spatial samples of the field on an `m^3` collocation grid
/// (`m >= 2K+1`): coefficients are placed at their wrapped DFT bins and an
/// unnormalized inverse transform is applied.
pub fn coeffs_to_grid_sized(
    lat: &FrequencyLattice,
    coeffs: &[Complex64],
    m: usize,
) -> Vec<Complex64> {
    assert!(m >= lat.modes_per_axis(), "grid too small for lattice");
    assert_eq!(coeffs.len(), lat.n_modes());
    let mut data = vec![Complex64::default(); m * m * m];
    for (i, n) in lat.modes().enumerate() {
        let j = (wrap(n[0], m) * m + wrap(n[1], m)) * m + wrap(n[2], m);
        data[j] = coeffs[i];
    }
    fft3(&mut data, m, true);
    data
}

/// Fourier coefficients of grid samples: forward transform scaled by
/// `M^{-3}`, read off at the wrapped bins of the retained modes.
pub fn grid_to_coeffs_sized(
    lat: &FrequencyLattice,
    grid: &[Complex64],
    m: usize,
) -> Vec<Complex64> {
    assert!(m >= lat.modes_per_axis(), "grid too small for lattice");
    assert_eq!(grid.len(), m * m * m);
    let mut data = grid.to_vec();
    fft3(&mut data, m, false);
    let scale = 1.0 / (m * m * m) as f64;
    lat.modes()
        .map(|n| {
            let j = (wrap(n[0], m) * m + wrap(n[1], m)) * m + wrap(n[2], m);
            data[j] * scale
        })
        .collect()
}

/// [`coeffs_to_grid_sized`] on the lattice's own collocation grid.
pub fn coeffs_to_grid(lat: &FrequencyLattice, coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs_to_grid_sized(lat, coeffs, lat.grid())
}

/// [`grid_to_coeffs_sized`] on the lattice's own collocation grid.
pub fn grid_to_coeffs(lat: &FrequencyLattice, grid: &[Complex64]) -> Vec<Complex64> {
    grid_to_coeffs_sized(lat, grid, lat.grid())
}
