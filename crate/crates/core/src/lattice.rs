//! Frequency lattice geometry for the truncated torus `T^3 = [-pi, pi)^3`.
//!
//! A field is represented by its Fourier coefficients on the cube of modes
//! `n in Z^3` with `|n_i| <= K`. Enumeration order is lexicographic on
//! `(n_1, n_2, n_3)` with the last coordinate varying fastest; every
//! coefficient array in the crate is indexed this way.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Truncated frequency lattice: modes `|n_i| <= K`, collocation grid of
/// `M >= 2K+1` points per dimension at `x_j = 2*pi*j/M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyLattice {
    /// Mode cutoff `K`; retained modes satisfy `|n_i| <= K`.
    cutoff: i64,
    /// Collocation points per dimension for spatial evaluation.
    grid: usize,
}

impl FrequencyLattice {
    /// Lattice with cutoff `K` and an FFT-friendly collocation grid.
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(CoreError::InvalidParameter(
                "lattice cutoff must be >= 1".into(),
            ));
        }
        let grid = next_fast_size(2 * cutoff + 1);
        Ok(FrequencyLattice {
            cutoff: cutoff as i64,
            grid,
        })
    }

    /// Lattice with an explicit collocation grid (`M >= 2K+1`).
    pub fn with_grid(cutoff: usize, grid: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(CoreError::InvalidParameter(
                "lattice cutoff must be >= 1".into(),
            ));
        }
        if grid < 2 * cutoff + 1 {
            return Err(CoreError::InvalidParameter(format!(
                "grid size {grid} cannot represent modes up to cutoff {cutoff} \
                 (need at least {})",
                2 * cutoff + 1
            )));
        }
        Ok(FrequencyLattice {
            cutoff: cutoff as i64,
            grid,
        })
    }

    /// Mode cutoff `K`.
    #[inline]
    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    /// Collocation points per dimension.
    #[inline]
    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Modes per axis, `2K+1`.
    #[inline]
    pub fn modes_per_axis(&self) -> usize {
        (2 * self.cutoff + 1) as usize
    }

    /// Total number of retained modes, `(2K+1)^3`.
    #[inline]
    pub fn n_modes(&self) -> usize {
        let m = self.modes_per_axis();
        m * m * m
    }

    /// Grid size for alias-free evaluation of the quintic nonlinearity.
    ///
    /// `|f|^4 f` carries frequencies up to `5K` per axis; sampling on
    /// `M_pad >= 6K+1` points keeps every retained mode `|n_i| <= K` free of
    /// aliasing from the discarded band.
    #[inline]
    pub fn quintic_pad(&self) -> usize {
        next_fast_size(6 * self.cutoff as usize + 1)
    }

    /// Whether a mode lies on the lattice.
    #[inline]
    pub fn contains(&self, n: [i64; 3]) -> bool {
        n.iter().all(|&c| c.abs() <= self.cutoff)
    }

    /// Flat index of a mode (lexicographic, `n_3` fastest).
    #[inline]
    pub fn index_of(&self, n: [i64; 3]) -> usize {
        debug_assert!(self.contains(n), "mode {n:?} off lattice");
        let m = self.modes_per_axis() as i64;
        let k = self.cutoff;
        (((n[0] + k) * m + (n[1] + k)) * m + (n[2] + k)) as usize
    }

    /// Mode at a flat index.
    #[inline]
    pub fn mode_at(&self, idx: usize) -> [i64; 3] {
        let m = self.modes_per_axis();
        debug_assert!(idx < self.n_modes());
        let k = self.cutoff;
        let n3 = (idx % m) as i64 - k;
        let n2 = ((idx / m) % m) as i64 - k;
        let n1 = (idx / (m * m)) as i64 - k;
        [n1, n2, n3]
    }

    /// All modes in enumeration order (the iterator position is the flat
    /// index).
    pub fn modes(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        (0..self.n_modes()).map(move |i| self.mode_at(i))
    }

    /// Dyadic blocks `1, 2, 4, ...` up to the first block covering every
    /// lattice mode (`N >= sqrt(3) K`), so the smooth dyadic windows sum to
    /// one on the whole lattice.
    pub fn dyadic_blocks(&self) -> Vec<u64> {
        let top = (3.0_f64).sqrt() * self.cutoff as f64;
        let mut blocks = vec![1u64];
        let mut n = 2u64;
        while (n as f64) < top {
            blocks.push(n);
            n *= 2;
        }
        blocks.push(n);
        blocks
    }
}

/// `|n|^2` as a float.
#[inline]
pub fn abs2(n: [i64; 3]) -> f64 {
    (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64
}

/// Japanese bracket squared, `1 + |n|^2`.
#[inline]
pub fn bracket2(n: [i64; 3]) -> f64 {
    1.0 + abs2(n)
}

/// `<n>^s = (1 + |n|^2)^{s/2}`.
#[inline]
pub fn bracket_pow(n: [i64; 3], s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        bracket2(n).powf(0.5 * s)
    }
}

/// Smallest integer `>= n` whose only prime factors are 2, 3, and 5
/// (sizes on which the FFT stays fast).
pub fn next_fast_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// An axis-aligned cube of frequencies: `N` integer points per axis
/// starting half a side below the center.
///
/// Membership is exact integer arithmetic: `n` lies in the cube when
/// `-N <= 2(n_i - c_i) < N` for every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeSpec {
    /// Cube center in `Z^3`.
    pub center: [i64; 3],
    /// Side length (dyadic, `>= 1`).
    pub side: u64,
    /// Orientation flag; only axis-aligned cubes are supported.
    pub axis_aligned: bool,
}

impl CubeSpec {
    /// Axis-aligned cube of dyadic side `N >= 1` centered at `center`.
    pub fn new(center: [i64; 3], side: u64) -> Result<Self> {
        if side == 0 || !side.is_power_of_two() {
            return Err(CoreError::InvalidParameter(format!(
                "cube side must be a dyadic integer >= 1, got {side}"
            )));
        }
        Ok(CubeSpec {
            center,
            side,
            axis_aligned: true,
        })
    }

    /// Exact membership test.
    #[inline]
    pub fn contains(&self, n: [i64; 3]) -> bool {
        let s = self.side as i64;
        (0..3).all(|i| {
            let d = 2 * (n[i] - self.center[i]);
            -s <= d && d < s
        })
    }

    /// Number of lattice points in the cube (`N^3`).
    #[inline]
    pub fn volume(&self) -> u64 {
        self.side * self.side * self.side
    }
}
