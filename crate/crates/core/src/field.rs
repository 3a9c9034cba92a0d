//! Spatial states on the torus: truncated Fourier series with the
//! multipliers and projections used throughout the crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fft;
use crate::lattice::{abs2, bracket_pow, CubeSpec, FrequencyLattice};

/// Smooth radial cutoff: `1` on `[0,1]`, `0` on `[2,inf)`, with a
/// `C^infinity` transition built from `exp(-1/t)`.
pub fn smooth_cutoff(s: f64) -> f64 {
    let r = s.abs();
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let h = |t: f64| (-1.0 / t).exp();
        let a = h(2.0 - r);
        a / (a + h(r - 1.0))
    }
}

/// Dyadic annulus window: the difference of smooth cutoffs at scales `N`
/// and `N/2`, with the block `N = 1` absorbing everything below.
///
/// Windows telescope: summing over `N = 1, 2, ..., N_max` reproduces the
/// cutoff at scale `N_max`, which is identically one for `r <= N_max`.
pub fn dyadic_window(r: f64, n_block: u64) -> f64 {
    debug_assert!(n_block.is_power_of_two());
    if n_block == 1 {
        smooth_cutoff(r)
    } else {
        let n = n_block as f64;
        smooth_cutoff(r / n) - smooth_cutoff(2.0 * r / n)
    }
}

/// A complex field on `T^3` held as Fourier coefficients over a
/// [`FrequencyLattice`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusField {
    lattice: FrequencyLattice,
    coeffs: Vec<Complex64>,
}

impl TorusField {
    /// The zero field.
    pub fn zero(lattice: FrequencyLattice) -> Self {
        TorusField {
            lattice,
            coeffs: vec![Complex64::default(); lattice.n_modes()],
        }
    }

    /// Field from a coefficient array in lattice enumeration order.
    pub fn from_coeffs(lattice: FrequencyLattice, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.n_modes() {
            return Err(CoreError::LatticeMismatch(format!(
                "coefficient array has length {}, lattice has {} modes",
                coeffs.len(),
                lattice.n_modes()
            )));
        }
        Ok(TorusField { lattice, coeffs })
    }

    /// Field with coefficients given mode-wise by a closure.
    pub fn from_fn(lattice: FrequencyLattice, f: impl Fn([i64; 3]) -> Complex64) -> Self {
        let coeffs = lattice.modes().map(f).collect();
        TorusField { lattice, coeffs }
    }

    /// Field reconstructed from collocation-grid samples.
    pub fn from_grid(lattice: FrequencyLattice, grid: &[Complex64]) -> Result<Self> {
        let m = lattice.grid();
        if grid.len() != m * m * m {
            return Err(CoreError::LatticeMismatch(format!(
                "grid array has length {}, lattice grid is {m}^3",
                grid.len()
            )));
        }
        Ok(TorusField {
            lattice,
            coeffs: fft::grid_to_coeffs(&lattice, grid),
        })
    }

    #[inline]
    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of one mode.
    #[inline]
    pub fn mode(&self, n: [i64; 3]) -> Complex64 {
        self.coeffs[self.lattice.index_of(n)]
    }

    /// Sets the coefficient of one mode.
    #[inline]
    pub fn set_mode(&mut self, n: [i64; 3], c: Complex64) {
        let i = self.lattice.index_of(n);
        self.coeffs[i] = c;
    }

    /// Samples on the lattice's collocation grid.
    pub fn to_grid(&self) -> Vec<Complex64> {
        fft::coeffs_to_grid(&self.lattice, &self.coeffs)
    }

    /// Largest `max_i |n_i|` over modes with nonzero coefficient
    /// (0 for the zero field). Used to size exact product quadratures.
    pub fn support_band(&self) -> usize {
        let mut band = 0usize;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() > 0.0 {
                let n = self.lattice.mode_at(i);
                let b = n.iter().map(|c| c.unsigned_abs() as usize).max().unwrap();
                band = band.max(b);
            }
        }
        band
    }

    /// Coefficient-wise multiplication by a real mode function.
    fn multiplier(&self, w: impl Fn([i64; 3]) -> f64) -> TorusField {
        let coeffs = self
            .lattice
            .modes()
            .zip(&self.coeffs)
            .map(|(n, c)| c * w(n))
            .collect();
        TorusField {
            lattice: self.lattice,
            coeffs,
        }
    }

    /// Smooth dyadic frequency projection onto the annulus at scale
    /// `n_block` (power of two).
    pub fn lp_project(&self, n_block: u64) -> Result<TorusField> {
        if n_block == 0 || !n_block.is_power_of_two() {
            return Err(CoreError::InvalidParameter(format!(
                "dyadic block must be a power of two >= 1, got {n_block}"
            )));
        }
        Ok(self.multiplier(|n| dyadic_window(abs2(n).sqrt(), n_block)))
    }

    /// Sharp projection onto a frequency cube.
    pub fn cube_project(&self, cube: &CubeSpec) -> TorusField {
        self.multiplier(|n| if cube.contains(n) { 1.0 } else { 0.0 })
    }

    /// Multiplier `<n>^s = (1+|n|^2)^{s/2}` (smoothing for `s < 0`,
    /// differentiation-strength for `s > 0`).
    pub fn bessel_multiplier(&self, s: f64) -> TorusField {
        self.multiplier(|n| bracket_pow(n, s))
    }

    /// Free Schrödinger flow for time `t`: phase `e^{-i t |n|^2}` per mode.
    pub fn free_evolve(&self, t: f64) -> TorusField {
        if t == 0.0 {
            return self.clone();
        }
        let coeffs = self
            .lattice
            .modes()
            .zip(&self.coeffs)
            .map(|(n, c)| c * Complex64::from_polar(1.0, -t * abs2(n)))
            .collect();
        TorusField {
            lattice: self.lattice,
            coeffs,
        }
    }

    /// Lattice truncation of `|f|^4 f`, computed alias-free: zero-pad to a
    /// grid of at least `6K+1` points per axis, evaluate pointwise, and
    /// transform back.
    pub fn quintic_nonlinearity(&self) -> TorusField {
        let m = self.lattice.quintic_pad();
        let mut grid = fft::coeffs_to_grid_sized(&self.lattice, &self.coeffs, m);
        for g in &mut grid {
            let a2 = g.norm_sqr();
            *g *= a2 * a2;
        }
        TorusField {
            lattice: self.lattice,
            coeffs: fft::grid_to_coeffs_sized(&self.lattice, &grid, m),
        }
    }

    /// Exact flow of `i u_t = |u|^4 u` for time `dt` on the dealiased grid:
    /// each sample rotates by `e^{-i dt |u|^4}`, then the result is
    /// truncated back to the lattice.
    pub fn quintic_rotation(&self, dt: f64) -> TorusField {
        let m = self.lattice.quintic_pad();
        let mut grid = fft::coeffs_to_grid_sized(&self.lattice, &self.coeffs, m);
        for g in &mut grid {
            let a2 = g.norm_sqr();
            *g *= Complex64::from_polar(1.0, -dt * a2 * a2);
        }
        TorusField {
            lattice: self.lattice,
            coeffs: fft::grid_to_coeffs_sized(&self.lattice, &grid, m),
        }
    }

    /// `self + c * other`, in place.
    pub fn add_scaled(&mut self, c: Complex64, other: &TorusField) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(CoreError::LatticeMismatch(
                "cannot combine fields on different lattices".into(),
            ));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
        Ok(())
    }

    /// `self + other`.
    pub fn add(&self, other: &TorusField) -> Result<TorusField> {
        let mut out = self.clone();
        out.add_scaled(Complex64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    /// `self - other`.
    pub fn sub(&self, other: &TorusField) -> Result<TorusField> {
        let mut out = self.clone();
        out.add_scaled(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    /// `c * self`.
    pub fn scaled(&self, c: Complex64) -> TorusField {
        TorusField {
            lattice: self.lattice,
            coeffs: self.coeffs.iter().map(|a| c * a).collect(),
        }
    }

    /// `l^2` coefficient inner product `<f, g> = sum fhat(n) conj(ghat(n))`,
    /// which equals the normalized spatial `L^2` pairing.
    pub fn inner(&self, other: &TorusField) -> Result<Complex64> {
        if self.lattice != other.lattice {
            return Err(CoreError::LatticeMismatch(
                "cannot pair fields on different lattices".into(),
            ));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    /// Normalized-measure mass `int |f|^2 = sum |fhat(n)|^2`.
    #[inline]
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `L^2` norm (square root of the mass).
    #[inline]
    pub fn norm_l2(&self) -> f64 {
        self.mass().sqrt()
    }

    /// Sobolev `H^s` norm straight from coefficients:
    /// `( sum_n <n>^{2s} |fhat(n)|^2 )^{1/2}`.
    pub fn h_norm(&self, s: f64) -> f64 {
        self.lattice
            .modes()
            .zip(&self.coeffs)
            .map(|(n, c)| bracket_pow(n, 2.0 * s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `int |grad f|^2 = sum |n|^2 |fhat(n)|^2`.
    pub fn gradient_norm_sqr(&self) -> f64 {
        self.lattice
            .modes()
            .zip(&self.coeffs)
            .map(|(n, c)| abs2(n) * c.norm_sqr())
            .sum()
    }

    /// Normalized-measure integral `int |f|^6`, evaluated exactly on the
    /// dealiased grid (the integrand has bandwidth `6K` per axis).
    pub fn sextic_mean(&self) -> f64 {
        let m = self.lattice.quintic_pad();
        let grid = fft::coeffs_to_grid_sized(&self.lattice, &self.coeffs, m);
        let sum: f64 = grid
            .iter()
            .map(|g| {
                let a2 = g.norm_sqr();
                a2 * a2 * a2
            })
            .sum();
        sum / (m * m * m) as f64
    }

    /// Whether all coefficients are finite.
    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}
