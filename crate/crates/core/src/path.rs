//! Time-sampled objects: a field path over an interval and a scalar path
//! for per-mode variation norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::TorusField;
use crate::lattice::{abs2, FrequencyLattice};

fn check_times(times: &[f64], min_len: usize) -> Result<()> {
    if times.len() < min_len {
        return Err(CoreError::InvalidTimeGrid(format!(
            "need at least {min_len} sample times, got {}",
            times.len()
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(CoreError::InvalidTimeGrid("non-finite sample time".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidTimeGrid(
            "sample times must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// A field `u(t)` sampled on a strictly increasing time grid spanning an
/// interval `[a, b]`. All frames share one lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceTimePath {
    times: Vec<f64>,
    frames: Vec<TorusField>,
}

impl SpaceTimePath {
    /// Path from matching time and frame arrays (at least two samples).
    pub fn new(times: Vec<f64>, frames: Vec<TorusField>) -> Result<Self> {
        check_times(&times, 2)?;
        if frames.len() != times.len() {
            return Err(CoreError::InvalidTimeGrid(format!(
                "{} frames for {} sample times",
                frames.len(),
                times.len()
            )));
        }
        let lat = *frames[0].lattice();
        if frames.iter().any(|f| *f.lattice() != lat) {
            return Err(CoreError::LatticeMismatch(
                "path frames live on different lattices".into(),
            ));
        }
        Ok(SpaceTimePath { times, frames })
    }

    /// Path sampled from a closure `t -> u(t)`.
    pub fn sample(times: Vec<f64>, u: impl Fn(f64) -> TorusField) -> Result<Self> {
        let frames = times.iter().map(|&t| u(t)).collect();
        SpaceTimePath::new(times, frames)
    }

    /// Free solution `S(t) f` sampled on the grid (`t` is absolute time).
    pub fn free(data: &TorusField, times: Vec<f64>) -> Result<Self> {
        let frames = times.iter().map(|&t| data.free_evolve(t)).collect();
        SpaceTimePath::new(times, frames)
    }

    /// Uniform grid of `n_steps + 1` samples over `[a, b]`.
    pub fn uniform_times(a: f64, b: f64, n_steps: usize) -> Vec<f64> {
        let n = n_steps.max(1);
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    }

    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn frames(&self) -> &[TorusField] {
        &self.frames
    }

    #[inline]
    pub fn frame(&self, k: usize) -> &TorusField {
        &self.frames[k]
    }

    #[inline]
    pub fn lattice(&self) -> &FrequencyLattice {
        self.frames[0].lattice()
    }

    /// Interval endpoints `(a, b)`.
    #[inline]
    pub fn interval(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Interval length `b - a`.
    #[inline]
    pub fn span(&self) -> f64 {
        let (a, b) = self.interval();
        b - a
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Restriction to the samples lying in `[a, b]` (inclusive, with a
    /// small tolerance for endpoint round-off).
    pub fn restrict(&self, a: f64, b: f64) -> Result<SpaceTimePath> {
        let eps = 1e-12 * self.span().max(1.0);
        let mut times = Vec::new();
        let mut frames = Vec::new();
        for (t, f) in self.times.iter().zip(&self.frames) {
            if *t >= a - eps && *t <= b + eps {
                times.push(*t);
                frames.push(f.clone());
            }
        }
        SpaceTimePath::new(times, frames)
    }

    /// Scaled path `c * u`.
    pub fn scaled(&self, c: Complex64) -> SpaceTimePath {
        SpaceTimePath {
            times: self.times.clone(),
            frames: self.frames.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    /// Frame-wise sum of two paths on the same grid.
    pub fn add(&self, other: &SpaceTimePath) -> Result<SpaceTimePath> {
        if self.times != other.times {
            return Err(CoreError::InvalidTimeGrid(
                "cannot add paths on different time grids".into(),
            ));
        }
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        SpaceTimePath::new(self.times.clone(), frames)
    }

    /// Frame-wise map (e.g. a projection applied along the whole path).
    pub fn map_frames(&self, op: impl Fn(&TorusField) -> TorusField) -> SpaceTimePath {
        SpaceTimePath {
            times: self.times.clone(),
            frames: self.frames.iter().map(op).collect(),
        }
    }

    /// The scalar path `t -> e^{i t |n|^2} uhat(t)(n)` of one mode, with the
    /// terminal-zero convention set (the input to per-mode variation norms).
    pub fn modulated_mode_path(&self, n: [i64; 3]) -> ScalarPath {
        let a2 = abs2(n);
        let values = self
            .times
            .iter()
            .zip(&self.frames)
            .map(|(&t, f)| f.mode(n) * Complex64::from_polar(1.0, t * a2))
            .collect();
        ScalarPath {
            times: self.times.clone(),
            values,
            terminal_zero: true,
        }
    }
}

/// A complex scalar sampled on a time grid, with an optional terminal-zero
/// convention: when set, variation computations append a virtual final
/// value `0` after the last sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarPath {
    times: Vec<f64>,
    values: Vec<Complex64>,
    terminal_zero: bool,
}

impl ScalarPath {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, terminal_zero: bool) -> Result<Self> {
        check_times(&times, 1)?;
        if values.len() != times.len() {
            return Err(CoreError::InvalidTimeGrid(format!(
                "{} values for {} sample times",
                values.len(),
                times.len()
            )));
        }
        Ok(ScalarPath {
            times,
            values,
            terminal_zero,
        })
    }

    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn terminal_zero(&self) -> bool {
        self.terminal_zero
    }

    /// Values as fed to variation norms: the samples, plus the virtual
    /// terminal zero when the convention is set.
    pub fn variation_values(&self) -> Vec<Complex64> {
        let mut v = self.values.clone();
        if self.terminal_zero {
            v.push(Complex64::default());
        }
        v
    }
}

/// Composite trapezoidal rule for samples `y_k` at nodes `t_k`.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_field(seed: u64) -> TorusField {
        use crate::rng::{CounterRng, StreamKey};
        let lat = FrequencyLattice::new(2).unwrap();
        let mut rng = CounterRng::new(StreamKey::from_seed(seed));
        let coeffs = (0..lat.n_modes())
            .map(|_| {
                let (a, b) = rng.normal_pair();
                Complex64::new(a, b)
            })
            .collect();
        TorusField::from_coeffs(lat, coeffs).unwrap()
    }

    #[test]
    fn rejects_bad_time_grids() {
        let f = small_field(1);
        assert!(SpaceTimePath::new(vec![0.0], vec![f.clone()]).is_err());
        assert!(SpaceTimePath::new(vec![0.0, 0.0], vec![f.clone(), f.clone()]).is_err());
        assert!(SpaceTimePath::new(vec![0.0, -1.0], vec![f.clone(), f.clone()]).is_err());
        assert!(SpaceTimePath::new(vec![0.0, 1.0], vec![f.clone()]).is_err());
    }

    #[test]
    fn interval_and_restriction() {
        let f = small_field(2);
        let times = SpaceTimePath::uniform_times(0.0, 1.0, 10);
        let p = SpaceTimePath::free(&f, times).unwrap();
        assert_eq!(p.interval(), (0.0, 1.0));
        assert_eq!(p.len(), 11);
        let half = p.restrict(0.0, 0.5).unwrap();
        assert_eq!(half.len(), 6);
        assert_eq!(half.interval(), (0.0, 0.5));
    }

    #[test]
    fn free_path_frames_are_free_evolutions() {
        let f = small_field(3);
        let p = SpaceTimePath::free(&f, vec![0.0, 0.25, 0.5]).unwrap();
        assert_eq!(p.frame(0), &f.free_evolve(0.0));
        assert_eq!(p.frame(2), &f.free_evolve(0.5));
    }

    #[test]
    fn modulated_mode_path_of_free_solution_is_constant() {
        let f = small_field(4);
        let times = SpaceTimePath::uniform_times(0.0, 1.0, 20);
        let p = SpaceTimePath::free(&f, times).unwrap();
        let n = [1, -2, 0];
        let sp = p.modulated_mode_path(n);
        let c0 = sp.values()[0];
        assert!((c0 - f.mode(n)).norm() < 1e-14);
        for v in sp.values() {
            assert!((v - c0).norm() < 1e-13);
        }
        assert!(sp.terminal_zero());
        assert_eq!(sp.variation_values().len(), sp.values().len() + 1);
    }

    #[test]
    fn trapezoid_integrates_linear_functions_exactly() {
        let times: Vec<f64> = (0..=50).map(|k| k as f64 / 50.0).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * t + 1.0).collect();
        let got = trapezoid(&times, &values);
        assert!((got - 2.5).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_converges_quadratically_on_smooth_integrands() {
        let int = |n: usize| {
            let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            let values: Vec<f64> = times.iter().map(|t| (t * t).exp()).collect();
            trapezoid(&times, &values)
        };
        let exact_err_100 = (int(100) - int(6400)).abs();
        let exact_err_200 = (int(200) - int(6400)).abs();
        let order = (exact_err_100 / exact_err_200).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }
}
