//! Interval controller: splits a horizon into consecutive windows on
//! which both smallness diagnostics hold — the noise-path norm of the
//! stochastic convolution and the weak space-time norm of the free
//! evolution of the window's left-endpoint data.
//!
//! Window endpoints snap to the sample grid. Each diagnostic is a
//! time-integral norm and is monotone under extending the window to the
//! right, so the controller grows each window by binary search and the
//! emitted count is the greedy minimum for this grid. Every value stored
//! in the plan is computed with the same floating-point operations the
//! norm routines apply to a restricted path, so re-measuring a window
//! after the fact reproduces the stored diagnostics bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::TorusField;
use crate::norms::{lp_sum_from_logs, lq_grid_moduli, lq_time, P0, P1, Z_EXPONENT};
use crate::path::SpaceTimePath;

/// Absolute-per-unit-span tolerance for matching the horizon to a sample
/// time.
const TIME_MATCH_TOL: f64 = 1e-9;

/// The two smallness measurements attached to a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    /// Noise-path norm of the convolution restricted to the window.
    pub z_psi: f64,
    /// Weak space-time norm (regularity 1) of the free evolution of the
    /// window's left-endpoint data over the window.
    pub xtilde_free: f64,
}

/// One window of the plan, with its sample-index span and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
    /// Index of `start` in the sample grid.
    pub start_index: usize,
    /// Index of `end` in the sample grid.
    pub end_index: usize,
    pub diagnostics: WindowDiagnostics,
    /// Set when the window is a single grid step that still violates a
    /// diagnostic: the threshold is unattainable at this resolution.
    pub minimal_width: bool,
}

impl Window {
    /// Window length.
    pub fn span(&self) -> f64 {
        self.end - self.start
    }
}

/// Consecutive windows covering `[t_start, t_end]` with their threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPlan {
    /// Smallness threshold both diagnostics are held under.
    pub eta: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub windows: Vec<Window>,
}

impl WindowPlan {
    /// Number of windows `J`.
    pub fn n_windows(&self) -> usize {
        self.windows.len()
    }

    /// Whether every window met the threshold (no minimal-width marks).
    pub fn all_within_threshold(&self) -> bool {
        self.windows.iter().all(|w| !w.minimal_width)
    }

    /// Checks the structural invariants: windows are nonempty, contiguous,
    /// cover `[t_start, t_end]`, never exceed unit span, and every window
    /// either meets the threshold or carries the minimal-width mark.
    pub fn validate(&self) -> Result<()> {
        if self.windows.is_empty() {
            return Err(CoreError::InvalidParameter("empty window plan".into()));
        }
        let first = self.windows.first().unwrap();
        let last = self.windows.last().unwrap();
        if first.start != self.t_start || last.end != self.t_end {
            return Err(CoreError::InvalidParameter(
                "window plan does not span its interval".into(),
            ));
        }
        for pair in self.windows.windows(2) {
            if pair[0].end != pair[1].start || pair[0].end_index != pair[1].start_index {
                return Err(CoreError::InvalidParameter(
                    "window plan has a gap or overlap".into(),
                ));
            }
        }
        for w in &self.windows {
            if !(w.end > w.start) || w.span() > 1.0 + 1e-12 {
                return Err(CoreError::InvalidParameter(format!(
                    "window [{}, {}] is degenerate or exceeds unit span",
                    w.start, w.end
                )));
            }
            if !w.minimal_width
                && !(w.diagnostics.z_psi <= self.eta && w.diagnostics.xtilde_free <= self.eta)
            {
                return Err(CoreError::InvalidParameter(format!(
                    "window [{}, {}] exceeds the threshold without a \
                     minimal-width mark",
                    w.start, w.end
                )));
            }
        }
        Ok(())
    }
}

/// Per-(dyadic block, frame) spatial norms of a path, one column per
/// requested exponent: `profiles[block][exponent][frame]`.
fn moduli_profiles(path: &SpaceTimePath, exponents: &[f64]) -> Vec<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    path.lattice()
        .dyadic_blocks()
        .iter()
        .map(|&n_block| {
            let grids: Vec<Vec<f64>> = path
                .frames()
                .par_iter()
                .map(|f| {
                    f.lp_project(n_block)
                        .expect("dyadic block")
                        .to_grid()
                        .iter()
                        .map(|g| g.norm())
                        .collect()
                })
                .collect();
            exponents
                .iter()
                .map(|&q| grids.iter().map(|g| lq_grid_moduli(g, q)).collect())
                .collect()
        })
        .collect()
}

/// Precomputed tables for window diagnostics over one sample grid.
struct DiagnosticTables<'a> {
    times: &'a [f64],
    blocks: Vec<u64>,
    /// Convolution: spatial norm at the noise-path exponent.
    psi_cols: Vec<Vec<Vec<f64>>>,
    /// Free path: spatial norms at the two weak-norm exponents.
    free_cols: Vec<Vec<Vec<f64>>>,
}

impl<'a> DiagnosticTables<'a> {
    fn build(psi: &'a SpaceTimePath, free: &SpaceTimePath) -> Self {
        DiagnosticTables {
            times: psi.times(),
            blocks: psi.lattice().dyadic_blocks(),
            psi_cols: moduli_profiles(psi, &[Z_EXPONENT]),
            free_cols: moduli_profiles(free, &[P0, P1]),
        }
    }

    /// Noise-path norm over samples `i..=j`; same operations as the norm
    /// routine applied to the restricted path.
    fn z_psi(&self, i: usize, j: usize) -> f64 {
        let times = &self.times[i..=j];
        let mut total = 0.0f64;
        for (&n_block, cols) in self.blocks.iter().zip(&self.psi_cols) {
            let m = lq_time(times, &cols[0][i..=j], Z_EXPONENT);
            total += (n_block as f64).powf(2.0 * 1.0) * m * m;
        }
        total.sqrt()
    }

    /// Weak space-time norm (regularity 1) of the free path over samples
    /// `i..=j`; same operations as the norm routine applied to the
    /// restricted path.
    fn xtilde_free(&self, i: usize, j: usize) -> f64 {
        let times = &self.times[i..=j];
        let mut out = [0.0f64; 2];
        for (slot, &p) in [P0, P1].iter().enumerate() {
            let log_terms: Vec<f64> = self
                .blocks
                .iter()
                .zip(&self.free_cols)
                .map(|(&n_block, cols)| {
                    let norm = lq_time(times, &cols[slot][i..=j], p);
                    if norm == 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        (5.0 + (1.0 - 1.5) * p) * (n_block as f64).ln() + p * norm.ln()
                    }
                })
                .collect();
            out[slot] = lp_sum_from_logs(&log_terms, p);
        }
        out[0] + out[1]
    }

    fn diagnostics(&self, i: usize, j: usize) -> WindowDiagnostics {
        WindowDiagnostics {
            z_psi: self.z_psi(i, j),
            xtilde_free: self.xtilde_free(i, j),
        }
    }
}

/// Splits `[start of psi, t_end]` into consecutive windows on which both
/// the noise-path norm of `psi` and the weak space-time norm of the free
/// evolution of the running left-endpoint data stay at or below `eta`.
///
/// The left-endpoint data of the window starting at `t_i` is `S(t_i) w0`,
/// so its free evolution over the window is the global free path of `w0`
/// restricted to the window. Windows are grown greedily from the left by
/// binary search (both diagnostics are monotone in the right endpoint)
/// and are capped at unit span. A single-step window that still violates
/// a diagnostic is emitted with the minimal-width mark: the threshold is
/// unattainable at this grid resolution.
pub fn interval_partition(
    psi: &SpaceTimePath,
    w0: &TorusField,
    t_end: f64,
    eta: f64,
) -> Result<WindowPlan> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "threshold must be positive, got {eta}"
        )));
    }
    if w0.lattice() != psi.lattice() {
        return Err(CoreError::LatticeMismatch(
            "left-endpoint data does not live on the convolution's lattice".into(),
        ));
    }
    let times = psi.times();
    let tol = TIME_MATCH_TOL * psi.span().max(1.0);
    let end_index = times
        .iter()
        .position(|&t| (t - t_end).abs() <= tol)
        .ok_or_else(|| {
            CoreError::InvalidTimeGrid(format!(
                "horizon {t_end} is not a sample time of the convolution path"
            ))
        })?;
    if end_index == 0 {
        return Err(CoreError::InvalidParameter(
            "horizon must lie strictly after the first sample".into(),
        ));
    }
    if times[..=end_index].windows(2).any(|w| w[1] - w[0] > 1.0) {
        return Err(CoreError::InvalidTimeGrid(
            "sample spacing exceeds the unit window cap".into(),
        ));
    }

    let free = SpaceTimePath::free(w0, times.to_vec())?;
    let tables = DiagnosticTables::build(psi, &free);

    let mut windows = Vec::new();
    let mut i = 0usize;
    while i < end_index {
        // Largest admissible right endpoint: unit span, inside horizon.
        let mut hi = i + 1;
        while hi < end_index && times[hi + 1] - times[i] <= 1.0 {
            hi += 1;
        }
        let ok = |j: usize| {
            let d = tables.diagnostics(i, j);
            d.z_psi <= eta && d.xtilde_free <= eta
        };
        let (j, minimal_width) = if !ok(i + 1) {
            (i + 1, true)
        } else {
            let (mut lo, mut up) = (i + 1, hi);
            while lo < up {
                let mid = up - (up - lo) / 2;
                if ok(mid) {
                    lo = mid;
                } else {
                    up = mid - 1;
                }
            }
            (lo, false)
        };
        windows.push(Window {
            start: times[i],
            end: times[j],
            start_index: i,
            end_index: j,
            diagnostics: tables.diagnostics(i, j),
            minimal_width,
        });
        i = j;
    }

    let plan = WindowPlan {
        eta,
        t_start: times[0],
        t_end: times[end_index],
        windows,
    };
    plan.validate()?;
    Ok(plan)
}
