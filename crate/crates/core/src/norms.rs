//! Discrete norms for fields and space-time paths.
//!
//! Spatial Lebesgue norms use the normalized measure (grid averages), time
//! integrals use the Lebesgue measure on the interval via the composite
//! trapezoidal rule, and large exponents (up to 100) are handled with
//! max-normalized and log-domain sums so nothing overflows.
//!
//! Two conventions matter for the path norms:
//!
//! * restriction-type norms (`Y^s`) are evaluated on the canonical
//!   extension that jumps to zero after the last sample, making every
//!   reported value an upper bound for the infimum over extensions;
//! * the `X~` family takes its supremum over subintervals at the full
//!   interval, which is exact because space-time Lebesgue norms are
//!   monotone under interval inclusion.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::TorusField;
use crate::lattice::bracket_pow;
use crate::path::{trapezoid, ScalarPath, SpaceTimePath};
use crate::pvar;

/// Smaller space-time exponent of the weak norm family, `4 + 1/10`.
pub const P0: f64 = 4.0 + 1.0 / 10.0;
/// Larger space-time exponent of the weak norm family.
pub const P1: f64 = 100.0;
/// Lebesgue exponent of the noise norm, `2 p0 / (p0 - 4) = 82`.
pub const Z_EXPONENT: f64 = 82.0;

/// Which norm a [`NormValue`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    Sobolev,
    SquareFunction,
    Mixed,
    L2Mixed,
    PVariation,
    Y,
    Xtilde,
    M,
    Z,
}

/// Exponent/regularity parameters attached to a norm value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

/// A nonnegative norm evaluation tagged with its kind and parameters.
/// `NaN` is rejected at construction; it is never a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub kind: NormKind,
    pub params: NormParams,
}

impl NormValue {
    pub fn new(kind: NormKind, params: NormParams, value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(CoreError::InvalidParameter(format!(
                "{kind:?} norm evaluated to NaN"
            )));
        }
        if value < 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "{kind:?} norm evaluated to a negative value {value}"
            )));
        }
        Ok(NormValue {
            value,
            kind,
            params,
        })
    }
}

fn check_exponent(name: &str, q: f64, min: f64, allow_inf: bool) -> Result<()> {
    if q.is_nan() || q < min || (!allow_inf && !q.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "exponent {name}={q} outside its admissible range (min {min}, \
             infinity {})",
            if allow_inf { "allowed" } else { "excluded" }
        )));
    }
    Ok(())
}

/// `L^q` norm of grid moduli with the normalized measure, max-normalized
/// for stability at large `q`. `q = inf` is the grid maximum.
pub(crate) fn lq_grid_moduli(moduli: &[f64], q: f64) -> f64 {
    let peak = moduli.iter().cloned().fold(0.0f64, f64::max);
    if peak == 0.0 || q.is_infinite() {
        return peak;
    }
    let sum: f64 = moduli.iter().map(|m| (m / peak).powf(q)).sum();
    peak * (sum / moduli.len() as f64).powf(1.0 / q)
}

fn lq_grid(grid: &[Complex64], q: f64) -> f64 {
    let moduli: Vec<f64> = grid.iter().map(|g| g.norm()).collect();
    lq_grid_moduli(&moduli, q)
}

/// `L^q(I)` norm of nonnegative samples under the trapezoidal rule,
/// max-normalized. `q = inf` is the sample maximum.
pub(crate) fn lq_time(times: &[f64], w: &[f64], q: f64) -> f64 {
    let peak = w.iter().cloned().fold(0.0f64, f64::max);
    if peak == 0.0 || q.is_infinite() {
        return peak;
    }
    let powered: Vec<f64> = w.iter().map(|x| (x / peak).powf(q)).collect();
    peak * trapezoid(times, &powered).powf(1.0 / q)
}

/// `(sum_i exp(log_terms_i))^{1/p}` computed in the log domain; entries of
/// `-inf` (vanishing terms) are skipped.
pub(crate) fn lp_sum_from_logs(log_terms: &[f64], p: f64) -> f64 {
    let peak = log_terms
        .iter()
        .cloned()
        .filter(|x| x.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return 0.0;
    }
    let sum: f64 = log_terms
        .iter()
        .filter(|x| x.is_finite())
        .map(|&t| (t - peak).exp())
        .sum();
    ((peak + sum.ln()) / p).exp()
}

/// Sobolev norm `|| <grad>^s f ||_{L^q}` with the normalized measure.
pub fn sobolev_norm(f: &TorusField, s: f64, q: f64) -> Result<NormValue> {
    check_exponent("q", q, 1.0, true)?;
    let g = if s == 0.0 {
        f.clone()
    } else {
        f.bessel_multiplier(s)
    };
    let value = lq_grid(&g.to_grid(), q);
    NormValue::new(
        NormKind::Sobolev,
        NormParams {
            s: Some(s),
            q: Some(q),
            ..Default::default()
        },
        value,
    )
}

/// Littlewood–Paley square function norm
/// `|| (sum_N N^{2s} |P_N f|^2)^{1/2} ||_{L^q}`, `1 < q < inf`.
pub fn square_function_norm(f: &TorusField, s: f64, q: f64) -> Result<NormValue> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "square function norm needs 1 < q < inf, got {q}"
        )));
    }
    let m3 = {
        let m = f.lattice().grid();
        m * m * m
    };
    let mut sq = vec![0.0f64; m3];
    for n_block in f.lattice().dyadic_blocks() {
        let weight = (n_block as f64).powf(2.0 * s);
        let grid = f.lp_project(n_block)?.to_grid();
        for (acc, g) in sq.iter_mut().zip(&grid) {
            *acc += weight * g.norm_sqr();
        }
    }
    let moduli: Vec<f64> = sq.iter().map(|x| x.sqrt()).collect();
    let value = lq_grid_moduli(&moduli, q);
    NormValue::new(
        NormKind::SquareFunction,
        NormParams {
            s: Some(s),
            q: Some(q),
            ..Default::default()
        },
        value,
    )
}

fn frame_sobolev_values(u: &SpaceTimePath, s: f64, r: f64) -> Vec<f64> {
    u.frames()
        .par_iter()
        .map(|f| {
            let g = if s == 0.0 {
                f.clone()
            } else {
                f.bessel_multiplier(s)
            };
            lq_grid(&g.to_grid(), r)
        })
        .collect()
}

/// Mixed norm `|| u ||_{L^q(I; W^{s,r})}`: trapezoidal time integral of
/// frame-wise Sobolev norms (`q = inf` takes the maximum over samples).
pub fn mixed_norm(u: &SpaceTimePath, q: f64, s: f64, r: f64) -> Result<NormValue> {
    check_exponent("q", q, 1.0, true)?;
    check_exponent("r", r, 1.0, true)?;
    let w = frame_sobolev_values(u, s, r);
    let value = lq_time(u.times(), &w, q);
    NormValue::new(
        NormKind::Mixed,
        NormParams {
            s: Some(s),
            q: Some(q),
            r: Some(r),
            ..Default::default()
        },
        value,
    )
}

/// Dyadically aggregated mixed norm
/// `( sum_N N^{2s} || P_N u ||_{L^q L^r}^2 )^{1/2}`.
pub fn l2_mixed_norm(u: &SpaceTimePath, q: f64, s: f64, r: f64) -> Result<NormValue> {
    check_exponent("q", q, 1.0, true)?;
    check_exponent("r", r, 1.0, true)?;
    let mut total = 0.0f64;
    for n_block in u.lattice().dyadic_blocks() {
        let block_path = u.map_frames(|f| f.lp_project(n_block).expect("dyadic block"));
        let w = frame_sobolev_values(&block_path, 0.0, r);
        let m = lq_time(u.times(), &w, q);
        total += (n_block as f64).powf(2.0 * s) * m * m;
    }
    NormValue::new(
        NormKind::L2Mixed,
        NormParams {
            s: Some(s),
            q: Some(q),
            r: Some(r),
            ..Default::default()
        },
        total.sqrt(),
    )
}

/// Exact `p`-variation of a scalar path over its sample points, honoring
/// the terminal-zero convention when the path carries it.
pub fn p_variation(v: &ScalarPath, p: f64) -> Result<NormValue> {
    check_exponent("p", p, 1.0, false)?;
    let value = pvar::variation(&v.variation_values(), p);
    NormValue::new(
        NormKind::PVariation,
        NormParams {
            p: Some(p),
            ..Default::default()
        },
        value,
    )
}

/// `Y^s` norm: weighted `l^2` aggregate over modes of the square
/// 2-variation of `t -> e^{i t |n|^2} uhat(t)(n)` with the terminal-zero
/// convention.
///
/// Modes are processed in lattice order with a sequential reduction, so
/// the result does not depend on the parallel schedule.
pub fn y_norm(u: &SpaceTimePath, s: f64) -> Result<NormValue> {
    let modes: Vec<[i64; 3]> = u.lattice().modes().collect();
    let powers: Vec<f64> = modes
        .par_iter()
        .map(|&n| {
            let path = u.modulated_mode_path(n);
            pvar::variation_power_sum(&path.variation_values(), 2.0)
        })
        .collect();
    let total: f64 = modes
        .iter()
        .zip(&powers)
        .map(|(&n, &v2)| bracket_pow(n, 2.0 * s) * v2)
        .sum();
    NormValue::new(
        NormKind::Y,
        NormParams {
            s: Some(s),
            ..Default::default()
        },
        total.sqrt(),
    )
}

fn check_unit_interval(u: &SpaceTimePath) -> Result<()> {
    if u.span() > 1.0 + 1e-12 {
        return Err(CoreError::InvalidParameter(format!(
            "interval length {} exceeds 1; this norm family is defined on \
             intervals of length at most 1",
            u.span()
        )));
    }
    Ok(())
}

/// The two homogeneous summands of the weak space-time norm, at exponents
/// [`P0`] and [`P1`]:
/// `( sum_N N^{5 + (s - 3/2) p} || P_N u ||_{L^p_{t,x}}^p )^{1/p}`.
pub fn xtilde_terms(u: &SpaceTimePath, s: f64) -> Result<[f64; 2]> {
    check_unit_interval(u)?;
    let blocks = u.lattice().dyadic_blocks();
    // One projection pass per block, reused by both exponents.
    let mut per_block_norms: Vec<[f64; 2]> = Vec::with_capacity(blocks.len());
    for &n_block in &blocks {
        let block_path = u.map_frames(|f| f.lp_project(n_block).expect("dyadic block"));
        let grids: Vec<Vec<f64>> = block_path
            .frames()
            .par_iter()
            .map(|f| f.to_grid().iter().map(|g| g.norm()).collect())
            .collect();
        let mut pair = [0.0f64; 2];
        for (slot, &p) in [P0, P1].iter().enumerate() {
            let w: Vec<f64> = grids.iter().map(|g| lq_grid_moduli(g, p)).collect();
            pair[slot] = lq_time(u.times(), &w, p);
        }
        per_block_norms.push(pair);
    }
    let mut out = [0.0f64; 2];
    for (slot, &p) in [P0, P1].iter().enumerate() {
        let log_terms: Vec<f64> = blocks
            .iter()
            .zip(&per_block_norms)
            .map(|(&n_block, pair)| {
                let norm = pair[slot];
                if norm == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (5.0 + (s - 1.5) * p) * (n_block as f64).ln() + p * norm.ln()
                }
            })
            .collect();
        out[slot] = lp_sum_from_logs(&log_terms, p);
    }
    Ok(out)
}

/// Weak space-time norm: the sum of the two [`xtilde_terms`]. The
/// supremum over subintervals is attained at the full interval because
/// each summand is monotone under interval inclusion.
pub fn xtilde_norm(u: &SpaceTimePath, s: f64) -> Result<NormValue> {
    let [a, b] = xtilde_terms(u, s)?;
    NormValue::new(
        NormKind::Xtilde,
        NormParams {
            s: Some(s),
            ..Default::default()
        },
        a + b,
    )
}

/// Interpolation norm: geometric mean of the weak norm at regularity 1 and
/// a caller-supplied upper bound for the atomic space-time norm at
/// regularity 1 (the exact atomic norm is an infimum and is not computed;
/// any valid upper bound keeps the result an upper bound).
pub fn m_norm(u: &SpaceTimePath, x1_upper: &NormValue) -> Result<NormValue> {
    if !(x1_upper.value >= 0.0) {
        return Err(CoreError::InvalidParameter(
            "atomic-norm upper bound must be nonnegative".into(),
        ));
    }
    let xt = xtilde_norm(u, 1.0)?;
    NormValue::new(
        NormKind::M,
        NormParams {
            s: Some(1.0),
            ..Default::default()
        },
        (xt.value * x1_upper.value).sqrt(),
    )
}

/// Noise-path norm: the dyadically aggregated mixed norm at regularity 1
/// with time and space exponents both [`Z_EXPONENT`].
pub fn z_norm(u: &SpaceTimePath) -> Result<NormValue> {
    check_unit_interval(u)?;
    let base = l2_mixed_norm(u, Z_EXPONENT, 1.0, Z_EXPONENT)?;
    NormValue::new(NormKind::Z, base.params, base.value)
}
