//! Time integration of the defocusing quintic Schrödinger flow on the
//! torus, deterministic and stochastic, plus the monitored functionals and
//! the first-order decomposition.
//!
//! The deterministic stepper is a splitting scheme whose two substeps are
//! both exact flows: the free propagator acts as a phase per mode, and the
//! nonlinear flow `i u_t = |u|^4 u` conserves the pointwise modulus, so on
//! the dealiased grid it is an exact phase rotation. The stochastic solver
//! appends an additive mode-wise Gaussian kick after each deterministic
//! step, drawn from the same per-mode substreams that drive the exact
//! recursion for the stochastic convolution; with zero data and the
//! nonlinearity disabled the solution coincides bit for bit with the
//! sampled convolution.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::TorusField;
use crate::lattice::FrequencyLattice;
use crate::noise::{MomentReport, NoiseOperator, NoiseStream};
use crate::path::SpaceTimePath;

/// Norm threshold beyond which a trajectory is declared blown up.
pub const BLOWUP_NORM: f64 = 1e12;

/// Splitting scheme for the deterministic substep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Strang splitting: half free step, nonlinear rotation, half free
    /// step (second order).
    Strang,
    /// Lie splitting: full free step then nonlinear rotation (first
    /// order).
    Lie,
}

/// Integrator configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub lattice: FrequencyLattice,
    /// Requested time step; the solver uses the nearest step that divides
    /// the horizon evenly.
    pub dt: f64,
    /// Duration of the run.
    pub t_horizon: f64,
    pub scheme: Scheme,
    /// Noise operator, absent for the deterministic equation.
    pub noise: Option<NoiseOperator>,
    /// Store every `stride`-th step (the initial and final states are
    /// always stored).
    pub stride: usize,
    /// Test mode: skip the nonlinear substep and integrate the linear
    /// (stochastic) Schrödinger equation.
    pub linear_only: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_horizon > 0.0 && self.t_horizon.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.t_horizon
            )));
        }
        if self.dt > self.t_horizon * (1.0 + 1e-12) {
            return Err(CoreError::InvalidParameter(format!(
                "time step {} exceeds horizon {}",
                self.dt, self.t_horizon
            )));
        }
        if self.stride == 0 {
            return Err(CoreError::InvalidParameter("stride must be >= 1".into()));
        }
        if let Some(phi) = &self.noise {
            if phi.lattice() != &self.lattice {
                return Err(CoreError::LatticeMismatch(
                    "noise operator lives on a different lattice".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of steps actually taken: the horizon divided evenly by the
    /// step closest to the requested one.
    pub fn n_steps(&self) -> usize {
        ((self.t_horizon / self.dt).round() as usize).max(1)
    }
}

/// Mass, energy, and `H^1` size per stored sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    /// `|| u(t) ||_{L^2}^2`.
    pub mass: Vec<f64>,
    /// `(1/2) int |grad u|^2 + (1/6) int |u|^6`.
    pub energy: Vec<f64>,
    /// `|| u(t) ||_{H^1}`.
    pub h1: Vec<f64>,
}

impl EnergyLedger {
    fn push(&mut self, t: f64, f: &TorusField) {
        self.times.push(t);
        self.mass.push(mass(f));
        self.energy.push(energy(f));
        self.h1.push(f.h_norm(1.0));
    }

    pub fn is_finite(&self) -> bool {
        self.mass.iter().all(|x| x.is_finite())
            && self.energy.iter().all(|x| x.is_finite())
            && self.h1.iter().all(|x| x.is_finite())
    }
}

/// Conserved mass `|| f ||_{L^2}^2` of the deterministic flow.
pub fn mass(f: &TorusField) -> f64 {
    f.mass()
}

/// Hamiltonian energy
/// `(1/2) int |grad f|^2 + (1/6) int |f|^6` (normalized measure, sextic
/// term dealiased).
pub fn energy(f: &TorusField) -> f64 {
    0.5 * f.gradient_norm_sqr() + f.sextic_mean() / 6.0
}

fn deterministic_step(u: &TorusField, dt: f64, scheme: Scheme, linear: bool) -> TorusField {
    if linear {
        return u.free_evolve(dt);
    }
    match scheme {
        Scheme::Strang => u
            .free_evolve(0.5 * dt)
            .quintic_rotation(dt)
            .free_evolve(0.5 * dt),
        Scheme::Lie => u.free_evolve(dt).quintic_rotation(dt),
    }
}

fn check_state(u: &TorusField, step: usize) -> Result<()> {
    if !u.is_finite() {
        return Err(CoreError::BlowUp {
            step,
            reason: "non-finite coefficients".into(),
        });
    }
    let m = u.mass();
    if m > BLOWUP_NORM * BLOWUP_NORM {
        return Err(CoreError::BlowUp {
            step,
            reason: format!("L2 norm {:e} beyond threshold {BLOWUP_NORM:e}", m.sqrt()),
        });
    }
    Ok(())
}

/// Output of the stochastic solver: the solution path, the stochastic
/// convolution driven by the same increments, and the ledger of `u`.
#[derive(Debug, Clone)]
pub struct SnlsOutput {
    pub u: SpaceTimePath,
    pub psi: SpaceTimePath,
    pub ledger: EnergyLedger,
}

/// Integrates the stochastic equation over `[t_start, t_start + horizon]`
/// starting from `(u0, psi0)`, drawing each mode's step-`k` increment at
/// the absolute index `step_offset + k` of that mode's substream.
///
/// Continuations that restart window by window therefore consume exactly
/// the increments a single long run would have used.
pub fn snls_solve_from(
    u0: &TorusField,
    psi0: &TorusField,
    cfg: &SimConfig,
    stream: &NoiseStream,
    t_start: f64,
    step_offset: u64,
) -> Result<SnlsOutput> {
    cfg.validate()?;
    if u0.lattice() != &cfg.lattice || psi0.lattice() != &cfg.lattice {
        return Err(CoreError::LatticeMismatch(
            "initial data does not live on the configured lattice".into(),
        ));
    }
    let n_steps = cfg.n_steps();
    let phi = cfg.noise.as_ref();

    // Modes the noise actually excites, with their substream generators.
    let kicked: Vec<(usize, f64)> = match phi {
        Some(phi) => phi
            .symbol()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(i, &l)| (i, l))
            .collect(),
        None => Vec::new(),
    };
    let rngs: Vec<_> = kicked.iter().map(|&(i, _)| stream.mode_rng(i)).collect();

    let mut u = u0.clone();
    let mut psi = psi0.clone();
    let mut times = Vec::new();
    let mut u_frames = Vec::new();
    let mut psi_frames = Vec::new();
    let mut ledger = EnergyLedger {
        times: Vec::new(),
        mass: Vec::new(),
        energy: Vec::new(),
        h1: Vec::new(),
    };
    let store = |t: f64,
                 u: &TorusField,
                 psi: &TorusField,
                 times: &mut Vec<f64>,
                 uf: &mut Vec<TorusField>,
                 pf: &mut Vec<TorusField>,
                 ledger: &mut EnergyLedger| {
        times.push(t);
        uf.push(u.clone());
        pf.push(psi.clone());
        ledger.push(t, u);
    };
    store(
        t_start,
        &u,
        &psi,
        &mut times,
        &mut u_frames,
        &mut psi_frames,
        &mut ledger,
    );

    let grid_time = |k: usize| t_start + cfg.t_horizon * k as f64 / n_steps as f64;
    for k in 1..=n_steps {
        let t_prev = grid_time(k - 1);
        let t_next = grid_time(k);
        let delta = t_next - t_prev;

        u = deterministic_step(&u, delta, cfg.scheme, cfg.linear_only);
        psi = psi.free_evolve(delta);

        if !kicked.is_empty() {
            let draw = step_offset + (k as u64 - 1);
            let ucoeffs = u.coeffs_mut();
            let pcoeffs = psi.coeffs_mut();
            for (&(i, lam), rng) in kicked.iter().zip(&rngs) {
                let zeta = NoiseStream::increment_at(rng, draw, delta);
                let kick = Complex64::new(0.0, 1.0) * (lam * zeta);
                ucoeffs[i] -= kick;
                pcoeffs[i] -= kick;
            }
        }

        check_state(&u, k)?;
        if k == n_steps || k % cfg.stride == 0 {
            store(
                t_next,
                &u,
                &psi,
                &mut times,
                &mut u_frames,
                &mut psi_frames,
                &mut ledger,
            );
        }
    }

    Ok(SnlsOutput {
        u: SpaceTimePath::new(times.clone(), u_frames)?,
        psi: SpaceTimePath::new(times, psi_frames)?,
        ledger,
    })
}

/// Stochastic solve over `[0, T]` from data `u0` with the convolution
/// started at zero.
pub fn snls_solve(u0: &TorusField, cfg: &SimConfig, stream: &NoiseStream) -> Result<SnlsOutput> {
    if cfg.noise.is_none() {
        return Err(CoreError::InvalidParameter(
            "stochastic solver needs a noise operator; use the \
             deterministic solver instead"
                .into(),
        ));
    }
    snls_solve_from(u0, &TorusField::zero(cfg.lattice), cfg, stream, 0.0, 0)
}

/// Deterministic solve over `[0, T]` (the configuration must not carry a
/// noise operator).
pub fn nls_solve(u0: &TorusField, cfg: &SimConfig) -> Result<(SpaceTimePath, EnergyLedger)> {
    if cfg.noise.is_some() {
        return Err(CoreError::InvalidParameter(
            "deterministic solver called with a noise operator configured".into(),
        ));
    }
    let out = snls_solve_from(
        u0,
        &TorusField::zero(cfg.lattice),
        cfg,
        &NoiseStream::new(0),
        0.0,
        0,
    )?;
    Ok((out.u, out.ledger))
}

/// Perturbation term `|v + psi|^4 (v + psi) - |v|^4 v`, both quintics
/// dealiased. Vanishes exactly when `psi` is the zero field.
pub fn perturbation_term(v: &TorusField, psi: &TorusField) -> Result<TorusField> {
    if v.lattice() != psi.lattice() {
        return Err(CoreError::LatticeMismatch(
            "perturbation term needs both fields on one lattice".into(),
        ));
    }
    let sum = v.add(psi)?;
    sum.quintic_nonlinearity().sub(&v.quintic_nonlinearity())
}

/// First-order decomposition `v = u - psi`, frame by frame.
pub fn first_order_decompose(u: &SpaceTimePath, psi: &SpaceTimePath) -> Result<SpaceTimePath> {
    if u.times() != psi.times() {
        return Err(CoreError::InvalidTimeGrid(
            "decomposition needs matching sample grids".into(),
        ));
    }
    let frames = u
        .frames()
        .iter()
        .zip(psi.frames())
        .map(|(a, b)| a.sub(b))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimePath::new(u.times().to_vec(), frames)
}

/// Discrete Duhamel residual of the perturbed equation for `v = u - psi`:
/// per step, the defect of
/// `v(t+d) = S(d) v(t) - i int_0^d S(d - tau) (|v|^4 v + e)(t + tau) dtau`
/// with the integral approximated by the trapezoidal rule, reported as
/// `max_k || defect_k ||_{L^2} / d`. Decays at the scheme's order under
/// step refinement.
///
/// The sampled convolution jumps by a Gaussian kick at the end of every
/// step, so the forcing at the right endpoint is evaluated at the
/// pre-kick right limit, whose convolution part is the freely
/// transported left value `S(d) psi(t)`; the kick itself cancels between
/// `u` and `psi` and never enters `v`. Using the post-kick value instead
/// would pollute the quadrature with the square-root-of-step Brownian
/// increment and destroy the scheme-order decay.
pub fn duhamel_residual(v: &SpaceTimePath, psi: &SpaceTimePath) -> Result<f64> {
    if v.times() != psi.times() {
        return Err(CoreError::InvalidTimeGrid(
            "residual needs matching sample grids".into(),
        ));
    }
    let forcing = |vf: &TorusField, pf: &TorusField| -> TorusField {
        let e = perturbation_term(vf, pf).expect("checked lattices");
        let mut g = vf.quintic_nonlinearity();
        g.add_scaled(Complex64::new(1.0, 0.0), &e)
            .expect("same lattice");
        g
    };
    let left: Vec<TorusField> = v
        .frames()
        .par_iter()
        .zip(psi.frames())
        .map(|(vf, pf)| forcing(vf, pf))
        .collect();
    let defects: Vec<f64> = (0..v.len() - 1)
        .into_par_iter()
        .map(|k| {
            let d = v.times()[k + 1] - v.times()[k];
            let psi_pre = psi.frame(k).free_evolve(d);
            let right = forcing(v.frame(k + 1), &psi_pre);
            let mut defect = v
                .frame(k + 1)
                .sub(&v.frame(k).free_evolve(d))
                .expect("same lattice");
            let mut integral = left[k].free_evolve(d);
            integral
                .add_scaled(Complex64::new(1.0, 0.0), &right)
                .expect("same lattice");
            defect
                .add_scaled(Complex64::new(0.0, 0.5 * d), &integral)
                .expect("same lattice");
            defect.norm_l2() / d
        })
        .collect();
    Ok(defects.into_iter().fold(0.0f64, f64::max))
}

/// Monte Carlo check of the mass identity for the stochastic flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassIdentityReport {
    /// Sample times of the comparison.
    pub times: Vec<f64>,
    /// Ensemble mean of the mass at each sample time.
    pub mean_mass: Vec<f64>,
    /// Central-limit 95% half-widths for the means.
    pub ci_half: Vec<f64>,
    /// The affine law `||u0||^2 + t * sum_n lambda_n^2`.
    pub affine: Vec<f64>,
    /// Largest relative deviation of the mean from the affine law.
    pub max_rel_deviation: f64,
    /// Moment report for `sup_t (mass + energy)`.
    pub sup_mass_energy: MomentReport,
    /// Fraction of trajectories that hit the blow-up guard.
    pub blowup_fraction: f64,
    pub ensemble: usize,
}

/// Runs an ensemble of stochastic solves and compares the ensemble mass
/// against the affine law `||u0||^2 + t ||phi||_{HS(L^2;L^2)}^2`; also
/// reports `E[sup_t (mass + energy)]` and the blow-up fraction.
pub fn mass_identity_mc(
    u0: &TorusField,
    cfg: &SimConfig,
    ensemble: usize,
    stream: &NoiseStream,
) -> Result<MassIdentityReport> {
    cfg.validate()?;
    let phi = cfg.noise.as_ref().ok_or_else(|| {
        CoreError::InvalidParameter("mass identity needs a noise operator".into())
    })?;
    if ensemble < 100 {
        return Err(CoreError::InvalidParameter(format!(
            "ensemble of {ensemble} too small (need >= 100)"
        )));
    }
    let runs: Vec<std::result::Result<(Vec<f64>, Vec<f64>, f64), ()>> = (0..ensemble)
        .into_par_iter()
        .map(|j| match snls_solve(u0, cfg, &stream.path(j as u64)) {
            Ok(out) => {
                let sup = out
                    .ledger
                    .mass
                    .iter()
                    .zip(&out.ledger.energy)
                    .map(|(m, e)| m + e)
                    .fold(0.0f64, f64::max);
                Ok((out.ledger.times.clone(), out.ledger.mass.clone(), sup))
            }
            Err(CoreError::BlowUp { .. }) => Err(()),
            Err(e) => panic!("unexpected solver failure: {e}"),
        })
        .collect();

    let mut times: Option<Vec<f64>> = None;
    let mut mass_acc: Vec<Vec<f64>> = Vec::new();
    let mut sups = Vec::new();
    let mut blowups = 0usize;
    for run in runs {
        match run {
            Ok((t, m, sup)) => {
                if times.is_none() {
                    times = Some(t);
                    mass_acc = vec![Vec::with_capacity(ensemble); m.len()];
                }
                for (slot, v) in mass_acc.iter_mut().zip(m) {
                    slot.push(v);
                }
                sups.push(sup);
            }
            Err(()) => blowups += 1,
        }
    }
    let times = times.ok_or_else(|| {
        CoreError::SearchFailed("every trajectory in the ensemble blew up".into())
    })?;
    let mut mean_mass = Vec::with_capacity(times.len());
    let mut ci_half = Vec::with_capacity(times.len());
    for slot in &mass_acc {
        let n = slot.len() as f64;
        let mean = slot.iter().sum::<f64>() / n;
        let var = slot.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        mean_mass.push(mean);
        ci_half.push(1.96 * (var / n).sqrt());
    }
    let rate = phi.mass_rate();
    let m0 = u0.mass();
    let affine: Vec<f64> = times.iter().map(|&t| m0 + t * rate).collect();
    let max_rel_deviation = mean_mass
        .iter()
        .zip(&affine)
        .map(|(m, a)| (m - a).abs() / a.max(f64::MIN_POSITIVE))
        .fold(0.0f64, f64::max);
    Ok(MassIdentityReport {
        times,
        mean_mass,
        ci_half,
        affine,
        max_rel_deviation,
        sup_mass_energy: MomentReport::from_samples("E[sup_t (mass + energy)]", &sups)?,
        blowup_fraction: blowups as f64 / ensemble as f64,
        ensemble,
    })
}
