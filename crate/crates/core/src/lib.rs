//! Numerical laboratory for the defocusing quintic nonlinear Schrödinger
//! equation on the three-dimensional torus, with and without additive
//! white-in-time stochastic forcing.
//!
//! The crate provides four layers, each usable on its own:
//!
//! * **Spectral core** — truncated Fourier representation of complex fields
//!   on `T^3 = [-pi, pi)^3`, dealiased quintic nonlinearity, Littlewood–Paley
//!   and frequency-cube projections, Bessel multipliers, and the free
//!   Schrödinger propagator ([`lattice`], [`fft`], [`field`]).
//! * **Function spaces** — discrete space-time paths and the norms used to
//!   measure them: Sobolev, square-function, mixed and `l^2`-mixed
//!   Lebesgue norms, `p`-variation, and the dispersive `Y`, `X~`, `M`, `Z`
//!   families ([`path`], [`pvar`], [`norms`]).
//! * **Stochastics and dynamics** — Hilbert–Schmidt noise operators, the
//!   exact-in-law stochastic convolution sampler, splitting integrators for
//!   the deterministic and stochastic flows, conserved-quantity ledgers, and
//!   the adaptive window partitioner ([`noise`], [`dynamics`], [`windows`]).
//! * **Estimate lab** — randomized stress tests that probe Strichartz-type,
//!   trilinear, and quintic space-time bounds over ensembles of atomic and
//!   random test fields, with log-log exponent fits ([`lab`]).
//!
//! All randomness flows through the counter-based generator in [`rng`], so
//! every ensemble is reproducible from a single `u64` seed regardless of
//! thread count.

pub mod dynamics;
pub mod error;
pub mod fft;
pub mod field;
pub mod lab;
pub mod lattice;
pub mod noise;
pub mod norms;
pub mod path;
pub mod pvar;
pub mod rng;
pub mod windows;

pub use error::CoreError;
pub use field::TorusField;
pub use lattice::{CubeSpec, FrequencyLattice};
pub use norms::NormValue;
pub use path::{ScalarPath, SpaceTimePath};
