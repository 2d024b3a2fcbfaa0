//! Metastable layer dynamics in one-dimensional phase-field models.
//!
//! This crate simulates the slow motion of transition layers ("kinks") in
//! Allen-Cahn type equations on `[0, 1]` with Neumann boundary conditions,
//! in four flavours: the classical equation, its mass-conserving variant,
//! and the hyperbolic (inertial) versions of both,
//!
//! ```text
//! tau * u_tt + g(u) * u_t + <(1 - g(u)) u_t> = eps^2 u_xx + f(u) - <f(u)>
//! ```
//!
//! where `f = -F'` for a double-well potential `F`, `g` is a positive
//! damping, `<.>` is the spatial mean, and the nonlocal terms are present
//! only for the mass-conserving models. Alongside the PDE solver the crate
//! provides:
//!
//! * [`potential`] -- double-well potentials, damping functions, and the
//!   scalar constants attached to them (transition energy, linearisation
//!   rates, wave prefactors, weighted damping averages);
//! * [`profile`] -- standing waves of `eps^2 phi'' + f(phi) = 0` on an
//!   interval, the multi-layer profiles assembled from them, and the
//!   exponentially small interaction quantities `alpha`/`beta`;
//! * [`pde`] -- a method-of-lines simulator with conservation and energy
//!   diagnostics and zero-crossing layer tracking;
//! * [`layer_ode`] -- the reduced ODE systems for the layer positions and
//!   an adaptive integrator for them;
//! * [`experiments`] -- cross-validation drivers: PDE-vs-ODE comparison,
//!   exponential-slowness slope fits, exact-vs-asymptotic sweeps, and the
//!   vanishing-inertia limit study;
//! * [`config`] / [`report`] -- JSON run configuration and CSV/JSON output.
//!
//! All computations are deterministic; there is no randomness anywhere.

pub mod config;
pub mod experiments;
pub mod layer_ode;
pub mod numerics;
pub mod pde;
pub mod potential;
pub mod profile;
pub mod report;
