//! Simulation library for the damped hyperbolic Allen–Cahn equation
//!
//!   τ·u_tt + g(u)·u_t = ε²·u_xx + f(u)
//!
//! on an interval with reflecting (no-flux) walls, discretized through its
//! equivalent two-density kinetic form. The crate provides:
//!
//! - [`potential`]: double-well potentials, damping laws, and the layer
//!   constant c₀ = √2∫√F.
//! - [`kinetics`]: the characteristic-aligned explicit stepper for the
//!   direction densities α, β, plus the initial-data transform.
//! - [`diagnostics`]: energy decomposition and dissipation bookkeeping,
//!   interface sets, Hausdorff drift, transition counting, layer
//!   certificates, and exit times.
//! - [`experiments`]: named presets, the four reference scenarios, and the
//!   ε-sweep persistence study.
//!
//! Everything is deterministic: identical configurations reproduce
//! identical trajectories bit for bit.

pub mod diagnostics;
pub mod experiments;
pub mod kinetics;
pub mod potential;
