//! Browser front end for the kinetic relaxation solver: a [`Simulator`]
//! handle that loads one of the four reference experiments (optionally
//! with overridden ε, τ, or resolution), advances it by a requested
//! amount of physical time, and reports the field together with its live
//! diagnostics. The single static page in `www/` drives it on a canvas.
//!
//! Everything here is a thin adapter: the numerics live in the core
//! crate, and every method is an ordinary Rust function first, so the
//! whole surface is unit-tested on the host without a wasm runtime.

use hyperac::diagnostics::{energy, transition_count};
use hyperac::experiments::{preset, ExperimentConfig};
use hyperac::kinetics::{
    build_initial_state, derive_params, reconstruct, step, Grid1D, KineticState, SchemeParams,
};
use hyperac::potential::PotentialSpec;
use wasm_bindgen::prelude::*;

/// Upper bound on steps per [`Simulator::advance`] call so one oversized
/// request cannot freeze the page; the caller sees how many steps
/// actually ran and simply calls again.
pub const MAX_STEPS_PER_CALL: u32 = 250_000;

/// The simulation proper, free of wasm types so the host test suite can
/// exercise it directly.
struct Core {
    config: ExperimentConfig,
    params: SchemeParams,
    pot: PotentialSpec,
    initial: KineticState,
    state: KineticState,
}

impl Core {
    fn build(
        preset_number: u8,
        epsilon: Option<f64>,
        tau: Option<f64>,
        cells: Option<u32>,
    ) -> Result<Core, String> {
        let mut config = preset(preset_number).map_err(|e| e.to_string())?;
        if let Some(e) = epsilon {
            config.epsilon = e;
        }
        if let Some(t) = tau {
            config.tau = t;
        }
        if let Some(c) = cells {
            config.cells = Some(c as usize);
        }
        config.validate().map_err(|e| e.to_string())?;
        let (a, b) = config.domain;
        let grid = Grid1D::new(a, b, config.resolved_cells()).map_err(|e| e.to_string())?;
        let params = derive_params(config.epsilon, config.tau, &grid).map_err(|e| e.to_string())?;
        let pot = PotentialSpec::quartic();
        let initial = build_initial_state(&config.initial_data(), &grid, &params, &pot);
        let state = initial.clone();
        Ok(Core {
            config,
            params,
            pot,
            initial,
            state,
        })
    }

    /// Steps until `duration` more physical time has elapsed (the same
    /// horizon tolerance as the run loop), stopping early at the
    /// per-call cap. Returns the number of steps taken.
    fn advance(&mut self, duration: f64) -> Result<u32, String> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(format!("duration must be finite and nonnegative, got {duration}"));
        }
        let target = self.state.t() + duration;
        let stop = target - 1e-6 * self.params.dt();
        let mut steps = 0u32;
        while self.state.t() < stop && steps < MAX_STEPS_PER_CALL {
            self.state = step(&self.state, &self.params, &self.pot).map_err(|e| e.to_string())?;
            steps += 1;
        }
        Ok(steps)
    }

    fn transitions(&self) -> usize {
        transition_count(&self.state.u(), &self.state.grid(), self.config.hysteresis)
            .expect("state and grid agree by construction")
    }

    fn summary(&self) -> String {
        let e = energy(&self.state, &self.params, &self.pot);
        serde_json::json!({
            "t": self.state.t(),
            "dt": self.params.dt(),
            "epsilon": self.params.epsilon(),
            "tau": self.params.tau(),
            "cells": self.state.grid().cells(),
            "energy": e.total_scaled,
            "transitions": self.transitions(),
            "description": self.config.initial_data().description(),
        })
        .to_string()
    }
}

/// A loaded experiment the page can step, reset, and query.
#[wasm_bindgen]
pub struct Simulator {
    core: Core,
}

#[wasm_bindgen]
impl Simulator {
    /// Loads reference experiment 1–4 at its preset parameters.
    #[wasm_bindgen(constructor)]
    pub fn new(preset_number: u8) -> Result<Simulator, JsError> {
        Self::with_overrides(preset_number, None, None, None)
    }

    /// Loads a reference experiment with any of ε, τ, and the cell count
    /// replaced; omitted arguments keep the preset values. Rejects
    /// parameters the scheme cannot run (the admissibility bound
    /// dx ≤ 2√τ·ε, checked before any stepping).
    pub fn with_overrides(
        preset_number: u8,
        epsilon: Option<f64>,
        tau: Option<f64>,
        cells: Option<u32>,
    ) -> Result<Simulator, JsError> {
        Core::build(preset_number, epsilon, tau, cells)
            .map(|core| Simulator { core })
            .map_err(|e| JsError::new(&e))
    }

    /// Advances by `duration` in physical time, capped at
    /// [`MAX_STEPS_PER_CALL`] steps per call; returns the steps taken.
    pub fn advance(&mut self, duration: f64) -> Result<u32, JsError> {
        self.core.advance(duration).map_err(|e| JsError::new(&e))
    }

    /// Returns to the initial state (t = 0), bit for bit.
    pub fn reset(&mut self) {
        self.core.state = self.core.initial.clone();
    }

    pub fn time(&self) -> f64 {
        self.core.state.t()
    }

    pub fn dt(&self) -> f64 {
        self.core.params.dt()
    }

    pub fn cells(&self) -> u32 {
        self.core.state.grid().cells() as u32
    }

    /// Cell-center coordinates, for the plot abscissa.
    pub fn nodes(&self) -> Vec<f64> {
        self.core.state.grid().nodes().collect()
    }

    /// The field u = α + β at the cell centers.
    pub fn field(&self) -> Vec<f64> {
        self.core.state.u()
    }

    /// The reconstructed time derivative u_t at the cell centers.
    pub fn velocity(&self) -> Vec<f64> {
        reconstruct(&self.core.state, &self.core.params, &self.core.pot).u_t
    }

    /// The scaled energy E_ε of the current state.
    pub fn energy(&self) -> f64 {
        energy(&self.core.state, &self.core.params, &self.core.pot).total_scaled
    }

    /// Hysteresis transition count of the current state.
    pub fn transitions(&self) -> u32 {
        self.core.transitions() as u32
    }

    /// One-line JSON summary (t, dt, ε, τ, cells, energy, transitions,
    /// description) for the page's readout panel.
    pub fn summary(&self) -> String {
        self.core.summary()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load_with_matching_shapes() {
        for n in 1..=4u8 {
            let core = Core::build(n, None, None, None).unwrap();
            let cells = core.config.resolved_cells();
            assert_eq!(core.state.grid().cells(), cells);
            assert_eq!(core.state.u().len(), cells);
            assert_eq!(core.state.t(), 0.0);
        }
    }

    #[test]
    fn bad_parameters_are_rejected_before_stepping() {
        assert!(Core::build(5, None, None, None).is_err());
        assert!(Core::build(1, Some(-0.1), None, None).is_err());
        // 16 cells on [−4, 4] gives dx = 0.5 > 2√τ·ε for preset 2.
        assert!(Core::build(2, None, None, Some(16)).is_err());
    }

    #[test]
    fn advance_tracks_time_and_step_count() {
        let mut core = Core::build(2, None, None, None).unwrap();
        let dt = core.params.dt();
        let steps = core.advance(1.0).unwrap();
        assert_eq!(steps as f64, (1.0f64 / dt).ceil());
        assert!(core.state.t() >= 1.0 - 1e-6 * dt);
        assert!(core.state.t() < 1.0 + dt);
    }

    #[test]
    fn advance_honors_the_per_call_cap() {
        let mut core = Core::build(2, None, None, Some(64)).unwrap();
        let steps = core.advance(1e9).unwrap();
        assert_eq!(steps, MAX_STEPS_PER_CALL);
        let t_after_cap = core.state.t();
        // The next call picks up where the capped one stopped.
        let more = core.advance(0.0).unwrap();
        assert_eq!(more, 0);
        assert_eq!(core.state.t(), t_after_cap);
    }

    #[test]
    fn reset_restores_the_initial_state_bit_for_bit() {
        let mut core = Core::build(3, None, None, None).unwrap();
        let u0 = core.state.u();
        core.advance(5.0).unwrap();
        assert_ne!(core.state.u(), u0);
        core.state = core.initial.clone();
        let back = core.state.u();
        assert_eq!(back.len(), u0.len());
        for (a, b) in back.iter().zip(&u0) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(core.state.t(), 0.0);
    }

    #[test]
    fn third_experiment_grows_three_transitions() {
        let mut core = Core::build(3, None, None, None).unwrap();
        assert_eq!(core.transitions(), 1);
        core.advance(20.0).unwrap();
        assert_eq!(core.transitions(), 3);
    }

    #[test]
    fn summary_is_json_with_the_advertised_keys() {
        let core = Core::build(1, None, None, None).unwrap();
        let v: serde_json::Value = serde_json::from_str(&core.summary()).unwrap();
        for key in [
            "t",
            "dt",
            "epsilon",
            "tau",
            "cells",
            "energy",
            "transitions",
            "description",
        ] {
            assert!(v.get(key).is_some(), "summary lacks {key}");
        }
        assert_eq!(v["t"], 0.0);
        assert_eq!(v["epsilon"], 0.01);
    }
}
