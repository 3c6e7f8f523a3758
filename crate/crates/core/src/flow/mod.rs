//! Curve diffusion flow `∂_t γ · ν = −k_ss`.
//!
//! Time stepping is linearly implicit in the spectral frame: each mode `p`
//! treats the constant-coefficient symbol `(2πp/L)⁴` implicitly with `L`
//! frozen per step and everything else explicitly. One step of `dt` is
//! compared with two steps of `dt/2`; the difference controls `dt` and the
//! Richardson combination is kept, which makes the scheme second order.

mod analysis;
mod engine;
mod presets;
mod trace;

pub use analysis::{
    audit, convexity_waiting_time, decay_rates, AuditCheck, AuditReport, DecayRates, Violation,
};
pub use engine::{run, run_observed, step, velocity, velocity_modes, StepOutcome};
pub use presets::Preset;
pub use trace::{FlowTrace, RunMeta, Termination, TraceRow, TRACE_COLUMNS};

use serde::{Deserialize, Serialize};

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Largest accepted one-step change of area, relative to the area scale.
    pub tolerance_area: f64,
    /// Largest accepted one-step relative increase of length.
    pub tolerance_length_increase: f64,
    pub k_max_blowup: f64,
    pub resample_every: usize,
    pub n_modes: usize,
    pub audit_every: usize,
    /// Local error target for the step-doubling estimate, relative to the
    /// curve's size.
    pub local_tol: f64,
    pub max_steps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-5,
            dt_min: 1e-14,
            dt_max: 1e-2,
            t_end: 1.0,
            tolerance_area: 1e-8,
            tolerance_length_increase: 1e-12,
            k_max_blowup: 100.0,
            resample_every: 5,
            n_modes: 128,
            audit_every: 1,
            local_tol: 1e-8,
            max_steps: 2_000_000,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return bad("need 0 < dt_min <= dt_init <= dt_max");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be finite and nonnegative");
        }
        if !(self.tolerance_area > 0.0
            && self.tolerance_length_increase > 0.0
            && self.local_tol > 0.0
            && self.k_max_blowup > 0.0)
        {
            return bad("tolerances must be positive");
        }
        if self.resample_every == 0 || self.audit_every == 0 || self.max_steps == 0 {
            return bad("step counts must be positive");
        }
        if self.n_modes < crate::curve::MIN_MODES {
            return bad("n_modes below the minimum band");
        }
        Ok(())
    }

    /// The configuration matching a curve scaled by `lambda`: times scale by
    /// `λ⁴` and curvature by `1/λ`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        let l4 = lambda.powi(4);
        Self {
            dt_init: self.dt_init * l4,
            dt_min: self.dt_min * l4,
            dt_max: self.dt_max * l4,
            t_end: self.t_end * l4,
            k_max_blowup: self.k_max_blowup / lambda,
            ..self.clone()
        }
    }
}

/// `L₀⁴/(16π⁴)`: no flow of a curve with winding 0 and initial length `L₀`
/// exists past this time.
pub fn wirtinger_bound(l0: f64) -> Result<f64> {
    if !(l0 > 0.0 && l0.is_finite()) {
        return Err(Error::InvalidParameter(format!("length {l0} must be positive")));
    }
    Ok(l0.powi(4) / (16.0 * std::f64::consts::PI.powi(4)))
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub curve: ClosedCurve,
    pub t: f64,
    pub step_count: usize,
    /// Step size proposed for the next step.
    pub dt: f64,
    pub last_report: TraceRow,
    /// Reference for the per-step area tolerance: `|A₀|`, or `L₀²/4π` when
    /// the initial area vanishes.
    pub area_scale: f64,
}

impl FlowState {
    pub fn new(curve: ClosedCurve, config: &FlowConfig) -> Self {
        let last_report = TraceRow::measure(&curve, 0.0, 0.0);
        let l0 = last_report.length;
        let a0 = last_report.area.abs();
        let area_scale = if a0 > 1e-12 * l0 * l0 {
            a0
        } else {
            l0 * l0 / (4.0 * std::f64::consts::PI)
        };
        Self {
            curve,
            t: 0.0,
            step_count: 0,
            dt: config.dt_init,
            last_report,
            area_scale,
        }
    }
}
