use std::f64::consts::TAU;

use super::analysis::linear_fit;
use super::{FlowConfig, FlowState, FlowTrace, Termination, TraceRow};
use crate::curve::{self, ClosedCurve};
use crate::error::{Error, Result};
use crate::fourier::{self, freq, C64};
use crate::geometry::{ArclengthFrame, ParamFrame};

/// `−k_ss ν` on the arclength grid.
pub fn velocity(curve: &ClosedCurve) -> Result<Vec<C64>> {
    let frame = ArclengthFrame::new(curve)?;
    let kss = frame.curvature_derivative(2);
    Ok(frame
        .normal()
        .iter()
        .zip(kss.samples())
        .map(|(nu, k)| -k * nu)
        .collect())
}

/// Band-limited spectrum of `−k_ss ν` in the curve's own parameter, evaluated
/// on the dealiased grid, together with the length.
pub fn velocity_modes(curve: &ClosedCurve) -> (Vec<C64>, f64) {
    let frame = ParamFrame::new(curve);
    let ks = frame.d_ds(&frame.k);
    let kss = frame.d_ds(&ks);
    let v: Vec<C64> = kss
        .iter()
        .zip(&frame.tangent)
        .map(|(k, t)| C64::new(0.0, -k) * t)
        .collect();
    (fourier::analyze(&v, curve.n_modes()), frame.length)
}

/// `(ĉ + dt (v̂ + λĉ)) / (1 + dt λ)` with `λ = (2πp/L)⁴`.
fn imex_euler(c: &[C64], n: usize, length: f64, dt: f64, v: &[C64]) -> Vec<C64> {
    let scale = TAU / length;
    c.iter()
        .zip(v)
        .enumerate()
        .map(|(i, (&c, &v))| {
            let lam = (freq(i, n) as f64 * scale).powi(4);
            (c + (v + c * lam) * dt) / (1.0 + dt * lam)
        })
        .collect()
}

fn same_winding(modes: Vec<C64>, n: usize, winding: i32) -> Option<ClosedCurve> {
    ClosedCurve::from_modes(modes, n)
        .ok()
        .filter(|c| c.winding() == winding)
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: FlowState,
    /// Attempts rejected before acceptance.
    pub rejected: usize,
    /// `max|k|` of the accepted curve exceeds `k_max_blowup`.
    pub blow_up: bool,
}

/// Advances one accepted step.
///
/// An attempt is rejected (and `dt` reduced) when the step-doubling error
/// exceeds `local_tol`, the result is not immersed or changes winding, the
/// length grows by more than `tolerance_length_increase`, or the area moves
/// by more than `tolerance_area` of the area scale. Falling below `dt_min`
/// yields [`Error::StepFailure`].
pub fn step(state: &FlowState, config: &FlowConfig) -> Result<StepOutcome> {
    let curve = &state.curve;
    let n = curve.n_modes();
    let winding = curve.winding();
    let c0 = curve.modes();
    let size = c0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let (v0, l0) = velocity_modes(curve);
    let prev = &state.last_report;
    let remaining = config.t_end - state.t;
    let mut dt = state.dt.min(config.dt_max);
    if remaining > 0.0 {
        dt = dt.min(remaining);
    }
    let mut rejected = 0;
    loop {
        if dt < config.dt_min {
            return Err(Error::StepFailure {
                t: state.t,
                dt_min: config.dt_min,
            });
        }
        let full = imex_euler(c0, n, l0, dt, &v0);
        let Some(half) = same_winding(imex_euler(c0, n, l0, 0.5 * dt, &v0), n, winding) else {
            dt *= 0.5;
            rejected += 1;
            continue;
        };
        let (v1, l1) = velocity_modes(&half);
        let two = imex_euler(half.modes(), n, l1, 0.5 * dt, &v1);
        let err = two
            .iter()
            .zip(&full)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / size;
        if !err.is_finite() || err > config.local_tol {
            let factor = if err.is_finite() {
                (0.9 * (config.local_tol / err).sqrt()).clamp(0.2, 0.5)
            } else {
                0.2
            };
            dt *= factor;
            rejected += 1;
            continue;
        }
        let extrapolated: Vec<C64> = two.iter().zip(&full).map(|(a, b)| 2.0 * a - b).collect();
        let Some(next) = same_winding(extrapolated, n, winding) else {
            dt *= 0.5;
            rejected += 1;
            continue;
        };
        let row = TraceRow::measure(&next, state.t + dt, dt);
        let grew = row.length > prev.length * (1.0 + config.tolerance_length_increase);
        let jumped = (row.area - prev.area).abs() > config.tolerance_area * state.area_scale;
        if grew || jumped || !row.length.is_finite() {
            dt *= 0.5;
            rejected += 1;
            continue;
        }
        let growth = if err > 0.0 {
            (0.9 * (config.local_tol / err).sqrt()).clamp(0.2, 2.0)
        } else {
            2.0
        };
        let step_count = state.step_count + 1;
        let curve = if step_count % config.resample_every == 0 {
            curve::reparametrize_arclength(&next)?
        } else {
            next
        };
        let blow_up = row.max_abs_k > config.k_max_blowup;
        return Ok(StepOutcome {
            state: FlowState {
                curve,
                t: state.t + dt,
                step_count,
                dt: (dt * growth).min(config.dt_max).max(config.dt_min),
                last_report: row,
                area_scale: state.area_scale,
            },
            rejected,
            blow_up,
        });
    }
}

/// Fits `max|k|⁻⁴ = α + βt` over the last decade of curvature growth and
/// returns `(T_est, exponent)` with `T_est = −α/β`; the exponent is the slope
/// of `log max|k|` against `log(T_est − t)`.
fn fit_blowup(history: &[(f64, f64)]) -> (f64, f64) {
    let (t_last, k_last) = *history.last().expect("nonempty history");
    let tail: Vec<(f64, f64)> = history
        .iter()
        .copied()
        .filter(|&(_, k)| k >= 0.1 * k_last)
        .collect();
    if tail.len() < 3 {
        return (t_last, f64::NAN);
    }
    let ts: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.powi(-4)).collect();
    let (alpha, beta) = linear_fit(&ts, &ys);
    if !(beta < 0.0) {
        return (t_last, f64::NAN);
    }
    let t_est = (-alpha / beta).max(t_last);
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|&&(t, _)| t_est - t > 0.0)
        .map(|&(t, k)| ((t_est - t).ln(), k.ln()))
        .collect();
    let exponent = if pts.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        linear_fit(&xs, &ys).1
    } else {
        f64::NAN
    };
    (t_est, exponent)
}

/// Integrates from `initial` until `t_end`, a curvature blow-up, or a step
/// failure. The initial curve is re-banded to `n_modes` and reparametrized by
/// arclength first.
pub fn run(initial: &ClosedCurve, config: &FlowConfig) -> Result<FlowTrace> {
    run_observed(initial, config, |_| {})
}

/// Like [`run`], calling `observe` on the starting state and after every
/// accepted step.
pub fn run_observed(
    initial: &ClosedCurve,
    config: &FlowConfig,
    mut observe: impl FnMut(&FlowState),
) -> Result<FlowTrace> {
    config.validate()?;
    let banded = if initial.n_modes() == config.n_modes {
        initial.clone()
    } else {
        initial.with_band(config.n_modes)?
    };
    let start = curve::reparametrize_arclength(&banded)?;
    let winding = start.winding();
    let mut state = FlowState::new(start, config);
    observe(&state);
    let mut rows = vec![state.last_report];
    let mut history = vec![(0.0, state.last_report.max_abs_k)];
    let mut rejected_steps = 0;
    let t_eps = 1e-14 * config.t_end.max(1.0);
    let termination = loop {
        if state.t >= config.t_end - t_eps {
            break Termination::ReachedTEnd;
        }
        if state.step_count >= config.max_steps {
            break Termination::StepFailure {
                t: state.t,
                reason: format!("step limit {} reached", config.max_steps),
            };
        }
        let outcome = match step(&state, config) {
            Ok(o) => o,
            Err(Error::StepFailure { t, dt_min }) => {
                break Termination::StepFailure {
                    t,
                    reason: format!("dt fell below dt_min = {dt_min:e}"),
                }
            }
            Err(e @ Error::ReparametrizationFailed { .. }) => {
                break Termination::StepFailure {
                    t: state.t,
                    reason: e.to_string(),
                }
            }
            Err(e) => return Err(e),
        };
        rejected_steps += outcome.rejected;
        state = outcome.state;
        observe(&state);
        history.push((state.t, state.last_report.max_abs_k));
        if state.step_count % config.audit_every == 0 {
            rows.push(state.last_report);
        }
        if outcome.blow_up {
            let (t_est, exponent) = fit_blowup(&history);
            break Termination::Singularity { t_est, exponent };
        }
    };
    if rows.last().map(|r| r.t) != Some(state.t) {
        rows.push(state.last_report);
    }
    Ok(FlowTrace {
        config: config.clone(),
        winding,
        rows,
        termination,
        accepted_steps: state.step_count,
        rejected_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_circle, polar_curve};

    fn origin() -> C64 {
        C64::new(0.0, 0.0)
    }

    #[test]
    fn circles_have_zero_velocity() {
        for w in [1, 2, -1] {
            let c = make_circle(1.5, w, origin()).unwrap();
            let v = velocity(&c).unwrap();
            assert!(v.iter().all(|z| z.norm() < 1e-10));
            let (vm, _) = velocity_modes(&c);
            assert!(vm.iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn velocity_is_translation_invariant() {
        let c = polar_curve(32, |u| 1.0 + 0.1 * (3.0 * u).cos()).unwrap();
        let a = velocity(&c).unwrap();
        let b = velocity(&c.translated(C64::new(3.0, -2.0))).unwrap();
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9 * scale, "{} vs {}", x, y);
        }
    }

    #[test]
    fn linearized_mode_two_response() {
        // r = 1 + ε cos 2θ: k ≈ 1 + 3ε cos 2θ, so −k_ss ≈ 12 ε cos 2θ.
        let eps = 1e-6;
        let c = polar_curve(32, |u| 1.0 + eps * (2.0 * u).cos()).unwrap();
        let frame = ArclengthFrame::new(&c).unwrap();
        let v = velocity(&c).unwrap();
        for ((z, nu), g) in v.iter().zip(frame.normal()).zip(frame.positions()) {
            let theta = g.arg();
            let normal_speed = (z * nu.conj()).re;
            let expected = 12.0 * eps * (2.0 * theta).cos();
            assert!((normal_speed - expected).abs() < 1e-3 * 12.0 * eps, "{normal_speed} vs {expected}");
            // The inward normal pushes the bulges back in.
            let radial = (z * g.conj()).re / g.norm();
            assert!(radial * (2.0 * theta).cos() <= 1e-12);
        }
    }

    #[test]
    fn circle_is_a_fixed_point() {
        let config = FlowConfig {
            n_modes: 16,
            dt_init: 1e-3,
            ..FlowConfig::default()
        };
        let c = make_circle(1.0, 1, origin()).unwrap().with_band(16).unwrap();
        let state = FlowState::new(c.clone(), &config);
        let out = step(&state, &config).unwrap();
        for (a, b) in out.state.curve.modes().iter().zip(c.modes()) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!(!out.blow_up);
        assert_eq!(out.rejected, 0);
    }

    #[test]
    fn huge_initial_step_is_cut_down() {
        let config = FlowConfig {
            n_modes: 32,
            dt_init: 1.0,
            dt_max: 1.0,
            ..FlowConfig::default()
        };
        let c = polar_curve(32, |u| 1.0 + 0.2 * (3.0 * u).cos()).unwrap();
        let state = FlowState::new(c, &config);
        let out = step(&state, &config).unwrap();
        assert!(out.rejected > 0);
        assert!(out.state.t < 1e-2);
    }

    #[test]
    fn dt_floor_gives_step_failure() {
        let config = FlowConfig {
            n_modes: 32,
            dt_init: 1.0,
            dt_min: 0.5,
            dt_max: 1.0,
            ..FlowConfig::default()
        };
        let c = polar_curve(32, |u| 1.0 + 0.2 * (3.0 * u).cos()).unwrap();
        let state = FlowState::new(c, &config);
        assert!(matches!(step(&state, &config), Err(Error::StepFailure { .. })));
    }

    #[test]
    fn blowup_fit_recovers_synthetic_time() {
        let t_true = 0.3;
        let history: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let t = t_true * (1.0 - 0.97f64.powi(i));
                (t, 2.0 * (t_true - t).powf(-0.25))
            })
            .collect();
        let (t_est, exponent) = fit_blowup(&history);
        assert!((t_est - t_true).abs() < 1e-9);
        assert!((exponent + 0.25).abs() < 1e-6);
    }
}
