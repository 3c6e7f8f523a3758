use std::f64::consts::{PI, TAU};

use curvediff::curve::{self, ClosedCurve};
use curvediff::flow::{self, FlowConfig, FlowTrace, Preset, Termination};
use curvediff::fourier::{self, C64};
use curvediff::Error;

fn config(n_modes: usize, t_end: f64) -> FlowConfig {
    FlowConfig {
        n_modes,
        t_end,
        ..FlowConfig::default()
    }
}

fn final_length(trace: &FlowTrace) -> f64 {
    trace.last().length
}

#[test]
fn ellipse_velocity_matches_closed_form() {
    // Normal speed −k_ss for (a cos t, b sin t), with k_ss from g = |γ'|².
    let (a, b) = (1.5, 1.0);
    // Band 64 balances truncation against rounding in four derivatives.
    let c = curve::from_sampler(64, |u| C64::new(a * u.cos(), b * u.sin())).unwrap();
    let (modes, length) = flow::velocity_modes(&c);
    let (a2, b2) = (a * a, b * b);
    for j in 0..64 {
        let t = TAU * j as f64 / 64.0;
        let g = a2 * t.sin().powi(2) + b2 * t.cos().powi(2);
        let g1 = (a2 - b2) * (2.0 * t).sin();
        let g2 = 2.0 * (a2 - b2) * (2.0 * t).cos();
        let kss = -1.5 * a * b * (-3.0 * g.powi(-4) * g1 * g1 + g.powi(-3) * g2) / g.sqrt();
        let tangent = C64::new(-a * t.sin(), b * t.cos()) / g.sqrt();
        let expected = -kss * C64::new(0.0, 1.0) * tangent;
        let got = fourier::eval_at(&modes, 64, t);
        assert!((got - expected).norm() < 1e-8, "t = {t}: {got} vs {expected}");
    }
    let exact_length: f64 = (0..4096)
        .map(|j| {
            let t = TAU * j as f64 / 4096.0;
            (a2 * t.sin().powi(2) + b2 * t.cos().powi(2)).sqrt()
        })
        .sum::<f64>()
        * TAU
        / 4096.0;
    assert!((length - exact_length).abs() < 1e-12);
}

#[test]
fn circles_are_fixed_points() {
    for preset in [Preset::Circle, Preset::Omega2] {
        let c = preset.build(32).unwrap();
        let trace = flow::run(&c, &config(32, 1.0)).unwrap();
        assert_eq!(trace.termination, Termination::ReachedTEnd);
        let first = trace.rows[0];
        for r in &trace.rows {
            assert!((r.length - first.length).abs() < 1e-12);
            assert!((r.area - first.area).abs() < 1e-12);
            assert!(r.oscillation.abs() < 1e-20);
        }
        assert!((trace.last().t - 1.0).abs() < 1e-12);
    }
}

#[test]
fn short_flow_conserves_area_and_passes_audit() {
    let c = Preset::Perturbed3.build(64).unwrap();
    let trace = flow::run(&c, &config(64, 0.05)).unwrap();
    assert_eq!(trace.termination, Termination::ReachedTEnd);
    let a0 = trace.a0();
    for r in &trace.rows {
        assert!((r.area - a0).abs() < 1e-7 * a0.abs(), "{:e}", (r.area - a0) / a0);
    }
    for w in trace.rows.windows(2) {
        assert!(w[1].length <= w[0].length + 1e-12);
        assert!(w[1].defect <= w[0].defect + 1e-9);
    }
    let report = flow::audit(&trace, trace.l0(), trace.a0()).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure());
    for name in ["length_rate", "defect_rate"] {
        assert!(report.check(name).unwrap().checked > 10, "{name} barely checked");
    }
    // The isoperimetric ratio approaches one from below.
    let ratio = |r: &flow::TraceRow| 4.0 * PI * r.area / (r.length * r.length);
    assert!(ratio(trace.last()) > ratio(&trace.rows[0]));
    assert!(ratio(trace.last()) <= 1.0 + 1e-12);
}

#[test]
fn two_resolutions_agree() {
    let c = Preset::Perturbed3.build(64).unwrap();
    let coarse = flow::run(&c, &config(64, 0.02)).unwrap();
    let fine = flow::run(&c, &config(128, 0.02)).unwrap();
    let (lc, lf) = (final_length(&coarse), final_length(&fine));
    assert!((lc - lf).abs() < 1e-8 * lf, "{lc} vs {lf}");
    let (dc, df) = (coarse.last().defect, fine.last().defect);
    assert!((dc - df).abs() < 1e-6 * df, "{dc} vs {df}");
}

#[test]
fn tighter_tolerance_reduces_the_error() {
    let c = Preset::Perturbed3Large.build(64).unwrap();
    let run = |tol: f64| {
        let cfg = FlowConfig {
            local_tol: tol,
            ..config(64, 0.002)
        };
        final_length(&flow::run(&c, &cfg).unwrap())
    };
    let reference = run(1e-11);
    let loose = (run(1e-5) - reference).abs();
    let tight = (run(1e-8) - reference).abs();
    assert!(tight < 1e-2 * loose, "tight {tight:e} vs loose {loose:e}");
}

#[test]
fn audit_every_thins_the_trace() {
    let c = Preset::Perturbed3.build(64).unwrap();
    let every = flow::run(&c, &config(64, 0.01)).unwrap();
    let thinned = flow::run(
        &c,
        &FlowConfig {
            audit_every: 4,
            ..config(64, 0.01)
        },
    )
    .unwrap();
    assert_eq!(every.accepted_steps, thinned.accepted_steps);
    let expected = 1 + every.accepted_steps / 4 + usize::from(every.accepted_steps % 4 != 0);
    assert_eq!(thinned.rows.len(), expected);
    assert_eq!(thinned.last().t, every.last().t);
    assert_eq!(thinned.rows[1], every.rows[4]);
    let report = flow::audit(&thinned, thinned.l0(), thinned.a0()).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure());
}

#[test]
fn observer_sees_every_accepted_state() {
    let c = Preset::Perturbed3.build(64).unwrap();
    let mut times = Vec::new();
    let trace = flow::run_observed(&c, &config(64, 0.005), |s| times.push(s.t)).unwrap();
    assert_eq!(times.len(), trace.accepted_steps + 1);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    let ts: Vec<f64> = trace.rows.iter().map(|r| r.t).collect();
    assert_eq!(ts, times);
}

#[test]
fn scaled_curve_follows_the_parabolic_scaling() {
    let lambda = 2.0;
    let c = Preset::Perturbed3.build(64).unwrap();
    let cfg = config(64, 0.005);
    let base = flow::run(&c, &cfg).unwrap();
    let scaled = flow::run(&c.scaled(lambda), &cfg.rescaled(lambda)).unwrap();
    assert_eq!(base.rows.len(), scaled.rows.len());
    for (r, s) in base.rows.iter().zip(&scaled.rows) {
        assert!((s.t - lambda.powi(4) * r.t).abs() <= 1e-12 * s.t.max(1e-300));
        assert!((s.length - lambda * r.length).abs() < 1e-12 * s.length);
        assert!((s.area - lambda * lambda * r.area).abs() < 1e-12 * s.area.abs());
    }
}

#[test]
fn trace_directory_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let c = Preset::Perturbed3.build(64).unwrap();
    let trace = flow::run(&c, &config(64, 0.002)).unwrap();
    trace.write_dir(dir.path(), &trace.meta()).unwrap();
    let back = FlowTrace::read_dir(dir.path()).unwrap();
    assert_eq!(back, trace);
    let text = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(text.starts_with("t,dt,L,A,D,K_osc,ks_norm2_sq,min_k,max_abs_k"));
    // Dropping a column is a format error.
    let cut: String = text
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n")
        .collect();
    std::fs::write(dir.path().join("trace.csv"), cut).unwrap();
    assert!(matches!(FlowTrace::read_dir(dir.path()), Err(Error::Format(_))));
}

#[test]
fn decay_rates_on_an_early_window() {
    let c = Preset::Perturbed3.build(64).unwrap();
    let trace = flow::run(&c, &config(64, 0.1)).unwrap();
    let rates = flow::decay_rates(&trace, (0.02, 0.1)).unwrap();
    let k4 = (TAU / trace.l0()).powi(4);
    assert!((rates.bound_d + 4.0 * k4).abs() < 1e-12 * k4);
    assert!(rates.meets_all(), "{rates:?}");
    assert!(matches!(
        flow::decay_rates(&trace, (0.5, 0.2)),
        Err(Error::BadWindow { .. })
    ));
    assert!(matches!(
        flow::decay_rates(&trace, (5.0, 6.0)),
        Err(Error::BadWindow { .. })
    ));
}

#[test]
fn wirtinger_bound_and_config_validation() {
    let l0 = 4.0;
    assert!((flow::wirtinger_bound(l0).unwrap() - 256.0 / (16.0 * PI.powi(4))).abs() < 1e-15);
    assert!(flow::wirtinger_bound(0.0).is_err());
    let bad = [
        FlowConfig {
            dt_min: 1.0,
            ..FlowConfig::default()
        },
        FlowConfig {
            local_tol: 0.0,
            ..FlowConfig::default()
        },
        FlowConfig {
            audit_every: 0,
            ..FlowConfig::default()
        },
        FlowConfig {
            t_end: f64::NAN,
            ..FlowConfig::default()
        },
    ];
    let c = curve::make_circle(1.0, 1, C64::new(0.0, 0.0)).unwrap();
    for cfg in bad {
        assert!(matches!(flow::run(&c, &cfg), Err(Error::InvalidParameter(_))));
    }
}

#[test]
fn step_limit_ends_the_run() {
    let c: ClosedCurve = Preset::Perturbed3.build(64).unwrap();
    let cfg = FlowConfig {
        max_steps: 7,
        ..config(64, 1.0)
    };
    let trace = flow::run(&c, &cfg).unwrap();
    assert!(matches!(trace.termination, Termination::StepFailure { .. }));
    assert_eq!(trace.accepted_steps, 7);
}
