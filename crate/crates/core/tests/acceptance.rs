//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Positional arguments filter criteria by substring.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use curvediff::cli;
use curvediff::curve;
use curvediff::flow::{self, FlowConfig, FlowTrace, Preset, Termination};
use curvediff::fourier::C64;
use curvediff::fuzz::{self, Checks, CurveRecord, FuzzConfig};
use curvediff::shrinker;
use curvediff::spectral;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn(&mut Shared) -> Outcome;

/// Results reused by more than one criterion.
#[derive(Default)]
struct Shared {
    corpus: Option<(Vec<CurveRecord>, Duration)>,
    perturbed: Option<(FlowTrace, Duration)>,
}

impl Shared {
    fn corpus(&mut self) -> &(Vec<CurveRecord>, Duration) {
        self.corpus.get_or_insert_with(|| {
            let config = FuzzConfig {
                n_curves: 1000,
                seed: 42,
                n_modes: 128,
                decay: 3.0,
                amplitude: 0.2,
                identities: true,
                checks: Checks::NONE,
                ..FuzzConfig::default()
            };
            let start = Instant::now();
            let records = fuzz::run_fuzz(&config).expect("corpus");
            (records, start.elapsed())
        })
    }

    fn perturbed(&mut self) -> &(FlowTrace, Duration) {
        self.perturbed.get_or_insert_with(|| {
            let config = FlowConfig {
                t_end: 5.0,
                n_modes: 128,
                ..FlowConfig::default()
            };
            let start = Instant::now();
            let initial = Preset::Perturbed3.build(128).expect("preset");
            let trace = flow::run(&initial, &config).expect("flow run");
            (trace, start.elapsed())
        })
    }
}

fn identity_suite(sh: &mut Shared) -> Outcome {
    let (records, elapsed) = sh.corpus();
    let mut worst = [0.0f64; 8];
    for r in records {
        for i in &r.identities {
            worst[(i.q - 1) as usize] = worst[(i.q - 1) as usize].max(i.rel_residual);
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    let complete = records.len() == 1000 && records.iter().all(|r| r.identities.len() == 8);
    let pass = complete && max < 1e-7 && *elapsed < Duration::from_secs(60);
    let per_q: Vec<String> = worst.iter().map(|w| format!("{w:.1e}")).collect();
    outcome(
        pass,
        format!(
            "1000 curves, max rel residual per q [{}] (< 1e-7), {:.1?} (< 60 s)",
            per_q.join(", "),
            elapsed
        ),
    )
}

fn series_representations(sh: &mut Shared) -> Outcome {
    let (records, _) = sh.corpus();
    let (mut d, mut k, mut forms) = (0.0f64, 0.0f64, 0.0f64);
    for r in records {
        let s = r.series.expect("series forms");
        d = d.max(s.defect_rel_error());
        k = k.max(s.oscillation_rel_error());
        forms = forms.max(s.oscillation_forms_rel_error());
    }
    outcome(
        d < 1e-7 && k < 1e-7 && forms < 1e-9,
        format!("D {d:.1e} (< 1e-7), K_osc {k:.1e} (< 1e-7), two K_osc forms {forms:.1e} (< 1e-9)"),
    )
}

fn inequality_suite(_: &mut Shared) -> Outcome {
    let (mut a, mut b, mut c, mut n) = (0, 0, 0, 0);
    let mut worst_c = 0.0f64;
    for (j, amplitude) in [0.05, 0.2, 0.5].into_iter().enumerate() {
        let config = FuzzConfig {
            n_curves: 1000,
            seed: 42 + 1000 * j as u64,
            amplitude,
            identities: false,
            checks: Checks::ALL,
            ..FuzzConfig::default()
        };
        let records = fuzz::run_fuzz(&config).expect("corpus");
        for r in &records {
            let ineq = r.inequalities.as_ref().expect("inequalities");
            a += usize::from(ineq.lower.violated);
            b += usize::from(ineq.holder.violated);
            c += usize::from(ineq.sextic.violated);
            worst_c = worst_c.max(ineq.sextic.lhs / ineq.sextic.rhs);
        }
        n += records.len();
    }
    outcome(
        n == 3000 && a == 0 && b == 0 && c == 0,
        format!("{n} curves: violations (a) {a}, (b) {b}, (c) {c}; worst (c) lhs/rhs {worst_c:.4}"),
    )
}

fn counterexample(_: &mut Shared) -> Outcome {
    let r = spectral::off_centre_support_oscillation(100.0).expect("circle");
    let l = 2.0 * PI;
    outcome(
        r.sup_dev >= 100.0 - 1e-9 && r.sup_dev > l && (r.length - l).abs() < 1e-12,
        format!("sup|<γ,ν> - mean| = {:.12} >= 100 > L = {:.12}", r.sup_dev, r.length),
    )
}

fn flow_conservation(sh: &mut Shared) -> Outcome {
    let (trace, elapsed) = sh.perturbed();
    let a0 = trace.a0();
    let area = trace
        .rows
        .iter()
        .map(|r| (r.area - a0).abs() / a0)
        .fold(0.0, f64::max);
    let l_up = trace.rows.windows(2).filter(|w| w[1].length > w[0].length + 1e-9).count();
    let d_up = trace.rows.windows(2).filter(|w| w[1].defect > w[0].defect + 1e-9).count();
    let report = flow::audit(trace, trace.l0(), a0).expect("audit");
    let rate = report.check("length_rate").expect("length_rate");
    // The audit compares at 1% because every step is recorded; the criterion
    // allows 5%, so recount against that.
    let rate_bad = rate.violations.iter().filter(|v| (v.value - v.bound).abs() > 0.05 * v.bound.abs()).count();
    let reached = trace.termination == Termination::ReachedTEnd;
    let pass = reached
        && area < 1e-6
        && l_up == 0
        && d_up == 0
        && rate.checked > 0
        && rate_bad == 0
        && *elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "{:?}, {} steps, max |A-A0|/A0 {area:.1e} (< 1e-6), L increases {l_up}, D increases {d_up}, \
             dL/dt outside 5% at {rate_bad}/{} rows, {:.1?} (< 30 s)",
            trace.termination, trace.accepted_steps, rate.checked, elapsed
        ),
    )
}

fn decay_rates(sh: &mut Shared) -> Outcome {
    let (trace, _) = sh.perturbed();
    let final_k = trace.last().oscillation;
    match flow::decay_rates(trace, (1.0, 4.0)) {
        Ok(r) => outcome(
            r.meets_all() && final_k < 1e-8,
            format!(
                "slopes D {:.3} (<= {:.3}), K_osc {:.3} (<= {:.3}), |k_s|^2 {:.3} (<= {:.3}); final K_osc {final_k:.1e} (< 1e-8)",
                r.slope_d,
                0.9 * r.bound_d,
                r.slope_ko,
                0.9 * r.bound_ko,
                r.slope_ks,
                0.9 * r.bound_ks
            ),
        ),
        Err(e) => {
            let early = flow::decay_rates(trace, (0.02, 0.15))
                .map(|r| format!("slope D on [0.02, 0.15] is {:.3} vs bound {:.3}", r.slope_d, r.bound_d))
                .unwrap_or_default();
            outcome(false, format!("{e}; final K_osc {final_k:.1e}; {early}"))
        }
    }
}

fn figure_eight(local_tol: f64) -> (FlowTrace, Option<shrinker::TypeIDiagnostic>) {
    let config = FlowConfig {
        t_end: 10.0,
        n_modes: 64,
        local_tol,
        ..FlowConfig::default()
    };
    let trace = flow::run(&Preset::Figure8.build(64).expect("preset"), &config).expect("flow run");
    let diag = shrinker::type_one_diagnostic(&trace, None).ok();
    (trace, diag)
}

fn omega_zero_bound(_: &mut Shared) -> Outcome {
    // The step-doubling error estimate scales like dt², so a quarter of the
    // tolerance halves the steps.
    let (coarse, dc) = figure_eight(1e-6);
    let (fine, df) = figure_eight(2.5e-7);
    let bound = flow::wirtinger_bound(coarse.l0()).expect("bound");
    let (Some(dc), Some(df)) = (dc, df) else {
        return outcome(false, format!("no singularity: {:?} / {:?}", coarse.termination, fine.termination));
    };
    let t_est = coarse.t_est().unwrap_or(f64::NAN);
    let change = (dc.c_est - df.c_est).abs() / df.c_est;
    let mean_dt = |t: &FlowTrace| t.last().t / t.accepted_steps as f64;
    outcome(
        t_est <= bound && change < 0.1,
        format!(
            "T_est {t_est:.6} <= L0^4/(16π^4) = {bound:.6}; C_est {:.6} vs {:.6} with mean dt {:.2e} vs {:.2e}: change {change:.1e} (< 0.1)",
            dc.c_est,
            df.c_est,
            mean_dt(&coarse),
            mean_dt(&fine)
        ),
    )
}

fn shrinker_lab(_: &mut Shared) -> Outcome {
    let mut circle_err = 0.0f64;
    for r in [0.25, 1.0, 3.0, 10.0] {
        let c = curve::make_circle(r, 1, C64::new(0.0, 0.0)).expect("circle");
        let res = shrinker::shrinker_residual(&c).expect("residual");
        circle_err = circle_err.max((res.linf_norm - r).abs());
    }
    let search = |n| {
        let base = shrinker::lemniscate(1.0, n).expect("lemniscate");
        shrinker::scale_search(&base, (0.1, 10.0)).expect("search")
    };
    let (s64, s128) = (search(64), search(128));
    let spread = (s64.a_star - s128.a_star).abs();
    let worst = s64.relative_residual.max(s128.relative_residual);
    outcome(
        circle_err < 1e-10 && worst < 1e-3 && spread < 1e-6,
        format!(
            "circle |linf - r| {circle_err:.1e} (< 1e-10); lemniscate a* {:.10} / {:.10} (spread {spread:.1e} < 1e-6), relative residual {worst:.1e} (< 1e-3)",
            s64.a_star, s128.a_star
        ),
    )
}

fn scaling_law(_: &mut Shared) -> Outcome {
    let lambda = 2.0;
    let config = FlowConfig {
        t_end: 1.0,
        n_modes: 128,
        ..FlowConfig::default()
    };
    let base = Preset::Perturbed3.build(128).expect("preset");
    let a = flow::run(&base, &config).expect("run");
    let b = flow::run(&base.scaled(lambda), &config.rescaled(lambda)).expect("run");
    if a.rows.len() != b.rows.len() {
        return outcome(false, format!("row counts differ: {} vs {}", a.rows.len(), b.rows.len()));
    }
    let rel = |x: f64, y: f64, scale: f64| (x - y).abs() / scale;
    let l4 = lambda.powi(4);
    let mut worst = 0.0f64;
    for (r, s) in a.rows.iter().zip(&b.rows) {
        let l_scale = r.length;
        worst = worst
            .max(rel(s.t, l4 * r.t, l4 * config.t_end))
            .max(rel(s.length, lambda * r.length, lambda * l_scale))
            .max(rel(s.area, lambda * lambda * r.area, lambda * lambda * r.area.abs()))
            .max(rel(s.defect, lambda * lambda * r.defect, lambda * lambda * l_scale * l_scale))
            .max(rel(s.oscillation, r.oscillation, (2.0 * PI).powi(2)))
            .max(rel(s.max_abs_k, r.max_abs_k / lambda, r.max_abs_k / lambda));
    }
    outcome(
        worst < 1e-6,
        format!("{} rows on t in [0, 1]: max relative mismatch {worst:.1e} (< 1e-6)", a.rows.len()),
    )
}

fn run_cli(args: &[&str]) -> i32 {
    cli::run_from(std::iter::once("curvediff").chain(args.iter().copied()))
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("read dir") {
            let p = entry.expect("entry").path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism(_: &mut Shared) -> Outcome {
    let tmp = tempfile::tempdir().expect("tempdir");
    let mut runs = Vec::new();
    for i in 0..2 {
        let fz = tmp.path().join(format!("fuzz{i}"));
        let fl = tmp.path().join(format!("flow{i}"));
        let fz_code = run_cli(&[
            "fuzz", "--n", "200", "--seed", "7", "--threads", "2", "--amplitude", "0.05,0.2",
            "--quiet", "--out", fz.to_str().unwrap(),
        ]);
        let fl_code = run_cli(&[
            "flow", "run", "--initial", "preset:perturbed3", "--t-end", "0.05", "--n-modes", "64",
            "--threads", "2", "--quiet", "--out", fl.to_str().unwrap(),
        ]);
        runs.push((fz_code, fl_code, csv_bytes(&fz), csv_bytes(&fl)));
    }
    let files = runs[0].2.len() + runs[0].3.len();
    let same = runs[0].2 == runs[1].2 && runs[0].3 == runs[1].3 && files >= 5;
    let codes_ok = runs.iter().all(|r| r.0 != cli::EXIT_USAGE && r.1 != cli::EXIT_USAGE);
    outcome(
        same && codes_ok,
        format!("{files} CSV files from fuzz and flow run compared byte for byte across two runs at 2 threads: identical = {same}"),
    )
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let checks: [(&str, Check); 10] = [
        ("identity_suite", identity_suite),
        ("series_representations", series_representations),
        ("inequality_suite", inequality_suite),
        ("counterexample_remark", counterexample),
        ("flow_conservation", flow_conservation),
        ("decay_rates", decay_rates),
        ("omega_zero_bound", omega_zero_bound),
        ("shrinker_lab", shrinker_lab),
        ("scaling_law", scaling_law),
        ("determinism", determinism),
    ];
    let mut shared = Shared::default();
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check(&mut shared);
        ran += 1;
        failed += usize::from(!o.pass);
        println!(
            "{} {name}: {} [{:.1?}]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
