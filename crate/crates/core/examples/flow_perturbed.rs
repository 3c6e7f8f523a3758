//! Flows `r = 1 + 0.1 cos 3θ` to `t = 5`, audits the trace and fits decay
//! rates on an early window.

use std::time::Instant;

use curvediff::flow::{self, FlowConfig, Preset};

fn main() -> curvediff::Result<()> {
    let config = FlowConfig {
        t_end: 5.0,
        ..FlowConfig::default()
    };
    let initial = Preset::Perturbed3.build(config.n_modes)?;
    let start = Instant::now();
    let trace = flow::run(&initial, &config)?;
    let last = trace.last();
    println!(
        "{:?} after {} steps ({} rejected) in {:.2?}",
        trace.termination,
        trace.accepted_steps,
        trace.rejected_steps,
        start.elapsed()
    );
    println!("L0 = {:.12}  A0 = {:.12}", trace.l0(), trace.a0());
    println!("final: L = {:.12}  A = {:.12}  K_osc = {:e}", last.length, last.area, last.oscillation);
    let report = flow::audit(&trace, trace.l0(), trace.a0())?;
    for check in &report.checks {
        println!("{:16} rows {:6}  violations {}", check.name, check.checked, check.violations.len());
    }
    for window in [(0.02, 0.15), (1.0, 4.0)] {
        match flow::decay_rates(&trace, window) {
            Ok(r) => println!(
                "window {:?}: slope D {:.3} (bound {:.3}), K_osc {:.3} ({:.3}), |k_s|^2 {:.3} ({:.3})",
                window, r.slope_d, r.bound_d, r.slope_ko, r.bound_ko, r.slope_ks, r.bound_ks
            ),
            Err(e) => println!("window {window:?}: {e}"),
        }
    }
    Ok(())
}
