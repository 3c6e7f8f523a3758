//! Flows the figure-eight (winding 0) into its finite-time singularity and
//! compares the extrapolated time with the bound `L₀⁴/(16π⁴)`.

use curvediff::flow::{self, FlowConfig, Preset, Termination};
use curvediff::shrinker;

fn main() -> curvediff::Result<()> {
    let config = FlowConfig {
        t_end: 10.0,
        n_modes: 64,
        local_tol: 1e-6,
        ..FlowConfig::default()
    };
    let initial = Preset::Figure8.build(config.n_modes)?;
    let trace = flow::run(&initial, &config)?;
    let bound = flow::wirtinger_bound(trace.l0())?;
    println!("L0 = {:.10}, bound L0^4/(16 pi^4) = {:.10}", trace.l0(), bound);
    println!(
        "{} steps ({} rejected), last t = {:.10}, max|k| = {:.3}",
        trace.accepted_steps,
        trace.rejected_steps,
        trace.last().t,
        trace.last().max_abs_k
    );
    match &trace.termination {
        Termination::Singularity { t_est, exponent } => {
            println!("singularity: T_est = {t_est:.10} (<= bound: {}), exponent {exponent:.4}", *t_est <= bound);
            let diag = shrinker::type_one_diagnostic(&trace, None)?;
            println!(
                "Type I: C_est = {:.6} at T = {:.10}; T -5%: {:?}, T +5%: {:?}",
                diag.c_est, diag.t_used, diag.c_est_t_minus_5pct, diag.c_est_t_plus_5pct
            );
        }
        other => println!("terminated without blow-up: {other:?}"),
    }
    println!("convexity waiting time: {:?}", flow::convexity_waiting_time(&trace));
    Ok(())
}
