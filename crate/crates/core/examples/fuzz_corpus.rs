//! Sweeps a seeded corpus of random curves and summarizes identity
//! residuals and inequality outcomes per amplitude.

use std::time::Instant;

use curvediff::fuzz::{self, FuzzConfig};

fn main() -> curvediff::Result<()> {
    for amplitude in [0.05, 0.2, 0.5] {
        let config = FuzzConfig {
            n_curves: 300,
            amplitude,
            ..FuzzConfig::default()
        };
        let start = Instant::now();
        let records = fuzz::run_fuzz(&config)?;
        let s = fuzz::summarize(&config, &records);
        println!(
            "amplitude {amplitude} ({} curves, {} refined, {:.2?})",
            s.curves,
            s.refined,
            start.elapsed()
        );
        let per_q: Vec<String> = s.max_rel_residual.iter().map(|r| format!("{r:.1e}")).collect();
        println!("  max identity residual per q: {}", per_q.join(" "));
        println!(
            "  series errors: D {:.1e}, K_osc {:.1e}, forms {:.1e}",
            s.max_defect_rel_error, s.max_oscillation_rel_error, s.max_oscillation_forms_rel_error
        );
        println!(
            "  violations: lower {}, holder {}, sextic {} (worst lhs/rhs {:.4?})",
            s.violations_lower, s.violations_holder, s.violations_eqapp2, s.worst_eqapp2_ratio
        );
    }
    Ok(())
}
