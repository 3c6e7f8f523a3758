//! Checks the eight moment identities and the series forms of `D` and
//! `K_osc` on a circle and on a random curve.

use curvediff::curve;
use curvediff::fourier::C64;
use curvediff::spectral;

fn main() -> curvediff::Result<()> {
    let curves = [
        ("unit circle", curve::make_circle(1.0, 1, C64::new(0.0, 0.0))?),
        ("random #42", curve::random_curve(42, 128, 3.0, 0.2)?),
    ];
    for (name, c) in &curves {
        println!("{name}");
        for r in spectral::verify_all(c)? {
            println!(
                "  q={} series={:+.15e} integral={:+.15e} rel={:.1e} resolved={}",
                r.q, r.series_side, r.integral_side, r.rel_residual, r.resolved
            );
        }
        let spec = spectral::spectrum_of(c)?;
        println!(
            "  D series {:.12e}, K_osc series {:.12e} / cubic form {:.12e}",
            spectral::series_defect(&spec),
            spectral::series_oscillation(&spec),
            spectral::series_oscillation_cubic(&spec)
        );
    }
    Ok(())
}
