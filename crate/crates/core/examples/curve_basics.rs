//! Builds a few curves, prints their geometry and round-trips one through
//! JSON.

use curvediff::curve::{self, ClosedCurve};
use curvediff::fourier::C64;
use curvediff::geometry;

fn show(name: &str, c: &ClosedCurve) -> curvediff::Result<()> {
    let r = geometry::geometric_report(c, 2)?;
    println!(
        "{name:12} w={} L={:.10} A={:.10} D={:.3e} K_osc={:.3e} I/pi={:?} |k_s|^2={:.3e} resolved={}",
        r.winding,
        r.length,
        r.signed_area,
        r.defect,
        r.oscillation,
        r.iso_ratio_normalized(),
        r.ks_norm_sq().unwrap_or(0.0),
        r.resolved
    );
    Ok(())
}

fn main() -> curvediff::Result<()> {
    let circle = curve::make_circle(2.0, 1, C64::new(1.0, -1.0))?;
    let double = curve::make_circle(1.0, 2, C64::new(0.0, 0.0))?;
    let ellipse = curve::from_sampler(64, |u| C64::new(2.0 * u.cos(), u.sin()))?;
    let random = curve::random_curve(7, 128, 3.0, 0.2)?;
    show("circle r=2", &circle)?;
    show("2-circle", &double)?;
    show("ellipse 2x1", &ellipse)?;
    show("random #7", &random)?;

    let (min, mean) = random.speed_stats();
    println!("random #7 speed: min {min:.4}, mean {mean:.4}");
    let arc = curve::reparametrize_arclength(&random)?;
    let (min, mean) = arc.speed_stats();
    println!("after arclength reparametrization: min {min:.12}, mean {mean:.12}");

    let text = random.to_json()?;
    let back = ClosedCurve::from_json(&text)?;
    println!("JSON round trip exact: {}", back == random);
    Ok(())
}
