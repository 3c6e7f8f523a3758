//! Evaluates the three curvature inequalities, shows a curve on which the
//! sextic one fails, and the off-centre circle whose support function
//! oscillates far more than its length.

use curvediff::curve;
use curvediff::spectral;

fn main() -> curvediff::Result<()> {
    let near_round = curve::polar_curve(64, |u| 1.0 + 0.01 * (3.0 * u).cos())?;
    let ellipse = curve::from_sampler(64, |u| curvediff::fourier::C64::new(2.0 * u.cos(), u.sin()))?;
    // Curvature k(s) = 1 + cos(3s)/2 along a curve of length 2π.
    let lobed = curve::from_turning_angle(64, 1, 1.0, |u| (3.0 * u).sin() / 6.0)?;
    for (name, c) in [("mode-3 perturbation", &near_round), ("ellipse 2x1", &ellipse), ("three-lobed", &lobed)] {
        let r = spectral::inequalities(c)?;
        println!("{name}");
        println!("  16D^2/L^4 <= K_osc:  {:.6e} <= {:.6e}  violated={}", r.lower.lhs, r.lower.rhs, r.lower.violated);
        println!("  Holder chain:        {:.6e} <= {:.6e}  violated={}", r.holder.lhs, r.holder.rhs, r.holder.violated);
        println!(
            "  15∮k²k_s² <= ∮k⁶+k_ss²: {:.6e} <= {:.6e}  violated={}  (sum vs eighth moment: {:.1e})",
            r.sextic.lhs, r.sextic.rhs, r.sextic.violated, r.sextic.identity_residual
        );
    }

    let chain = spectral::lower_chain(&ellipse)?;
    println!(
        "ellipse lower chain: D={:.6} <= {:.6}, sup|γ̃|={:.6} <= L/4={:.6}",
        chain.defect, chain.l1_bound, chain.max_radius, chain.quarter_length
    );

    let off = spectral::off_centre_support_oscillation(100.0)?;
    println!(
        "unit circle centred at (100, 0): sup|<γ,ν> - mean| = {:.6} vs L = {:.6}",
        off.sup_dev, off.length
    );
    Ok(())
}
