//! Scale search for the lemniscate as a shrinker, the circle as a
//! non-shrinker, and parabolic rescaling.

use curvediff::curve;
use curvediff::fourier::C64;
use curvediff::shrinker;

fn main() -> curvediff::Result<()> {
    for n in [64, 128] {
        let base = shrinker::lemniscate(1.0, n)?;
        let s = shrinker::scale_search(&base, (0.1, 10.0))?;
        println!(
            "lemniscate N={n}: a* = {:.10}, relative residual {:.3e}, reversed {}",
            s.a_star, s.relative_residual, s.reversed
        );
    }
    let lem = shrinker::lemniscate(1.0, 128)?;
    let (l, a) = curve::length_and_area(&lem);
    println!("lemniscate a=1: L = {l:.12}, A = {a:.1e}");

    for r in [0.5, 1.0, 3.0] {
        let c = curve::make_circle(r, 1, C64::new(0.0, 0.0))?;
        let res = shrinker::shrinker_residual(&c)?;
        println!("circle r={r}: residual linf = {:.12}", res.linf_norm);
    }
    let circle = curve::make_circle(1.0, 1, C64::new(0.0, 0.0))?;
    let s = shrinker::scale_search(&circle, (0.1, 10.0))?;
    println!("circle search: relative residual {:.6} (flat objective)", s.relative_residual);

    let eta = shrinker::rescale_parabolic(&lem, 17.0, 1.0)?;
    let (l_eta, _) = curve::length_and_area(&eta);
    println!("parabolic rescale with T - t = 16: L {:.6} -> {:.6}", l, l_eta);
    Ok(())
}
