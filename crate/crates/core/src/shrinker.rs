//! Self-similar shrinkers and Type I blow-up diagnostics.
//!
//! A shrinker solves `⟨η, ν⟩ = 4 k_ss` about its centre of mass. Under a
//! uniform scaling by `a`, `⟨η,ν⟩` scales by `a` and `k_ss` by `a⁻³`, so the
//! residual of `a·η` relative to `a⟨η,ν⟩` is `‖n − 4a⁻⁴ b‖₂ / ‖n‖₂` with
//! `n = ⟨η,ν⟩`, `b = k_ss` measured on `η`.

use serde::{Deserialize, Serialize};

use crate::curve::{self, ClosedCurve};
use crate::error::{Error, Result};
use crate::flow::{FlowTrace, Termination};
use crate::fourier::C64;
use crate::geometry::{ArclengthFrame, ScalarField};

const GOLDEN_TOL: f64 = 1e-8;
const SCAN_POINTS: usize = 41;

/// Bernoulli lemniscate `a(cos θ, sin θ cos θ)/(1 + sin²θ)`.
pub fn lemniscate(scale: f64, n_modes: usize) -> Result<ClosedCurve> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
    }
    let c = curve::from_sampler(n_modes, |t| {
        let d = 1.0 + t.sin().powi(2);
        C64::new(t.cos(), t.sin() * t.cos()) * (scale / d)
    })?;
    if !c.is_resolved() {
        return Err(Error::InvalidParameter(format!(
            "lemniscate is under-resolved at {n_modes} modes (tail ratio {:e})",
            c.tail_ratio()
        )));
    }
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct ShrinkerResidual {
    /// `⟨η,ν⟩ − 4k_ss` on the arclength grid of the centred curve.
    pub pointwise: ScalarField,
    pub l2_norm: f64,
    pub linf_norm: f64,
    /// `‖⟨η,ν⟩‖₂`, the natural size of the residual.
    pub support_norm: f64,
    pub scale_used: f64,
}

impl ShrinkerResidual {
    pub fn relative(&self) -> f64 {
        self.l2_norm / self.support_norm
    }
}

/// The two ingredients of the residual on the centred curve.
fn support_and_kss(curve: &ClosedCurve) -> Result<(ScalarField, ScalarField)> {
    let centred = curve::translate_to_centroid(curve);
    let frame = ArclengthFrame::new(&centred)?;
    Ok((frame.normal_projection(), frame.curvature_derivative(2)))
}

pub fn shrinker_residual(curve: &ClosedCurve) -> Result<ShrinkerResidual> {
    let (n, b) = support_and_kss(curve)?;
    let pointwise = n.zip_with(&b, |n, b| n - 4.0 * b);
    Ok(ShrinkerResidual {
        l2_norm: pointwise.norm_sq().sqrt(),
        linf_norm: pointwise.max_abs(),
        support_norm: n.norm_sq().sqrt(),
        pointwise,
        scale_used: 1.0,
    })
}

/// Relative residual of `a·η` as a function of `a`.
struct ScaledResidual {
    n: ScalarField,
    b: ScalarField,
    n_norm: f64,
}

impl ScaledResidual {
    fn new(curve: &ClosedCurve) -> Result<Self> {
        let (n, b) = support_and_kss(curve)?;
        let n_norm = n.norm_sq().sqrt();
        Ok(Self { n, b, n_norm })
    }

    fn eval(&self, a: f64) -> f64 {
        let mu = 4.0 * a.powi(-4);
        self.n.zip_with(&self.b, |n, b| n - mu * b).norm_sq().sqrt() / self.n_norm
    }
}

#[derive(Clone, Debug)]
pub struct ScaleSearch {
    pub a_star: f64,
    pub relative_residual: f64,
    /// Residual of `a_star · base`, evaluated from scratch.
    pub residual: ShrinkerResidual,
    /// The orientation-reversed curve gave the smaller residual.
    pub reversed: bool,
    /// Coarse log-spaced scan `(a, relative residual)`.
    pub scan: Vec<(f64, f64)>,
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_TOL * hi.max(1.0) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

fn search_one(objective: &ScaledResidual, lo: f64, hi: f64) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let ratio = (hi / lo).ln();
    let scan: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|i| {
            let a = lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp();
            (a, objective.eval(a))
        })
        .collect();
    let (fmin, fmax) = scan
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    // Flat residual (e.g. k_ss ≡ 0): every scale is equally far from a shrinker.
    if fmax - fmin <= 1e-12 * fmax {
        let a = (lo * hi).sqrt();
        return Ok((a, objective.eval(a), scan));
    }
    let i = (0..scan.len())
        .min_by(|&i, &j| scan[i].1.total_cmp(&scan[j].1))
        .expect("nonempty scan");
    if i == 0 || i == scan.len() - 1 {
        return Err(Error::NoInteriorMinimum { lo, hi });
    }
    let a = golden_section(|a| objective.eval(a), scan[i - 1].0, scan[i + 1].0);
    Ok((a, objective.eval(a), scan))
}

/// Minimizes the relative shrinker residual over uniform scalings `a` in
/// `bracket`: a coarse log-spaced scan locates the basin, golden-section
/// search refines `a` to `1e-8`. Both orientations are tried.
pub fn scale_search(base: &ClosedCurve, bracket: (f64, f64)) -> Result<ScaleSearch> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("bracket [{lo}, {hi}] must satisfy 0 < lo < hi")));
    }
    let forward = search_one(&ScaledResidual::new(base)?, lo, hi);
    let flipped = base.reversed();
    let backward = search_one(&ScaledResidual::new(&flipped)?, lo, hi);
    let (a_star, rel, scan, reversed) = match (forward, backward) {
        (Ok(f), Ok(b)) if b.1 < f.1 => (b.0, b.1, b.2, true),
        (Ok(f), _) => (f.0, f.1, f.2, false),
        (Err(_), Ok(b)) => (b.0, b.1, b.2, true),
        (Err(e), Err(_)) => return Err(e),
    };
    let chosen = if reversed { &flipped } else { base };
    let mut residual = shrinker_residual(&chosen.scaled(a_star))?;
    residual.scale_used = a_star;
    Ok(ScaleSearch {
        a_star,
        relative_residual: rel,
        residual,
        reversed,
        scan,
    })
}

/// `η = (T − t)^{-1/4} (γ − centroid)`.
pub fn rescale_parabolic(curve: &ClosedCurve, t_final: f64, t: f64) -> Result<ClosedCurve> {
    if !(t < t_final) {
        return Err(Error::InvalidParameter(format!("need t < T, got t = {t}, T = {t_final}")));
    }
    Ok(curve::translate_to_centroid(curve).scaled((t_final - t).powf(-0.25)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeIDiagnostic {
    /// `(t, ‖k‖₂² (T − t)^{1/4})` for rows with `t < T`.
    pub samples: Vec<(f64, f64)>,
    /// Largest sample.
    pub c_est: f64,
    pub t_used: f64,
    /// `C_est` recomputed with `T·0.95` and `T·1.05` where those leave samples.
    pub c_est_t_minus_5pct: Option<f64>,
    pub c_est_t_plus_5pct: Option<f64>,
}

fn type_one_samples(trace: &FlowTrace, t_final: f64) -> Vec<(f64, f64)> {
    trace
        .rows
        .iter()
        .filter(|r| r.t < t_final)
        .map(|r| (r.t, r.k_norm2_sq(trace.winding) * (t_final - r.t).powf(0.25)))
        .collect()
}

fn sup(samples: &[(f64, f64)]) -> Option<f64> {
    samples.iter().map(|s| s.1).reduce(f64::max)
}

/// `‖k‖₂² (T − t)^{1/4}` along a singular trace. `T` defaults to the
/// trace's extrapolated singular time.
pub fn type_one_diagnostic(trace: &FlowTrace, t_final: Option<f64>) -> Result<TypeIDiagnostic> {
    let t_est = match trace.termination {
        Termination::Singularity { t_est, .. } => t_est,
        _ => return Err(Error::NotSingular),
    };
    let t_used = t_final.unwrap_or(t_est);
    let t_last = trace.last().t;
    if !(t_used >= t_last) {
        return Err(Error::InvalidParameter(format!(
            "T = {t_used} precedes the last trace time {t_last}"
        )));
    }
    let samples = type_one_samples(trace, t_used);
    let c_est = sup(&samples).ok_or_else(|| Error::InvalidParameter("no samples before T".into()))?;
    Ok(TypeIDiagnostic {
        c_est_t_minus_5pct: sup(&type_one_samples(trace, 0.95 * t_used)),
        c_est_t_plus_5pct: sup(&type_one_samples(trace, 1.05 * t_used)),
        samples,
        c_est,
        t_used,
    })
}
