//! Fourier-series identities and inequalities for closed curves.
//!
//! For an arclength-parametrized curve of length `L` and winding `ω`, the
//! projections `γ̂(p) = ∮ γ c̄_p ds` onto `c_p(s) = L^{-1/2} e^{2iωπps/L}`
//! turn geometric integrals into weighted sums of `|γ̂(p)|²`:
//!
//! ```text
//! Σ p |γ̂|²  = LA/(ωπ)               Σ p⁵ |γ̂|² = (L/2ωπ)⁵ ∮ k³
//! Σ p² |γ̂|² = L³/(2ωπ)²             Σ p⁶ |γ̂|² = (L/2ωπ)⁶ ∮ k⁴ + k_s²
//! Σ p³ |γ̂|² = L³/(2ωπ)²             Σ p⁷ |γ̂|² = (L/2ωπ)⁷ ∮ k⁵ + 5k k_s²
//! Σ p⁴ |γ̂|² = (L/2ωπ)⁴ ∮ k²         Σ p⁸ |γ̂|² = (L/2ωπ)⁸ ∮ k⁶ + 15k² k_s² + k_ss²
//! ```
//!
//! The basis `c_p` only sees frequencies that are multiples of `ω`. To keep
//! the identities exact for every curve, [`Spectrum`] stores the full
//! arclength spectrum and assigns the standard frequency `n` the index
//! `p = n/ω`; for curves whose spectrum lives on multiples of `ω` this is
//! exactly the `c_p` expansion.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::curve::{self, make_circle_with, ClosedCurve};
use crate::error::{Error, Result};
use crate::fourier::{self, freq, C64};
use crate::geometry::{ArclengthFrame, ParamFrame};

pub const MIN_Q: u32 = 1;
pub const MAX_Q: u32 = 8;
/// Relative tolerance used by the inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-8;
/// Share of the `q`-th moment allowed in the top quarter of the band before a
/// spectrum is flagged as under-resolved.
const TAIL_SHARE: f64 = 1e-8;

fn check_q(q: u32) -> Result<()> {
    if !(MIN_Q..=MAX_Q).contains(&q) {
        return Err(Error::UnsupportedOrder {
            order: q,
            min: MIN_Q,
            max: MAX_Q,
        });
    }
    Ok(())
}

/// Arclength Fourier projections `γ̂` of a curve with nonzero winding.
#[derive(Clone, Debug)]
pub struct Spectrum {
    coeffs: Vec<C64>,
    band: usize,
    length: f64,
    winding: i32,
}

impl Spectrum {
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn winding(&self) -> i32 {
        self.winding
    }

    /// Projection onto `e^{2iπns/L}/√L` for standard frequency `n`.
    pub fn coefficient(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.band {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + self.band as i64) as usize]
        }
    }

    /// `γ̂(p)` in the winding-adapted basis `c_p`.
    pub fn gamma_hat(&self, p: i64) -> C64 {
        self.coefficient(p * self.winding as i64)
    }

    /// `Σ w(p) |γ̂(p)|²` with `p = n/ω`.
    pub fn weighted_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let w = self.winding as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| weight(freq(i, self.band) as f64 / w) * c.norm_sqr())
            .sum()
    }

    /// `Σ |γ̂|²`, which equals `∮ |γ|² ds`.
    pub fn parseval(&self) -> f64 {
        self.weighted_sum(|_| 1.0)
    }

    /// Whether the top quarter of the band carries a negligible share of the
    /// `q`-th moment.
    pub fn is_resolved_for(&self, q: u32) -> bool {
        let w = self.winding as f64;
        let cut = (3 * self.band / 4) as i64;
        let mut tail = 0.0;
        let mut total = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let n = freq(i, self.band);
            let term = (n as f64 / w).abs().powi(q as i32) * c.norm_sqr();
            total += term;
            if n.abs() > cut {
                tail += term;
            }
        }
        tail <= TAIL_SHARE * total.max(1.0)
    }
}

/// Arclength spectrum of `curve`; the curve is reparametrized internally.
pub fn spectrum_of(curve: &ClosedCurve) -> Result<Spectrum> {
    if curve.winding() == 0 {
        return Err(Error::ZeroWinding);
    }
    spectrum_of_arclength(&curve::reparametrize_arclength(curve)?)
}

/// Spectrum of a curve that is already parametrized proportionally to
/// arclength (as returned by [`curve::reparametrize_arclength`]).
pub fn spectrum_of_arclength(arc: &ClosedCurve) -> Result<Spectrum> {
    if arc.winding() == 0 {
        return Err(Error::ZeroWinding);
    }
    let (length, _) = curve::length_and_area(arc);
    let root = length.sqrt();
    Ok(Spectrum {
        coeffs: arc.modes().iter().map(|c| c * root).collect(),
        band: arc.n_modes(),
        length,
        winding: arc.winding(),
    })
}

/// `Σ p^q |γ̂(p)|²`.
pub fn series_moment(spec: &Spectrum, q: u32) -> Result<f64> {
    check_q(q)?;
    Ok(spec.weighted_sum(|p| p.powi(q as i32)))
}

/// Curvature-integral form of the `q`-th moment, evaluated in the curve's own
/// parameter (no arclength reparametrization).
pub fn integral_moment(curve: &ClosedCurve, q: u32) -> Result<f64> {
    check_q(q)?;
    if curve.winding() == 0 {
        return Err(Error::ZeroWinding);
    }
    let frame = ParamFrame::new(curve);
    let w = curve.winding() as f64;
    let l = frame.length;
    let scale = l / (TAU * w);
    let k = &frame.k;
    let value = match q {
        1 => l * frame.signed_area() / (w * PI),
        2 | 3 => l * l * l / (TAU * w).powi(2),
        _ => {
            let ks = frame.d_ds(k);
            let integrand: Vec<f64> = match q {
                4 => k.iter().map(|k| k * k).collect(),
                5 => k.iter().map(|k| k * k * k).collect(),
                6 => k.iter().zip(&ks).map(|(k, s)| k.powi(4) + s * s).collect(),
                7 => k.iter().zip(&ks).map(|(k, s)| k.powi(5) + 5.0 * k * s * s).collect(),
                _ => {
                    let kss = frame.d_ds(&ks);
                    k.iter()
                        .zip(&ks)
                        .zip(&kss)
                        .map(|((k, s), ss)| k.powi(6) + 15.0 * k * k * s * s + ss * ss)
                        .collect()
                }
            };
            scale.powi(q as i32) * frame.integrate(&integrand)
        }
    };
    Ok(value)
}

/// `Q_q = (∂_s^{q-1} γ) · conj(∂_s γ)` by direct differentiation.
pub fn q_field_direct(frame: &ArclengthFrame, q: u32) -> Vec<C64> {
    assert!(q >= 1);
    let curve = frame.curve();
    let n = curve.n_modes();
    let m = curve.grid_size();
    let scale = TAU / frame.length();
    let dq = fourier::differentiate(curve.modes(), n, q - 1, scale);
    let d1 = fourier::differentiate(curve.modes(), n, 1, scale);
    let a = fourier::synthesize(&dq, n, m);
    let b = fourier::synthesize(&d1, n, m);
    a.iter().zip(&b).map(|(x, y)| x * y.conj()).collect()
}

/// `Q_q` from `Q_1 = γ conj(τ)` and `Q_{j+1} = ik Q_j + ∂_s Q_j`.
///
/// Products are formed on the frame grid, so pointwise agreement with
/// [`q_field_direct`] needs a band with headroom above the curve's content.
pub fn q_field_recursive(frame: &ArclengthFrame, q: u32) -> Vec<C64> {
    assert!(q >= 1);
    let scale = TAU / frame.length();
    let k = frame.curvature().samples();
    let mut field: Vec<C64> = frame
        .positions()
        .iter()
        .zip(frame.tangent())
        .map(|(g, t)| g * t.conj())
        .collect();
    for _ in 1..q {
        let d = fourier::derive_complex(&field, 1, scale);
        field = field
            .iter()
            .zip(&d)
            .zip(k)
            .map(|((f, df), &k)| C64::new(0.0, k) * f + df)
            .collect();
    }
    field
}

/// The moment written as `i^{-q-1} (L/2ωπ)^q ∮ k Q_{q-1} ds` (or
/// `(iL/2ωπ) ∮ Q_1 ds` for `q = 1`), using the recursive `Q` fields. The
/// imaginary part vanishes for exact data and is returned for inspection.
pub fn lemma_moment(curve: &ClosedCurve, q: u32) -> Result<C64> {
    check_q(q)?;
    if curve.winding() == 0 {
        return Err(Error::ZeroWinding);
    }
    let frame = ArclengthFrame::new(curve)?;
    let l = frame.length();
    let w = frame.winding() as f64;
    let i = C64::new(0.0, 1.0);
    let mean = |f: &[C64]| f.iter().sum::<C64>() / f.len() as f64 * l;
    if q == 1 {
        let q1 = q_field_recursive(&frame, 1);
        return Ok(i * (l / (TAU * w)) * mean(&q1));
    }
    let qf = q_field_recursive(&frame, q - 1);
    let kq: Vec<C64> = qf
        .iter()
        .zip(frame.curvature().samples())
        .map(|(z, &k)| z * k)
        .collect();
    Ok(i.powi(-(q as i32) - 1) * (l / (TAU * w)).powi(q as i32) * mean(&kq))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub q: u32,
    pub series_side: f64,
    pub integral_side: f64,
    pub abs_residual: f64,
    /// `|series − integral| / max(1, |integral|)`.
    pub rel_residual: f64,
    pub resolved: bool,
}

impl IdentityReport {
    fn new(q: u32, series: f64, integral: f64, resolved: bool) -> Self {
        let abs = (series - integral).abs();
        Self {
            q,
            series_side: series,
            integral_side: integral,
            abs_residual: abs,
            rel_residual: abs / integral.abs().max(1.0),
            resolved,
        }
    }
}

/// Compares both sides of the `q`-th identity. The zero mode carries weight
/// `0^q = 0`, so the result does not depend on the curve's position.
pub fn verify_identity(curve: &ClosedCurve, q: u32) -> Result<IdentityReport> {
    check_q(q)?;
    let spec = spectrum_of(curve)?;
    let series = series_moment(&spec, q)?;
    let integral = integral_moment(curve, q)?;
    Ok(IdentityReport::new(q, series, integral, spec.is_resolved_for(q)))
}

/// All eight identities, sharing one spectrum.
pub fn verify_all(curve: &ClosedCurve) -> Result<Vec<IdentityReport>> {
    verify_all_with(curve, &spectrum_of(curve)?)
}

/// All eight identities given the curve's precomputed arclength spectrum.
pub fn verify_all_with(curve: &ClosedCurve, spec: &Spectrum) -> Result<Vec<IdentityReport>> {
    (MIN_Q..=MAX_Q)
        .map(|q| {
            let series = series_moment(spec, q)?;
            let integral = integral_moment(curve, q)?;
            Ok(IdentityReport::new(q, series, integral, spec.is_resolved_for(q)))
        })
        .collect()
}

/// `D = (2ωπ)²/L · Σ p(p−1)|γ̂|²`.
pub fn series_defect(spec: &Spectrum) -> f64 {
    let w = spec.winding as f64;
    (TAU * w).powi(2) / spec.length * spec.weighted_sum(|p| p * (p - 1.0))
}

/// `K_osc = (2ωπ)⁴/L³ · Σ p²(p²−1)|γ̂|²`.
pub fn series_oscillation(spec: &Spectrum) -> f64 {
    let w = spec.winding as f64;
    (TAU * w).powi(4) / spec.length.powi(3) * spec.weighted_sum(|p| p * p * (p * p - 1.0))
}

/// `K_osc = (2ωπ)⁴/L³ · Σ p³(p−1)|γ̂|²`.
pub fn series_oscillation_cubic(spec: &Spectrum) -> f64 {
    let w = spec.winding as f64;
    (TAU * w).powi(4) / spec.length.powi(3) * spec.weighted_sum(|p| p * p * p * (p - 1.0))
}

/// Both sides of an inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

impl InequalityCheck {
    fn relative(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            violated: lhs > rhs + INEQUALITY_SLACK * rhs.abs().max(1.0),
        }
    }

    fn absolute(lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            lhs,
            rhs,
            violated: lhs > rhs + slack,
        }
    }

    /// `rhs − lhs`.
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// The quantities the inequality checks are built from, on one frame.
struct Quantities {
    length: f64,
    defect: f64,
    oscillation: f64,
    ks_sq: f64,
    k6: f64,
    k2ks2: f64,
    kss_sq: f64,
}

fn quantities(frame: &ArclengthFrame) -> Quantities {
    let w = frame.winding() as f64;
    let l = frame.length();
    let k = frame.curvature();
    let ks = k.derivative(1);
    let kss = k.derivative(2);
    let kbar = TAU * w / l;
    Quantities {
        length: l,
        defect: l * l - 2.0 * TAU * w * frame.signed_area(),
        oscillation: l * k.map(|x| (x - kbar).powi(2)).integral(),
        ks_sq: ks.norm_sq(),
        k6: k.map(|x| x.powi(6)).integral(),
        k2ks2: k.zip_with(&ks, |a, b| a * a * b * b).integral(),
        kss_sq: kss.norm_sq(),
    }
}

fn lower_from(qn: &Quantities) -> InequalityCheck {
    InequalityCheck::absolute(
        16.0 * qn.defect * qn.defect / qn.length.powi(4),
        qn.oscillation,
        INEQUALITY_SLACK,
    )
}

fn holder_from(qn: &Quantities) -> InequalityCheck {
    let k6_cubed = qn.k6.max(0.0).sqrt();
    let rhs = qn.length
        * qn.defect
        * (qn.ks_sq + k6_cubed * qn.oscillation.max(0.0).sqrt() / qn.length.sqrt());
    InequalityCheck::relative(qn.oscillation * qn.oscillation, rhs)
}

fn sextic_from(qn: &Quantities, spec: &Spectrum) -> SexticCheck {
    let w = spec.winding as f64;
    let series_sum = (TAU * w / spec.length).powi(8) * spec.weighted_sum(|p| p.powi(8));
    let lhs = 15.0 * qn.k2ks2;
    let rhs = qn.k6 + qn.kss_sq;
    let total = lhs + rhs;
    SexticCheck {
        lhs,
        rhs,
        violated: lhs > rhs + INEQUALITY_SLACK * rhs.abs().max(1.0),
        series_sum,
        identity_residual: (series_sum - total).abs() / total.abs().max(1.0),
    }
}

/// `16 D²/L⁴ ≤ K_osc`, with absolute slack `1e-8`.
pub fn lower_estimate(curve: &ClosedCurve) -> Result<InequalityCheck> {
    Ok(lower_from(&quantities(&ArclengthFrame::new(curve)?)))
}

/// `K_osc² ≤ L·D·(‖k_s‖₂² + L^{-1/2} ‖k‖₆³ K_osc^{1/2})`.
pub fn holder_chain(curve: &ClosedCurve) -> Result<InequalityCheck> {
    Ok(holder_from(&quantities(&ArclengthFrame::new(curve)?)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SexticCheck {
    /// `15 ∮ k² k_s² ds`
    pub lhs: f64,
    /// `∮ k⁶ + k_ss² ds`
    pub rhs: f64,
    pub violated: bool,
    /// `(2ωπ/L)⁸ Σ p⁸ |γ̂|²`, which should equal `rhs + lhs`.
    pub series_sum: f64,
    /// `|series_sum − (rhs + lhs)| / max(1, rhs + lhs)`.
    pub identity_residual: f64,
}

/// Tests `15 ∮ k²k_s² ≤ ∮ k⁶ + k_ss²` and cross-checks its ingredients
/// against the eighth moment.
///
/// The eighth moment gives `∮ k⁶ + 15k²k_s² + k_ss²`, a sum of nonnegative
/// terms, so it does not bound `15 ∮ k²k_s²` by `∮ k⁶ + k_ss²`; the
/// inequality is checked directly and fails on some curves (for example the
/// curve with `k(s) = 1 + cos(3s)/2`).
pub fn check_sextic(curve: &ClosedCurve) -> Result<SexticCheck> {
    let arc = curve::reparametrize_arclength(curve)?;
    let spec = spectrum_of_arclength(&arc)?;
    Ok(sextic_from(&quantities(&ArclengthFrame::from_arclength(arc)), &spec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lower: InequalityCheck,
    pub holder: InequalityCheck,
    pub sextic: SexticCheck,
}

/// The three inequalities on a curve already in arclength form, given its
/// spectrum.
pub fn inequalities_on(frame: &ArclengthFrame, spec: &Spectrum) -> InequalityReport {
    let qn = quantities(frame);
    InequalityReport {
        lower: lower_from(&qn),
        holder: holder_from(&qn),
        sextic: sextic_from(&qn, spec),
    }
}

pub fn inequalities(curve: &ClosedCurve) -> Result<InequalityReport> {
    let arc = curve::reparametrize_arclength(curve)?;
    let spec = spectrum_of_arclength(&arc)?;
    Ok(inequalities_on(&ArclengthFrame::from_arclength(arc), &spec))
}

/// Intermediate steps of the lower estimate on the centred curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerChain {
    pub defect: f64,
    /// `(L²/4) ‖k − k̄‖₁`
    pub l1_bound: f64,
    /// `sup |γ̃|`
    pub max_radius: f64,
    /// `L/4`
    pub quarter_length: f64,
}

impl LowerChain {
    pub fn holds(&self, tol: f64) -> bool {
        self.defect <= self.l1_bound + tol && self.max_radius <= self.quarter_length + tol
    }
}

pub fn lower_chain(curve: &ClosedCurve) -> Result<LowerChain> {
    let centred = curve::translate_to_centroid(curve);
    let frame = ArclengthFrame::new(&centred)?;
    let l = frame.length();
    let w = frame.winding() as f64;
    let kbar = TAU * w / l;
    let l1 = frame.curvature().map(|k| (k - kbar).abs()).integral();
    // The grid can miss the farthest point; refine with the dense samples.
    let dense = frame.curve().samples(8 * frame.curve().n_modes() + 1);
    let max_radius = dense.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(LowerChain {
        defect: l * l - 2.0 * TAU * w * frame.signed_area(),
        l1_bound: 0.25 * l * l * l1,
        max_radius,
        quarter_length: 0.25 * l,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffCentreCircle {
    pub offset: f64,
    /// `sup |⟨γ,ν⟩ − (1/L)∮⟨γ,ν⟩ ds|`
    pub sup_dev: f64,
    pub length: f64,
}

/// Evaluates the oscillation of `⟨γ,ν⟩` about its mean on the unit circle
/// centred at `(offset, 0)`. It grows without bound in the offset while the
/// length stays `2π`, so it cannot be bounded by `L`.
pub fn off_centre_support_oscillation(offset: f64) -> Result<OffCentreCircle> {
    if !(offset >= 0.0) || !offset.is_finite() {
        return Err(Error::InvalidParameter(format!("offset {offset} must be nonnegative")));
    }
    let circle = make_circle_with(1.0, 1, C64::new(offset, 0.0), 16)?;
    let frame = ArclengthFrame::new(&circle)?;
    let support = frame.normal_projection();
    let mean = support.integral() / frame.length();
    let sup_dev = support.samples().iter().fold(0.0, |a: f64, x| a.max((x - mean).abs()));
    Ok(OffCentreCircle {
        offset,
        sup_dev,
        length: frame.length(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{from_sampler, make_circle, random_curve};

    fn origin() -> C64 {
        C64::new(0.0, 0.0)
    }

    #[test]
    fn unit_circle_spectrum_is_one_mode() {
        let spec = spectrum_of(&make_circle(1.0, 1, origin()).unwrap()).unwrap();
        assert!((spec.gamma_hat(1) - C64::new(TAU.sqrt(), 0.0)).norm() < 1e-12);
        for p in -20..=20 {
            if p != 1 {
                assert!(spec.gamma_hat(p).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_only_moves_the_zero_mode() {
        let shift = C64::new(0.7, -1.3);
        let a = spectrum_of(&make_circle(1.0, 1, origin()).unwrap()).unwrap();
        let b = spectrum_of(&make_circle(1.0, 1, shift).unwrap()).unwrap();
        assert!((b.gamma_hat(0) - a.gamma_hat(0) - shift * TAU.sqrt()).norm() < 1e-12);
        assert!((b.gamma_hat(1) - a.gamma_hat(1)).norm() < 1e-12);
    }

    #[test]
    fn unit_circle_moments() {
        let c = make_circle(1.0, 1, origin()).unwrap();
        let spec = spectrum_of(&c).unwrap();
        for q in 1..=8 {
            assert!((series_moment(&spec, q).unwrap() - TAU).abs() < 1e-11);
            assert!((integral_moment(&c, q).unwrap() - TAU).abs() < 1e-11);
            let r = verify_identity(&c, q).unwrap();
            assert!(r.rel_residual < 1e-10, "q = {q}: {r:?}");
        }
    }

    #[test]
    fn q_out_of_range() {
        let c = make_circle(1.0, 1, origin()).unwrap();
        let spec = spectrum_of(&c).unwrap();
        assert!(series_moment(&spec, 0).is_err());
        assert!(series_moment(&spec, 9).is_err());
        assert!(integral_moment(&c, 9).is_err());
        assert!(verify_identity(&c, 0).is_err());
    }

    #[test]
    fn zero_winding_has_no_adapted_basis() {
        let eight = from_sampler(32, |u| C64::new(u.cos(), 0.5 * (2.0 * u).sin())).unwrap();
        assert_eq!(eight.winding(), 0);
        assert!(matches!(spectrum_of(&eight), Err(Error::ZeroWinding)));
    }

    #[test]
    fn circle_series_forms_vanish() {
        let spec = spectrum_of(&make_circle(1.0, 1, origin()).unwrap()).unwrap();
        assert!(series_defect(&spec).abs() < 1e-11);
        assert!(series_oscillation(&spec).abs() < 1e-11);
        let spec2 = spectrum_of(&make_circle(1.0, 2, origin()).unwrap()).unwrap();
        assert!(series_defect(&spec2).abs() < 1e-11);
        assert!((spec2.gamma_hat(1).norm() - (4.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn q_fields_agree() {
        // Products alias on the native grid; widen the band so they are exact.
        let c = random_curve(8, 64, 3.0, 0.2).unwrap();
        let arc = curve::reparametrize_arclength(&c).unwrap();
        let frame = ArclengthFrame::from_arclength(arc.with_band(128).unwrap());
        for q in 1..=6 {
            let a = q_field_direct(&frame, q);
            let b = q_field_recursive(&frame, q);
            let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            // Each spectral derivative amplifies the residual.
            let tol = 1e-11 * 30f64.powi(q as i32 - 1) * scale;
            assert!(err < tol, "q = {q}: {err:e}");
        }
    }

    #[test]
    fn lemma_form_matches_series() {
        let c = random_curve(9, 64, 3.0, 0.2).unwrap();
        let spec = spectrum_of(&c).unwrap();
        for q in 1..=8 {
            let z = lemma_moment(&c, q).unwrap();
            let s = series_moment(&spec, q).unwrap();
            assert!((z.re - s).abs() < 1e-8 * s.abs().max(1.0), "q = {q}: {z} vs {s}");
            assert!(z.im.abs() < 1e-8 * s.abs().max(1.0));
        }
    }

    #[test]
    fn holder_chain_on_circle_is_trivial() {
        let c = make_circle(1.0, 1, origin()).unwrap();
        let h = holder_chain(&c).unwrap();
        assert!(h.lhs.abs() < 1e-20);
        assert!(h.rhs.abs() < 1e-9);
        assert!(!h.violated);
    }

    #[test]
    fn sextic_on_circle() {
        let s = check_sextic(&make_circle(1.0, 1, origin()).unwrap()).unwrap();
        assert!(s.lhs.abs() < 1e-18);
        assert!((s.rhs - TAU).abs() < 1e-10);
        assert!(!s.violated);
        assert!(s.identity_residual < 1e-10);
    }

    #[test]
    fn sextic_fails_on_a_three_lobed_curve() {
        // k(s) = 1 + cos(3s)/2 on a curve of length 2π.
        let c = curve::from_turning_angle(64, 1, 1.0, |u| (3.0 * u).sin() / 6.0).unwrap();
        let s = check_sextic(&c).unwrap();
        assert!(s.identity_residual < 1e-10, "{s:?}");
        assert!(s.violated, "{s:?}");
        // Independent quadrature of the prescribed curvature.
        let n = 4096;
        let (mut a, mut b) = (0.0, 0.0);
        for j in 0..n {
            let x = TAU * j as f64 / n as f64;
            let k = 1.0 + 0.5 * (3.0 * x).cos();
            let ks = -1.5 * (3.0 * x).sin();
            let kss = -4.5 * (3.0 * x).cos();
            a += 15.0 * k * k * ks * ks;
            b += k.powi(6) + kss * kss;
        }
        let h = TAU / n as f64;
        assert!((s.lhs - a * h).abs() < 1e-9 * a * h);
        assert!((s.rhs - b * h).abs() < 1e-9 * b * h);
    }

    #[test]
    fn off_centre_circle() {
        let centred = off_centre_support_oscillation(0.0).unwrap();
        assert!(centred.sup_dev <= 2.0);
        assert!(centred.sup_dev <= centred.length);
        let far = off_centre_support_oscillation(10.0).unwrap();
        assert!(far.sup_dev > TAU);
        assert!(off_centre_support_oscillation(-1.0).is_err());
    }
}
