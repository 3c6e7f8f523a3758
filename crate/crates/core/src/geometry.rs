//! Curvature fields and the scalar geometry of a closed curve.
//!
//! Conventions: `τ = ∂_s γ`, `ν = iτ` (rotation by +π/2), `∂_s τ = kν`. A
//! counterclockwise unit circle therefore has `k ≡ 1`, and the signed area is
//! `A = -½ ∮ ⟨γ, ν⟩ ds`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::curve::{self, ClosedCurve};
use crate::error::{Error, Result};
use crate::fourier::{self, C64};

pub const MAX_DERIVATIVE_ORDER: u32 = 8;
/// Relative spectral floor below which field modes are treated as rounding.
const NOISE_FLOOR: f64 = 1e-14;

/// Real samples on the uniform arclength grid of a curve, with the curve length.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    samples: Vec<f64>,
    length: f64,
}

impl ScalarField {
    pub fn new(samples: Vec<f64>, length: f64) -> Self {
        Self { samples, length }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `∮ f ds` by the trapezoid rule.
    pub fn integral(&self) -> f64 {
        fourier::mean(&self.samples) * self.length
    }

    /// `∂_s^order f`, spectrally, ignoring modes at the rounding level.
    pub fn derivative(&self, order: u32) -> Self {
        let scale = TAU / self.length;
        Self::new(
            fourier::derive_real_filtered(&self.samples, order, scale, NOISE_FLOOR),
            self.length,
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.samples.iter().map(|&x| f(x)).collect(), self.length)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid_size(), other.grid_size(), "fields live on different grids");
        Self::new(
            self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect(),
            self.length,
        )
    }

    /// `∮ f² ds`.
    pub fn norm_sq(&self) -> f64 {
        self.map(|x| x * x).integral()
    }

    /// `(∮ |f|^p ds)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.map(|x| x.abs().powf(p)).integral().powf(1.0 / p)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }
}

/// Frenet data of an arclength-parametrized curve on its native `2N + 1` grid.
#[derive(Clone, Debug)]
pub struct ArclengthFrame {
    curve: ClosedCurve,
    length: f64,
    positions: Vec<C64>,
    tangent: Vec<C64>,
    curvature: ScalarField,
}

impl ArclengthFrame {
    /// Reparametrizes by arclength and evaluates the frame.
    pub fn new(curve: &ClosedCurve) -> Result<Self> {
        let arc = curve::reparametrize_arclength(curve)?;
        Ok(Self::from_arclength(arc))
    }

    /// Builds the frame assuming `curve` is already arclength-parametrized.
    pub fn from_arclength(curve: ClosedCurve) -> Self {
        let m = curve.grid_size();
        let positions = curve.samples(m);
        let d1 = curve.derivative_samples(1, m);
        let d2 = curve.derivative_samples(2, m);
        let speed: Vec<f64> = d1.iter().map(|z| z.norm()).collect();
        let length = TAU * fourier::mean(&speed);
        let tangent = d1.iter().zip(&speed).map(|(z, s)| z / s).collect();
        let k = d1
            .iter()
            .zip(&d2)
            .zip(&speed)
            .map(|((a, b), s)| (a.conj() * b).im / (s * s * s))
            .collect();
        Self {
            curve,
            length,
            positions,
            tangent,
            curvature: ScalarField::new(k, length),
        }
    }

    pub fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn winding(&self) -> i32 {
        self.curve.winding()
    }

    pub fn positions(&self) -> &[C64] {
        &self.positions
    }

    pub fn tangent(&self) -> &[C64] {
        &self.tangent
    }

    pub fn normal(&self) -> Vec<C64> {
        self.tangent.iter().map(|t| C64::new(0.0, 1.0) * t).collect()
    }

    pub fn curvature(&self) -> &ScalarField {
        &self.curvature
    }

    /// `k_{s^order}`.
    pub fn curvature_derivative(&self, order: u32) -> ScalarField {
        self.curvature.derivative(order)
    }

    /// `⟨γ, τ⟩`.
    pub fn tangential_projection(&self) -> ScalarField {
        self.project(&self.tangent)
    }

    /// `⟨γ, ν⟩`.
    pub fn normal_projection(&self) -> ScalarField {
        self.project(&self.normal())
    }

    fn project(&self, dirs: &[C64]) -> ScalarField {
        let v = self
            .positions
            .iter()
            .zip(dirs)
            .map(|(g, d)| (g * d.conj()).re)
            .collect();
        ScalarField::new(v, self.length)
    }

    pub fn signed_area(&self) -> f64 {
        -0.5 * self.normal_projection().integral()
    }
}

/// `k_{s^order}` on the arclength grid.
pub fn curvature_field(curve: &ClosedCurve, order: u32) -> Result<ScalarField> {
    check_order(order)?;
    Ok(ArclengthFrame::new(curve)?.curvature_derivative(order))
}

fn check_order(order: u32) -> Result<()> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            min: 0,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricReport {
    pub winding: i32,
    pub length: f64,
    pub signed_area: f64,
    /// `k̄ = 2ωπ/L`.
    pub mean_curvature: f64,
    /// `D = L² − 4ωπA`.
    pub defect: f64,
    /// `K_osc = L ∮ (k − k̄)² ds`.
    pub oscillation: f64,
    /// `L²/(4ωA)`, the ratio as normalized in the convergence literature this
    /// crate follows (a round circle gives π); `None` when `ωA = 0`.
    pub iso_ratio: Option<f64>,
    /// Entry `m` is `‖k_{s^m}‖₂²`.
    pub curvature_norms: Vec<f64>,
    /// The arclength spectrum has a negligible tail.
    pub resolved: bool,
}

impl GeometricReport {
    /// `L²/(4ωπA)`: equals 1 exactly on ω-circles.
    pub fn iso_ratio_normalized(&self) -> Option<f64> {
        self.iso_ratio.map(|i| i / PI)
    }

    /// `‖k_s‖₂²`, if computed.
    pub fn ks_norm_sq(&self) -> Option<f64> {
        self.curvature_norms.get(1).copied()
    }
}

pub fn geometric_report(curve: &ClosedCurve, max_order: u32) -> Result<GeometricReport> {
    check_order(max_order)?;
    let frame = ArclengthFrame::new(curve)?;
    Ok(report_from_frame(&frame, max_order))
}

pub fn report_from_frame(frame: &ArclengthFrame, max_order: u32) -> GeometricReport {
    let w = frame.winding() as f64;
    let length = frame.length();
    let area = frame.signed_area();
    let kbar = TAU * w / length;
    let k = frame.curvature();
    let oscillation = length * k.map(|x| (x - kbar) * (x - kbar)).integral();
    let curvature_norms = (0..=max_order)
        .map(|m| frame.curvature_derivative(m).norm_sq())
        .collect();
    let denom = 4.0 * w * area;
    GeometricReport {
        winding: frame.winding(),
        length,
        signed_area: area,
        mean_curvature: kbar,
        defect: length * length - 4.0 * PI * w * area,
        oscillation,
        iso_ratio: (denom != 0.0).then(|| length * length / denom),
        curvature_norms,
        resolved: frame.curve().is_resolved(),
    }
}

/// Curvature data in the curve's own parameter, on a dealiased grid.
///
/// Derivatives along arclength use `∂_s = |γ_u|⁻¹ ∂_u`, so no
/// reparametrization is involved; integrals use `ds = |γ_u| du`.
#[derive(Clone, Debug)]
pub struct ParamFrame {
    pub speed: Vec<f64>,
    pub positions: Vec<C64>,
    pub tangent: Vec<C64>,
    pub k: Vec<f64>,
    pub length: f64,
    step: f64,
}

impl ParamFrame {
    pub fn new(curve: &ClosedCurve) -> Self {
        let m = fourier::padded_len(curve.n_modes());
        Self::on_grid(curve, m)
    }

    pub fn on_grid(curve: &ClosedCurve, m: usize) -> Self {
        let positions = curve.samples(m);
        let d1 = curve.derivative_samples(1, m);
        let d2 = curve.derivative_samples(2, m);
        let speed: Vec<f64> = d1.iter().map(|z| z.norm()).collect();
        let tangent = d1.iter().zip(&speed).map(|(z, s)| z / s).collect();
        let k = d1
            .iter()
            .zip(&d2)
            .zip(&speed)
            .map(|((a, b), s)| (a.conj() * b).im / (s * s * s))
            .collect();
        let step = TAU / m as f64;
        let length = speed.iter().sum::<f64>() * step;
        Self {
            speed,
            positions,
            tangent,
            k,
            length,
            step,
        }
    }

    /// `∂_s f` for a field sampled on this grid.
    pub fn d_ds(&self, f: &[f64]) -> Vec<f64> {
        fourier::derive_real(f, 1, 1.0)
            .iter()
            .zip(&self.speed)
            .map(|(d, s)| d / s)
            .collect()
    }

    /// `∮ f ds`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.speed).map(|(a, s)| a * s).sum::<f64>() * self.step
    }

    /// `½ ∮ (x dy − y dx)`.
    pub fn signed_area(&self) -> f64 {
        let v: f64 = self
            .positions
            .iter()
            .zip(&self.tangent)
            .zip(&self.speed)
            .map(|((g, t), s)| (g.conj() * t).im * s)
            .sum();
        0.5 * v * self.step
    }

    pub fn normal(&self) -> Vec<C64> {
        self.tangent.iter().map(|t| C64::new(0.0, 1.0) * t).collect()
    }
}
