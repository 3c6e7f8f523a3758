//! Closed immersed plane curves as truncated complex Fourier series.
//!
//! A curve is the map `u ↦ Σ_{|p| ≤ N} ĉ_p e^{ipu}` on `u ∈ [0, 2π)`, with the
//! plane identified with ℂ. The tangent turning number (winding) is derived
//! from the modes on construction and kept alongside them.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, freq, C64};

pub const DEFAULT_MODES: usize = 128;
pub const MIN_MODES: usize = 8;
/// Relative tail size `|ĉ_{±N}| / max |ĉ_p|` below which a curve counts as resolved.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-10;
/// Curves with `min |γ'| < IMMERSION_FLOOR · mean |γ'|` are rejected.
pub const IMMERSION_FLOOR: f64 = 1e-6;

const REPARAM_TOL: f64 = 1e-13;
const REPARAM_MAX_ITERS: usize = 50;
const RANDOM_MAX_ATTEMPTS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedCurve {
    modes: Vec<C64>,
    n_modes: usize,
    winding: i32,
}

impl ClosedCurve {
    /// Builds a curve from `2N + 1` modes ordered `p = -N..=N`, validating the
    /// immersion and deriving the winding number.
    pub fn from_modes(modes: Vec<C64>, n_modes: usize) -> Result<Self> {
        if n_modes < MIN_MODES {
            return Err(Error::InvalidParameter(format!(
                "n_modes = {n_modes} is below the minimum {MIN_MODES}"
            )));
        }
        if modes.len() != 2 * n_modes + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} modes for N = {n_modes}, got {}",
                2 * n_modes + 1,
                modes.len()
            )));
        }
        if modes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mode".into()));
        }
        let winding = turning_number(&modes, n_modes)?;
        Ok(Self {
            modes,
            n_modes,
            winding,
        })
    }

    pub fn modes(&self) -> &[C64] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn winding(&self) -> i32 {
        self.winding
    }

    /// Coefficient of `e^{ipu}`; zero outside the band.
    pub fn mode(&self, p: i64) -> C64 {
        if p.unsigned_abs() as usize > self.n_modes {
            C64::new(0.0, 0.0)
        } else {
            self.modes[(p + self.n_modes as i64) as usize]
        }
    }

    /// Size of the native sampling grid, `2N + 1`.
    pub fn grid_size(&self) -> usize {
        2 * self.n_modes + 1
    }

    /// Positions on an `m`-point grid.
    pub fn samples(&self, m: usize) -> Vec<C64> {
        fourier::synthesize(&self.modes, self.n_modes, m)
    }

    /// `∂_u^order γ` on an `m`-point grid.
    pub fn derivative_samples(&self, order: u32, m: usize) -> Vec<C64> {
        let d = fourier::differentiate(&self.modes, self.n_modes, order, 1.0);
        fourier::synthesize(&d, self.n_modes, m)
    }

    pub fn eval(&self, u: f64) -> C64 {
        fourier::eval_at(&self.modes, self.n_modes, u)
    }

    /// `(min, mean)` of `|∂_u γ|` on a dense grid.
    pub fn speed_stats(&self) -> (f64, f64) {
        speed_stats(&self.modes, self.n_modes)
    }

    /// `|ĉ_{±N}| / max_p |ĉ_p|`, ignoring the translation mode.
    pub fn tail_ratio(&self) -> f64 {
        let n = self.n_modes as i64;
        let max = (0..self.modes.len())
            .filter(|&i| freq(i, self.n_modes) != 0)
            .map(|i| self.modes[i].norm())
            .fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        self.mode(n).norm().max(self.mode(-n).norm()) / max
    }

    pub fn is_resolved(&self) -> bool {
        self.tail_ratio() < DEFAULT_TAIL_THRESHOLD
    }

    pub fn translated(&self, shift: C64) -> Self {
        let mut modes = self.modes.clone();
        modes[self.n_modes] += shift;
        Self {
            modes,
            n_modes: self.n_modes,
            winding: self.winding,
        }
    }

    /// Uniform scaling about the origin; `factor` must be positive.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0, "scale factor must be positive");
        Self {
            modes: self.modes.iter().map(|c| c * factor).collect(),
            n_modes: self.n_modes,
            winding: self.winding,
        }
    }

    /// The same trace run backwards, `u ↦ γ(-u)`.
    pub fn reversed(&self) -> Self {
        let mut modes = self.modes.clone();
        modes.reverse();
        Self {
            modes,
            n_modes: self.n_modes,
            winding: -self.winding,
        }
    }

    /// Re-bands to `n` modes by zero padding or truncation.
    pub fn with_band(&self, n: usize) -> Result<Self> {
        Self::from_modes(fourier::reband(&self.modes, self.n_modes, n), n)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CurveFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CurveFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// On-disk form: `{winding, n_modes, modes: [[re, im], ...]}` with `p = -N..N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveFile {
    pub winding: i32,
    pub n_modes: usize,
    pub modes: Vec<[f64; 2]>,
}

impl From<&ClosedCurve> for CurveFile {
    fn from(c: &ClosedCurve) -> Self {
        Self {
            winding: c.winding,
            n_modes: c.n_modes,
            modes: c.modes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<CurveFile> for ClosedCurve {
    type Error = Error;

    fn try_from(f: CurveFile) -> Result<Self> {
        let modes = f.modes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let curve = ClosedCurve::from_modes(modes, f.n_modes)?;
        if curve.winding != f.winding {
            return Err(Error::Format(format!(
                "declared winding {} but the modes give {}",
                f.winding, curve.winding
            )));
        }
        Ok(curve)
    }
}

/// Grid used for immersion and turning-number checks.
fn dense_len(n: usize) -> usize {
    (8 * n + 1).max(257)
}

fn speed_stats(modes: &[C64], n: usize) -> (f64, f64) {
    let d = fourier::differentiate(modes, n, 1, 1.0);
    let v = fourier::synthesize(&d, n, dense_len(n));
    let speeds: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    let min = speeds.iter().copied().fold(f64::INFINITY, f64::min);
    (min, fourier::mean(&speeds))
}

/// Total turning of `∂_u γ` over one period, divided by 2π.
fn turning_number(modes: &[C64], n: usize) -> Result<i32> {
    let d = fourier::differentiate(modes, n, 1, 1.0);
    let v = fourier::synthesize(&d, n, dense_len(n));
    let speeds: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    let min = speeds.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = fourier::mean(&speeds);
    if !(min > IMMERSION_FLOOR * mean) {
        return Err(Error::NotImmersed {
            min_speed: min,
            mean_speed: mean,
        });
    }
    let m = v.len();
    let total: f64 = (0..m).map(|j| (v[(j + 1) % m] / v[j]).arg()).sum();
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 {
        return Err(Error::Format(format!(
            "turning number {turns} is not an integer; the tangent is under-sampled"
        )));
    }
    Ok(rounded as i32)
}

/// The curve `u ↦ center + radius·e^{i·winding·u}` with `DEFAULT_MODES` modes.
pub fn make_circle(radius: f64, winding: i32, center: C64) -> Result<ClosedCurve> {
    make_circle_with(radius, winding, center, DEFAULT_MODES)
}

pub fn make_circle_with(radius: f64, winding: i32, center: C64, n_modes: usize) -> Result<ClosedCurve> {
    if winding == 0 {
        return Err(Error::ZeroWinding);
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
    }
    if winding.unsigned_abs() as usize > n_modes {
        return Err(Error::InvalidParameter(format!(
            "winding {winding} does not fit in {n_modes} modes"
        )));
    }
    let mut modes = vec![C64::new(0.0, 0.0); 2 * n_modes + 1];
    modes[n_modes] = center;
    modes[(n_modes as i64 + winding as i64) as usize] = C64::new(radius, 0.0);
    ClosedCurve::from_modes(modes, n_modes)
}

/// Seeded perturbation of the unit circle.
///
/// Modes `2 ≤ |p| ≤ max(2, N/8)` and `p = -1` receive
/// `amplitude·|p|^(-decay_rate)·U·e^{iφ}` with `U ~ U[0,1)`, `φ ~ U[0,2π)`.
/// The band stops at N/8 so that the arclength reparametrization still fits
/// in N modes. Draws are rejected until `min|γ'| > 0.1·mean|γ'|` and the
/// winding stays 1.
pub fn random_curve(seed: u64, n_modes: usize, decay_rate: f64, amplitude: f64) -> Result<ClosedCurve> {
    if !(decay_rate > 1.0) {
        return Err(Error::InvalidParameter(format!("decay_rate {decay_rate} must exceed 1")));
    }
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude {amplitude} must be nonnegative")));
    }
    if n_modes < MIN_MODES {
        return Err(Error::InvalidParameter(format!("n_modes {n_modes} below {MIN_MODES}")));
    }
    let band = (n_modes / 8).max(2) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_MAX_ATTEMPTS {
        let mut modes = vec![C64::new(0.0, 0.0); 2 * n_modes + 1];
        modes[n_modes + 1] = C64::new(1.0, 0.0);
        for p in -band..=band {
            if p == 0 || p == 1 {
                continue;
            }
            let bound = amplitude * (p.unsigned_abs() as f64).powf(-decay_rate);
            let mag: f64 = rng.gen::<f64>() * bound;
            let phase: f64 = rng.gen::<f64>() * TAU;
            modes[(p + n_modes as i64) as usize] = C64::from_polar(mag, phase);
        }
        let (min, mean) = speed_stats(&modes, n_modes);
        if min <= 0.1 * mean {
            continue;
        }
        match ClosedCurve::from_modes(modes, n_modes) {
            Ok(c) if c.winding == 1 => return Ok(c),
            _ => continue,
        }
    }
    Err(Error::GenerationFailed {
        attempts: RANDOM_MAX_ATTEMPTS,
    })
}

/// Polar graph `θ ↦ r(θ)e^{iθ}` sampled and projected onto `n_modes` modes.
pub fn polar_curve(n_modes: usize, radius: impl Fn(f64) -> f64) -> Result<ClosedCurve> {
    from_sampler(n_modes, |u| C64::from_polar(radius(u), u))
}

/// Projects an arbitrary smooth periodic map onto `n_modes` modes.
pub fn from_sampler(n_modes: usize, f: impl Fn(f64) -> C64) -> Result<ClosedCurve> {
    let m = 2 * n_modes + 1;
    let samples: Vec<C64> = (0..m).map(|j| f(TAU * j as f64 / m as f64)).collect();
    ClosedCurve::from_modes(fourier::analyze(&samples, n_modes), n_modes)
}

/// Builds the curve with tangent angle `θ(u) = ω u + φ(u)` and constant
/// speed `speed`, starting at the origin. `φ` must be `2π`-periodic and the
/// tangent `e^{iθ}` must have zero mean, otherwise the curve does not close.
pub fn from_turning_angle(
    n_modes: usize,
    winding: i32,
    speed: f64,
    phi: impl Fn(f64) -> f64,
) -> Result<ClosedCurve> {
    let m = 8 * n_modes + 1;
    let tangent: Vec<C64> = (0..m)
        .map(|j| {
            let u = TAU * j as f64 / m as f64;
            C64::from_polar(speed, winding as f64 * u + phi(u))
        })
        .collect();
    let t_hat = fourier::analyze(&tangent, n_modes);
    let drift = t_hat[n_modes].norm();
    if drift > 1e-10 * speed {
        return Err(Error::InvalidParameter(format!(
            "tangent has mean {drift:e}; the curve does not close"
        )));
    }
    let mut modes: Vec<C64> = t_hat
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let p = freq(i, n_modes);
            if p == 0 {
                C64::new(0.0, 0.0)
            } else {
                c / C64::new(0.0, p as f64)
            }
        })
        .collect();
    let start = fourier::eval_at(&modes, n_modes, 0.0);
    modes[n_modes] -= start;
    ClosedCurve::from_modes(modes, n_modes)
}

/// Arclength and signed area by trapezoid quadrature in the curve's own
/// parameter on a dealiased grid.
pub fn length_and_area(curve: &ClosedCurve) -> (f64, f64) {
    let m = fourier::padded_len(curve.n_modes()).max(2 * curve.n_modes() + 1);
    let g = curve.samples(m);
    let gu = curve.derivative_samples(1, m);
    let mut len = 0.0;
    let mut area = 0.0;
    for (z, zu) in g.iter().zip(&gu) {
        len += zu.norm();
        area += (z.conj() * zu).im;
    }
    let h = TAU / m as f64;
    (len * h, 0.5 * area * h)
}

/// Reparametrizes by arclength: the result has constant `|∂_u γ| = L/2π`.
///
/// The cumulative arclength `s(u)` is built from the spectrum of the speed on
/// a fine grid and inverted pointwise by Newton's method; the curve is then
/// resampled at the inverted parameters and projected back onto N modes.
pub fn reparametrize_arclength(curve: &ClosedCurve) -> Result<ClosedCurve> {
    let n = curve.n_modes;
    let fine = 8 * n + 1;
    let speed: Vec<f64> = curve
        .derivative_samples(1, fine)
        .iter()
        .map(|z| z.norm())
        .collect();
    let (smin, smean) = (speed.iter().copied().fold(f64::INFINITY, f64::min), fourier::mean(&speed));
    let smax = speed.iter().copied().fold(0.0, f64::max);
    if smax - smin <= 1e-14 * smean {
        return Ok(curve.clone());
    }
    if !(smin > IMMERSION_FLOOR * smean) {
        return Err(Error::NotImmersed {
            min_speed: smin,
            mean_speed: smean,
        });
    }
    let (mut sp, mut band) = fourier::analyze_full(
        &speed.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
    );
    // Trim the negligible tail to make pointwise evaluation cheaper.
    let floor = 1e-16 * sp[band].norm();
    let keep = (1..=band)
        .rev()
        .find(|&q| sp[band + q].norm() > floor || sp[band - q].norm() > floor)
        .unwrap_or(0);
    sp = fourier::reband(&sp, band, keep);
    band = keep;
    let mean_speed = sp[band].re;
    let length = TAU * mean_speed;
    // s(u) - L u / 2π as a band of modes S_q / (iq).
    let integral: Vec<C64> = sp
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let q = freq(i, band);
            if q == 0 {
                C64::new(0.0, 0.0)
            } else {
                c / C64::new(0.0, q as f64)
            }
        })
        .collect();
    let offset = fourier::eval_at(&integral, band, 0.0).re;
    let arc = |u: f64| mean_speed * u + fourier::eval_at(&integral, band, u).re - offset;
    let m = 2 * n + 1;
    let velocity_modes = fourier::differentiate(&curve.modes, n, 1, 1.0);
    let mut worst = 0.0_f64;
    let mut samples = Vec::with_capacity(m);
    let mut u = 0.0;
    for j in 0..m {
        let target = length * j as f64 / m as f64;
        // s is strictly increasing, so keep a bracket and fall back to bisection.
        let (mut lo, mut hi) = (u, TAU);
        let mut resid = arc(u) - target;
        for _ in 0..REPARAM_MAX_ITERS {
            if resid == 0.0 {
                break;
            }
            if resid > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let ds = fourier::eval_at(&velocity_modes, n, u).norm();
            let mut next = u - resid / ds;
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - u).abs();
            u = next;
            resid = arc(u) - target;
            if step < REPARAM_TOL {
                break;
            }
        }
        worst = worst.max(resid.abs() / length);
        samples.push(fourier::eval_at(&curve.modes, n, u));
    }
    if !(worst < 1e-11) {
        return Err(Error::ReparametrizationFailed { residual: worst });
    }
    let modes = fourier::analyze(&samples, n);
    let out = ClosedCurve::from_modes(modes, n)?;
    if out.winding != curve.winding {
        return Err(Error::ReparametrizationFailed { residual: f64::NAN });
    }
    Ok(out)
}

/// Translates so that `∮ γ ds = 0`.
pub fn translate_to_centroid(curve: &ClosedCurve) -> ClosedCurve {
    curve.translated(-centroid(curve))
}

/// `(1/L) ∮ γ ds`.
pub fn centroid(curve: &ClosedCurve) -> C64 {
    let m = fourier::padded_len(curve.n_modes()).max(2 * curve.n_modes() + 1);
    let g = curve.samples(m);
    let gu = curve.derivative_samples(1, m);
    let mut acc = C64::new(0.0, 0.0);
    let mut len = 0.0;
    for (z, zu) in g.iter().zip(&gu) {
        let w = zu.norm();
        acc += z * w;
        len += w;
    }
    acc / len
}
