//! Trigonometric-polynomial plumbing on uniform periodic grids.
//!
//! A band of modes is stored as a dense vector of length `2n + 1` indexed by
//! `p + n` for `p ∈ [-n, n]`. Samples live on the grid `u_j = 2πj/m`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub type C64 = Complex64;

thread_local! {
    static PLANNER: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((len, forward))
            .or_insert_with(|| {
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

/// Signed frequency of dense index `i` in a band of half-width `n`.
#[inline]
pub fn freq(i: usize, n: usize) -> i64 {
    i as i64 - n as i64
}

/// Evaluates the band on an `m`-point grid (`m ≥ 2n + 1`).
pub fn synthesize(modes: &[C64], n: usize, m: usize) -> Vec<C64> {
    debug_assert_eq!(modes.len(), 2 * n + 1);
    assert!(m > 2 * n, "grid of {m} points cannot hold band {n}");
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (i, &c) in modes.iter().enumerate() {
        let p = freq(i, n);
        buf[p.rem_euclid(m as i64) as usize] = c;
    }
    plan(m, false).process(&mut buf);
    buf
}

/// Projects grid samples onto the band `[-n, n]`, dropping everything above.
pub fn analyze(samples: &[C64], n: usize) -> Vec<C64> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    plan(m, true).process(&mut buf);
    let scale = 1.0 / m as f64;
    let half = (m - 1) / 2;
    (0..=2 * n)
        .map(|i| {
            let p = freq(i, n);
            if p.unsigned_abs() as usize > half {
                C64::new(0.0, 0.0)
            } else {
                buf[p.rem_euclid(m as i64) as usize] * scale
            }
        })
        .collect()
}

pub fn analyze_real(samples: &[f64], n: usize) -> Vec<C64> {
    let c: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
    analyze(&c, n)
}

/// Full spectrum of a grid function (band `(m-1)/2` for odd `m`).
pub fn analyze_full(samples: &[C64]) -> (Vec<C64>, usize) {
    let n = (samples.len() - 1) / 2;
    (analyze(samples, n), n)
}

/// Multiplies mode `p` by `(i p scale)^order`.
pub fn differentiate(modes: &[C64], n: usize, order: u32, scale: f64) -> Vec<C64> {
    if order == 0 {
        return modes.to_vec();
    }
    modes
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let k = C64::new(0.0, freq(i, n) as f64 * scale);
            c * k.powu(order)
        })
        .collect()
}

/// Spectral derivative of a real periodic field sampled on an odd grid.
pub fn derive_real(samples: &[f64], order: u32, scale: f64) -> Vec<f64> {
    let n = (samples.len() - 1) / 2;
    let modes = analyze_real(samples, n);
    let d = differentiate(&modes, n, order, scale);
    synthesize(&d, n, samples.len()).iter().map(|z| z.re).collect()
}

/// [`derive_real`] after zeroing modes below `floor · max |ĉ|`, which keeps
/// rounding noise from being amplified by high derivatives.
pub fn derive_real_filtered(samples: &[f64], order: u32, scale: f64, floor: f64) -> Vec<f64> {
    let n = (samples.len() - 1) / 2;
    let mut modes = analyze_real(samples, n);
    let cut = floor * modes.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for c in modes.iter_mut() {
        if c.norm() <= cut {
            *c = C64::new(0.0, 0.0);
        }
    }
    let d = differentiate(&modes, n, order, scale);
    synthesize(&d, n, samples.len()).iter().map(|z| z.re).collect()
}

pub fn derive_complex(samples: &[C64], order: u32, scale: f64) -> Vec<C64> {
    let (modes, n) = analyze_full(samples);
    let d = differentiate(&modes, n, order, scale);
    synthesize(&d, n, samples.len())
}

/// Evaluates `Σ c_p e^{ipu}` at an arbitrary `u` by splitting into two
/// Horner recurrences in `z = e^{iu}` and `z̄`.
pub fn eval_at(modes: &[C64], n: usize, u: f64) -> C64 {
    let z = C64::from_polar(1.0, u);
    let zc = z.conj();
    let mut pos = C64::new(0.0, 0.0);
    for p in (1..=n).rev() {
        pos = (pos + modes[n + p]) * z;
    }
    let mut neg = C64::new(0.0, 0.0);
    for p in (1..=n).rev() {
        neg = (neg + modes[n - p]) * zc;
    }
    modes[n] + pos + neg
}

/// Re-bands a mode vector from half-width `from` to half-width `to`,
/// zero-padding or truncating as needed.
pub fn reband(modes: &[C64], from: usize, to: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); 2 * to + 1];
    let keep = from.min(to);
    for p in -(keep as i64)..=(keep as i64) {
        out[(p + to as i64) as usize] = modes[(p + from as i64) as usize];
    }
    out
}

/// Smallest odd grid size that dealiases quadratic products of band `n`
/// (the 3/2 rule).
pub fn padded_len(n: usize) -> usize {
    2 * ((3 * n + 1) / 2) + 1
}

/// Trapezoid mean of a periodic grid function.
#[inline]
pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}
