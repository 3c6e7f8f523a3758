use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{FlowTrace, TraceRow};
use crate::error::{Error, Result};

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Second-order derivative at the middle of three unevenly spaced samples.
fn three_point(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    /// Rows the check was evaluated on.
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl AuditCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(AuditCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The failing check whose first violation comes earliest in the trace.
    pub fn first_failure(&self) -> Option<&AuditCheck> {
        self.checks
            .iter()
            .filter(|c| !c.passed())
            .min_by_key(|c| c.violations[0].row)
    }
}

/// Relative tolerance for the rate identities; tighter when every step is
/// recorded.
fn rate_tolerance(trace: &FlowTrace) -> f64 {
    if trace.config.audit_every == 1 {
        0.01
    } else {
        0.05
    }
}

/// Where a finite-difference rate can be trusted: `‖k_s‖₂²` is not tiny and
/// the change of `L` over a step dominates rounding in `L`.
fn well_conditioned(rows: &[TraceRow], i: usize) -> bool {
    let r = &rows[i];
    let h = (r.t - rows[i - 1].t).min(rows[i + 1].t - r.t);
    r.ks_norm2_sq > 1e-6 && r.ks_norm2_sq * h > 1e-10 * r.length
}

fn rate_check(
    name: &str,
    rows: &[TraceRow],
    tol: f64,
    field: impl Fn(&TraceRow) -> f64,
    expected: impl Fn(&TraceRow) -> f64,
) -> AuditCheck {
    let mut checked = 0;
    let mut violations = Vec::new();
    for i in 1..rows.len().saturating_sub(1) {
        if !well_conditioned(rows, i) {
            continue;
        }
        checked += 1;
        let t = [rows[i - 1].t, rows[i].t, rows[i + 1].t];
        let f = [field(&rows[i - 1]), field(&rows[i]), field(&rows[i + 1])];
        let fd = three_point(t, f);
        let want = expected(&rows[i]);
        if (fd - want).abs() > tol * want.abs() {
            violations.push(Violation {
                row: i,
                t: rows[i].t,
                value: fd,
                bound: want,
            });
        }
    }
    AuditCheck {
        name: name.into(),
        checked,
        violations,
    }
}

fn pointwise_check(
    name: &str,
    rows: &[TraceRow],
    from: usize,
    test: impl Fn(usize) -> Option<(f64, f64)>,
) -> AuditCheck {
    let mut violations = Vec::new();
    for i in from..rows.len() {
        if let Some((value, bound)) = test(i) {
            violations.push(Violation {
                row: i,
                t: rows[i].t,
                value,
                bound,
            });
        }
    }
    AuditCheck {
        name: name.into(),
        checked: rows.len() - from,
        violations,
    }
}

/// Audits a trace against the identities and monotonicity properties of the
/// flow:
///
/// - `length_rate`: `dL/dt = −‖k_s‖₂²` (finite differences, 5% or 1%)
/// - `area`: `|A − A₀| < 10⁻⁶ |A₀|` (area scale `L₀²/4π` if `A₀ = 0`)
/// - `defect_monotone`: `D` nonincreasing up to `10⁻⁹`
/// - `defect_rate`: `dD/dt = −2L‖k_s‖₂²`
/// - `isoperimetric`: `L² ≥ 4πA₀ (1 − 10⁻⁶)`
/// - `length_monotone`: `L` nonincreasing up to `10⁻⁹`
/// - `inverse_ratio`: `4ωπA/L²` nondecreasing up to `10⁻⁹` (`ω ≠ 0`)
pub fn audit(trace: &FlowTrace, l0: f64, a0: f64) -> Result<AuditReport> {
    let rows = &trace.rows;
    if rows.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "audit needs at least 3 rows, trace has {}",
            rows.len()
        )));
    }
    let tol = rate_tolerance(trace);
    let w = trace.winding as f64;
    let area_scale = if a0.abs() > 1e-12 * l0 * l0 {
        a0.abs()
    } else {
        l0 * l0 / (4.0 * PI)
    };
    let mut checks = vec![
        rate_check("length_rate", rows, tol, |r| r.length, |r| -r.ks_norm2_sq),
        pointwise_check("area", rows, 0, |i| {
            let dev = (rows[i].area - a0).abs() / area_scale;
            (dev >= 1e-6).then_some((dev, 1e-6))
        }),
        pointwise_check("defect_monotone", rows, 1, |i| {
            let (d, prev) = (rows[i].defect, rows[i - 1].defect);
            (d > prev + 1e-9).then_some((d, prev))
        }),
        rate_check("defect_rate", rows, tol, |r| r.defect, |r| -2.0 * r.length * r.ks_norm2_sq),
        pointwise_check("isoperimetric", rows, 0, |i| {
            let l2 = rows[i].length.powi(2);
            let bound = 4.0 * PI * a0 * (1.0 - 1e-6);
            (l2 < bound).then_some((l2, bound))
        }),
        pointwise_check("length_monotone", rows, 1, |i| {
            let (l, prev) = (rows[i].length, rows[i - 1].length);
            (l > prev + 1e-9).then_some((l, prev))
        }),
    ];
    if trace.winding != 0 {
        let inv = |r: &TraceRow| 4.0 * w * PI * r.area / (r.length * r.length);
        checks.push(pointwise_check("inverse_ratio", rows, 1, |i| {
            let (x, prev) = (inv(&rows[i]), inv(&rows[i - 1]));
            (x < prev - 1e-9).then_some((x, prev))
        }));
    }
    Ok(AuditReport { checks })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRates {
    pub window: (f64, f64),
    pub samples: usize,
    pub kbar0: f64,
    pub slope_d: f64,
    pub slope_ko: f64,
    pub slope_ks: f64,
    /// `−4k̄₀⁴`
    pub bound_d: f64,
    /// `−2k̄₀⁴`
    pub bound_ko: f64,
    /// `−k̄₀⁴`
    pub bound_ks: f64,
    /// Fitted `exp(intercept)` of each series.
    pub prefactor_d: f64,
    pub prefactor_ko: f64,
    pub prefactor_ks: f64,
}

impl DecayRates {
    /// Each slope decays at least as fast as 90% of its bound.
    pub fn meets_d(&self) -> bool {
        self.slope_d <= 0.9 * self.bound_d
    }

    pub fn meets_ko(&self) -> bool {
        self.slope_ko <= 0.9 * self.bound_ko
    }

    pub fn meets_ks(&self) -> bool {
        self.slope_ks <= 0.9 * self.bound_ks
    }

    pub fn meets_all(&self) -> bool {
        self.meets_d() && self.meets_ko() && self.meets_ks()
    }
}

/// Least-squares slopes of `log D`, `log K_osc` and `log ‖k_s‖₂²` over the
/// trace rows with `t` in `window`.
pub fn decay_rates(trace: &FlowTrace, window: (f64, f64)) -> Result<DecayRates> {
    let (a, b) = window;
    let bad = |reason: String| Error::BadWindow {
        start: a,
        end: b,
        reason,
    };
    if !(a < b) {
        return Err(bad("no extent".into()));
    }
    let rows: Vec<&TraceRow> = trace.rows.iter().filter(|r| r.t >= a && r.t <= b).collect();
    if rows.len() < 3 {
        return Err(bad(format!("only {} samples, need at least 3", rows.len())));
    }
    let fit = |name: &str, f: &dyn Fn(&TraceRow) -> f64| -> Result<(f64, f64)> {
        let mut ts = Vec::with_capacity(rows.len());
        let mut ys = Vec::with_capacity(rows.len());
        for r in &rows {
            let v = f(r);
            if !(v > 0.0) {
                return Err(bad(format!("nonpositive {name} = {v:e} at t = {}", r.t)));
            }
            ts.push(r.t);
            ys.push(v.ln());
        }
        let (c, s) = linear_fit(&ts, &ys);
        Ok((s, c.exp()))
    };
    let (slope_d, prefactor_d) = fit("D", &|r| r.defect)?;
    let (slope_ko, prefactor_ko) = fit("K_osc", &|r| r.oscillation)?;
    let (slope_ks, prefactor_ks) = fit("ks_norm2_sq", &|r| r.ks_norm2_sq)?;
    let kbar0 = trace.kbar0();
    let k4 = kbar0.powi(4);
    Ok(DecayRates {
        window,
        samples: rows.len(),
        kbar0,
        slope_d,
        slope_ko,
        slope_ks,
        bound_d: -4.0 * k4,
        bound_ko: -2.0 * k4,
        bound_ks: -k4,
        prefactor_d,
        prefactor_ko,
        prefactor_ks,
    })
}

/// First recorded time after which `min k > 0` on every later row.
pub fn convexity_waiting_time(trace: &FlowTrace) -> Option<f64> {
    let rows = &trace.rows;
    let first_convex = rows.iter().rposition(|r| r.min_k <= 0.0).map_or(0, |i| i + 1);
    rows.get(first_convex).map(|r| r.t)
}
