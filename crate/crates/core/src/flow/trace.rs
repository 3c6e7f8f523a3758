use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DecayRates, FlowConfig};
use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::geometry::ParamFrame;
use crate::io::{fmt_f64, read_json, write_csv, write_json};

pub const TRACE_COLUMNS: [&str; 9] = [
    "t",
    "dt",
    "L",
    "A",
    "D",
    "K_osc",
    "ks_norm2_sq",
    "min_k",
    "max_abs_k",
];

/// Geometric snapshot of a flow at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    /// Size of the step that produced this row (0 for the initial row).
    pub dt: f64,
    pub length: f64,
    pub area: f64,
    pub defect: f64,
    pub oscillation: f64,
    pub ks_norm2_sq: f64,
    pub min_k: f64,
    pub max_abs_k: f64,
}

impl TraceRow {
    /// Measures a curve in its own parameter; no reparametrization.
    pub fn measure(curve: &ClosedCurve, t: f64, dt: f64) -> Self {
        let frame = ParamFrame::new(curve);
        let w = curve.winding() as f64;
        let l = frame.length;
        let a = frame.signed_area();
        let kbar = TAU * w / l;
        let dev: Vec<f64> = frame.k.iter().map(|k| (k - kbar).powi(2)).collect();
        let ks = frame.d_ds(&frame.k);
        let ks2: Vec<f64> = ks.iter().map(|x| x * x).collect();
        Self {
            t,
            dt,
            length: l,
            area: a,
            defect: l * l - 2.0 * TAU * w * a,
            oscillation: l * frame.integrate(&dev),
            ks_norm2_sq: frame.integrate(&ks2),
            min_k: frame.k.iter().copied().fold(f64::INFINITY, f64::min),
            max_abs_k: frame.k.iter().fold(0.0, |m: f64, k| m.max(k.abs())),
        }
    }

    /// `‖k‖₂² = K_osc/L + (2ωπ)²/L`.
    pub fn k_norm2_sq(&self, winding: i32) -> f64 {
        (self.oscillation + (TAU * winding as f64).powi(2)) / self.length
    }

    fn to_record(self) -> Vec<String> {
        [
            self.t,
            self.dt,
            self.length,
            self.area,
            self.defect,
            self.oscillation,
            self.ks_norm2_sq,
            self.min_k,
            self.max_abs_k,
        ]
        .iter()
        .map(|&x| fmt_f64(x))
        .collect()
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self> {
        if rec.len() != TRACE_COLUMNS.len() {
            return Err(Error::Format(format!(
                "trace row has {} fields, expected {}",
                rec.len(),
                TRACE_COLUMNS.len()
            )));
        }
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s:?}: {e}"))))
            .collect::<Result<_>>()?;
        Ok(Self {
            t: v[0],
            dt: v[1],
            length: v[2],
            area: v[3],
            defect: v[4],
            oscillation: v[5],
            ks_norm2_sq: v[6],
            min_k: v[7],
            max_abs_k: v[8],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    ReachedTEnd,
    /// Curvature exceeded the blow-up threshold. `t_est` extrapolates the
    /// singular time from `max|k|⁻⁴` being linear in `t`; `exponent` is the
    /// fitted power in `max|k| ~ (T − t)^exponent`.
    Singularity { t_est: f64, exponent: f64 },
    StepFailure { t: f64, reason: String },
}

/// Metadata written next to the trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub config: FlowConfig,
    pub winding: i32,
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub kbar0: f64,
    pub termination: Termination,
    #[serde(rename = "T_est", skip_serializing_if = "Option::is_none", default)]
    pub t_est: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decay_slopes: Option<DecayRates>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrace {
    pub config: FlowConfig,
    pub winding: i32,
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl FlowTrace {
    pub fn l0(&self) -> f64 {
        self.rows[0].length
    }

    pub fn a0(&self) -> f64 {
        self.rows[0].area
    }

    /// `k̄₀ = 2ωπ/L₀`.
    pub fn kbar0(&self) -> f64 {
        TAU * self.winding as f64 / self.l0()
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has an initial row")
    }

    pub fn t_est(&self) -> Option<f64> {
        match self.termination {
            Termination::Singularity { t_est, .. } => Some(t_est),
            _ => None,
        }
    }

    pub fn meta(&self) -> RunMeta {
        RunMeta {
            config: self.config.clone(),
            winding: self.winding,
            l0: self.l0(),
            a0: self.a0(),
            kbar0: self.kbar0(),
            termination: self.termination.clone(),
            t_est: self.t_est(),
            accepted_steps: self.accepted_steps,
            rejected_steps: self.rejected_steps,
            decay_slopes: None,
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<Vec<String>> = self.rows.iter().map(|r| r.to_record()).collect();
        write_csv(path, &TRACE_COLUMNS, &rows)
    }

    /// Writes `trace.csv` and `run.json` into `dir`.
    pub fn write_dir(&self, dir: &Path, meta: &RunMeta) -> Result<()> {
        self.write_csv(&dir.join("trace.csv"))?;
        write_json(&dir.join("run.json"), meta)
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let meta: RunMeta = read_json(&dir.join("run.json"))?;
        let rows = read_trace_csv(&dir.join("trace.csv"))?;
        if rows.is_empty() {
            return Err(Error::Format("trace has no rows".into()));
        }
        Ok(Self {
            config: meta.config,
            winding: meta.winding,
            rows,
            termination: meta.termination,
            accepted_steps: meta.accepted_steps,
            rejected_steps: meta.rejected_steps,
        })
    }
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != TRACE_COLUMNS {
        return Err(Error::Format(format!(
            "trace header {names:?} does not match {TRACE_COLUMNS:?}"
        )));
    }
    r.records().map(|rec| TraceRow::from_record(&rec?)).collect()
}
