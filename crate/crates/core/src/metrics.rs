//! Error norms, significant correct digits, cost ratios and drying
//! post-processing.

use std::io::Write;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::integrators::{RunReport, Scheme};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("fields differ in length: {0} vs {1}")]
    Mismatch(usize, usize),
    #[error("reference field is identically zero")]
    ZeroReference,
    #[error("Euler reference has no steps or no timing")]
    ZeroEuler,
    #[error("empty domain")]
    EmptyDomain,
    #[error("need at least two samples")]
    TooFewSamples,
    #[error("sample times must be strictly increasing (index {0})")]
    NonIncreasingTime(usize),
}

/// Largest value reported for `scd` (exact agreement).
pub const SCD_CAP: f64 = 16.0;

/// `(ε₂, ε_∞)` between two nodal fields: `ε₂ = sqrt(Δx·Σ e_j²)`, `ε_∞ = max |e_j|`.
pub fn error_norms(num: &[f64], reference: &[f64], spacing: f64) -> Result<(f64, f64), MetricsError> {
    if num.len() != reference.len() {
        return Err(MetricsError::Mismatch(num.len(), reference.len()));
    }
    let (sq, max) = num.iter().zip(reference).fold((0.0, 0.0f64), |(s, m), (a, b)| {
        let e = (a - b).abs();
        (s + e * e, m.max(e))
    });
    Ok(((spacing * sq).sqrt(), max))
}

/// Significant correct digits from a uniform error and the reference magnitude,
/// `−log₁₀(ε_∞ / ‖ref‖_∞)`, capped at [`SCD_CAP`].
pub fn scd_from(eps_inf: f64, ref_norm: f64) -> Result<f64, MetricsError> {
    if !(ref_norm > 0.0) {
        return Err(MetricsError::ZeroReference);
    }
    if eps_inf <= 0.0 {
        return Ok(SCD_CAP);
    }
    Ok((-(eps_inf / ref_norm).log10()).min(SCD_CAP))
}

/// Significant correct digits of `num` against `reference`.
pub fn scd(num: &[f64], reference: &[f64]) -> Result<f64, MetricsError> {
    let (_, eps) = error_norms(num, reference, 1.0)?;
    let norm = reference.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    scd_from(eps, norm)
}

/// Accumulates errors of a run against a reference over many time nodes:
/// `ε_∞` is the max over all nodes and positions, `ε₂` the max over nodes of
/// the spatial norm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorAccumulator {
    pub eps2: f64,
    pub eps_inf: f64,
    pub ref_norm: f64,
}

impl ErrorAccumulator {
    pub fn add(&mut self, num: &[f64], reference: &[f64], spacing: f64) -> Result<(), MetricsError> {
        let (e2, ei) = error_norms(num, reference, spacing)?;
        self.eps2 = self.eps2.max(e2);
        self.eps_inf = self.eps_inf.max(ei);
        self.ref_norm = reference.iter().fold(self.ref_norm, |m, x| m.max(x.abs()));
        Ok(())
    }

    pub fn scd(&self) -> Result<f64, MetricsError> {
        scd_from(self.eps_inf, self.ref_norm)
    }
}

/// One row of a scheme-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub scheme: String,
    pub dt: f64,
    pub n_t: usize,
    pub rho_ndt_pct: f64,
    pub eps2_u: f64,
    pub eps2_v: f64,
    pub epsinf_u: f64,
    pub epsinf_v: f64,
    pub scd_u: f64,
    pub scd_v: f64,
    pub cpu_s: f64,
    pub rho_cpu_pct: f64,
    pub rho_cpu_day_s: f64,
    /// Failure message for schemes that did not complete; numeric fields are NaN.
    pub failure: Option<String>,
}

pub const COMPARISON_HEADER: [&str; 13] = [
    "scheme",
    "dt",
    "N_t",
    "rho_Ndt_pct",
    "eps2_u",
    "eps2_v",
    "epsinf_u",
    "epsinf_v",
    "scd_u",
    "scd_v",
    "cpu_s",
    "rho_cpu_pct",
    "rho_cpu_day_s",
];

/// Errors of one run, per field.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldErrors {
    pub u: ErrorAccumulator,
    pub v: ErrorAccumulator,
}

/// Cost ratios of `run` relative to `euler` plus its errors.
///
/// `ρ_NΔt` compares outer step counts, `ρ_CPU` marching times, and
/// `ρ_CPU_day` is seconds of marching per simulated day.
pub fn ratios(
    run: &RunReport,
    euler: &RunReport,
    tau_days: f64,
    errors: &FieldErrors,
) -> Result<ComparisonRecord, MetricsError> {
    if euler.steps == 0 {
        return Err(MetricsError::ZeroEuler);
    }
    let rho_cpu = if euler.cpu_time > 0.0 { 100.0 * run.cpu_time / euler.cpu_time } else { f64::NAN };
    Ok(ComparisonRecord {
        scheme: run.scheme.name().to_string(),
        dt: run.dt,
        n_t: run.n_t,
        rho_ndt_pct: 100.0 * run.steps as f64 / euler.steps as f64,
        eps2_u: errors.u.eps2,
        eps2_v: errors.v.eps2,
        epsinf_u: errors.u.eps_inf,
        epsinf_v: errors.v.eps_inf,
        scd_u: errors.u.scd().unwrap_or(f64::NAN),
        scd_v: errors.v.scd().unwrap_or(f64::NAN),
        cpu_s: run.cpu_time,
        rho_cpu_pct: rho_cpu,
        rho_cpu_day_s: if tau_days > 0.0 { run.cpu_time / tau_days } else { f64::NAN },
        failure: None,
    })
}

impl ComparisonRecord {
    /// Row for a scheme that failed to complete.
    pub fn failed(scheme: Scheme, dt: f64, message: impl Into<String>) -> Self {
        Self {
            scheme: scheme.name().to_string(),
            dt,
            n_t: 0,
            rho_ndt_pct: f64::NAN,
            eps2_u: f64::NAN,
            eps2_v: f64::NAN,
            epsinf_u: f64::NAN,
            epsinf_v: f64::NAN,
            scd_u: f64::NAN,
            scd_v: f64::NAN,
            cpu_s: f64::NAN,
            rho_cpu_pct: f64::NAN,
            rho_cpu_day_s: f64::NAN,
            failure: Some(message.into()),
        }
    }

    fn fields(&self) -> [String; 13] {
        let f = |x: f64| format!("{x:e}");
        [
            self.scheme.clone(),
            f(self.dt),
            self.n_t.to_string(),
            f(self.rho_ndt_pct),
            f(self.eps2_u),
            f(self.eps2_v),
            f(self.epsinf_u),
            f(self.epsinf_v),
            f(self.scd_u),
            f(self.scd_v),
            f(self.cpu_s),
            f(self.rho_cpu_pct),
            f(self.rho_cpu_day_s),
        ]
    }
}

/// Writes records as CSV in the fixed column order of [`COMPARISON_HEADER`].
pub fn write_comparison_csv<W: Write>(records: &[ComparisonRecord], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(COMPARISON_HEADER)?;
    for r in records {
        wr.write_record(r.fields())?;
    }
    wr.flush()?;
    Ok(())
}

/// Trapezoidal integral of `theta` over the nodes in `domain`.
pub fn total_moisture(theta: &[f64], spacing: f64, domain: Range<usize>) -> Result<f64, MetricsError> {
    if domain.is_empty() || domain.end > theta.len() {
        return Err(MetricsError::EmptyDomain);
    }
    let vals = &theta[domain];
    if vals.len() == 1 {
        return Ok(0.0);
    }
    let inner: f64 = vals[1..vals.len() - 1].iter().sum();
    Ok(spacing * (inner + 0.5 * (vals[0] + vals[vals.len() - 1])))
}

/// Time derivative of a sampled series: three-point differences on the
/// (possibly non-uniform) samples, second-order one-sided at the ends.
pub fn drying_rate(series: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, MetricsError> {
    let n = series.len();
    if n < 2 {
        return Err(MetricsError::TooFewSamples);
    }
    for i in 1..n {
        if !(series[i].0 > series[i - 1].0) {
            return Err(MetricsError::NonIncreasingTime(i));
        }
    }
    if n == 2 {
        let d = (series[1].1 - series[0].1) / (series[1].0 - series[0].0);
        return Ok(vec![(series[0].0, d), (series[1].0, d)]);
    }
    // derivative at x0 of the quadratic through (x0,y0), (x1,y1), (x2,y2)
    let quad = |at: usize, p: [usize; 3]| {
        let x = p.map(|i| series[i].0);
        let y = p.map(|i| series[i].1);
        let t = series[at].0;
        (0..3)
            .map(|i| {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                y[i] * ((t - x[j]) + (t - x[k])) / ((x[i] - x[j]) * (x[i] - x[k]))
            })
            .sum::<f64>()
    };
    Ok((0..n)
        .map(|i| {
            let p = if i == 0 {
                [0, 1, 2]
            } else if i == n - 1 {
                [n - 3, n - 2, n - 1]
            } else {
                [i - 1, i, i + 1]
            };
            (series[i].0, quad(i, p))
        })
        .collect())
}
