//! Time marching: explicit Euler, Du Fort–Frankel and the super-time-stepping
//! Runge–Kutta–Chebyshev (RKC) and Runge–Kutta–Legendre (RKL) cycles.

mod dufort_frankel;
mod euler;
mod sts;
mod system;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

pub use dufort_frankel::dufort_frankel_run;
pub use euler::euler_run;
pub use sts::{amplification_eval, build_schedule, sts_run, StageCoefficients, SuperStepSchedule};
pub use system::{OdeSystem, ScalarDecay};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("solution diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },
    #[error("time step {dt} exceeds the explicit stability limit {dt_exp}")]
    CflViolation { dt: f64, dt_exp: f64 },
    #[error("schedule built for dt_exp = {schedule} but the operator now allows only {current}")]
    StaleSchedule { schedule: f64, current: f64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid run parameters: {0}")]
    InvalidRun(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StsKind {
    Rkc,
    Rkl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    #[serde(rename = "dufort-frankel", alias = "df")]
    DufortFrankel,
    Rkc,
    Rkl,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Euler, Scheme::DufortFrankel, Scheme::Rkc, Scheme::Rkl];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::DufortFrankel => "dufort-frankel",
            Scheme::Rkc => "rkc",
            Scheme::Rkl => "rkl",
        }
    }

    pub fn sts_kind(self) -> Option<StsKind> {
        match self {
            Scheme::Rkc => Some(StsKind::Rkc),
            Scheme::Rkl => Some(StsKind::Rkl),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Scheme::Euler),
            "df" | "dufort-frankel" | "dufort_frankel" => Ok(Scheme::DufortFrankel),
            "rkc" => Ok(Scheme::Rkc),
            "rkl" => Ok(Scheme::Rkl),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

impl From<StsKind> for Scheme {
    fn from(k: StsKind) -> Self {
        match k {
            StsKind::Rkc => Scheme::Rkc,
            StsKind::Rkl => Scheme::Rkl,
        }
    }
}

/// What an STS run does when the refreshed spectral bound no longer
/// supports the schedule's `dt_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefreshPolicy {
    /// Rebuild the schedule against the inflated refreshed bound.
    #[default]
    Rebuild,
    /// Abort with [`IntegrationError::StaleSchedule`].
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Proceed (with a flag in the report) when the step exceeds the explicit limit.
    pub allow_unstable: bool,
    pub refresh: RefreshPolicy,
    /// Safety factor applied to a refreshed `lambda_max` when rebuilding.
    pub inflation: f64,
    /// Any state component beyond this magnitude counts as divergence.
    pub divergence_bound: f64,
    /// Store every `sample_every`-th outer node in the report trajectory (0 = none).
    pub sample_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            allow_unstable: false,
            refresh: RefreshPolicy::Rebuild,
            inflation: 1.1,
            divergence_bound: 1e6,
            sample_every: 0,
        }
    }
}

/// Bookkeeping of one time-marching run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scheme: Scheme,
    /// Outer step: Δt for Euler and Du Fort–Frankel, the super-step for STS
    /// (the last one in use when the schedule was rebuilt).
    pub dt: f64,
    /// Inner stages per outer step (1 for Euler and Du Fort–Frankel).
    pub stages: usize,
    /// Outer steps taken.
    pub steps: usize,
    /// Outer temporal nodes, initial state included.
    pub n_t: usize,
    pub rhs_evals: u64,
    /// Wall-clock seconds spent marching, observer callbacks excluded.
    pub cpu_time: f64,
    pub final_time: f64,
    pub final_y: Vec<f64>,
    /// Sampled `(t, y)` pairs, see [`RunOptions::sample_every`].
    #[serde(skip)]
    pub trajectory: Vec<(f64, Vec<f64>)>,
    /// Coefficient evaluations outside the admissible box.
    pub flagged_evaluations: u64,
    /// True when the step was allowed past the explicit stability limit.
    pub unstable_allowed: bool,
    /// STS schedule rebuilds triggered by spectral refreshes.
    pub rebuilds: usize,
}

/// Callback invoked with every outer node `(t, y)`, the initial one included.
pub type Observer<'a> = &'a mut dyn FnMut(f64, &[f64]);

/// Number of outer steps of size `dt` needed to cover `tau`, the last one
/// possibly shortened.
pub fn planned_steps(tau: f64, dt: f64) -> usize {
    if tau <= 0.0 {
        return 0;
    }
    ((tau / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Shared run bookkeeping: timing, observer calls, divergence checks.
struct Marcher<'a, 'o> {
    observer: Option<Observer<'o>>,
    options: &'a RunOptions,
    observer_time: Duration,
    start: Instant,
    trajectory: Vec<(f64, Vec<f64>)>,
    evals0: u64,
    flags0: u64,
}

impl<'a, 'o> Marcher<'a, 'o> {
    fn new<S: OdeSystem + ?Sized>(
        sys: &S,
        options: &'a RunOptions,
        observer: Option<Observer<'o>>,
    ) -> Self {
        Self {
            observer,
            options,
            observer_time: Duration::ZERO,
            start: Instant::now(),
            trajectory: Vec::new(),
            evals0: sys.rhs_evals(),
            flags0: sys.flagged_evaluations(),
        }
    }

    /// Records outer node `index` (0 = initial state).
    fn node(&mut self, index: usize, t: f64, y: &[f64]) -> Result<(), IntegrationError> {
        if index > 0 && y.iter().any(|x| !x.is_finite() || x.abs() > self.options.divergence_bound) {
            return Err(IntegrationError::Divergence { step: index, time: t });
        }
        let every = self.options.sample_every;
        if self.observer.is_some() || every > 0 {
            let t0 = Instant::now();
            if let Some(obs) = self.observer.as_mut() {
                obs(t, y);
            }
            if every > 0 && index.is_multiple_of(every) {
                self.trajectory.push((t, y.to_vec()));
            }
            self.observer_time += t0.elapsed();
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn finish<S: OdeSystem + ?Sized>(
        self,
        sys: &S,
        scheme: Scheme,
        dt: f64,
        stages: usize,
        steps: usize,
        t: f64,
        y: Vec<f64>,
    ) -> RunReport {
        let cpu = self.start.elapsed().saturating_sub(self.observer_time);
        RunReport {
            scheme,
            dt,
            stages,
            steps,
            n_t: steps + 1,
            rhs_evals: sys.rhs_evals() - self.evals0,
            cpu_time: cpu.as_secs_f64(),
            final_time: t,
            final_y: y,
            trajectory: self.trajectory,
            flagged_evaluations: sys.flagged_evaluations() - self.flags0,
            unstable_allowed: false,
            rebuilds: 0,
        }
    }
}

fn check_run(y0: &[f64], dim: usize, dt: f64, tau: f64) -> Result<(), IntegrationError> {
    if y0.len() != dim {
        return Err(IntegrationError::InvalidRun(format!(
            "state has {} components, system has {dim}",
            y0.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(IntegrationError::InvalidRun(format!("time step must be positive, got {dt}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(IntegrationError::InvalidRun(format!("horizon must be non-negative, got {tau}")));
    }
    Ok(())
}

/// Scheme choice with its step parameters, for callers dispatching at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeSpec {
    Euler { dt: f64 },
    DufortFrankel { dt: f64 },
    Sts(SuperStepSchedule),
}

impl SchemeSpec {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeSpec::Euler { .. } => Scheme::Euler,
            SchemeSpec::DufortFrankel { .. } => Scheme::DufortFrankel,
            SchemeSpec::Sts(s) => s.kind.into(),
        }
    }

    pub fn outer_step(&self) -> f64 {
        match self {
            SchemeSpec::Euler { dt } | SchemeSpec::DufortFrankel { dt } => *dt,
            SchemeSpec::Sts(s) => s.dt_super,
        }
    }
}

/// Marches `y0` from `t0` over `tau` with the given scheme.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    spec: &SchemeSpec,
    y0: &[f64],
    t0: f64,
    tau: f64,
    options: &RunOptions,
    observer: Option<Observer<'_>>,
) -> Result<RunReport, IntegrationError> {
    match spec {
        SchemeSpec::Euler { dt } => euler_run(sys, y0, t0, *dt, tau, options, observer),
        SchemeSpec::DufortFrankel { dt } => dufort_frankel_run(sys, y0, t0, *dt, tau, options, observer),
        SchemeSpec::Sts(schedule) => sts_run(sys, y0, t0, schedule, tau, options, observer),
    }
}
