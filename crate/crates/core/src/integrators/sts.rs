use std::f64::consts::PI;

use serde::Serialize;

use super::{
    check_run, planned_steps, IntegrationError, Marcher, Observer, OdeSystem, RefreshPolicy,
    RunOptions, RunReport, StsKind,
};

/// Recursion coefficients `(μ_j, ν_j, μ̃_j)` of one RKL stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageCoefficients {
    pub mu: f64,
    pub nu: f64,
    pub mu_tilde: f64,
}

/// One super-step cycle of an STS method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperStepSchedule {
    pub kind: StsKind,
    pub stages: usize,
    pub dt_exp: f64,
    pub dt_super: f64,
    /// RKC inner steps `τ_k` in execution order (empty for RKL).
    pub stage_steps: Vec<f64>,
    /// RKL recursion coefficients for stages `1..=N_S` (empty for RKC).
    pub coefficients: Vec<StageCoefficients>,
    /// RKC damping `ν` (zero for RKL).
    pub damping: f64,
}

/// Builds the schedule of `stages` inner steps on top of the explicit limit `dt_exp`.
///
/// RKC uses the shifted Chebyshev-root steps
/// `τ_k = dt_exp / ((ν − 1)·cos((2k − 1)π/(2N)) + 1 + ν)`, executed in an order
/// alternating large and small steps; RKL uses the first-order Legendre
/// recursion with `dt_super = (N² + N)/2 · dt_exp`.
pub fn build_schedule(
    kind: StsKind,
    stages: usize,
    dt_exp: f64,
    damping: f64,
) -> Result<SuperStepSchedule, IntegrationError> {
    if stages == 0 {
        return Err(IntegrationError::InvalidSchedule("N_S must be at least 1".into()));
    }
    if !(dt_exp > 0.0 && dt_exp.is_finite()) {
        return Err(IntegrationError::InvalidSchedule(format!("dt_exp must be positive, got {dt_exp}")));
    }
    if !(damping >= 0.0 && damping.is_finite()) {
        return Err(IntegrationError::InvalidSchedule(format!("damping must be non-negative, got {damping}")));
    }
    let n = stages as f64;
    Ok(match kind {
        StsKind::Rkc => {
            let tau: Vec<f64> = (1..=stages)
                .map(|k| {
                    let c = ((2 * k - 1) as f64 * PI / (2.0 * n)).cos();
                    dt_exp / ((damping - 1.0) * c + 1.0 + damping)
                })
                .collect();
            let dt_super = tau.iter().sum();
            let stage_steps = interleaved_order(stages).into_iter().map(|k| tau[k]).collect();
            SuperStepSchedule {
                kind,
                stages,
                dt_exp,
                dt_super,
                stage_steps,
                coefficients: Vec::new(),
                damping,
            }
        }
        StsKind::Rkl => {
            let w1 = 2.0 / (n * n + n);
            let coefficients = (1..=stages)
                .map(|j| {
                    let jf = j as f64;
                    let mu = (2.0 * jf - 1.0) / jf;
                    // 1 − μ_j is exact, so μ_j + ν_j = 1 preserves constants exactly
                    StageCoefficients { mu, nu: 1.0 - mu, mu_tilde: mu * w1 }
                })
                .collect();
            SuperStepSchedule {
                kind,
                stages,
                dt_exp,
                dt_super: 0.5 * (n * n + n) * dt_exp,
                stage_steps: Vec::new(),
                coefficients,
                damping: 0.0,
            }
        }
    })
}

/// Indices `0, N−1, 1, N−2, …`.
fn interleaved_order(n: usize) -> Vec<usize> {
    let (mut lo, mut hi) = (0usize, n);
    let mut out = Vec::with_capacity(n);
    while lo < hi {
        out.push(lo);
        lo += 1;
        if lo < hi {
            hi -= 1;
            out.push(hi);
        }
    }
    out
}

impl SuperStepSchedule {
    /// Rebuilds the schedule for a new explicit limit, keeping `N_S` and damping.
    pub fn rebuilt(&self, dt_exp: f64) -> Result<Self, IntegrationError> {
        build_schedule(self.kind, self.stages, dt_exp, self.damping)
    }

    pub fn growth(&self) -> f64 {
        self.dt_super / self.dt_exp
    }
}

/// Amplification factor of one cycle on `du/dt = −λ·u`.
pub fn amplification_eval(schedule: &SuperStepSchedule, lambda: f64) -> f64 {
    match schedule.kind {
        StsKind::Rkc => schedule.stage_steps.iter().map(|tau| 1.0 - tau * lambda).product(),
        StsKind::Rkl => {
            let z = -lambda * schedule.dt_super;
            let (mut y2, mut y1) = (1.0, 1.0);
            for (j, c) in schedule.coefficients.iter().enumerate() {
                let y = if j == 0 {
                    y1 + c.mu_tilde * z * y1
                } else {
                    c.mu * y1 + c.nu * y2 + c.mu_tilde * z * y1
                };
                y2 = y1;
                y1 = y;
            }
            y1
        }
    }
}

/// Buffers reused across cycles.
struct Work {
    f: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Advances `y` by one cycle of length `h` (the schedule scaled to `h`).
fn cycle<S: OdeSystem + ?Sized>(
    sys: &S,
    s: &SuperStepSchedule,
    t: f64,
    h: f64,
    y: &mut [f64],
    w: &mut Work,
) -> Result<(), IntegrationError> {
    let scale = h / s.dt_super;
    match s.kind {
        StsKind::Rkc => {
            let mut ts = t;
            for (k, tau) in s.stage_steps.iter().enumerate() {
                let step = tau * scale;
                sys.rhs(ts, y, &mut w.f)?;
                for (yi, fi) in y.iter_mut().zip(&w.f) {
                    *yi += step * fi;
                }
                ts = if k + 1 == s.stages { t + h } else { ts + step };
                sys.constrain(ts, y);
            }
        }
        StsKind::Rkl => {
            let n = s.stages as f64;
            let stage_time = |j: usize| {
                let jf = j as f64;
                t + h * (jf * jf + jf) / (n * n + n)
            };
            // a = Y_{j−2}, b = Y_{j−1}
            w.a.copy_from_slice(y);
            w.b.copy_from_slice(y);
            for (idx, c) in s.coefficients.iter().enumerate() {
                let j = idx + 1;
                sys.rhs(stage_time(j - 1), &w.b, &mut w.f)?;
                if j == 1 {
                    for (bi, fi) in w.b.iter_mut().zip(&w.f) {
                        *bi += c.mu_tilde * h * fi;
                    }
                } else {
                    for ((ai, bi), fi) in w.a.iter_mut().zip(&w.b).zip(&w.f) {
                        *ai = c.mu * bi + c.nu * *ai + c.mu_tilde * h * fi;
                    }
                    std::mem::swap(&mut w.a, &mut w.b);
                }
                let tj = if j == s.stages { t + h } else { stage_time(j) };
                sys.constrain(tj, &mut w.b);
                if j == 1 {
                    // the recursion needs Y_0 as Y_{j−2} at stage 2
                    w.a.copy_from_slice(y);
                }
            }
            y.copy_from_slice(&w.b);
        }
    }
    Ok(())
}

/// STS march: outer nodes advance by `dt_super`, each cycle running `N_S`
/// inner stages. For nonlinear systems the spectral bound is refreshed at the
/// start of every cycle and the schedule handled per [`RunOptions::refresh`].
pub fn sts_run<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    schedule: &SuperStepSchedule,
    tau: f64,
    options: &RunOptions,
    observer: Option<Observer<'_>>,
) -> Result<RunReport, IntegrationError> {
    check_run(y0, sys.dim(), schedule.dt_super, tau)?;
    let dim = sys.dim();
    let mut y = y0.to_vec();
    sys.constrain(t0, &mut y);
    let mut sched = schedule.clone();
    let mut rebuilds = 0usize;
    let linear = sys.is_linear();

    let mut refresh = |t: f64, y: &[f64], sched: &mut SuperStepSchedule| -> Result<(), IntegrationError> {
        if options.allow_unstable {
            return Ok(());
        }
        let est = sys.stability(t, y)?;
        if sched.dt_exp > est.dt_exp * options.inflation {
            match options.refresh {
                RefreshPolicy::Strict => {
                    return Err(IntegrationError::StaleSchedule {
                        schedule: sched.dt_exp,
                        current: est.dt_exp,
                    })
                }
                RefreshPolicy::Rebuild => {
                    *sched = sched.rebuilt(est.inflated(options.inflation).dt_exp)?;
                    rebuilds += 1;
                }
            }
        }
        Ok(())
    };
    refresh(t0, &y, &mut sched)?;

    let mut w = Work { f: vec![0.0; dim], a: vec![0.0; dim], b: vec![0.0; dim] };
    let mut m = Marcher::new(sys, options, observer);
    m.node(0, t0, &y)?;
    let mut t = t0;
    let mut n = 0usize;
    let end = t0 + tau;
    while end - t > 1e-12 * tau.max(f64::MIN_POSITIVE) {
        if n > 0 && !linear {
            refresh(t, &y, &mut sched)?;
        }
        let remaining = end - t;
        let last = remaining <= sched.dt_super * (1.0 + 1e-12);
        let h = if last { remaining } else { sched.dt_super };
        cycle(sys, &sched, t, h, &mut y, &mut w)?;
        n += 1;
        t = if last { end } else { t + h };
        m.node(n, t, &y)?;
    }
    let expected = planned_steps(tau, schedule.dt_super);
    debug_assert!(rebuilds > 0 || n == expected, "{n} cycles, expected {expected}");
    let mut report = m.finish(sys, sched.kind.into(), sched.dt_super, sched.stages, n, t, y);
    report.rebuilds = rebuilds;
    report.unstable_allowed = options.allow_unstable;
    Ok(report)
}
