use serde::Serialize;

use super::presets::{physical_case, Case, PhysicalLayout, SchemeDefaults, PHYSICAL_DX};
use super::{BoundarySeries, CaseError};
use crate::dimensionless::DimensionlessGroups;
use crate::integrators::{
    build_schedule, integrate, RunOptions, RunReport, Scheme, SchemeSpec, SuperStepSchedule,
};
use crate::metrics::{ratios, total_moisture, drying_rate, ComparisonRecord, FieldErrors, MetricsError, SCD_CAP};
use crate::model::{StateField, WaterProperties};

/// One scheme to run; unset parameters take the case defaults.
///
/// For STS schemes `dt` is the underlying explicit step `dt_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeRequest {
    pub scheme: Scheme,
    pub dt: Option<f64>,
    pub stages: Option<usize>,
    pub damping: Option<f64>,
}

impl SchemeRequest {
    pub fn new(scheme: Scheme) -> Self {
        Self { scheme, dt: None, stages: None, damping: None }
    }

    pub fn with_stages(mut self, stages: usize) -> Self {
        self.stages = Some(stages);
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    /// The four schemes with default parameters.
    pub fn all() -> Vec<SchemeRequest> {
        Scheme::ALL.iter().map(|&s| SchemeRequest::new(s)).collect()
    }

    pub fn resolve(&self, d: &SchemeDefaults) -> Result<SchemeSpec, CaseError> {
        Ok(match self.scheme {
            Scheme::Euler => SchemeSpec::Euler { dt: self.dt.unwrap_or(d.euler_dt) },
            Scheme::DufortFrankel => SchemeSpec::DufortFrankel { dt: self.dt.unwrap_or(d.df_dt) },
            Scheme::Rkc | Scheme::Rkl => {
                let kind = self.scheme.sts_kind().expect("STS scheme");
                let (stages, damping) = match self.scheme {
                    Scheme::Rkc => (d.rkc_stages, d.rkc_damping),
                    _ => (d.rkl_stages, 0.0),
                };
                SchemeSpec::Sts(build_schedule(
                    kind,
                    self.stages.unwrap_or(stages),
                    self.dt.unwrap_or(d.sts_dt_exp),
                    self.damping.unwrap_or(damping),
                )?)
            }
        })
    }
}

/// Fine-step Euler solution sampled at every coarse Euler node and
/// interpolated linearly in time in between.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub dt: f64,
    pub refinement: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub report: RunReport,
}

impl ReferenceSolution {
    /// Euler at `Δt / refinement` over the case horizon, where `Δt` is the
    /// case Euler step capped at 0.9 of the explicit limit.
    pub fn compute(case: &Case, refinement: usize) -> Result<Self, CaseError> {
        if refinement == 0 {
            return Err(CaseError::Config("reference refinement must be at least 1".into()));
        }
        let op = case.operator()?;
        let y0 = op.pack(&case.initial)?;
        let dt = stable_euler_dt(case)? / refinement as f64;
        let opts = RunOptions { sample_every: refinement, ..RunOptions::default() };
        let mut report = integrate(&op, &SchemeSpec::Euler { dt }, &y0, 0.0, case.tau, &opts, None)?;
        let mut trajectory = std::mem::take(&mut report.trajectory);
        if trajectory.last().is_none_or(|(t, _)| *t < report.final_time) {
            trajectory.push((report.final_time, report.final_y.clone()));
        }
        let (times, states) = trajectory.into_iter().unzip();
        Ok(Self { dt, refinement, times, states, report })
    }

    /// Reference state at `t` (clamped to the sampled span).
    pub fn at(&self, t: f64, out: &mut [f64]) {
        let n = self.times.len();
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 || n == 1 {
            out.copy_from_slice(&self.states[0]);
            return;
        }
        if i >= n {
            out.copy_from_slice(&self.states[n - 1]);
            return;
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        for ((o, a), b) in out.iter_mut().zip(&self.states[i - 1]).zip(&self.states[i]) {
            *o = a + w * (b - a);
        }
    }

    pub fn final_state(&self) -> &[f64] {
        &self.states[self.states.len() - 1]
    }

    /// Richardson estimate of the reference error from a coarse Euler run:
    /// `max |y_ref − y_coarse| / (refinement − 1)` at the final time.
    pub fn richardson_gap(&self, coarse_final: &[f64]) -> f64 {
        let r = (self.refinement.max(2) - 1) as f64;
        self.final_state()
            .iter()
            .zip(coarse_final)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / r
    }
}

/// The case Euler step, capped at 0.9 of the explicit limit at the initial state.
fn stable_euler_dt(case: &Case) -> Result<f64, CaseError> {
    let est = case.operator()?.estimate_lambda_max(&case.initial)?;
    let dt = case.defaults.euler_dt;
    Ok(if est.is_bounded() { dt.min(0.9 * est.dt_exp) } else { dt })
}

/// How run errors are measured.
#[derive(Debug, Clone, Copy)]
pub enum ErrorBasis<'a> {
    /// At every outer node against an interpolated reference.
    Reference(&'a ReferenceSolution),
    /// Final state against the Euler run of the same comparison.
    FinalAgainstEuler,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ComparisonOutcome {
    pub records: Vec<ComparisonRecord>,
    /// Successful runs, in request order.
    pub reports: Vec<RunReport>,
    pub schedules: Vec<SuperStepSchedule>,
    /// Final `(u, v)` fields of successful runs.
    #[serde(skip)]
    pub finals: Vec<(Scheme, StateField)>,
    /// Euler run used for the ratios when none was requested.
    pub euler_baseline: Option<RunReport>,
    /// Richardson estimate of the reference error, when a reference was used.
    pub richardson: Option<f64>,
    pub failures: usize,
}

impl ComparisonOutcome {
    pub fn record(&self, scheme: Scheme) -> Option<&ComparisonRecord> {
        self.records.iter().find(|r| r.scheme == scheme.name())
    }

    pub fn report(&self, scheme: Scheme) -> Option<&RunReport> {
        self.reports.iter().find(|r| r.scheme == scheme)
    }
}

fn split(y: &[f64], u: &mut [f64], v: &mut [f64]) {
    for (i, p) in y.chunks_exact(2).enumerate() {
        u[i] = p[0];
        v[i] = p[1];
    }
}

/// Runs `spec`, accumulating errors at each outer node when a reference is given.
fn run_measured(
    case: &Case,
    spec: &SchemeSpec,
    reference: Option<&ReferenceSolution>,
    opts: &RunOptions,
) -> Result<(RunReport, FieldErrors), CaseError> {
    let op = case.operator()?;
    let y0 = op.pack(&case.initial)?;
    let spacing = case.grid.spacing();
    let Some(reference) = reference else {
        let report = integrate(&op, spec, &y0, 0.0, case.tau, opts, None)?;
        return Ok((report, FieldErrors::default()));
    };
    let n = case.grid.node_count();
    let mut errors = FieldErrors::default();
    let mut failure: Option<MetricsError> = None;
    let mut r = vec![0.0; 2 * n];
    let (mut un, mut vn, mut ur, mut vr) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut observer = |t: f64, y: &[f64]| {
        reference.at(t, &mut r);
        split(y, &mut un, &mut vn);
        split(&r, &mut ur, &mut vr);
        let res = errors.u.add(&un, &ur, spacing).and_then(|_| errors.v.add(&vn, &vr, spacing));
        if let Err(e) = res {
            failure.get_or_insert(e);
        }
    };
    let report = integrate(&op, spec, &y0, 0.0, case.tau, opts, Some(&mut observer))?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok((report, errors))
}

fn final_errors(case: &Case, y: &[f64], reference: &[f64]) -> Result<FieldErrors, CaseError> {
    let n = case.grid.node_count();
    let (mut un, mut vn, mut ur, mut vr) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    split(y, &mut un, &mut vn);
    split(reference, &mut ur, &mut vr);
    let mut e = FieldErrors::default();
    e.u.add(&un, &ur, case.grid.spacing())?;
    e.v.add(&vn, &vr, case.grid.spacing())?;
    Ok(e)
}

fn zero_horizon_record(scheme: Scheme, dt: f64) -> ComparisonRecord {
    ComparisonRecord {
        scheme: scheme.name().to_string(),
        dt,
        n_t: 1,
        rho_ndt_pct: 100.0,
        eps2_u: 0.0,
        eps2_v: 0.0,
        epsinf_u: 0.0,
        epsinf_v: 0.0,
        scd_u: SCD_CAP,
        scd_v: SCD_CAP,
        cpu_s: 0.0,
        rho_cpu_pct: f64::NAN,
        rho_cpu_day_s: f64::NAN,
        failure: None,
    }
}

/// Runs every request on `case` and builds one comparison row per request.
///
/// A scheme that fails contributes a failure row; the others still run.
/// Ratios are taken against the requested Euler run, or against an extra
/// Euler run at the case default step when none was requested.
pub fn run_comparison(
    case: &Case,
    requests: &[SchemeRequest],
    basis: ErrorBasis<'_>,
) -> Result<ComparisonOutcome, CaseError> {
    let mut out = ComparisonOutcome::default();
    let specs: Vec<Result<SchemeSpec, CaseError>> = requests.iter().map(|r| r.resolve(&case.defaults)).collect();
    for spec in specs.iter().flatten() {
        if let SchemeSpec::Sts(s) = spec {
            out.schedules.push(s.clone());
        }
    }
    if case.tau == 0.0 {
        for (req, spec) in requests.iter().zip(&specs) {
            match spec {
                Ok(s) => out.records.push(zero_horizon_record(req.scheme, s.outer_step())),
                Err(e) => {
                    out.failures += 1;
                    out.records.push(ComparisonRecord::failed(req.scheme, f64::NAN, e.to_string()));
                }
            }
        }
        return Ok(out);
    }

    let reference = match basis {
        ErrorBasis::Reference(r) => Some(r),
        ErrorBasis::FinalAgainstEuler => None,
    };
    let opts = RunOptions::default();
    let mut runs: Vec<Result<(RunReport, FieldErrors), String>> = Vec::with_capacity(requests.len());
    for spec in &specs {
        runs.push(match spec {
            Ok(s) => run_measured(case, s, reference, &opts).map_err(|e| e.to_string()),
            Err(e) => Err(e.to_string()),
        });
    }
    let euler_pos = requests.iter().zip(&runs).position(|(r, run)| r.scheme == Scheme::Euler && run.is_ok());
    let euler = match euler_pos {
        Some(i) => runs[i].as_ref().map(|(rep, _)| rep.clone()).ok(),
        None => {
            let spec = SchemeSpec::Euler { dt: stable_euler_dt(case)? };
            let rep = run_measured(case, &spec, None, &opts).ok().map(|(rep, _)| rep);
            out.euler_baseline = rep.clone();
            rep
        }
    };
    if let (Some(r), Some(e)) = (reference, &euler) {
        out.richardson = Some(r.richardson_gap(&e.final_y));
    }

    for ((req, spec), run) in requests.iter().zip(&specs).zip(runs) {
        let dt = spec.as_ref().map_or(f64::NAN, |s| s.outer_step());
        let (report, mut errors) = match run {
            Ok(x) => x,
            Err(msg) => {
                out.failures += 1;
                out.records.push(ComparisonRecord::failed(req.scheme, dt, msg));
                continue;
            }
        };
        let Some(euler) = &euler else {
            out.failures += 1;
            out.records.push(ComparisonRecord::failed(req.scheme, dt, "no Euler baseline for the ratios"));
            continue;
        };
        if reference.is_none() {
            errors = final_errors(case, &report.final_y, &euler.final_y)?;
        }
        let record = ratios(&report, euler, case.tau_days(), &errors)?;
        out.finals.push((report.scheme, StateField::from_interleaved(&report.final_y, report.final_time)));
        out.records.push(record);
        out.reports.push(report);
    }
    Ok(out)
}

/// The verification study: errors against the refined Euler reference.
pub fn run_verification_case(
    case: &Case,
    requests: &[SchemeRequest],
    refinement: usize,
) -> Result<ComparisonOutcome, CaseError> {
    if case.tau == 0.0 {
        return run_comparison(case, requests, ErrorBasis::FinalAgainstEuler);
    }
    let reference = ReferenceSolution::compute(case, refinement)?;
    run_comparison(case, requests, ErrorBasis::Reference(&reference))
}

/// One row of an `N_S` sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: String,
    pub ns: usize,
    pub dt_super: f64,
    pub n_t: usize,
    pub rho_ndt_pct: f64,
    pub epsinf_u: f64,
    pub epsinf_v: f64,
    pub rho_cpu_pct: f64,
    pub rhs_evals: u64,
    pub failure: Option<String>,
}

pub const SWEEP_HEADER: [&str; 9] =
    ["scheme", "ns", "dt_super", "N_t", "rho_Ndt_pct", "epsinf_u", "epsinf_v", "rho_cpu_pct", "rhs_evals"];

impl SweepRow {
    pub(crate) fn fields(&self) -> [String; 9] {
        let f = |x: f64| format!("{x:e}");
        [
            self.scheme.clone(),
            self.ns.to_string(),
            f(self.dt_super),
            self.n_t.to_string(),
            f(self.rho_ndt_pct),
            f(self.epsinf_u),
            f(self.epsinf_v),
            f(self.rho_cpu_pct),
            self.rhs_evals.to_string(),
        ]
    }
}

/// Fitted log-log slopes of `ε∞(u)` and `ε∞(v)` against `N_S` for one scheme.
pub type SchemeSlopes = (String, Option<f64>, Option<f64>);

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// `(scheme, slope of ε_∞(u), slope of ε_∞(v))` in log-log axes.
    pub slopes: Vec<SchemeSlopes>,
    pub richardson: Option<f64>,
}

impl SweepOutcome {
    pub fn slope(&self, scheme: Scheme) -> Option<(Option<f64>, Option<f64>)> {
        self.slopes.iter().find(|s| s.0 == scheme.name()).map(|s| (s.1, s.2))
    }
}

/// Least-squares slope of `ln y` against `ln x` over the positive finite points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Runs each STS scheme at every `N_S` of `ns` with the case's `dt_exp`.
///
/// Failed runs become failure rows and are left out of the slope fit.
pub fn run_ns_sweep(
    case: &Case,
    schemes: &[Scheme],
    ns: &[usize],
    damping: Option<f64>,
    refinement: usize,
) -> Result<SweepOutcome, CaseError> {
    let reference = ReferenceSolution::compute(case, refinement)?;
    let opts = RunOptions::default();
    let euler_spec = SchemeRequest::new(Scheme::Euler).resolve(&case.defaults)?;
    let (euler, _) = run_measured(case, &euler_spec, None, &opts)?;
    let mut out = SweepOutcome { richardson: Some(reference.richardson_gap(&euler.final_y)), ..Default::default() };
    for &scheme in schemes {
        if scheme.sts_kind().is_none() {
            return Err(CaseError::Config(format!("sweep needs STS schemes, got {scheme}")));
        }
        let mut pu = Vec::new();
        let mut pv = Vec::new();
        for &n in ns {
            let req = SchemeRequest { scheme, dt: None, stages: Some(n), damping };
            let spec = req.resolve(&case.defaults)?;
            let dt_super = spec.outer_step();
            let row = match run_measured(case, &spec, Some(&reference), &opts) {
                Ok((rep, e)) => {
                    pu.push((n as f64, e.u.eps_inf));
                    pv.push((n as f64, e.v.eps_inf));
                    SweepRow {
                        scheme: scheme.name().into(),
                        ns: n,
                        dt_super,
                        n_t: rep.n_t,
                        rho_ndt_pct: 100.0 * rep.steps as f64 / euler.steps as f64,
                        epsinf_u: e.u.eps_inf,
                        epsinf_v: e.v.eps_inf,
                        rho_cpu_pct: if euler.cpu_time > 0.0 { 100.0 * rep.cpu_time / euler.cpu_time } else { f64::NAN },
                        rhs_evals: rep.rhs_evals,
                        failure: None,
                    }
                }
                Err(e) => SweepRow {
                    scheme: scheme.name().into(),
                    ns: n,
                    dt_super,
                    n_t: 0,
                    rho_ndt_pct: f64::NAN,
                    epsinf_u: f64::NAN,
                    epsinf_v: f64::NAN,
                    rho_cpu_pct: f64::NAN,
                    rhs_evals: 0,
                    failure: Some(e.to_string()),
                },
            };
            out.rows.push(row);
        }
        out.slopes.push((scheme.name().into(), log_log_slope(&pu), log_log_slope(&pv)));
    }
    Ok(out)
}

/// Total moisture and drying rate of one layout over time (days).
#[derive(Debug, Clone, Default, Serialize)]
pub struct DryingCurve {
    pub layout: String,
    /// `(t [d], θ_tot [m³/m²])`
    pub theta_tot: Vec<(f64, f64)>,
    /// `(t [d], V_dry [m³/(m²·d)])`
    pub v_dry: Vec<(f64, f64)>,
}

impl DryingCurve {
    pub fn final_total(&self) -> f64 {
        self.theta_tot.last().map_or(f64::NAN, |p| p.1)
    }
}

#[derive(Debug, Clone)]
pub struct PhysicalOptions {
    pub layouts: Vec<PhysicalLayout>,
    pub climate: BoundarySeries,
    pub tau_s: f64,
    pub dx_m: f64,
    pub water: WaterProperties,
    /// Scheme used for the drying curves.
    pub curve: SchemeRequest,
    /// Sample spacing of the drying curves, seconds.
    pub sample_interval_s: f64,
    /// Layout and schemes of the comparison table, if any.
    pub comparison: Option<(PhysicalLayout, Vec<SchemeRequest>)>,
}

impl PhysicalOptions {
    /// Three layouts over `tau_s` with RKL curves and an Euler/RKC/RKL table on `re`.
    pub fn new(climate: BoundarySeries, tau_s: f64) -> Self {
        Self {
            layouts: PhysicalLayout::ALL.to_vec(),
            climate,
            tau_s,
            dx_m: PHYSICAL_DX,
            water: WaterProperties::default(),
            curve: SchemeRequest::new(Scheme::Rkl),
            sample_interval_s: 3600.0,
            comparison: Some((
                PhysicalLayout::Re,
                [Scheme::Euler, Scheme::Rkc, Scheme::Rkl].map(SchemeRequest::new).to_vec(),
            )),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PhysicalOutcome {
    pub curves: Vec<DryingCurve>,
    pub groups: Vec<(String, DimensionlessGroups)>,
    pub curve_schedule: Option<SuperStepSchedule>,
    pub comparison: Option<ComparisonOutcome>,
}

impl PhysicalOutcome {
    pub fn curve(&self, layout: PhysicalLayout) -> Option<&DryingCurve> {
        self.curves.iter().find(|c| c.layout == layout.name())
    }
}

fn drying_curve(case: &Case, spec: &SchemeSpec, sample_s: f64) -> Result<DryingCurve, CaseError> {
    let op = case.operator()?;
    let y0 = op.pack(&case.initial)?;
    let scaling = case.scaling.as_ref().ok_or_else(|| CaseError::Config("physical case needs a scaling".into()))?;
    let dx_m = case.grid.spacing() * case.length_scale;
    let n = case.grid.node_count();
    let domain = case.material_domain.clone();
    let mut theta = vec![0.0; n];
    let mut samples = Vec::new();
    let mut next = 0.0;
    let mut failure = None;
    let mut last = (f64::NAN, 0.0);
    let mut observer = |t: f64, y: &[f64]| {
        let t_s = t * scaling.time;
        for (th, p) in theta.iter_mut().zip(y.chunks_exact(2)) {
            *th = p[1] * scaling.moisture;
        }
        match total_moisture(&theta, dx_m, domain.clone()) {
            Ok(total) => {
                last = (t_s, total);
                if t_s >= next {
                    samples.push((t_s / 86_400.0, total));
                    next = (t_s / sample_s).floor() * sample_s + sample_s;
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    };
    integrate(&op, spec, &y0, 0.0, case.tau, &RunOptions::default(), Some(&mut observer))?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let end = (last.0 / 86_400.0, last.1);
    if samples.last().is_some_and(|s| s.0 < end.0) {
        samples.push(end);
    }
    let v_dry = if samples.len() >= 2 { drying_rate(&samples)? } else { Vec::new() };
    Ok(DryingCurve { layout: case.name.clone(), theta_tot: samples, v_dry })
}

/// The drying study: one curve per layout and an optional comparison table
/// whose errors are final-time differences against Euler.
pub fn run_physical_case(opts: &PhysicalOptions) -> Result<PhysicalOutcome, CaseError> {
    let mut out = PhysicalOutcome::default();
    let cases: Vec<Case> = opts
        .layouts
        .iter()
        .map(|&l| physical_case(l, &opts.climate, opts.dx_m, opts.tau_s, opts.water))
        .collect::<Result<_, _>>()?;
    for c in &cases {
        out.groups.push((c.name.clone(), c.groups));
    }
    let specs: Vec<SchemeSpec> = cases.iter().map(|c| opts.curve.resolve(&c.defaults)).collect::<Result<_, _>>()?;
    if let Some(SchemeSpec::Sts(s)) = specs.first() {
        out.curve_schedule = Some(s.clone());
    }
    let curves: Vec<Result<DryingCurve, CaseError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .iter()
            .zip(&specs)
            .map(|(c, s)| scope.spawn(move || drying_curve(c, s, opts.sample_interval_s)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("drying curve thread panicked")).collect()
    });
    out.curves = curves.into_iter().collect::<Result<_, _>>()?;
    if let Some((layout, requests)) = &opts.comparison {
        let case = physical_case(*layout, &opts.climate, opts.dx_m, opts.tau_s, opts.water)?;
        out.comparison = Some(run_comparison(&case, requests, ErrorBasis::FinalAgainstEuler)?);
    }
    Ok(out)
}
