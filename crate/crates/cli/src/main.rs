use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hamsts_core::cases::{
    case_from_config, default_climate, emit_outputs, ingest_boundary_series, parse_duration,
    read_case_config, run_ns_sweep, run_physical_case, run_verification_case,
    verification_self_check, CaseConfig, CaseError, CaseKind, CaseOutputs, ComparisonOutcome,
    DurationSpec, PhysicalLayout, PhysicalOptions, SchemeConfig, SchemeRequest, SweepConfig,
    PHYSICAL_DX,
};
use hamsts_core::metrics::ComparisonRecord;
use hamsts_core::Scheme;

const DEFAULT_REFINEMENT: usize = 10;
const DEFAULT_SWEEP_NS: [usize; 4] = [10, 20, 40, 80];

#[derive(Parser)]
#[command(name = "hamsts", version, about = "Super-time-stepping solvers for coupled heat and moisture transfer in walls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-layer dimensionless verification case: Euler, Du Fort-Frankel, RKC, RKL.
    Verify(Common),
    /// Rammed-earth drying study: three wall layouts and a scheme comparison.
    Physical(Common),
    /// N_S sweep of the STS schemes on the verification case.
    Sweep(Common),
    /// Case described entirely by a config file.
    Custom(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML case file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated schemes (euler, df, rkc, rkl).
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Comma-separated N_S values; one value for runs, a list for sweeps.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<usize>,
    /// Grid spacing (dimensionless, or metres for the physical case).
    #[arg(long)]
    dx: Option<f64>,
    /// Euler step and STS explicit step; accepts s/min/h/d suffixes.
    #[arg(long)]
    dt: Option<String>,
    /// Simulated horizon; accepts s/min/h/d suffixes.
    #[arg(long)]
    tau: Option<String>,
}

fn config_error(msg: impl Into<String>) -> CaseError {
    CaseError::Config(msg.into())
}

fn load_config(common: &Common, kind: CaseKind) -> Result<CaseConfig, CaseError> {
    let cfg = match &common.config {
        Some(p) => read_case_config(p)?,
        None if kind == CaseKind::Custom => return Err(config_error("custom needs --config")),
        None => CaseConfig { kind, ..CaseConfig::default() },
    };
    if cfg.kind != kind {
        return Err(config_error(format!("config describes a {:?} case", cfg.kind).to_lowercase()));
    }
    Ok(cfg)
}

fn parse_schemes(names: &[String]) -> Result<Vec<Scheme>, CaseError> {
    names.iter().map(|n| n.parse::<Scheme>().map_err(|e| config_error(e.to_string()))).collect()
}

/// Folds command-line flags into the config so the manifest records what ran.
fn apply_flags(cfg: &mut CaseConfig, common: &Common, sweep: bool, default_schemes: &[Scheme]) -> Result<(), CaseError> {
    if let Some(dx) = common.dx {
        cfg.dx = Some(dx);
    }
    if let Some(tau) = &common.tau {
        parse_duration(tau)?;
        cfg.tau = Some(DurationSpec::Text(tau.clone()));
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    let listed = parse_schemes(&common.scheme)?;
    if sweep {
        let s = cfg.sweep.get_or_insert_with(SweepConfig::default);
        if !listed.is_empty() {
            s.schemes = listed;
        }
        if !common.ns.is_empty() {
            s.ns = common.ns.clone();
        }
    } else {
        let order = if !listed.is_empty() {
            listed
        } else if !cfg.schemes.is_empty() {
            cfg.schemes.iter().map(|s| s.scheme).collect()
        } else {
            default_schemes.to_vec()
        };
        cfg.schemes = order
            .into_iter()
            .map(|scheme| {
                cfg.schemes.iter().find(|s| s.scheme == scheme).cloned().unwrap_or(SchemeConfig {
                    scheme,
                    dt: None,
                    ns: None,
                    damping: None,
                })
            })
            .collect();
        match common.ns.as_slice() {
            [] => {}
            [n] => {
                for s in cfg.schemes.iter_mut().filter(|s| s.scheme.sts_kind().is_some()) {
                    s.ns = Some(*n);
                }
            }
            _ => return Err(config_error("--ns takes a single value outside the sweep subcommand")),
        }
    }
    if let Some(dt) = &common.dt {
        parse_duration(dt)?;
        for s in cfg.schemes.iter_mut().filter(|s| s.scheme != Scheme::DufortFrankel) {
            s.dt = Some(DurationSpec::Text(dt.clone()));
        }
    }
    cfg.validate()
}

/// Requests carrying the config's explicit steps, in run time units.
fn requests(cfg: &CaseConfig, time_unit: f64) -> Result<Vec<SchemeRequest>, CaseError> {
    cfg.schemes
        .iter()
        .map(|s| {
            Ok(SchemeRequest {
                scheme: s.scheme,
                dt: s.dt.as_ref().map(|d| d.value()).transpose()?.map(|d| d / time_unit),
                stages: s.ns,
                damping: s.damping,
            })
        })
        .collect()
}

fn output_dir(cfg: &CaseConfig, fallback: &str) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| Path::new("out").join(fallback))
}

fn print_records(records: &[ComparisonRecord]) {
    println!(
        "{:<15} {:>11} {:>9} {:>10} {:>10} {:>10} {:>6} {:>6} {:>10} {:>9}",
        "scheme", "dt", "N_t", "rho_Ndt%", "epsinf_u", "epsinf_v", "scd_u", "scd_v", "cpu_s", "rho_cpu%"
    );
    for r in records {
        if let Some(f) = &r.failure {
            println!("{:<15} {:>11.4e} FAILED: {f}", r.scheme, r.dt);
            continue;
        }
        println!(
            "{:<15} {:>11.4e} {:>9} {:>10.4} {:>10.3e} {:>10.3e} {:>6.2} {:>6.2} {:>10.3e} {:>9.2}",
            r.scheme, r.dt, r.n_t, r.rho_ndt_pct, r.epsinf_u, r.epsinf_v, r.scd_u, r.scd_v, r.cpu_s, r.rho_cpu_pct
        );
    }
}

fn finish(outputs: &CaseOutputs, dir: &Path, failures: usize) -> Result<ExitCode, CaseError> {
    let files = emit_outputs(outputs, dir)?;
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(if failures > 0 {
        eprintln!("{failures} scheme run(s) failed");
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn comparison_outputs(cfg: CaseConfig, case: &hamsts_core::cases::Case, out: ComparisonOutcome) -> CaseOutputs {
    CaseOutputs {
        kind: cfg.kind,
        name: case.name.clone(),
        groups: vec![(case.name.clone(), case.groups)],
        positions: case.grid.positions().to_vec(),
        config: Some(cfg),
        comparison: Some(out),
        ..CaseOutputs::default()
    }
}

fn verify(common: &Common, kind: CaseKind) -> Result<ExitCode, CaseError> {
    let mut cfg = load_config(common, kind)?;
    apply_flags(&mut cfg, common, false, &Scheme::ALL)?;
    let case = case_from_config(&cfg)?;
    let time_unit = case.scaling.map_or(1.0, |s| s.time);
    if kind == CaseKind::Verification {
        verification_self_check(&case)?;
    }
    let reqs = requests(&cfg, time_unit)?;
    let refinement = cfg.reference_refinement.unwrap_or(DEFAULT_REFINEMENT);
    let out = run_verification_case(&case, &reqs, refinement)?;
    print_records(&out.records);
    if let Some(g) = out.richardson {
        println!("reference Richardson gap: {g:.3e}");
    }
    let dir = output_dir(&cfg, if kind == CaseKind::Custom { "custom" } else { "verify" });
    let failures = out.failures;
    finish(&comparison_outputs(cfg, &case, out), &dir, failures)
}

fn sweep(common: &Common) -> Result<ExitCode, CaseError> {
    let mut cfg = load_config(common, CaseKind::Verification)?;
    apply_flags(&mut cfg, common, true, &[])?;
    let case = case_from_config(&cfg)?;
    verification_self_check(&case)?;
    let spec = cfg.sweep.clone().unwrap_or_default();
    let ns = if spec.ns.is_empty() { DEFAULT_SWEEP_NS.to_vec() } else { spec.ns.clone() };
    let schemes = if spec.schemes.is_empty() { vec![Scheme::Rkc, Scheme::Rkl] } else { spec.schemes.clone() };
    let refinement = cfg.reference_refinement.unwrap_or(DEFAULT_REFINEMENT);
    let out = run_ns_sweep(&case, &schemes, &ns, spec.damping, refinement)?;
    println!("{:<6} {:>5} {:>11} {:>7} {:>10} {:>10} {:>10} {:>9}", "scheme", "N_S", "dt_super", "N_t", "rho_Ndt%", "epsinf_u", "epsinf_v", "rho_cpu%");
    for r in &out.rows {
        match &r.failure {
            Some(f) => println!("{:<6} {:>5} {:>11.4e} FAILED: {f}", r.scheme, r.ns, r.dt_super),
            None => println!(
                "{:<6} {:>5} {:>11.4e} {:>7} {:>10.4} {:>10.3e} {:>10.3e} {:>9.2}",
                r.scheme, r.ns, r.dt_super, r.n_t, r.rho_ndt_pct, r.epsinf_u, r.epsinf_v, r.rho_cpu_pct
            ),
        }
    }
    for (s, su, sv) in &out.slopes {
        let f = |x: &Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        println!("{s}: log-log slope of epsinf vs N_S: u {}, v {}", f(su), f(sv));
    }
    let failures = out.rows.iter().filter(|r| r.failure.is_some()).count();
    let dir = output_dir(&cfg, "sweep");
    let outputs = CaseOutputs {
        kind: CaseKind::Verification,
        name: "sweep".into(),
        groups: vec![(case.name.clone(), case.groups)],
        config: Some(cfg),
        sweep: Some(out),
        ..CaseOutputs::default()
    };
    finish(&outputs, &dir, failures)
}

fn physical(common: &Common) -> Result<ExitCode, CaseError> {
    let mut cfg = load_config(common, CaseKind::Physical)?;
    apply_flags(&mut cfg, common, false, &[Scheme::Euler, Scheme::Rkc, Scheme::Rkl])?;
    let p = cfg.physical.clone().unwrap_or_default();
    let climate = match &p.climate {
        Some(path) => ingest_boundary_series(path)?,
        None => default_climate()?,
    };
    let tau_s = match &cfg.tau {
        Some(t) => t.value()?,
        None => 365.0 * 86_400.0,
    };
    let mut opts = PhysicalOptions::new(climate, tau_s);
    opts.dx_m = cfg.dx.unwrap_or(PHYSICAL_DX);
    if !p.layouts.is_empty() {
        opts.layouts = p.layouts.iter().map(|l| l.parse()).collect::<Result<_, _>>()?;
    }
    if let Some(w) = p.water {
        opts.water = w;
    }
    if let Some(s) = &p.sample_interval {
        opts.sample_interval_s = s.value()?;
    }
    let reqs = requests(&cfg, 1.0)?;
    let curve_scheme = p.curve_scheme.unwrap_or(Scheme::Rkl);
    opts.curve = reqs.iter().find(|r| r.scheme == curve_scheme).copied().unwrap_or(SchemeRequest::new(curve_scheme));
    let layout = match &p.comparison_layout {
        Some(l) => l.parse()?,
        None => PhysicalLayout::Re,
    };
    opts.comparison = (!reqs.is_empty()).then_some((layout, reqs));
    let out = run_physical_case(&opts)?;
    for c in &out.curves {
        println!("{:<7} theta_tot(0) = {:.6}  theta_tot(end) = {:.6}", c.layout, c.theta_tot[0].1, c.final_total());
    }
    let mut failures = 0;
    if let Some(c) = &out.comparison {
        print_records(&c.records);
        failures = c.failures;
    }
    let dir = output_dir(&cfg, "physical");
    let outputs = CaseOutputs {
        kind: CaseKind::Physical,
        name: "physical".into(),
        groups: out.groups.clone(),
        config: Some(cfg),
        physical: Some(out),
        ..CaseOutputs::default()
    };
    finish(&outputs, &dir, failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(c) => verify(c, CaseKind::Verification),
        Command::Custom(c) => verify(c, CaseKind::Custom),
        Command::Sweep(c) => sweep(c),
        Command::Physical(c) => physical(c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
