use std::f64::consts::PI;
use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::config::{CaseConfig, CaseKind, ForcingSpec, MaterialSpec, SideSpec};
use super::{ingest_boundary_series, parse_boundary_series, BoundarySeries, CaseError};
use crate::integrators::Scheme;
use crate::dimensionless::{BiotSet, DimensionlessGroups, ScalingSet, SideExchange};
use crate::discretization::{assemble_operator, SemiDiscreteOperator, VolumeSource};
use crate::model::{
    build_wall, builtin_material, saturation_pressure, BoundaryKind, PolynomialMaterial, BoundaryForcing, CoefficientModel, ConstantMaterial,
    Dimensionless, Grid1D, Insulation, RammedEarth, SideForcing, StateField, TimeFn, WallAssembly,
    WaterProperties, TABLE1_MAT1, TABLE1_MAT2,
};

/// Euler step of the verification case: 28 000 steps over `τ* = 1`.
pub const VERIFICATION_DT_EULER: f64 = 1.0 / 28_000.0;
/// Explicit step underlying the verification STS schedules.
pub const VERIFICATION_DT_EXP: f64 = 3.6e-5;
pub const VERIFICATION_DT_DF: f64 = 1e-3;
pub const VERIFICATION_DX: f64 = 1e-2;
pub const VERIFICATION_INTERFACE: f64 = 0.6;

const VERIFICATION_FO_T: f64 = 7e-2;
const VERIFICATION_FO_M: f64 = 9e-2;
const VERIFICATION_GAMMA: f64 = 7e-2;
const VERIFICATION_DELTA: f64 = 5e-2;
const VERIFICATION_LEFT: BiotSet = BiotSet {
    mass_sat: 0.0,
    mass_moisture: 25.5,
    heat_temperature: 50.5,
    heat_sat: 0.0,
    heat_moisture: 4.96e-1,
    heat_radiation: 0.0,
};
const VERIFICATION_RIGHT: BiotSet = BiotSet {
    mass_sat: 0.0,
    mass_moisture: 51.8,
    heat_temperature: 19.8,
    heat_sat: 0.0,
    heat_moisture: 6.73e-1,
    heat_radiation: 0.0,
};
/// `(base, amplitude, period)` of `u∞L, v∞L, u∞R, v∞R`.
const VERIFICATION_FORCING: [(f64, f64, f64); 4] =
    [(1.0, 0.6, 5.0), (1.0, 0.2, 2.0), (1.0, 0.5, 3.0), (1.0, 0.9, 6.0)];

/// Physical-case step policy, seconds.
pub const PHYSICAL_DT_EULER: f64 = 3.4e-2 * 60.0;
pub const PHYSICAL_DX: f64 = 5e-3;
const PHYSICAL_T_REF: f64 = 291.3;
const PHYSICAL_THETA_REF: f64 = 0.53;
const PHYSICAL_THETA_RE: f64 = 0.53;
const PHYSICAL_THETA_INS: f64 = 0.053;
const PHYSICAL_L_RE: f64 = 0.5;
const PHYSICAL_L_INS: f64 = 0.125;

/// Step defaults attached to a case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeDefaults {
    pub euler_dt: f64,
    pub df_dt: f64,
    pub sts_dt_exp: f64,
    pub rkc_stages: usize,
    pub rkl_stages: usize,
    pub rkc_damping: f64,
}

/// A fully assembled problem: wall, grid, groups, forcing, initial state.
#[derive(Clone)]
pub struct Case {
    pub name: String,
    pub wall: WallAssembly,
    pub grid: Grid1D,
    pub groups: DimensionlessGroups,
    pub forcing: BoundaryForcing,
    pub initial: StateField,
    /// Horizon in run time units.
    pub tau: f64,
    pub scaling: Option<ScalingSet>,
    /// Days per run time unit, when the case has a physical time scale.
    pub days_per_unit: Option<f64>,
    /// Metres per dimensionless length unit (1 for dimensionless cases).
    pub length_scale: f64,
    /// Node range used for total-moisture integrals.
    pub material_domain: Range<usize>,
    pub source: Option<VolumeSource>,
    pub defaults: SchemeDefaults,
}

impl fmt::Debug for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Case")
            .field("name", &self.name)
            .field("nodes", &self.grid.node_count())
            .field("tau", &self.tau)
            .field("groups", &self.groups)
            .finish()
    }
}

impl Case {
    pub fn operator(&self) -> Result<SemiDiscreteOperator, CaseError> {
        let op = assemble_operator(&self.wall, &self.grid, &self.groups, &self.forcing)?;
        Ok(match &self.source {
            Some(s) => op.with_source(s.clone()),
            None => op,
        })
    }

    /// Simulated days covered by `tau`, or `tau` itself for dimensionless cases.
    pub fn tau_days(&self) -> f64 {
        self.days_per_unit.map_or(self.tau, |d| self.tau * d)
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }
}

fn constant(c: crate::model::Coefficients, name: &str) -> Arc<dyn CoefficientModel> {
    Arc::new(ConstantMaterial::new(name, c))
}

/// The two-layer dimensionless verification case on a grid of spacing `dx`.
pub fn verification_case(dx: f64) -> Result<Case, CaseError> {
    let wall = build_wall(vec![
        (constant(TABLE1_MAT1, "table1_mat1"), VERIFICATION_INTERFACE),
        (constant(TABLE1_MAT2, "table1_mat2"), 1.0 - VERIFICATION_INTERFACE),
    ])?;
    let grid = Grid1D::with_spacing(1.0, dx)?;
    let groups = DimensionlessGroups {
        fo_m: VERIFICATION_FO_M,
        fo_t: VERIFICATION_FO_T,
        gamma: VERIFICATION_GAMMA,
        delta: VERIFICATION_DELTA,
        absorptivity: 0.0,
        left: VERIFICATION_LEFT,
        right: VERIFICATION_RIGHT,
    };
    let f = VERIFICATION_FORCING.map(|(base, amplitude, period)| TimeFn::SinSquared { base, amplitude, period });
    let [ul, vl, ur, vr] = f;
    let forcing = BoundaryForcing { left: SideForcing::robin(ul, vl), right: SideForcing::robin(ur, vr) };
    let n = grid.node_count();
    Ok(Case {
        name: "verification".into(),
        wall,
        grid,
        groups,
        forcing,
        initial: StateField::uniform(n, 1.0, 1.0),
        tau: 1.0,
        scaling: None,
        days_per_unit: None,
        length_scale: 1.0,
        material_domain: 0..n,
        source: None,
        defaults: SchemeDefaults {
            euler_dt: VERIFICATION_DT_EULER,
            df_dt: VERIFICATION_DT_DF,
            sts_dt_exp: VERIFICATION_DT_EXP,
            rkc_stages: 10,
            rkl_stages: 20,
            rkc_damping: 0.0,
        },
    })
}

/// Confirms that a verification case carries exactly the published constants.
pub fn verification_self_check(case: &Case) -> Result<(), CaseError> {
    let fail = |what: &str| Err(CaseError::Config(format!("verification preset mismatch: {what}")));
    let g = &case.groups;
    if (g.fo_t, g.fo_m, g.gamma, g.delta) != (VERIFICATION_FO_T, VERIFICATION_FO_M, VERIFICATION_GAMMA, VERIFICATION_DELTA) {
        return fail("Fourier numbers or coupling parameters");
    }
    if g.left != VERIFICATION_LEFT || g.right != VERIFICATION_RIGHT {
        return fail("Biot numbers");
    }
    let sides = [&case.forcing.left.u_inf, &case.forcing.left.v_inf, &case.forcing.right.u_inf, &case.forcing.right.v_inf];
    for (f, &(b, a, p)) in sides.iter().zip(&VERIFICATION_FORCING) {
        match f {
            TimeFn::SinSquared { base, amplitude, period } if (*base, *amplitude, *period) == (b, a, p) => {}
            _ => return fail("boundary forcing"),
        }
    }
    if case.wall.interface_positions() != [VERIFICATION_INTERFACE] || case.wall.total_length() != 1.0 {
        return fail("wall geometry");
    }
    let layers = case.wall.layers();
    if layers[0].model.coefficients(1.0, 1.0) != TABLE1_MAT1 || layers[1].model.coefficients(1.0, 1.0) != TABLE1_MAT2 {
        return fail("material coefficients");
    }
    if !case.initial.u.iter().chain(&case.initial.v).all(|&x| x == 1.0) {
        return fail("initial state");
    }
    Ok(())
}

/// Layer order of the rammed-earth drying study; the outside face is `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhysicalLayout {
    /// Insulation outside, rammed earth inside.
    InsRe,
    /// Rammed earth outside, insulation inside.
    ReIns,
    /// Rammed earth only.
    Re,
}

impl PhysicalLayout {
    pub const ALL: [PhysicalLayout; 3] = [PhysicalLayout::InsRe, PhysicalLayout::ReIns, PhysicalLayout::Re];

    pub fn name(self) -> &'static str {
        match self {
            PhysicalLayout::InsRe => "ins-re",
            PhysicalLayout::ReIns => "re-ins",
            PhysicalLayout::Re => "re",
        }
    }
}

impl std::str::FromStr for PhysicalLayout {
    type Err = CaseError;

    fn from_str(s: &str) -> Result<Self, CaseError> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ins-re" => Ok(PhysicalLayout::InsRe),
            "re-ins" => Ok(PhysicalLayout::ReIns),
            "re" => Ok(PhysicalLayout::Re),
            other => Err(CaseError::Config(format!("unknown layout '{other}' (ins-re, re-ins, re)"))),
        }
    }
}

/// Reference scales of the physical case for a wall of length `length` m.
///
/// Time is kept in seconds (`t° = 1 s`); `D_θ°` is the rammed-earth base
/// diffusivity and the other coefficient scales are its values at the
/// reference state.
pub fn physical_scaling(length: f64, water: WaterProperties) -> Result<ScalingSet, CaseError> {
    let re = RammedEarth { water }.coefficients(PHYSICAL_T_REF, PHYSICAL_THETA_REF);
    Ok(ScalingSet {
        time: 1.0,
        length,
        temperature: PHYSICAL_T_REF,
        moisture: PHYSICAL_THETA_REF,
        p_sat: saturation_pressure(PHYSICAL_T_REF)?,
        phi_inf: 1.0,
        irradiance: 1.0,
        d_theta: 1e-7,
        d_t: re.d_t,
        c_t: re.c_t,
        k_t: re.k_t,
        k_tm: re.k_tm,
        rho_water: water.density,
        r_vapor: 461.5,
        molar_mass: 18.015e-3,
        latent_heat: 2.5e6,
        h_m: 0.0,
        h_t: 0.0,
    })
}

/// One layout of the physical case, driven on both faces by Dirichlet data
/// from `climate` (`time_s, T_out_K, theta_out, T_in_K, theta_in`).
pub fn physical_case(
    layout: PhysicalLayout,
    climate: &BoundarySeries,
    dx: f64,
    tau_s: f64,
    water: WaterProperties,
) -> Result<Case, CaseError> {
    climate.check_covers(tau_s)?;
    let length = match layout {
        PhysicalLayout::Re => PHYSICAL_L_RE,
        _ => PHYSICAL_L_RE + PHYSICAL_L_INS,
    };
    let scaling = physical_scaling(length, water)?;
    let scales = scaling.coefficient_scales();
    let re: Arc<dyn CoefficientModel> =
        Arc::new(Dimensionless { inner: Arc::new(RammedEarth { water }), scales });
    let ins: Arc<dyn CoefficientModel> =
        Arc::new(Dimensionless { inner: Arc::new(Insulation { water }), scales });
    let (specs, thetas) = match layout {
        PhysicalLayout::InsRe => (
            vec![(ins, PHYSICAL_L_INS / length), (re, PHYSICAL_L_RE / length)],
            vec![PHYSICAL_THETA_INS, PHYSICAL_THETA_RE],
        ),
        PhysicalLayout::ReIns => (
            vec![(re, PHYSICAL_L_RE / length), (ins, PHYSICAL_L_INS / length)],
            vec![PHYSICAL_THETA_RE, PHYSICAL_THETA_INS],
        ),
        PhysicalLayout::Re => (vec![(re, 1.0)], vec![PHYSICAL_THETA_RE]),
    };
    let wall = build_wall(specs)?;
    let grid = Grid1D::with_spacing(1.0, dx / length)?;
    let groups = DimensionlessGroups::from_scaling(&scaling, &SideExchange::default(), &SideExchange::default(), 0.0)
        .map_err(|e| CaseError::Config(e.to_string()))?;

    let t_ref = scaling.temperature;
    let th_ref = scaling.moisture;
    let side = |t_col: &str, th_col: &str| -> Result<SideForcing, CaseError> {
        Ok(SideForcing::dirichlet(
            climate.time_fn(t_col, scaling.time, 1.0 / t_ref)?,
            climate.time_fn(th_col, scaling.time, 1.0 / th_ref)?,
        ))
    };
    let forcing = BoundaryForcing { left: side("T_out_K", "theta_out")?, right: side("T_in_K", "theta_in")? };

    let n = grid.node_count();
    let mut v = Vec::with_capacity(n);
    for &x in grid.positions() {
        v.push(thetas[wall.layer_index(x)?] / th_ref);
    }
    let initial = StateField { u: vec![1.0; n], v, time: 0.0 };
    let iface = wall.interface_nodes(&grid)?;
    let material_domain = match layout {
        PhysicalLayout::InsRe => iface[0]..n,
        PhysicalLayout::ReIns => 0..iface[0] + 1,
        PhysicalLayout::Re => 0..n,
    };
    Ok(Case {
        name: layout.name().into(),
        wall,
        grid,
        groups,
        forcing,
        initial,
        tau: tau_s / scaling.time,
        scaling: Some(scaling),
        days_per_unit: Some(scaling.time / 86_400.0),
        length_scale: length,
        material_domain,
        source: None,
        defaults: SchemeDefaults {
            euler_dt: PHYSICAL_DT_EULER,
            df_dt: 10.0 * PHYSICAL_DT_EULER,
            sts_dt_exp: PHYSICAL_DT_EULER,
            rkc_stages: 10,
            rkl_stages: 20,
            rkc_damping: 0.0,
        },
    })
}

const YEAR_S: f64 = 365.0 * 86_400.0;
const DAY_S: f64 = 86_400.0;

/// Synthetic climate, hourly over `days` days: outdoor temperature with annual
/// and diurnal cycles between 271 K and 301 K, outdoor moisture content
/// between 0.25 and 0.39, indoor 291.3 ± 2 K and 0.45 ± 0.03.
pub fn synthetic_climate(days: usize) -> BoundarySeries {
    let rows = days * 24 + 1;
    let mut times = Vec::with_capacity(rows);
    let mut values: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(rows)).collect();
    for i in 0..rows {
        let t = i as f64 * 3600.0;
        let a = (2.0 * PI * t / YEAR_S).cos();
        let d = (2.0 * PI * t / DAY_S).cos();
        let row = [
            round6(286.0 - 11.0 * a - 4.0 * d),
            round6(0.32 + 0.06 * a + 0.01 * d),
            round6(291.3 - 2.0 * a),
            round6(0.45 + 0.03 * a),
        ];
        times.push(t);
        for (col, x) in values.iter_mut().zip(row) {
            col.push(x);
        }
    }
    BoundarySeries {
        time_column: "time_s".into(),
        columns: ["T_out_K", "theta_out", "T_in_K", "theta_in"].map(String::from).to_vec(),
        times,
        values,
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Writes [`synthetic_climate`] over 366 days as CSV.
pub fn write_synthetic_climate(path: impl AsRef<Path>) -> Result<(), CaseError> {
    let path = path.as_ref();
    let s = synthetic_climate(366);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| CaseError::io(path, e))?);
    let io = |e| CaseError::io(path, e);
    writeln!(w, "# SYNTHETIC climate for the rammed-earth drying study (not measured data).").map_err(io)?;
    writeln!(w, "# Hourly rows; outdoor face at x = 0, indoor face at x = L.").map_err(io)?;
    writeln!(w, "{},{}", s.time_column, s.columns.join(",")).map_err(io)?;
    for (i, t) in s.times.iter().enumerate() {
        writeln!(
            w,
            "{},{:.6},{:.6},{:.6},{:.6}",
            *t as u64, s.values[0][i], s.values[1][i], s.values[2][i], s.values[3][i]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

const BUNDLED_CLIMATE: &str = include_str!("../../data/synthetic_climate.csv");

/// The bundled synthetic climate series.
pub fn default_climate() -> Result<BoundarySeries, CaseError> {
    parse_boundary_series(BUNDLED_CLIMATE.as_bytes(), "synthetic_climate.csv")
}

/// Builds the case a config describes: the verification preset (with `dx`
/// and `tau` overrides) or a custom wall.
///
/// With a `[scaling]` table, layer thicknesses and `dx` are in metres, `tau`
/// and step sizes in seconds, and the layer laws are dimensional; otherwise
/// everything is dimensionless.
pub fn case_from_config(cfg: &CaseConfig) -> Result<Case, CaseError> {
    match cfg.kind {
        CaseKind::Verification => {
            let mut case = verification_case(cfg.dx.unwrap_or(VERIFICATION_DX))?;
            if let Some(t) = &cfg.tau {
                case.tau = t.value()?;
            }
            apply_scheme_defaults(&mut case.defaults, cfg, 1.0)?;
            Ok(case)
        }
        CaseKind::Custom => custom_case(cfg),
        CaseKind::Physical => Err(CaseError::Config("physical cases are built per layout".into())),
    }
}

fn apply_scheme_defaults(d: &mut SchemeDefaults, cfg: &CaseConfig, time_unit: f64) -> Result<(), CaseError> {
    for s in &cfg.schemes {
        let dt = s.dt.as_ref().map(|x| x.value()).transpose()?.map(|x| x / time_unit);
        match s.scheme {
            Scheme::Euler => d.euler_dt = dt.unwrap_or(d.euler_dt),
            Scheme::DufortFrankel => d.df_dt = dt.unwrap_or(d.df_dt),
            Scheme::Rkc => {
                d.sts_dt_exp = dt.unwrap_or(d.sts_dt_exp);
                d.rkc_stages = s.ns.unwrap_or(d.rkc_stages);
                d.rkc_damping = s.damping.unwrap_or(d.rkc_damping);
            }
            Scheme::Rkl => {
                d.sts_dt_exp = dt.unwrap_or(d.sts_dt_exp);
                d.rkl_stages = s.ns.unwrap_or(d.rkl_stages);
            }
        }
    }
    Ok(())
}

fn material(spec: &MaterialSpec, water: WaterProperties) -> Result<Arc<dyn CoefficientModel>, CaseError> {
    Ok(match spec {
        MaterialSpec::Builtin(name) => builtin_material(name, water)?,
        MaterialSpec::Constant(c) => constant(*c, "constant"),
        MaterialSpec::Polynomial { d_theta, d_t, c_t, k_t, k_tm } => Arc::new(PolynomialMaterial {
            name: "polynomial".into(),
            d_theta: d_theta.clone(),
            d_t: d_t.clone(),
            c_t: c_t.clone(),
            k_t: k_t.clone(),
            k_tm: k_tm.clone(),
        }),
    })
}

fn custom_case(cfg: &CaseConfig) -> Result<Case, CaseError> {
    let missing = |what: &str| CaseError::Config(format!("custom case needs {what}"));
    let water = cfg.physical.as_ref().and_then(|p| p.water).unwrap_or_default();
    let scaling = cfg.scaling;
    let (time_unit, length_unit) = scaling.map_or((1.0, 1.0), |s| (s.time, s.length));

    let mut specs = Vec::with_capacity(cfg.layers.len());
    for l in &cfg.layers {
        let m = material(&l.material, water)?;
        let m: Arc<dyn CoefficientModel> = match &scaling {
            Some(s) => Arc::new(Dimensionless { inner: m, scales: s.coefficient_scales() }),
            None => m,
        };
        specs.push((m, l.thickness / length_unit));
    }
    let wall = build_wall(specs)?;
    let dx = cfg.dx.ok_or_else(|| missing("dx"))? / length_unit;
    let grid = Grid1D::with_spacing(wall.total_length(), dx)?;
    wall.interface_nodes(&grid)?;

    let groups = match (cfg.groups, &scaling) {
        (Some(g), _) => g,
        (None, Some(s)) => DimensionlessGroups::from_scaling(s, &SideExchange::default(), &SideExchange::default(), 0.0)
            .map_err(|e| CaseError::Config(e.to_string()))?,
        (None, None) => return Err(missing("[groups] or [scaling]")),
    };
    groups.validate().map_err(|e| CaseError::Config(e.to_string()))?;

    let boundary = cfg.boundary.as_ref().ok_or_else(|| missing("[boundary]"))?;
    let mut cache: HashMap<PathBuf, BoundarySeries> = HashMap::new();
    let mut time_fn = |f: &ForcingSpec| -> Result<TimeFn, CaseError> {
        Ok(match f {
            ForcingSpec::Constant(c) => TimeFn::Constant(*c),
            ForcingSpec::SinSquared { base, amplitude, period } => {
                TimeFn::SinSquared { base: *base, amplitude: *amplitude, period: *period }
            }
            ForcingSpec::Csv { csv, column, time_scale, scale } => {
                if !cache.contains_key(csv) {
                    cache.insert(csv.clone(), ingest_boundary_series(csv)?);
                }
                cache[csv].time_fn(column, *time_scale, *scale)?
            }
        })
    };
    let mut side = |s: &SideSpec| -> Result<SideForcing, CaseError> {
        let (u, v) = (time_fn(&s.u)?, time_fn(&s.v)?);
        let mut f = match s.kind {
            BoundaryKind::Robin => SideForcing::robin(u, v),
            BoundaryKind::Dirichlet => SideForcing::dirichlet(u, v),
        };
        if let Some(r) = &s.radiation {
            f.radiation = time_fn(r)?;
        }
        if let Some(g) = &s.extra_mass_flux {
            f.extra_mass_flux = time_fn(g)?;
        }
        if let Some(g) = &s.extra_heat_flux {
            f.extra_heat_flux = time_fn(g)?;
        }
        Ok(f)
    };
    let forcing = BoundaryForcing { left: side(&boundary.left)?, right: side(&boundary.right)? };

    let tau = cfg.tau.as_ref().ok_or_else(|| missing("tau"))?.value()? / time_unit;
    forcing.check_coverage(tau)?;

    let n = grid.node_count();
    let mut initial = StateField::uniform(n, f64::NAN, f64::NAN);
    for (i, &x) in grid.positions().iter().enumerate() {
        let layer = &cfg.layers[wall.layer_index(x)?];
        let u = layer.initial_u.or(cfg.initial.map(|s| s.u));
        let v = layer.initial_v.or(cfg.initial.map(|s| s.v));
        initial.u[i] = u.ok_or_else(|| missing("an initial u"))?;
        initial.v[i] = v.ok_or_else(|| missing("an initial v"))?;
    }

    let mut case = Case {
        name: cfg.name.clone().unwrap_or_else(|| "custom".into()),
        wall,
        grid,
        groups,
        forcing,
        initial,
        tau,
        scaling,
        days_per_unit: scaling.map(|s| s.time / 86_400.0),
        length_scale: length_unit,
        material_domain: 0..n,
        source: None,
        defaults: SchemeDefaults {
            euler_dt: f64::NAN,
            df_dt: f64::NAN,
            sts_dt_exp: f64::NAN,
            rkc_stages: 10,
            rkl_stages: 20,
            rkc_damping: 0.0,
        },
    };
    // steps not given in the config follow from the explicit limit at the initial state
    let est = case.operator()?.estimate_lambda_max(&case.initial)?;
    let dt_exp = if est.is_bounded() { est.dt_exp } else { case.tau.max(f64::MIN_POSITIVE) };
    case.defaults.euler_dt = 0.9 * dt_exp;
    case.defaults.df_dt = 10.0 * 0.9 * dt_exp;
    case.defaults.sts_dt_exp = 0.9 * dt_exp;
    apply_scheme_defaults(&mut case.defaults, cfg, time_unit)?;
    Ok(case)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verification_preset_passes_self_check() {
        let c = verification_case(VERIFICATION_DX).unwrap();
        assert_eq!(c.grid.node_count(), 101);
        assert_eq!(c.wall.interface_nodes(&c.grid).unwrap(), vec![60]);
        verification_self_check(&c).unwrap();
        let mut bad = c.clone();
        bad.groups.left.mass_moisture = 25.0;
        assert!(verification_self_check(&bad).is_err());
    }

    #[test]
    fn bundled_climate_matches_generator() {
        let bundled = default_climate().unwrap();
        assert_eq!(bundled, synthetic_climate(366));
        let (t_lo, t_hi) = bundled.values[0].iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(t_lo >= 271.0 - 1e-9 && t_hi <= 301.0 + 1e-9);
        let th = &bundled.values[1];
        assert!(th.iter().all(|&x| (0.25 - 1e-9..=0.39 + 1e-9).contains(&x)));
    }

    #[test]
    fn physical_geometry() {
        let climate = synthetic_climate(2);
        let c = physical_case(PhysicalLayout::InsRe, &climate, PHYSICAL_DX, DAY_S, WaterProperties::default()).unwrap();
        assert_eq!(c.grid.node_count(), 126);
        assert_eq!(c.material_domain, 25..126);
        assert!((c.initial.v[24] - 0.1).abs() < 1e-15);
        // the interface node belongs to the left (insulation) layer
        assert!((c.initial.v[25] - 0.1).abs() < 1e-15);
        assert_eq!(c.initial.v[26], 1.0);
        let c = physical_case(PhysicalLayout::ReIns, &climate, PHYSICAL_DX, DAY_S, WaterProperties::default()).unwrap();
        assert_eq!(c.material_domain, 0..101);
        let c = physical_case(PhysicalLayout::Re, &climate, PHYSICAL_DX, DAY_S, WaterProperties::default()).unwrap();
        assert_eq!(c.grid.node_count(), 101);
        assert!(physical_case(PhysicalLayout::Re, &climate, PHYSICAL_DX, 3.0 * DAY_S, WaterProperties::default()).is_err());
    }

    #[test]
    fn physical_groups_from_scaling() {
        let s = physical_scaling(0.625, WaterProperties::default()).unwrap();
        assert!((s.k_t - 3.25).abs() < 1e-12);
        assert!((s.c_t - (1730.0 * 648.0 + 1000.0 * 4180.0 * 0.53)).abs() < 1e-6);
        let g = DimensionlessGroups::from_scaling(&s, &SideExchange::default(), &SideExchange::default(), 0.0).unwrap();
        assert!((g.fo_m - 1e-7 / (0.625f64.powi(2) * 1000.0)).abs() < 1e-20);
        assert!((g.gamma - 1e-10 * 291.3 / (1e-7 * 0.53)).abs() < 1e-12);
    }
}
