use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_duration, CaseError};
use crate::dimensionless::{DimensionlessGroups, ScalingSet};
use crate::integrators::Scheme;
use crate::model::{BoundaryKind, Coefficients, WaterProperties};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    #[default]
    Verification,
    Physical,
    Custom,
}

/// Duration given as a number (run time units) or a string with a
/// `s`/`min`/`h`/`d` suffix (seconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DurationSpec {
    Number(f64),
    Text(String),
}

impl DurationSpec {
    pub fn value(&self) -> Result<f64, CaseError> {
        match self {
            DurationSpec::Number(x) if *x >= 0.0 && x.is_finite() => Ok(*x),
            DurationSpec::Number(x) => Err(CaseError::Config(format!("duration {x} must be non-negative"))),
            DurationSpec::Text(s) => parse_duration(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Euler / Du Fort–Frankel step, or `dt_exp` for STS schemes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<DurationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
}

/// Coefficient law of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    /// `table1_mat1`, `table1_mat2`, `table3_re` or `table3_ins`.
    Builtin(String),
    Constant(Coefficients),
    /// Ascending powers of `v` for each coefficient.
    Polynomial {
        d_theta: Vec<f64>,
        d_t: Vec<f64>,
        c_t: Vec<f64>,
        k_t: Vec<f64>,
        k_tm: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub material: MaterialSpec,
    pub thickness: f64,
    /// Initial `(u, v)` inside this layer; falls back to `[initial]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_v: Option<f64>,
}

/// A scalar function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ForcingSpec {
    Constant(f64),
    SinSquared {
        base: f64,
        amplitude: f64,
        period: f64,
    },
    Csv {
        csv: PathBuf,
        column: String,
        /// Series time units per run time unit.
        #[serde(default = "one")]
        time_scale: f64,
        /// Multiplier applied to the column values.
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSpec {
    pub kind: BoundaryKind,
    pub u: ForcingSpec,
    pub v: ForcingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radiation: Option<ForcingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_mass_flux: Option<ForcingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_heat_flux: Option<ForcingSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub left: SideSpec,
    pub right: SideSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub ns: Vec<usize>,
    #[serde(default)]
    pub schemes: Vec<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    /// Any of `ins-re`, `re-ins`, `re`; all three when empty.
    #[serde(default)]
    pub layouts: Vec<String>,
    /// Climate CSV (`time_s, T_out_K, theta_out, T_in_K, theta_in`); the
    /// bundled synthetic series when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub climate: Option<PathBuf>,
    /// Scheme producing the drying curves (default `rkl`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_scheme: Option<Scheme>,
    /// Layout used for the scheme-comparison table (default `re`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison_layout: Option<String>,
    /// Spacing of the drying-curve samples (default `1h`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval: Option<DurationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub water: Option<WaterProperties>,
}

/// Complete description of a run, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default)]
    pub kind: CaseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<DurationSpec>,
    /// Grid spacing (dimensionless, or metres for the physical case).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Reference step refinement factor relative to the Euler step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_refinement: Option<usize>,
    #[serde(default)]
    pub schemes: Vec<SchemeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalConfig>,
    #[serde(default)]
    pub layers: Vec<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<DimensionlessGroups>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
}

pub fn parse_case_config(text: &str) -> Result<CaseConfig, CaseError> {
    let cfg: CaseConfig = toml::from_str(text).map_err(|e| CaseError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_case_config(path: impl AsRef<Path>) -> Result<CaseConfig, CaseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CaseError::io(path, e))?;
    let mut cfg = parse_case_config(&text)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

impl CaseConfig {
    pub fn validate(&self) -> Result<(), CaseError> {
        let bad = |m: String| Err(CaseError::Config(m));
        if let Some(tau) = &self.tau {
            let t = tau.value()?;
            if self.kind != CaseKind::Verification && t <= 0.0 {
                return bad(format!("tau must be positive, got {t}"));
            }
        }
        if let Some(dx) = self.dx {
            if !(dx > 0.0 && dx.is_finite()) {
                return bad(format!("dx must be positive, got {dx}"));
            }
        }
        for s in &self.schemes {
            if s.ns == Some(0) {
                return bad(format!("scheme {} needs ns >= 1", s.scheme));
            }
            if let Some(dt) = &s.dt {
                if dt.value()? <= 0.0 {
                    return bad(format!("scheme {} needs a positive dt", s.scheme));
                }
            }
        }
        if self.reference_refinement == Some(0) {
            return bad("reference_refinement must be at least 1".into());
        }
        if self.kind == CaseKind::Custom {
            if self.layers.is_empty() {
                return bad("custom case needs at least one [[layers]] entry".into());
            }
            if self.groups.is_none() && self.scaling.is_none() {
                return bad("custom case needs [groups] or [scaling]".into());
            }
            if self.boundary.is_none() {
                return bad("custom case needs [boundary.left] and [boundary.right]".into());
            }
            if self.tau.is_none() {
                return bad("custom case needs tau".into());
            }
            let has_initial = self.initial.is_some()
                || self.layers.iter().all(|l| l.initial_u.is_some() && l.initial_v.is_some());
            if !has_initial {
                return bad("custom case needs [initial] or per-layer initial_u/initial_v".into());
            }
        }
        Ok(())
    }

    /// Makes relative CSV paths relative to the config file's directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(b) = &mut self.boundary {
            for side in [&mut b.left, &mut b.right] {
                for f in [Some(&mut side.u), Some(&mut side.v)]
                    .into_iter()
                    .chain([side.radiation.as_mut(), side.extra_mass_flux.as_mut(), side.extra_heat_flux.as_mut()])
                    .flatten()
                {
                    if let ForcingSpec::Csv { csv, .. } = f {
                        fix(csv);
                    }
                }
            }
        }
        if let Some(p) = &mut self.physical {
            if let Some(c) = &mut p.climate {
                fix(c);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_verification() {
        let c = parse_case_config("kind = \"verification\"\n").unwrap();
        assert_eq!(c.kind, CaseKind::Verification);
        assert!(c.schemes.is_empty());
    }

    #[test]
    fn custom_case_round_trip() {
        let text = r#"
kind = "custom"
name = "two layers"
tau = 0.5
dx = 0.02

[[schemes]]
scheme = "euler"
dt = 1e-4

[[schemes]]
scheme = "rkl"
ns = 12

[[layers]]
material = "table1_mat1"
thickness = 0.6

[[layers]]
material = { d_theta = 0.1, d_t = 0.0, c_t = 1.0, k_t = 0.2, k_tm = 0.0 }
thickness = 0.4

[groups]
fo_m = 0.1
fo_t = 0.1
gamma = 0.0
delta = 0.0
absorptivity = 0.0
left = { mass_sat = 0.0, mass_moisture = 1.0, heat_temperature = 1.0, heat_sat = 0.0, heat_moisture = 0.0, heat_radiation = 0.0 }
right = { mass_sat = 0.0, mass_moisture = 1.0, heat_temperature = 1.0, heat_sat = 0.0, heat_moisture = 0.0, heat_radiation = 0.0 }

[boundary.left]
kind = "robin"
u = { base = 1.0, amplitude = 0.2, period = 2.0 }
v = 1.0

[boundary.right]
kind = "dirichlet"
u = { csv = "data.csv", column = "u" }
v = 1

[initial]
u = 1.0
v = 1.0
"#;
        let mut c = parse_case_config(text).unwrap();
        assert_eq!(c.layers.len(), 2);
        assert!(matches!(c.layers[0].material, MaterialSpec::Builtin(ref s) if s == "table1_mat1"));
        assert!(matches!(c.layers[1].material, MaterialSpec::Constant(_)));
        let b = c.boundary.as_ref().unwrap();
        assert!(matches!(b.left.u, ForcingSpec::SinSquared { .. }));
        assert!(matches!(b.right.v, ForcingSpec::Constant(x) if x == 1.0));
        c.resolve_paths(Path::new("/cases"));
        match &c.boundary.as_ref().unwrap().right.u {
            ForcingSpec::Csv { csv, time_scale, .. } => {
                assert_eq!(csv, Path::new("/cases/data.csv"));
                assert_eq!(*time_scale, 1.0);
            }
            other => panic!("{other:?}"),
        }
        let again = parse_case_config(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn physical_durations() {
        let c = parse_case_config(
            "kind = \"physical\"\ntau = \"7d\"\n[[schemes]]\nscheme = \"euler\"\ndt = \"3.4e-2min\"\n",
        )
        .unwrap();
        assert_eq!(c.tau.unwrap().value().unwrap(), 7.0 * 86_400.0);
        assert!((c.schemes[0].dt.as_ref().unwrap().value().unwrap() - 2.04).abs() < 1e-12);
    }

    #[test]
    fn config_errors() {
        assert!(parse_case_config("kind = \"custom\"\n").is_err());
        assert!(parse_case_config("kind = \"bogus\"\n").is_err());
        assert!(parse_case_config("dx = -1.0\n").is_err());
        assert!(parse_case_config("colour = 3\n").is_err());
        assert!(parse_case_config("[[schemes]]\nscheme = \"rkc\"\nns = 0\n").is_err());
        assert!(parse_case_config("kind = \"physical\"\ntau = \"3 fortnights\"\n").is_err());
    }
}
