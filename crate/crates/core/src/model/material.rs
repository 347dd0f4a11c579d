use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// The five transport and storage coefficients of the coupled system.
///
/// In dimensionless form these are `D_θ*, D_T*, c_T*, k_T*, k_TM*`; dimensional
/// models return m²/s, m²/(s·K), J/(m³·K), W/(m·K) and kg/(m·s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub d_theta: f64,
    pub d_t: f64,
    pub c_t: f64,
    pub k_t: f64,
    pub k_tm: f64,
}

impl Coefficients {
    pub const fn new(d_theta: f64, d_t: f64, c_t: f64, k_t: f64, k_tm: f64) -> Self {
        Self { d_theta, d_t, c_t, k_t, k_tm }
    }
}

/// Material coefficient law `(u, v) -> Coefficients`.
///
/// Dimensional laws read their arguments as `(T [K], θ [-])`; wrap them in
/// [`Dimensionless`] to feed the dimensionless operator.
pub trait CoefficientModel: Send + Sync + fmt::Debug {
    fn coefficients(&self, u: f64, v: f64) -> Coefficients;

    /// True when the coefficients do not depend on the state.
    fn is_state_independent(&self) -> bool {
        false
    }

    fn label(&self) -> String;
}

/// Rectangle of `(u, v)` values where coefficient laws are trusted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleBox {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for AdmissibleBox {
    fn default() -> Self {
        Self { u_min: 0.5, u_max: 2.5, v_min: 0.0, v_max: 2.0 }
    }
}

impl AdmissibleBox {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        (self.u_min..=self.u_max).contains(&u) && (self.v_min..=self.v_max).contains(&v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantMaterial {
    pub name: String,
    pub coefficients: Coefficients,
}

impl ConstantMaterial {
    pub fn new(name: impl Into<String>, coefficients: Coefficients) -> Self {
        Self { name: name.into(), coefficients }
    }
}

impl CoefficientModel for ConstantMaterial {
    fn coefficients(&self, _u: f64, _v: f64) -> Coefficients {
        self.coefficients
    }

    fn is_state_independent(&self) -> bool {
        true
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Density and specific heat of liquid water, used in `c_T = ρ₀c₀ + ρ₂c₂θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaterProperties {
    /// kg/m³
    pub density: f64,
    /// J/(kg·K)
    pub specific_heat: f64,
}

impl Default for WaterProperties {
    fn default() -> Self {
        Self { density: 1000.0, specific_heat: 4180.0 }
    }
}

/// Rammed earth, dimensional; arguments are `(T, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RammedEarth {
    pub water: WaterProperties,
}

impl CoefficientModel for RammedEarth {
    fn coefficients(&self, _temperature: f64, theta: f64) -> Coefficients {
        let w = self.water;
        Coefficients {
            d_theta: 1e-7 + 2.4e-9 * (theta - 0.1),
            d_t: 1e-10,
            c_t: 1730.0 * 648.0 + w.density * w.specific_heat * theta,
            k_t: 5.0 * theta + 0.6,
            k_tm: 4e-18,
        }
    }

    fn label(&self) -> String {
        "table3_re".into()
    }
}

/// Glass-wool insulation, dimensional; arguments are `(T, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Insulation {
    pub water: WaterProperties,
}

impl CoefficientModel for Insulation {
    fn coefficients(&self, _temperature: f64, theta: f64) -> Coefficients {
        let w = self.water;
        Coefficients {
            d_theta: 1e-20,
            d_t: 0.0,
            c_t: 146.0 * 840.0 + w.density * w.specific_heat * theta,
            k_t: 0.4875,
            k_tm: 1e-17,
        }
    }

    fn label(&self) -> String {
        "table3_ins".into()
    }
}

/// Each coefficient is a polynomial in the moisture argument (ascending powers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMaterial {
    pub name: String,
    pub d_theta: Vec<f64>,
    pub d_t: Vec<f64>,
    pub c_t: Vec<f64>,
    pub k_t: Vec<f64>,
    pub k_tm: Vec<f64>,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl CoefficientModel for PolynomialMaterial {
    fn coefficients(&self, _u: f64, v: f64) -> Coefficients {
        Coefficients {
            d_theta: horner(&self.d_theta, v),
            d_t: horner(&self.d_t, v),
            c_t: horner(&self.c_t, v),
            k_t: horner(&self.k_t, v),
            k_tm: horner(&self.k_tm, v),
        }
    }

    fn is_state_independent(&self) -> bool {
        [&self.d_theta, &self.d_t, &self.c_t, &self.k_t, &self.k_tm]
            .iter()
            .all(|p| p.iter().skip(1).all(|c| *c == 0.0))
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Reference values used to scale a dimensional coefficient law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientScales {
    pub temperature: f64,
    pub moisture: f64,
    pub d_theta: f64,
    pub d_t: f64,
    pub c_t: f64,
    pub k_t: f64,
    pub k_tm: f64,
}

/// Dimensionless view of a dimensional law: evaluates the inner model at
/// `(T°·u, θ°·v)` and divides each coefficient by its reference value.
#[derive(Debug, Clone)]
pub struct Dimensionless {
    pub inner: Arc<dyn CoefficientModel>,
    pub scales: CoefficientScales,
}

impl CoefficientModel for Dimensionless {
    fn coefficients(&self, u: f64, v: f64) -> Coefficients {
        let s = &self.scales;
        let c = self.inner.coefficients(s.temperature * u, s.moisture * v);
        Coefficients {
            d_theta: c.d_theta / s.d_theta,
            d_t: c.d_t / s.d_t,
            c_t: c.c_t / s.c_t,
            k_t: c.k_t / s.k_t,
            k_tm: c.k_tm / s.k_tm,
        }
    }

    fn is_state_independent(&self) -> bool {
        self.inner.is_state_independent()
    }

    fn label(&self) -> String {
        format!("{}*", self.inner.label())
    }
}

/// Dimensionless material of the two-layer verification wall (left layer).
pub const TABLE1_MAT1: Coefficients = Coefficients::new(0.3, 2.1, 0.1, 0.5, 0.4);
/// Dimensionless material of the two-layer verification wall (right layer).
pub const TABLE1_MAT2: Coefficients = Coefficients::new(0.1, 3.2, 0.3, 0.2, 0.1);

/// Looks up a named built-in material.
pub fn builtin_material(
    name: &str,
    water: WaterProperties,
) -> Result<Arc<dyn CoefficientModel>, ModelError> {
    Ok(match name {
        "table1_mat1" => Arc::new(ConstantMaterial::new(name, TABLE1_MAT1)),
        "table1_mat2" => Arc::new(ConstantMaterial::new(name, TABLE1_MAT2)),
        "table3_re" => Arc::new(RammedEarth { water }),
        "table3_ins" => Arc::new(Insulation { water }),
        other => return Err(ModelError::UnknownMaterial(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rammed_earth_correction_vanishes_at_reference_moisture() {
        let c = RammedEarth::default().coefficients(291.3, 0.1);
        assert_eq!(c.d_theta, 1e-7);
        assert_eq!(c.k_t, 1.1);
    }

    #[test]
    fn heat_capacity_uses_water_constants() {
        let c = RammedEarth::default().coefficients(291.3, 0.53);
        assert!((c.c_t - (1730.0 * 648.0 + 1000.0 * 4180.0 * 0.53)).abs() < 1e-6);
        let heavy = RammedEarth { water: WaterProperties { density: 1100.0, specific_heat: 4180.0 } };
        assert!(heavy.coefficients(291.3, 0.53).c_t > c.c_t);
    }

    #[test]
    fn polynomial_matches_table3_re_form() {
        let p = PolynomialMaterial {
            name: "re_poly".into(),
            d_theta: vec![1e-7 - 2.4e-10, 2.4e-9],
            d_t: vec![1e-10],
            c_t: vec![1730.0 * 648.0, 4.18e6],
            k_t: vec![0.6, 5.0],
            k_tm: vec![4e-18],
        };
        let a = p.coefficients(0.0, 0.3);
        let b = RammedEarth::default().coefficients(0.0, 0.3);
        assert!((a.d_theta - b.d_theta).abs() < 1e-20);
        assert!((a.c_t - b.c_t).abs() < 1e-6);
        assert!(!p.is_state_independent());
    }

    #[test]
    fn dimensionless_wrapper_scales_arguments_and_values() {
        let scales = CoefficientScales {
            temperature: 291.3,
            moisture: 0.53,
            d_theta: 1e-7,
            d_t: 1e-10,
            c_t: 1e6,
            k_t: 1.0,
            k_tm: 1e-17,
        };
        let m = Dimensionless { inner: Arc::new(RammedEarth::default()), scales };
        let c = m.coefficients(1.0, 1.0);
        let d = RammedEarth::default().coefficients(291.3, 0.53);
        assert!((c.k_t - d.k_t).abs() < 1e-15);
        assert!((c.c_t - d.c_t / 1e6).abs() < 1e-12);
    }

    #[test]
    fn unknown_builtin() {
        assert!(builtin_material("granite", WaterProperties::default()).is_err());
    }
}
