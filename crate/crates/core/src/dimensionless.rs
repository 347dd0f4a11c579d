//! Reference scales, Fourier/Biot groups and state scaling.
//!
//! Dimensionless variables are plain ratios: `u = T/T°`, `v = θ/θ°`,
//! `x* = x/ℓ`, `t* = t/t°`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CoefficientScales, StateField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("reference scale '{0}' must be strictly positive and finite")]
    NonPositive(&'static str),
    #[error("dimensionless group '{0}' is not finite and non-negative")]
    InvalidGroup(&'static str),
}

/// Reference scales and physical constants used to form the dimensionless groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSet {
    /// t° [s]
    pub time: f64,
    /// ℓ [m]
    pub length: f64,
    /// T° [K]
    pub temperature: f64,
    /// θ° [-]
    pub moisture: f64,
    /// P_sat° [Pa]
    pub p_sat: f64,
    /// φ_∞° [-]
    pub phi_inf: f64,
    /// g_∞° [W/m²]
    pub irradiance: f64,
    pub d_theta: f64,
    pub d_t: f64,
    pub c_t: f64,
    pub k_t: f64,
    pub k_tm: f64,
    /// ρ₂ [kg/m³]
    pub rho_water: f64,
    /// R₁ [J/(kg·K)]
    pub r_vapor: f64,
    /// M [kg/mol]
    pub molar_mass: f64,
    /// L₁₂° [J/kg]
    pub latent_heat: f64,
    /// h_M [m/s]
    pub h_m: f64,
    /// h_T [W/(m²·K)]
    pub h_t: f64,
}

impl ScalingSet {
    pub fn validate(&self) -> Result<(), ScalingError> {
        let fields = [
            ("time", self.time),
            ("length", self.length),
            ("temperature", self.temperature),
            ("moisture", self.moisture),
            ("p_sat", self.p_sat),
            ("phi_inf", self.phi_inf),
            ("irradiance", self.irradiance),
            ("d_theta", self.d_theta),
            ("d_t", self.d_t),
            ("c_t", self.c_t),
            ("k_t", self.k_t),
            ("k_tm", self.k_tm),
            ("rho_water", self.rho_water),
            ("r_vapor", self.r_vapor),
            ("molar_mass", self.molar_mass),
            ("latent_heat", self.latent_heat),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ScalingError::NonPositive(name));
            }
        }
        for (name, value) in [("h_m", self.h_m), ("h_t", self.h_t)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ScalingError::NonPositive(name));
            }
        }
        Ok(())
    }

    pub fn coefficient_scales(&self) -> CoefficientScales {
        CoefficientScales {
            temperature: self.temperature,
            moisture: self.moisture,
            d_theta: self.d_theta,
            d_t: self.d_t,
            c_t: self.c_t,
            k_t: self.k_t,
            k_tm: self.k_tm,
        }
    }
}

/// `(Fo_M, Fo_T) = (t°·D_θ°/(ℓ²·ρ₂), t°·k_T°/(ℓ²·c_T°))`.
pub fn compute_fourier_numbers(s: &ScalingSet) -> (f64, f64) {
    let l2 = s.length * s.length;
    (s.time * s.d_theta / (l2 * s.rho_water), s.time * s.k_t / (l2 * s.c_t))
}

/// `(γ, δ) = (D_T°·T°/(D_θ°·θ°), L₁₂°·k_TM°·θ°/(k_T°·T°))`, the ratios left in
/// front of the cross-diffusion terms once both equations are scaled.
pub fn compute_coupling_parameters(s: &ScalingSet) -> (f64, f64) {
    (
        s.d_t * s.temperature / (s.d_theta * s.moisture),
        s.latent_heat * s.k_tm * s.moisture / (s.k_t * s.temperature),
    )
}

/// Surface data entering the Biot numbers of one face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideExchange {
    /// φ_∞* [-]
    pub phi_inf: f64,
    /// dφ̃/dθ [-]
    pub dphi_dtheta: f64,
    /// P*_sat/u at the evaluation point [-]
    pub p_sat_over_u: f64,
}

impl Default for SideExchange {
    fn default() -> Self {
        Self { phi_inf: 1.0, dphi_dtheta: 1.0, p_sat_over_u: 1.0 }
    }
}

/// Biot numbers of one face.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BiotSet {
    /// Bi_M^sat
    pub mass_sat: f64,
    /// Bi_M^θ
    pub mass_moisture: f64,
    /// Bi_T^T
    pub heat_temperature: f64,
    /// Bi_T^sat
    pub heat_sat: f64,
    /// Bi_T^θ
    pub heat_moisture: f64,
    /// Bi_T^g
    pub heat_radiation: f64,
}

impl BiotSet {
    fn values(&self) -> [(&'static str, f64); 6] {
        [
            ("mass_sat", self.mass_sat),
            ("mass_moisture", self.mass_moisture),
            ("heat_temperature", self.heat_temperature),
            ("heat_sat", self.heat_sat),
            ("heat_moisture", self.heat_moisture),
            ("heat_radiation", self.heat_radiation),
        ]
    }

    pub fn has_saturation_terms(&self) -> bool {
        self.mass_sat != 0.0 || self.heat_sat != 0.0
    }
}

pub fn compute_biot_numbers(s: &ScalingSet, side: &SideExchange) -> Result<BiotSet, ScalingError> {
    s.validate()?;
    let vapour = s.h_m * s.molar_mass / s.r_vapor;
    let p_over_t = s.p_sat / s.temperature;
    let l = s.length;
    Ok(BiotSet {
        mass_sat: l * s.phi_inf * vapour / (s.d_theta * s.moisture) * p_over_t * side.phi_inf,
        mass_moisture: l * vapour / s.d_theta * p_over_t * side.dphi_dtheta * side.p_sat_over_u,
        heat_temperature: l * s.h_t / s.k_t,
        heat_sat: s.latent_heat * l * s.phi_inf * vapour / (s.k_t * s.temperature)
            * p_over_t
            * side.phi_inf,
        heat_moisture: s.latent_heat * l * s.moisture * vapour / (s.k_t * s.temperature)
            * p_over_t
            * side.dphi_dtheta
            * side.p_sat_over_u,
        heat_radiation: l * s.irradiance / (s.k_t * s.temperature),
    })
}

/// Every group entering the dimensionless model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessGroups {
    pub fo_m: f64,
    pub fo_t: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Short-wave absorptivity α [-]
    pub absorptivity: f64,
    pub left: BiotSet,
    pub right: BiotSet,
}

impl DimensionlessGroups {
    pub fn from_scaling(
        s: &ScalingSet,
        left: &SideExchange,
        right: &SideExchange,
        absorptivity: f64,
    ) -> Result<Self, ScalingError> {
        s.validate()?;
        let (fo_m, fo_t) = compute_fourier_numbers(s);
        let (gamma, delta) = compute_coupling_parameters(s);
        let groups = Self {
            fo_m,
            fo_t,
            gamma,
            delta,
            absorptivity,
            left: compute_biot_numbers(s, left)?,
            right: compute_biot_numbers(s, right)?,
        };
        groups.validate()?;
        Ok(groups)
    }

    pub fn validate(&self) -> Result<(), ScalingError> {
        let scalars = [
            ("fo_m", self.fo_m),
            ("fo_t", self.fo_t),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("absorptivity", self.absorptivity),
        ];
        for (name, value) in scalars.into_iter().chain(self.left.values()).chain(self.right.values()) {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ScalingError::InvalidGroup(name));
            }
        }
        Ok(())
    }
}

/// Physical `(T, θ, t)` to dimensionless `(u, v, t*)`.
pub fn nondimensionalize(state: &StateField, s: &ScalingSet) -> StateField {
    StateField {
        u: state.u.iter().map(|t| t / s.temperature).collect(),
        v: state.v.iter().map(|th| th / s.moisture).collect(),
        time: state.time / s.time,
    }
}

/// Inverse of [`nondimensionalize`].
pub fn redimensionalize(state: &StateField, s: &ScalingSet) -> StateField {
    StateField {
        u: state.u.iter().map(|u| u * s.temperature).collect(),
        v: state.v.iter().map(|v| v * s.moisture).collect(),
        time: state.time * s.time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn sample() -> ScalingSet {
        ScalingSet {
            time: 3600.0,
            length: 0.5,
            temperature: 291.3,
            moisture: 0.53,
            p_sat: 2000.0,
            phi_inf: 0.6,
            irradiance: 300.0,
            d_theta: 1e-7,
            d_t: 1e-10,
            c_t: 1.5e6,
            k_t: 1.5,
            k_tm: 1e-17,
            rho_water: 1000.0,
            r_vapor: 461.5,
            molar_mass: 0.018,
            latent_heat: 2.5e6,
            h_m: 2e-8,
            h_t: 10.0,
        }
    }

    #[test]
    fn time_scale_normalising_moisture_fourier() {
        let mut s = sample();
        s.time = s.length * s.length * s.rho_water / s.d_theta;
        let (fo_m, _) = compute_fourier_numbers(&s);
        assert!((fo_m - 1.0).abs() < 1e-14);
    }

    #[test]
    fn verification_fourier_targets_reachable() {
        // choose t° and c_T° so that Fo_M = 9e-2 and Fo_T = 7e-2
        let mut s = sample();
        s.time = 9e-2 * s.length * s.length * s.rho_water / s.d_theta;
        s.c_t = s.time * s.k_t / (s.length * s.length * 7e-2);
        let (fo_m, fo_t) = compute_fourier_numbers(&s);
        assert!((fo_m - 9e-2).abs() < 1e-15);
        assert!((fo_t - 7e-2).abs() < 1e-15);
    }

    #[test]
    fn doubling_length_quarters_fourier() {
        let s = sample();
        let mut d = s;
        d.length *= 2.0;
        let (a, b) = compute_fourier_numbers(&s);
        let (c, e) = compute_fourier_numbers(&d);
        assert!((c - a / 4.0).abs() < 1e-15 * a);
        assert!((e - b / 4.0).abs() < 1e-15 * b);
    }

    #[test]
    fn zero_vapour_transfer_kills_four_biots() {
        let mut s = sample();
        s.h_m = 0.0;
        let b = compute_biot_numbers(&s, &SideExchange::default()).unwrap();
        assert_eq!(b.mass_sat, 0.0);
        assert_eq!(b.mass_moisture, 0.0);
        assert_eq!(b.heat_sat, 0.0);
        assert_eq!(b.heat_moisture, 0.0);
        assert!(b.heat_temperature > 0.0);
    }

    #[test]
    fn heat_biot_direct_substitution() {
        let mut s = sample();
        s.length = 1.0;
        s.h_t = 2.0;
        s.k_t = 4.0;
        let b = compute_biot_numbers(&s, &SideExchange::default()).unwrap();
        assert_eq!(b.heat_temperature, 0.5);
    }

    #[test]
    fn zero_reference_rejected() {
        let mut s = sample();
        s.d_theta = 0.0;
        assert_eq!(
            compute_biot_numbers(&s, &SideExchange::default()),
            Err(ScalingError::NonPositive("d_theta"))
        );
    }

    #[test]
    fn identity_at_reference() {
        let s = sample();
        let phys = StateField { u: vec![291.3], v: vec![0.53], time: 7200.0 };
        let d = nondimensionalize(&phys, &s);
        assert_eq!(d.u, vec![1.0]);
        assert_eq!(d.v, vec![1.0]);
        assert_eq!(d.time, 2.0);
    }

    proptest! {
        #[test]
        fn round_trip(
            us in proptest::collection::vec(250.0f64..320.0, 1..40),
            t in 0.0f64..1e7,
            tref in 200.0f64..400.0,
            mref in 0.01f64..1.0,
        ) {
            let mut s = sample();
            s.temperature = tref;
            s.moisture = mref;
            let vs: Vec<f64> = us.iter().map(|u| (u - 240.0) / 100.0).collect();
            let phys = StateField { u: us.clone(), v: vs.clone(), time: t };
            let back = redimensionalize(&nondimensionalize(&phys, &s), &s);
            for (a, b) in back.u.iter().zip(&us).chain(back.v.iter().zip(&vs)) {
                prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1e-300));
            }
            prop_assert!((back.time - t).abs() <= 1e-14 * t.max(1e-300));
        }

        #[test]
        fn fourier_homogeneity(scale in 0.1f64..10.0) {
            let s = sample();
            let (a, b) = compute_fourier_numbers(&s);
            let mut l = s;
            l.length *= scale;
            let (c, d) = compute_fourier_numbers(&l);
            prop_assert!((c * scale * scale - a).abs() <= 1e-13 * a);
            prop_assert!((d * scale * scale - b).abs() <= 1e-13 * b);
            let mut t = s;
            t.time *= scale;
            let (e, f) = compute_fourier_numbers(&t);
            prop_assert!((e - a * scale).abs() <= 1e-13 * a * scale);
            prop_assert!((f - b * scale).abs() <= 1e-13 * b * scale);
        }

        #[test]
        fn biot_homogeneous_in_length(scale in 0.1f64..10.0) {
            let s = sample();
            let side = SideExchange { phi_inf: 0.7, dphi_dtheta: 1.3, p_sat_over_u: 0.9 };
            let a = compute_biot_numbers(&s, &side).unwrap();
            let mut l = s;
            l.length *= scale;
            let b = compute_biot_numbers(&l, &side).unwrap();
            for ((_, x), (_, y)) in a.values().iter().zip(b.values().iter()) {
                prop_assert!((y - x * scale).abs() <= 1e-13 * (x * scale).abs());
            }
        }
    }
}
