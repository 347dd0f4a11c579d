use super::ModelError;

/// Lower validity bound of the saturation-pressure correlation, in K.
pub const SATURATION_T_MIN: f64 = 159.5;

/// Saturation vapour pressure in Pa for a temperature in K,
/// `997.3 · ((T − 159.5) / 120.6)^8.275`.
pub fn saturation_pressure(temperature: f64) -> Result<f64, ModelError> {
    if !(temperature > SATURATION_T_MIN) || !temperature.is_finite() {
        return Err(ModelError::SaturationDomain(temperature));
    }
    Ok(997.3 * ((temperature - SATURATION_T_MIN) / 120.6).powf(8.275))
}
