use crate::dimensionless::DimensionlessGroups;
use crate::model::{BoundaryForcing, ModelError, SideForcing};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Net fluxes leaving the wall through one face, in the scaled units of the
/// boundary equations (moisture bracket and heat bracket respectively).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryFlux {
    pub moisture: f64,
    pub heat: f64,
}

/// Robin exchange of one face at surface state `(u, v)` and time `t`.
///
/// The returned fluxes are the surface-exchange terms: vapour exchange driven
/// by the saturation-pressure and moisture differences, convective heat
/// exchange, minus the absorbed radiation and the additional gains `G_M`,
/// `G_T`. The diffusive normal flux of the wall equals minus these values.
pub fn apply_robin_closure(
    side: Side,
    u: f64,
    v: f64,
    t: f64,
    groups: &DimensionlessGroups,
    forcing: &BoundaryForcing,
) -> Result<BoundaryFlux, ModelError> {
    let (bi, f) = match side {
        Side::Left => (&groups.left, &forcing.left),
        Side::Right => (&groups.right, &forcing.right),
    };
    let u_inf = f.u_inf.eval(t);
    let v_inf = f.v_inf.eval(t);
    // P_sat(u)/u is singular at u = 0; without saturation terms the closure is affine
    let sat = if bi.has_saturation_terms() {
        if !(u > 0.0) {
            return Err(ModelError::BoundarySingularity { side: side.name(), u });
        }
        if !(u_inf > 0.0) {
            return Err(ModelError::BoundarySingularity { side: side.name(), u: u_inf });
        }
        f.saturation.dimensionless(u)? / u - f.saturation.dimensionless(u_inf)? / u_inf
    } else {
        0.0
    };
    let dv = v - v_inf + residual(f, v);
    let moisture = bi.mass_sat * sat + bi.mass_moisture * dv - f.extra_mass_flux.eval(t);
    let heat = bi.heat_temperature * (u - u_inf) + bi.heat_sat * sat + bi.heat_moisture * dv
        - groups.absorptivity * bi.heat_radiation * f.radiation.eval(t)
        - f.extra_heat_flux.eval(t);
    Ok(BoundaryFlux { moisture, heat })
}

fn residual(f: &SideForcing, v: f64) -> f64 {
    f.residual.as_ref().map_or(0.0, |r| r(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimensionless::BiotSet;
    use crate::model::{SaturationRef, TimeFn};
    use std::f64::consts::PI;

    fn groups(left: BiotSet) -> DimensionlessGroups {
        DimensionlessGroups {
            fo_m: 9e-2,
            fo_t: 7e-2,
            gamma: 7e-2,
            delta: 5e-2,
            absorptivity: 0.0,
            left,
            right: BiotSet::default(),
        }
    }

    fn constant_forcing(u: f64, v: f64) -> BoundaryForcing {
        BoundaryForcing {
            left: SideForcing::robin(TimeFn::Constant(u), TimeFn::Constant(v)),
            right: SideForcing::robin(TimeFn::Constant(u), TimeFn::Constant(v)),
        }
    }

    #[test]
    fn equilibrium_gives_zero_flux() {
        let bi = BiotSet {
            mass_sat: 1.0,
            mass_moisture: 25.5,
            heat_temperature: 50.5,
            heat_sat: 2.0,
            heat_moisture: 0.496,
            heat_radiation: 0.0,
        };
        let f = constant_forcing(1.1, 0.9);
        let q = apply_robin_closure(Side::Left, 1.1, 0.9, 0.3, &groups(bi), &f).unwrap();
        assert_eq!(q, BoundaryFlux::default());
    }

    #[test]
    fn single_moisture_term() {
        let bi = BiotSet { mass_moisture: 25.5, ..Default::default() };
        let f = constant_forcing(1.0, 1.0);
        let q = apply_robin_closure(Side::Left, 1.0, 1.1, 0.0, &groups(bi), &f).unwrap();
        assert!((q.moisture - 2.55).abs() < 1e-12);
        assert_eq!(q.heat, 0.0);
    }

    #[test]
    fn verification_left_face_at_forcing_peak() {
        let bi = BiotSet {
            mass_moisture: 25.5,
            heat_temperature: 50.5,
            heat_moisture: 4.96e-1,
            ..Default::default()
        };
        let f = BoundaryForcing {
            left: SideForcing::robin(
                TimeFn::SinSquared { base: 1.0, amplitude: 0.6, period: 5.0 },
                TimeFn::SinSquared { base: 1.0, amplitude: 0.2, period: 2.0 },
            ),
            right: SideForcing::robin(TimeFn::Constant(1.0), TimeFn::Constant(1.0)),
        };
        let (u, v, t) = (1.2, 1.05, 1.25);
        let q = apply_robin_closure(Side::Left, u, v, t, &groups(bi), &f).unwrap();
        // direct transcription of the two boundary brackets
        let u_inf = 1.0 + 0.6 * (2.0 * PI * t / 5.0).sin().powi(2);
        let v_inf = 1.0 + 0.2 * (2.0 * PI * t / 2.0).sin().powi(2);
        let moisture = 25.5 * (v - v_inf);
        let heat = 50.5 * (u - u_inf) + 0.496 * (v - v_inf);
        assert!((q.moisture - moisture).abs() < 1e-13);
        assert!((q.heat - heat).abs() < 1e-13);
    }

    #[test]
    fn radiation_and_gains_reduce_outgoing_heat() {
        let bi = BiotSet { heat_radiation: 2.0, ..Default::default() };
        let mut g = groups(bi);
        g.absorptivity = 0.5;
        let mut f = constant_forcing(1.0, 1.0);
        f.left.radiation = TimeFn::Constant(3.0);
        f.left.extra_heat_flux = TimeFn::Constant(0.25);
        f.left.extra_mass_flux = TimeFn::Constant(0.1);
        let q = apply_robin_closure(Side::Left, 1.0, 1.0, 0.0, &g, &f).unwrap();
        assert!((q.heat + 3.25).abs() < 1e-14);
        assert!((q.moisture + 0.1).abs() < 1e-14);
    }

    #[test]
    fn saturation_terms_follow_surface_temperature() {
        let bi = BiotSet { mass_sat: 1.0, ..Default::default() };
        let f = constant_forcing(1.0, 1.0);
        let sref = SaturationRef::default();
        let q = apply_robin_closure(Side::Left, 1.02, 1.0, 0.0, &groups(bi), &f).unwrap();
        let expected = sref.dimensionless(1.02).unwrap() / 1.02 - sref.dimensionless(1.0).unwrap();
        assert!((q.moisture - expected).abs() < 1e-14);
        assert!(q.moisture > 0.0);
    }

    #[test]
    fn non_positive_surface_temperature() {
        let f = constant_forcing(1.0, 1.0);
        let sat = groups(BiotSet { mass_sat: 1.0, ..Default::default() });
        let e = apply_robin_closure(Side::Left, 0.0, 1.0, 0.0, &sat, &f);
        assert!(matches!(e, Err(ModelError::BoundarySingularity { side: "left", .. })));
        // the affine closure has no singularity
        let q = apply_robin_closure(Side::Left, -1.0, 1.0, 0.0, &groups(BiotSet::default()), &f).unwrap();
        assert_eq!(q.moisture, 0.0);
    }
}
