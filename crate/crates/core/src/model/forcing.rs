use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::{saturation_pressure, ModelError};

/// Linearly interpolated scalar series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(ModelError::Invalid(format!(
                "series needs at least two (t, value) pairs, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(ModelError::Invalid(format!(
                "series time not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { times, values })
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Linear interpolation, clamped to the end values outside the span.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

/// A scalar function of (dimensionless) time.
#[derive(Clone)]
pub enum TimeFn {
    Constant(f64),
    /// `base + amplitude · sin(2π t / period)²`
    SinSquared { base: f64, amplitude: f64, period: f64 },
    /// `value_scale · series(time_scale · t)`
    Series { series: Arc<TimeSeries>, time_scale: f64, value_scale: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::SinSquared { base, amplitude, period } => {
                write!(f, "SinSquared({base} + {amplitude}·sin(2πt/{period})²)")
            }
            Self::Series { series, time_scale, value_scale } => write!(
                f,
                "Series([{}, {}], time_scale={time_scale}, value_scale={value_scale})",
                series.start(),
                series.end()
            ),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl TimeFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::SinSquared { base, amplitude, period } => {
                let s = (2.0 * PI * t / period).sin();
                base + amplitude * s * s
            }
            Self::Series { series, time_scale, value_scale } => value_scale * series.at(time_scale * t),
            Self::Custom(f) => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Constant(c) if *c == 0.0)
    }

    /// Span of (dimensionless) time over which a series-backed function has data.
    pub fn coverage(&self) -> Option<(f64, f64)> {
        match self {
            Self::Series { series, time_scale, .. } => {
                Some((series.start() / time_scale, series.end() / time_scale))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Robin,
    Dirichlet,
}

/// Reference temperature and pressure for `P*_sat(u) = P_sat(T°·u) / P_sat°`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationRef {
    pub temperature: f64,
    pub pressure: f64,
}

impl Default for SaturationRef {
    fn default() -> Self {
        let temperature = 293.15;
        Self { temperature, pressure: saturation_pressure(temperature).expect("valid reference") }
    }
}

impl SaturationRef {
    pub fn dimensionless(&self, u: f64) -> Result<f64, ModelError> {
        Ok(saturation_pressure(self.temperature * u)? / self.pressure)
    }
}

/// Ambient data for one face of the wall.
///
/// For Dirichlet faces `u_inf`/`v_inf` are the imposed surface values and the
/// remaining fields are ignored.
#[derive(Clone)]
pub struct SideForcing {
    pub kind: BoundaryKind,
    pub u_inf: TimeFn,
    pub v_inf: TimeFn,
    /// Dimensionless short-wave irradiance `g*_∞`.
    pub radiation: TimeFn,
    /// Additional moisture flux `G_M`, counted positive into the wall.
    pub extra_mass_flux: TimeFn,
    /// Additional heat flux `G_T`, counted positive into the wall.
    pub extra_heat_flux: TimeFn,
    /// Sorption residual `r(v)`, zero unless supplied.
    pub residual: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    pub saturation: SaturationRef,
}

impl fmt::Debug for SideForcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SideForcing")
            .field("kind", &self.kind)
            .field("u_inf", &self.u_inf)
            .field("v_inf", &self.v_inf)
            .field("radiation", &self.radiation)
            .field("extra_mass_flux", &self.extra_mass_flux)
            .field("extra_heat_flux", &self.extra_heat_flux)
            .field("residual", &self.residual.as_ref().map(|_| "fn"))
            .finish()
    }
}

impl SideForcing {
    pub fn robin(u_inf: TimeFn, v_inf: TimeFn) -> Self {
        Self::new(BoundaryKind::Robin, u_inf, v_inf)
    }

    pub fn dirichlet(u: TimeFn, v: TimeFn) -> Self {
        Self::new(BoundaryKind::Dirichlet, u, v)
    }

    fn new(kind: BoundaryKind, u_inf: TimeFn, v_inf: TimeFn) -> Self {
        Self {
            kind,
            u_inf,
            v_inf,
            radiation: TimeFn::Constant(0.0),
            extra_mass_flux: TimeFn::Constant(0.0),
            extra_heat_flux: TimeFn::Constant(0.0),
            residual: None,
            saturation: SaturationRef::default(),
        }
    }

    fn functions(&self) -> [&TimeFn; 5] {
        [&self.u_inf, &self.v_inf, &self.radiation, &self.extra_mass_flux, &self.extra_heat_flux]
    }

    /// Fails if a series-backed function does not cover `[0, tau]`.
    pub fn check_coverage(&self, tau: f64) -> Result<(), ModelError> {
        for f in self.functions() {
            if let Some((a, b)) = f.coverage() {
                let tol = 1e-9 * tau.max(1.0);
                if a > tol || b < tau - tol {
                    return Err(ModelError::Invalid(format!(
                        "boundary series spans [{a}, {b}] but the run needs [0, {tau}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Forcing on both faces: `left` at `x = 0`, `right` at `x = ℓ`.
#[derive(Debug, Clone)]
pub struct BoundaryForcing {
    pub left: SideForcing,
    pub right: SideForcing,
}

impl BoundaryForcing {
    pub fn check_coverage(&self, tau: f64) -> Result<(), ModelError> {
        self.left.check_coverage(tau)?;
        self.right.check_coverage(tau)
    }
}
