#![allow(dead_code)]

use std::sync::Arc;

use hamsts_core::dimensionless::{BiotSet, DimensionlessGroups};
use hamsts_core::discretization::{assemble_operator, SemiDiscreteOperator, VolumeSource};
use hamsts_core::integrators::{euler_run, OdeSystem, RunOptions};
use hamsts_core::model::{
    build_wall, BoundaryForcing, Coefficients, CoefficientModel, ConstantMaterial, Grid1D,
    SideForcing, StateField, TimeFn, TABLE1_MAT1, TABLE1_MAT2,
};
use nalgebra::{DMatrix, DVector};

pub const X_INT: f64 = 0.6;

pub fn layer(c: Coefficients, name: &str) -> Arc<dyn CoefficientModel> {
    Arc::new(ConstantMaterial::new(name, c))
}

pub fn groups(fo: f64, left: BiotSet, right: BiotSet) -> DimensionlessGroups {
    DimensionlessGroups { fo_m: fo, fo_t: fo, gamma: 0.07, delta: 0.05, absorptivity: 0.0, left, right }
}

/// Flux matrix `K` with `(F_u, F_v) = K·(u', v')`.
fn flux_matrix(c: &Coefficients, g: &DimensionlessGroups) -> [[f64; 2]; 2] {
    [[c.k_t, g.delta * c.k_tm], [g.gamma * c.d_t, c.d_theta]]
}

/// Piecewise-smooth steady solution of the two-layer problem with continuous
/// values and fluxes at `X_INT`.
///
/// Left of the interface `u = 1 + 0.2 sin 2x`, `v = 1 + 0.1 cos 3x`; right of
/// it linear corrections `a(x − x_i)`, `b(x − x_i)` are added so that
/// `K₂·g_R = K₁·g_L` for the gradients on either side.
pub struct Manufactured {
    pub groups: DimensionlessGroups,
    pub mats: [Coefficients; 2],
    pub a: f64,
    pub b: f64,
}

impl Manufactured {
    pub fn new() -> Self {
        let groups = groups(1.0, BiotSet::default(), BiotSet::default());
        let mats = [TABLE1_MAT1, TABLE1_MAT2];
        let k1 = flux_matrix(&mats[0], &groups);
        let k2 = flux_matrix(&mats[1], &groups);
        let gl = [0.4 * (2.0 * X_INT).cos(), -0.3 * (3.0 * X_INT).sin()];
        let rhs = [k1[0][0] * gl[0] + k1[0][1] * gl[1], k1[1][0] * gl[0] + k1[1][1] * gl[1]];
        let det = k2[0][0] * k2[1][1] - k2[0][1] * k2[1][0];
        let gr = [
            (k2[1][1] * rhs[0] - k2[0][1] * rhs[1]) / det,
            (k2[0][0] * rhs[1] - k2[1][0] * rhs[0]) / det,
        ];
        Self { groups, mats, a: gr[0] - gl[0], b: gr[1] - gl[1] }
    }

    pub fn exact(&self, x: f64) -> (f64, f64) {
        let u = 1.0 + 0.2 * (2.0 * x).sin();
        let v = 1.0 + 0.1 * (3.0 * x).cos();
        if x > X_INT {
            (u + self.a * (x - X_INT), v + self.b * (x - X_INT))
        } else {
            (u, v)
        }
    }

    /// `(S_u, S_v) = −Fo·(K·(u'', v''))` in layer `l`.
    pub fn source(&self) -> VolumeSource {
        let ks = [flux_matrix(&self.mats[0], &self.groups), flux_matrix(&self.mats[1], &self.groups)];
        let (fo_t, fo_m) = (self.groups.fo_t, self.groups.fo_m);
        Arc::new(move |x: f64, _t: f64, l: usize| {
            let upp = -0.8 * (2.0 * x).sin();
            let vpp = -0.9 * (3.0 * x).cos();
            let k = ks[l];
            (-fo_t * (k[0][0] * upp + k[0][1] * vpp), -fo_m * (k[1][0] * upp + k[1][1] * vpp))
        })
    }

    pub fn operator(&self, cells: usize) -> SemiDiscreteOperator {
        let wall = build_wall(vec![
            (layer(self.mats[0], "m1"), X_INT),
            (layer(self.mats[1], "m2"), 1.0 - X_INT),
        ])
        .unwrap();
        let grid = Grid1D::new(1.0, cells).unwrap();
        let (u0, v0) = self.exact(0.0);
        let (u1, v1) = self.exact(1.0);
        let forcing = BoundaryForcing {
            left: SideForcing::dirichlet(TimeFn::Constant(u0), TimeFn::Constant(v0)),
            right: SideForcing::dirichlet(TimeFn::Constant(u1), TimeFn::Constant(v1)),
        };
        assemble_operator(&wall, &grid, &self.groups, &forcing).unwrap().with_source(self.source())
    }

    /// Nodal exact solution, interleaved.
    pub fn exact_nodes(&self, op: &SemiDiscreteOperator) -> Vec<f64> {
        op.grid().positions().iter().flat_map(|&x| {
            let (u, v) = self.exact(x);
            [u, v]
        }).collect()
    }
}

/// Dense `A` with `f(y) = f(y_eq) − A·(y − y_eq)` for an affine system, from
/// unit perturbations of the right-hand side.
pub fn dense_jacobian<S: OdeSystem + ?Sized>(sys: &S, y_eq: &[f64], t: f64) -> DMatrix<f64> {
    let n = sys.dim();
    let mut f0 = vec![0.0; n];
    sys.rhs(t, y_eq, &mut f0).unwrap();
    let mut a = DMatrix::zeros(n, n);
    let mut y = y_eq.to_vec();
    let mut f = vec![0.0; n];
    for j in 0..n {
        y[j] += 1.0;
        sys.rhs(t, &y, &mut f).unwrap();
        y[j] = y_eq[j];
        for i in 0..n {
            a[(i, j)] = -(f[i] - f0[i]);
        }
    }
    a
}

/// Steady discrete solution of the manufactured problem by a dense solve of
/// `f(y) = 0`, with boundary rows replaced by the imposed values.
pub fn steady_solution(m: &Manufactured, op: &SemiDiscreteOperator) -> Vec<f64> {
    let n = op.dim();
    let exact = m.exact_nodes(op);
    let zero = vec![0.0; n];
    let mut a = dense_jacobian(op, &zero, 0.0);
    let mut f0 = vec![0.0; n];
    op.rhs(0.0, &zero, &mut f0).unwrap();
    // f(y) = f0 − A·y = 0
    let mut b = DVector::from_vec(f0);
    for i in [0, 1, n - 2, n - 1] {
        a.row_mut(i).fill(0.0);
        a[(i, i)] = 1.0;
        b[i] = exact[i];
    }
    a.lu().solve(&b).expect("nonsingular steady system").as_slice().to_vec()
}

/// Weighted L² errors `(ε₂(u), ε₂(v))` of the steady discrete solution on `cells` cells.
pub fn mms_spatial_error(cells: usize) -> (f64, f64) {
    let m = Manufactured::new();
    let op = m.operator(cells);
    let y = steady_solution(&m, &op);
    let exact = m.exact_nodes(&op);
    let dx = op.grid().spacing();
    let (mut su, mut sv) = (0.0, 0.0);
    for (p, q) in y.chunks_exact(2).zip(exact.chunks_exact(2)) {
        su += (p[0] - q[0]).powi(2);
        sv += (p[1] - q[1]).powi(2);
    }
    ((dx * su).sqrt(), (dx * sv).sqrt())
}

/// Two-layer Robin problem with periodic forcing for temporal-order checks.
pub fn periodic_operator(cells: usize) -> SemiDiscreteOperator {
    let wall = build_wall(vec![(layer(TABLE1_MAT1, "m1"), X_INT), (layer(TABLE1_MAT2, "m2"), 1.0 - X_INT)]).unwrap();
    let grid = Grid1D::new(1.0, cells).unwrap();
    let bi = BiotSet { mass_moisture: 25.5, heat_temperature: 50.5, heat_moisture: 0.496, ..Default::default() };
    let g = DimensionlessGroups { fo_m: 9e-2, fo_t: 7e-2, ..groups(1.0, bi, bi) };
    let sin2 = |amplitude, period| TimeFn::SinSquared { base: 1.0, amplitude, period };
    let forcing = BoundaryForcing {
        left: SideForcing::robin(sin2(0.6, 5.0), sin2(0.2, 2.0)),
        right: SideForcing::robin(sin2(0.5, 3.0), sin2(0.9, 6.0)),
    };
    assemble_operator(&wall, &grid, &g, &forcing).unwrap()
}

/// Final-time max errors of Euler at `dt` against Euler at `dt / 64`.
pub fn euler_time_errors(op: &SemiDiscreteOperator, tau: f64, dts: &[f64]) -> Vec<f64> {
    let y0 = op.pack(&StateField::uniform(op.node_count(), 1.0, 1.0)).unwrap();
    let opts = RunOptions::default();
    let fine = euler_run(op, &y0, 0.0, dts[dts.len() - 1] / 64.0, tau, &opts, None).unwrap().final_y;
    dts.iter()
        .map(|&dt| {
            let y = euler_run(op, &y0, 0.0, dt, tau, &opts, None).unwrap().final_y;
            y.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .collect()
}

/// Largest change of the trapezoidal moisture total over `steps` Euler steps
/// of a wall with all exchange coefficients zero.
pub fn zero_flux_moisture_drift(steps: usize) -> f64 {
    let wall = build_wall(vec![(layer(TABLE1_MAT1, "m1"), X_INT), (layer(TABLE1_MAT2, "m2"), 1.0 - X_INT)]).unwrap();
    let grid = Grid1D::new(1.0, 50).unwrap();
    let g = DimensionlessGroups { fo_m: 9e-2, fo_t: 7e-2, ..groups(1.0, BiotSet::default(), BiotSet::default()) };
    let forcing = BoundaryForcing {
        left: SideForcing::robin(TimeFn::Constant(1.0), TimeFn::Constant(1.0)),
        right: SideForcing::robin(TimeFn::Constant(1.0), TimeFn::Constant(1.0)),
    };
    let op = assemble_operator(&wall, &grid, &g, &forcing).unwrap();
    let n = op.node_count();
    let dx = grid.spacing();
    let mut state = StateField::uniform(n, 1.0, 1.0);
    for (j, &x) in grid.positions().iter().enumerate() {
        state.u[j] = 1.0 + 0.3 * (4.0 * x).sin();
        state.v[j] = 1.0 + 0.5 * (-(x - 0.3).powi(2) * 40.0).exp();
    }
    let total = |y: &[f64]| {
        let v: Vec<f64> = y.chunks_exact(2).map(|p| p[1]).collect();
        hamsts_core::metrics::total_moisture(&v, dx, 0..n).unwrap()
    };
    let y0 = op.pack(&state).unwrap();
    let m0 = total(&y0);
    let dt = 0.9 * op.estimate_lambda_max(&state).unwrap().dt_exp;
    let mut drift = 0.0f64;
    let mut obs = |_t: f64, y: &[f64]| drift = drift.max((total(y) - m0).abs());
    euler_run(&op, &y0, 0.0, dt, steps as f64 * dt, &RunOptions::default(), Some(&mut obs)).unwrap();
    drift
}
