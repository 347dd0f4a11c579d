use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::closure::{apply_robin_closure, BoundaryFlux, Side};
use super::stability::{gershgorin, CooMatrix, StabilityEstimate};
use crate::dimensionless::{BiotSet, DimensionlessGroups};
use crate::integrators::OdeSystem;
use crate::model::{
    AdmissibleBox, BoundaryForcing, BoundaryKind, Coefficients, Grid1D, ModelError, SideForcing,
    StateField, WallAssembly,
};

/// Volumetric source `(x, t, layer) -> (S_u, S_v)` added to the heat and
/// moisture balances; used for manufactured-solution checks.
pub type VolumeSource = Arc<dyn Fn(f64, f64, usize) -> (f64, f64) + Send + Sync>;

/// Semi-discrete right-hand side of the coupled system on a layered wall.
///
/// States are interleaved `[u0, v0, u1, v1, ...]`.
pub struct SemiDiscreteOperator {
    grid: Grid1D,
    wall: WallAssembly,
    groups: DimensionlessGroups,
    forcing: BoundaryForcing,
    /// Layer index of each cell `[x_j, x_{j+1}]`.
    face_layer: Vec<usize>,
    admissible: AdmissibleBox,
    source: Option<VolumeSource>,
    linear: bool,
    rhs_evals: AtomicU64,
    box_violations: AtomicU64,
}

impl fmt::Debug for SemiDiscreteOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiDiscreteOperator")
            .field("nodes", &self.grid.node_count())
            .field("spacing", &self.grid.spacing())
            .field("groups", &self.groups)
            .field("linear", &self.linear)
            .finish()
    }
}

/// Assembles the operator; interfaces must sit on grid nodes.
pub fn assemble_operator(
    wall: &WallAssembly,
    grid: &Grid1D,
    groups: &DimensionlessGroups,
    forcing: &BoundaryForcing,
) -> Result<SemiDiscreteOperator, ModelError> {
    groups.validate().map_err(|e| ModelError::Invalid(e.to_string()))?;
    wall.interface_nodes(grid)?;
    let face_layer = grid
        .positions()
        .windows(2)
        .map(|w| wall.layer_index(0.5 * (w[0] + w[1])))
        .collect::<Result<Vec<_>, _>>()?;
    let robin_linear = |side: &SideForcing, bi: &BiotSet| {
        side.kind == BoundaryKind::Dirichlet
            || (!bi.has_saturation_terms() && side.residual.is_none())
    };
    let linear = wall.is_state_independent()
        && robin_linear(&forcing.left, &groups.left)
        && robin_linear(&forcing.right, &groups.right);
    Ok(SemiDiscreteOperator {
        grid: grid.clone(),
        wall: wall.clone(),
        groups: *groups,
        forcing: forcing.clone(),
        face_layer,
        admissible: AdmissibleBox::default(),
        source: None,
        linear,
        rhs_evals: AtomicU64::new(0),
        box_violations: AtomicU64::new(0),
    })
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

/// Face transport coefficients and nodal heat capacities at one state.
struct Frozen {
    k_t: Vec<f64>,
    k_tm: Vec<f64>,
    d_theta: Vec<f64>,
    d_t: Vec<f64>,
    capacity: Vec<f64>,
}

/// Rows of `−∂f/∂y` for the u and v equations at one node; columns are
/// `[u_{j−1}, v_{j−1}, u_j, v_j, u_{j+1}, v_{j+1}]`.
#[derive(Debug, Clone, Copy, Default)]
struct NodeRows {
    u: [f64; 6],
    v: [f64; 6],
}

impl SemiDiscreteOperator {
    pub fn with_source(mut self, source: VolumeSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn with_admissible_box(mut self, admissible: AdmissibleBox) -> Self {
        self.admissible = admissible;
        self
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn wall(&self) -> &WallAssembly {
        &self.wall
    }

    pub fn groups(&self) -> &DimensionlessGroups {
        &self.groups
    }

    pub fn forcing(&self) -> &BoundaryForcing {
        &self.forcing
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn pack(&self, state: &StateField) -> Result<Vec<f64>, ModelError> {
        state.validate(self.node_count())?;
        Ok(state.to_interleaved())
    }

    pub fn unpack(&self, y: &[f64], time: f64) -> StateField {
        StateField::from_interleaved(y, time)
    }

    fn side(&self, side: Side) -> &SideForcing {
        match side {
            Side::Left => &self.forcing.left,
            Side::Right => &self.forcing.right,
        }
    }

    fn biot(&self, side: Side) -> &BiotSet {
        match side {
            Side::Left => &self.groups.left,
            Side::Right => &self.groups.right,
        }
    }

    fn is_dirichlet(&self, side: Side) -> bool {
        self.side(side).kind == BoundaryKind::Dirichlet
    }

    fn frozen(&self, y: &[f64]) -> Frozen {
        let cells = self.grid.cells();
        let layers = self.wall.layers();
        let eval = |layer: usize, j: usize| -> Coefficients {
            layers[layer].model.coefficients(y[2 * j], y[2 * j + 1])
        };
        let mut fr = Frozen {
            k_t: vec![0.0; cells],
            k_tm: vec![0.0; cells],
            d_theta: vec![0.0; cells],
            d_t: vec![0.0; cells],
            capacity: vec![0.0; cells + 1],
        };
        let mut halves = vec![0u8; cells + 1];
        for f in 0..cells {
            let layer = self.face_layer[f];
            let a = eval(layer, f);
            let b = eval(layer, f + 1);
            fr.k_t[f] = harmonic(a.k_t, b.k_t);
            fr.k_tm[f] = harmonic(a.k_tm, b.k_tm);
            fr.d_theta[f] = harmonic(a.d_theta, b.d_theta);
            fr.d_t[f] = harmonic(a.d_t, b.d_t);
            fr.capacity[f] += a.c_t;
            fr.capacity[f + 1] += b.c_t;
            halves[f] += 1;
            halves[f + 1] += 1;
        }
        for (c, h) in fr.capacity.iter_mut().zip(&halves) {
            *c /= *h as f64;
        }
        fr
    }

    fn count_box_violations(&self, y: &[f64]) {
        let n = y
            .chunks_exact(2)
            .filter(|p| !self.admissible.contains(p[0], p[1]))
            .count();
        if n > 0 {
            self.box_violations.fetch_add(n as u64, Ordering::Relaxed);
        }
    }

    /// Node-averaged volumetric source at node `j`.
    fn node_source(&self, j: usize, t: f64) -> (f64, f64) {
        let Some(src) = &self.source else {
            return (0.0, 0.0);
        };
        let x = self.grid.positions()[j];
        let cells = self.grid.cells();
        let mut layers = Vec::with_capacity(2);
        if j > 0 {
            layers.push(self.face_layer[j - 1]);
        }
        if j < cells {
            layers.push(self.face_layer[j]);
        }
        let n = layers.len() as f64;
        layers.iter().fold((0.0, 0.0), |acc, &l| {
            let (su, sv) = src(x, t, l);
            (acc.0 + su / n, acc.1 + sv / n)
        })
    }

    /// Gradient fluxes `(k_T·∂u/∂x + δ·k_TM·∂v/∂x, D_θ·∂v/∂x + γ·D_T·∂u/∂x)`
    /// through every cell face.
    pub fn face_fluxes(&self, state: &StateField) -> Result<Vec<(f64, f64)>, ModelError> {
        let y = self.pack(state)?;
        let fr = self.frozen(&y);
        Ok(self.fluxes_from(&fr, &y))
    }

    fn fluxes_from(&self, fr: &Frozen, y: &[f64]) -> Vec<(f64, f64)> {
        let dx = self.grid.spacing();
        let (gamma, delta) = (self.groups.gamma, self.groups.delta);
        (0..self.grid.cells())
            .map(|f| {
                let du = y[2 * f + 2] - y[2 * f];
                let dv = y[2 * f + 3] - y[2 * f + 1];
                (
                    (fr.k_t[f] * du + delta * fr.k_tm[f] * dv) / dx,
                    (fr.d_theta[f] * dv + gamma * fr.d_t[f] * du) / dx,
                )
            })
            .collect()
    }

    fn closure(&self, side: Side, y: &[f64], t: f64) -> Result<BoundaryFlux, ModelError> {
        let j = match side {
            Side::Left => 0,
            Side::Right => self.grid.cells(),
        };
        apply_robin_closure(side, y[2 * j], y[2 * j + 1], t, &self.groups, &self.forcing)
    }

    fn rhs_impl(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), ModelError> {
        let n = self.node_count();
        let cells = n - 1;
        let dx = self.grid.spacing();
        let (fo_m, fo_t) = (self.groups.fo_m, self.groups.fo_t);
        self.count_box_violations(y);
        let fr = self.frozen(y);
        let g = self.fluxes_from(&fr, y);

        for j in 1..cells {
            let (gu_r, gv_r) = g[j];
            let (gu_l, gv_l) = g[j - 1];
            dydt[2 * j] = fo_t * (gu_r - gu_l) / (dx * fr.capacity[j]);
            dydt[2 * j + 1] = fo_m * (gv_r - gv_l) / dx;
        }

        let half = 0.5 * dx;
        if self.is_dirichlet(Side::Left) {
            dydt[0] = 0.0;
            dydt[1] = 0.0;
        } else {
            let q = self.closure(Side::Left, y, t)?;
            dydt[0] = fo_t * (g[0].0 - q.heat) / (half * fr.capacity[0]);
            dydt[1] = fo_m * (g[0].1 - q.moisture) / half;
        }
        if self.is_dirichlet(Side::Right) {
            dydt[2 * cells] = 0.0;
            dydt[2 * cells + 1] = 0.0;
        } else {
            let q = self.closure(Side::Right, y, t)?;
            dydt[2 * cells] = fo_t * (-q.heat - g[cells - 1].0) / (half * fr.capacity[cells]);
            dydt[2 * cells + 1] = fo_m * (-q.moisture - g[cells - 1].1) / half;
        }

        if self.source.is_some() {
            for j in 0..n {
                if (j == 0 && self.is_dirichlet(Side::Left))
                    || (j == cells && self.is_dirichlet(Side::Right))
                {
                    continue;
                }
                let (su, sv) = self.node_source(j, t);
                dydt[2 * j] += su / fr.capacity[j];
                dydt[2 * j + 1] += sv;
            }
        }
        Ok(())
    }

    /// Derivatives of the outgoing boundary fluxes with respect to the surface
    /// `(u, v)`: `[[∂q_M/∂u, ∂q_M/∂v], [∂q_T/∂u, ∂q_T/∂v]]`.
    fn closure_jacobian(&self, side: Side, u: f64, v: f64) -> Result<[[f64; 2]; 2], ModelError> {
        let bi = self.biot(side);
        let f = self.side(side);
        let h = 1e-6;
        let dsat = if bi.has_saturation_terms() {
            let s = |u: f64| -> Result<f64, ModelError> { Ok(f.saturation.dimensionless(u)? / u) };
            (s(u + h)? - s(u - h)?) / (2.0 * h)
        } else {
            0.0
        };
        let dres = f.residual.as_ref().map_or(0.0, |r| (r(v + h) - r(v - h)) / (2.0 * h));
        Ok([
            [bi.mass_sat * dsat, bi.mass_moisture * (1.0 + dres)],
            [bi.heat_temperature + bi.heat_sat * dsat, bi.heat_moisture * (1.0 + dres)],
        ])
    }

    fn node_rows(&self, y: &[f64]) -> Result<Vec<NodeRows>, ModelError> {
        let n = self.node_count();
        let cells = n - 1;
        let dx = self.grid.spacing();
        let dx2 = dx * dx;
        let g = &self.groups;
        let fr = self.frozen(y);
        let mut rows = vec![NodeRows::default(); n];

        for (j, row) in rows.iter_mut().enumerate() {
            let left_face = (j > 0).then(|| j - 1);
            let right_face = (j < cells).then_some(j);
            let boundary = left_face.is_none() || right_face.is_none();
            let measure = if boundary { 0.5 } else { 1.0 };
            let a_u = g.fo_t / (measure * dx2 * fr.capacity[j]);
            let a_v = g.fo_m / (measure * dx2);
            for (face, offset) in [(left_face, 0usize), (right_face, 4usize)] {
                let Some(f) = face else { continue };
                // u equation
                row.u[2] += a_u * fr.k_t[f];
                row.u[3] += a_u * g.delta * fr.k_tm[f];
                row.u[offset] -= a_u * fr.k_t[f];
                row.u[offset + 1] -= a_u * g.delta * fr.k_tm[f];
                // v equation
                row.v[3] += a_v * fr.d_theta[f];
                row.v[2] += a_v * g.gamma * fr.d_t[f];
                row.v[offset + 1] -= a_v * fr.d_theta[f];
                row.v[offset] -= a_v * g.gamma * fr.d_t[f];
            }
            let side = match (left_face, right_face) {
                (None, _) => Some(Side::Left),
                (_, None) => Some(Side::Right),
                _ => None,
            };
            if let Some(side) = side {
                if self.is_dirichlet(side) {
                    *row = NodeRows::default();
                } else {
                    let jac = self.closure_jacobian(side, y[2 * j], y[2 * j + 1])?;
                    let b_u = g.fo_t / (0.5 * dx * fr.capacity[j]);
                    let b_v = g.fo_m / (0.5 * dx);
                    row.v[2] += b_v * jac[0][0];
                    row.v[3] += b_v * jac[0][1];
                    row.u[2] += b_u * jac[1][0];
                    row.u[3] += b_u * jac[1][1];
                }
            }
        }
        Ok(rows)
    }

    /// Frozen-coefficient matrix `𝔸 ≈ −∂f/∂y` at state `y`.
    pub fn frozen_matrix(&self, y: &[f64]) -> Result<CooMatrix, ModelError> {
        let rows = self.node_rows(y)?;
        let n = self.node_count();
        let mut entries = Vec::with_capacity(12 * n);
        for (j, r) in rows.iter().enumerate() {
            for (eq, vals) in [(0usize, &r.u), (1usize, &r.v)] {
                let row = 2 * j + eq;
                for (c, &a) in vals.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let node = j as isize + (c / 2) as isize - 1;
                    if node < 0 || node as usize >= n {
                        continue;
                    }
                    entries.push((row, 2 * node as usize + c % 2, a));
                }
            }
        }
        Ok(CooMatrix { n: 2 * n, entries })
    }

    /// The exact matrix `𝔸` with `f(t, y) = −𝔸·y + b(t)`, when the operator is linear.
    pub fn linear_matrix(&self) -> Option<CooMatrix> {
        if !self.linear {
            return None;
        }
        let y = vec![1.0; 2 * self.node_count()];
        self.frozen_matrix(&y).ok()
    }

    pub fn box_violations(&self) -> u64 {
        self.box_violations.load(Ordering::Relaxed)
    }

    /// Gershgorin estimate of the frozen matrix at `state`.
    pub fn estimate_lambda_max(&self, state: &StateField) -> Result<StabilityEstimate, ModelError> {
        let y = self.pack(state)?;
        self.stability(state.time, &y)
    }
}

impl OdeSystem for SemiDiscreteOperator {
    fn dim(&self) -> usize {
        2 * self.node_count()
    }

    fn block_size(&self) -> usize {
        2
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), ModelError> {
        self.rhs_evals.fetch_add(1, Ordering::Relaxed);
        self.rhs_impl(t, y, dydt)
    }

    fn local_blocks(&self, _t: f64, y: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        let rows = self.node_rows(y)?;
        for (j, r) in rows.iter().enumerate() {
            out[4 * j..4 * j + 2].copy_from_slice(&r.u[2..4]);
            out[4 * j + 2..4 * j + 4].copy_from_slice(&r.v[2..4]);
        }
        Ok(())
    }

    fn constrain(&self, t: f64, y: &mut [f64]) {
        let last = self.grid.cells();
        if self.is_dirichlet(Side::Left) {
            y[0] = self.forcing.left.u_inf.eval(t);
            y[1] = self.forcing.left.v_inf.eval(t);
        }
        if self.is_dirichlet(Side::Right) {
            y[2 * last] = self.forcing.right.u_inf.eval(t);
            y[2 * last + 1] = self.forcing.right.v_inf.eval(t);
        }
    }

    fn stability(&self, _t: f64, y: &[f64]) -> Result<StabilityEstimate, ModelError> {
        let rows = self.node_rows(y)?;
        let n = rows.len();
        let bounds = rows.iter().enumerate().flat_map(|(j, r)| {
            [(r.u, 2usize), (r.v, 3usize)].into_iter().filter_map(move |(vals, diag)| {
                if vals.iter().all(|&a| a == 0.0) {
                    return None;
                }
                let radius: f64 = vals
                    .iter()
                    .enumerate()
                    .filter(|&(c, _)| c != diag)
                    .filter(|&(c, _)| {
                        let node = j as isize + (c / 2) as isize - 1;
                        node >= 0 && (node as usize) < n
                    })
                    .map(|(_, a)| a.abs())
                    .sum();
                Some((vals[diag], radius))
            })
        });
        Ok(gershgorin(bounds))
    }

    fn is_linear(&self) -> bool {
        self.linear
    }

    fn rhs_evals(&self) -> u64 {
        self.rhs_evals.load(Ordering::Relaxed)
    }

    fn flagged_evaluations(&self) -> u64 {
        self.box_violations()
    }
}
