use std::sync::atomic::{AtomicU64, Ordering};

use crate::discretization::StabilityEstimate;
use crate::model::ModelError;

/// Autonomous-in-structure ODE system `dy/dt = f(t, y)` marched by the integrators.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;

    /// Size of the node-local blocks returned by [`OdeSystem::local_blocks`].
    fn block_size(&self) -> usize {
        1
    }

    /// Evaluates `f(t, y)` into `dydt`; counts as one RHS evaluation.
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), ModelError>;

    /// Diagonal blocks of the frozen `−∂f/∂y`, row-major, `dim · block_size` values.
    fn local_blocks(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<(), ModelError>;

    /// Imposes strong (Dirichlet) constraints at time `t`.
    fn constrain(&self, _t: f64, _y: &mut [f64]) {}

    fn stability(&self, t: f64, y: &[f64]) -> Result<StabilityEstimate, ModelError>;

    /// True when `f` is affine in `y` with a state-independent matrix.
    fn is_linear(&self) -> bool;

    fn rhs_evals(&self) -> u64;

    /// Number of coefficient evaluations flagged outside the admissible box.
    fn flagged_evaluations(&self) -> u64 {
        0
    }
}

/// Scalar test equation `du/dt = −λ·u`.
#[derive(Debug)]
pub struct ScalarDecay {
    pub lambda: f64,
    evals: AtomicU64,
}

impl ScalarDecay {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, evals: AtomicU64::new(0) }
    }
}

impl OdeSystem for ScalarDecay {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), ModelError> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        dydt[0] = -self.lambda * y[0];
        Ok(())
    }

    fn local_blocks(&self, _t: f64, _y: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        out[0] = self.lambda;
        Ok(())
    }

    fn stability(&self, _t: f64, _y: &[f64]) -> Result<StabilityEstimate, ModelError> {
        Ok(StabilityEstimate::from_bounds(self.lambda.abs(), self.lambda.abs()))
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn rhs_evals(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }
}
