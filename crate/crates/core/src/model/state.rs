use serde::{Deserialize, Serialize};

use super::ModelError;

/// Nodal temperature `u` and moisture `v` at one time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
}

impl StateField {
    pub fn uniform(nodes: usize, u: f64, v: f64) -> Self {
        Self { u: vec![u; nodes], v: vec![v; nodes], time: 0.0 }
    }

    pub fn node_count(&self) -> usize {
        self.u.len()
    }

    pub fn validate(&self, nodes: usize) -> Result<(), ModelError> {
        if self.u.len() != nodes || self.v.len() != nodes {
            return Err(ModelError::StateShape {
                expected: nodes,
                got: self.u.len().min(self.v.len()),
            });
        }
        if !self.u.iter().chain(&self.v).all(|x| x.is_finite()) {
            return Err(ModelError::Invalid("state contains non-finite values".into()));
        }
        Ok(())
    }

    /// Interleaved `[u0, v0, u1, v1, ...]` layout used by the integrators.
    pub fn to_interleaved(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).flat_map(|(&u, &v)| [u, v]).collect()
    }

    pub fn from_interleaved(y: &[f64], time: f64) -> Self {
        let u = y.iter().step_by(2).copied().collect();
        let v = y.iter().skip(1).step_by(2).copied().collect();
        Self { u, v, time }
    }
}
