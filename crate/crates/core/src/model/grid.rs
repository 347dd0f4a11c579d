use super::ModelError;

/// Uniform 1-D grid of `node_count` nodes spanning `[0, length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    spacing: f64,
    positions: Vec<f64>,
}

impl Grid1D {
    /// Builds a grid with `cells` uniform cells, i.e. `cells + 1` nodes.
    pub fn new(length: f64, cells: usize) -> Result<Self, ModelError> {
        if cells == 0 {
            return Err(ModelError::InvalidGrid("need at least one cell".into()));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(ModelError::InvalidGrid(format!("length {length} must be positive")));
        }
        let spacing = length / cells as f64;
        let mut positions: Vec<f64> = (0..=cells).map(|j| j as f64 * spacing).collect();
        positions[cells] = length;
        Ok(Self { spacing, positions })
    }

    /// Grid whose spacing is as close as possible to `spacing` without exceeding it.
    pub fn with_spacing(length: f64, spacing: f64) -> Result<Self, ModelError> {
        if !(spacing > 0.0) {
            return Err(ModelError::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        let cells = (length / spacing - 1e-9).ceil().max(1.0) as usize;
        Self::new(length, cells)
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn cells(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn length(&self) -> f64 {
        self.positions[self.positions.len() - 1]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Index of the node at `x`, if one lies within `1e-9 · spacing`.
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let r = x / self.spacing;
        let j = r.round();
        if j < 0.0 || j as usize >= self.node_count() {
            return None;
        }
        ((r - j).abs() < 1e-9).then_some(j as usize)
    }
}
