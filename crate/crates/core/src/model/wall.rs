use std::sync::Arc;

use super::{CoefficientModel, Coefficients, Grid1D, ModelError};

#[derive(Debug, Clone)]
pub struct Layer {
    pub model: Arc<dyn CoefficientModel>,
    pub thickness: f64,
}

/// Ordered stack of layers from `x = 0` to `x = ℓ`.
#[derive(Debug, Clone)]
pub struct WallAssembly {
    layers: Vec<Layer>,
    interfaces: Vec<f64>,
    length: f64,
}

/// Stacks `(model, thickness)` pairs into a wall.
pub fn build_wall(
    layer_specs: Vec<(Arc<dyn CoefficientModel>, f64)>,
) -> Result<WallAssembly, ModelError> {
    if layer_specs.is_empty() {
        return Err(ModelError::InvalidWall("wall needs at least one layer".into()));
    }
    let mut layers = Vec::with_capacity(layer_specs.len());
    let mut interfaces = Vec::new();
    let mut length = 0.0;
    for (i, (model, thickness)) in layer_specs.into_iter().enumerate() {
        if !(thickness > 0.0) || !thickness.is_finite() {
            return Err(ModelError::InvalidWall(format!(
                "layer {i} has non-positive thickness {thickness}"
            )));
        }
        if i > 0 {
            interfaces.push(length);
        }
        length += thickness;
        layers.push(Layer { model, thickness });
    }
    Ok(WallAssembly { layers, interfaces, length })
}

impl WallAssembly {
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn interface_positions(&self) -> &[f64] {
        &self.interfaces
    }

    pub fn total_length(&self) -> f64 {
        self.length
    }

    /// True when every layer's coefficients are state independent.
    pub fn is_state_independent(&self) -> bool {
        self.layers.iter().all(|l| l.model.is_state_independent())
    }

    /// Index of the layer owning `x`; a point on an interface belongs to the
    /// layer on its left.
    pub fn layer_index(&self, x: f64) -> Result<usize, ModelError> {
        let tol = 1e-12 * self.length;
        if !(x >= -tol && x <= self.length + tol) {
            return Err(ModelError::OutOfDomain { x, length: self.length });
        }
        Ok(self.interfaces.iter().take_while(|&&xi| x > xi + tol).count())
    }

    /// Same wall with every thickness divided by `length`.
    pub fn scaled(&self, length: f64) -> Result<WallAssembly, ModelError> {
        build_wall(
            self.layers
                .iter()
                .map(|l| (l.model.clone(), l.thickness / length))
                .collect(),
        )
    }

    /// Checks that every interface falls on a node of `grid` and returns their node indices.
    pub fn interface_nodes(&self, grid: &Grid1D) -> Result<Vec<usize>, ModelError> {
        if ((grid.length() - self.length) / self.length).abs() > 1e-12 {
            return Err(ModelError::InvalidGrid(format!(
                "grid length {} differs from wall length {}",
                grid.length(),
                self.length
            )));
        }
        self.interfaces
            .iter()
            .map(|&x| {
                grid.node_at(x)
                    .ok_or(ModelError::InterfaceNotOnNode { x, spacing: grid.spacing() })
            })
            .collect()
    }
}

/// Coefficients of the layer owning `x`, evaluated at `(u, v)`.
pub fn evaluate_coefficients(
    wall: &WallAssembly,
    x: f64,
    u: f64,
    v: f64,
) -> Result<Coefficients, ModelError> {
    let i = wall.layer_index(x)?;
    Ok(wall.layers[i].model.coefficients(u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{material::TABLE1_MAT1, material::TABLE1_MAT2, ConstantMaterial, RammedEarth};
    use proptest::prelude::*;

    fn table1_wall() -> WallAssembly {
        build_wall(vec![
            (Arc::new(ConstantMaterial::new("mat1", TABLE1_MAT1)), 0.6),
            (Arc::new(ConstantMaterial::new("mat2", TABLE1_MAT2)), 0.4),
        ])
        .unwrap()
    }

    #[test]
    fn table1_coefficients_by_side() {
        let w = table1_wall();
        assert_eq!(w.interface_positions(), &[0.6]);
        let left = evaluate_coefficients(&w, 0.3, 1.2, 0.8).unwrap();
        assert_eq!(left, Coefficients::new(0.3, 2.1, 0.1, 0.5, 0.4));
        let right = evaluate_coefficients(&w, 0.9, 1.2, 0.8).unwrap();
        assert_eq!(right, Coefficients::new(0.1, 3.2, 0.3, 0.2, 0.1));
        // on the interface the left layer wins
        assert_eq!(evaluate_coefficients(&w, 0.6, 1.0, 1.0).unwrap(), left);
    }

    #[test]
    fn out_of_domain() {
        let w = table1_wall();
        assert!(matches!(
            evaluate_coefficients(&w, 1.5, 1.0, 1.0),
            Err(ModelError::OutOfDomain { .. })
        ));
        assert!(evaluate_coefficients(&w, -0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn physical_stack_lengths() {
        let re: Arc<dyn CoefficientModel> = Arc::new(RammedEarth::default());
        let w = build_wall(vec![(re.clone(), 0.5), (re.clone(), 0.125)]).unwrap();
        assert!((w.total_length() - 0.625).abs() < 1e-15);
        assert_eq!(w.interface_positions(), &[0.5]);
        let single = build_wall(vec![(re, 0.3)]).unwrap();
        assert!(single.interface_positions().is_empty());
        assert_eq!(single.total_length(), 0.3);
    }

    #[test]
    fn construction_errors() {
        assert!(build_wall(vec![]).is_err());
        let re: Arc<dyn CoefficientModel> = Arc::new(RammedEarth::default());
        assert!(build_wall(vec![(re, 0.0)]).is_err());
    }

    #[test]
    fn interface_node_lookup() {
        let w = table1_wall();
        let g = Grid1D::new(1.0, 100).unwrap();
        assert_eq!(w.interface_nodes(&g).unwrap(), vec![60]);
        let coarse = Grid1D::new(1.0, 7).unwrap();
        assert!(matches!(w.interface_nodes(&coarse), Err(ModelError::InterfaceNotOnNode { .. })));
    }

    #[test]
    fn grid_nodes_round_trip_layer_membership() {
        let w = table1_wall();
        let g = Grid1D::new(1.0, 100).unwrap();
        for (j, &x) in g.positions().iter().enumerate() {
            let expected = if j <= 60 { 0 } else { 1 };
            assert_eq!(w.layer_index(x).unwrap(), expected, "node {j}");
        }
    }

    proptest! {
        #[test]
        fn piecewise_constant_within_layer(a in 0.0f64..0.6, b in 0.0f64..0.6, u in 0.5f64..2.5, v in 0.0f64..2.0) {
            let w = table1_wall();
            let ca = evaluate_coefficients(&w, a, u, v).unwrap();
            let cb = evaluate_coefficients(&w, b, u, v).unwrap();
            prop_assert_eq!(ca, cb);
        }

        #[test]
        fn thicknesses_sum_to_length(ts in proptest::collection::vec(0.01f64..2.0, 1..6)) {
            let re: Arc<dyn CoefficientModel> = Arc::new(RammedEarth::default());
            let w = build_wall(ts.iter().map(|&t| (re.clone(), t)).collect()).unwrap();
            let sum: f64 = ts.iter().sum();
            prop_assert!(((w.total_length() - sum) / sum).abs() < 1e-12);
            prop_assert_eq!(w.interface_positions().len(), ts.len() - 1);
        }
    }
}
