use std::io::{self, Write};

use serde::Serialize;

/// Spectral bounds of the (frozen) operator matrix and the explicit step limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityEstimate {
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// `2 / lambda_max`; infinite when the operator has no diffusion.
    pub dt_exp: f64,
}

impl StabilityEstimate {
    pub fn from_bounds(lambda_max: f64, lambda_min: f64) -> Self {
        let dt_exp = if lambda_max > 0.0 { 2.0 / lambda_max } else { f64::INFINITY };
        Self { lambda_max, lambda_min: lambda_min.clamp(0.0, lambda_max), dt_exp }
    }

    pub fn is_bounded(&self) -> bool {
        self.dt_exp.is_finite()
    }

    /// Same estimate with `lambda_max` inflated by `factor`.
    pub fn inflated(&self, factor: f64) -> Self {
        Self::from_bounds(self.lambda_max * factor, self.lambda_min)
    }
}

/// Square sparse matrix in coordinate format.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CooMatrix {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for &(i, j, a) in &self.entries {
            d[i][j] += a;
        }
        d
    }

    /// Writes `row col value` lines (0-based) after a `%`-prefixed size header.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "% {} {} {}", self.n, self.n, self.entries.len())?;
        for &(i, j, a) in &self.entries {
            writeln!(w, "{i} {j} {a:.17e}")?;
        }
        Ok(())
    }

    /// Row-wise Gershgorin bounds.
    pub fn gershgorin(&self) -> StabilityEstimate {
        let mut diag = vec![0.0; self.n];
        let mut radius = vec![0.0; self.n];
        let mut touched = vec![false; self.n];
        for &(i, j, a) in &self.entries {
            if a == 0.0 {
                continue;
            }
            touched[i] = true;
            if i == j {
                diag[i] += a;
            } else {
                radius[i] += a.abs();
            }
        }
        gershgorin(
            (0..self.n).filter(|&i| touched[i]).map(|i| (diag[i], radius[i])),
        )
    }
}

/// Bounds from `(diagonal, off-diagonal absolute sum)` pairs of each row:
/// the largest `|a_ii| + R_i` bounds the spectral radius, the smallest
/// `a_ii − R_i` (clamped at zero) bounds the real parts from below.
pub fn gershgorin(rows: impl IntoIterator<Item = (f64, f64)>) -> StabilityEstimate {
    let mut lmax: f64 = 0.0;
    let mut lmin = f64::INFINITY;
    for (d, r) in rows {
        lmax = lmax.max(d.abs() + r);
        lmin = lmin.min(d - r);
    }
    if !lmin.is_finite() {
        lmin = 0.0;
    }
    StabilityEstimate::from_bounds(lmax, lmin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_exp_is_two_over_lambda() {
        let e = StabilityEstimate::from_bounds(400.0, 1.0);
        assert_eq!(e.dt_exp, 5e-3);
        let z = StabilityEstimate::from_bounds(0.0, 0.0);
        assert!(z.dt_exp.is_infinite());
        assert!(!z.is_bounded());
    }

    #[test]
    fn gershgorin_on_laplacian_rows() {
        let rows = vec![(200.0, 100.0), (200.0, 200.0), (200.0, 100.0)];
        let e = gershgorin(rows);
        assert_eq!(e.lambda_max, 400.0);
        assert_eq!(e.lambda_min, 0.0);
    }

    #[test]
    fn coordinate_dump() {
        let m = CooMatrix { n: 2, entries: vec![(0, 0, 2.0), (1, 0, -1.0)] };
        let mut buf = Vec::new();
        m.write_coordinate(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("% 2 2 2\n0 0 2.0"));
        assert_eq!(s.lines().count(), 3);
    }
}
