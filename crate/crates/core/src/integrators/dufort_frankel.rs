use super::{check_run, planned_steps, IntegrationError, Marcher, Observer, OdeSystem, RunOptions, RunReport, Scheme};
use crate::model::ModelError;

/// Du Fort–Frankel three-level march.
///
/// With `B` the node-local diagonal blocks of the frozen `−∂f/∂y`, the update
/// `(I + ΔtB)·y^{n+1} = (I − ΔtB)·y^{n−1} + 2Δt·(f(y^n) + B·y^n)` averages the
/// local terms over the outer levels of a leapfrog step. The first step is
/// explicit Euler and a shortened last step uses the two-level variant
/// `(I + hB)·y^{n+1} = y^n + h·(f(y^n) + B·y^n)`.
pub fn dufort_frankel_run<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    dt: f64,
    tau: f64,
    options: &RunOptions,
    observer: Option<Observer<'_>>,
) -> Result<RunReport, IntegrationError> {
    check_run(y0, sys.dim(), dt, tau)?;
    let dim = sys.dim();
    let bs = sys.block_size();
    if bs == 0 || !dim.is_multiple_of(bs) {
        return Err(IntegrationError::InvalidRun(format!("block size {bs} does not divide {dim}")));
    }
    let mut y = y0.to_vec();
    sys.constrain(t0, &mut y);
    let steps = planned_steps(tau, dt);
    let mut prev = y.clone();
    let mut f = vec![0.0; dim];
    let mut blocks = vec![0.0; dim * bs];
    let mut rhs = vec![0.0; dim];
    let mut m = Marcher::new(sys, options, observer);
    m.node(0, t0, &y)?;
    let mut t = t0;
    for n in 1..=steps {
        let t_next = if n == steps { t0 + tau } else { t0 + n as f64 * dt };
        let h = t_next - t;
        sys.rhs(t, &y, &mut f)?;
        if n == 1 {
            prev.copy_from_slice(&y);
            for (yi, fi) in y.iter_mut().zip(&f) {
                *yi += h * fi;
            }
        } else {
            sys.local_blocks(t, &y, &mut blocks)?;
            let full = (h - dt).abs() <= 1e-12 * dt;
            for (node, b) in blocks.chunks_exact(bs * bs).enumerate() {
                let r = node * bs..(node + 1) * bs;
                for i in r.clone() {
                    let by: f64 = (0..bs).map(|k| b[(i - r.start) * bs + k] * y[r.start + k]).sum();
                    rhs[i] = if full {
                        let bp: f64 =
                            (0..bs).map(|k| b[(i - r.start) * bs + k] * prev[r.start + k]).sum();
                        prev[i] - dt * bp + 2.0 * dt * (f[i] + by)
                    } else {
                        y[i] + h * (f[i] + by)
                    };
                }
            }
            let step = if full { dt } else { h };
            prev.copy_from_slice(&y);
            for (node, b) in blocks.chunks_exact(bs * bs).enumerate() {
                let r = node * bs..(node + 1) * bs;
                solve_shifted(b, step, &rhs[r.clone()], &mut y[r])?;
            }
        }
        t = t_next;
        sys.constrain(t, &mut y);
        m.node(n, t, &y)?;
    }
    Ok(m.finish(sys, Scheme::DufortFrankel, dt, 1, steps, t, y))
}

/// Solves `(I + h·B)·x = rhs` for one small dense block by Gaussian elimination.
fn solve_shifted(b: &[f64], h: f64, rhs: &[f64], x: &mut [f64]) -> Result<(), ModelError> {
    let n = rhs.len();
    if n == 1 {
        x[0] = rhs[0] / (1.0 + h * b[0]);
        return Ok(());
    }
    let mut a: Vec<f64> = b.iter().map(|v| h * v).collect();
    for i in 0..n {
        a[i * n + i] += 1.0;
    }
    x.copy_from_slice(rhs);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
            .unwrap_or(col);
        if a[piv * n + col] == 0.0 {
            return Err(ModelError::Invalid("singular Du Fort–Frankel block".into()));
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (x[row] - s) / a[row * n + row];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::ScalarDecay;

    #[test]
    fn scalar_recurrence_matches_closed_form() {
        // y1 = 1 − hλ, then y_{n+1} = r·y_{n−1} with r = (1 − hλ)/(1 + hλ)
        let (lambda, h) = (1.0, 0.5);
        let sys = ScalarDecay::new(lambda);
        let r = (1.0 - h * lambda) / (1.0 + h * lambda);
        let y1 = 1.0 - h * lambda;
        for steps in 1..12usize {
            let rep = dufort_frankel_run(&sys, &[1.0], 0.0, h, steps as f64 * h, &RunOptions::default(), None)
                .unwrap();
            let expected = if steps % 2 == 0 {
                r.powi(steps as i32 / 2)
            } else {
                y1 * r.powi(steps as i32 / 2)
            };
            assert!((rep.final_y[0] - expected).abs() < 1e-15, "{steps}");
        }
    }

    #[test]
    fn stiff_scalar_stays_bounded() {
        let sys = ScalarDecay::new(1e4);
        let rep = dufort_frankel_run(&sys, &[1.0], 0.0, 0.5, 50.0, &RunOptions::default(), None).unwrap();
        assert_eq!(rep.steps, 100);
        assert_eq!(rep.rhs_evals, 100);
        assert!(rep.final_y[0].abs() <= 1e4);
    }

    #[test]
    fn shortened_last_step() {
        let sys = ScalarDecay::new(1.0);
        let rep = dufort_frankel_run(&sys, &[1.0], 0.0, 0.5, 1.2, &RunOptions::default(), None).unwrap();
        let y2 = (1.0 - 0.5) / (1.0 + 0.5);
        assert_eq!(rep.steps, 3);
        assert!((rep.final_time - 1.2).abs() < 1e-15);
        assert!((rep.final_y[0] - y2 / (1.0 + 0.2)).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_block_solve() {
        let b = [2.0, 1.0, 0.5, 3.0];
        let mut x = [0.0; 2];
        solve_shifted(&b, 0.1, &[1.0, 2.0], &mut x).unwrap();
        let a = [1.2, 0.1, 0.05, 1.3];
        assert!((a[0] * x[0] + a[1] * x[1] - 1.0).abs() < 1e-14);
        assert!((a[2] * x[0] + a[3] * x[1] - 2.0).abs() < 1e-14);
    }
}
