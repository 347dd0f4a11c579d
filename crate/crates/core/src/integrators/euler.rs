use super::{check_run, planned_steps, IntegrationError, Marcher, Observer, OdeSystem, RunOptions, RunReport, Scheme};

/// Explicit Euler march `y ← y + Δt·f(t, y)` over `[t0, t0 + tau]`.
///
/// Refuses a step beyond the explicit limit unless `allow_unstable` is set.
pub fn euler_run<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    dt: f64,
    tau: f64,
    options: &RunOptions,
    observer: Option<Observer<'_>>,
) -> Result<RunReport, IntegrationError> {
    check_run(y0, sys.dim(), dt, tau)?;
    let mut y = y0.to_vec();
    sys.constrain(t0, &mut y);
    let est = sys.stability(t0, &y)?;
    let unstable = dt > est.dt_exp * (1.0 + 1e-12);
    if unstable && !options.allow_unstable {
        return Err(IntegrationError::CflViolation { dt, dt_exp: est.dt_exp });
    }

    let steps = planned_steps(tau, dt);
    let mut f = vec![0.0; y.len()];
    let mut m = Marcher::new(sys, options, observer);
    m.node(0, t0, &y)?;
    let mut t = t0;
    for n in 1..=steps {
        let t_next = if n == steps { t0 + tau } else { t0 + n as f64 * dt };
        let h = t_next - t;
        sys.rhs(t, &y, &mut f)?;
        for (yi, fi) in y.iter_mut().zip(&f) {
            *yi += h * fi;
        }
        t = t_next;
        sys.constrain(t, &mut y);
        m.node(n, t, &y)?;
    }
    let mut report = m.finish(sys, Scheme::Euler, dt, 1, steps, t, y);
    report.unstable_allowed = unstable;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::ScalarDecay;

    #[test]
    fn one_step_of_scalar_decay() {
        let sys = ScalarDecay::new(1.0);
        let r = euler_run(&sys, &[1.0], 0.0, 0.1, 0.1, &RunOptions::default(), None).unwrap();
        assert!((r.final_y[0] - 0.9).abs() < 1e-15);
        assert_eq!(r.steps, 1);
        assert_eq!(r.n_t, 2);
        assert_eq!(r.rhs_evals, 1);
    }

    #[test]
    fn unstable_step_is_refused_then_diverges_when_allowed() {
        let sys = ScalarDecay::new(100.0);
        let dt = 2.5 / 100.0;
        let e = euler_run(&sys, &[1.0], 0.0, dt, 10.0, &RunOptions::default(), None);
        assert!(matches!(e, Err(IntegrationError::CflViolation { .. })));
        let opts = RunOptions { allow_unstable: true, ..Default::default() };
        let e = euler_run(&sys, &[1.0], 0.0, dt, 10.0, &opts, None);
        assert!(matches!(e, Err(IntegrationError::Divergence { step, .. }) if step > 1));
    }

    #[test]
    fn lands_exactly_on_the_horizon() {
        let sys = ScalarDecay::new(1.0);
        let r = euler_run(&sys, &[1.0], 0.0, 0.3, 1.0, &RunOptions::default(), None).unwrap();
        assert_eq!(r.steps, 4);
        assert_eq!(r.final_time, 1.0);
        let expected = 0.7f64.powi(3) * 0.9;
        assert!((r.final_y[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn observer_sees_every_node() {
        let sys = ScalarDecay::new(1.0);
        let mut times = Vec::new();
        let mut obs = |t: f64, _y: &[f64]| times.push(t);
        euler_run(&sys, &[1.0], 0.0, 0.25, 1.0, &RunOptions::default(), Some(&mut obs)).unwrap();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
