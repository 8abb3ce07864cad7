//! Derivative-free simplex search for the collocation point study.

/// Result of [`nelder_mead`].
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Stopped because the evaluation budget ran out.
    pub exhausted: bool,
}

/// Minimizes `f` from `x0` with initial simplex edge `step`. The starting
/// point is always evaluated, so the result is never worse than `f(x0)`.
pub fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> Minimum {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let f0 = eval(x0, &mut evals);
    if n == 0 || max_evals <= 1 {
        return Minimum {
            x: x0.to_vec(),
            value: f0,
            evaluations: evals,
            exhausted: n > 0,
        };
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        if evals >= max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut exhausted = simplex.len() < n + 1;
    while !exhausted {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if (worst - best).abs() <= ftol * best.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if evals >= max_evals {
            exhausted = true;
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|s| s.0[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n].0[j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = if evals < max_evals { eval(&xe, &mut evals) } else { f64::INFINITY };
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let x = along(-0.5);
                let v = if evals < max_evals { eval(&x, &mut evals) } else { f64::INFINITY };
                (x, v)
            } else {
                let x = along(0.5);
                let v = if evals < max_evals { eval(&x, &mut evals) } else { f64::INFINITY };
                (x, v)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    if evals >= max_evals {
                        break;
                    }
                    let x: Vec<f64> = x0.iter().zip(&s.0).map(|(a, b)| a + 0.5 * (b - a)).collect();
                    let v = eval(&x, &mut evals);
                    *s = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        evaluations: evals,
        exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 0.5).powi(2);
        let m = nelder_mead(&mut f, &[0.0, 0.0], 0.3, 500, 1e-14);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] + 0.5).abs() < 1e-5, "{:?}", m.x);
        assert!(!m.exhausted);
    }

    #[test]
    fn respects_budget_and_start() {
        let mut count = 0;
        let mut f = |x: &[f64]| {
            count += 1;
            (x[0] * 3.0).sin() + x[1] * x[1] + x[2].abs()
        };
        let start = [0.2, 0.1, -0.3];
        let f0 = (0.6f64).sin() + 0.01 + 0.3;
        let m = nelder_mead(&mut f, &start, 0.1, 20, 0.0);
        assert!(m.evaluations <= 20);
        assert_eq!(count, m.evaluations);
        assert!(m.value <= f0);
        assert!(m.exhausted);
    }

    #[test]
    fn infeasible_points_are_rejected() {
        let mut f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.1).powi(2) };
        let m = nelder_mead(&mut f, &[0.5], 0.4, 200, 1e-12);
        assert!((m.x[0] - 0.1).abs() < 1e-4);
    }

    #[test]
    fn no_parameters() {
        let mut f = |_: &[f64]| 3.0;
        let m = nelder_mead(&mut f, &[], 1.0, 200, 0.0);
        assert_eq!((m.value, m.evaluations, m.exhausted), (3.0, 1, false));
    }
}
