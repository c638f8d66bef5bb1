//! Small box-constrained optimizers shared by the calibration routines.

use nalgebra::{DMatrix, DVector};

/// Per-coordinate box; `lo`/`hi` may be infinite.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn project(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub converged: bool,
}

/// Nelder–Mead with every trial point projected onto the box.
///
/// Stops when the spread of simplex values falls below
/// `f_tol * (1 + |f_best|)` and the simplex diameter below `x_tol`, or after
/// `max_evals` evaluations.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], bounds: &Bounds, max_evals: usize, f_tol: f64, x_tol: f64) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let make = |x: &[f64]| {
        let mut x = x.to_vec();
        bounds.project(&mut x);
        x
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(make(x0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        let mut p = make(&v);
        if p[i] == simplex[0][i] {
            // pinned at a bound: step the other way
            v[i] = x0[i] - step[i];
            p = make(&v);
        }
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let mut evals = n + 1;
    let mut converged = false;

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[n]);
        let diameter = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= f_tol * (1.0 + best.abs()) && diameter <= x_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let v: Vec<f64> = (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect();
            make(&v)
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let x = along(-0.5);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&x);
            (x, v)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=n {
            let v: Vec<f64> = (0..n).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
            simplex[i] = make(&v);
            values[i] = eval(&simplex[i]);
        }
        evals += n;
    }

    let i = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum {
        x: simplex[i].clone(),
        f: values[i],
        converged,
    }
}

/// Gauss–Newton on a residual vector with a forward-difference Jacobian,
/// pseudo-inverse steps, step halving and projection onto the box.
pub fn gauss_newton_polish<R>(residuals: R, x0: &[f64], bounds: &Bounds, max_iter: usize) -> Minimum
where
    R: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let sse = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut r = residuals(&x);
    let mut f = sse(&r);
    let mut converged = false;
    for _ in 0..max_iter {
        let m = r.len();
        let mut jac = DMatrix::zeros(m, n);
        for j in 0..n {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            // difference away from an active upper bound
            let h = if xp[j] + h > bounds.hi[j] { -h } else { h };
            xp[j] += h;
            let rp = residuals(&xp);
            for i in 0..m {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        if jac.iter().any(|v| !v.is_finite()) {
            break;
        }
        let rv = DVector::from_column_slice(&r);
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let Ok(step) = svd.solve(&(-rv), 1e-10 * smax.max(f64::MIN_POSITIVE)) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + lambda * s).collect();
            bounds.project(&mut trial);
            let rt = residuals(&trial);
            let ft = sse(&rt);
            if ft.is_finite() && ft < f {
                let rel = (f - ft) / f.max(f64::MIN_POSITIVE);
                x = trial;
                r = rt;
                f = ft;
                accepted = true;
                if rel < 1e-12 {
                    converged = true;
                }
                break;
            }
            lambda *= 0.5;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    Minimum {
        x,
        f,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let b = Bounds { lo: vec![-5.0; 2], hi: vec![5.0; 2] };
        let m = nelder_mead(rosenbrock, &[-1.2, 1.0], &[0.5, 0.5], &b, 20_000, 1e-16, 1e-10);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn projection_respects_bounds() {
        // unconstrained minimum at (-1, -1) lies outside the box
        let f = |x: &[f64]| (x[0] + 1.0).powi(2) + (x[1] + 1.0).powi(2);
        let b = Bounds { lo: vec![0.0; 2], hi: vec![3.0; 2] };
        let m = nelder_mead(f, &[2.0, 2.0], &[0.5, 0.5], &b, 5_000, 1e-14, 1e-10);
        assert!(m.x.iter().all(|v| v.abs() < 1e-8), "{:?}", m.x);
    }

    #[test]
    fn polish_solves_exponential_fit() {
        let t: Vec<f64> = (0..30).map(f64::from).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.0 * (-0.3 * t).exp()).collect();
        let res = |p: &[f64]| t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() - y).collect::<Vec<_>>();
        let b = Bounds { lo: vec![0.0; 2], hi: vec![f64::INFINITY; 2] };
        let m = gauss_newton_polish(res, &[1.5, 0.2], &b, 100);
        assert!((m.x[0] - 2.0).abs() < 1e-8 && (m.x[1] - 0.3).abs() < 1e-8);
    }
}
