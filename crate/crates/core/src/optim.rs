//! Minimizers used by the estimators: Nelder-Mead, BFGS with numerical
//! gradients, and golden-section search.

/// Outcome of a Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    /// Initial simplex edge length.
    pub step: f64,
    /// Stop when max-min of the simplex values falls below this.
    pub ftol: f64,
    /// ... and the simplex diameter below this.
    pub xtol: f64,
    pub max_evals: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            step: 0.3,
            ftol: 1e-13,
            xtol: 1e-7,
            max_evals: 4_000,
        }
    }
}

/// Nelder-Mead simplex search with standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// Non-finite objective values are treated as +∞.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: NmOptions) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if n == 0 {
        let fx = eval(x0, &mut evals);
        return NmResult {
            x: vec![],
            fx,
            evals,
            converged: true,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
    let mut converged = false;

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diam = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0_f64, f64::max);
        if spread.is_finite() && spread <= opts.ftol && diam <= opts.xtol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for (x, b) in simplex[i].iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    values[i] = eval(&simplex[i], &mut evals);
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    NmResult {
        x: simplex[best].clone(),
        fx: values[best],
        evals,
        converged,
    }
}

/// Nelder-Mead followed by restarts from the incumbent with a fresh, smaller
/// simplex until a restart no longer improves by more than `ftol`.
pub fn nelder_mead_restarted<F>(mut f: F, x0: &[f64], opts: NmOptions, restarts: usize) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut res = nelder_mead(&mut f, x0, opts);
    let mut step = opts.step;
    for _ in 0..restarts {
        step = (step * 0.3).max(1e-3);
        let again = nelder_mead(&mut f, &res.x, NmOptions { step, ..opts });
        let improved = res.fx - again.fx;
        let total = res.evals + again.evals;
        if again.fx <= res.fx {
            res = NmResult {
                evals: total,
                ..again
            };
        } else {
            res.evals = total;
        }
        if improved <= opts.ftol {
            break;
        }
    }
    res
}

/// Golden-section search for a minimum of a unimodal function on `[lo, hi]`.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    /// Stop when the largest gradient component falls below this.
    pub gtol: f64,
    /// ... or when an iteration improves f by less than `ftol (|f| + 1)`.
    pub ftol: f64,
    pub max_iter: usize,
    /// Relative central-difference step.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-6,
            ftol: 1e-13,
            max_iter: 200,
            fd_step: 1e-5,
        }
    }
}

fn central_gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], step: f64, evals: &mut usize) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step * (1.0 + x[i].abs());
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            *evals += 2;
            let g = (fp - fm) / (2.0 * h);
            if g.is_finite() {
                g
            } else {
                0.0
            }
        })
        .collect()
}

/// BFGS quasi-Newton minimization with central-difference gradients and a
/// backtracking Armijo line search. Non-finite objective values are
/// treated as +∞.
pub fn bfgs<F>(mut f: F, x0: &[f64], opts: BfgsOptions) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0.to_vec();
    let mut fx = eval(&x);
    evals += 1;
    if n == 0 || !fx.is_finite() {
        return NmResult {
            x,
            fx,
            evals,
            converged: n == 0,
        };
    }
    let mut g = central_gradient(&mut eval, &x, opts.fd_step, &mut evals);
    let mut h = vec![0.0; n * n];
    let reset = |h: &mut [f64]| {
        h.iter_mut().for_each(|v| *v = 0.0);
        (0..n).for_each(|i| h[i * n + i] = 1.0);
    };
    reset(&mut h);
    let mut converged = false;
    let mut fresh = true;
    for _ in 0..opts.max_iter {
        let gmax = g.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if gmax < opts.gtol {
            converged = true;
            break;
        }
        let mut p: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            reset(&mut h);
            p = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
            fresh = true;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            let fnew = eval(&xn);
            evals += 1;
            if fnew <= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fnew));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            if fresh {
                // Steepest descent cannot improve: a numerical optimum.
                converged = gmax < opts.gtol.sqrt();
                break;
            }
            reset(&mut h);
            fresh = true;
            continue;
        };
        let gn = central_gradient(&mut eval, &xn, opts.fd_step, &mut evals);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let improvement = fx - fnew;
        x = xn;
        g = gn;
        fx = fnew;
        fresh = false;
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        if improvement <= opts.ftol * (fx.abs() + 1.0) {
            converged = g.iter().fold(0.0_f64, |a, v| a.max(v.abs())) < opts.gtol.sqrt();
            break;
        }
    }
    NmResult {
        x,
        fx,
        evals,
        converged,
    }
}
