//! In-house optimizers: Nelder-Mead simplex search and BFGS with
//! backtracking line search. Both are dimension-generic but tuned for the
//! small problems in this crate (6 angles, 64 tomography parameters).

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Converged when both the simplex f-spread and diameter fall below these.
    pub f_tolerance: f64,
    pub x_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 4000,
            f_tolerance: 1e-12,
            x_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `f` from `x0` with initial simplex steps `scale` per coordinate.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    scale: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(scale.len(), n);
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += scale[i];
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        // Order the simplex by value.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        if spread.abs() < opts.f_tolerance && diameter < opts.x_tolerance {
            converged = true;
            break;
        }

        // Centroid of all points except the worst.
        let mut centroid = vec![0.0; n];
        for (idx, p) in simplex.iter().enumerate() {
            if idx == worst {
                continue;
            }
            for k in 0..n {
                centroid[k] += p[k] / n as f64;
            }
        }

        let blend = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|k| centroid[k] + t * (centroid[k] - simplex[worst][k]))
                .collect()
        };

        let reflected = blend(alpha);
        let f_reflected = f(&reflected);
        if f_reflected < values[best] {
            let expanded = blend(gamma);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let contracted = blend(-rho);
            let f_contracted = f(&contracted);
            if f_contracted < values[worst] {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // Shrink toward the best vertex.
                let best_point = simplex[best].clone();
                for (idx, p) in simplex.iter_mut().enumerate() {
                    if idx == best {
                        continue;
                    }
                    for k in 0..n {
                        p[k] = best_point[k] + sigma * (p[k] - best_point[k]);
                    }
                    values[idx] = f(p);
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap())
        .unwrap();
    NelderMeadResult {
        x: simplex[best].clone(),
        f: values[best],
        iterations,
        converged,
    }
}

/// Settings for [`bfgs`].
#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Improvement threshold of the convergence window.
    pub f_tolerance: f64,
    /// Converged after this many consecutive iterations below `f_tolerance`.
    pub stall_window: usize,
    pub gradient_tolerance: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            f_tolerance: 1e-9,
            stall_window: 10,
            gradient_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step.
    pub trace: Vec<f64>,
}

/// Minimize a smooth function with analytic gradient by dense BFGS.
///
/// `fg` returns (value, gradient). Steps are chosen by backtracking Armijo
/// line search, so every accepted iterate improves the objective.
pub fn bfgs<F>(mut fg: F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut grad) = fg(&x);
    let mut trace = vec![fx];

    // Inverse Hessian approximation, dense row-major.
    let mut h = vec![0.0f64; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }

    let mut stall = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut scaled = false;

    while iterations < opts.max_iterations {
        iterations += 1;

        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < opts.gradient_tolerance {
            converged = true;
            break;
        }

        // Search direction d = -H g.
        let mut d = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += h[i * n + j] * grad[j];
            }
            d[i] = -acc;
        }
        let mut slope: f64 = d.iter().zip(&grad).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // Not a descent direction; reset to steepest descent.
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            for i in 0..n {
                d[i] = -grad[i];
            }
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }

        // Weak Wolfe line search by bisection bracketing: sufficient
        // decrease plus a curvature condition, so the quasi-Newton update
        // always sees positive s.y.
        let c1 = 1e-4;
        let c2 = 0.9;
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let mut step = 1.0f64;
        let mut accepted: Option<(Vec<f64>, f64, Vec<f64>)> = None;
        let mut fallback: Option<(Vec<f64>, f64, Vec<f64>)> = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (ft, gt) = fg(&xt);
            if ft > fx + c1 * step * slope {
                hi = step;
                step = 0.5 * (lo + hi);
            } else {
                if fallback.as_ref().is_none_or(|(_, fb, _)| ft <= *fb) {
                    fallback = Some((xt.clone(), ft, gt.clone()));
                }
                let dg: f64 = gt.iter().zip(&d).map(|(a, b)| a * b).sum();
                if dg < c2 * slope {
                    lo = step;
                    step = if hi.is_finite() {
                        0.5 * (lo + hi)
                    } else {
                        2.0 * step
                    };
                } else {
                    accepted = Some((xt, ft, gt));
                    break;
                }
            }
            if hi - lo < 1e-16 * (1.0 + lo) {
                break;
            }
        }
        let Some((xt, ft, gt)) = accepted.or(fallback) else {
            // No downhill step representable.
            converged = true;
            break;
        };

        let improvement = fx - ft;
        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&grad).map(|(a, b)| a - b).collect();
        x = xt;
        fx = ft;
        grad = gt;
        trace.push(fx);

        if improvement < opts.f_tolerance {
            stall += 1;
            if stall >= opts.stall_window {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }

        // BFGS inverse update, skipped when the curvature condition fails.
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-12 * s_norm * y_norm {
            if !scaled {
                // Scale the initial inverse Hessian to the observed
                // curvature before the first update.
                let yy: f64 = y.iter().map(|v| v * v).sum();
                let gamma = sy / yy;
                if gamma.is_finite() && gamma > 0.0 {
                    for v in h.iter_mut() {
                        *v *= gamma;
                    }
                }
                scaled = true;
            }
            let rho_k = 1.0 / sy;
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let mut hy = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += h[i * n + j] * y[j];
                }
                hy[i] = acc;
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho_k * (s[i] * hy[j] + hy[i] * s[j])
                        + rho_k * rho_k * yhy * s[i] * s[j]
                        + rho_k * s[i] * s[j];
                }
            }
        }
    }

    BfgsResult {
        x,
        f: fx,
        iterations,
        converged,
        trace,
    }
}
