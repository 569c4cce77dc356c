//! Derivative-free Nelder–Mead simplex search.

/// Options for a single simplex run.
#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Terminate when the simplex diameter drops below this.
    pub diameter_tol: f64,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Number of restarts from the best vertex after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            diameter_tol: 1e-10,
            initial_step: 0.1,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting at `x0`.
///
/// `project` is applied to every trial point before evaluation, which keeps
/// the simplex on a constraint slice (e.g. `det X = 1`). Objective values may
/// be `+inf` to mark infeasible points.
pub fn minimize<F, P>(f: F, project: P, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let mut start = x0.to_vec();
    project(&mut start);
    let mut total_iters = 0;
    let mut total_evals = 0;
    let mut best = run(&f, &project, &start, opts, &mut total_iters, &mut total_evals);
    for _ in 0..opts.restarts {
        let again = run(&f, &project, &best.0, opts, &mut total_iters, &mut total_evals);
        let improved = again.1 < best.1 - 1e-15 * best.1.abs().max(1.0);
        if again.1 <= best.1 {
            best = (again.0, again.1, again.2);
        }
        if !improved {
            break;
        }
    }
    NelderMeadResult {
        x: best.0,
        value: best.1,
        iterations: total_iters,
        evaluations: total_evals,
        converged: best.2,
    }
}

fn run<F, P>(
    f: &F,
    project: &P,
    x0: &[f64],
    opts: &NelderMeadOptions,
    iters: &mut usize,
    evals: &mut usize,
) -> (Vec<f64>, f64, bool)
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        let step = if x0[i].abs() > 1e-8 {
            opts.initial_step * x0[i].abs().max(0.25)
        } else {
            opts.initial_step
        };
        v[i] += step;
        project(&mut v);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, evals)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        *iters += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..].iter().map(|v| dist(v, &simplex[0])).fold(0.0, f64::max);
        if diameter < opts.diameter_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect();
            project(&mut p);
            p
        };

        let xr = along(alpha);
        let fr = eval(&xr, evals);
        if fr < values[0] {
            let xe = along(gamma);
            let fe = eval(&xe, evals);
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
            let xc = along(rho * alpha);
            let fc = eval(&xc, evals);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc, evals);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].clone();
        for i in 1..=n {
            let mut p: Vec<f64> = best.iter().zip(&simplex[i]).map(|(b, x)| b + sigma * (x - b)).collect();
            project(&mut p);
            values[i] = eval(&p, evals);
            simplex[i] = p;
        }
    }
    let (i_best, _) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    (simplex[i_best].clone(), values[i_best], converged)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
