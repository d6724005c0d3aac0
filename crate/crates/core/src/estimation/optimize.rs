//! Derivative-free Nelder–Mead simplex minimization with restarts.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Stop when the spread of objective values across the simplex is below
    /// this value.
    pub f_tol: f64,
    /// Stop when every vertex is within this distance of the best one.
    pub x_tol: f64,
    pub initial_step: f64,
    /// Fresh simplices built around the incumbent after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 4000,
            f_tol: 1e-11,
            x_tol: 1e-8,
            initial_step: 0.25,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `start`. Non-finite objective values are treated as `+∞`.
pub fn minimize(f: impl Fn(&[f64]) -> f64, start: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut best = run(&eval, start, opts, opts.max_iterations);
    for _ in 0..opts.restarts {
        let budget = opts.max_iterations.saturating_sub(best.iterations);
        if budget == 0 {
            break;
        }
        let again = run(&eval, &best.x, opts, budget);
        let improved = again.value < best.value - opts.f_tol;
        let iterations = best.iterations + again.iterations;
        let evaluations = best.evaluations + again.evaluations;
        if again.value <= best.value {
            best = Minimum { iterations, evaluations, ..again };
        } else {
            best.iterations = iterations;
            best.evaluations = evaluations;
        }
        if !improved {
            break;
        }
    }
    best
}

fn run(f: &impl Fn(&[f64]) -> f64, start: &[f64], opts: &NelderMeadOptions, budget: usize) -> Minimum {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += if v[i].abs() > 1e-3 { opts.initial_step * v[i].abs().max(1.0) } else { opts.initial_step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evaluations = n + 1;
    let mut iterations = 0;
    let mut converged = false;

    let point = |centroid: &[f64], worst: &[f64], coef: f64| -> Vec<f64> {
        centroid.iter().zip(worst).map(|(c, w)| c + coef * (c - w)).collect()
    };

    while iterations < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol || size <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let reflected = point(&centroid, &simplex[n], REFLECT);
        let f_r = f(&reflected);
        evaluations += 1;
        if f_r < values[0] {
            let expanded = point(&centroid, &simplex[n], EXPAND);
            let f_e = f(&expanded);
            evaluations += 1;
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
            continue;
        }
        if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
            continue;
        }
        let (candidate, f_c) = if f_r < values[n] {
            let c = point(&centroid, &simplex[n], CONTRACT);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = point(&centroid, &simplex[n], -CONTRACT);
            let fc = f(&c);
            (c, fc)
        };
        evaluations += 1;
        if f_c < values[n].min(f_r) {
            simplex[n] = candidate;
            values[n] = f_c;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + SHRINK * (x - b))
                .collect();
            values[i] = f(&shrunk);
            simplex[i] = shrunk;
        }
        evaluations += n;
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(f, &[-1.2, 1.0], &NelderMeadOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn quadratic_bowl_in_four_dimensions() {
        let target = [0.3, -1.0, 2.0, 0.0];
        let f = |x: &[f64]| x.iter().zip(&target).enumerate().map(|(i, (a, b))| (i + 1) as f64 * (a - b).powi(2)).sum();
        let m = minimize(f, &[0.0; 4], &NelderMeadOptions::default());
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn infinite_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) };
        let m = minimize(f, &[0.1], &NelderMeadOptions::default());
        assert!((m.x[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn iteration_budget_is_respected() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions { max_iterations: 5, ..Default::default() };
        let m = minimize(f, &[-1.2, 1.0], &opts);
        assert!(!m.converged);
        assert!(m.iterations <= 5);
    }
}
