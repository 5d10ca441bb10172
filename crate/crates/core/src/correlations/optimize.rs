//! Derivative-free local minimization (Nelder–Mead simplex).

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Converged when the spread of simplex values falls below this.
    pub f_tolerance: f64,
    /// and the largest vertex offset from the best vertex falls below this.
    pub x_tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            f_tolerance: 1e-12,
            x_tolerance: 1e-9,
            max_evaluations: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimize `f` from `x0` with an axis-aligned initial simplex of edge `step`.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], options: SimplexOptions) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(step.len(), n, "one step per coordinate");
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    while evaluations.get() < options.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() <= options.f_tolerance && size <= options.x_tolerance {
            converged = true;
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64, out: &mut Vec<f64>, worst: &[f64]| {
            for k in 0..n {
                out[k] = centroid[k] + t * (worst[k] - centroid[k]);
            }
        };

        let worst_x = simplex[n].0.clone();
        along(-alpha, &mut trial, &worst_x);
        let fr = eval(&trial);
        if fr < simplex[0].1 {
            let reflected = trial.clone();
            along(-alpha * gamma, &mut trial, &worst_x);
            let fe = eval(&trial);
            simplex[n] = if fe < fr { (trial.clone(), fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (trial.clone(), fr);
        } else {
            let outside = fr < worst;
            along(if outside { -alpha * rho } else { rho }, &mut trial, &worst_x);
            let fc = eval(&trial);
            if fc < fr.min(worst) {
                simplex[n] = (trial.clone(), fc);
            } else {
                let x_best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (v, b) in vertex.0.iter_mut().zip(&x_best) {
                        *v = b + sigma * (*v - b);
                    }
                    vertex.1 = eval(&vertex.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        evaluations: evaluations.get(),
        converged,
    }
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tolerance: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tolerance {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(
            f,
            &[-1.2, 1.0],
            &[0.1, 0.1],
            SimplexOptions {
                max_evaluations: 10_000,
                ..Default::default()
            },
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_in_five_dimensions() {
        let f = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2))
                .sum()
        };
        let r = nelder_mead(f, &[0.0; 5], &[0.2; 5], SimplexOptions::default());
        assert!(r.value < 1e-11);
    }

    #[test]
    fn evaluation_cap_is_respected() {
        let r = nelder_mead(
            |x: &[f64]| x[0].powi(2),
            &[3.0],
            &[1.0],
            SimplexOptions {
                max_evaluations: 5,
                ..Default::default()
            },
        );
        assert!(!r.converged);
        assert!(r.evaluations <= 7);
    }

    #[test]
    fn golden_section() {
        let (x, v) = golden_max(|x| -(x - 0.3).powi(2) + 2.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7 && (v - 2.0).abs() < 1e-12);
    }
}
