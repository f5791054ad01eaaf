//! Nelder-Mead simplex descent on the unit cube.
//!
//! Points outside `[0, 1]^k` evaluate to `+inf`, so the simplex folds back
//! inside the box on its own.

use std::cell::Cell;

pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn inside(x: &[f64]) -> bool {
    x.iter().all(|v| (0.0..=1.0).contains(v))
}

/// Minimises `objective` from `x0`. Stops when the simplex diameter falls
/// below `tol` or after `max_evals` evaluations. A converged simplex is
/// rebuilt once around its best vertex to guard against collapse on a
/// non-stationary point.
pub fn minimize<F>(objective: F, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let evals = Cell::new(0usize);
    let mut eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        if inside(x) {
            let v = objective(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        } else {
            f64::INFINITY
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_f = eval(&best_x);
    let mut converged = false;
    let mut restarts = 0;
    while evals.get() < max_evals {
        let (x, f, done) = run(&mut eval, &best_x, best_f, step, tol, max_evals, &evals);
        let improved = f < best_f;
        if f <= best_f {
            best_x = x;
            best_f = f;
        }
        if !done {
            break;
        }
        if restarts >= 1 && !improved {
            converged = true;
            break;
        }
        restarts += 1;
        if restarts > 8 {
            converged = true;
            break;
        }
    }
    SimplexOutcome {
        x: best_x,
        f: best_f,
        evaluations: evals.get(),
        converged,
    }
}

fn run<E>(
    eval: &mut E,
    x0: &[f64],
    f0: f64,
    step: f64,
    tol: f64,
    max_evals: usize,
    evals: &Cell<usize>,
) -> (Vec<f64>, f64, bool)
where
    E: FnMut(&[f64]) -> f64,
{
    let k = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..k {
        let mut x = x0.to_vec();
        x[i] += if x[i] + step <= 1.0 { step } else { -step };
        let f = eval(&x);
        simplex.push((x, f));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < tol {
            let (x, f) = simplex.swap_remove(0);
            return (x, f, true);
        }
        if evals.get() >= max_evals {
            let (x, f) = simplex.swap_remove(0);
            return (x, f, false);
        }

        let centroid: Vec<f64> = (0..k)
            .map(|j| simplex[..k].iter().map(|(x, _)| x[j]).sum::<f64>() / k as f64)
            .collect();
        let worst = simplex[k].clone();
        let along = |c: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(m, w)| m + c * (m - w)).collect() };

        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe);
            simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[k - 1].1 {
            simplex[k] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[k] = (xc, fc);
            continue;
        }
        // Shrink towards the best vertex.
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            let f = eval(&x);
            *vertex = (x, f);
        }
    }
}
