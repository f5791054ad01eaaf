//! Multi-start least-squares fitting with slaved linear coefficients.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear::{residuals, solve_slaved};
use super::models::{eval_model, FitParams, MatchedParams, ModelKind};
use super::simplex;
use crate::error::{Error, Result};
use crate::series::{IndexSeries, MonthRange, MonthlySeries};

/// Closest admissible critical time after the last fitted month, in years.
pub const TC_MIN_AHEAD: f64 = 1.0 / 12.0;
/// Farthest admissible critical time after the last fitted month, in years.
pub const TC_MAX_AHEAD: f64 = 20.0;
pub const EXPONENT_BOUNDS: (f64, f64) = (-2.0, 2.0);
/// Exponents closer to zero than this are rejected: the power term would be
/// indistinguishable from the constant.
pub const EXPONENT_EXCLUSION: f64 = 1e-4;
/// Bounds on `tau`, in years (0.01 month up to 1000 years).
pub const TAU_BOUNDS: (f64, f64) = (0.01 / 12.0, 1000.0);
/// Bounds on exponential rates, per year.
pub const RATE_BOUNDS: (f64, f64) = (-2.0, 2.0);
/// Minimum rate magnitude for the matched crossover, whose slope matching
/// divides by the rate.
pub const MATCHED_RATE_EXCLUSION: f64 = 1e-3;

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_starts: usize,
    /// Objective evaluations allowed per simplex run.
    pub max_evals: usize,
    /// Simplex diameter, in the unit-cube parametrisation, at which a start
    /// counts as converged.
    pub tol: f64,
    /// Seeds the quasi-random start design.
    pub seed: u64,
    /// Refine each simplex optimum with damped Gauss-Newton steps.
    pub polish: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_starts: 32,
            max_evals: 2000,
            tol: 1e-9,
            seed: 0,
            polish: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: ModelKind,
    pub params: FitParams,
    /// Root-mean-square residual over the window, in index units.
    pub rms: f64,
    pub window: MonthRange,
    pub n_points: usize,
    pub n_starts: usize,
    pub converged: bool,
    /// Final rms of every start, in start order.
    pub start_rms: Vec<f64>,
    /// Objective evaluations spent by the simplex runs.
    #[serde(default)]
    pub evaluations: usize,
}

impl FitResult {
    /// Critical time as a fractional calendar year.
    pub fn critical_time(&self) -> Option<f64> {
        self.params.critical_time()
    }
}

/// Root-mean-square residual of `params` on the `(t, y)` samples.
pub fn rms_of(params: &FitParams, t: &[f64], y: &[f64]) -> Result<f64> {
    let mut ss = 0.0;
    for (ti, yi) in t.iter().zip(y) {
        let r = yi - eval_model(params, *ti)?;
        ss += r * r;
    }
    Ok((ss / t.len() as f64).sqrt())
}

fn lerp(bounds: (f64, f64), u: f64) -> f64 {
    bounds.0 + u * (bounds.1 - bounds.0)
}

fn log_lerp(bounds: (f64, f64), u: f64) -> f64 {
    (bounds.0.ln() + u * (bounds.1.ln() - bounds.0.ln())).exp()
}

/// The fit problem of one model on one window: maps unit-cube coordinates
/// to the nonlinear parameters and builds the linear basis.
pub(crate) struct Problem<'a> {
    pub kind: ModelKind,
    pub t: &'a [f64],
    pub y: &'a [f64],
    pub t_start: f64,
    pub t_end: f64,
}

impl<'a> Problem<'a> {
    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::Exponential => 1,
            ModelKind::PowerLaw => 2,
            ModelKind::TanhCrossover | ModelKind::ExpTimesPower | ModelKind::ExpPlusPower => 3,
            ModelKind::MatchedCrossover => 4,
        }
    }

    fn critical(&self, u: f64) -> f64 {
        self.t_end + log_lerp((TC_MIN_AHEAD, TC_MAX_AHEAD), u)
    }

    fn exponent(u: f64) -> Option<f64> {
        let m = lerp(EXPONENT_BOUNDS, u);
        (m.abs() >= EXPONENT_EXCLUSION).then_some(m)
    }

    /// Nonlinear parameters at `u`, or `None` where inadmissible.
    pub fn decode(&self, u: &[f64]) -> Option<Vec<f64>> {
        match self.kind {
            ModelKind::PowerLaw => Some(vec![self.critical(u[0]), Self::exponent(u[1])?]),
            ModelKind::Exponential => Some(vec![lerp(RATE_BOUNDS, u[0])]),
            ModelKind::TanhCrossover => Some(vec![
                self.critical(u[0]),
                Self::exponent(u[1])?,
                log_lerp(TAU_BOUNDS, u[2]),
            ]),
            ModelKind::ExpTimesPower | ModelKind::ExpPlusPower => Some(vec![
                lerp(RATE_BOUNDS, u[0]),
                self.critical(u[1]),
                Self::exponent(u[2])?,
            ]),
            ModelKind::MatchedCrossover => {
                let mu = lerp(RATE_BOUNDS, u[0]);
                if mu.abs() < MATCHED_RATE_EXCLUSION {
                    return None;
                }
                let t_star = lerp((self.t_start, self.t_end), u[3]);
                Some(vec![mu, self.critical(u[1]), Self::exponent(u[2])?, t_star])
            }
        }
    }

    /// Basis columns multiplying the slaved coefficients.
    pub fn basis(&self, theta: &[f64]) -> Vec<Vec<f64>> {
        let ones = vec![1.0; self.t.len()];
        let t = self.t;
        let t_ref = self.t_start;
        match self.kind {
            ModelKind::PowerLaw => {
                let (tc, m) = (theta[0], theta[1]);
                vec![ones, t.iter().map(|ti| (tc - ti).powf(m)).collect()]
            }
            ModelKind::Exponential => {
                let mu = theta[0];
                vec![ones, t.iter().map(|ti| (mu * (ti - t_ref)).exp()).collect()]
            }
            ModelKind::TanhCrossover => {
                let (tc, m, tau) = (theta[0], theta[1], theta[2]);
                vec![ones, t.iter().map(|ti| ((tc - ti) / tau).tanh().powf(m)).collect()]
            }
            ModelKind::ExpTimesPower => {
                let (mu, tc, m) = (theta[0], theta[1], theta[2]);
                let col = t.iter().map(|ti| (mu * (ti - t_ref)).exp() * (tc - ti).powf(m));
                vec![ones, col.collect()]
            }
            ModelKind::ExpPlusPower => {
                let (mu, tc, m) = (theta[0], theta[1], theta[2]);
                vec![
                    ones,
                    t.iter().map(|ti| (mu * (ti - t_ref)).exp()).collect(),
                    t.iter().map(|ti| (tc - ti).powf(m)).collect(),
                ]
            }
            ModelKind::MatchedCrossover => {
                let (mu, tc, m, ts) = (theta[0], theta[1], theta[2], theta[3]);
                let p_star = (tc - ts).powf(m);
                let slope = m * (tc - ts).powf(m - 1.0);
                let col = t.iter().map(|&ti| {
                    if ti < ts {
                        p_star - slope * (mu * (ti - ts)).exp_m1() / mu
                    } else {
                        (tc - ti).powf(m)
                    }
                });
                vec![ones, col.collect()]
            }
        }
    }

    pub fn params(&self, theta: &[f64], coef: &[f64]) -> FitParams {
        let t_ref = self.t_start;
        match self.kind {
            ModelKind::PowerLaw => FitParams::PowerLaw {
                a: coef[0],
                b: coef[1],
                tc: theta[0],
                m: theta[1],
            },
            ModelKind::Exponential => FitParams::Exponential {
                a: coef[0],
                b: coef[1],
                mu: theta[0],
                t_ref,
            },
            ModelKind::TanhCrossover => FitParams::TanhCrossover {
                a: coef[0],
                b: coef[1],
                tc: theta[0],
                m: theta[1],
                tau: theta[2],
            },
            ModelKind::ExpTimesPower => FitParams::ExpTimesPower {
                a: coef[0],
                b: coef[1],
                mu: theta[0],
                tc: theta[1],
                m: theta[2],
                t_ref,
            },
            ModelKind::ExpPlusPower => FitParams::ExpPlusPower {
                a: coef[0],
                b: coef[1],
                c: coef[2],
                mu: theta[0],
                tc: theta[1],
                m: theta[2],
                t_ref,
            },
            ModelKind::MatchedCrossover => {
                let (mu, tc, m, t_star) = (theta[0], theta[1], theta[2], theta[3]);
                let (pa, pb) = (coef[0], coef[1]);
                let e_star = (mu * (t_star - t_ref)).exp();
                let b = -pb * m * (tc - t_star).powf(m - 1.0) / (mu * e_star);
                let a = pa + pb * (tc - t_star).powf(m) - b * e_star;
                FitParams::MatchedCrossover(MatchedParams {
                    a,
                    b,
                    mu,
                    pa,
                    pb,
                    tc,
                    m,
                    t_star,
                    t_ref,
                })
            }
        }
    }

    pub fn critical_of(&self, theta: &[f64]) -> Option<f64> {
        match self.kind {
            ModelKind::Exponential => None,
            ModelKind::PowerLaw | ModelKind::TanhCrossover => Some(theta[0]),
            _ => Some(theta[1]),
        }
    }

    /// Residual sum of squares at `u` with the linear coefficients solved.
    pub fn objective(&self, u: &[f64]) -> f64 {
        self.solve(u).map(|(_, _, rss)| rss).unwrap_or(f64::INFINITY)
    }

    pub fn solve(&self, u: &[f64]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let theta = self.decode(u)?;
        let basis = self.basis(&theta);
        let (coef, rss) = solve_slaved(&basis, self.y)?;
        rss.is_finite().then_some((theta, coef, rss))
    }

    fn residual_vector(&self, u: &[f64]) -> Option<Vec<f64>> {
        if !u.iter().all(|v| (0.0..=1.0).contains(v)) {
            return None;
        }
        let theta = self.decode(u)?;
        let basis = self.basis(&theta);
        let (coef, _) = solve_slaved(&basis, self.y)?;
        Some(residuals(&basis, &coef, self.y))
    }

    /// Damped Gauss-Newton on the projected residuals, starting from `u`.
    fn polish(&self, u: &[f64]) -> Option<(Vec<f64>, f64)> {
        let k = u.len();
        let mut u = u.to_vec();
        let mut r = self.residual_vector(&u)?;
        let mut cost: f64 = r.iter().map(|v| v * v).sum();
        let mut lambda = 1e-3;
        for _ in 0..100 {
            if cost == 0.0 {
                break;
            }
            let jac = self.jacobian(&u)?;
            let jt = jac.transpose();
            let normal = &jt * &jac;
            let grad = &jt * DVector::from_column_slice(&r);
            let mut accepted = None;
            while lambda < 1e12 {
                let mut damped = normal.clone();
                for i in 0..k {
                    damped[(i, i)] += lambda * normal[(i, i)].max(1e-300);
                }
                let Some(step) = damped.lu().solve(&(-&grad)) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
                match self.residual_vector(&trial) {
                    Some(rt) => {
                        let ct: f64 = rt.iter().map(|v| v * v).sum();
                        if ct < cost {
                            lambda = (lambda * 0.1).max(1e-12);
                            accepted = Some((trial, rt, ct));
                            break;
                        }
                        lambda *= 10.0;
                    }
                    None => lambda *= 10.0,
                }
            }
            let Some((nu, nr, nc)) = accepted else { break };
            let gain = cost - nc;
            u = nu;
            r = nr;
            cost = nc;
            if gain <= 1e-15 * cost {
                break;
            }
        }
        Some((u, cost))
    }

    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        const H: f64 = 1e-7;
        let n = self.y.len();
        let k = u.len();
        let mut jac = DMatrix::zeros(n, k);
        for j in 0..k {
            let (lo, hi) = ((u[j] - H).max(0.0), (u[j] + H).min(1.0));
            let mut a = u.to_vec();
            let mut b = u.to_vec();
            a[j] = lo;
            b[j] = hi;
            let ra = self.residual_vector(&a)?;
            let rb = self.residual_vector(&b)?;
            for i in 0..n {
                jac[(i, j)] = (rb[i] - ra[i]) / (hi - lo);
            }
        }
        Some(jac)
    }
}

/// Radical-inverse (Halton) points shifted by a seeded random offset.
pub(crate) fn start_design(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    const BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let mut x = 0.0;
                    let mut f = 1.0 / BASES[d] as f64;
                    let mut k = i as u64 + 1;
                    while k > 0 {
                        x += f * (k % BASES[d]) as f64;
                        k /= BASES[d];
                        f /= BASES[d] as f64;
                    }
                    (x + shift[d]).fract()
                })
                .collect()
        })
        .collect()
}

pub(crate) struct StartOutcome {
    pub u: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
    pub tc: f64,
    pub evaluations: usize,
}

/// Runs every start and returns them in start order.
pub(crate) fn run_starts(problem: &Problem<'_>, options: &FitOptions) -> Vec<StartOutcome> {
    let design = start_design(problem.dim(), options.n_starts.max(1), options.seed);
    design
        .par_iter()
        .map(|u0| {
            let out = simplex::minimize(|u| problem.objective(u), u0, 0.05, options.tol, options.max_evals);
            let (mut u, mut rss) = (out.x, out.f);
            if options.polish && rss.is_finite() {
                if let Some((pu, prss)) = problem.polish(&u) {
                    if prss < rss {
                        u = pu;
                        rss = prss;
                    }
                }
            }
            let tc = problem
                .decode(&u)
                .and_then(|th| problem.critical_of(&th))
                .unwrap_or(f64::INFINITY);
            StartOutcome {
                u,
                rss,
                converged: out.converged,
                tc,
                evaluations: out.evaluations,
            }
        })
        .collect()
}

/// Lowest rss; near-ties go to the earliest critical time. Scans in start
/// order so the choice does not depend on scheduling.
pub(crate) fn pick_best(starts: &[StartOutcome]) -> usize {
    let mut best = 0;
    for (i, s) in starts.iter().enumerate().skip(1) {
        let b = &starts[best];
        let (rs, rb) = (s.rss.sqrt(), b.rss.sqrt());
        if rs < rb - TIE_TOLERANCE || ((rs - rb).abs() <= TIE_TOLERANCE && s.tc < b.tc) {
            best = i;
        }
    }
    best
}

/// `(t, y)` samples of `series` over `window`, with `t` in fractional years.
pub(crate) fn samples(series: &IndexSeries, window: MonthRange) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = series.window(window.from, window.to)?;
    let t = w.iter_stamped().map(|(m, _)| m.fractional_year()).collect();
    Ok((t, w.values().to_vec()))
}

pub(crate) fn fit_samples(
    kind: ModelKind,
    t: &[f64],
    y: &[f64],
    window: MonthRange,
    options: &FitOptions,
) -> Result<(FitResult, Vec<f64>)> {
    let need = kind.free_parameters() + 2;
    if t.len() < need {
        return Err(Error::InsufficientData(format!(
            "{kind} needs at least {need} points, window {window} has {}",
            t.len()
        )));
    }
    let problem = Problem {
        kind,
        t,
        y,
        t_start: t[0],
        t_end: t[t.len() - 1],
    };
    let starts = run_starts(&problem, options);
    let best = &starts[pick_best(&starts)];
    let Some((theta, coef, _)) = problem.solve(&best.u) else {
        return Err(Error::InsufficientData(format!(
            "{kind}: no admissible parameters found on window {window}"
        )));
    };
    let params = problem.params(&theta, &coef);
    let result = FitResult {
        kind,
        params,
        rms: rms_of(&params, t, y)?,
        window,
        n_points: t.len(),
        n_starts: starts.len(),
        converged: best.converged,
        start_rms: starts.iter().map(|s| (s.rss / t.len() as f64).sqrt()).collect(),
        evaluations: starts.iter().map(|s| s.evaluations).sum(),
    };
    if !starts.iter().any(|s| s.converged) {
        return Err(Error::NoConvergence { best: Box::new(result) });
    }
    Ok((result, best.u.clone()))
}

/// Fits `kind` to `series` over the inclusive `window` by multi-start simplex
/// descent over the nonlinear parameters, solving the linear coefficients
/// exactly at every evaluation.
pub fn fit_model(kind: ModelKind, series: &IndexSeries, window: MonthRange, options: &FitOptions) -> Result<FitResult> {
    if kind == ModelKind::MatchedCrossover {
        return super::matched::fit_matched_crossover(series, window, options);
    }
    let (t, y) = samples(series, window)?;
    fit_samples(kind, &t, &y, window, options).map(|(r, _)| r)
}
