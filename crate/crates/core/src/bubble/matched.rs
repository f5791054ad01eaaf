//! Exponential background joined to a power-law bubble at a crossover time.
//!
//! With value and slope matched at `t_star`, the model is linear in the
//! power-law level and scale `(A, B)`; the exponential pair `(a, b)` follows
//! from the two matching conditions. The nonlinear search runs over
//! `(mu, tc, m, t_star)`.

use super::fit::{fit_samples, samples, FitOptions, FitResult};
use super::models::{FitParams, MatchedParams, ModelKind};
use crate::error::{Error, Result};
use crate::series::{IndexSeries, MonthRange};

/// Largest relative mismatch of value or slope tolerated at `t_star`.
pub const MATCHING_TOLERANCE: f64 = 1e-9;

/// Crossover positions closer than this to the window edges (as a fraction
/// of the window length) mean no interior crossover was found.
const EDGE_FRACTION: f64 = 1e-6;

pub fn fit_matched_crossover(series: &IndexSeries, window: MonthRange, options: &FitOptions) -> Result<FitResult> {
    let (t, y) = samples(series, window)?;
    if t.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "matched crossover needs at least 10 points, window {window} has {}",
            t.len()
        )));
    }
    let (result, u) = fit_samples(ModelKind::MatchedCrossover, &t, &y, window, options)?;
    if u[3] < EDGE_FRACTION || u[3] > 1.0 - EDGE_FRACTION {
        return Err(Error::NoCrossover(format!(
            "best crossover sits on the edge of window {window}"
        )));
    }
    if let FitParams::MatchedCrossover(p) = result.params {
        let (c0, c1) = p.matching_residuals();
        if c0 > MATCHING_TOLERANCE || c1 > MATCHING_TOLERANCE {
            return Err(Error::NoCrossover(format!(
                "branches do not match at t_star = {:.6}: value {c0:.2e}, slope {c1:.2e}",
                p.t_star
            )));
        }
    }
    Ok(result)
}

/// Earliest time in `[lo, hi]` (and before `tc`) where the exponential and
/// power-law branches of `params` take the same value, located by a sign
/// scan followed by Brent's method.
pub fn continuity_root(params: &MatchedParams, lo: f64, hi: f64) -> Result<f64> {
    let hi = hi.min(params.tc);
    if !(lo < hi) {
        return Err(Error::NoCrossover(format!("empty bracket [{lo}, {hi}]")));
    }
    let gap = |t: f64| params.exponential_branch(t) - params.power_branch(t);
    const CELLS: usize = 512;
    let h = (hi - lo) / CELLS as f64;
    let mut a = lo;
    let mut fa = gap(a);
    if fa == 0.0 {
        return Ok(a);
    }
    for i in 1..=CELLS {
        let b = if i == CELLS { hi } else { lo + h * i as f64 };
        let fb = gap(b);
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
            return Ok(brent(gap, a, b, fa, fb));
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoCrossover(format!(
        "branches never cross in [{lo:.4}, {hi:.4}]"
    )))
}

fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let outside = !((s > lo.min(b)) && (s < lo.max(b)));
        let slow = if bisected {
            (s - b).abs() >= (b - c).abs() / 2.0
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0
        };
        if outside || slow {
            s = (a + b) / 2.0;
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}
