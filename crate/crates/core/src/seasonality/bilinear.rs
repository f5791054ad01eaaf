use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{GrowthSeries, MonthStamp, MonthlySeries};

/// Month whose pattern value is kept non-negative when fixing the sign.
const SIGN_MONTH: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearOptions {
    pub max_iter: usize,
    /// Stop once a full iteration lowers the cost by less than this
    /// fraction.
    pub rel_tol: f64,
}

impl Default for BilinearOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Index into `SeasonalDecomposition::regions`.
    pub region: usize,
    pub month: MonthStamp,
    pub value: f64,
    pub residual: f64,
}

/// `g(12T + m) = f(T) h(m) + j(T) + residual`, with `mean(h) = 0`,
/// `sum h^2 = 12` and `h(May) >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeasonalDecomposition {
    pub regions: Vec<String>,
    pub years: Vec<i32>,
    pub f: Vec<f64>,
    pub j: Vec<f64>,
    pub h: [f64; 12],
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the input has no variation to factor; then `f = 0`, `h = 0`
    /// and `j` holds the year means.
    pub degenerate: bool,
    /// Cost after initialisation and after every half-step.
    pub cost_trace: Vec<f64>,
    pub observations: Vec<Observation>,
}

impl SeasonalDecomposition {
    pub fn year_index(&self, year: i32) -> Option<usize> {
        self.years.binary_search(&year).ok()
    }

    pub fn fitted(&self, month: MonthStamp) -> Option<f64> {
        let y = self.year_index(month.year())?;
        Some(self.f[y] * self.h[month.month_index()] + self.j[y])
    }

    /// Year with the largest `f`, earliest on ties.
    pub fn argmax_f(&self) -> i32 {
        self.years[argmax(&self.f)]
    }

    pub fn argmax_j(&self) -> i32 {
        self.years[argmax(&self.j)]
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Brings `(f, h, j)` to the canonical gauge without changing `f h + j`.
/// Returns `None` when `h` is constant, in which case no gauge exists.
pub fn normalize_gauge(f: &[f64], h: &[f64; 12], j: &[f64]) -> Option<(Vec<f64>, [f64; 12], Vec<f64>)> {
    let mean = h.iter().sum::<f64>() / 12.0;
    let centred: [f64; 12] = std::array::from_fn(|m| h[m] - mean);
    let scale = (centred.iter().map(|v| v * v).sum::<f64>() / 12.0).sqrt();
    if !(scale > 0.0) {
        return None;
    }
    let sign = if centred[SIGN_MONTH] < 0.0 { -1.0 } else { 1.0 };
    let h_out = std::array::from_fn(|m| sign * centred[m] / scale);
    let f_out = f.iter().map(|v| sign * v * scale).collect();
    let j_out = j.iter().zip(f).map(|(jv, fv)| jv + fv * mean).collect();
    Some((f_out, h_out, j_out))
}

struct Obs {
    year: usize,
    month: usize,
    value: f64,
}

fn cost(obs: &[Obs], f: &[f64], h: &[f64; 12], j: &[f64]) -> f64 {
    obs.iter()
        .map(|o| (o.value - f[o.year] * h[o.month] - j[o.year]).powi(2))
        .sum()
}

/// Fits the bilinear model by alternating exact least-squares updates of
/// the year factors `(f, j)` and the month pattern `h`, over every value
/// of `growth` whose year lies in `years`. Several series are pooled.
pub fn decompose_bilinear(growth: &[GrowthSeries], years: RangeInclusive<i32>) -> Result<SeasonalDecomposition> {
    decompose_bilinear_with(growth, years, &BilinearOptions::default())
}

pub fn decompose_bilinear_with(
    growth: &[GrowthSeries],
    years: RangeInclusive<i32>,
    options: &BilinearOptions,
) -> Result<SeasonalDecomposition> {
    let mut coverage: BTreeMap<i32, [bool; 12]> = BTreeMap::new();
    let mut raw = Vec::new();
    for (r, series) in growth.iter().enumerate() {
        for (month, value) in series.iter_stamped() {
            if years.contains(&month.year()) {
                coverage.entry(month.year()).or_insert([false; 12])[month.month_index()] = true;
                raw.push((r, month, value));
            }
        }
    }
    let complete = coverage.values().filter(|c| c.iter().all(|x| *x)).count();
    if complete < 2 {
        return Err(Error::InsufficientData(format!(
            "bilinear decomposition needs at least 2 complete years in {}..={}, found {complete}",
            years.start(),
            years.end()
        )));
    }
    let year_list: Vec<i32> = coverage.keys().copied().collect();
    let obs: Vec<Obs> = raw
        .iter()
        .map(|(_, m, v)| Obs {
            year: year_list.binary_search(&m.year()).expect("year recorded"),
            month: m.month_index(),
            value: *v,
        })
        .collect();
    let ny = year_list.len();

    let mut year_mean = vec![0.0; ny];
    let mut year_n = vec![0usize; ny];
    let mut month_sum = [0.0; 12];
    let mut month_n = [0usize; 12];
    for o in &obs {
        year_mean[o.year] += o.value;
        year_n[o.year] += 1;
        month_sum[o.month] += o.value;
        month_n[o.month] += 1;
    }
    for (m, n) in year_mean.iter_mut().zip(&year_n) {
        *m /= *n as f64;
    }

    let first = obs[0].value;
    if obs.iter().all(|o| o.value == first) {
        return Ok(finish(
            growth,
            year_list,
            vec![0.0; ny],
            [0.0; 12],
            year_mean,
            0,
            true,
            true,
            vec![0.0],
            &raw,
        ));
    }

    let month_mean: [f64; 12] = std::array::from_fn(|m| month_sum[m] / month_n[m].max(1) as f64);
    let grand = month_mean.iter().sum::<f64>() / 12.0;
    let mut h: [f64; 12] = std::array::from_fn(|m| month_mean[m] - grand);
    if h.iter().all(|v| *v == 0.0) {
        // Month means carry no pattern; start from the first complete year.
        let (&y0, _) = coverage
            .iter()
            .find(|(_, c)| c.iter().all(|x| *x))
            .expect("complete year exists");
        let yi = year_list.binary_search(&y0).expect("year recorded");
        let mut acc = [0.0; 12];
        let mut cnt = [0usize; 12];
        for o in obs.iter().filter(|o| o.year == yi) {
            acc[o.month] += o.value;
            cnt[o.month] += 1;
        }
        h = std::array::from_fn(|m| acc[m] / cnt[m] as f64 - year_mean[yi]);
    }
    let mut f = vec![1.0; ny];
    let mut j = year_mean.clone();

    let mut trace = vec![cost(&obs, &f, &h, &j)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        iterations += 1;
        update_years(&obs, &h, &mut f, &mut j);
        trace.push(cost(&obs, &f, &h, &j));
        update_pattern(&obs, &f, &j, &mut h);
        let c = cost(&obs, &f, &h, &j);
        let previous = trace[trace.len() - 2];
        trace.push(c);
        if previous - c <= options.rel_tol * previous || c == 0.0 {
            converged = true;
            break;
        }
    }

    match normalize_gauge(&f, &h, &j) {
        Some((f, h, j)) => Ok(finish(
            growth, year_list, f, h, j, iterations, converged, false, trace, &raw,
        )),
        None => Ok(finish(
            growth,
            year_list,
            vec![0.0; ny],
            [0.0; 12],
            year_mean,
            iterations,
            converged,
            true,
            trace,
            &raw,
        )),
    }
}

/// Per year, the two-parameter regression of the values on `h`.
fn update_years(obs: &[Obs], h: &[f64; 12], f: &mut [f64], j: &mut [f64]) {
    let ny = f.len();
    let mut n = vec![0.0; ny];
    let mut sh = vec![0.0; ny];
    let mut sg = vec![0.0; ny];
    for o in obs {
        n[o.year] += 1.0;
        sh[o.year] += h[o.month];
        sg[o.year] += o.value;
    }
    let mut shh = vec![0.0; ny];
    let mut shg = vec![0.0; ny];
    for o in obs {
        let dh = h[o.month] - sh[o.year] / n[o.year];
        shh[o.year] += dh * dh;
        shg[o.year] += dh * (o.value - sg[o.year] / n[o.year]);
    }
    for y in 0..ny {
        let (hm, gm) = (sh[y] / n[y], sg[y] / n[y]);
        f[y] = if shh[y] > 0.0 { shg[y] / shh[y] } else { 0.0 };
        j[y] = gm - f[y] * hm;
    }
}

/// Per calendar month, the one-parameter regression of `g - j` on `f`.
fn update_pattern(obs: &[Obs], f: &[f64], j: &[f64], h: &mut [f64; 12]) {
    let mut sff = [0.0; 12];
    let mut sfg = [0.0; 12];
    for o in obs {
        sff[o.month] += f[o.year] * f[o.year];
        sfg[o.month] += f[o.year] * (o.value - j[o.year]);
    }
    for m in 0..12 {
        if sff[m] > 0.0 {
            h[m] = sfg[m] / sff[m];
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    growth: &[GrowthSeries],
    years: Vec<i32>,
    f: Vec<f64>,
    h: [f64; 12],
    j: Vec<f64>,
    iterations: usize,
    converged: bool,
    degenerate: bool,
    cost_trace: Vec<f64>,
    raw: &[(usize, MonthStamp, f64)],
) -> SeasonalDecomposition {
    let observations: Vec<Observation> = raw
        .iter()
        .map(|&(region, month, value)| {
            let y = years.binary_search(&month.year()).expect("year recorded");
            let residual = value - (f[y] * h[month.month_index()] + j[y]);
            Observation {
                region,
                month,
                value,
                residual,
            }
        })
        .collect();
    let residual_rms =
        (observations.iter().map(|o| o.residual * o.residual).sum::<f64>() / observations.len() as f64).sqrt();
    SeasonalDecomposition {
        regions: growth.iter().map(|g| g.region().to_string()).collect(),
        years,
        f,
        j,
        h,
        residual_rms,
        iterations,
        converged,
        degenerate,
        cost_trace,
        observations,
    }
}
