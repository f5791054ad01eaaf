use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{GrowthSeries, MonthlySeries};

/// Samples per year for monthly data.
const RATE: f64 = 12.0;

/// Power spectrum of a mean-removed monthly series on `(0, 6]` cycles/year.
///
/// A unit-amplitude sinusoid on a grid frequency has peak power 1; the
/// Nyquist bin is scaled so that a unit cosine there also reads 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    pub series_id: String,
    pub n_samples: usize,
    /// Padded transform length divided by `n_samples`.
    pub padding: f64,
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

impl Periodogram {
    /// Frequency and power of the global maximum.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = 0;
        for (i, p) in self.power.iter().enumerate() {
            if *p > self.power[best] {
                best = i;
            }
        }
        (self.frequencies[best], self.power[best])
    }

    pub fn bin_width(&self) -> f64 {
        self.frequencies[0]
    }

    /// Signal variance implied by the spectrum. Equals the variance of the
    /// mean-removed input up to rounding, for any padding.
    pub fn variance(&self) -> f64 {
        let last = self.power.len() - 1;
        let interior: f64 = self.power[..last].iter().sum::<f64>() / 2.0;
        (interior + self.power[last]) / self.padding
    }

    /// Content above 6 cycles/year up to `max_frequency`, obtained by
    /// mirroring: monthly sampling makes the spectrum even and periodic
    /// with period 12, so the value at `f` equals the value at `12 - f`.
    /// Every returned point is mirrored content, not a measurement.
    pub fn aliased_extension(&self, max_frequency: f64) -> Vec<(f64, f64)> {
        let step = self.bin_width();
        let last = self.frequencies.len();
        let mut out = Vec::new();
        // Bin k above Nyquist mirrors bin 2*last - k (1-based grid index).
        let mut k = last + 1;
        loop {
            let f = step * k as f64;
            if f > max_frequency + 1e-9 * step {
                break;
            }
            let mirror = 2 * last as i64 - k as i64;
            let p = if mirror >= 1 {
                self.power[mirror as usize - 1]
            } else {
                0.0
            };
            out.push((f, p));
            k += 1;
        }
        out
    }
}

/// Mean-removed periodogram of `growth`, zero padded to about `oversample`
/// times its length. The padded length is kept even so the grid ends at
/// exactly 6 cycles/year.
pub fn periodogram(growth: &GrowthSeries, oversample: usize) -> Result<Periodogram> {
    periodogram_of(growth.region(), growth.values(), oversample)
}

pub fn periodogram_of(series_id: &str, values: &[f64], oversample: usize) -> Result<Periodogram> {
    let n = values.len();
    if n < 24 {
        return Err(Error::InsufficientData(format!(
            "periodogram needs at least 24 growth values, got {n}"
        )));
    }
    if oversample == 0 {
        return Err(Error::Domain("oversample must be at least 1".into()));
    }
    let mut len = n * oversample;
    if len % 2 == 1 {
        len *= 2;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    let half = len / 2;
    let n2 = (n as f64).powi(2);
    let frequencies = (1..=half).map(|k| RATE * k as f64 / len as f64).collect();
    let power = (1..=half)
        .map(|k| {
            let scale = if k == half { 1.0 } else { 4.0 };
            scale * buf[k].norm_sqr() / n2
        })
        .collect();
    Ok(Periodogram {
        series_id: series_id.to_string(),
        n_samples: n,
        padding: len as f64 / n as f64,
        frequencies,
        power,
    })
}

/// Average of per-series periodograms sharing one grid.
pub fn mean_periodogram(series_id: &str, parts: &[Periodogram]) -> Result<Periodogram> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InsufficientData("no periodograms to average".into()))?;
    if parts.iter().any(|p| p.frequencies != first.frequencies) {
        return Err(Error::Domain(
            "periodograms differ in frequency grid; use series of equal length".into(),
        ));
    }
    let k = parts.len() as f64;
    let power = (0..first.power.len())
        .map(|i| parts.iter().map(|p| p.power[i]).sum::<f64>() / k)
        .collect();
    Ok(Periodogram {
        series_id: series_id.to_string(),
        n_samples: first.n_samples,
        padding: first.padding,
        frequencies: first.frequencies.clone(),
        power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn direct_power(x: &[f64], f: f64) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in x.iter().enumerate() {
            let w = 2.0 * PI * f * t as f64 / RATE;
            re += (v - mean) * w.cos();
            im -= (v - mean) * w.sin();
        }
        4.0 * (re * re + im * im) / (n * n)
    }

    #[test]
    fn annual_tone_peaks_at_one_cycle_per_year() {
        let x: Vec<f64> = (0..240).map(|t| (2.0 * PI * t as f64 / 12.0).sin()).collect();
        for os in [1, 3, 4] {
            let p = periodogram_of("x", &x, os).unwrap();
            let (f, power) = p.peak();
            assert!((f - 1.0).abs() <= p.bin_width(), "peak at {f}");
            assert!((power - 1.0).abs() < 1e-10);
            assert!((power - direct_power(&x, f)).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_ends_at_nyquist() {
        let x: Vec<f64> = (0..25).map(|t| (t as f64 * 0.7).sin()).collect();
        let p = periodogram_of("x", &x, 1).unwrap();
        assert!((p.frequencies.last().unwrap() - 6.0).abs() < 1e-12);
        assert!(p.frequencies.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn constant_input_has_no_power() {
        let p = periodogram_of("c", &[0.01; 60], 2).unwrap();
        assert!(p.power.iter().all(|v| *v < 1e-20));
    }

    #[test]
    fn parseval_holds_for_any_padding() {
        let x: Vec<f64> = (0..97).map(|t| ((t * 37 % 11) as f64 - 5.0) * 0.01).collect();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        for os in [1, 2, 5] {
            let p = periodogram_of("x", &x, os).unwrap();
            assert!((p.variance() - var).abs() < 1e-10 * var, "os={os}");
        }
    }

    #[test]
    fn aliased_extension_mirrors_about_nyquist() {
        let x: Vec<f64> = (0..120).map(|t| (2.0 * PI * 4.0 * t as f64 / 12.0).cos()).collect();
        let p = periodogram_of("x", &x, 1).unwrap();
        let ext = p.aliased_extension(8.0);
        let (f8, p8) = ext
            .iter()
            .copied()
            .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        assert!((f8 - 8.0).abs() < 1e-9);
        assert!((p8 - p.peak().1).abs() < 1e-12);
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(
            periodogram_of("x", &[0.0; 23], 1),
            Err(Error::InsufficientData(_))
        ));
    }
}
