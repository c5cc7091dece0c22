//! Spectral power estimation for one analysis window.
//!
//! Two estimators are provided. [`fft_periodogram`] needs an evenly sampled
//! window and returns the full one-sided periodogram; [`lomb_scargle_power`]
//! evaluates the classical (unnormalised) Lomb-Scargle power at a single
//! frequency and accepts arbitrary sample times. On an evenly sampled window
//! the two agree exactly at every grid frequency below Nyquist.
//!
//! Frequencies are in cycles per hour. Both estimators subtract the window
//! mean first and apply no taper. Sums run in sample order so results are
//! reproducible bit for bit.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::timeseries::{sampling_jitter, SeriesView, WindowSpec, HOUR};

/// Fewest samples either estimator accepts.
pub const MIN_SAMPLES: usize = 8;

/// Gap deviation (fraction of the median gap) below which a window counts as
/// evenly sampled.
pub const EVEN_SAMPLING_JITTER: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Cycles per hour, strictly increasing.
    pub frequencies: Vec<f64>,
    pub powers: Vec<f64>,
    pub total_power: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Periods in hours, one per frequency.
    pub fn periods(&self) -> impl Iterator<Item = f64> + '_ {
        self.frequencies.iter().map(|f| 1.0 / f)
    }
}

pub fn detrend_mean(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    // Summation rounding would leave a constant input slightly off zero.
    if values.iter().all(|&v| v == values[0]) {
        return Ok(vec![0.0; values.len()]);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(values.iter().map(|v| v - mean).collect())
}

/// True when every gap is within [`EVEN_SAMPLING_JITTER`] of the median gap.
pub fn is_evenly_sampled(timestamps: &[f64]) -> bool {
    matches!(sampling_jitter(timestamps), Some((_, dev)) if dev <= EVEN_SAMPLING_JITTER)
}

/// FFT periodogram with a reusable plan cache. One instance per worker.
pub struct Periodogram {
    planner: FftPlanner<f64>,
    cached: Option<(usize, Arc<dyn Fft<f64>>)>,
}

impl std::fmt::Debug for Periodogram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Periodogram")
            .field("cached_len", &self.cached.as_ref().map(|(n, _)| *n))
            .finish()
    }
}

impl Default for Periodogram {
    fn default() -> Self {
        Self::new()
    }
}

impl Periodogram {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            cached: None,
        }
    }

    fn plan(&mut self, n: usize) -> Arc<dyn Fft<f64>> {
        match &self.cached {
            Some((len, fft)) if *len == n => Arc::clone(fft),
            _ => {
                let fft = self.planner.plan_fft_forward(n);
                self.cached = Some((n, Arc::clone(&fft)));
                fft
            }
        }
    }

    /// One-sided periodogram: frequency `k / (n * dt)` for `k = 1..=n/2`,
    /// power `|X_k|^2 / n` of the mean-detrended values.
    pub fn compute(&mut self, window: SeriesView<'_>) -> Result<Spectrum> {
        let n = window.len();
        if n < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                required: MIN_SAMPLES,
                got: n,
            });
        }
        let (gap, deviation) = sampling_jitter(window.timestamps).ok_or(Error::UnevenSampling {
            deviation: f64::INFINITY,
        })?;
        if deviation > EVEN_SAMPLING_JITTER {
            return Err(Error::UnevenSampling { deviation });
        }
        let detrended = detrend_mean(window.values)?;
        let mut buffer: Vec<Complex<f64>> = detrended.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.plan(n).process(&mut buffer);

        let dt_hours = gap / HOUR;
        let half = n / 2;
        let mut frequencies = Vec::with_capacity(half);
        let mut powers = Vec::with_capacity(half);
        for (k, coefficient) in buffer.iter().enumerate().take(half + 1).skip(1) {
            frequencies.push(k as f64 / (n as f64 * dt_hours));
            powers.push(coefficient.norm_sqr() / n as f64);
        }
        let total_power = powers.iter().sum();
        Ok(Spectrum {
            frequencies,
            powers,
            total_power,
        })
    }
}

pub fn fft_periodogram(window: SeriesView<'_>) -> Result<Spectrum> {
    Periodogram::new().compute(window)
}

/// Classical Lomb-Scargle power at `frequency` (cycles per hour):
///
/// `P = ½ [ (Σ y cos ω(t-τ))² / Σ cos² ω(t-τ) + (Σ y sin ω(t-τ))² / Σ sin² ω(t-τ) ]`
///
/// with `y` the mean-detrended values and `tan 2ωτ = Σ sin 2ωt / Σ cos 2ωt`.
/// This equals half the drop in residual sum of squares from fitting
/// `a cos ωt + b sin ωt` by least squares.
pub fn lomb_scargle_power(window: SeriesView<'_>, frequency: f64) -> Result<f64> {
    if !(frequency > 0.0) || !frequency.is_finite() {
        return Err(Error::NonPositiveFrequency(frequency));
    }
    let n = window.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_SAMPLES,
            got: n,
        });
    }
    let y = detrend_mean(window.values)?;
    let origin = window.timestamps[0];
    let omega = 2.0 * PI * frequency;
    let phases: Vec<f64> = window.timestamps.iter().map(|&t| omega * (t - origin) / HOUR).collect();

    let (mut sin2, mut cos2) = (0.0, 0.0);
    for &p in &phases {
        let (s, c) = (2.0 * p).sin_cos();
        sin2 += s;
        cos2 += c;
    }
    let shift = 0.5 * sin2.atan2(cos2);

    let (mut yc, mut ys, mut cc, mut ss) = (0.0, 0.0, 0.0, 0.0);
    for (&p, &yi) in phases.iter().zip(&y) {
        let (s, c) = (p - shift).sin_cos();
        yc += yi * c;
        ys += yi * s;
        cc += c * c;
        ss += s * s;
    }
    // cc + ss == n; a vanishing term means the basis function is identically
    // zero on the samples (e.g. the sine at Nyquist on an even grid).
    let floor = 1e-12 * n as f64;
    let cos_term = if cc > floor { yc * yc / cc } else { 0.0 };
    let sin_term = if ss > floor { ys * ys / ss } else { 0.0 };
    Ok(0.5 * (cos_term + sin_term))
}

/// What [`band_energy`] sums over.
#[derive(Debug, Clone, Copy)]
pub enum BandSource<'a> {
    /// Grid frequencies of an FFT periodogram.
    Spectrum(&'a Spectrum),
    /// Lomb-Scargle evaluated at the target frequency and at any candidate
    /// frequencies (cycles per hour) within tolerance of it.
    LombScargle {
        window: SeriesView<'a>,
        candidates: &'a [f64],
    },
}

/// Indices of spectrum bins whose period is within `spec.period_tolerance`
/// of the target period, or the single nearest-period bin when none is.
pub fn band_bins(spectrum: &Spectrum, spec: &WindowSpec) -> Result<Vec<usize>> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let target_h = spec.target_period / HOUR;
    let tolerance_h = spec.period_tolerance / HOUR;
    let distance = |f: f64| (target_h - 1.0 / f).abs();
    let within: Vec<usize> = (0..spectrum.len())
        .filter(|&i| distance(spectrum.frequencies[i]) < tolerance_h)
        .collect();
    if !within.is_empty() {
        return Ok(within);
    }
    let nearest = (0..spectrum.len())
        .min_by(|&a, &b| distance(spectrum.frequencies[a]).total_cmp(&distance(spectrum.frequencies[b])))
        .expect("non-empty spectrum");
    Ok(vec![nearest])
}

/// Energy carried at and immediately around the target frequency.
pub fn band_energy(source: BandSource<'_>, spec: &WindowSpec) -> Result<f64> {
    match source {
        BandSource::Spectrum(spectrum) => Ok(band_bins(spectrum, spec)?.into_iter().map(|i| spectrum.powers[i]).sum()),
        BandSource::LombScargle { window, candidates } => {
            let target_h = spec.target_period / HOUR;
            let tolerance_h = spec.period_tolerance / HOUR;
            let mut energy = lomb_scargle_power(window, 1.0 / target_h)?;
            for &f in candidates {
                if f > 0.0 && (target_h - 1.0 / f).abs() < tolerance_h && f != 1.0 / target_h {
                    energy += lomb_scargle_power(window, f)?;
                }
            }
            Ok(energy)
        }
    }
}
