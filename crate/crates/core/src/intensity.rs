//! Periodicity intensity: slide a window over the series and record the band
//! energy around the target frequency in each one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::{band_energy, is_evenly_sampled, BandSource, Periodogram, MIN_SAMPLES};
use crate::timeseries::{plan_windows, Method, SeriesView, TimeSeries, WindowSpec};

/// One intensity value per window, stamped at the window centre.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityTrace {
    pub centers: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Fraction of the expected sample count present in each window.
    pub coverage: Vec<f64>,
    pub spec: WindowSpec,
    pub subject_id: String,
}

impl IntensityTrace {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn with_subject(mut self, subject_id: impl Into<String>) -> Self {
        self.subject_id = subject_id.into();
        self
    }
}

fn window_intensity(window: SeriesView<'_>, spec: &WindowSpec, periodogram: &mut Periodogram) -> Result<f64> {
    let use_fft = match spec.method {
        Method::Fft => true,
        Method::LombScargle => false,
        Method::Auto => is_evenly_sampled(window.timestamps),
    };
    if use_fft {
        let spectrum = periodogram.compute(window)?;
        band_energy(BandSource::Spectrum(&spectrum), spec)
    } else {
        band_energy(
            BandSource::LombScargle {
                window,
                candidates: &[],
            },
            spec,
        )
    }
}

/// Computes the periodicity intensity trace of `series`.
///
/// The expected sample count of a window is `window_length / median gap` of the
/// whole series. Windows whose coverage falls below `spec.min_coverage`, or that
/// hold fewer than [`MIN_SAMPLES`] samples, emit zero. Windows are evaluated in
/// parallel but assembled in order, so the result does not depend on scheduling.
pub fn compute_intensity_trace(series: &TimeSeries, spec: &WindowSpec) -> Result<IntensityTrace> {
    let plan = plan_windows(series, spec)?;
    let expected = series
        .median_gap()
        .map(|gap| spec.window_length / gap)
        .unwrap_or(1.0)
        .max(1.0);

    let per_window: Vec<(f64, f64)> = plan
        .window_starts
        .par_iter()
        .map_init(Periodogram::new, |periodogram, &start| {
            let window = series.window(start, start + spec.window_length);
            let coverage = (window.len() as f64 / expected).min(1.0);
            if coverage < spec.min_coverage || window.len() < MIN_SAMPLES {
                return Ok((0.0, coverage));
            }
            Ok((window_intensity(window, spec, periodogram)?, coverage))
        })
        .collect::<Result<_>>()?;

    let (intensities, coverage) = per_window.into_iter().unzip();
    Ok(IntensityTrace {
        centers: plan.window_centers,
        intensities,
        coverage,
        spec: *spec,
        subject_id: String::new(),
    })
}

/// Min-max rescales intensities to `[0, 1]`; a flat trace maps to all zeros.
pub fn normalize_trace(trace: &IntensityTrace) -> Result<IntensityTrace> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let min = trace.intensities.iter().copied().fold(f64::INFINITY, f64::min);
    let max = trace.intensities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let intensities = if range > 0.0 {
        trace.intensities.iter().map(|v| (v - min) / range).collect()
    } else {
        vec![0.0; trace.len()]
    };
    Ok(IntensityTrace {
        intensities,
        ..trace.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::lomb_scargle_power;
    use crate::timeseries::{DAY, HOUR};
    use std::f64::consts::PI;

    fn hourly_series(days: f64, f: impl Fn(f64) -> f64) -> TimeSeries {
        let n = (days * 24.0) as usize + 1;
        let ts: Vec<f64> = (0..n).map(|i| i as f64 * HOUR).collect();
        let ys = ts.iter().map(|&t| f(t)).collect();
        TimeSeries::new(ts, ys, "u").unwrap()
    }

    fn trace_of(values: &[f64]) -> IntensityTrace {
        IntensityTrace {
            centers: (0..values.len()).map(|i| i as f64 * HOUR).collect(),
            intensities: values.to_vec(),
            coverage: vec![1.0; values.len()],
            spec: WindowSpec::home_sensor(),
            subject_id: "s".into(),
        }
    }

    #[test]
    fn pure_tone_trace_is_flat() {
        let series = hourly_series(90.0, |t| (2.0 * PI * t / DAY).sin());
        let trace = compute_intensity_trace(&series, &WindowSpec::home_sensor()).unwrap();
        assert_eq!(trace.len(), 1993);
        let n = trace.len() as f64;
        let mean = trace.intensities.iter().sum::<f64>() / n;
        let var = trace.intensities.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(var.sqrt() / mean < 0.01);
        // Spot-check against Lomb-Scargle evaluated independently per window.
        for &i in &[0usize, 500, 1992] {
            let start = trace.centers[i] - 3.5 * DAY;
            let window = series.window(start, start + 7.0 * DAY);
            let ls = lomb_scargle_power(window, 1.0 / 24.0).unwrap();
            assert!((trace.intensities[i] - ls).abs() / ls < 1e-6);
        }
        for w in trace.centers.windows(2) {
            assert!((w[1] - w[0] - HOUR).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_series_gives_zero_trace() {
        let series = hourly_series(90.0, |_| 0.0);
        let trace = compute_intensity_trace(&series, &WindowSpec::home_sensor()).unwrap();
        assert!(trace.intensities.iter().all(|&v| v == 0.0));
        assert!(trace.coverage.iter().all(|&c| c == 1.0));
    }

    #[test]
    fn missing_gap_flatlines_with_zero_coverage() {
        let full = hourly_series(40.0, |t| 1.0 + (2.0 * PI * t / DAY).sin());
        let (gap_lo, gap_hi) = (15.0 * DAY, 25.0 * DAY);
        let keep: Vec<usize> = (0..full.len())
            .filter(|&i| !(gap_lo..gap_hi).contains(&full.timestamps()[i]))
            .collect();
        let series = TimeSeries::new(
            keep.iter().map(|&i| full.timestamps()[i]).collect(),
            keep.iter().map(|&i| full.values()[i]).collect(),
            "u",
        )
        .unwrap();
        let spec = WindowSpec::home_sensor();
        let trace = compute_intensity_trace(&series, &spec).unwrap();
        let mut inside = 0;
        for i in 0..trace.len() {
            let start = trace.centers[i] - 3.5 * DAY;
            if start >= gap_lo && start + spec.window_length <= gap_hi {
                inside += 1;
                assert_eq!(trace.intensities[i], 0.0);
                assert_eq!(trace.coverage[i], 0.0);
            }
        }
        assert!(inside > 0);
        assert!(trace.intensities[0] > 0.0);
    }

    #[test]
    fn forced_fft_rejects_uneven_windows() {
        let mut ts: Vec<f64> = (0..400).map(|i| i as f64 * HOUR).collect();
        ts[10] += 0.3 * HOUR;
        let series = TimeSeries::new(ts, vec![1.0; 400], "").unwrap();
        let spec = WindowSpec::home_sensor().with_method(Method::Fft);
        assert!(matches!(
            compute_intensity_trace(&series, &spec),
            Err(Error::UnevenSampling { .. })
        ));
        let auto = WindowSpec::home_sensor();
        assert!(compute_intensity_trace(&series, &auto).is_ok());
    }

    #[test]
    fn short_series_propagates_span_error() {
        let series = hourly_series(5.0, |_| 1.0);
        assert!(matches!(
            compute_intensity_trace(&series, &WindowSpec::home_sensor()),
            Err(Error::SpanTooShort { .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let t = normalize_trace(&trace_of(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(t.intensities, vec![0.0, 0.5, 1.0]);
        let flat = normalize_trace(&trace_of(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(flat.intensities, vec![0.0, 0.0, 0.0]);
        assert_eq!(normalize_trace(&trace_of(&[])).unwrap_err(), Error::EmptyTrace);
    }

    #[test]
    fn normalization_keeps_extremum_positions() {
        let raw = [3.0, 9.0, 1.5, 7.0, 2.0];
        let t = normalize_trace(&trace_of(&raw)).unwrap();
        assert_eq!(t.intensities[1], 1.0);
        assert_eq!(t.intensities[2], 0.0);
    }

    #[test]
    fn gain_cancels_after_normalization() {
        let series = hourly_series(20.0, |t| {
            (1.0 + 0.5 * (2.0 * PI * t / (9.0 * DAY)).sin()) * (2.0 * PI * t / DAY).sin()
        });
        let scaled = series
            .with_values(series.values().iter().map(|v| 7.5 * v).collect())
            .unwrap();
        let spec = WindowSpec::home_sensor();
        let a = compute_intensity_trace(&series, &spec).unwrap();
        let b = compute_intensity_trace(&scaled, &spec).unwrap();
        for (x, y) in a.intensities.iter().zip(&b.intensities) {
            assert!((y - 56.25 * x).abs() <= 1e-9 * y.abs());
        }
        let na = normalize_trace(&a).unwrap();
        let nb = normalize_trace(&b).unwrap();
        for (x, y) in na.intensities.iter().zip(&nb.intensities) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn window_value_depends_only_on_its_samples() {
        let series = hourly_series(20.0, |t| (2.0 * PI * t / DAY).sin() + (t / 7919.0).cos());
        let spec = WindowSpec::vle();
        let base = compute_intensity_trace(&series, &spec).unwrap();
        let target = 10;
        let start = base.centers[target] - 3.5 * DAY;
        let end = start + spec.window_length;
        let mutated: Vec<f64> = series
            .timestamps()
            .iter()
            .zip(series.values())
            .map(|(&t, &v)| if t < start || t >= end { v * 3.0 - 11.0 } else { v })
            .collect();
        let other = compute_intensity_trace(&series.with_values(mutated).unwrap(), &spec).unwrap();
        assert_eq!(other.intensities[target], base.intensities[target]);
        assert_ne!(other.intensities[0], base.intensities[0]);
    }

    #[test]
    fn repeated_runs_are_bitwise_identical() {
        let series = hourly_series(30.0, |t| (2.0 * PI * t / DAY).sin() * (t / 1e5).cos());
        let spec = WindowSpec::home_sensor();
        let a = compute_intensity_trace(&series, &spec).unwrap();
        let b = compute_intensity_trace(&series, &spec).unwrap();
        let bits = |t: &IntensityTrace| t.intensities.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
