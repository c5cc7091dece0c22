//! Core series types, validation and sliding-window planning.
//!
//! All instants are UTC seconds since the Unix epoch stored as `f64`, and all
//! durations are `f64` seconds. Timezone handling belongs to ingestion; nothing
//! in here knows about local time.

use crate::error::{Error, Result};

pub const SECOND: f64 = 1.0;
pub const MINUTE: f64 = 60.0;
pub const HOUR: f64 = 3600.0;
pub const DAY: f64 = 86_400.0;

/// Relative slack used when turning a duration ratio into a window count, so
/// that e.g. 83 days / 1 hour lands on 1992 and not 1991.999...
const COUNT_EPS: f64 = 1e-9;

/// Timestamped scalar samples with strictly increasing, finite timestamps and
/// finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
    unit_label: String,
}

/// Borrowed, contiguous slice of a [`TimeSeries`].
#[derive(Debug, Clone, Copy)]
pub struct SeriesView<'a> {
    pub timestamps: &'a [f64],
    pub values: &'a [f64],
}

impl TimeSeries {
    /// Builds a series that must already satisfy every invariant. Use
    /// [`validate_series`] to clean up raw input instead.
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>, unit_label: impl Into<String>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::LengthMismatch {
                timestamps: timestamps.len(),
                values: values.len(),
            });
        }
        if timestamps.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(i) = timestamps.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonMonotonic(format!("timestamp {i} is not finite")));
        }
        if let Some(w) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotonic(format!(
                "timestamp {} ({}) does not follow {}",
                w + 1,
                timestamps[w + 1],
                timestamps[w]
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidRange(format!("value {i} is not finite")));
        }
        Ok(Self {
            timestamps,
            values,
            unit_label: unit_label.into(),
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit_label(&self) -> &str {
        &self.unit_label
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn first_timestamp(&self) -> f64 {
        self.timestamps[0]
    }

    pub fn last_timestamp(&self) -> f64 {
        self.timestamps[self.timestamps.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.last_timestamp() - self.first_timestamp()
    }

    pub fn view(&self) -> SeriesView<'_> {
        SeriesView {
            timestamps: &self.timestamps,
            values: &self.values,
        }
    }

    /// Samples whose timestamp lies in the half-open interval `[start, end)`.
    pub fn window(&self, start: f64, end: f64) -> SeriesView<'_> {
        let lo = self.timestamps.partition_point(|&t| t < start);
        let hi = self.timestamps.partition_point(|&t| t < end);
        SeriesView {
            timestamps: &self.timestamps[lo..hi],
            values: &self.values[lo..hi],
        }
    }

    /// Same timestamps, new values. Lengths must match and values be finite.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.timestamps.clone(), values, self.unit_label.clone())
    }

    pub fn with_unit(mut self, unit_label: impl Into<String>) -> Self {
        self.unit_label = unit_label.into();
        self
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, String) {
        (self.timestamps, self.values, self.unit_label)
    }

    /// Median spacing between consecutive samples, `None` for a single sample.
    pub fn median_gap(&self) -> Option<f64> {
        median_gap(&self.timestamps)
    }
}

impl<'a> SeriesView<'a> {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn to_series(&self, unit_label: &str) -> Result<TimeSeries> {
        TimeSeries::new(self.timestamps.to_vec(), self.values.to_vec(), unit_label)
    }
}

impl<'a> From<&'a TimeSeries> for SeriesView<'a> {
    fn from(series: &'a TimeSeries) -> Self {
        series.view()
    }
}

/// Median of consecutive timestamp differences.
pub fn median_gap(timestamps: &[f64]) -> Option<f64> {
    if timestamps.len() < 2 {
        return None;
    }
    let mut gaps: Vec<f64> = timestamps.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let mid = gaps.len() / 2;
    Some(if gaps.len() % 2 == 1 {
        gaps[mid]
    } else {
        0.5 * (gaps[mid - 1] + gaps[mid])
    })
}

/// Largest deviation of any inter-sample gap from the median gap, as a
/// fraction of the median. Returns `(median_gap, deviation)`.
pub fn sampling_jitter(timestamps: &[f64]) -> Option<(f64, f64)> {
    let median = median_gap(timestamps)?;
    if median <= 0.0 {
        return None;
    }
    let worst = timestamps
        .windows(2)
        .map(|w| ((w[1] - w[0]) - median).abs())
        .fold(0.0, f64::max);
    Some((median, worst / median))
}

/// What [`validate_series`] had to fix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub dropped_non_finite: usize,
    pub collapsed_duplicates: usize,
    pub reordered: bool,
}

/// Cleans raw samples into a valid [`TimeSeries`]: drops non-finite values,
/// sorts by time, and replaces samples sharing a timestamp with their mean.
pub fn validate_series(timestamps: &[f64], values: &[f64], unit_label: &str) -> Result<(TimeSeries, ValidationReport)> {
    if timestamps.len() != values.len() {
        return Err(Error::LengthMismatch {
            timestamps: timestamps.len(),
            values: values.len(),
        });
    }
    let mut report = ValidationReport::default();
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(values.len());
    for (&t, &v) in timestamps.iter().zip(values) {
        if !v.is_finite() {
            report.dropped_non_finite += 1;
            continue;
        }
        if !t.is_finite() {
            return Err(Error::NonMonotonic(format!("non-finite timestamp {t}")));
        }
        samples.push((t, v));
    }
    if samples.is_empty() {
        return Err(Error::EmptySeries);
    }
    if samples.windows(2).any(|w| w[1].0 < w[0].0) {
        report.reordered = true;
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let mut ts = Vec::with_capacity(samples.len());
    let mut vs = Vec::with_capacity(samples.len());
    let mut i = 0;
    while i < samples.len() {
        let t = samples[i].0;
        let mut j = i;
        let mut sum = 0.0;
        while j < samples.len() && samples[j].0 == t {
            sum += samples[j].1;
            j += 1;
        }
        report.collapsed_duplicates += j - i - 1;
        ts.push(t);
        vs.push(sum / (j - i) as f64);
        i = j;
    }
    Ok((TimeSeries::new(ts, vs, unit_label)?, report))
}

/// Spectral estimator used per window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// FFT for evenly sampled windows, Lomb-Scargle otherwise.
    #[default]
    Auto,
    Fft,
    LombScargle,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "fft" => Ok(Method::Fft),
            "lomb-scargle" | "lombscargle" | "ls" => Ok(Method::LombScargle),
            other => Err(Error::InvalidSpec(format!("unknown method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Fft => "fft",
            Method::LombScargle => "lomb-scargle",
        })
    }
}

/// Parameters of the sliding-window periodicity computation. Durations are
/// seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub target_period: f64,
    pub window_length: f64,
    pub stride: f64,
    /// Maximum period difference for a frequency to count as a neighbour of
    /// the target frequency.
    pub period_tolerance: f64,
    pub method: Method,
    /// Windows holding fewer than this fraction of the expected number of
    /// samples emit zero intensity.
    pub min_coverage: f64,
}

impl WindowSpec {
    pub const DEFAULT_TOLERANCE: f64 = 0.01 * HOUR;
    pub const DEFAULT_MIN_COVERAGE: f64 = 0.1;

    pub fn new(target_period: f64, window_length: f64, stride: f64) -> Self {
        Self {
            target_period,
            window_length,
            stride,
            period_tolerance: Self::DEFAULT_TOLERANCE,
            method: Method::Auto,
            min_coverage: Self::DEFAULT_MIN_COVERAGE,
        }
    }

    /// Home sensor events: 24 h period, 7 day window, 1 h stride.
    pub fn home_sensor() -> Self {
        Self::new(24.0 * HOUR, 7.0 * DAY, HOUR)
    }

    /// Learning-environment access logs: 24 h period, 7 day window, 3 h stride.
    pub fn vle() -> Self {
        Self::new(24.0 * HOUR, 7.0 * DAY, 3.0 * HOUR)
    }

    /// Calf accelerometry: 24 h period, 7 day window, 15 min stride.
    pub fn calf() -> Self {
        Self::new(24.0 * HOUR, 7.0 * DAY, 15.0 * MINUTE)
    }

    pub fn with_tolerance(mut self, period_tolerance: f64) -> Self {
        self.period_tolerance = period_tolerance;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_min_coverage(mut self, min_coverage: f64) -> Self {
        self.min_coverage = min_coverage;
        self
    }

    pub fn target_frequency_per_hour(&self) -> f64 {
        HOUR / self.target_period
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.target_period,
            self.window_length,
            self.stride,
            self.period_tolerance,
            self.min_coverage,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidSpec("parameters must be finite".into()));
        }
        if !(self.target_period > 0.0 && self.target_period < self.window_length) {
            return Err(Error::InvalidSpec(format!(
                "need 0 < target period ({}s) < window length ({}s)",
                self.target_period, self.window_length
            )));
        }
        if !(self.stride > 0.0 && self.stride <= self.window_length) {
            return Err(Error::InvalidSpec(format!(
                "need 0 < stride ({}s) <= window length ({}s)",
                self.stride, self.window_length
            )));
        }
        if self.period_tolerance <= 0.0 {
            return Err(Error::InvalidSpec("period tolerance must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(Error::InvalidSpec("min coverage must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    pub window_starts: Vec<f64>,
    pub window_centers: Vec<f64>,
    pub count: usize,
}

/// Number of windows of `window_length` at `stride` spacing that fit in `span`.
pub fn window_count(span: f64, window_length: f64, stride: f64) -> usize {
    if span < window_length {
        return 0;
    }
    let steps = (span - window_length) / stride;
    (steps + COUNT_EPS * steps.max(1.0)).floor() as usize + 1
}

/// Lays out half-open windows `[start, start + window_length)` from the first
/// timestamp, one per stride, for as long as they end within the series span.
/// Depends only on the first and last timestamps.
pub fn plan_windows(series: &TimeSeries, spec: &WindowSpec) -> Result<WindowPlan> {
    spec.validate()?;
    plan_between(series.first_timestamp(), series.last_timestamp(), spec)
}

pub(crate) fn plan_between(first: f64, last: f64, spec: &WindowSpec) -> Result<WindowPlan> {
    let span = last - first;
    let count = window_count(span, spec.window_length, spec.stride);
    if count == 0 {
        return Err(Error::SpanTooShort {
            span_s: span,
            required_s: spec.window_length,
        });
    }
    let half = 0.5 * spec.window_length;
    let window_starts: Vec<f64> = (0..count).map(|k| first + k as f64 * spec.stride).collect();
    let window_centers = window_starts.iter().map(|s| s + half).collect();
    Ok(WindowPlan {
        window_starts,
        window_centers,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hourly(days: f64) -> TimeSeries {
        let n = (days * 24.0) as usize + 1;
        let ts = (0..n).map(|i| i as f64 * HOUR).collect();
        TimeSeries::new(ts, vec![0.0; n], "x").unwrap()
    }

    #[test]
    fn valid_series_passes_unchanged() {
        let (s, report) = validate_series(&[0.0, 60.0], &[1.0, 2.0], "u").unwrap();
        assert_eq!(s.timestamps(), &[0.0, 60.0]);
        assert_eq!(s.values(), &[1.0, 2.0]);
        assert_eq!(report, ValidationReport::default());
    }

    #[test]
    fn duplicates_collapse_to_mean() {
        let (s, report) = validate_series(&[0.0, 0.0], &[1.0, 3.0], "u").unwrap();
        assert_eq!(s.timestamps(), &[0.0]);
        assert_eq!(s.values(), &[2.0]);
        assert_eq!(report.collapsed_duplicates, 1);
    }

    #[test]
    fn all_nan_is_empty() {
        assert_eq!(
            validate_series(&[0.0], &[f64::NAN], "u").unwrap_err(),
            Error::EmptySeries
        );
    }

    #[test]
    fn unsorted_input_is_sorted_and_nonfinite_dropped() {
        let (s, report) = validate_series(&[30.0, 10.0, 20.0], &[3.0, f64::INFINITY, 2.0], "u").unwrap();
        assert_eq!(s.timestamps(), &[20.0, 30.0]);
        assert_eq!(s.values(), &[2.0, 3.0]);
        assert_eq!(report.dropped_non_finite, 1);
        assert!(report.reordered);
    }

    #[test]
    fn nan_timestamp_is_non_monotonic() {
        assert!(matches!(
            validate_series(&[0.0, f64::NAN], &[1.0, 1.0], "u"),
            Err(Error::NonMonotonic(_))
        ));
    }

    #[test]
    fn strict_constructor_rejects_ties() {
        assert!(matches!(
            TimeSeries::new(vec![0.0, 0.0], vec![1.0, 1.0], ""),
            Err(Error::NonMonotonic(_))
        ));
    }

    #[test]
    fn ninety_days_hourly_gives_1993_windows() {
        let plan = plan_windows(&hourly(90.0), &WindowSpec::home_sensor()).unwrap();
        assert_eq!(plan.count, 1993);
        assert_eq!(plan.window_centers[0], 3.5 * DAY);
    }

    #[test]
    fn exact_window_span_gives_one_window() {
        let plan = plan_windows(&hourly(7.0), &WindowSpec::home_sensor()).unwrap();
        assert_eq!(plan.count, 1);
    }

    #[test]
    fn short_span_is_rejected() {
        assert!(matches!(
            plan_windows(&hourly(6.0), &WindowSpec::home_sensor()),
            Err(Error::SpanTooShort { .. })
        ));
    }

    #[test]
    fn spec_invariants() {
        assert!(WindowSpec::new(DAY, 7.0 * DAY, 8.0 * DAY).validate().is_err());
        assert!(WindowSpec::new(8.0 * DAY, 7.0 * DAY, HOUR).validate().is_err());
        assert!(WindowSpec::home_sensor().with_tolerance(0.0).validate().is_err());
        assert!(WindowSpec::home_sensor().with_min_coverage(1.5).validate().is_err());
        assert!(WindowSpec::calf().validate().is_ok());
    }

    #[test]
    fn jitter_of_even_grid_is_zero() {
        let (gap, dev) = sampling_jitter(&[0.0, 2.0, 4.0, 6.0]).unwrap();
        assert_eq!(gap, 2.0);
        assert_eq!(dev, 0.0);
    }

    /// Brute force: count start indices `k*l` whose `m`-sample-long half-open
    /// time window still ends within the last timestamp.
    fn enumerate_windows(n: usize, m: usize, l: usize) -> usize {
        (0..n).step_by(l).filter(|&s| s + m < n).count()
    }

    proptest! {
        #[test]
        fn count_matches_index_enumeration(n in 2usize..400, m in 1usize..100, l in 1usize..50) {
            prop_assume!(l <= m);
            let dt = 37.0;
            let span = (n - 1) as f64 * dt;
            let count = window_count(span, m as f64 * dt, l as f64 * dt);
            prop_assert_eq!(count, enumerate_windows(n, m, l));
            // The index-domain bound floor((N - m + 1) / l) differs by at most
            // one window and agrees exactly for l == 2.
            if n + 1 >= m {
                let index_bound = (n + 1 - m) / l;
                if count > 0 {
                    prop_assert!(count.abs_diff(index_bound) <= 1);
                    if l == 2 {
                        prop_assert_eq!(count, index_bound);
                    }
                }
            }
        }

        #[test]
        fn plan_ignores_sample_density(extra in proptest::collection::vec(1.0f64..(10.0 * DAY - 1.0), 0..50)) {
            let spec = WindowSpec::vle();
            let mut ts = vec![0.0, 10.0 * DAY];
            ts.extend(extra);
            let (dense, _) = validate_series(&ts, &vec![1.0; ts.len()], "").unwrap();
            let sparse = TimeSeries::new(vec![0.0, 10.0 * DAY], vec![1.0, 1.0], "").unwrap();
            prop_assert_eq!(plan_windows(&dense, &spec).unwrap(), plan_windows(&sparse, &spec).unwrap());
        }

        #[test]
        fn consecutive_starts_differ_by_stride(days in 7.0f64..40.0, stride_h in 1u32..48) {
            let spec = WindowSpec::new(DAY, 7.0 * DAY, stride_h as f64 * HOUR);
            let plan = plan_between(0.0, days * DAY, &spec).unwrap();
            for w in plan.window_starts.windows(2) {
                prop_assert!((w[1] - w[0] - spec.stride).abs() < 1e-6);
            }
            let last_end = plan.window_starts[plan.count - 1] + spec.window_length;
            prop_assert!(last_end <= days * DAY + 1e-6);
            prop_assert!(last_end + spec.stride > days * DAY);
        }
    }
}
