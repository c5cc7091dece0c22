//! Turns raw inputs into scalar series for the intensity engine.
//!
//! Event logs are counted into fixed-width bins (empty bins are real zeros) and
//! several binned streams can be summed. Tri-axial accelerometer data goes
//! through signal vector magnitude, a Butterworth band-pass, rectification and
//! a per-bucket mean.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::timeseries::{TimeSeries, MINUTE};

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub timestamp: f64,
    pub stream_id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub events: Vec<Event>,
    pub subject_id: String,
}

impl EventLog {
    /// Sorts events by time (stable, so same-instant events keep file order).
    pub fn new(mut events: Vec<Event>, subject_id: impl Into<String>) -> Result<Self> {
        if let Some(e) = events.iter().find(|e| !(e.weight >= 0.0) || !e.weight.is_finite()) {
            return Err(Error::InvalidRange(format!(
                "event weight must be finite and non-negative, got {}",
                e.weight
            )));
        }
        if events.iter().any(|e| !e.timestamp.is_finite()) {
            return Err(Error::InvalidRange("event timestamp is not finite".into()));
        }
        events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        Ok(Self {
            events,
            subject_id: subject_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Time of the first and last event.
    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((self.events.first()?.timestamp, self.events.last()?.timestamp))
    }
}

/// Default event bin width: 15 minutes.
pub const DEFAULT_BIN_WIDTH: f64 = 15.0 * MINUTE;

/// Sums event weights into bins `[start + i*w, start + (i+1)*w)` covering
/// `[start, end)`. Events outside that range are ignored; the final bin may
/// be partial.
pub fn bin_events(log: &EventLog, bin_width: f64, start: f64, end: f64) -> Result<TimeSeries> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::InvalidRange(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if !(end > start) || !start.is_finite() || !end.is_finite() {
        return Err(Error::InvalidRange(format!("need start < end, got [{start}, {end})")));
    }
    let n = ((end - start) / bin_width).ceil().max(1.0) as usize;
    let mut values = vec![0.0; n];
    for event in &log.events {
        if event.timestamp < start || event.timestamp >= end {
            continue;
        }
        let i = (((event.timestamp - start) / bin_width).floor() as usize).min(n - 1);
        values[i] += event.weight;
    }
    let timestamps = (0..n).map(|i| start + i as f64 * bin_width).collect();
    TimeSeries::new(timestamps, values, "events/bin")
}

/// Pointwise sum of series that share one sample grid.
pub fn fuse_streams(series: &[TimeSeries]) -> Result<TimeSeries> {
    let first = series.first().ok_or(Error::EmptyInput)?;
    if series.iter().any(|s| s.timestamps() != first.timestamps()) {
        return Err(Error::GridMismatch);
    }
    let mut values = vec![0.0; first.len()];
    for s in series {
        for (acc, v) in values.iter_mut().zip(s.values()) {
            *acc += v;
        }
    }
    TimeSeries::new(first.timestamps().to_vec(), values, first.unit_label())
}

/// Raw accelerometer stream in g.
#[derive(Debug, Clone, PartialEq)]
pub struct TriaxialSeries {
    timestamps: Vec<f64>,
    xyz: Vec<[f64; 3]>,
    nominal_rate: f64,
}

impl TriaxialSeries {
    pub fn new(timestamps: Vec<f64>, xyz: Vec<[f64; 3]>, nominal_rate: f64) -> Result<Self> {
        if timestamps.len() != xyz.len() {
            return Err(Error::LengthMismatch {
                timestamps: timestamps.len(),
                values: xyz.len(),
            });
        }
        if !(nominal_rate > 0.0) || !nominal_rate.is_finite() {
            return Err(Error::InvalidRange(format!(
                "nominal rate must be positive, got {nominal_rate}"
            )));
        }
        if timestamps.iter().any(|t| !t.is_finite()) || timestamps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotonic(
                "accelerometer timestamps must strictly increase".into(),
            ));
        }
        if xyz.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRange("accelerometer sample is not finite".into()));
        }
        Ok(Self {
            timestamps,
            xyz,
            nominal_rate,
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn xyz(&self) -> &[[f64; 3]] {
        &self.xyz
    }

    pub fn nominal_rate(&self) -> f64 {
        self.nominal_rate
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Applies `f` to every sample vector.
    pub fn map_xyz(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        Self::new(
            self.timestamps.clone(),
            self.xyz.iter().map(|&v| f(v)).collect(),
            self.nominal_rate,
        )
    }
}

/// Euclidean norm of each sample; orientation independent.
pub fn signal_vector_magnitude(raw: &TriaxialSeries) -> Result<TimeSeries> {
    let values = raw.xyz.iter().map(|[x, y, z]| (x * x + y * y + z * z).sqrt()).collect();
    TimeSeries::new(raw.timestamps.clone(), values, "g SVM")
}

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex<f64>) -> Complex<f64> {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2]) / (self.a[0] + z_inv * self.a[1] + z2 * self.a[2])
    }

    /// Pole radii of `1 + a1 z^-1 + a2 z^-2`.
    pub fn pole_radii(&self) -> [f64; 2] {
        let (a1, a2) = (self.a[1] / self.a[0], self.a[2] / self.a[0]);
        let disc = Complex::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        let p1 = (-a1 + disc) * 0.5;
        let p2 = (-a1 - disc) * 0.5;
        [p1.norm(), p2.norm()]
    }
}

/// Largest upper cutoff accepted, as a fraction of the sample rate.
pub const MAX_CUTOFF_FRACTION: f64 = 0.45;

/// Digital Butterworth band-pass as a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterDesign {
    pub order: usize,
    pub low_cutoff: f64,
    /// Upper cutoff actually used (after any clamping).
    pub high_cutoff: f64,
    pub sample_rate: f64,
    pub sections: Vec<Biquad>,
    /// Set when the requested upper cutoff had to be clamped.
    pub warning: Option<String>,
}

impl FilterDesign {
    /// Complex response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex<f64> {
        let z_inv = Complex::from_polar(1.0, -2.0 * PI * freq_hz / self.sample_rate);
        self.sections
            .iter()
            .fold(Complex::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    pub fn magnitude_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.magnitude(freq_hz).log10()
    }

    /// Digital frequency that the bilinear transform maps onto the analog
    /// geometric centre of the pre-warped band; the response is unity there.
    pub fn center_frequency(&self) -> f64 {
        let fs = self.sample_rate;
        let w_lo = 2.0 * fs * (PI * self.low_cutoff / fs).tan();
        let w_hi = 2.0 * fs * (PI * self.high_cutoff / fs).tan();
        fs / PI * ((w_lo * w_hi).sqrt() / (2.0 * fs)).atan()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(|s| s.pole_radii().iter().all(|&r| r < 1.0))
    }
}

/// Designs an `order`-pole-per-edge Butterworth band-pass by bilinear transform
/// with pre-warped cutoffs. An upper cutoff above `0.45 * rate` is clamped and
/// reported through [`FilterDesign::warning`].
pub fn design_bandpass(order: usize, low: f64, high: f64, rate: f64) -> Result<FilterDesign> {
    if order == 0 {
        return Err(Error::InvalidCutoffs("order must be at least 1".into()));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidCutoffs(format!(
            "sample rate must be positive, got {rate}"
        )));
    }
    if !(low > 0.0 && low < high) || !high.is_finite() {
        return Err(Error::InvalidCutoffs(format!("need 0 < low ({low}) < high ({high})")));
    }
    let limit = MAX_CUTOFF_FRACTION * rate;
    let mut warning = None;
    let mut high_used = high;
    if high > limit {
        high_used = limit;
        warning = Some(format!(
            "upper cutoff {high} Hz exceeds {MAX_CUTOFF_FRACTION} x sample rate {rate} Hz; clamped to {limit} Hz"
        ));
    }
    if low >= high_used {
        return Err(Error::InvalidCutoffs(format!(
            "low cutoff {low} Hz is not below the usable upper cutoff {high_used} Hz"
        )));
    }

    let fs2 = 2.0 * rate;
    let w_lo = fs2 * (PI * low / rate).tan();
    let w_hi = fs2 * (PI * high_used / rate).tan();
    let w0_sq = w_lo * w_hi;
    let bw = w_hi - w_lo;

    let mut upper = Vec::with_capacity(order);
    let mut real = Vec::new();
    for k in 0..order {
        let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let p = Complex::from_polar(1.0, theta);
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0_sq).sqrt();
        for s in [(pb + disc) * 0.5, (pb - disc) * 0.5] {
            let z = (fs2 + s) / (fs2 - s);
            if z.im > 1e-12 {
                upper.push(z);
            } else if z.im.abs() <= 1e-12 {
                real.push(z.re);
            }
        }
    }
    let mut sections: Vec<Biquad> = upper
        .iter()
        .map(|p| Biquad {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -2.0 * p.re, p.norm_sqr()],
        })
        .collect();
    real.sort_by(f64::total_cmp);
    for pair in real.chunks(2) {
        let (p1, p2) = (pair[0], *pair.get(1).unwrap_or(&0.0));
        sections.push(Biquad {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -(p1 + p2), p1 * p2],
        });
    }

    let mut design = FilterDesign {
        order,
        low_cutoff: low,
        high_cutoff: high_used,
        sample_rate: rate,
        sections,
        warning,
    };
    let gain = 1.0 / design.magnitude(design.center_frequency());
    let per_section = gain.powf(1.0 / design.sections.len() as f64);
    for s in &mut design.sections {
        for b in &mut s.b {
            *b *= per_section;
        }
    }
    Ok(design)
}

/// Relative tolerance on sample spacing when checking a series against a
/// filter's rate.
const RATE_TOLERANCE: f64 = 0.01;

fn run_sections(sections: &[Biquad], input: &[f64], output: &mut Vec<f64>) {
    let mut state = vec![[0.0f64; 2]; sections.len()];
    for &x in input {
        let mut v = x;
        for (s, st) in sections.iter().zip(state.iter_mut()) {
            // Transposed direct form II.
            let y = s.b[0] * v + st[0];
            st[0] = s.b[1] * v - s.a[1] * y + st[1];
            st[1] = s.b[2] * v - s.a[2] * y;
            v = y;
        }
        output.push(v);
    }
}

fn gap_matches(gap: f64, period: f64) -> bool {
    (gap - period).abs() <= RATE_TOLERANCE * period
}

/// Causal single pass of the section cascade over an evenly sampled series.
pub fn apply_filter(design: &FilterDesign, series: &TimeSeries) -> Result<TimeSeries> {
    let period = 1.0 / design.sample_rate;
    if series
        .timestamps()
        .windows(2)
        .any(|w| !gap_matches(w[1] - w[0], period))
    {
        return Err(Error::RateMismatch {
            rate_hz: design.sample_rate,
        });
    }
    let mut out = Vec::with_capacity(series.len());
    run_sections(&design.sections, series.values(), &mut out);
    series.with_values(out)
}

/// Like [`apply_filter`], but restarts the filter from rest after every break
/// in the sample grid, so recording gaps stay gaps instead of failing.
pub fn apply_filter_segmented(design: &FilterDesign, series: &TimeSeries) -> Result<TimeSeries> {
    let period = 1.0 / design.sample_rate;
    let ts = series.timestamps();
    let runs = ts.windows(2).filter(|w| gap_matches(w[1] - w[0], period)).count();
    if ts.len() > 2 && runs * 2 < ts.len() - 1 {
        // Most gaps disagree with the design rate: wrong rate, not gaps.
        return Err(Error::RateMismatch {
            rate_hz: design.sample_rate,
        });
    }
    let mut out = Vec::with_capacity(series.len());
    let mut begin = 0;
    for i in 1..=ts.len() {
        if i == ts.len() || !gap_matches(ts[i] - ts[i - 1], period) {
            run_sections(&design.sections, &series.values()[begin..i], &mut out);
            begin = i;
        }
    }
    series.with_values(out)
}

pub fn rectify_abs(series: &TimeSeries) -> TimeSeries {
    series
        .with_values(series.values().iter().map(|v| v.abs()).collect())
        .expect("same length, finite values")
}

/// Mean of samples in each epoch-aligned bucket `[k*bucket, (k+1)*bucket)`,
/// stamped at the bucket start. Buckets without samples are omitted.
pub fn mean_downsample(series: &TimeSeries, bucket: f64) -> Result<TimeSeries> {
    if !(bucket > 0.0) || !bucket.is_finite() {
        return Err(Error::InvalidRange(format!("bucket must be positive, got {bucket}")));
    }
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut current: Option<(f64, f64, usize)> = None;
    for (&t, &v) in series.timestamps().iter().zip(series.values()) {
        let key = (t / bucket).floor();
        match &mut current {
            Some((k, sum, n)) if *k == key => {
                *sum += v;
                *n += 1;
            }
            _ => {
                if let Some((k, sum, n)) = current.take() {
                    timestamps.push(k * bucket);
                    values.push(sum / n as f64);
                }
                current = Some((key, v, 1));
            }
        }
    }
    if let Some((k, sum, n)) = current {
        timestamps.push(k * bucket);
        values.push(sum / n as f64);
    }
    TimeSeries::new(timestamps, values, series.unit_label())
}

/// SVM, band-pass, rectification and bucket mean, as used for collar
/// accelerometers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelPipeline {
    pub order: usize,
    pub low_cutoff: f64,
    pub high_cutoff: f64,
    pub bucket: f64,
}

impl Default for AccelPipeline {
    fn default() -> Self {
        Self {
            order: 4,
            low_cutoff: 0.5,
            high_cutoff: 20.0,
            bucket: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccelOutput {
    pub series: TimeSeries,
    pub design: FilterDesign,
}

impl AccelPipeline {
    pub fn run(&self, raw: &TriaxialSeries) -> Result<AccelOutput> {
        let design = design_bandpass(self.order, self.low_cutoff, self.high_cutoff, raw.nominal_rate())?;
        let svm = signal_vector_magnitude(raw)?;
        let filtered = apply_filter_segmented(&design, &svm)?;
        let series = mean_downsample(&rectify_abs(&filtered), self.bucket)?.with_unit("g mean |SVM|");
        Ok(AccelOutput { series, design })
    }
}
