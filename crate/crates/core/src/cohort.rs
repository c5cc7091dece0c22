//! Cohort views over many per-subject traces: time alignment, cumulative
//! stacking, lowest/highest/steepest band annotation and random sub-group
//! stability checks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::intensity::{normalize_trace, IntensityTrace};

/// Relative slack when comparing strides or matching centres to grid points.
const GRID_EPS: f64 = 1e-6;

/// Relative margin a candidate band must beat the current best by; smaller
/// differences count as ties and keep the earlier band.
const TIE_EPS: f64 = 1e-12;

/// Normalised traces placed on one shared grid of window centres.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTraces {
    pub subjects: Vec<String>,
    pub grid: Vec<f64>,
    pub stride: f64,
    /// `normalized[subject][grid point]`, 0 where a subject has no window.
    pub normalized: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortStack {
    pub subjects: Vec<String>,
    pub grid: Vec<f64>,
    pub stride: f64,
    pub normalized: Vec<Vec<f64>>,
    /// `cumulative[i][j]` is the sum of `normalized[0..=i][j]`.
    pub cumulative: Vec<Vec<f64>>,
    pub top_line: Vec<f64>,
}

fn same_duration(a: f64, b: f64) -> bool {
    (a - b).abs() <= GRID_EPS * a.abs().max(b.abs())
}

/// Puts every trace, min-max normalised, on the grid of centres at stride
/// spacing from `start + window/2` to `end - window/2`.
pub fn align_traces(traces: &[IntensityTrace], start: f64, end: f64) -> Result<AlignedTraces> {
    let first = traces.first().ok_or(Error::EmptyInput)?;
    if !(start < end) {
        return Err(Error::InvalidRange(format!("need start < end, got [{start}, {end}]")));
    }
    let stride = first.spec.stride;
    let window = first.spec.window_length;
    if traces.iter().any(|t| !same_duration(t.spec.stride, stride)) {
        return Err(Error::StrideMismatch);
    }
    if traces.iter().any(|t| !same_duration(t.spec.window_length, window)) {
        return Err(Error::InvalidSpec("traces use different window lengths".into()));
    }
    let g0 = start + 0.5 * window;
    let g1 = end - 0.5 * window;
    if g1 < g0 {
        return Err(Error::EmptyIntersection);
    }
    let steps = ((g1 - g0) / stride + GRID_EPS).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|j| g0 + j as f64 * stride).collect();

    let mut normalized = Vec::with_capacity(traces.len());
    let mut subjects = Vec::with_capacity(traces.len());
    for trace in traces {
        let norm = normalize_trace(trace)?;
        let mut row = vec![0.0; grid.len()];
        for (&c, &v) in norm.centers.iter().zip(&norm.intensities) {
            let pos = (c - g0) / stride;
            let j = pos.round();
            if (pos - j).abs() <= GRID_EPS && j >= 0.0 && (j as usize) < grid.len() {
                row[j as usize] = v;
            }
        }
        normalized.push(row);
        subjects.push(trace.subject_id.clone());
    }
    Ok(AlignedTraces {
        subjects,
        grid,
        stride,
        normalized,
    })
}

/// Running sums across subjects at each grid point.
pub fn stack(aligned: AlignedTraces) -> CohortStack {
    let mut cumulative: Vec<Vec<f64>> = Vec::with_capacity(aligned.normalized.len());
    for row in &aligned.normalized {
        let next = match cumulative.last() {
            Some(prev) => prev.iter().zip(row).map(|(a, b)| a + b).collect(),
            None => row.clone(),
        };
        cumulative.push(next);
    }
    let top_line = cumulative
        .last()
        .cloned()
        .unwrap_or_else(|| vec![0.0; aligned.grid.len()]);
    CohortStack {
        subjects: aligned.subjects,
        grid: aligned.grid,
        stride: aligned.stride,
        normalized: aligned.normalized,
        cumulative,
        top_line,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnotationBands {
    pub lowest: Band,
    pub highest: Band,
    pub steepest: Band,
    pub band_width: f64,
}

/// Finds the bands of `band_width` with the lowest mean, the highest mean and
/// the largest absolute difference between the means of their second and
/// first halves. A band of `k = band_width / stride` samples starting at
/// centre `c` covers `[c, c + band_width)`. Ties go to the earliest band.
pub fn annotate_bands(trace: &IntensityTrace, band_width: f64) -> Result<AnnotationBands> {
    let stride = trace.spec.stride;
    let k = (band_width / stride).round();
    if !(k >= 2.0) || !same_duration(k * stride, band_width) {
        return Err(Error::InvalidBandWidth(format!(
            "band width {band_width}s must be a multiple of at least two strides ({stride}s)"
        )));
    }
    let k = k as usize;
    let n = trace.len();
    if n < k {
        return Err(Error::SpanTooShort {
            span_s: n as f64 * stride,
            required_s: band_width,
        });
    }
    let values = &trace.intensities;
    let half = k / 2;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;

    let score = |i: usize| {
        let band = &values[i..i + k];
        let change = (mean(&band[k - half..]) - mean(&band[..half])).abs();
        (mean(band), change)
    };
    let beats = |candidate: f64, best: f64| candidate > best + TIE_EPS * best.abs().max(1.0);

    let (mut lowest, mut highest, mut steepest) = (0, 0, 0);
    let (first_mean, first_change) = score(0);
    let (mut lo_val, mut hi_val, mut st_val) = (first_mean, first_mean, first_change);
    for i in 1..=(n - k) {
        let (m, change) = score(i);
        if beats(-m, -lo_val) {
            lo_val = m;
            lowest = i;
        }
        if beats(m, hi_val) {
            hi_val = m;
            highest = i;
        }
        if beats(change, st_val) {
            st_val = change;
            steepest = i;
        }
    }
    let band_at = |i: usize| Band {
        start: trace.centers[i],
        end: trace.centers[i] + band_width,
    };
    Ok(AnnotationBands {
        lowest: band_at(lowest),
        highest: band_at(highest),
        steepest: band_at(steepest),
        band_width,
    })
}

/// Pearson correlation. When either side has zero variance the result is 1 if
/// both do and 0 otherwise.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "pearson needs equal lengths");
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    match (saa > 0.0, sbb > 0.0) {
        (true, true) => sab / (saa * sbb).sqrt(),
        (false, false) => 1.0,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Subject indices per group, ascending.
    pub groups: Vec<Vec<usize>>,
    pub group_top_lines: Vec<Vec<f64>>,
    /// Correlation of each group's top line with the whole cohort's.
    pub correlations: Vec<f64>,
}

/// Splits the cohort into `groups` random near-equal sub-groups (seeded, so
/// reproducible) and compares each sub-group's top line with the full one.
pub fn subgroup_stability(cohort: &CohortStack, groups: usize, seed: u64) -> Result<StabilityReport> {
    let n = cohort.subjects.len();
    if groups < 2 || n < 2 * groups {
        return Err(Error::TooFewSubjects {
            required: 2 * groups.max(2),
            got: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut members = vec![Vec::new(); groups];
    for (pos, &subject) in order.iter().enumerate() {
        members[pos % groups].push(subject);
    }
    for g in &mut members {
        g.sort_unstable();
    }
    let group_top_lines: Vec<Vec<f64>> = members
        .iter()
        .map(|g| {
            let mut line = vec![0.0; cohort.grid.len()];
            for &s in g {
                for (acc, v) in line.iter_mut().zip(&cohort.normalized[s]) {
                    *acc += v;
                }
            }
            line
        })
        .collect();
    let correlations = group_top_lines
        .iter()
        .map(|line| pearson(line, &cohort.top_line))
        .collect();
    Ok(StabilityReport {
        groups: members,
        group_top_lines,
        correlations,
    })
}
