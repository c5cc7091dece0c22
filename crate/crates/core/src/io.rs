//! On-disk formats.
//!
//! Every file is plain comma-separated text with a mandatory header row.
//! Instants are ISO-8601 with an explicit offset (`Z` or `±HH:MM`) on input
//! and always UTC `Z` on output. Lines starting with `#` are comments; the
//! trace and stack writers use `# key = value` comment lines to carry the
//! window parameters alongside the data. Floats are written in shortest
//! round-trip form so `read(write(x)) == x` bit for bit.
//!
//! | file    | header                                 |
//! |---------|----------------------------------------|
//! | events  | `timestamp,stream_id[,weight]` (header optional) |
//! | accel   | `timestamp,x,y,z` (header optional)    |
//! | series  | `timestamp,value`                      |
//! | trace   | `center_iso8601,intensity,coverage`    |
//! | stack   | `center_iso8601,<subject>...`          |
//! | topline | `center_iso8601,top_line`              |
//! | bands   | `band,start_iso8601,end_iso8601`       |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset, SecondsFormat, Utc};

use crate::cohort::{stack, AlignedTraces, AnnotationBands, Band, CohortStack, StabilityReport};
use crate::error::{Error, Result};
use crate::intensity::IntensityTrace;
use crate::preprocess::{AccelPipeline, Event, EventLog, TriaxialSeries, DEFAULT_BIN_WIDTH};
use crate::timeseries::{median_gap, Method, TimeSeries, WindowSpec, DAY, HOUR, MINUTE};

pub const TRACE_HEADER: &str = "center_iso8601,intensity,coverage";
pub const SERIES_HEADER: &str = "timestamp,value";
pub const TOPLINE_HEADER: &str = "center_iso8601,top_line";
pub const BANDS_HEADER: &str = "band,start_iso8601,end_iso8601";
pub const STABILITY_HEADER: &str = "group,size,correlation,members";

/// Fewest rows accepted in an accelerometer file.
pub const MIN_ACCEL_ROWS: usize = 100;

/// Parses an ISO-8601 instant that carries an explicit offset.
pub fn parse_instant(text: &str) -> std::result::Result<f64, String> {
    let dt = DateTime::parse_from_rfc3339(text.trim()).map_err(|e| {
        format!(
            "invalid timestamp `{}` ({e}); an explicit offset is required",
            text.trim()
        )
    })?;
    Ok(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9)
}

/// Formats seconds since the epoch as UTC ISO-8601, with as many fractional
/// digits as needed (none for whole seconds).
pub fn format_instant(t: f64) -> String {
    let secs = t.floor();
    let mut nanos = ((t - secs) * 1e9).round() as u32;
    let mut secs = secs as i64;
    if nanos >= 1_000_000_000 {
        secs += 1;
        nanos -= 1_000_000_000;
    }
    match DateTime::<Utc>::from_timestamp(secs, nanos) {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::AutoSi, true),
        None => format!("{t}"),
    }
}

/// Parses `<number><unit>` with unit one of `s`, `m`, `h`, `d` into seconds.
pub fn parse_duration(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_ascii_alphabetic())
        .ok_or_else(|| format!("duration `{text}` needs a unit (s, m, h, d)"))?;
    let (number, unit) = text.split_at(split);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("invalid duration number `{number}`"))?;
    let scale = match unit {
        "s" => 1.0,
        "m" => MINUTE,
        "h" => HOUR,
        "d" => DAY,
        other => return Err(format!("unknown duration unit `{other}` (use s, m, h, d)")),
    };
    if !value.is_finite() || value < 0.0 {
        return Err(format!("duration `{text}` must be finite and non-negative"));
    }
    Ok(value * scale)
}

/// Shortest readable form: largest unit that divides the duration exactly.
pub fn format_duration(seconds: f64) -> String {
    for (unit, scale) in [("d", DAY), ("h", HOUR), ("m", MINUTE)] {
        let v = seconds / scale;
        if v >= 1.0 && v.fract() == 0.0 {
            return format!("{v}{unit}");
        }
    }
    if (MINUTE..HOUR).contains(&seconds) {
        return format!("{}m", seconds / MINUTE);
    }
    if seconds < MINUTE {
        return format!("{seconds}s");
    }
    format!("{}h", seconds / HOUR)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with 1-based line numbers. `#` comments are passed through
/// separately so writers can embed metadata.
enum Line<'a> {
    Comment(usize, &'a str),
    Data(usize, &'a str),
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        if line.is_empty() {
            None
        } else if let Some(rest) = line.strip_prefix('#') {
            Some(Line::Comment(i + 1, rest.trim()))
        } else {
            Some(Line::Data(i + 1, line))
        }
    })
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_error(line, format!("invalid {what} `{}`", field.trim())))?;
    if !v.is_finite() {
        return Err(parse_error(line, format!("{what} must be finite")));
    }
    Ok(v)
}

fn field<'a>(fields: &[&'a str], index: usize, line: usize, column: &'static str) -> Result<&'a str> {
    match fields.get(index) {
        Some(f) if !f.trim().is_empty() => Ok(f.trim()),
        _ => Err(Error::MissingColumn { line, column }),
    }
}

fn is_header(line: &str) -> bool {
    line.split(',')
        .next()
        .map(|f| f.trim().eq_ignore_ascii_case("timestamp"))
        .unwrap_or(false)
}

fn subject_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses `timestamp,stream_id[,weight]` rows into a time-sorted log.
pub fn parse_events(text: &str, subject_id: &str) -> Result<EventLog> {
    let mut events = Vec::new();
    let mut first = true;
    for line in lines(text) {
        let Line::Data(n, row) = line else { continue };
        if std::mem::take(&mut first) && is_header(row) {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        let timestamp = parse_instant(field(&fields, 0, n, "timestamp")?).map_err(|m| parse_error(n, m))?;
        let stream_id = field(&fields, 1, n, "stream_id")?.to_string();
        let weight = match fields.get(2).map(|f| f.trim()) {
            None | Some("") => 1.0,
            Some(w) => parse_f64(w, n, "weight")?,
        };
        if weight < 0.0 {
            return Err(parse_error(n, "weight must be non-negative"));
        }
        if fields.len() > 3 {
            return Err(parse_error(
                n,
                format!("expected at most 3 columns, got {}", fields.len()),
            ));
        }
        events.push(Event {
            timestamp,
            stream_id,
            weight,
        });
    }
    EventLog::new(events, subject_id)
}

pub fn read_events(path: &Path) -> Result<EventLog> {
    parse_events(&read_text(path)?, &subject_from_path(path))
}

/// Accelerometer samples plus anything worth telling the user about.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelRead {
    pub series: TriaxialSeries,
    pub warnings: Vec<String>,
}

/// Parses `timestamp,x,y,z` rows. Out-of-order rows are sorted and repeated
/// timestamps keep their first row, each with a warning. The nominal rate is
/// the reciprocal of the median sample gap.
pub fn parse_accel(text: &str) -> Result<AccelRead> {
    let mut rows: Vec<(f64, [f64; 3])> = Vec::new();
    let mut first = true;
    for line in lines(text) {
        let Line::Data(n, row) = line else { continue };
        if std::mem::take(&mut first) && is_header(row) {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        let t = parse_instant(field(&fields, 0, n, "timestamp")?).map_err(|m| parse_error(n, m))?;
        let x = parse_f64(field(&fields, 1, n, "x")?, n, "x")?;
        let y = parse_f64(field(&fields, 2, n, "y")?, n, "y")?;
        let z = parse_f64(field(&fields, 3, n, "z")?, n, "z")?;
        if fields.len() > 4 {
            return Err(parse_error(n, format!("expected 4 columns, got {}", fields.len())));
        }
        rows.push((t, [x, y, z]));
    }
    if rows.len() < MIN_ACCEL_ROWS {
        return Err(Error::TooFewRows {
            required: MIN_ACCEL_ROWS,
            got: rows.len(),
        });
    }
    let mut warnings = Vec::new();
    if rows.windows(2).any(|w| w[1].0 < w[0].0) {
        warnings.push("accelerometer rows were out of order and have been sorted".to_string());
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let before = rows.len();
    rows.dedup_by(|b, a| a.0 == b.0);
    if rows.len() < before {
        warnings.push(format!("dropped {} rows with repeated timestamps", before - rows.len()));
    }
    let (timestamps, xyz): (Vec<f64>, Vec<[f64; 3]>) = rows.into_iter().unzip();
    let gap = median_gap(&timestamps).filter(|g| *g > 0.0).ok_or(Error::TooFewRows {
        required: MIN_ACCEL_ROWS,
        got: timestamps.len(),
    })?;
    Ok(AccelRead {
        series: TriaxialSeries::new(timestamps, xyz, 1.0 / gap)?,
        warnings,
    })
}

pub fn read_accel(path: &Path) -> Result<AccelRead> {
    parse_accel(&read_text(path)?)
}

pub fn format_series(series: &TimeSeries) -> String {
    let mut out = String::new();
    if !series.unit_label().is_empty() {
        let _ = writeln!(out, "# unit = {}", series.unit_label());
    }
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (&t, &v) in series.timestamps().iter().zip(series.values()) {
        let _ = writeln!(out, "{},{}", format_instant(t), v);
    }
    out
}

pub fn write_series(series: &TimeSeries, path: &Path) -> Result<()> {
    write_text(path, &format_series(series))
}

fn comment_kv(comment: &str) -> Option<(&str, &str)> {
    let (k, v) = comment.split_once('=')?;
    Some((k.trim(), v.trim()))
}

fn expect_header(row: &str, line: usize, header: &str) -> Result<()> {
    if row.replace(' ', "") != header {
        return Err(parse_error(line, format!("expected header `{header}`")));
    }
    Ok(())
}

pub fn parse_series(text: &str) -> Result<TimeSeries> {
    let mut unit = String::new();
    let mut header_seen = false;
    let (mut ts, mut vs) = (Vec::new(), Vec::new());
    for line in lines(text) {
        match line {
            Line::Comment(_, c) => {
                if let Some(("unit", v)) = comment_kv(c) {
                    unit = v.to_string();
                }
            }
            Line::Data(n, row) if !header_seen => {
                expect_header(row, n, SERIES_HEADER)?;
                header_seen = true;
            }
            Line::Data(n, row) => {
                let fields: Vec<&str> = row.split(',').collect();
                ts.push(parse_instant(field(&fields, 0, n, "timestamp")?).map_err(|m| parse_error(n, m))?);
                vs.push(parse_f64(field(&fields, 1, n, "value")?, n, "value")?);
            }
        }
    }
    if !header_seen {
        return Err(parse_error(1, format!("missing header `{SERIES_HEADER}`")));
    }
    TimeSeries::new(ts, vs, unit)
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    parse_series(&read_text(path)?)
}

fn spec_comments(out: &mut String, spec: &WindowSpec) {
    let _ = writeln!(out, "# target_period = {}s", spec.target_period);
    let _ = writeln!(out, "# window_length = {}s", spec.window_length);
    let _ = writeln!(out, "# stride = {}s", spec.stride);
    let _ = writeln!(out, "# period_tolerance = {}s", spec.period_tolerance);
    let _ = writeln!(out, "# method = {}", spec.method);
    let _ = writeln!(out, "# min_coverage = {}", spec.min_coverage);
}

fn apply_spec_comment(spec: &mut WindowSpec, key: &str, value: &str, line: usize) -> Result<bool> {
    let duration = |v: &str| parse_duration(v).map_err(|m| parse_error(line, m));
    match key {
        "target_period" => spec.target_period = duration(value)?,
        "window_length" => spec.window_length = duration(value)?,
        "stride" => spec.stride = duration(value)?,
        "period_tolerance" => spec.period_tolerance = duration(value)?,
        "method" => spec.method = value.parse().map_err(|e: Error| parse_error(line, e.to_string()))?,
        "min_coverage" => spec.min_coverage = parse_f64(value, line, "min_coverage")?,
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn format_trace(trace: &IntensityTrace) -> String {
    let mut out = String::new();
    if !trace.subject_id.is_empty() {
        let _ = writeln!(out, "# subject = {}", trace.subject_id);
    }
    spec_comments(&mut out, &trace.spec);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for i in 0..trace.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_instant(trace.centers[i]),
            trace.intensities[i],
            trace.coverage[i]
        );
    }
    out
}

pub fn write_trace(trace: &IntensityTrace, path: &Path) -> Result<()> {
    write_text(path, &format_trace(trace))
}

/// Reads a trace. Window parameters come from the `#` metadata lines; a file
/// without them falls back to the home-sensor defaults with the stride taken
/// from the centre spacing.
pub fn parse_trace(text: &str) -> Result<IntensityTrace> {
    let mut spec = WindowSpec::home_sensor();
    let mut stride_given = false;
    let mut subject = String::new();
    let mut header_seen = false;
    let (mut centers, mut intensities, mut coverage) = (Vec::new(), Vec::new(), Vec::new());
    for line in lines(text) {
        match line {
            Line::Comment(n, c) => {
                if let Some((k, v)) = comment_kv(c) {
                    if k == "subject" {
                        subject = v.to_string();
                    } else if apply_spec_comment(&mut spec, k, v, n)? && k == "stride" {
                        stride_given = true;
                    }
                }
            }
            Line::Data(n, row) if !header_seen => {
                expect_header(row, n, TRACE_HEADER)?;
                header_seen = true;
            }
            Line::Data(n, row) => {
                let fields: Vec<&str> = row.split(',').collect();
                centers.push(parse_instant(field(&fields, 0, n, "center_iso8601")?).map_err(|m| parse_error(n, m))?);
                let v = parse_f64(field(&fields, 1, n, "intensity")?, n, "intensity")?;
                let c = parse_f64(field(&fields, 2, n, "coverage")?, n, "coverage")?;
                if v < 0.0 {
                    return Err(parse_error(n, "intensity must be non-negative"));
                }
                if !(0.0..=1.0).contains(&c) {
                    return Err(parse_error(n, "coverage must lie in [0, 1]"));
                }
                intensities.push(v);
                coverage.push(c);
            }
        }
    }
    if !header_seen {
        return Err(parse_error(1, format!("missing header `{TRACE_HEADER}`")));
    }
    if centers.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if centers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotonic("trace centres must strictly increase".into()));
    }
    if !stride_given {
        if let Some(gap) = median_gap(&centers) {
            spec.stride = gap;
        }
    }
    spec.validate().map_err(|e| parse_error(1, e.to_string()))?;
    Ok(IntensityTrace {
        centers,
        intensities,
        coverage,
        spec,
        subject_id: subject,
    })
}

/// Reads a trace; the subject id defaults to the file stem.
pub fn read_trace(path: &Path) -> Result<IntensityTrace> {
    let mut trace = parse_trace(&read_text(path)?)?;
    if trace.subject_id.is_empty() {
        trace.subject_id = subject_from_path(path);
    }
    Ok(trace)
}

fn csv_safe(name: &str) -> String {
    name.replace([',', '\n', '\r'], "_")
}

pub fn format_stack(cohort: &CohortStack) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# stride = {}s", cohort.stride);
    out.push_str("center_iso8601");
    for s in &cohort.subjects {
        out.push(',');
        out.push_str(&csv_safe(s));
    }
    out.push('\n');
    for (j, &t) in cohort.grid.iter().enumerate() {
        out.push_str(&format_instant(t));
        for row in &cohort.normalized {
            let _ = write!(out, ",{}", row[j]);
        }
        out.push('\n');
    }
    out
}

pub fn write_stack(cohort: &CohortStack, path: &Path) -> Result<()> {
    write_text(path, &format_stack(cohort))
}

/// Reads a stack matrix and rebuilds the cumulative rows and top line.
pub fn parse_stack(text: &str) -> Result<CohortStack> {
    let mut stride = None;
    let mut subjects: Option<Vec<String>> = None;
    let mut grid = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for line in lines(text) {
        match line {
            Line::Comment(n, c) => {
                if let Some(("stride", v)) = comment_kv(c) {
                    stride = Some(parse_duration(v).map_err(|m| parse_error(n, m))?);
                }
            }
            Line::Data(n, row) if subjects.is_none() => {
                let mut fields = row.split(',');
                if fields.next().map(str::trim) != Some("center_iso8601") {
                    return Err(parse_error(n, "expected header starting with `center_iso8601`"));
                }
                let names: Vec<String> = fields.map(|f| f.trim().to_string()).collect();
                columns = vec![Vec::new(); names.len()];
                subjects = Some(names);
            }
            Line::Data(n, row) => {
                let fields: Vec<&str> = row.split(',').collect();
                if fields.len() != columns.len() + 1 {
                    return Err(parse_error(
                        n,
                        format!("expected {} columns, got {}", columns.len() + 1, fields.len()),
                    ));
                }
                grid.push(parse_instant(fields[0]).map_err(|m| parse_error(n, m))?);
                for (col, f) in columns.iter_mut().zip(&fields[1..]) {
                    col.push(parse_f64(f, n, "value")?);
                }
            }
        }
    }
    let subjects = subjects.ok_or_else(|| parse_error(1, "missing header"))?;
    if subjects.is_empty() || grid.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let stride = stride
        .or_else(|| median_gap(&grid))
        .ok_or_else(|| parse_error(1, "cannot determine stride"))?;
    Ok(stack(AlignedTraces {
        subjects,
        grid,
        stride,
        normalized: columns,
    }))
}

pub fn read_stack(path: &Path) -> Result<CohortStack> {
    parse_stack(&read_text(path)?)
}

pub fn format_top_line(cohort: &CohortStack) -> String {
    let mut out = String::from(TOPLINE_HEADER);
    out.push('\n');
    for (&t, &v) in cohort.grid.iter().zip(&cohort.top_line) {
        let _ = writeln!(out, "{},{}", format_instant(t), v);
    }
    out
}

pub fn write_top_line(cohort: &CohortStack, path: &Path) -> Result<()> {
    write_text(path, &format_top_line(cohort))
}

pub const BAND_LABELS: [&str; 3] = ["red", "green", "yellow"];

/// Rows labelled red (lowest), green (highest) and yellow (steepest).
pub fn format_bands(bands: &AnnotationBands) -> String {
    let mut out = String::from(BANDS_HEADER);
    out.push('\n');
    for (label, band) in BAND_LABELS.iter().zip([bands.lowest, bands.highest, bands.steepest]) {
        let _ = writeln!(
            out,
            "{label},{},{}",
            format_instant(band.start),
            format_instant(band.end)
        );
    }
    out
}

pub fn write_bands(bands: &AnnotationBands, path: &Path) -> Result<()> {
    write_text(path, &format_bands(bands))
}

pub fn parse_bands(text: &str) -> Result<AnnotationBands> {
    let mut found: BTreeMap<&str, Band> = BTreeMap::new();
    let mut header_seen = false;
    for line in lines(text) {
        let Line::Data(n, row) = line else { continue };
        if !header_seen {
            expect_header(row, n, BANDS_HEADER)?;
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        let label = field(&fields, 0, n, "band")?;
        let label = BAND_LABELS
            .iter()
            .find(|l| **l == label)
            .ok_or_else(|| parse_error(n, format!("unknown band `{label}`")))?;
        let start = parse_instant(field(&fields, 1, n, "start_iso8601")?).map_err(|m| parse_error(n, m))?;
        let end = parse_instant(field(&fields, 2, n, "end_iso8601")?).map_err(|m| parse_error(n, m))?;
        if end <= start {
            return Err(parse_error(n, "band end must follow its start"));
        }
        found.insert(label, Band { start, end });
    }
    let get = |label: &str| {
        found
            .get(label)
            .copied()
            .ok_or_else(|| parse_error(1, format!("missing `{label}` band")))
    };
    let lowest = get("red")?;
    Ok(AnnotationBands {
        lowest,
        highest: get("green")?,
        steepest: get("yellow")?,
        band_width: lowest.end - lowest.start,
    })
}

pub fn read_bands(path: &Path) -> Result<AnnotationBands> {
    parse_bands(&read_text(path)?)
}

pub fn format_stability(report: &StabilityReport, subjects: &[String]) -> String {
    let mut out = String::from(STABILITY_HEADER);
    out.push('\n');
    for (g, (members, r)) in report.groups.iter().zip(&report.correlations).enumerate() {
        let names: Vec<String> = members.iter().map(|&i| csv_safe(&subjects[i])).collect();
        let _ = writeln!(out, "{},{},{},{}", g + 1, members.len(), r, names.join(" "));
    }
    out
}

/// Flat `key = value` run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: WindowSpec,
    pub bin_width: f64,
    pub accel: AccelPipeline,
    pub subjects: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub timezone: FixedOffset,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec: WindowSpec::home_sensor(),
            bin_width: DEFAULT_BIN_WIDTH,
            accel: AccelPipeline::default(),
            subjects: Vec::new(),
            inputs: Vec::new(),
            timezone: FixedOffset::east_opt(0).expect("zero offset"),
        }
    }
}

fn parse_offset(text: &str) -> std::result::Result<FixedOffset, String> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("utc") || t == "Z" {
        return Ok(FixedOffset::east_opt(0).expect("zero offset"));
    }
    let sign = match t.chars().next() {
        Some('+') => 1,
        Some('-') => -1,
        _ => return Err(format!("timezone `{t}` must be UTC or ±HH:MM")),
    };
    let (h, m) = t[1..]
        .split_once(':')
        .ok_or_else(|| format!("timezone `{t}` must be UTC or ±HH:MM"))?;
    let h: i32 = h.parse().map_err(|_| format!("invalid hours in `{t}`"))?;
    let m: i32 = m.parse().map_err(|_| format!("invalid minutes in `{t}`"))?;
    FixedOffset::east_opt(sign * (h * 3600 + m * 60)).ok_or_else(|| format!("timezone `{t}` out of range"))
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl RunConfig {
    /// Parses config text; relative input paths resolve against `base_dir`
    /// and must exist.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let n = i + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {n}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |m: String| Error::Config(format!("line {n}: {key}: {m}"));
            let duration = |v: &str| parse_duration(v).map_err(bad);
            let number = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("invalid number `{v}`")));
            match key {
                "target_period" => cfg.spec.target_period = duration(value)?,
                "window_length" => cfg.spec.window_length = duration(value)?,
                "stride" => cfg.spec.stride = duration(value)?,
                "period_tolerance" => cfg.spec.period_tolerance = duration(value)?,
                "method" => cfg.spec.method = value.parse::<Method>().map_err(|e| bad(e.to_string()))?,
                "min_coverage" => cfg.spec.min_coverage = number(value)?,
                "bin_width" => cfg.bin_width = duration(value)?,
                "filter_order" => {
                    cfg.accel.order = value.parse().map_err(|_| bad(format!("invalid order `{value}`")))?
                }
                "filter_low" => cfg.accel.low_cutoff = number(value)?,
                "filter_high" => cfg.accel.high_cutoff = number(value)?,
                "mean_window" => cfg.accel.bucket = duration(value)?,
                "subjects" => cfg.subjects = list(value),
                "inputs" => {
                    cfg.inputs = list(value)
                        .into_iter()
                        .map(|p| {
                            let p = PathBuf::from(p);
                            if p.is_absolute() {
                                p
                            } else {
                                base_dir.join(p)
                            }
                        })
                        .collect()
                }
                "timezone" => cfg.timezone = parse_offset(value).map_err(bad)?,
                other => return Err(Error::Config(format!("line {n}: unknown key `{other}`"))),
            }
        }
        cfg.spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(cfg.bin_width > 0.0) {
            return Err(Error::Config("bin_width must be positive".into()));
        }
        if let Some(missing) = cfg.inputs.iter().find(|p| !p.exists()) {
            return Err(Error::Config(format!("input `{}` does not exist", missing.display())));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&read_text(path)?, base)
    }
}
