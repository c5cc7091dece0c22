use std::path::Path;

use periodicity::cohort::{align_traces, annotate_bands, stack as stack_traces, subgroup_stability};
use periodicity::intensity::{compute_intensity_trace, normalize_trace};
use periodicity::io::{
    format_stability, read_accel, read_bands, read_events, read_series, read_stack, read_trace, write_bands,
    write_series, write_stack, write_top_line, write_trace, RunConfig,
};
use periodicity::preprocess::{bin_events, fuse_streams, AccelPipeline, TriaxialSeries};
use periodicity::render::{render_line, render_stacked};
use periodicity::timeseries::{median_gap, Method, WindowSpec, DAY};
use periodicity::{Error, IntensityTrace};

use crate::{
    AnnotateArgs, IngestArgs, IngestKind, IntensityArgs, MethodArg, Preset, RenderArgs, RenderKind, StabilityArgs,
    StackArgs,
};

const USAGE_EXIT: u8 = 2;
const DATA_EXIT: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
    code: u8,
}

impl CliError {
    fn usage(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            code: USAGE_EXIT,
        }
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn message(&self) -> &str {
        &self.message
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Config(_) => USAGE_EXIT,
            _ => DATA_EXIT,
        };
        Self {
            kind: err.kind(),
            message: err.to_string(),
            code,
        }
    }
}

type CliResult = Result<(), CliError>;

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| CliError {
        kind: "IoError",
        message: format!("{}: {e}", path.display()),
        code: DATA_EXIT,
    })
}

pub fn ingest(args: &IngestArgs) -> CliResult {
    let cfg = load_config(args.config.as_deref())?;
    match args.kind {
        IngestKind::Events => ingest_events(args, &cfg),
        IngestKind::Accel => ingest_accel(args, &cfg),
    }
}

fn ingest_events(args: &IngestArgs, cfg: &RunConfig) -> CliResult {
    let bin = args.bin.unwrap_or(cfg.bin_width);
    if !(bin > 0.0) {
        return Err(CliError::usage("InvalidSpec", "--bin must be positive"));
    }
    let mut logs = Vec::with_capacity(args.inputs.len());
    for path in &args.inputs {
        let log = read_events(path)?;
        eprintln!("read {} events from {}", log.len(), path.display());
        logs.push(log);
    }
    let range = logs
        .iter()
        .filter_map(|l| l.time_range())
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)));
    let start = match (args.start, range) {
        (Some(s), _) => s,
        (None, Some((first, _))) => (first / DAY).floor() * DAY,
        (None, None) => return Err(Error::EmptyInput.into()),
    };
    let end = match (args.end, range) {
        (Some(e), _) => e,
        (None, Some((_, last))) => ((last - start) / bin).floor() * bin + start + bin,
        (None, None) => return Err(Error::EmptyInput.into()),
    };
    if !(end > start) {
        return Err(CliError::usage("InvalidRange", "--end must be after --start"));
    }
    let binned = logs
        .iter()
        .map(|log| bin_events(log, bin, start, end))
        .collect::<Result<Vec<_>, _>>()?;
    let fused = fuse_streams(&binned)?.with_unit("events per bin");
    write_series(&fused, &args.out)?;
    eprintln!("wrote {} rows to {}", fused.len(), args.out.display());
    Ok(())
}

fn ingest_accel(args: &IngestArgs, cfg: &RunConfig) -> CliResult {
    let mut reads = Vec::with_capacity(args.inputs.len());
    for path in &args.inputs {
        let read = read_accel(path)?;
        for w in &read.warnings {
            eprintln!("warning: {}: {w}", path.display());
        }
        eprintln!("read {} rows from {}", read.series.len(), path.display());
        reads.push(read.series);
    }
    let raw = if reads.len() == 1 {
        reads.pop().ok_or(Error::EmptyInput)?
    } else {
        let mut rows: Vec<(f64, [f64; 3])> = reads
            .iter()
            .flat_map(|s| s.timestamps().iter().copied().zip(s.xyz().iter().copied()))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let before = rows.len();
        rows.dedup_by(|b, a| a.0 == b.0);
        if rows.len() < before {
            eprintln!("warning: dropped {} rows repeated across files", before - rows.len());
        }
        let (timestamps, xyz): (Vec<f64>, Vec<[f64; 3]>) = rows.into_iter().unzip();
        let gap = median_gap(&timestamps).ok_or(Error::EmptyInput)?;
        TriaxialSeries::new(timestamps, xyz, 1.0 / gap)?
    };
    let base = cfg.accel;
    let pipeline = AccelPipeline {
        order: args.order.unwrap_or(base.order),
        low_cutoff: args.low.unwrap_or(base.low_cutoff),
        high_cutoff: args.high.unwrap_or(base.high_cutoff),
        bucket: args.mean_window.unwrap_or(base.bucket),
    };
    let out = pipeline.run(&raw).map_err(|e| match e {
        Error::InvalidCutoffs(m) => CliError::usage("InvalidCutoffs", m),
        other => other.into(),
    })?;
    if let Some(w) = &out.design.warning {
        eprintln!("warning: {w}");
    }
    write_series(&out.series, &args.out)?;
    eprintln!("wrote {} rows to {}", out.series.len(), args.out.display());
    Ok(())
}

fn method(arg: MethodArg) -> Method {
    match arg {
        MethodArg::Auto => Method::Auto,
        MethodArg::Fft => Method::Fft,
        MethodArg::LombScargle => Method::LombScargle,
    }
}

/// Defaults, then the config file, then the preset, then explicit flags.
fn resolve_spec(args: &IntensityArgs, cfg: &RunConfig) -> Result<WindowSpec, CliError> {
    let mut spec = cfg.spec;
    if let Some(preset) = args.preset {
        let p = match preset {
            Preset::Home => WindowSpec::home_sensor(),
            Preset::Vle => WindowSpec::vle(),
            Preset::Calf => WindowSpec::calf(),
        };
        spec.target_period = p.target_period;
        spec.window_length = p.window_length;
        spec.stride = p.stride;
    }
    if let Some(v) = args.period {
        spec.target_period = v;
    }
    if let Some(v) = args.window {
        spec.window_length = v;
    }
    if let Some(v) = args.stride {
        spec.stride = v;
    }
    if let Some(v) = args.tolerance {
        spec.period_tolerance = v;
    }
    if let Some(v) = args.method {
        spec.method = method(v);
    }
    if let Some(v) = args.min_coverage {
        spec.min_coverage = v;
    }
    spec.validate()
        .map_err(|e| CliError::usage("InvalidSpec", e.to_string()))?;
    Ok(spec)
}

pub fn intensity(args: &IntensityArgs) -> CliResult {
    let cfg = load_config(args.config.as_deref())?;
    let spec = resolve_spec(args, &cfg)?;
    let series = read_series(&args.input)?;
    let subject = args.subject.clone().unwrap_or_else(|| {
        let name = args.input.file_name().map(|s| s.to_string_lossy().into_owned());
        let name = name.unwrap_or_default();
        name.split('.').next().unwrap_or_default().to_string()
    });
    let mut trace = compute_intensity_trace(&series, &spec)?.with_subject(subject);
    if args.normalize {
        trace = normalize_trace(&trace)?;
    }
    let empty = trace.intensities.iter().filter(|v| **v == 0.0).count();
    write_trace(&trace, &args.out)?;
    eprintln!(
        "wrote {} windows to {} ({} at zero)",
        trace.len(),
        args.out.display(),
        empty
    );
    Ok(())
}

fn read_traces(paths: &[std::path::PathBuf]) -> Result<Vec<IntensityTrace>, CliError> {
    paths.iter().map(|p| read_trace(p).map_err(CliError::from)).collect()
}

/// Earliest window start and latest window end over all traces.
fn trace_span(traces: &[IntensityTrace]) -> Result<(f64, f64), CliError> {
    let mut span: Option<(f64, f64)> = None;
    for t in traces {
        let (Some(first), Some(last)) = (t.centers.first(), t.centers.last()) else {
            return Err(Error::EmptyTrace.into());
        };
        let half = t.spec.window_length / 2.0;
        let (s, e) = (first - half, last + half);
        span = Some(match span {
            Some((a, b)) => (a.min(s), b.max(e)),
            None => (s, e),
        });
    }
    span.ok_or_else(|| Error::EmptyInput.into())
}

fn build_stack(
    traces: &[IntensityTrace],
    start: Option<f64>,
    end: Option<f64>,
) -> Result<periodicity::cohort::CohortStack, CliError> {
    let (s, e) = trace_span(traces)?;
    let start = start.unwrap_or(s);
    for t in traces {
        let offset = (t.centers[0] - start - t.spec.window_length / 2.0) / t.spec.stride;
        if (offset - offset.round()).abs() > 1e-6 {
            eprintln!(
                "warning: {} has window centres off the stride grid; its column will be zero",
                t.subject_id
            );
        }
    }
    let aligned = align_traces(traces, start, end.unwrap_or(e))?;
    Ok(stack_traces(aligned))
}

pub fn stack(args: &StackArgs) -> CliResult {
    let traces = read_traces(&args.traces)?;
    let cohort = build_stack(&traces, args.start, args.end)?;
    write_stack(&cohort, &args.out)?;
    if let Some(path) = &args.top_line {
        write_top_line(&cohort, path)?;
    }
    eprintln!(
        "stacked {} subjects over {} grid points",
        cohort.subjects.len(),
        cohort.grid.len()
    );
    Ok(())
}

pub fn annotate(args: &AnnotateArgs) -> CliResult {
    let trace = normalize_trace(&read_trace(&args.trace)?)?;
    let width = args.band_width.unwrap_or(7.0 * DAY);
    let bands = annotate_bands(&trace, width).map_err(|e| match e {
        Error::InvalidBandWidth(m) => CliError::usage("InvalidBandWidth", m),
        other => other.into(),
    })?;
    write_bands(&bands, &args.out)?;
    Ok(())
}

pub fn stability(args: &StabilityArgs) -> CliResult {
    if args.groups < 2 {
        return Err(CliError::usage("InvalidSpec", "--groups must be at least 2"));
    }
    let traces = read_traces(&args.traces)?;
    let cohort = build_stack(&traces, args.start, args.end)?;
    let report = subgroup_stability(&cohort, args.groups, args.rng_seed)?;
    write_text(&args.out, &format_stability(&report, &cohort.subjects))?;
    let min = report.correlations.iter().copied().fold(f64::INFINITY, f64::min);
    eprintln!("{} groups, lowest correlation {min:.4}", report.groups.len());
    Ok(())
}

pub fn render(args: &RenderArgs) -> CliResult {
    let svg = match args.kind {
        RenderKind::Line => {
            let trace = normalize_trace(&read_trace(&args.input)?)?;
            let bands = args.bands.as_deref().map(read_bands).transpose()?;
            render_line(&trace, bands.as_ref())
        }
        RenderKind::Stacked => {
            if args.bands.is_some() {
                return Err(CliError::usage(
                    "InvalidArgument",
                    "--bands applies to line charts only",
                ));
            }
            render_stacked(&read_stack(&args.input)?)
        }
    };
    write_text(&args.out, &svg)
}
