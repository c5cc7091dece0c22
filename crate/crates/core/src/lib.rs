//! Periodicity intensity of longitudinal time series.
//!
//! A window of fixed duration slides across a (possibly irregular) series;
//! in each window the spectral energy around a target frequency, usually one
//! cycle per day, is measured. The resulting trace shows how strongly the
//! recurring pattern is expressed over time. Around that engine sit ingestion
//! pipelines for event logs and accelerometers, cohort stacking and
//! annotation, file formats and SVG rendering.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cohort;
pub mod error;
pub mod intensity;
pub mod io;
pub mod preprocess;
pub mod render;
pub mod spectrum;
pub mod timeseries;

pub use error::{Error, Result};
pub use intensity::{compute_intensity_trace, normalize_trace, IntensityTrace};
pub use spectrum::{band_energy, fft_periodogram, lomb_scargle_power, BandSource, Spectrum};
pub use timeseries::{plan_windows, validate_series, Method, TimeSeries, WindowPlan, WindowSpec};
