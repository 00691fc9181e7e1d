use std::path::PathBuf;

use thiserror::Error;

use crate::geo::Position;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("position {0} is outside the world bounds")]
    OutOfBounds(Position),
    #[error("precision {0} outside supported range [1, 5]")]
    Precision(u8),
    #[error("cannot refine an area from precision {from} to {to}")]
    Refinement { from: u8, to: u8 },
    #[error("malformed area label {0:?}")]
    BadLabel(String),
    #[error("grid tag {0:?} must be non-empty without whitespace")]
    BadTag(String),
    #[error("invalid grid extent {0}")]
    BadExtent(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoadError {
    #[error("edge {index}: zero-length street between {a} and {b}")]
    ZeroLength {
        index: usize,
        a: Position,
        b: Position,
    },
    #[error("edge {index}: lane count {lanes} is not one of 2, 4, 6")]
    Lanes { index: usize, lanes: u32 },
    #[error("edge {index}: non-finite coordinate")]
    NonFinite { index: usize },
    #[error("unknown lane count {0}")]
    UnknownLanes(u32),
    #[error("street length must be positive, got {0}")]
    Length(f64),
    #[error("road graph has no streets")]
    Empty,
    #[error("junction radii must satisfy 0 < fp1 < fp2 (got {fp1}, {fp2})")]
    Radii { fp1: f64, fp2: f64 },
    #[error("lane weights must be positive and non-increasing in lane count")]
    Weights,
    #[error("road file row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("road file: {0}")]
    Csv(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeaderError {
    #[error("header truncated")]
    Truncated,
    #[error("unknown header field type {0:#04x}")]
    UnknownField(u8),
    #[error("field {0:#04x} has a bad length")]
    FieldLength(u8),
    #[error("missing mandatory field {0}")]
    Missing(&'static str),
    #[error("field is not valid UTF-8")]
    Utf8,
    #[error("bad name {0:?}")]
    Name(String),
    #[error("bad area label {0:?}")]
    Area(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NameError {
    #[error("name must start with '/' and have at least one component: {0:?}")]
    Malformed(String),
    #[error("name has an empty component: {0:?}")]
    EmptyComponent(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CsError {
    #[error("payload of {size} bytes exceeds content store capacity {capacity}")]
    Oversized { size: u64, capacity: u64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkloadError {
    #[error("catalog needs at least 10 songs, got {0}")]
    TooFewSongs(usize),
    #[error("no Zipf exponent puts mass {mass} on the top {top} of {n} songs")]
    Infeasible { n: usize, top: usize, mass: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("trace row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("vehicle {vehicle}: sample times must be strictly increasing (at {time_s} s)")]
    NonMonotone { vehicle: String, time_s: f64 },
    #[error("unknown vehicle {0}")]
    UnknownVehicle(String),
    #[error("trace: {0}")]
    Csv(String),
}

/// Scenario validation failures. Maps to CLI exit code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Road(#[from] RoadError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

/// Failures while a validated scenario executes or reports. Maps to exit code 3.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization: {0}")]
    Serialize(String),
    #[error("simulation: {0}")]
    Sim(String),
}
