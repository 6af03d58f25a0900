use thiserror::Error;

use crate::routing::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("cannot schedule at t={at}s, clock is already at {now}s")]
    ScheduleInPast { at: f64, now: f64 },
    #[error("cannot run until t={t_end}s, clock is already at {now}s")]
    RunInPast { t_end: f64, now: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("no active steering: every steering weight is zero")]
    NoActiveSteering,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace line {line}: timestamp for node {node} is not after its previous sample")]
    NonMonotonic { line: usize, node: NodeId },
    #[error("no samples")]
    NoSamples,
    #[error("trace has no samples for node {0}")]
    MissingNode(NodeId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum LocationError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("tx power {tx_power_dbm} dBm does not exceed sensitivity {sensitivity_dbm} dBm: no communication range")]
    NoRange {
        tx_power_dbm: f64,
        sensitivity_dbm: f64,
    },
    #[error("invalid channel parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum PacketError {
    #[error("truncated packet: need {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("unknown packet type {0}")]
    UnknownType(u8),
    #[error("{kind} packet has {extra} unexpected trailing bytes")]
    TrailingBytes { kind: &'static str, extra: usize },
    #[error("invalid packet: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: invalid value `{value}` for `{key}`")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no traffic originated")]
    NoTraffic,
    #[error("confidence interval needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("results csv line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure of a single simulation run.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("writing packet dump: {0}")]
    Io(#[from] std::io::Error),
}
