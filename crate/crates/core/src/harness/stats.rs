use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::StatsError;
use crate::routing::NodeId;

/// Counters of one run. Only data packets originated after the warm-up are
/// counted in `sent` / `delivered`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub source: NodeId,
    pub sink: NodeId,
    /// Application packets originated after warm-up.
    pub sent: u64,
    /// Of those, packets that reached the sink.
    pub delivered: u64,
    /// Every application packet originated, warm-up included.
    pub originated: u64,
    pub control_bytes: u64,
    pub control_packets: u64,
    pub data_transmissions: u64,
    pub dropped_no_route: u64,
    pub dropped_ttl: u64,
    pub lost_in_channel: u64,
    /// End-to-end delays in seconds, when latency recording is enabled.
    pub latencies: Vec<f64>,
}

impl RunStats {
    pub fn new(source: NodeId, sink: NodeId) -> Self {
        RunStats {
            source,
            sink,
            sent: 0,
            delivered: 0,
            originated: 0,
            control_bytes: 0,
            control_packets: 0,
            data_transmissions: 0,
            dropped_no_route: 0,
            dropped_ttl: 0,
            lost_in_channel: 0,
            latencies: Vec::new(),
        }
    }

    pub fn pdr(&self) -> Result<f64, StatsError> {
        pdr(self.sent, self.delivered)
    }
}

/// Packet delivery ratio `delivered / sent`.
pub fn pdr(sent: u64, delivered: u64) -> Result<f64, StatsError> {
    if sent == 0 {
        return Err(StatsError::NoTraffic);
    }
    debug_assert!(delivered <= sent);
    Ok(delivered as f64 / sent as f64)
}

/// Student-t confidence interval: `(mean, half_width)`.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64), StatsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidLevel(level));
    }
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        return Ok((mean, 0.0));
    }
    let t = StudentsT::new(0.0, 1.0, nf - 1.0)
        .expect("degrees of freedom are positive")
        .inverse_cdf((1.0 + level) / 2.0);
    Ok((mean, t * var.sqrt() / nf.sqrt()))
}
