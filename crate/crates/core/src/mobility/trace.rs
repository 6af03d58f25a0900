//! Recorded mobility traces: `t,node_id,x,y,z` per line, `#` comments.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use crate::error::TraceError;
use crate::geometry::Vec3;
use crate::routing::NodeId;

/// Time-sorted position samples of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrace {
    samples: Vec<(f64, Vec3)>,
}

impl NodeTrace {
    pub fn samples(&self) -> &[(f64, Vec3)] {
        &self.samples
    }

    /// Linear interpolation between samples; holds the first/last sample
    /// outside the recorded span. Exact at sample instants.
    pub fn position_at(&self, t: f64) -> Vec3 {
        let s = &self.samples;
        let (first, last) = (s[0], s[s.len() - 1]);
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        match s.binary_search_by(|probe| probe.0.total_cmp(&t)) {
            Ok(i) => s[i].1,
            Err(i) => {
                let (t0, p0) = s[i - 1];
                let (t1, p1) = s[i];
                p0 + (p1 - p0) * ((t - t0) / (t1 - t0))
            }
        }
    }

    /// Velocity of the segment containing `t`; zero outside the span.
    pub fn velocity_at(&self, t: f64) -> Vec3 {
        let s = &self.samples;
        if s.len() < 2 || t < s[0].0 || t >= s[s.len() - 1].0 {
            return Vec3::ZERO;
        }
        let i = s.partition_point(|probe| probe.0 <= t);
        let (t0, p0) = s[i - 1];
        let (t1, p1) = s[i];
        (p1 - p0) / (t1 - t0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    nodes: BTreeMap<NodeId, NodeTrace>,
}

impl Trace {
    pub fn node(&self, id: NodeId) -> Option<&NodeTrace> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeTrace)> {
        self.nodes.iter().map(|(&id, t)| (id, t))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Trace, TraceError> {
    let text = std::fs::read_to_string(path)?;
    parse_trace(&text)
}

pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let mut nodes: BTreeMap<NodeId, Vec<(f64, Vec3)>> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(TraceError::Parse {
                line,
                message: format!("expected 5 fields `t,node_id,x,y,z`, found {}", fields.len()),
            });
        }
        let num = |i: usize, what: &str| -> Result<f64, TraceError> {
            fields[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TraceError::Parse {
                    line,
                    message: format!("invalid {what} `{}`", fields[i]),
                })
        };
        let t = num(0, "time")?;
        let node = fields[1].parse::<u32>().map(NodeId).map_err(|_| TraceError::Parse {
            line,
            message: format!("invalid node id `{}`", fields[1]),
        })?;
        let pos = Vec3::new(num(2, "x")?, num(3, "y")?, num(4, "z")?);
        let samples = nodes.entry(node).or_default();
        if let Some(&(prev, _)) = samples.last() {
            if t <= prev {
                return Err(TraceError::NonMonotonic { line, node });
            }
        }
        samples.push((t, pos));
    }
    if nodes.is_empty() {
        return Err(TraceError::NoSamples);
    }
    Ok(Trace {
        nodes: nodes
            .into_iter()
            .map(|(id, samples)| (id, NodeTrace { samples }))
            .collect(),
    })
}

/// Writes samples in trace format. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_trace<W: Write>(
    mut out: W,
    samples: impl IntoIterator<Item = (f64, NodeId, Vec3)>,
) -> io::Result<()> {
    writeln!(out, "# t,node_id,x,y,z")?;
    for (t, node, p) in samples {
        writeln!(out, "{t},{},{},{},{}", node.0, p.x, p.y, p.z)?;
    }
    Ok(())
}
