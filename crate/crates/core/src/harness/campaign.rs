//! Protocol × channel × seed campaigns and their CSV form.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use super::config::{ChannelKind, Protocol, ScenarioConfig};
use super::sim::run_scenario;
use super::stats::{confidence_interval, pdr};
use crate::error::{ConfigError, CsvError};

pub const CSV_HEADER: &str = "protocol,channel,seed,sent,delivered,pdr";
const NA: &str = "NA";
const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub protocols: Vec<Protocol>,
    pub channels: Vec<ChannelKind>,
    pub runs: usize,
    pub base_seed: u64,
}

impl CampaignSpec {
    /// The single cell described by the config itself.
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        CampaignSpec {
            protocols: vec![cfg.protocol],
            channels: vec![cfg.channel],
            runs: cfg.runs,
            base_seed: cfg.seed,
        }
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.runs as u64).map(move |k| self.base_seed.wrapping_add(k))
    }

    fn cells(&self) -> impl Iterator<Item = (Protocol, ChannelKind)> + '_ {
        self.protocols
            .iter()
            .flat_map(move |&p| self.channels.iter().map(move |&c| (p, c)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub protocol: Protocol,
    pub channel: ChannelKind,
    pub seed: u64,
    pub sent: u64,
    pub delivered: u64,
}

impl RunRecord {
    pub fn pdr(&self) -> Option<f64> {
        pdr(self.sent, self.delivered).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub protocol: Protocol,
    pub channel: ChannelKind,
    /// Runs with a defined PDR.
    pub n: usize,
    pub mean_pdr: Option<f64>,
    /// 0.95 Student-t half-width; `None` below two runs.
    pub ci_half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl CampaignResult {
    pub fn aggregate(&self, protocol: Protocol, channel: ChannelKind) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.protocol == protocol && a.channel == channel)
    }

    pub fn cell(&self, protocol: Protocol, channel: ChannelKind) -> impl Iterator<Item = &RunRecord> {
        self.runs
            .iter()
            .filter(move |r| r.protocol == protocol && r.channel == channel)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.protocol,
                r.channel,
                r.seed,
                r.sent,
                r.delivered,
                fmt_opt(r.pdr())
            );
        }
        for a in &self.aggregates {
            let _ = writeln!(
                out,
                "{},{},AGG,{},{},{}",
                a.protocol,
                a.channel,
                a.n,
                fmt_opt(a.mean_pdr),
                fmt_opt(a.ci_half_width)
            );
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    pub fn parse_csv(text: &str) -> Result<Self, CsvError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(parse_err(1, format!("expected header `{CSV_HEADER}`"))),
        }
        let mut runs = Vec::new();
        let mut aggregates = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(parse_err(line_no, format!("expected 6 fields, got {}", f.len())));
            }
            let protocol: Protocol = f[0].parse().map_err(|m| parse_err(line_no, m))?;
            let channel: ChannelKind = f[1].parse().map_err(|m| parse_err(line_no, m))?;
            let num = |s: &str, what: &str| -> Result<u64, CsvError> {
                s.parse().map_err(|_| parse_err(line_no, format!("invalid {what} `{s}`")))
            };
            let real = |s: &str, what: &str| -> Result<Option<f64>, CsvError> {
                if s == NA {
                    return Ok(None);
                }
                s.parse()
                    .map(Some)
                    .map_err(|_| parse_err(line_no, format!("invalid {what} `{s}`")))
            };
            if f[2] == "AGG" {
                aggregates.push(Aggregate {
                    protocol,
                    channel,
                    n: num(f[3], "n")? as usize,
                    mean_pdr: real(f[4], "mean_pdr")?,
                    ci_half_width: real(f[5], "ci_halfwidth")?,
                });
            } else {
                let record = RunRecord {
                    protocol,
                    channel,
                    seed: num(f[2], "seed")?,
                    sent: num(f[3], "sent")?,
                    delivered: num(f[4], "delivered")?,
                };
                if record.delivered > record.sent {
                    return Err(parse_err(line_no, "delivered exceeds sent".into()));
                }
                if real(f[5], "pdr")? != record.pdr() {
                    return Err(parse_err(line_no, "pdr does not match delivered/sent".into()));
                }
                runs.push(record);
            }
        }
        Ok(CampaignResult { runs, aggregates })
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_owned(), |x| x.to_string())
}

fn parse_err(line: usize, message: String) -> CsvError {
    CsvError::Parse { line, message }
}

/// Mean PDR and confidence interval of one cell.
pub fn aggregate_cell(protocol: Protocol, channel: ChannelKind, runs: &[RunRecord]) -> Aggregate {
    let samples: Vec<f64> = runs
        .iter()
        .filter(|r| r.protocol == protocol && r.channel == channel)
        .filter_map(RunRecord::pdr)
        .collect();
    let mean = (!samples.is_empty()).then(|| samples.iter().sum::<f64>() / samples.len() as f64);
    Aggregate {
        protocol,
        channel,
        n: samples.len(),
        mean_pdr: mean,
        ci_half_width: confidence_interval(&samples, CI_LEVEL).ok().map(|(_, h)| h),
    }
}

/// Runs every (protocol, channel, seed) combination of `spec` over `base`.
/// Runs execute in parallel; results are ordered by (protocol, channel,
/// seed) following the order of `spec`.
pub fn run_campaign(base: &ScenarioConfig, spec: &CampaignSpec) -> Result<CampaignResult, ConfigError> {
    if spec.runs == 0 {
        return Err(ConfigError::Invalid("runs must be at least 1".into()));
    }
    let mut jobs = Vec::new();
    for (protocol, channel) in spec.cells() {
        let cfg = ScenarioConfig {
            protocol,
            channel,
            ..base.clone()
        };
        cfg.validate()?;
        for seed in spec.seeds() {
            jobs.push((cfg.clone(), seed));
        }
    }
    let runs = jobs
        .par_iter()
        .map(|(cfg, seed)| {
            run_scenario(cfg, *seed).map(|s| RunRecord {
                protocol: cfg.protocol,
                channel: cfg.channel,
                seed: *seed,
                sent: s.sent,
                delivered: s.delivered,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let aggregates = spec
        .cells()
        .map(|(p, c)| aggregate_cell(p, c, &runs))
        .collect();
    Ok(CampaignResult { runs, aggregates })
}
