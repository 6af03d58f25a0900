//! Scenario parameters and the flat `key = value` config format.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::channel::{mw_to_dbm, ChannelModel, Fading};
use crate::error::ConfigError;
use crate::geometry::Vec3;
use crate::mobility::{MissionArea, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    Olsr,
    MaOlsr,
    Batman,
    BatMobile,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [
        Protocol::Olsr,
        Protocol::MaOlsr,
        Protocol::Batman,
        Protocol::BatMobile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Olsr => "olsr",
            Protocol::MaOlsr => "ma-olsr",
            Protocol::Batman => "batman",
            Protocol::BatMobile => "batmobile",
        }
    }

    pub fn is_mobility_aware(self) -> bool {
        matches!(self, Protocol::MaOlsr | Protocol::BatMobile)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "olsr" => Ok(Protocol::Olsr),
            "ma-olsr" | "maolsr" | "ma_olsr" => Ok(Protocol::MaOlsr),
            "batman" | "b.a.t.m.a.n." => Ok(Protocol::Batman),
            "batmobile" | "b.a.t.mobile" => Ok(Protocol::BatMobile),
            _ => Err(format!(
                "unknown protocol `{s}` (expected olsr, ma-olsr, batman or batmobile)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKind {
    /// Deterministic log-distance path loss.
    Friis,
    /// Same mean path loss with Nakagami-m fading.
    Nakagami,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Friis => "friis",
            ChannelKind::Nakagami => "nakagami",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "friis" => Ok(ChannelKind::Friis),
            "nakagami" => Ok(ChannelKind::Nakagami),
            _ => Err(format!("unknown channel `{s}` (expected friis or nakagami)")),
        }
    }
}

/// Every knob of a run. `Default` is the reference scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub agents: usize,
    pub area: Vec3,

    pub exploration_weight: f64,
    pub collision_weight: f64,
    pub min_distance: f64,
    pub cohesion_weight: f64,
    pub alignment_weight: f64,
    pub waypoint_lookahead: usize,
    pub arrival_radius: f64,
    pub update_interval: f64,
    pub speed_kmh: f64,

    pub channel: ChannelKind,
    pub path_loss_exponent: f64,
    pub nakagami_m: f64,
    pub frequency: f64,
    pub tx_power_mw: f64,
    pub sensitivity_dbm: f64,
    pub mac_bitrate: f64,
    /// Extra independent loss probability applied to every reception.
    pub packet_loss: f64,

    pub cbr_bitrate: f64,
    pub cbr_packet_size: usize,
    pub telemetry_interval: f64,
    pub telemetry_size: usize,
    pub ogm_interval: f64,
    pub hello_interval: f64,
    pub tc_interval: f64,
    pub jitter: f64,
    pub window_size: u32,
    pub score_weight_distance: f64,
    pub score_weight_prediction: f64,
    pub ttl: u8,

    pub duration: f64,
    pub warmup: f64,
    pub runs: usize,
    pub seed: u64,
    pub protocol: Protocol,

    pub nh: usize,
    pub np: u32,
    pub e_max: f64,
    pub base_station: Vec3,
    pub record_latency: bool,

    /// Replaces steering-driven agent mobility when set.
    pub trace: Option<Arc<Trace>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            agents: 10,
            area: Vec3::new(500.0, 500.0, 250.0),
            exploration_weight: 1.0,
            collision_weight: 10.0,
            min_distance: 30.0,
            cohesion_weight: 0.0,
            alignment_weight: 0.0,
            waypoint_lookahead: 3,
            arrival_radius: 5.0,
            update_interval: 0.25,
            speed_kmh: 50.0,
            channel: ChannelKind::Friis,
            path_loss_exponent: 2.75,
            nakagami_m: 2.0,
            frequency: 2.4e9,
            tx_power_mw: 100.0,
            sensitivity_dbm: -83.0,
            mac_bitrate: 54e6,
            packet_loss: 0.0,
            cbr_bitrate: 2e6,
            cbr_packet_size: 1460,
            telemetry_interval: 0.25,
            telemetry_size: 1000,
            ogm_interval: 0.5,
            hello_interval: 0.5,
            tc_interval: 1.0,
            jitter: 0.0,
            window_size: 64,
            score_weight_distance: 0.5,
            score_weight_prediction: 0.5,
            ttl: 32,
            duration: 300.0,
            warmup: 10.0,
            runs: 50,
            seed: 1,
            protocol: Protocol::Olsr,
            nh: 5,
            np: 15,
            e_max: 0.0,
            base_station: Vec3::new(250.0, 0.0, 0.0),
            record_latency: false,
            trace: None,
        }
    }
}

impl ScenarioConfig {
    pub fn speed(&self) -> f64 {
        self.speed_kmh / 3.6
    }

    pub fn cbr_interval(&self) -> f64 {
        self.cbr_packet_size as f64 * 8.0 / self.cbr_bitrate
    }

    pub fn mission_area(&self) -> Option<MissionArea> {
        MissionArea::new(self.area)
    }

    pub fn channel_model(&self) -> ChannelModel {
        ChannelModel {
            carrier_frequency: self.frequency,
            path_loss_exponent: self.path_loss_exponent,
            reference_distance: 1.0,
            tx_power_dbm: mw_to_dbm(self.tx_power_mw),
            sensitivity_dbm: self.sensitivity_dbm,
            fading: match self.channel {
                ChannelKind::Friis => Fading::None,
                ChannelKind::Nakagami => Fading::Nakagami { m: self.nakagami_m },
            },
        }
    }

    /// Channel the routing layer assumes when computing `d_max`: the mean
    /// path loss without fading.
    pub fn routing_channel_model(&self) -> ChannelModel {
        ChannelModel {
            fading: Fading::None,
            ..self.channel_model()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if self.agents < 2 {
            return fail(format!("agents must be at least 2, got {}", self.agents));
        }
        if self.mission_area().is_none() {
            return fail("mission area extents must be positive".into());
        }
        let positive = [
            ("update_interval", self.update_interval),
            ("speed_kmh", self.speed_kmh),
            ("min_distance", self.min_distance),
            ("cbr_bitrate", self.cbr_bitrate),
            ("mac_bitrate", self.mac_bitrate),
            ("telemetry_interval", self.telemetry_interval),
            ("ogm_interval", self.ogm_interval),
            ("hello_interval", self.hello_interval),
            ("tc_interval", self.tc_interval),
            ("duration", self.duration),
            ("frequency", self.frequency),
            ("tx_power_mw", self.tx_power_mw),
            ("exploration_weight", self.exploration_weight),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let non_negative = [
            ("collision_weight", self.collision_weight),
            ("cohesion_weight", self.cohesion_weight),
            ("alignment_weight", self.alignment_weight),
            ("arrival_radius", self.arrival_radius),
            ("jitter", self.jitter),
            ("warmup", self.warmup),
            ("e_max", self.e_max),
            ("score_weight_distance", self.score_weight_distance),
            ("score_weight_prediction", self.score_weight_prediction),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{name} must be non-negative and finite, got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.packet_loss) {
            return fail(format!("packet_loss must lie in [0, 1), got {}", self.packet_loss));
        }
        if self.warmup >= self.duration {
            return fail(format!(
                "warmup ({}) must be shorter than duration ({})",
                self.warmup, self.duration
            ));
        }
        if self.cbr_interval() > self.duration - self.warmup {
            return fail("no data packet would be originated after warm-up".into());
        }
        let min_period = [
            self.update_interval,
            self.telemetry_interval,
            self.ogm_interval,
            self.hello_interval,
            self.tc_interval,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        if self.jitter >= min_period {
            return fail(format!(
                "jitter ({}) must be shorter than the shortest periodic interval ({min_period})",
                self.jitter
            ));
        }
        if self.cbr_packet_size == 0 || self.telemetry_size == 0 {
            return fail("packet sizes must be positive".into());
        }
        if self.waypoint_lookahead == 0 {
            return fail("waypoint_lookahead must be at least 1".into());
        }
        if self.nh == 0 {
            return fail("nh must be at least 1".into());
        }
        if self.window_size == 0 {
            return fail("window_size must be at least 1".into());
        }
        if self.ttl == 0 {
            return fail("ttl must be at least 1".into());
        }
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if !self.base_station.is_finite() {
            return fail("base station position must be finite".into());
        }
        let model = self.channel_model();
        model
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        model
            .max_distance()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(trace) = &self.trace {
            for i in 0..self.agents {
                let id = crate::routing::NodeId::from(i);
                if trace.node(id).is_none() {
                    return Err(crate::error::TraceError::MissingNode(id).into());
                }
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment;
    /// unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_owned()) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(key, value).map_err(|kind| match kind {
                SetError::Unknown => ConfigError::UnknownKey {
                    line,
                    key: key.to_owned(),
                },
                SetError::Value => ConfigError::InvalidValue {
                    line,
                    key: key.to_owned(),
                    value: value.to_owned(),
                },
            })?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        fn p<T: FromStr>(v: &str) -> Result<T, SetError> {
            v.parse().map_err(|_| SetError::Value)
        }
        fn flag(v: &str) -> Result<bool, SetError> {
            match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(SetError::Value),
            }
        }
        match key {
            "agents" => self.agents = p(value)?,
            "area_x" => self.area.x = p(value)?,
            "area_y" => self.area.y = p(value)?,
            "area_z" => self.area.z = p(value)?,
            "exploration_weight" => self.exploration_weight = p(value)?,
            "collision_weight" => self.collision_weight = p(value)?,
            "min_distance" => self.min_distance = p(value)?,
            "cohesion_weight" => self.cohesion_weight = p(value)?,
            "alignment_weight" => self.alignment_weight = p(value)?,
            "waypoint_lookahead" => self.waypoint_lookahead = p(value)?,
            "arrival_radius" => self.arrival_radius = p(value)?,
            "update_interval" => self.update_interval = p(value)?,
            "speed_kmh" => self.speed_kmh = p(value)?,
            "channel" => self.channel = p(value)?,
            "path_loss_exponent" | "alpha" => self.path_loss_exponent = p(value)?,
            "nakagami_m" => self.nakagami_m = p(value)?,
            "frequency" => self.frequency = p(value)?,
            "tx_power_mw" => self.tx_power_mw = p(value)?,
            "sensitivity_dbm" => self.sensitivity_dbm = p(value)?,
            "mac_bitrate" => self.mac_bitrate = p(value)?,
            "packet_loss" => self.packet_loss = p(value)?,
            "cbr_bitrate" => self.cbr_bitrate = p(value)?,
            "cbr_packet_size" => self.cbr_packet_size = p(value)?,
            "telemetry_interval" => self.telemetry_interval = p(value)?,
            "telemetry_size" => self.telemetry_size = p(value)?,
            "ogm_interval" => self.ogm_interval = p(value)?,
            "hello_interval" => self.hello_interval = p(value)?,
            "tc_interval" => self.tc_interval = p(value)?,
            "jitter" => self.jitter = p(value)?,
            "window_size" => self.window_size = p(value)?,
            "score_weight_distance" => self.score_weight_distance = p(value)?,
            "score_weight_prediction" => self.score_weight_prediction = p(value)?,
            "ttl" => self.ttl = p(value)?,
            "duration" => self.duration = p(value)?,
            "warmup" => self.warmup = p(value)?,
            "runs" => self.runs = p(value)?,
            "seed" => self.seed = p(value)?,
            "protocol" => self.protocol = p(value)?,
            "nh" => self.nh = p(value)?,
            "np" => self.np = p(value)?,
            "e_max" => self.e_max = p(value)?,
            "base_x" => self.base_station.x = p(value)?,
            "base_y" => self.base_station.y = p(value)?,
            "base_z" => self.base_station.z = p(value)?,
            "record_latency" => self.record_latency = flag(value)?,
            _ => return Err(SetError::Unknown),
        }
        Ok(())
    }
}

enum SetError {
    Unknown,
    Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_scenario() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        assert_eq!(c.agents, 10);
        assert_eq!(c.area, Vec3::new(500.0, 500.0, 250.0));
        assert_eq!((c.exploration_weight, c.collision_weight, c.min_distance), (1.0, 10.0, 30.0));
        assert_eq!(c.update_interval, 0.25);
        assert!((c.speed() - 13.889).abs() < 1e-3);
        assert_eq!((c.cbr_bitrate, c.cbr_packet_size), (2e6, 1460));
        assert_eq!((c.telemetry_interval, c.telemetry_size), (0.25, 1000));
        assert_eq!((c.ogm_interval, c.hello_interval, c.tc_interval), (0.5, 0.5, 1.0));
        assert_eq!(c.mac_bitrate, 54e6);
        assert_eq!((c.tx_power_mw, c.frequency, c.sensitivity_dbm), (100.0, 2.4e9, -83.0));
        assert_eq!((c.duration, c.runs, c.nh, c.np), (300.0, 50, 5, 15));
        assert_eq!(c.path_loss_exponent, 2.75);
        assert_eq!(c.nakagami_m, 2.0);
        assert!((c.cbr_interval() - 0.00584).abs() < 1e-15);
    }

    #[test]
    fn parses_keys_and_comments() {
        let c = ScenarioConfig::parse(
            "# desk scale\nagents = 6\nchannel = nakagami # urban\nprotocol = batmobile\nnp = 10\nnh = 4\n\nrecord_latency = yes\n",
        )
        .unwrap();
        assert_eq!(c.agents, 6);
        assert_eq!(c.channel, ChannelKind::Nakagami);
        assert_eq!(c.protocol, Protocol::BatMobile);
        assert_eq!((c.np, c.nh), (10, 4));
        assert!(c.record_latency);
    }

    #[test]
    fn unknown_key_is_an_error() {
        match ScenarioConfig::parse("agents = 3\nwarp_speed = 9\n") {
            Err(ConfigError::UnknownKey { line, key }) => assert_eq!((line, key.as_str()), (2, "warp_speed")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_values_and_syntax() {
        assert!(matches!(
            ScenarioConfig::parse("agents = many"),
            Err(ConfigError::InvalidValue { line: 1, .. })
        ));
        assert!(matches!(ScenarioConfig::parse("agents"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(
            ScenarioConfig::parse("np = 1\nnp = 2"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
        assert!(ScenarioConfig::parse("protocol = aodv").is_err());
    }

    #[test]
    fn validation_catches_bad_scenarios() {
        let bad = |f: fn(&mut ScenarioConfig)| {
            let mut c = ScenarioConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.agents = 1));
        assert!(bad(|c| c.hello_interval = 0.0));
        assert!(bad(|c| c.area.z = 0.0));
        assert!(bad(|c| c.warmup = 400.0));
        assert!(bad(|c| c.jitter = 0.3));
        assert!(bad(|c| c.tx_power_mw = 1e-12));
        assert!(bad(|c| c.path_loss_exponent = 1.0));
        assert!(bad(|c| c.runs = 0));
        assert!(!bad(|c| c.jitter = 0.01));
    }

    #[test]
    fn protocol_and_channel_names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
        }
        for c in [ChannelKind::Friis, ChannelKind::Nakagami] {
            assert_eq!(c.name().parse::<ChannelKind>().unwrap(), c);
        }
    }
}
