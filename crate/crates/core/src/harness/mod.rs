//! Scenario configuration, single runs, statistics and campaigns.

pub mod campaign;
pub mod config;
pub mod sim;
pub mod stats;

pub use campaign::{run_campaign, Aggregate, CampaignResult, CampaignSpec, RunRecord};
pub use config::{ChannelKind, Protocol, ScenarioConfig};
pub use sim::{run_scenario, run_scenario_with, RunOptions, RunOutput};
pub use stats::{confidence_interval, pdr, RunStats};
