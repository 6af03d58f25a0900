use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use marnet::error::{ConfigError, RunError};
use marnet::harness::{
    run_campaign, run_scenario_with, CampaignResult, CampaignSpec, ChannelKind, Protocol,
    RunOptions, RunRecord, ScenarioConfig,
};
use marnet::mobility::load_trace;

#[derive(Parser)]
#[command(name = "marnet", version, about = "Mobility-aware routing simulator for aerial swarms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign and write the results CSV.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds per cell; overrides the config.
    #[arg(long)]
    runs: Option<usize>,
    /// Protocol to run (repeatable); defaults to the config's protocol.
    #[arg(long = "protocol")]
    protocols: Vec<Protocol>,
    /// Channel to run (repeatable); defaults to the config's channel.
    #[arg(long = "channel")]
    channels: Vec<ChannelKind>,
    /// Results CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-delivery packet log of a single run.
    #[arg(long)]
    dump_packets: Option<PathBuf>,
    /// Mobility trace replacing the steering model.
    #[arg(long)]
    trace: Option<PathBuf>,
}

enum Failure {
    Config(ConfigError),
    Io(io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => Failure::Config(c),
            RunError::Io(io) => Failure::Io(io),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(path) = &args.trace {
        cfg.trace = Some(Arc::new(load_trace(path).map_err(ConfigError::from)?));
    }
    let mut spec = CampaignSpec::from_config(&cfg);
    if !args.protocols.is_empty() {
        spec.protocols = args.protocols.clone();
    }
    if !args.channels.is_empty() {
        spec.channels = args.channels.clone();
    }

    let result = match &args.dump_packets {
        Some(path) => single_run_with_dump(&cfg, &spec, path)?,
        None => run_campaign(&cfg, &spec)?,
    };

    match &args.out {
        Some(path) => result.write_csv(BufWriter::new(File::create(path)?))?,
        None => result.write_csv(io::stdout().lock())?,
    }
    for a in &result.aggregates {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_owned(), |x| format!("{x:.4}"));
        eprintln!(
            "{:<10} {:<9} n={:<3} mean_pdr={} ±{}",
            a.protocol.name(),
            a.channel.name(),
            a.n,
            fmt(a.mean_pdr),
            fmt(a.ci_half_width)
        );
    }
    Ok(())
}

fn single_run_with_dump(
    cfg: &ScenarioConfig,
    spec: &CampaignSpec,
    path: &PathBuf,
) -> Result<CampaignResult, Failure> {
    if spec.runs != 1 || spec.protocols.len() != 1 || spec.channels.len() != 1 {
        return Err(ConfigError::Invalid(
            "--dump-packets needs exactly one run (one protocol, one channel, runs = 1)".into(),
        )
        .into());
    }
    let cfg = ScenarioConfig {
        protocol: spec.protocols[0],
        channel: spec.channels[0],
        ..cfg.clone()
    };
    cfg.validate()?;
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "t,type,origin,from,to,seq")?;
    let out = run_scenario_with(
        &cfg,
        spec.base_seed,
        RunOptions {
            dump: Some(&mut writer),
            record_trace: false,
        },
    )?;
    writer.flush()?;
    let runs = vec![RunRecord {
        protocol: cfg.protocol,
        channel: cfg.channel,
        seed: spec.base_seed,
        sent: out.stats.sent,
        delivered: out.stats.delivered,
    }];
    let aggregates = vec![marnet::harness::campaign::aggregate_cell(cfg.protocol, cfg.channel, &runs)];
    Ok(CampaignResult { runs, aggregates })
}
