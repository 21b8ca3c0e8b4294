use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use echo_virality::pipeline::{
    run_pipeline, run_simulate, with_workers, write_fixture, PipelineConfig, Stage,
};
use echo_virality::sim::FixtureConfig;
use echo_virality::Error;

#[derive(Parser)]
#[command(
    name = "echovir",
    version,
    about = "Cascade virality inside retweet echo chambers"
)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    /// JSON pipeline configuration; relative paths resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true)]
    min_author_tweets: Option<usize>,
    #[arg(long, global = true)]
    balance_tol: Option<f64>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    top_k: Option<usize>,
    #[arg(long, global = true)]
    threshold: Option<usize>,
    #[arg(long, global = true)]
    include_unexposed_retweeters: bool,
    #[arg(long, global = true)]
    raw_activities: bool,
    #[arg(long, global = true)]
    stemmer: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Every stage end to end.
    Run,
    Ingest,
    Network,
    Partition,
    Virality,
    Words,
    Spread,
    Labels,
    Regress,
    /// Emit a synthetic world from the config's `simulate` section.
    Simulate {
        /// Write the labeled two-community fixture instead.
        #[arg(long)]
        fixture: bool,
    },
}

fn load(flags: &Flags) -> Result<PipelineConfig, Error> {
    let mut cfg = match &flags.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(o) = &flags.out {
        cfg.out = o.clone();
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
        cfg.simulate.master_seed = s;
    }
    if let Some(v) = flags.min_author_tweets {
        cfg.min_author_tweets = v;
    }
    if let Some(v) = flags.balance_tol {
        cfg.balance_tol = v;
    }
    if let Some(v) = flags.folds {
        cfg.lasso.folds = v;
    }
    if let Some(v) = flags.top_k {
        cfg.top_k = v;
    }
    if let Some(v) = flags.threshold {
        cfg.threshold = v;
    }
    cfg.include_unexposed_retweeters |= flags.include_unexposed_retweeters;
    cfg.raw_activities |= flags.raw_activities;
    cfg.stemmer |= flags.stemmer;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32, Error> {
    let cfg = load(&cli.flags)?;
    let target = match cli.command {
        Command::Run => None,
        Command::Ingest => Some(Stage::Ingest),
        Command::Network => Some(Stage::Network),
        Command::Partition => Some(Stage::Partition),
        Command::Virality => Some(Stage::Virality),
        Command::Words => Some(Stage::Words),
        Command::Spread => Some(Stage::Spread),
        Command::Labels => Some(Stage::Labels),
        Command::Regress => Some(Stage::Regress),
        Command::Simulate { fixture } => {
            with_workers(cli.flags.workers, || {
                if fixture {
                    let fx = FixtureConfig {
                        seed: cli.flags.seed.unwrap_or(FixtureConfig::default().seed),
                        ..FixtureConfig::default()
                    };
                    write_fixture(&fx, &cfg.out)
                } else {
                    run_simulate(&cfg.simulate, &cfg.out)
                }
            })??;
            println!("wrote synthetic data to {}", cfg.out.display());
            return Ok(0);
        }
    };
    let outcome = with_workers(cli.flags.workers, || run_pipeline(&cfg, target))?;
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    } else {
        for a in &outcome.manifest.artifacts {
            println!("{}", cfg.out.join(a).display());
        }
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
