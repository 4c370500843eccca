use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use socialscope::par;
use socialscope::pipeline::{
    self, generate_fixture, stages, Ctx, ErrorKind, PipelineError, RunConfig, Stage, SynthSpec,
};

#[derive(Parser)]
#[command(name = "socialscope", version, about = "Bot, spam and sentiment analytics over tweet archives")]
struct Cli {
    /// Run config (TOML); for `synth`, the fixture spec.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads; 1 runs the sequential reference path.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Parse archives into tweets.jsonl and aggregates.jsonl.
    Ingest,
    /// Score every tweet.
    Sentiment,
    /// Iterative keyword spam filter.
    Spamfilter,
    /// Score the most active users with the bot model.
    Botscore,
    /// Activity-connectivity points and density map.
    Dacmap,
    /// Interaction CCDFs, factions, sentiment tables, extrapolation.
    Diffusion,
    /// Daily tweet volume.
    Timeline,
    /// Write a synthetic fixture.
    Synth,
    /// All stages plus summary.json.
    Run,
}

impl Cmd {
    fn stage(self) -> Option<Stage> {
        match self {
            Cmd::Ingest => Some(Stage::Ingest),
            Cmd::Sentiment => Some(Stage::Sentiment),
            Cmd::Spamfilter => Some(Stage::SpamFilter),
            Cmd::Botscore => Some(Stage::BotScore),
            Cmd::Dacmap => Some(Stage::DacMap),
            Cmd::Diffusion => Some(Stage::Diffusion),
            Cmd::Timeline => Some(Stage::Timeline),
            Cmd::Synth | Cmd::Run => None,
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, PipelineError> {
    let path =
        cli.config.as_ref().ok_or_else(|| PipelineError::new("config", ErrorKind::Config, "--config is required"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn synth(cli: &Cli) -> anyhow::Result<()> {
    let spec = match &cli.config {
        Some(p) => {
            let src = std::fs::read_to_string(p)
                .map_err(|e| PipelineError::new("synth", ErrorKind::Config, format!("{}: {e}", p.display())))?;
            SynthSpec::from_toml_str(&src)?
        }
        None => SynthSpec::default(),
    };
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("synth"));
    let files = generate_fixture(&spec, cli.seed.unwrap_or(0), &dir)?;
    println!("archive      {}", files.archive.display());
    println!("ground truth {}", files.ground_truth.display());
    println!("labels       {}", files.labels.display());
    println!("annotations  {}", files.annotations.display());
    println!("run config   {}", files.config.display());
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Cmd::Synth = cli.cmd {
        return synth(cli);
    }
    let cfg = load_config(cli)?;
    let ctx = Ctx::new(&cfg.out, cfg.workers);
    std::fs::create_dir_all(&ctx.out).with_context(|| format!("creating {}", ctx.out.display()))?;
    let report = par::with_workers(cfg.workers, || match cli.cmd.stage() {
        Some(stage) => stage.run(&cfg, &ctx),
        None => pipeline::run_pipeline(&cfg, &ctx),
    })?;
    if cli.cmd.stage().is_none() {
        eprintln!("wrote {}", ctx.path(stages::SUMMARY).display());
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code =
                e.downcast_ref::<PipelineError>().map_or(ErrorKind::Internal.exit_code(), |p| p.kind.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
