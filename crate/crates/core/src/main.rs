//! Command-line front end for the transcript mining pipeline.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use colloquy::pipeline::{
    parse_config, run_pipeline, stage_ingest, stage_report, stage_sentiment, stage_topics,
    OutputFormat, PipelineConfig,
};
use colloquy::{Error, Result};

#[derive(Parser)]
#[command(name = "colloquy", version, about = "Mine topics and sentiment from focus group transcripts")]
struct Cli {
    /// Pipeline configuration file (key=value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the configured output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Override the configured report format (csv or json).
    #[arg(long, global = true)]
    format: Option<String>,

    /// Log filter, as understood by env_logger (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate transcripts, then persist the corpus artifacts.
    Ingest,
    /// Fit one topic model per community from the ingested corpus.
    Topics,
    /// Induce the sentiment lexicon, train the classifier, score every sentence.
    Sentiment,
    /// Aggregate sentence scores into the report files.
    Report,
    /// Run ingest, topics, sentiment, and report in order.
    Run,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli.config.as_ref().ok_or_else(|| {
        Error::config("config", "no configuration file given; pass --config <file>")
    })?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(output) = &cli.output {
        cfg.output = output.clone();
    }
    if let Some(format) = &cli.format {
        cfg.format = OutputFormat::parse(format).ok_or_else(|| {
            Error::config("format", format!("expected csv or json, got {format:?}"))
        })?;
    }
    if let Some(sw) = cfg.stopwords_path.clone() {
        cfg.rules.load_stopwords(&sw)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Ingest => {
            let transcripts = stage_ingest(&cfg)?;
            log::info!("ingested {} transcripts", transcripts.len());
        }
        Command::Topics => {
            let models = stage_topics(&cfg)?;
            log::info!("fit topic models for {} communities", models.len());
        }
        Command::Sentiment => {
            let classifier = stage_sentiment(&cfg)?;
            log::info!(
                "trained classifier over {} terms (lambda {:.6})",
                classifier.terms.len(),
                classifier.lambda
            );
        }
        Command::Report => {
            stage_report(&cfg)?;
            log::info!("report written to {}", cfg.output.display());
        }
        Command::Run => {
            run_pipeline(&cfg)?;
            log::info!("pipeline finished; output in {}", cfg.output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
