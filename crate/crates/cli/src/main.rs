use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nightforge_core::config::{validate_config, PipelineConfig};
use nightforge_core::pipeline::run_pipeline;
use nightforge_core::stats::{compare_sets, ReportOptions, DEFAULT_BINS};

#[derive(Parser)]
#[command(name = "nightforge", version, about = "Synthesize nighttime hazy training pairs from daytime images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize hazy/clear/label triples for every image with a matching depth map.
    Synth(SynthArgs),
    /// Compare brightness statistics between image sets.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    depth_dir: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// JSON config file; every synthesis parameter may be overridden.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "NIGHTFORGE_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Abort on the first per-image failure.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    sky_mask_dir: Option<PathBuf>,
    /// Resize inputs to a square of this side before synthesis.
    #[arg(long)]
    resize: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Image set as NAME=DIR; repeat for each set.
    #[arg(long = "set", value_name = "NAME=DIR", required = true, value_parser = parse_set)]
    sets: Vec<(String, PathBuf)>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Also write a channel-mean image per input.
    #[arg(long)]
    channel_means: bool,
}

fn parse_set(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, dir)) if !name.is_empty() && !dir.is_empty() => Ok((name.to_owned(), PathBuf::from(dir))),
        _ => Err(format!("expected NAME=DIR, got {s:?}")),
    }
}

fn synth(args: SynthArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            validate_config(&text)?.config
        }
        None => PipelineConfig::default(),
    };
    if let Some(d) = args.input_dir {
        config.input_dir = Some(d);
    }
    if let Some(d) = args.depth_dir {
        config.depth_dir = Some(d);
    }
    if let Some(d) = args.output_dir {
        config.output_dir = Some(d);
    }
    if let Some(d) = args.sky_mask_dir {
        config.sky_mask_dir = Some(d);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(jobs) = args.jobs {
        config.jobs = jobs;
    }
    if let Some(side) = args.resize {
        config.resize = Some(side);
    }
    config.strict |= args.strict;

    let manifest = run_pipeline(&config)?;
    println!(
        "synthesized {} pair(s), {} failure(s), seed {}",
        manifest.records.len(),
        manifest.failures.len(),
        manifest.master_seed
    );
    for rec in &manifest.records {
        println!("  ok    {} -> {}", rec.input, rec.hazy);
    }
    for f in &manifest.failures {
        println!("  FAIL  {}: {}", f.input, f.error);
    }
    Ok(if manifest.records.is_empty() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn report(args: ReportArgs) -> Result<ExitCode> {
    if args.bins == 0 {
        bail!("--bins must be positive");
    }
    let mut names: Vec<&str> = args.sets.iter().map(|(n, _)| n.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        bail!("set names must be unique");
    }
    let opts = ReportOptions { bins: args.bins, channel_means: args.channel_means };
    let summaries = compare_sets(&args.sets, &args.out, &opts)?;
    for s in &summaries {
        println!(
            "{}: {} image(s), mean luminance {:.4}, channel means ({:.4}, {:.4}, {:.4})",
            s.name,
            s.images.len(),
            s.luminance_mean,
            s.channel_means[0],
            s.channel_means[1],
            s.channel_means[2]
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => synth(args),
        Command::Report(args) => report(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
