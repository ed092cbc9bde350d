use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dlaperf::model::serialize;
use dlaperf::modeler::{build_routine_model, ModelerConfig, ProcessSource, SampleSource};
use dlaperf::sampler::Sampler;

/// Samples a routine and writes its piecewise polynomial performance model.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Routine to model; overrides the configuration's `routine` key.
    #[arg(long)]
    routine: Option<String>,
    /// Modeler configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Where to write the model.
    #[arg(long)]
    out: PathBuf,
    /// Sampler executable to drive over its standard streams. Sampling
    /// runs in this process if omitted.
    #[arg(long)]
    sampler_cmd: Option<PathBuf>,
}

fn run(args: Args) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg = ModelerConfig::parse(&text, args.routine.as_deref())
        .with_context(|| format!("in {}", args.config.display()))?;
    let mut source: Box<dyn SampleSource> = match &args.sampler_cmd {
        Some(cmd) => Box::new(ProcessSource::spawn(cmd, &cfg.sampler)?),
        None => Box::new(Sampler::new(cfg.sampler.clone())),
    };
    let (model, report) = build_routine_model(&cfg, source.as_mut())?;
    drop(source);
    fs::write(&args.out, serialize(&model))
        .with_context(|| format!("writing {}", args.out.display()))?;
    let regions: usize = model.combos.values().map(|m| m.regions.len()).sum();
    eprintln!(
        "{}: {} combinations, {regions} regions, {} points, {} requests, {} warnings",
        model.routine,
        model.combos.len(),
        report.points,
        report.requests,
        report.warnings.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("modeler: {e:#}");
            ExitCode::FAILURE
        }
    }
}
