use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dlaperf::sampler::{main_loop, SamplerConfig, Sampler};

/// Reads kernel invocation requests and writes one line of measured
/// counters per request.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Configuration file (`key = value` lines). Defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Request stream; standard input if omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Result stream; standard output if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(args: Args) -> anyhow::Result<()> {
    let config = match &args.config {
        Some(path) => {
            let mut text = String::new();
            File::open(path)
                .and_then(|mut f| f.read_to_string(&mut text))
                .with_context(|| format!("reading {}", path.display()))?;
            SamplerConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => SamplerConfig::default(),
    };
    let mut sampler = Sampler::new(config);
    let input: Box<dyn io::BufRead> = match &args.input {
        Some(p) => Box::new(BufReader::new(
            File::open(p).with_context(|| format!("opening {}", p.display()))?,
        )),
        None => Box::new(io::stdin().lock()),
    };
    let mut output: Box<dyn io::Write> = match &args.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    let mut diag = io::stderr().lock();
    main_loop(&mut sampler, input, &mut output, &mut diag)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sampler: {e:#}");
            ExitCode::FAILURE
        }
    }
}
