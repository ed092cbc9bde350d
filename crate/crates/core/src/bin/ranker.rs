use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args as ClapArgs, Parser, Subcommand};
use dlaperf::blocked::{algorithm_by_id, algorithm_ids};
use dlaperf::model::Statistic;
use dlaperf::predict::{
    efficiency, emit_csv, load_models, operation_of, parse_grid, predict, rank, sweep_blocksize,
    variants, ModelSet, RankOptions,
};

/// Predicts, ranks and tunes blocked algorithms from routine models.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Print the ids of the built-in algorithms and exit.
    #[arg(long)]
    list_algorithms: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Predict one algorithm at one size and block size.
    Predict {
        #[arg(long)]
        algorithm: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        blocksize: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Rank the variants of an operation over a grid of sizes.
    Rank {
        #[arg(long)]
        operation: String,
        /// Size grid, `lo:hi:step`.
        #[arg(long)]
        n: String,
        #[arg(long)]
        blocksize: usize,
        /// CSV destination; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Predict one algorithm over a grid of block sizes.
    Sweep {
        #[arg(long)]
        algorithm: String,
        #[arg(long)]
        n: usize,
        /// Block-size grid, `lo:hi:step`.
        #[arg(long)]
        blocksize: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ClapArgs)]
struct Common {
    /// Directory of `*.pm` model files.
    #[arg(long)]
    models: PathBuf,
    #[arg(long, default_value = "min,median,avg,max", value_delimiter = ',')]
    stats: Vec<Statistic>,
    /// Peak flops per tick of the machine the models describe.
    #[arg(long, default_value_t = 2.0)]
    peak: f64,
    /// Fail instead of extrapolating outside a model's domain.
    #[arg(long)]
    strict_domain: bool,
}

impl Common {
    fn load(&self) -> anyhow::Result<(ModelSet, RankOptions)> {
        let models = load_models(&self.models)?;
        if self.stats.is_empty() {
            bail!("no statistics requested");
        }
        let opts = RankOptions {
            statistics: self.stats.clone(),
            order_by: if self.stats.contains(&Statistic::Median) {
                Statistic::Median
            } else {
                self.stats[0]
            },
            peak_flops_per_tick: self.peak,
            strict_domain: self.strict_domain,
            ..RankOptions::default()
        };
        Ok((models, opts))
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.list_algorithms {
        for id in algorithm_ids() {
            let alg = algorithm_by_id(&id)?;
            println!("{id} sizes={}", alg.sizes.join(","));
        }
        return Ok(());
    }
    let Some(cmd) = cli.command else {
        bail!("no command given; see --help");
    };
    match cmd {
        Cmd::Predict {
            algorithm,
            n,
            blocksize,
            common,
        } => {
            let (models, opts) = common.load()?;
            let alg = algorithm_by_id(&algorithm)?;
            let trace = alg.generate_trace(&vec![n; alg.sizes.len()], blocksize)?;
            let p = predict(&trace, &models, &opts.statistics, opts.strict_domain)?;
            println!(
                "{algorithm} n={n} b={blocksize} invocations={} extrapolated={}",
                p.invocations, p.extrapolated
            );
            for ((counter, stat), v) in &p.totals {
                println!("{counter} {stat} {v}");
            }
            for &stat in &opts.statistics {
                let t = p.total(&opts.ticks, stat);
                if t > 0.0 {
                    let e = efficiency(operation_of(&algorithm), n, t, opts.peak_flops_per_tick)?;
                    println!("efficiency {stat} {e}");
                }
            }
        }
        Cmd::Rank {
            operation,
            n,
            blocksize,
            out,
            common,
        } => {
            let (models, opts) = common.load()?;
            let ns = parse_grid(&n)?;
            let table = rank(&variants(&operation)?, &ns, blocksize, &models, &opts)?;
            write_out(&out, &emit_csv(&table))?;
        }
        Cmd::Sweep {
            algorithm,
            n,
            blocksize,
            out,
            common,
        } => {
            let (models, opts) = common.load()?;
            let bs = parse_grid(&blocksize)?;
            if bs.contains(&0) {
                bail!("block sizes must be at least 1");
            }
            let sweep = sweep_blocksize(&algorithm, n, &bs, &models, &opts)?;
            write_out(&out, &emit_csv(&sweep.table))?;
            for (stat, b) in &sweep.best {
                eprintln!("best {stat} b={b}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ranker: {e:#}");
            ExitCode::FAILURE
        }
    }
}
