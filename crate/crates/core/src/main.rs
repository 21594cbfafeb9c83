use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dbicm::constellation::Modulation;
use dbicm::demapper::DemapMode;
use dbicm::harness::{emit_csv, parse_grid, run_sweep, CodeSource, SimConfig};
use dbicm::{DelayScheme, Error, Scheme};

#[derive(Parser)]
#[command(name = "dbicm", version, about = "BER/FER simulation of delayed BICM receivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write CSV.
    Simulate(SimulateArgs),
    /// Print a constellation's labeled points as CSV.
    Constellation {
        #[arg(long = "mod", default_value = "qam16")]
        modulation: Modulation,
    },
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// bicm | dbicm | dbicm-wd | dbicm-id | genie
    #[arg(long)]
    scheme: Scheme,
    /// qpsk | qam16 | qam64 | apsk32
    #[arg(long = "mod", default_value = "qam16")]
    modulation: Modulation,
    /// Per-position delays, e.g. "0,1,0,1". Defaults to the modulation's
    /// standard scheme (all zeros for bicm).
    #[arg(long)]
    delay: Option<DelayScheme>,
    /// alist file or peg:<dv>,<dc>,<N>
    #[arg(long, default_value = "peg:3,6,1200")]
    code: CodeSource,
    /// Transmission frame length T_n in slots.
    #[arg(long, default_value_t = 101)]
    tn: usize,
    /// Window size W.
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Windowed or ID iterations.
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long, default_value_t = 50)]
    bp_iters: usize,
    /// start:step:stop in dB, or a single value.
    #[arg(long)]
    ebn0: String,
    #[arg(long, default_value_t = 100_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 100)]
    min_error_frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// exact | maxlog
    #[arg(long, default_value = "exact")]
    demap: DemapMode,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(args: &SimulateArgs) -> Result<SimConfig, Error> {
    let mut cfg = SimConfig::new(args.scheme, args.modulation, parse_grid(&args.ebn0)?);
    if let Some(delay) = &args.delay {
        cfg.delay = delay.clone();
    }
    cfg.code = args.code.clone();
    cfg.tn = args.tn;
    cfg.window = args.window;
    cfg.iters = args.iters;
    cfg.bp_iters = args.bp_iters;
    cfg.max_frames = args.max_frames;
    cfg.min_error_frames = args.min_error_frames;
    cfg.seed = args.seed;
    cfg.demap = args.demap;
    cfg.workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(args: &SimulateArgs) -> Result<(), Error> {
    let cfg = build_config(args)?;
    let csv = emit_csv(&run_sweep(&cfg)?);
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Constellation { modulation } => modulation.build().map(|c| print!("{}", c.to_csv())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Io(_)) { 2 } else { 1 })
        }
    }
}
