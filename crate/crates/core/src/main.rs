use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use fdwpcn::cli::args::{Cli, Command};
use fdwpcn::cli::{self, CliError, OutputOptions};
use fdwpcn::scenario::SweepVariable;
use fdwpcn::Executor;

fn open(path: &std::path::Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run(args: &Cli) -> Result<(), CliError> {
    let cfg = args.resolve_config()?;
    let opts = OutputOptions {
        rate_scale: if args.scale_bandwidth {
            cfg.bandwidth_hz / 1e6
        } else {
            1.0
        },
        executor: Executor::Parallel,
    };
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(open(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let sweep = |variable,
                 raw: &Option<std::path::PathBuf>,
                 out: &mut Box<dyn Write>|
     -> Result<(), CliError> {
        let mut raw_file = raw.as_deref().map(open).transpose()?;
        cli::sweep(
            &cfg,
            variable,
            &opts,
            out,
            raw_file.as_mut().map(|f| f as &mut dyn Write),
        )?;
        if let Some(f) = raw_file.as_mut() {
            f.flush()?;
        }
        Ok(())
    };
    match &args.command {
        Command::Optimize => cli::optimize(&cfg, &opts, &mut out)?,
        Command::RateRegion => cli::rate_region(&cfg, &opts, &mut out)?,
        Command::SweepP0 { raw } => sweep(SweepVariable::P0Dbm, raw, &mut out)?,
        Command::SweepSic { raw } => sweep(SweepVariable::SicGainDb, raw, &mut out)?,
        Command::SweepPhi { raw } => sweep(SweepVariable::IsolationDb, raw, &mut out)?,
        Command::ShowConfig => out.write_all(cfg.serialize().as_bytes())?,
    }
    out.flush()?;
    Ok(())
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Io(format!("thread pool: {e}"))),
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(
    _threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    Ok(f())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Cli::parse();
    match with_threads(args.threads, || run(&args)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fdwpcn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
