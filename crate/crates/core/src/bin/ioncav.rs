use clap::Parser;
use ioncav::cli::{exit_code, run, write_diagnostic, Command, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Ion Coulomb crystals in a pumped optical cavity.
#[derive(Parser)]
#[command(version)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `out_dir` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("ioncav: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ioncav: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    if let Some(out) = args.out {
        config.out_dir = out.to_string_lossy().into_owned();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    match run(args.command, &config) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ioncav {}: {e}", args.command.name());
            match write_diagnostic(&PathBuf::from(&config.out_dir), args.command, &config, &e) {
                Ok(p) => eprintln!("diagnostic written to {}", p.display()),
                Err(w) => eprintln!("could not write diagnostic: {w}"),
            }
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
