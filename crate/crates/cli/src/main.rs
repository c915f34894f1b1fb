use std::path::PathBuf;

use clap::Parser;
use nhberry::commands::selftest_checks;
use nhberry::{run, write_artifacts, CliError, Command, RunConfig};

/// Complex Berry phase simulator: figure data, sweeps and self checks.
#[derive(Debug, Parser)]
#[command(name = "nhberry", version)]
struct Args {
    command: Command,
    /// Sweep expression, e.g. "ratio j=0.5:12:50 delta_mhz=-2:2:50".
    expr: Option<String>,
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (same as `--override output.dir=DIR`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores (same as `--override run.workers=N`).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides a config key; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut overrides = args.overrides.clone();
    if let Some(dir) = &args.out {
        overrides.push(format!("output.dir={}", dir.display()));
    }
    if let Some(n) = args.workers {
        overrides.push(format!("run.workers={n}"));
    }
    let config = RunConfig::load(args.config.as_deref(), &overrides)?;
    if args.command == Command::Selftest {
        for c in selftest_checks(&config) {
            let status = if c.pass { "PASS" } else { "FAIL" };
            println!("{status} {} = {:e} (bound {:e})", c.name, c.value, c.bound);
        }
    }
    let artifacts = run(args.command, &config, args.expr.as_deref())?;
    if args.command == Command::Eigensystem {
        for a in &artifacts {
            print!("{}", a.table.to_csv());
        }
    }
    for path in write_artifacts(&config, &artifacts)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() {
    let args = Args::parse();
    if let Err(e) = execute(&args) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
