use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hamrep::cli::{run, RunConfig, RunOptions};

#[derive(Parser)]
#[command(
    name = "hamrep",
    version,
    about = "Control representations of convex Hamiltonians"
)]
struct Args {
    /// JSON run config
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// output directory, overrides the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// tolerance override, e.g. `--tol llc=0.05`
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[arg(long)]
    quiet: bool,
    #[command(subcommand)]
    sub: Option<Sub>,
}

#[derive(Subcommand)]
enum Sub {
    /// Built-in Hamiltonians
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    List,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v: f64 = v.parse().map_err(|e| format!("{v}: {e}"))?;
    Ok((k.to_string(), v))
}

fn init_threads() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var("HAMREP_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    init_threads();
    if let Some(Sub::Zoo {
        action: ZooAction::List,
    }) = args.sub
    {
        for e in hamrep::zoo::list() {
            println!(
                "{:<8} growth={} hlc={} closed_form_l={} lambda_bound={}",
                e.name, e.growth_bound, e.hlc, e.closed_form_l, e.lambda_bound
            );
        }
        return ExitCode::SUCCESS;
    }
    let Some(path) = args.config else {
        eprintln!("error: pass --config <file> or `zoo list`");
        return ExitCode::from(1);
    };
    let mut cfg = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.out {
        cfg.output_dir = o;
    }
    cfg.tolerances.extend(args.tol);
    let base_dir = path.parent().map(PathBuf::from).unwrap_or_default();
    match run(
        &cfg,
        &RunOptions {
            quiet: args.quiet,
            base_dir,
        },
    ) {
        Ok(out) => ExitCode::from(out.exit_code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
