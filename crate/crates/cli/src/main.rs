use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use twophase::field::dump::write_dump;
use twophase_cli::report::summarize_json;
use twophase_cli::{
    emit_report, parse_formats, run_experiment, run_sweep, write_artifacts, ExperimentConfig, Group, RunReport,
    SHIPPED,
};

#[derive(Parser)]
#[command(name = "twophase", version, about = "Two-phase conductivity-jump solver and free-boundary audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// Configuration file, or the name of a shipped configuration.
    #[arg(long)]
    config: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated grid spacings for a refinement sweep.
    #[arg(long, value_delimiter = ',')]
    grid_sweep: Option<Vec<f64>>,
    /// Overrides the bump-family seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and dump the solution; runs only the reproduction audit.
    Solve(RunArgs),
    /// Monotonicity and Friedland-Hayman audits.
    Acf(RunArgs),
    /// Free-boundary audits.
    Fb(RunArgs),
    /// Blowup, cascade and envelope audits.
    Blowup(RunArgs),
    /// Matrix-extension audits.
    Matrix(RunArgs),
    /// Every audit of the configuration, or the whole shipped battery.
    Suite {
        /// Configuration file or shipped name; all shipped configurations when absent.
        #[arg(long)]
        config: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        grid_sweep: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarizes a JSON report written earlier.
    Report {
        /// Path of the JSON report.
        path: PathBuf,
    },
}

fn load(arg: &str) -> Result<ExperimentConfig> {
    if let Some(c) = twophase_cli::shipped(arg) {
        return Ok(c);
    }
    ExperimentConfig::from_file(std::path::Path::new(arg))
}

fn execute(mut cfg: ExperimentConfig, group: Option<Group>, args: &RunArgs, dump: bool) -> Result<bool> {
    if let Some(g) = group {
        cfg.audits.retain(|a| a.group() == g);
    }
    if let Some(seed) = args.seed {
        cfg.values.insert("mu.seed".into(), seed.to_string());
    }
    let report: RunReport = match &args.grid_sweep {
        Some(hs) => run_sweep(&cfg, hs)?,
        None => run_experiment(&cfg)?,
    };
    let formats = parse_formats(cfg.get("output.formats"))?;
    let mut paths = emit_report(&report, &formats, &args.out)?;
    paths.extend(write_artifacts(&report, &args.out)?);
    if dump {
        if let Some(u) = &report.solution {
            let p = args.out.join(format!("{}.solution.txt", report.name));
            write_dump(u, &p).with_context(|| format!("writing {}", p.display()))?;
            paths.push(p);
        }
    }
    print!("{}", twophase_cli::report::to_text(&report));
    log::info!("solve took {:?}", report.timing.solve);
    for (name, t) in &report.timing.audits {
        log::info!("{name} took {t:?}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(report.has_failure())
}

fn run(cli: Cli) -> Result<bool> {
    let (args, group, dump) = match cli.command {
        Command::Solve(a) => (a, Some(Group::Solve), true),
        Command::Acf(a) => (a, Some(Group::Acf), false),
        Command::Fb(a) => (a, Some(Group::FreeBoundary), false),
        Command::Blowup(a) => (a, Some(Group::Blowup), false),
        Command::Matrix(a) => (a, Some(Group::Matrix), false),
        Command::Suite { config, out, grid_sweep, seed } => {
            let names: Vec<String> = match config {
                Some(c) => vec![c],
                None => SHIPPED.iter().map(|(n, _)| n.to_string()).collect(),
            };
            let mut failed = false;
            for n in names {
                let args = RunArgs { config: n.clone(), out: out.clone(), grid_sweep: grid_sweep.clone(), seed };
                failed |= execute(load(&n)?, None, &args, false)?;
            }
            return Ok(failed);
        }
        Command::Report { path } => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let (summary, failed) = summarize_json(&text)?;
            print!("{summary}");
            return Ok(failed);
        }
    };
    if let Some(hs) = &args.grid_sweep {
        if hs.is_empty() {
            bail!("--grid-sweep needs at least one spacing");
        }
    }
    let cfg = load(&args.config)?;
    execute(cfg, group, &args, dump)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
