//! `ftl`: experiments on finite-type model domains in C^2.
//!
//! Every command reads a text descriptor, runs the corresponding sweep and
//! writes `<out>/<command>.csv` and `<out>/<command>.json`. Exit status:
//! 0 all invariants held, 1 a property violation (witness in the JSON),
//! 2 invalid input.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ftl_core::FtlError;

#[derive(Parser)]
#[command(name = "ftl", version, about = "finite-type domain experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form tau against the bisection oracle (config: domain file)
    Tau(RunArgs),
    /// Per-point frames and their invariants (config: domain file)
    Frame(RunArgs),
    /// Pseudo-ball constants fit (config: domain file)
    Constants(RunArgs),
    /// Run a renormalization suite (config: suite descriptor)
    Renorm(RunArgs),
    /// Rescaled-polynomial limit along a sequence (config: experiment descriptor)
    Rescale(RunArgs),
    /// Normality of rescaled disc families (config: experiment descriptor)
    Normality(RunArgs),
    /// Disc-separation probe (config: domain file)
    Pba(RunArgs),
    /// Kobayashi metric comparison sweep (config: sweep descriptor)
    Kobayashi(RunArgs),
    /// Run the whole property battery on the bundled domains
    VerifyAll(VerifyArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// descriptor file
    #[arg(long)]
    config: String,
    /// output directory for the CSV/JSON reports
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// root seed; fixed seed means byte-identical CSV output
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// tolerance overrides, e.g. --tol tau-rel=1e-9 (repeatable)
    #[arg(long = "tol", value_parser = parse_tol)]
    tols: Vec<(String, f64)>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = value
        .parse()
        .map_err(|_| format!("invalid tolerance value `{value}`"))?;
    Ok((name.to_string(), v))
}

fn thread_cap() -> usize {
    std::env::var("FTL_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = thread_cap();
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .ok();

    let (name, args, runner): (
        &str,
        &RunArgs,
        fn(&str, u64, &commands::Tolerances) -> ftl_core::Result<commands::Outcome>,
    ) = match &cli.command {
        Command::VerifyAll(args) => {
            return finish("verify-all", &args.out, commands::verify_all(args.seed, threads));
        }
        Command::Tau(a) => ("tau", a, commands::tau),
        Command::Frame(a) => ("frame", a, commands::frame),
        Command::Constants(a) => ("constants", a, commands::constants),
        Command::Renorm(a) => ("renorm", a, commands::renorm),
        Command::Rescale(a) => ("rescale", a, commands::rescale_cmd),
        Command::Normality(a) => ("normality", a, commands::normality),
        Command::Pba(a) => ("pba", a, commands::pba),
        Command::Kobayashi(a) => ("kobayashi", a, commands::kobayashi_cmd),
    };
    let tols: commands::Tolerances = args.tols.iter().cloned().collect();
    finish(name, &args.out, runner(&args.config, args.seed, &tols))
}

fn finish(
    name: &str,
    out: &PathBuf,
    result: ftl_core::Result<commands::Outcome>,
) -> ExitCode {
    match result {
        Ok(outcome) => {
            if let Err(e) = emit(name, out, &outcome) {
                eprintln!("ftl: cannot write reports: {e}");
                return ExitCode::from(2);
            }
            if outcome.all_ok {
                println!("{name}: ok");
                ExitCode::SUCCESS
            } else {
                println!("{name}: property violation (see {}/{name}.json)", out.display());
                ExitCode::from(1)
            }
        }
        Err(e @ FtlError::Parse { .. }) | Err(e @ FtlError::InvalidDomain(..)) => {
            eprintln!("ftl: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            // a property-level failure: record the witness and exit 1
            let json = serde_json::json!({
                "command": name,
                "ok": false,
                "violations": [{"invariant": format!("{name}/run"), "witness": e.to_string()}],
            });
            let _ = std::fs::create_dir_all(out);
            let _ = report::write_json(&out.join(format!("{name}.json")), &json);
            eprintln!("ftl: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(name: &str, out: &PathBuf, outcome: &commands::Outcome) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    outcome.csv.write(&out.join(format!("{name}.csv")))?;
    report::write_json(&out.join(format!("{name}.json")), &outcome.json)
}
