//! `lab`: scenario driver for the periodic-flow regularity laboratory.
//!
//! Usage: lab <scenario> --config <file> [--out <dir>] [--seed <n>] [--jobs <n>]
//!
//! Exit codes: 0 all verdicts pass, 1 at least one verdict failed,
//! 2 usage or configuration error.

mod config;
mod report;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use config::Config;
use scenarios::{Context, SCENARIOS};

struct Args {
    scenario: String,
    config_path: PathBuf,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
}

fn usage() -> String {
    format!(
        "usage: lab <scenario> --config <file> [--out <dir>] [--seed <n>] [--jobs <n>]\n\
         scenarios: {}\n\
         LAB_OUT overrides the output directory.",
        SCENARIOS.join(", ")
    )
}

fn parse_args(mut argv: Vec<String>) -> Result<Args, String> {
    if argv.is_empty() {
        return Err(usage());
    }
    let scenario = argv.remove(0);
    if !SCENARIOS.contains(&scenario.as_str()) {
        return Err(format!("unknown scenario `{scenario}`\n{}", usage()));
    }
    let mut config_path = None;
    let mut out_dir = None;
    let mut seed = None;
    let mut jobs = None;
    let mut it = argv.into_iter();
    while let Some(flag) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .ok_or_else(|| format!("{name} expects a value\n{}", usage()))
        };
        match flag.as_str() {
            "--config" => config_path = Some(PathBuf::from(value("--config")?)),
            "--out" => out_dir = Some(PathBuf::from(value("--out")?)),
            "--seed" => {
                seed = Some(
                    value("--seed")?
                        .parse::<u64>()
                        .map_err(|_| "--seed expects an integer".to_string())?,
                )
            }
            "--jobs" => {
                jobs = Some(
                    value("--jobs")?
                        .parse::<usize>()
                        .map_err(|_| "--jobs expects an integer".to_string())?,
                )
            }
            other => return Err(format!("unknown flag `{other}`\n{}", usage())),
        }
    }
    let config_path = config_path.ok_or_else(|| format!("--config is required\n{}", usage()))?;
    Ok(Args {
        scenario,
        config_path,
        out_dir,
        seed,
        jobs,
    })
}

fn main() -> ExitCode {
    let args = match parse_args(std::env::args().skip(1).collect()) {
        Ok(a) => a,
        Err(message) => {
            eprintln!("{message}");
            return ExitCode::from(2);
        }
    };
    // parse the configuration before touching the output directory, so a
    // malformed config leaves no artifacts behind
    let config = match Config::load(&args.config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(jobs) = args.jobs {
        if bolab::exec::parallel_enabled() {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
                eprintln!("warning: could not size the worker pool: {e}");
            }
        }
    }
    let seed = match args.seed {
        Some(s) => s,
        None => match config.u64("seed", 0) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
    };
    let out_dir = std::env::var_os("LAB_OUT")
        .map(PathBuf::from)
        .or(args.out_dir)
        .unwrap_or_else(|| PathBuf::from("lab-out").join(&args.scenario));

    let ctx = Context {
        config,
        out_dir: out_dir.clone(),
        seed,
    };
    match scenarios::run_scenario(&args.scenario, &ctx) {
        Ok(outcome) => {
            let summary = report::summary_json(&args.scenario, seed, &outcome.checks);
            if let Err(e) = report::write_text(&out_dir.join("summary.json"), &summary) {
                eprintln!("error writing summary: {e}");
                return ExitCode::from(2);
            }
            for check in &outcome.checks {
                println!(
                    "{:<34} {:<12} measured {:>14.6e}  [{}]",
                    check.name, check.verdict, check.measured, check.claim
                );
            }
            if outcome.failed() {
                println!("result: FAIL ({})", out_dir.display());
                ExitCode::from(1)
            } else {
                println!("result: pass ({})", out_dir.display());
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
