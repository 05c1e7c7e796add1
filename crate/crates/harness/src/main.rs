use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magflow::compare::{compare, series_csv};
use magflow::run::{check_dir, run};
use magflow::suite::suite;
use magflow::{parse_overrides, ScenarioConfig};
use magflow_core::SobolevIndex;

#[derive(Parser)]
#[command(name = "magflow", version, about = "Spectral runs of the magnetization systems on the 3-torus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario; `--key value` pairs override the config file
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// Re-evaluate the checks of a finished run directory
    Check { run_dir: PathBuf },
    /// Per-snapshot H^s distance between the magnetizations of two runs
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        /// Leray-project the difference first
        #[arg(long)]
        project: bool,
    },
    /// Run a named suite (smoke, equivalence, gauge, max_principle)
    Suite {
        name: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main_inner() -> magflow::Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Simulate { config, overrides } => {
            let mut cfg = match &config {
                Some(p) => ScenarioConfig::from_file(p)?,
                None => ScenarioConfig::default(),
            };
            for (k, v) in parse_overrides(&overrides)? {
                cfg.set(&k, &v)?;
            }
            cfg.validate()?;
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            let out = run(&cfg)?;
            print!("{}", out.summary);
            Ok(status(out.passed()))
        }
        Cmd::Check { run_dir } => {
            let (reports, summary) = check_dir(&run_dir)?;
            print!("{summary}");
            Ok(status(reports.iter().all(|r| r.passed())))
        }
        Cmd::Compare { run_a, run_b, s, project } => {
            let series = compare(&run_a, &run_b, SobolevIndex::new(s)?, project)?;
            print!("{}", series_csv(&series));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Suite { name, overrides } => {
            let out = suite(&name, &parse_overrides(&overrides)?)?;
            print!("{}", out.summary());
            Ok(status(out.passed()))
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
