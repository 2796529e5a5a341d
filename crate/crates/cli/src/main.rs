use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conewave::experiments::{self, ExperimentConfig, Scenario, Verdict};
use conewave::Error;

/// Runs a conewave experiment and writes CSV reports.
#[derive(Debug, Parser)]
#[command(name = "conewave", version)]
struct Cli {
    /// prop31, strichartz_scaling, counterexample, kss, local_energy or selftest.
    scenario: String,

    /// Module to check (selftest only).
    module: Option<String>,

    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    k_max: Option<usize>,

    #[arg(long)]
    points_per_decade: Option<usize>,

    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,

    /// Skip the reruns at doubled k_max and resolution.
    #[arg(long)]
    no_stability: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if experiments::is_configuration_error(&e) {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load(cli: &Cli, scenario: Scenario) -> Result<ExperimentConfig, Failure> {
    let mut config = match (&cli.config, scenario) {
        (Some(path), _) => ExperimentConfig::load(path).map_err(|e| match e {
            Error::Io { .. } => Failure::Config(e.to_string()),
            other => other.into(),
        })?,
        (None, Scenario::Selftest) => ExperimentConfig::new(Scenario::Selftest, None),
        (None, _) => {
            return Err(Failure::Config(format!(
                "scenario {} needs --config <file>",
                scenario.as_str()
            )))
        }
    };
    if config.scenario != scenario {
        return Err(Failure::Config(format!(
            "config describes scenario {}, command line asks for {}",
            config.scenario.as_str(),
            scenario.as_str()
        )));
    }
    if let Some(module) = &cli.module {
        if scenario != Scenario::Selftest {
            return Err(Failure::Config(
                "a module argument is only valid for selftest".into(),
            ));
        }
        config.module = Some(module.clone());
    }
    if let Some(k) = cli.k_max {
        config.k_max = k;
    }
    if let Some(p) = cli.points_per_decade {
        config.points_per_decade = p;
    }
    if cli.no_stability {
        config.stability_check = false;
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: &Cli) -> Result<Verdict, Failure> {
    let scenario = Scenario::parse(&cli.scenario).ok_or_else(|| {
        let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.as_str()).collect();
        Failure::Config(format!(
            "unknown scenario {}; expected one of {}",
            cli.scenario,
            names.join(", ")
        ))
    })?;
    let config = load(cli, scenario)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    let report = pool.install(|| experiments::run(&config))?;
    print!("{}", report.summary_text());
    if let Some(dir) = &config.output {
        for path in report.emit(dir)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(report.verdict())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
