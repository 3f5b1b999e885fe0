//! Command-line front end for `dailyproxy`.
//!
//! Every configuration key is also a flag: `--model.rounds 100,300`,
//! `--similarity.k 3`. Values are layered defaults < `--config` file <
//! environment < flags.

pub mod chart;
pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Arg, ArgAction, ArgMatches, Command};
use dailyproxy::ErrorKind;

pub use config::{ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub fn command() -> Command {
    let mut cmd = Command::new("dailyproxy")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Rank daily proxies for an annual index and forecast the winner")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("TOML configuration file"),
        )
        .arg(
            Arg::new("offline")
                .long("offline")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("Never contact the remote endpoint; serve cached responses only"),
        );
    for (key, default) in config::flag_keys() {
        if key == "offline" {
            continue;
        }
        cmd = cmd.arg(
            Arg::new(key.clone())
                .long(key.clone())
                .global(true)
                .value_name("VALUE")
                .help_heading(if key.contains('.') {
                    "Settings"
                } else {
                    "Options"
                })
                .help(format!("default: {default}")),
        );
    }
    cmd.subcommand(Command::new("rank").about("Rank candidates against the annual target"))
        .subcommand(
            Command::new("forecast")
                .about("Fit the boosted model on the proxy and forecast with intervals"),
        )
        .subcommand(Command::new("report").about("Render chart.svg from forecast outputs"))
        .subcommand(Command::new("run").about("rank, forecast and report in one go"))
        .subcommand(
            Command::new("generate-fixture")
                .about("Write the synthetic dataset (target, candidates, cached remote responses)")
                .arg(
                    Arg::new("dir")
                        .long("dir")
                        .value_name("DIR")
                        .default_value(config::FIXTURE_DIR)
                        .value_parser(clap::value_parser!(PathBuf)),
                ),
        )
        .subcommand(Command::new("show-config").about("Print the effective configuration as TOML"))
}

fn config_from(matches: &ArgMatches) -> Result<RunConfig, ConfigError> {
    let mut overrides = Vec::new();
    for (key, _) in config::flag_keys() {
        if key == "offline" {
            if matches.get_flag("offline") {
                overrides.push((key, "true".to_string()));
            }
        } else if let Some(v) = matches.get_one::<String>(&key) {
            overrides.push((key, v.clone()));
        }
    }
    config::load(
        matches.get_one::<PathBuf>("config").map(PathBuf::as_path),
        &overrides,
    )
}

/// Exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<dailyproxy::Error>() {
            return match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numeric => EXIT_NUMERIC,
            };
        }
    }
    EXIT_DATA
}

fn dispatch(matches: &ArgMatches) -> Result<()> {
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cfg = config_from(sub)?;
    match name {
        "rank" => {
            let data = commands::load_data(&cfg)?;
            commands::cmd_rank(&cfg, &data)?;
        }
        "forecast" => {
            let proxy = commands::resolve_proxy(&cfg)?;
            let data = commands::load_data(&cfg)?;
            commands::cmd_forecast(&cfg, &data, &proxy)?;
        }
        "report" => {
            commands::cmd_report(&cfg)?;
        }
        "run" => commands::cmd_run(&cfg)?,
        "generate-fixture" => {
            let dir = sub.get_one::<PathBuf>("dir").expect("has default");
            dailyproxy::fixture::write_fixture(dir, cfg.seed)?;
            log::info!(
                "wrote synthetic fixture (seed {}) to {}",
                cfg.seed,
                dir.display()
            );
        }
        "show-config" => print!("{}", cfg.to_toml()),
        other => unreachable!("unknown subcommand {other}"),
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&matches) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}
