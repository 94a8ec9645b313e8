//! Command-line front end.
//!
//! Every subcommand parameter is a `--key VALUE` flag and may also be set in a
//! config file (`--config FILE`) of `key = value` lines, `#` starting a
//! comment. Flags win over the file, the file over built-in defaults. The
//! file may also set `seed`; any other unknown key is rejected.
//!
//! Each run writes `<command>.csv` and `<command>.json` into `--out`.

mod commands;
mod config;

pub use commands::{load_kernel, Command, COMMANDS};
pub use config::{ConfigFile, Kind, ParamSpec, ParamValue, RunConfig};

use crate::error::{Error, Result};
use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches};
use serde_json::Value;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

const FILE_GLOBALS: &[&str] = &["seed"];

fn build() -> clap::Command {
    let mut app = clap::Command::new("chaoslab")
        .about("Monte Carlo and exact checks for normal approximation on Wiener and Poisson spaces")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key = value file with parameter values"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .global(true)
                .value_name("DIR")
                .value_parser(clap::value_parser!(PathBuf))
                .help("output directory [default: .]"),
        )
        .arg(
            Arg::new("seed")
                .long("seed")
                .global(true)
                .value_name("INT")
                .value_parser(clap::value_parser!(u64))
                .help("base seed [default: 0]"),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .value_name("INT")
                .value_parser(clap::value_parser!(u64).range(1..))
                .help("worker threads [default: machine parallelism]"),
        )
        .arg(
            Arg::new("no-timestamp")
                .long("no-timestamp")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("omit the timestamp from the JSON summary"),
        );
    for cmd in COMMANDS {
        let mut sub = clap::Command::new(cmd.name)
            .about(cmd.about)
            .after_help(cmd.columns);
        for spec in cmd.params {
            let mut help = spec.help.to_string();
            if let Some(d) = spec.default {
                help.push_str(&format!(" [default: {d}]"));
            }
            let arg = Arg::new(spec.key).long(spec.key).help(help);
            sub = sub.arg(if spec.kind == Kind::Flag {
                arg.action(ArgAction::SetTrue)
            } else {
                arg.value_name(spec.kind.value_name())
                    .allow_hyphen_values(true)
            });
        }
        app = app.subcommand(sub);
    }
    app
}

fn from_cli(m: &ArgMatches, id: &str) -> bool {
    m.value_source(id) == Some(ValueSource::CommandLine)
}

fn resolve(cmd: &Command, m: &ArgMatches) -> Result<RunConfig> {
    let file = match m.get_one::<PathBuf>("config") {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    file.check_keys(cmd.params, FILE_GLOBALS)?;
    let mut flags = BTreeMap::new();
    for spec in cmd.params {
        if !from_cli(m, spec.key) {
            continue;
        }
        let text = if spec.kind == Kind::Flag {
            m.get_flag(spec.key).to_string()
        } else {
            m.get_one::<String>(spec.key).cloned().unwrap_or_default()
        };
        flags.insert(spec.key.to_string(), text);
    }
    let seed = match m.get_one::<u64>("seed") {
        Some(s) if from_cli(m, "seed") => *s,
        _ => match file.get("seed") {
            Some((line, text)) => text.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("seed: `{text}` is not a non-negative integer"),
            })?,
            None => 0,
        },
    };
    let out = m
        .get_one::<PathBuf>("out")
        .cloned()
        .unwrap_or_else(|| PathBuf::from("."));
    RunConfig::resolve(cmd.name, cmd.params, &flags, &file, seed, out)
}

fn timestamp() -> Value {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Value::from(secs)
}

fn execute(cmd: &Command, m: &ArgMatches) -> Result<String> {
    let cfg = resolve(cmd, m)?;
    let threads = m
        .get_one::<u64>("threads")
        .map(|&t| t as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Capacity(format!("thread pool: {e}")))?;
    let report = pool.install(|| (cmd.run)(&cfg))?;

    std::fs::create_dir_all(&cfg.output_dir)?;
    let stem = cmd.name;
    let csv = cfg.output_dir.join(format!("{stem}.csv"));
    let json = cfg.output_dir.join(format!("{stem}.json"));
    report.write_csv(&csv)?;
    let mut extra = vec![("config", serde_json::to_value(&cfg)?)];
    if !m.get_flag("no-timestamp") {
        extra.push(("timestamp", timestamp()));
    }
    report.write_json(&json, &extra)?;
    let passed = report.pass_flags.values().filter(|f| f.passed).count();
    Ok(format!(
        "{}: {passed}/{} checks passed; wrote {} and {}",
        report.name,
        report.pass_flags.len(),
        csv.display(),
        json.display()
    ))
}

/// Parse `argv`, run the subcommand and return the process exit code:
/// 0 success, 2 usage and precondition errors, 3 capacity, 4 I/O.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match build().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let Some((name, sub)) = matches.subcommand() else {
        return 2;
    };
    let cmd = COMMANDS
        .iter()
        .find(|c| c.name == name)
        .expect("subcommands are built from COMMANDS");
    match execute(cmd, sub) {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "chaoslab {name}: {e}");
            e.exit_code()
        }
    }
}
