//! Command-line front end.
//!
//! Every subcommand shares one flag set. A JSON config may supply the same
//! settings under the flag names (`{"n-list": [4, 6], "seed": 7}`); flags
//! given on the command line win.

mod commands;
mod svg;
mod table;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{invalid, Error, Result};

pub use svg::{slope_text, Plot, Series};
pub use table::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Minimum rectangle-pair rank sums of F_n and G_n.
    VerifyRanks,
    /// Section and bisection widths of decoding graphs.
    Bisection,
    /// Mesh encoder runs.
    EncodeSim,
    /// Mesh SC decoder runs.
    DecodeSim,
    /// Monte-Carlo block error rate over the erasure channel.
    PeCurve,
    /// Encoder/decoder cost sweep with log-log fits.
    Scaling,
    /// Closed-form lower bounds.
    Bounds,
    /// Checks every simulated run against every applicable bound.
    CheckConsistency,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyRanks => "verify-ranks",
            Command::Bisection => "bisection",
            Command::EncodeSim => "encode-sim",
            Command::DecodeSim => "decode-sim",
            Command::PeCurve => "pe-curve",
            Command::Scaling => "scaling",
            Command::Bounds => "bounds",
            Command::CheckConsistency => "check-consistency",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restriction {
    Balanced,
    Unrestricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    /// Exhaustive when the graph is small enough, else branch-and-bound.
    Auto,
    Exhaustive,
    Bnb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Clone, Debug, Default, PartialEq, clap::Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Level `n` (N = 2^n), or an inclusive range such as `4..10`.
    #[arg(long, global = true)]
    #[serde(default, deserialize_with = "level_spec")]
    pub n: Option<String>,
    /// Explicit comma-separated levels; takes precedence over `--n`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<u32>>,
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    /// Erasure probability; `pe-curve` accepts a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub eps: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub t_route: Option<u64>,
    #[arg(long, global = true)]
    pub t_parity: Option<u64>,
    #[arg(long, global = true)]
    pub node_area: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub restriction: Option<Restriction>,
    #[arg(long, global = true, value_enum)]
    pub solver: Option<SolverChoice>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Block length for `bounds`.
    #[arg(long = "N", global = true)]
    #[serde(rename = "N")]
    pub block_length: Option<f64>,
    /// Rate for `bounds`.
    #[arg(long = "R", global = true)]
    #[serde(rename = "R")]
    pub bound_rate: Option<f64>,
    /// Activity factor for `bounds`.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Writes per-cycle JSON-lines traces of the first run at each level.
    #[arg(long, global = true)]
    #[serde(default)]
    pub trace: bool,
    /// Allows the slower exhaustive searches (rank sums at n = 4).
    #[arg(long, global = true)]
    #[serde(default)]
    pub long_run: bool,
}

fn level_spec<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Spec {
        Level(u32),
        Text(String),
    }
    Ok(Option::<Spec>::deserialize(d)?.map(|s| match s {
        Spec::Level(n) => n.to_string(),
        Spec::Text(t) => t,
    }))
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Eps {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Option::<Eps>::deserialize(d)?.map(|e| match e {
        Eps::One(x) => vec![x],
        Eps::Many(v) => v,
    }))
}

#[derive(Debug, Parser)]
#[command(name = "polar-vlsi", version, about = "Polar-code VLSI cost experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// JSON file with default settings (and optionally `"command"`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

impl Settings {
    /// Fields set here override those in `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            n: self.n.or(base.n),
            n_list: self.n_list.or(base.n_list),
            rate: self.rate.or(base.rate),
            eps: self.eps.or(base.eps),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            t_route: self.t_route.or(base.t_route),
            t_parity: self.t_parity.or(base.t_parity),
            node_area: self.node_area.or(base.node_area),
            restriction: self.restriction.or(base.restriction),
            solver: self.solver.or(base.solver),
            out_dir: self.out_dir.or(base.out_dir),
            format: self.format.or(base.format),
            block_length: self.block_length.or(base.block_length),
            bound_rate: self.bound_rate.or(base.bound_rate),
            q: self.q.or(base.q),
            trace: self.trace || base.trace,
            long_run: self.long_run || base.long_run,
        }
    }

    /// Levels from `--n-list`, else `--n`.
    pub fn levels(&self) -> Result<Vec<u32>> {
        if let Some(list) = &self.n_list {
            return Ok(list.clone());
        }
        let Some(spec) = &self.n else {
            return invalid("no levels given: use --n or --n-list");
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidArgument(format!("bad level {s:?} in --n")))
        };
        match spec.split_once("..") {
            Some((a, b)) => Ok((parse(a)?..=parse(b)?).collect()),
            None => Ok(vec![parse(spec)?]),
        }
    }

    pub fn seed_for(&self, command: Command) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidArgument(format!("{} is stochastic and needs an explicit --seed", command.name())))
    }
}

/// Tables, plots and extra files produced by one command.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<(String, Table)>,
    pub plots: Vec<(String, Plot)>,
    pub files: Vec<(String, String)>,
    pub failures: Vec<String>,
}

/// Parses arguments, merges the config file and resolves the command.
pub fn resolve<I, T>(args: I) -> Result<(Command, Settings)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (file_command, base) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let bad = |e: serde_json::Error| Error::InvalidArgument(format!("{}: {e}", path.display()));
            let mut value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
            let command = match value.as_object_mut().and_then(|m| m.remove("command")) {
                Some(c) => Some(serde_json::from_value::<Command>(c).map_err(bad)?),
                None => None,
            };
            (command, serde_json::from_value::<Settings>(value).map_err(bad)?)
        }
        None => (None, Settings::default()),
    };
    let command = cli
        .command
        .or(file_command)
        .ok_or_else(|| Error::InvalidArgument("no command given".into()))?;
    Ok((command, cli.settings.over(base)))
}

pub fn execute(command: Command, s: &Settings) -> Result<Artifacts> {
    match command {
        Command::VerifyRanks => commands::verify_ranks(s),
        Command::Bisection => commands::bisection(s),
        Command::EncodeSim => commands::encode_sim(s),
        Command::DecodeSim => commands::decode_sim(s),
        Command::PeCurve => commands::pe_curve(s),
        Command::Scaling => commands::scaling(s),
        Command::Bounds => commands::bounds(s),
        Command::CheckConsistency => commands::check_consistency(s),
    }
}

/// Writes CSV tables and SVG plots under `out_dir` as `format` asks.
pub fn emit_artifacts(a: &Artifacts, out_dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let io = |p: &Path, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: &str| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| io(&path, e))?;
        written.push(path);
        Ok(())
    };
    if format != Format::Svg {
        for (name, t) in &a.tables {
            put(&format!("{name}.csv"), &t.to_csv()?)?;
        }
    }
    if format != Format::Csv {
        for (name, p) in &a.plots {
            put(&format!("{name}.svg"), &p.render())?;
        }
    }
    for (name, body) in &a.files {
        put(name, body)?;
    }
    Ok(written)
}

/// Runs a full invocation: prints the primary table, writes artifacts, and
/// fails if any asserted property did not hold.
pub fn run<I, T>(args: I, stdout: &mut impl std::io::Write) -> Result<Artifacts>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (command, settings) = resolve(args)?;
    if settings.format.is_some_and(|f| f != Format::Csv) && settings.out_dir.is_none() {
        return invalid("SVG output needs --out-dir");
    }
    let artifacts = execute(command, &settings)?;
    if let Some((_, t)) = artifacts.tables.first() {
        stdout.write_all(t.to_csv()?.as_bytes())?;
    }
    if let Some(dir) = &settings.out_dir {
        emit_artifacts(&artifacts, dir, settings.format.unwrap_or(Format::Csv))?;
    }
    if !artifacts.failures.is_empty() {
        return Err(Error::AssertionFailed(artifacts.failures.join("; ")));
    }
    Ok(artifacts)
}

/// Entry point for the binary: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<T> = args.into_iter().collect();
    // Help and version requests go through clap's own printer.
    if let Err(e) = Cli::try_parse_from(args.clone()) {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            let _ = e.print();
            return 0;
        }
    }
    match run(args, &mut std::io::stdout().lock()) {
        Ok(_) => 0,
        Err(e) => {
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{record}");
            1
        }
    }
}
