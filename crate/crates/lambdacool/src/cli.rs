//! Command-line interface.
//!
//! Any flag whose name contains a dot (`--mech.omega_m_hz 300e3` or
//! `--mech.omega_m_hz=300e3`) overrides that configuration key; these are
//! taken out of the argument list before the remaining flags are parsed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use crate::check::{self, CheckOptions};
use crate::config::{self, Observable, Scheme};
use crate::error::{exit, AppError, AppResult};
use crate::observe;
use crate::output::{self, Metadata};
use crate::presets;
use crate::sweep::{self, SweepTable};

#[derive(Debug, Parser)]
#[command(name = "lambdacool", version, about = "Atomic Lambda media and hybrid optomechanical cooling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// EIT susceptibility versus two-photon detuning.
    ChiEit(VerbArgs),
    /// RIR susceptibility of a thermal gas versus detuning.
    ChiRir(VerbArgs),
    /// Intracavity (or medium) field versus detuning.
    Field(VerbArgs),
    /// Cooling rate, spring shift and phonon number versus shifted detuning.
    Cool(VerbArgs),
    /// Runs the sweep described by a configuration's [sweep] block.
    Sweep(SweepArgs),
    /// Writes the data of one figure (fig3–fig6, fig8–fig12) with sidecar metadata.
    Reproduce(ReproduceArgs),
    /// Compares closed-form steady states with time-domain integration.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Configuration file (TOML).
    #[arg(short, long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in figure preset to start from (e.g. fig8).
    #[arg(long)]
    pub preset: Option<String>,
    /// Override a key: `--set mech.omega_m_hz=300e3`. Same as `--mech.omega_m_hz 300e3`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output CSV (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write `<output>.plot.py`, a matplotlib script for the table.
    #[arg(long, requires = "output")]
    pub plot_script: bool,
}

#[derive(Debug, Args)]
pub struct VerbArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// First value of the swept variable (Hz unless the axis says otherwise).
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    /// Last value of the swept variable.
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    /// Number of points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Logarithmic spacing.
    #[arg(long)]
    pub log: bool,
    /// Evaluate a single value of the swept variable.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["from", "to", "points", "log"])]
    pub at: Option<f64>,
    /// Swept key (defaults to the observable's natural variable).
    #[arg(long)]
    pub axis: Option<String>,
    /// Drop the preset's second axis (series).
    #[arg(long)]
    pub no_series: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Figure name: fig3, fig4, fig5, fig6, fig8, fig9, fig10, fig11, fig12.
    pub figure: String,
    /// Directory for `<fig>.csv` and `<fig>.meta.toml`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also write `<fig>.csv.plot.py`.
    #[arg(long)]
    pub plot_script: bool,
    /// Override a key: `--set eit.n_atoms=2e8`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Random seed for the parameter points.
    #[arg(long, default_value_t = check::DEFAULT_SEED)]
    pub seed: u64,
    /// Points per scheme.
    #[arg(long, default_value_t = check::DEFAULT_POINTS)]
    pub points: usize,
    /// Relative agreement required at every point.
    #[arg(long, default_value_t = check::TOLERANCE)]
    pub tolerance: f64,
    /// Write each run's trajectory as CSV into this directory.
    #[arg(long, value_name = "DIR")]
    pub dump_trajectory: Option<PathBuf>,
    /// Override a key: `--set eit.n_atoms=2e8` (eit.*, cavity_a.*, rir.* only).
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub set: Vec<String>,
}

/// `(path, raw value)` configuration overrides.
pub type Overrides = Vec<(String, String)>;

/// Splits dotted-path flags out of the argument list.
pub fn extract_overrides(args: Vec<String>) -> AppResult<(Vec<String>, Overrides)> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--").filter(|f| !f.is_empty()) else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if !name.contains('.') {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| AppError::validation(&name, "override flag needs a value"))?,
        };
        overrides.push((name, value));
    }
    Ok((rest, overrides))
}

fn parse_set(items: &[String]) -> AppResult<Vec<(String, String)>> {
    items
        .iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| AppError::validation(s, "expected --set PATH=VALUE"))
        })
        .collect()
}

fn load_source(source: &SourceArgs, default_preset: Option<&str>) -> AppResult<(Table, Option<String>)> {
    match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| AppError::io(format!("reading {}", path.display()), e))?;
            Ok((config::parse_document(&text, &path.display().to_string())?, None))
        }
        (None, Some(name)) => Ok((presets::document(name)?, figure_of(name))),
        (None, None) => match default_preset {
            Some(name) => Ok((presets::document(name)?, figure_of(name))),
            None => Err(AppError::validation("config", "give --config FILE or --preset NAME")),
        },
    }
}

fn figure_of(preset: &str) -> Option<String> {
    presets::document(preset).ok().and_then(|d| config::get_path(&d, "metadata.figure").and_then(Value::as_str).map(str::to_string))
}

fn default_preset(observable: Observable) -> &'static str {
    match observable {
        Observable::ChiEit => "fig3",
        Observable::ChiRir => "fig5",
        Observable::Field => "fig4",
        Observable::Cooling => "fig8",
        Observable::Optimum => "fig9",
    }
}

fn axis_table(path: &str, start: f64, stop: f64, n: usize) -> Value {
    let mut t = Table::new();
    t.insert("path".into(), Value::String(path.into()));
    t.insert("start".into(), Value::Float(start));
    t.insert("stop".into(), Value::Float(stop));
    t.insert("n_points".into(), Value::Integer(n as i64));
    Value::Table(t)
}

/// Default range of a verb's synthesized axis.
const DEFAULT_SPAN_HZ: f64 = 900e3;
const DEFAULT_POINTS: usize = 601;

/// Makes the document's sweep produce `observable`, applying range flags.
fn shape_sweep(doc: &mut Table, observable: Observable, args: &VerbArgs, overrides: &[(String, String)]) -> AppResult<()> {
    let scheme: Scheme = match config::get_path(doc, "scheme") {
        Some(v) => Scheme::deserialize(v.clone()).map_err(|e| AppError::validation("scheme", e.to_string()))?,
        None => return Err(AppError::validation("scheme", "missing field `scheme`")),
    };
    let current = config::get_path(doc, "sweep.observable").and_then(Value::as_str).map(str::to_string);
    let natural = args.axis.clone().unwrap_or_else(|| observe::natural_axis(observable, scheme).to_string());
    let keep = current.as_deref() == Some(observable.name())
        && args.axis.as_deref().is_none_or(|a| config::get_path(doc, "sweep.axis1.path").and_then(Value::as_str) == Some(a));
    if !keep {
        let mut sweep = Table::new();
        sweep.insert("observable".into(), Value::String(observable.name().into()));
        sweep.insert("axis1".into(), axis_table(&natural, -DEFAULT_SPAN_HZ, DEFAULT_SPAN_HZ, DEFAULT_POINTS));
        if let Some(fixed) = config::get_path(doc, "sweep.fixed").cloned() {
            sweep.insert("fixed".into(), fixed);
        }
        doc.insert("sweep".into(), Value::Table(sweep));
    }
    if args.no_series {
        config::remove_path(doc, "sweep.axis2");
    }
    config::apply_overrides(doc, overrides)?;
    if let Some(v) = args.at {
        config::set_path(doc, "sweep.axis1.start", Value::Float(v))?;
        config::set_path(doc, "sweep.axis1.stop", Value::Float(v))?;
        config::set_path(doc, "sweep.axis1.n_points", Value::Integer(1))?;
        config::set_path(doc, "sweep.axis1.scale", Value::String("linear".into()))?;
    }
    if let Some(v) = args.from {
        config::set_path(doc, "sweep.axis1.start", Value::Float(v))?;
    }
    if let Some(v) = args.to {
        config::set_path(doc, "sweep.axis1.stop", Value::Float(v))?;
    }
    if let Some(n) = args.points {
        config::set_path(doc, "sweep.axis1.n_points", Value::Integer(n as i64))?;
    }
    if args.log {
        config::set_path(doc, "sweep.axis1.scale", Value::String("log".into()))?;
    }
    Ok(())
}

use serde::Deserialize;

fn write_file(path: &Path, text: &str) -> AppResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(format!("creating {}", dir.display()), e))?;
    }
    std::fs::write(path, text).map_err(|e| AppError::io(format!("writing {}", path.display()), e))
}

fn plot_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".plot.py");
    PathBuf::from(s)
}

/// Runs a sweep document and writes its table; numerical failures are
/// reported after the table is written.
fn run_and_write(doc: &Table, command: &str, figure: Option<&str>, out: &OutputArgs) -> AppResult<SweepTable> {
    let cfg = config::resolve(doc)?;
    let table = sweep::run_sweep(doc, sweep::threads_from_env()?)?;
    let meta = Metadata::new(command, figure, cfg.scheme, doc);
    let text = output::csv_string(&meta, &table)?;
    let output = out.output.clone().or_else(|| cfg.sweep.as_ref().and_then(|s| s.output.clone()).map(PathBuf::from));
    match &output {
        Some(path) => {
            write_file(path, &text)?;
            if out.plot_script {
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                write_file(&plot_path(path), &output::plot_script(&table, &name))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| AppError::io("writing to stdout", e))?;
        }
    }
    numerical_status(&table)?;
    Ok(table)
}

fn numerical_status(table: &SweepTable) -> AppResult<()> {
    let failed: Vec<_> = table.failures().collect();
    match failed.first() {
        None => Ok(()),
        Some(first) => Err(AppError::Numerical {
            failed: failed.len(),
            total: table.rows.len(),
            first: first.result.as_ref().err().map(|e| e.message.clone()).unwrap_or_default(),
        }),
    }
}

fn verb(observable: Observable, command: &str, args: &VerbArgs, mut overrides: Vec<(String, String)>) -> AppResult<()> {
    overrides.extend(parse_set(&args.source.set)?);
    let (mut doc, figure) = load_source(&args.source, Some(default_preset(observable)))?;
    shape_sweep(&mut doc, observable, args, &overrides)?;
    run_and_write(&doc, command, figure.as_deref(), &args.out).map(drop)
}

fn sweep_cmd(args: &SweepArgs, mut overrides: Vec<(String, String)>) -> AppResult<()> {
    overrides.extend(parse_set(&args.source.set)?);
    let (mut doc, figure) = load_source(&args.source, None)?;
    config::apply_overrides(&mut doc, &overrides)?;
    run_and_write(&doc, "sweep", figure.as_deref(), &args.out).map(drop)
}

/// Writes `<fig>.csv` and `<fig>.meta.toml` (and optionally the plot script)
/// into `out_dir`. Returns the table.
pub fn reproduce(figure: &str, out_dir: &Path, overrides: &[(String, String)], plot: bool) -> AppResult<SweepTable> {
    let mut doc = presets::document(figure)?;
    config::apply_overrides(&mut doc, overrides)?;
    let name = figure_of(figure).unwrap_or_else(|| figure.to_string());
    let cfg = config::resolve(&doc)?;
    let table = sweep::run_sweep(&doc, sweep::threads_from_env()?)?;
    let meta = Metadata::new(&format!("reproduce {name}"), Some(&name), cfg.scheme, &doc);
    let csv_name = format!("{name}.csv");
    let csv_path = out_dir.join(&csv_name);
    write_file(&csv_path, &output::csv_string(&meta, &table)?)?;
    write_file(&out_dir.join(format!("{name}.meta.toml")), &output::sidecar(&meta, &table, &csv_name)?)?;
    if plot {
        write_file(&plot_path(&csv_path), &output::plot_script(&table, &csv_name))?;
    }
    eprintln!("wrote {} ({} rows, {} failed)", csv_path.display(), table.rows.len(), table.failures().count());
    numerical_status(&table)?;
    Ok(table)
}

fn oracle_check(args: &OracleArgs, mut overrides: Vec<(String, String)>) -> AppResult<()> {
    overrides.extend(parse_set(&args.set)?);
    let opts = CheckOptions {
        seed: args.seed,
        points: args.points,
        tolerance: args.tolerance,
        overrides,
        dump_trajectory: args.dump_trajectory.clone(),
        threads: sweep::threads_from_env()?,
    };
    let report = check::run(&opts)?;
    check::print(std::io::stdout().lock(), &report).map_err(|e| AppError::io("writing to stdout", e))?;
    report.into_result().map(drop)
}

/// Entry point: returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let (rest, overrides) = match extract_overrides(args) {
        Ok(v) => v,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(rest) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    let result = match &cli.command {
        Command::ChiEit(a) => verb(Observable::ChiEit, "chi-eit", a, overrides),
        Command::ChiRir(a) => verb(Observable::ChiRir, "chi-rir", a, overrides),
        Command::Field(a) => verb(Observable::Field, "field", a, overrides),
        Command::Cool(a) => verb(Observable::Cooling, "cool", a, overrides),
        Command::Sweep(a) => sweep_cmd(a, overrides),
        Command::Reproduce(a) => parse_set(&a.set).and_then(|mut set| {
            let mut all = overrides;
            all.append(&mut set);
            reproduce(&a.figure, &a.out_dir, &all, a.plot_script).map(drop)
        }),
        Command::OracleCheck(a) => oracle_check(a, overrides),
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => report(e),
    }
}

fn report(e: AppError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn dotted_flags_become_overrides() {
        let (rest, o) =
            extract_overrides(strings(&["lc", "cool", "--mech.omega_m_hz", "300e3", "--cavity_m.detuning_hz=-2e5", "-o", "x.csv"]))
                .unwrap();
        assert_eq!(rest, strings(&["lc", "cool", "-o", "x.csv"]));
        assert_eq!(o, vec![("mech.omega_m_hz".into(), "300e3".into()), ("cavity_m.detuning_hz".into(), "-2e5".into())]);
    }

    #[test]
    fn dangling_override_is_a_config_error() {
        let e = extract_overrides(strings(&["lc", "cool", "--mech.q"])).unwrap_err();
        assert_eq!(e.exit_code(), exit::CONFIG);
    }

    #[test]
    fn unknown_verb_and_flag_exit_2() {
        assert_eq!(run(["lc", "frobnicate"]), exit::CONFIG);
        assert_eq!(run(["lc", "cool", "--bogus"]), exit::CONFIG);
    }

    #[test]
    fn unknown_key_override_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("x.csv");
        let out = out.to_str().unwrap();
        assert_eq!(run(["lc", "cool", "--at", "-3e5", "--mech.nonsense", "1", "-o", out]), exit::CONFIG);
        assert_eq!(run(["lc", "reproduce", "fig7", "--out-dir", dir.path().to_str().unwrap()]), exit::CONFIG);
    }

    #[test]
    fn verb_switches_preset_sweep_to_its_observable() {
        let args = VerbArgs {
            source: SourceArgs { config: None, preset: Some("fig8".into()), set: vec![] },
            out: OutputArgs { output: None, plot_script: false },
            from: None,
            to: None,
            points: Some(5),
            log: false,
            at: None,
            axis: None,
            no_series: false,
        };
        let (mut doc, _) = load_source(&args.source, None).unwrap();
        shape_sweep(&mut doc, Observable::Field, &args, &[]).unwrap();
        let cfg = config::resolve(&doc).unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.observable, Observable::Field);
        assert_eq!(s.axis1.path, "cavity_a.detuning_hz");
        assert_eq!(s.axis1.n_points, 5);
        assert!(s.axis2.is_none());
    }

    #[test]
    fn single_point_cool_writes_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("p.csv");
        let code = run(["lc", "cool", "--at", "-3e5", "--no-series", "--mech.omega_m_hz", "300e3", "-o", out.to_str().unwrap()]);
        assert_eq!(code, exit::OK);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2);
    }
}
