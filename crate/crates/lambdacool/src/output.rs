//! CSV tables with a `#` metadata header, sidecar metadata, and an optional
//! plotting script.
//!
//! Layout: `# key=value` lines (the `timestamp` line is the only one that
//! varies between identical runs), then a header row, then data. Every data
//! row starts with the hash of its resolved parameter set and a status.

use std::io::Write;

use toml::{Table, Value};

use crate::config::{self, RunConfig, Scheme};
use crate::error::{AppError, AppResult};
use crate::observe::Cell;
use crate::sweep::SweepTable;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Prefix of the only header line that is allowed to differ between runs.
pub const TIMESTAMP_KEY: &str = "# timestamp=";

/// Everything recorded in a table's header besides the data.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub command: String,
    pub figure: Option<String>,
    pub scheme: Scheme,
    /// Resolved document (with overrides) the table was computed from.
    pub document: Table,
    pub timestamp: String,
}

impl Metadata {
    pub fn new(command: &str, figure: Option<&str>, scheme: Scheme, document: &Table) -> Self {
        Metadata { command: command.to_string(), figure: figure.map(str::to_string), scheme, document: document.clone(), timestamp: now() }
    }
}

/// Current UTC time in RFC 3339 form.
pub fn now() -> String {
    time::OffsetDateTime::now_utc().format(&time::format_description::well_known::Rfc3339).unwrap_or_else(|_| "unknown".to_string())
}

/// Formats a number so that it round-trips exactly.
pub fn number(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:e}")
    }
}

fn cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => number(*v),
        Cell::Flag(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

/// Modelling assumptions recorded with every table of a scheme.
pub fn assumptions(scheme: Scheme) -> Vec<(&'static str, &'static str)> {
    let mut out = vec![
        ("units", "configuration and output frequencies in Hz; internal angular values are 2π times these"),
        ("wavelength", "drive wavelength 780 nm unless wavelength_m is set; only enters eta = sqrt(P kappa_in / hbar omega)"),
        ("kappa_in", "input coupling defaults to kappa/2 (symmetric two-mirror cavity)"),
        ("linearization", "weak-probe linear response; control-field depletion and gain saturation are not modelled"),
    ];
    match scheme {
        Scheme::EitFeedback => out.extend([
            ("gamma_gm", "ground-metastable coherence decay defaults to 2π×100 Hz"),
            ("populations", "all atoms in the ground state (N_g = N) unless general_populations is set"),
            (
                "locking",
                "locked scans move the drive frequency: Delta_ca, delta and Delta_a follow the shifted detuning; sidebands add ±omega_m",
            ),
            ("coupling", "J = sqrt(kappa_in,ca kappa_in,cm); presets take kappa_in,ca = kappa_ca"),
        ]),
        Scheme::RirCascade => out.extend([
            ("momentum", "momentum treated as continuous, trapezoid quadrature, thermal weights exp(-4 hbar omega_r p^2 / k_B T)"),
            ("grid", "half-width 8 sigma_p, step 1/m with m = ceil(max(32 omega_r / gamma_coh, 2 / sigma_p))"),
            ("medium", "free-space medium: kappa_a = c/L_a, Delta_ca = 0, eta_a from the rir input power with kappa_in = kappa_a/2"),
            ("coupling", "J = sqrt(kappa_a kappa_cm / 2); the hybrid is driven only through the medium (eta_c = 0)"),
            ("baseline", "bare system: optomechanical cavity driven directly with the cavity_m power (coupling.baseline = direct)"),
            ("locking", "locked scans move the drive frequency: delta follows the shifted detuning"),
        ]),
        Scheme::Bare => {}
    }
    out.extend([
        ("shifted_detuning", "the shifted detuning is swept directly; displacement_zpt reports the implied static displacement"),
        ("g_convention", "g^2 = g0^2 |<c>|^2 in both topologies"),
        ("k_opt", "spring shift reported per unit mass (rad^2/s^2) unless mech.mass_kg is set"),
        ("optimum", "n_min minimized separately for hybrid and bare over |shifted detuning| <= search.window_omega_m omega_m: grid then golden section to 1e-4 omega_m"),
        ("instability", "points with Gamma_opt + gamma_m <= 0 or above coupling.max_photons are flagged stable=false with n_min empty"),
    ]);
    out
}

/// Parameters derived from the configuration, recorded for convenience.
pub fn derived(cfg: &RunConfig) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut put = |k: &str, v: f64| out.push((k.to_string(), number(v)));
    if let Ok(m) = cfg.mech() {
        put("gamma_mech_hz", m.gamma_mech.hz());
        put("n_bath", m.n_bath);
        put("gamma_mech_n_bath_hz", m.gamma_mech.hz() * m.n_bath);
    }
    if let Ok(c) = cfg.cavity_m() {
        put("cavity_m.eta", c.drive);
        put("cavity_m.kappa_in_hz", c.kappa_in.hz());
    }
    if let Ok(c) = cfg.cavity_a() {
        put("cavity_a.eta", c.drive);
        put("cavity_a.kappa_in_hz", c.kappa_in.hz());
    }
    if let Ok(e) = cfg.eit() {
        put("eit.rabi_control_hz", e.params.rabi_control.hz());
        put("eit.delta_a_hz", e.params.delta_a.hz());
        put("eit.stark_shift_hz", e.params.stark_shifted_resonance().hz());
    }
    if let Ok(r) = cfg.rir() {
        put("rir.rabi_control_hz", r.params.rabi_control.hz());
        put("rir.delta_a_hz", r.params.delta_a.hz());
        put("rir.beta", r.params.beta());
        put("rir.sigma_p", r.grid.sigma_p);
        put("rir.grid_points", r.grid.n_points as f64);
        put("rir.grid_p_max", r.grid.p_max);
        put("rir.medium_length_m", r.params.medium_length());
        if let Ok(eta) = cfg.rir_block().and_then(|b| b.eta()) {
            put("rir.eta", eta);
        }
    }
    let j = match cfg.scheme {
        Scheme::EitFeedback => cfg.feedback_system(true).ok().map(|s| s.j.value()),
        Scheme::RirCascade => cfg.cascade_system(true).ok().map(|s| s.j.value()),
        Scheme::Bare => None,
    };
    if let Some(j) = j {
        put("j_hz", j.hz());
    }
    out
}

fn header_lines(meta: &Metadata, table: &SweepTable) -> AppResult<Vec<String>> {
    let cfg = config::resolve(&meta.document)?;
    let mut lines = vec![format!("# lambdacool_version={VERSION}"), format!("# command={}", meta.command)];
    if let Some(f) = &meta.figure {
        lines.push(format!("# figure={f}"));
    }
    lines.push(format!("# scheme={}", meta.scheme.name()));
    lines.push(format!("# observable={}", table.observable.name()));
    lines.push(format!("# run_hash={}", table.run_hash));
    lines.push(format!("# rows={}", table.rows.len()));
    lines.push(format!("# failed_rows={}", table.failures().count()));
    lines.push(format!("{TIMESTAMP_KEY}{}", meta.timestamp));
    for (k, v) in config::flatten(&meta.document) {
        lines.push(format!("# param.{k}={}", one_line(&v)));
    }
    for (k, v) in derived(&cfg) {
        lines.push(format!("# derived.{k}={v}"));
    }
    for (k, v) in assumptions(meta.scheme) {
        lines.push(format!("# assumption.{k}={v}"));
    }
    Ok(lines)
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

/// Writes the table as CSV with its metadata header.
pub fn write_csv<W: Write>(mut w: W, meta: &Metadata, table: &SweepTable) -> AppResult<()> {
    let io = |e| AppError::io("writing CSV", e);
    for line in header_lines(meta, table)? {
        writeln!(w, "{line}").map_err(io)?;
    }
    let mut header = vec!["param_hash".to_string(), "status".to_string()];
    header.extend(table.axis_paths.iter().cloned());
    header.extend(table.columns.iter().map(|c| c.to_string()));
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in &table.rows {
        let mut fields = vec![row.hash.clone()];
        match &row.result {
            Ok(_) => fields.push("ok".to_string()),
            Err(e) => fields.push(e.kind.to_string()),
        }
        fields.extend(row.axes.iter().map(|&v| number(v)));
        match &row.result {
            Ok(cells) => fields.extend(cells.iter().map(cell)),
            Err(_) => fields.extend(std::iter::repeat_n(String::new(), table.columns.len())),
        }
        writeln!(w, "{}", fields.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// CSV text of a table.
pub fn csv_string(meta: &Metadata, table: &SweepTable) -> AppResult<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, meta, table)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Sidecar metadata: every parameter, assumption and the code version.
pub fn sidecar(meta: &Metadata, table: &SweepTable, csv_name: &str) -> AppResult<String> {
    let cfg = config::resolve(&meta.document)?;
    let mut t = Table::new();
    t.insert("lambdacool_version".into(), Value::String(VERSION.into()));
    t.insert("command".into(), Value::String(meta.command.clone()));
    if let Some(f) = &meta.figure {
        t.insert("figure".into(), Value::String(f.clone()));
    }
    t.insert("timestamp".into(), Value::String(meta.timestamp.clone()));
    t.insert("run_hash".into(), Value::String(table.run_hash.clone()));
    t.insert("csv".into(), Value::String(csv_name.into()));
    t.insert("rows".into(), Value::Integer(table.rows.len() as i64));
    t.insert("failed_rows".into(), Value::Integer(table.failures().count() as i64));
    let mut assumed = Table::new();
    for (k, v) in assumptions(meta.scheme) {
        assumed.insert(k.into(), Value::String(v.into()));
    }
    t.insert("assumptions".into(), Value::Table(assumed));
    let mut derived_t = Table::new();
    for (k, v) in derived(&cfg) {
        derived_t.insert(k, Value::String(v));
    }
    t.insert("derived".into(), Value::Table(derived_t));
    t.insert("config".into(), Value::Table(meta.document.clone()));
    toml::to_string(&t).map_err(|e| AppError::validation("sidecar", e.to_string()))
}

/// A generic matplotlib script plotting every output column against axis1,
/// one line per axis2 value (or an image when axis2 is dense).
pub fn plot_script(table: &SweepTable, csv_name: &str) -> String {
    let columns: Vec<String> = table.columns.iter().map(|c| format!("{c:?}")).collect();
    let series = table.axis_paths.get(1).map(|s| format!("{s:?}")).unwrap_or_else(|| "None".into());
    format!(
        r##"#!/usr/bin/env python3
"""Plot {csv_name}, written by lambdacool {VERSION}. Needs matplotlib."""
import csv
import sys
from collections import OrderedDict

import matplotlib.pyplot as plt

PATH = sys.argv[1] if len(sys.argv) > 1 else {csv_name:?}
X = {x:?}
SERIES = {series}
COLUMNS = [{columns}]


def number(s):
    try:
        return float(s)
    except ValueError:
        return {{"true": 1.0, "false": 0.0}}.get(s, float("nan"))


with open(PATH) as f:
    rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
rows = [r for r in rows if r["status"] == "ok"]
groups = OrderedDict()
for r in rows:
    groups.setdefault(r[SERIES] if SERIES else "", []).append(r)

fig, axes = plt.subplots(len(COLUMNS), 1, figsize=(7, 2.2 * len(COLUMNS)), sharex=True, squeeze=False)
for ax, col in zip(axes[:, 0], COLUMNS):
    if len(groups) > 8:
        xs = sorted({{number(r[X]) for r in rows}})
        ys = list(groups)
        grid = [[number(r[col]) for r in groups[y]] for y in ys]
        ax.pcolormesh(xs, [number(y) for y in ys], grid, shading="auto")
        ax.set_ylabel(SERIES)
        ax.set_title(col, fontsize=8)
    else:
        for key, rs in groups.items():
            ax.plot([number(r[X]) for r in rs], [number(r[col]) for r in rs], label=f"{{SERIES}}={{key}}" if SERIES else None)
        ax.set_ylabel(col, fontsize=8)
        if SERIES:
            ax.legend(fontsize=6)
axes[-1, 0].set_xlabel(X)
fig.tight_layout()
fig.savefig(PATH.rsplit(".", 1)[0] + ".png", dpi=150)
"##,
        x = table.axis_paths[0],
        columns = columns.join(", "),
    )
}

/// Drops the timestamp line, for comparing outputs of identical runs.
pub fn without_timestamp(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with(TIMESTAMP_KEY)).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{presets, sweep};

    fn small(name: &str) -> (Table, SweepTable) {
        let mut doc = presets::document(name).unwrap();
        config::set_path(&mut doc, "sweep.axis1.n_points", Value::Integer(7)).unwrap();
        let t = sweep::run_sweep(&doc, Some(2)).unwrap();
        (doc, t)
    }

    #[test]
    fn csv_layout() {
        let (doc, t) = small("fig8");
        let meta = Metadata::new("sweep", Some("fig8"), Scheme::EitFeedback, &doc);
        let text = csv_string(&meta, &t).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert!(body[0].starts_with("param_hash,status,cavity_m.detuning_hz,cavity_m.kappa_hz,delta_over_omega_m"));
        assert_eq!(body.len(), 1 + 14);
        let width = body[0].split(',').count();
        assert!(body.iter().all(|l| l.split(',').count() == width));
        assert!(text.lines().take_while(|l| l.starts_with('#')).any(|l| l == "# param.mech.quality_factor=50000000.0"));
        assert_eq!(text.lines().filter(|l| l.starts_with(TIMESTAMP_KEY)).count(), 1);
    }

    #[test]
    fn identical_runs_are_byte_identical_without_timestamp() {
        let (doc, a) = small("fig5");
        let (_, b) = small("fig5");
        let m1 = Metadata::new("sweep", None, Scheme::RirCascade, &doc);
        let mut m2 = m1.clone();
        m2.timestamp = "1970-01-01T00:00:00Z".into();
        let (x, y) = (csv_string(&m1, &a).unwrap(), csv_string(&m2, &b).unwrap());
        assert_ne!(x, y);
        assert_eq!(without_timestamp(&x), without_timestamp(&y));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -1.5, 1e-300, 6.07e6 * 2.0 * std::f64::consts::PI, 1.0 / 3.0] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn sidecar_is_valid_toml() {
        let (doc, t) = small("fig3");
        let meta = Metadata::new("reproduce", Some("fig3"), Scheme::EitFeedback, &doc);
        let s: Table = sidecar(&meta, &t, "fig3.csv").unwrap().parse().unwrap();
        assert_eq!(s["figure"].as_str(), Some("fig3"));
        assert!(s["config"]["eit"]["n_atoms"].as_float().is_some());
        assert!(s["assumptions"].as_table().unwrap().contains_key("gamma_gm"));
    }
}
