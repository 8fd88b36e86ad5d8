//! One- and two-dimensional parameter sweeps.
//!
//! Every grid point is a full configuration: the base document with the axis
//! values written at their dotted paths, deserialized and validated like a
//! file. Points are evaluated on a bounded worker pool and collected in grid
//! order (axis2-major), so the table does not depend on the worker count.

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::config::{self, Observable, RunConfig, SweepSpec};
use crate::error::{AppError, AppResult};
use crate::observe::{self, Cell, PointError};

/// Environment variable bounding the number of sweep workers.
pub const THREADS_ENV: &str = "LAMBDACOOL_THREADS";

/// Worker count from `LAMBDACOOL_THREADS`; `None` lets the pool decide.
pub fn threads_from_env() -> AppResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(AppError::validation(THREADS_ENV, format!("expected a positive integer, got `{v}`"))),
        },
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Hash of the fully resolved parameter set at this point.
    pub hash: String,
    /// Axis values, axis1 first.
    pub axes: Vec<f64>,
    pub result: Result<Vec<Cell>, PointError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub observable: Observable,
    /// Axis paths, axis1 first.
    pub axis_paths: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    /// Hash of the base document including the sweep specification.
    pub run_hash: String,
}

impl SweepTable {
    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.result.is_err())
    }

    /// Value of `column` in every successful row, in row order.
    pub fn column(&self, column: &str) -> Vec<Option<Cell>> {
        let k = self.columns.iter().position(|c| *c == column);
        self.rows.iter().map(|r| k.and_then(|k| r.result.as_ref().ok().map(|v| v[k]))).collect()
    }

    /// Numeric values of `column` (empty, failed and flag cells as NaN).
    pub fn numbers(&self, column: &str) -> Vec<f64> {
        self.column(column)
            .into_iter()
            .map(|c| match c {
                Some(Cell::Num(v)) => v,
                _ => f64::NAN,
            })
            .collect()
    }
}

/// Short, stable digest of a serialized parameter set.
pub fn digest(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    d.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn canonical(cfg: &RunConfig) -> String {
    // Struct field order and sorted maps make this deterministic.
    toml::to_string(cfg).expect("configuration is always serializable")
}

/// The sweep specification of a document, with `fixed` assignments applied to
/// a copy of the document that is returned alongside.
pub fn prepare(doc: &Table) -> AppResult<(SweepSpec, Table)> {
    let cfg = config::resolve(doc)?;
    let spec = cfg.sweep.clone().ok_or_else(|| AppError::validation("sweep", "block [sweep] is required"))?;
    let mut base = doc.clone();
    for (path, value) in &spec.fixed {
        config::set_path(&mut base, path, value.clone())?;
    }
    Ok((spec, base))
}

/// All grid points as axis-value vectors, axis2-major.
pub fn grid(spec: &SweepSpec) -> Vec<Vec<f64>> {
    let xs = spec.axis1.values();
    match &spec.axis2 {
        None => xs.into_iter().map(|x| vec![x]).collect(),
        Some(a2) => a2.values().into_iter().flat_map(|y| xs.iter().map(move |&x| vec![x, y])).collect(),
    }
}

fn point_config(base: &Table, paths: &[String], values: &[f64]) -> AppResult<RunConfig> {
    let mut doc = base.clone();
    for (p, &v) in paths.iter().zip(values) {
        // Integer-typed keys (grid sizes) stay integers; everything else is a float.
        let value = match config::get_path(base, p) {
            Some(Value::Integer(_)) if v.fract() == 0.0 => Value::Integer(v as i64),
            _ => Value::Float(v),
        };
        config::set_path(&mut doc, p, value)?;
    }
    config::resolve(&doc)
}

/// Runs the sweep described by the document's `[sweep]` block.
///
/// Configuration errors (including those of the first grid point) abort the
/// run; numerical errors are recorded per row.
pub fn run_sweep(doc: &Table, threads: Option<usize>) -> AppResult<SweepTable> {
    let (spec, base) = prepare(doc)?;
    let mut paths = vec![spec.axis1.path.clone()];
    if let Some(a2) = &spec.axis2 {
        paths.push(a2.path.clone());
    }
    let points = grid(&spec);
    // Validate paths and required blocks once, up front.
    let first = point_config(&base, &paths, &points[0])?;
    observe::check_requirements(&first, spec.observable)?;

    let eval = |values: &Vec<f64>| -> AppResult<Row> {
        let cfg = point_config(&base, &paths, values)?;
        let result = observe::evaluate(&cfg, spec.observable)?;
        Ok(Row { hash: digest(&canonical(&cfg)), axes: values.clone(), result })
    };
    let rows: Vec<AppResult<Row>> = match threads {
        Some(1) => points.iter().map(eval).collect(),
        _ => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads {
                builder = builder.num_threads(n);
            }
            let pool = builder.build().map_err(|e| AppError::validation(THREADS_ENV, e.to_string()))?;
            pool.install(|| points.par_iter().map(eval).collect())
        }
    };
    let rows = rows.into_iter().collect::<AppResult<Vec<Row>>>()?;
    Ok(SweepTable {
        observable: spec.observable,
        axis_paths: paths,
        columns: observe::columns(spec.observable).to_vec(),
        rows,
        run_hash: digest(&canonical(&config::resolve(&base)?)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn grid_is_axis2_major() {
        let doc = presets::document("fig3").unwrap();
        let (spec, _) = prepare(&doc).unwrap();
        let g = grid(&spec);
        let n1 = spec.axis1.n_points;
        assert_eq!(g.len(), 2 * n1);
        assert_eq!(g[0][1], g[n1 - 1][1]);
        assert_ne!(g[n1 - 1][1], g[n1][1]);
        assert_eq!(g[0][0], g[n1][0]);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut doc = presets::document("fig8").unwrap();
        config::set_path(&mut doc, "sweep.axis1.n_points", Value::Integer(41)).unwrap();
        let a = run_sweep(&doc, Some(1)).unwrap();
        let b = run_sweep(&doc, Some(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_point_sweep_is_single_evaluation() {
        let mut doc = presets::document("fig8").unwrap();
        for (k, v) in [("start", -2e5), ("stop", -2e5)] {
            config::set_path(&mut doc, &format!("sweep.axis1.{k}"), Value::Float(v)).unwrap();
        }
        config::set_path(&mut doc, "sweep.axis1.n_points", Value::Integer(1)).unwrap();
        crate::config::remove_path(&mut doc, "sweep.axis2");
        let t = run_sweep(&doc, Some(1)).unwrap();
        assert_eq!(t.rows.len(), 1);
        config::set_path(&mut doc, "cavity_m.detuning_hz", Value::Float(-2e5)).unwrap();
        let cfg = config::resolve(&doc).unwrap();
        let direct = observe::evaluate(&cfg, Observable::Cooling).unwrap();
        assert_eq!(t.rows[0].result, direct);
    }

    #[test]
    fn rows_carry_distinct_hashes() {
        let mut doc = presets::document("fig5").unwrap();
        config::set_path(&mut doc, "sweep.axis1.n_points", Value::Integer(5)).unwrap();
        let t = run_sweep(&doc, Some(2)).unwrap();
        let mut hashes: Vec<_> = t.rows.iter().map(|r| r.hash.clone()).collect();
        hashes.sort();
        hashes.dedup();
        assert_eq!(hashes.len(), t.rows.len());
    }

    #[test]
    fn unknown_axis_path_is_a_config_error() {
        let mut doc = presets::document("fig3").unwrap();
        config::set_path(&mut doc, "sweep.axis1.path", Value::String("eit.nonsense_hz".into())).unwrap();
        let e = run_sweep(&doc, Some(1)).unwrap_err();
        assert_eq!(e.exit_code(), crate::error::exit::CONFIG);
        assert!(e.to_string().contains("nonsense"));
    }
}
