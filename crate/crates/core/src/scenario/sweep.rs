//! Batch runs over one configuration field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{set_path, ScenarioConfig};
use super::run::{run_scenario, write_artifacts, RunSummary};
use crate::error::{Error, Result};
use crate::par::{self, Exec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub value: String,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

/// Runs one child per value of `param` (a dotted path such as
/// `estimator.gamma_w`). Child failures are recorded and the batch
/// continues. With `out_dir`, each child writes into `<out_dir>/<param>=<value>`
/// and a `sweep.csv` comparison table is written.
pub fn sweep(
    base: &toml::Value,
    param: &str,
    values: &[String],
    out_dir: Option<&Path>,
    exec: Exec,
) -> Result<Vec<SweepRecord>> {
    if values.is_empty() {
        return Err(Error::config("values", "sweep needs at least one value"));
    }
    if param.trim().is_empty() {
        return Err(Error::config("param", "sweep needs a parameter path"));
    }
    let records = par::map(exec, values, |value| {
        let child = || -> Result<RunSummary> {
            let mut v = base.clone();
            set_path(&mut v, param, value)?;
            let mut cfg = ScenarioConfig::from_value(v)?;
            cfg.name = Some(format!("{}[{param}={value}]", cfg.label()));
            let out = run_scenario(&cfg)?;
            if let Some(dir) = out_dir {
                write_artifacts(&cfg, &out, &dir.join(format!("{param}={value}")))?;
            }
            Ok(out.summary)
        };
        match child() {
            Ok(s) => SweepRecord {
                value: value.clone(),
                summary: Some(s),
                error: None,
            },
            Err(e) => {
                log::warn!("sweep child {param}={value} failed: {e}");
                SweepRecord {
                    value: value.clone(),
                    summary: None,
                    error: Some(e.to_string()),
                }
            }
        }
    });
    if let Some(dir) = out_dir {
        write_comparison(&dir.join("sweep.csv"), param, &records)?;
    }
    Ok(records)
}

/// One row per child: value, status, error norm, decay rate, `Δ(t_end)`,
/// residual, and the final scaled errors.
pub fn write_comparison(path: &Path, param: &str, records: &[SweepRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let ell = records
        .iter()
        .filter_map(|r| r.summary.as_ref())
        .map(|s| s.scaled_errors.len())
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        param.to_string(),
        "status".into(),
        "error_norm".into(),
        "decay_rate".into(),
        "delta_end".into(),
        "max_rel_residual".into(),
        "ie_first_pass".into(),
        "k_rel_error".into(),
    ];
    header.extend((1..=ell).map(|i| format!("scaled_error{i}")));
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in records {
        let mut row = vec![r.value.clone()];
        match (&r.summary, &r.error) {
            (Some(s), _) => {
                row.push(if s.passed() { "pass" } else { "fail" }.into());
                row.push(format!("{:e}", s.error_norm));
                row.push(opt(s.decay_rate));
                row.push(format!("{:e}", s.delta_end));
                row.push(format!("{:e}", s.max_rel_residual));
                row.push(opt(s.ie_first_pass));
                row.push(opt(s.k_rel_error));
                for i in 0..ell {
                    row.push(opt(s.scaled_errors.get(i).copied()));
                }
            }
            (None, e) => {
                row.push(format!("error: {}", e.as_deref().unwrap_or("unknown")));
                row.extend(std::iter::repeat(String::new()).take(6 + ell));
            }
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
