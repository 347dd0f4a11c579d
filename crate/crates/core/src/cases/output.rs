use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::runner::{ComparisonOutcome, PhysicalOutcome, SchemeSlopes, SweepOutcome, SWEEP_HEADER};
use super::{CaseConfig, CaseError, CaseKind};
use crate::dimensionless::DimensionlessGroups;
use crate::integrators::{RunReport, SuperStepSchedule};
use crate::metrics::{write_comparison_csv, ComparisonRecord};

/// Everything a finished case writes to disk.
#[derive(Debug, Clone, Default)]
pub struct CaseOutputs {
    pub kind: CaseKind,
    pub name: String,
    pub config: Option<CaseConfig>,
    pub groups: Vec<(String, DimensionlessGroups)>,
    /// Node positions of the comparison grid, for the final-state profiles.
    pub positions: Vec<f64>,
    pub comparison: Option<ComparisonOutcome>,
    pub sweep: Option<SweepOutcome>,
    pub physical: Option<PhysicalOutcome>,
}

/// Run manifest written as `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub name: &'a str,
    pub kind: CaseKind,
    pub timestamp_unix_s: u64,
    pub config: Option<&'a CaseConfig>,
    pub groups: &'a [(String, DimensionlessGroups)],
    pub schedules: Vec<&'a SuperStepSchedule>,
    pub runs: Vec<&'a RunReport>,
    pub records: Vec<&'a ComparisonRecord>,
    pub richardson_gap: Option<f64>,
    pub sweep_slopes: Option<&'a [SchemeSlopes]>,
    pub files: Vec<String>,
}

fn create(path: &Path) -> Result<BufWriter<File>, CaseError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CaseError::io(path, e))?))
}

fn write_two_column(path: &Path, header: [&str; 2], rows: impl IntoIterator<Item = (f64, f64)>) -> Result<(), CaseError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for (a, b) in rows {
        w.write_record([format!("{a:e}"), format!("{b:e}")])?;
    }
    w.flush().map_err(|e| CaseError::io(path, e))
}

/// Writes the manifest, tables and plot-data files of `out` into `dir` and
/// returns the paths written.
pub fn emit_outputs(out: &CaseOutputs, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, CaseError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| CaseError::io(dir, e))?;
    let mut files = Vec::new();

    let mut schedules = Vec::new();
    let mut runs = Vec::new();
    let mut records = Vec::new();
    let mut richardson = None;

    if let Some(c) = &out.comparison {
        let path = dir.join("comparison.csv");
        write_comparison_csv(&c.records, create(&path)?)?;
        files.push(path);
        for (scheme, state) in &c.finals {
            for (field, values) in [("u", &state.u), ("v", &state.v)] {
                let path = dir.join(format!("{}_{field}.csv", scheme.name()));
                write_two_column(&path, ["x", field], out.positions.iter().copied().zip(values.iter().copied()))?;
                files.push(path);
            }
        }
        schedules.extend(&c.schedules);
        runs.extend(&c.reports);
        records.extend(&c.records);
        richardson = c.richardson;
    }

    if let Some(p) = &out.physical {
        for curve in &p.curves {
            let path = dir.join(format!("theta_tot_{}.csv", curve.layout));
            write_two_column(&path, ["t_d", "theta_tot"], curve.theta_tot.iter().copied())?;
            files.push(path);
            let path = dir.join(format!("v_dry_{}.csv", curve.layout));
            write_two_column(&path, ["t_d", "v_dry"], curve.v_dry.iter().copied())?;
            files.push(path);
        }
        schedules.extend(&p.curve_schedule);
        if let Some(c) = &p.comparison {
            let path = dir.join("comparison.csv");
            write_comparison_csv(&c.records, create(&path)?)?;
            files.push(path);
            schedules.extend(&c.schedules);
            runs.extend(&c.reports);
            records.extend(&c.records);
        }
    }

    if let Some(s) = &out.sweep {
        let path = dir.join("sweep.csv");
        let mut w = csv::Writer::from_writer(create(&path)?);
        w.write_record(SWEEP_HEADER)?;
        for row in &s.rows {
            w.write_record(row.fields())?;
        }
        w.flush().map_err(|e| CaseError::io(&path, e))?;
        files.push(path);
        richardson = richardson.or(s.richardson);
    }

    let names = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = Manifest {
        name: &out.name,
        kind: out.kind,
        timestamp_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        config: out.config.as_ref(),
        groups: &out.groups,
        schedules,
        runs,
        records,
        richardson_gap: richardson,
        sweep_slopes: out.sweep.as_ref().map(|s| s.slopes.as_slice()),
        files: names,
    };
    let path = dir.join("manifest.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CaseError::io(&path, e))?;
    files.push(path);
    Ok(files)
}
