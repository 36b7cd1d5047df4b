//! Run artifacts: per-step records, report and tables.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use cpdcast::collections::{ForecastTrace, SchemaKind};
use cpdcast::evaluation::{BucketRow, ForecastRecord, Summary};
use cpdcast::ingest::parse_timestamp;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Stage, StageExt};

pub const RECORDS_FILE: &str = "records.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CHANGE_POINTS_FILE: &str = "changepoints.txt";
pub const CONFIG_FILE: &str = "resolved_config.toml";
pub const YEARLY_FILE: &str = "smape_by_year.csv";
pub const MONTHLY_FILE: &str = "median_sape_by_month.csv";

const TIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionTrace {
    pub index: usize,
    pub id: String,
    /// Origins whose forecast drew on this collection.
    pub forecasts: usize,
    /// Sum of this collection's blend weights over those origins.
    pub weight: f64,
    /// Instances the collection was trained on.
    pub trained: u64,
    pub leaves: usize,
    pub splits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub schema: String,
    pub eval_start: Option<String>,
    pub instances: usize,
    pub included: usize,
    pub feature_width: usize,
    pub change_points: Vec<u16>,
    pub overall: Summary,
    /// Mean SMAPE per year.
    pub yearly: Vec<BucketRow>,
    /// Median SAPE per calendar month, pooled across years.
    pub monthly: Vec<BucketRow>,
    pub collections: Vec<CollectionTrace>,
    pub notes: Vec<String>,
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::new(Stage::Output, e.to_string())
}

pub fn records_csv(records: &[ForecastRecord]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "origin",
        "step",
        "actual",
        "predicted",
        "schema",
        "collections",
        "weights",
        "included",
    ])
    .map_err(csv_error)?;
    for r in records {
        let origin = r.origin.format(TIME_FORMAT).to_string();
        let cols = join(&r.trace.collections());
        let weights = join(&r.trace.weights());
        for (i, (a, p)) in r.actual.iter().zip(&r.predicted).enumerate() {
            w.write_record([
                origin.as_str(),
                &(i + 1).to_string(),
                &a.to_string(),
                &p.to_string(),
                &r.schema,
                &cols,
                &weights,
                if r.included { "1" } else { "0" },
            ])
            .map_err(csv_error)?;
        }
    }
    w.into_inner()
        .map_err(|e| CliError::new(Stage::Output, e.to_string()))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join("|")
}

#[derive(Debug, Deserialize)]
struct RecordRow {
    origin: String,
    step: usize,
    actual: f64,
    predicted: f64,
    schema: String,
    collections: String,
    weights: String,
    included: u8,
}

fn split_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split('|')
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::new(Stage::Compare, format!("bad {what} entry {v:?}")))
        })
        .collect()
}

fn trace_of(row: &RecordRow) -> Result<ForecastTrace, CliError> {
    let cols: Vec<usize> = split_list(&row.collections, "collections")?;
    let weights: Vec<f64> = split_list(&row.weights, "weights")?;
    let kind: SchemaKind = row
        .schema
        .parse()
        .map_err(|e: String| CliError::new(Stage::Compare, e))?;
    match (cols.as_slice(), weights.as_slice()) {
        ([c], _) => Ok(ForecastTrace::Single { collection: *c }),
        ([c1, c2], [w1, w2]) if kind == SchemaKind::McpdmcSw => Ok(ForecastTrace::Switched {
            c1: *c1,
            c2: *c2,
            chosen: if *w1 >= *w2 { *c1 } else { *c2 },
        }),
        ([c1, c2], [w1, w2]) => Ok(ForecastTrace::Weighted {
            c1: *c1,
            c2: *c2,
            w1: *w1,
            w2: *w2,
        }),
        _ => Err(CliError::new(
            Stage::Compare,
            format!("bad trace {:?}/{:?}", row.collections, row.weights),
        )),
    }
}

/// Parse a `records.csv` back into one record per origin.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<ForecastRecord>, CliError> {
    let mut out: Vec<ForecastRecord> = Vec::new();
    let mut rdr = csv::Reader::from_reader(reader);
    for (line, row) in rdr.deserialize::<RecordRow>().enumerate() {
        let row = row.stage(Stage::Compare)?;
        let origin = parse_timestamp(&row.origin).ok_or_else(|| {
            CliError::new(
                Stage::Compare,
                format!("line {}: bad origin {:?}", line + 2, row.origin),
            )
        })?;
        match out.last_mut() {
            Some(r) if r.origin == origin => {
                if row.step != r.actual.len() + 1 {
                    return Err(CliError::new(
                        Stage::Compare,
                        format!("line {}: step {} out of order", line + 2, row.step),
                    ));
                }
                r.actual.push(row.actual);
                r.predicted.push(row.predicted);
            }
            _ => {
                if row.step != 1 {
                    return Err(CliError::new(
                        Stage::Compare,
                        format!("line {}: origin starts at step {}", line + 2, row.step),
                    ));
                }
                out.push(ForecastRecord {
                    origin,
                    predicted: vec![row.predicted],
                    actual: vec![row.actual],
                    trace: trace_of(&row)?,
                    schema: row.schema,
                    included: row.included != 0,
                });
            }
        }
    }
    Ok(out)
}

/// Accepts a `records.csv` path or a run directory containing one.
pub fn load_records(path: &Path) -> Result<Vec<ForecastRecord>, CliError> {
    let file = if path.is_dir() {
        path.join(RECORDS_FILE)
    } else {
        path.to_path_buf()
    };
    let f = fs::File::open(&file)
        .map_err(|e| CliError::new(Stage::Compare, format!("{}: {e}", file.display())))?;
    read_records(f)
}

pub fn yearly_csv(rows: &[BucketRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["year", "n", "mae", "mse", "smape"])
        .map_err(csv_error)?;
    for r in rows {
        w.write_record([
            &r.bucket,
            &r.n.to_string(),
            &r.mae.to_string(),
            &r.mse.to_string(),
            &r.smape.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner()
        .map_err(|e| CliError::new(Stage::Output, e.to_string()))
}

pub fn monthly_csv(rows: &[BucketRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["month", "n", "median_sape", "smape"])
        .map_err(csv_error)?;
    for r in rows {
        w.write_record([
            &r.bucket,
            &r.n.to_string(),
            &r.median_sape.to_string(),
            &r.smape.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner()
        .map_err(|e| CliError::new(Stage::Output, e.to_string()))
}

/// Write `files` into `dir` through a staging directory so a failed run
/// leaves no partial artifacts behind.
pub fn write_all(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<(), CliError> {
    let created = !dir.exists();
    let staging = staging_dir(dir);
    let result = (|| -> std::io::Result<()> {
        fs::create_dir_all(&staging)?;
        for (name, bytes) in files {
            fs::write(staging.join(name), bytes)?;
        }
        fs::create_dir_all(dir)?;
        for (name, _) in files {
            fs::rename(staging.join(name), dir.join(name))?;
        }
        Ok(())
    })();
    let _ = fs::remove_dir_all(&staging);
    result.map_err(|e| {
        if created {
            let _ = fs::remove_dir_all(dir);
        }
        CliError::new(Stage::Output, format!("writing {}: {e}", dir.display()))
    })
}

fn staging_dir(dir: &Path) -> PathBuf {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let parent = dir
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    parent.join(format!(".{name}.partial-{}", std::process::id()))
}
