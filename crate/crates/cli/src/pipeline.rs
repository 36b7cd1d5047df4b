use std::path::PathBuf;

use cpdcast::changepoint::{detect_reference, ChangePointSet};
use cpdcast::collections::SchemaState;
use cpdcast::evaluation::{error_report, run_stream, ForecastRecord};
use cpdcast::ingest::{build_instances, feature_layout, impute_gaps, load_csv, RawSeries};

use crate::config::RunConfig;
use crate::error::{CliError, Stage, StageExt};
use crate::output::{self, CollectionTrace, RunReport};

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub records: Vec<ForecastRecord>,
    pub output_dir: PathBuf,
}

pub fn load_series(cfg: &RunConfig) -> Result<RawSeries, CliError> {
    let roles = cfg.input.roles();
    let raw = load_csv(&cfg.input.path, &roles).stage(Stage::Ingest)?;
    impute_gaps(&raw, roles.max_gap).stage(Stage::Ingest)
}

/// Change points from the detector or the configured file; `None` for
/// schemas that do not use them.
pub fn change_points(
    cfg: &RunConfig,
    series: &RawSeries,
) -> Result<Option<ChangePointSet>, CliError> {
    if let Some(path) = &cfg.change_point_file {
        return ChangePointSet::read_from(path)
            .map(Some)
            .map_err(|e| CliError::new(Stage::Detect, format!("{}: {e}", path.display())));
    }
    let Some(det) = &cfg.detector else {
        return Ok(None);
    };
    let first = *series
        .timestamps
        .first()
        .ok_or_else(|| CliError::new(Stage::Detect, "empty series"))?;
    let window = det.window(first)?;
    detect_reference(series, window, &det.pelt(), det.daily_mean)
        .map(Some)
        .stage(Stage::Detect)
}

/// Detect change points only and write them to the output directory.
pub fn detect(cfg: &RunConfig) -> Result<(ChangePointSet, PathBuf), CliError> {
    if cfg.detector.is_none() {
        return Err(CliError::new(
            Stage::Config,
            "detect needs a [detector] section",
        ));
    }
    let series = load_series(cfg)?;
    let cps = change_points(cfg, &series)?.expect("detector configured");
    output::write_all(
        &cfg.output_dir,
        &[(output::CHANGE_POINTS_FILE, cps.to_string().into_bytes())],
    )?;
    Ok((cps, cfg.output_dir.join(output::CHANGE_POINTS_FILE)))
}

const NOTES: [&str; 3] = [
    "no global scaling is applied to features or target",
    "only numeric exogenous columns listed in the config are used; categorical fields are ignored",
    "records before eval_start are forecast and trained on but excluded from every metric",
];

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let settings = cfg.settings()?;
    let eval_start = cfg.eval_start()?;
    let series = load_series(cfg)?;
    let cps = change_points(cfg, &series)?;

    let features = cfg.features.to_core();
    let layout = feature_layout(&series, &features).stage(Stage::Features)?;
    let instances = build_instances(&series, &features).stage(Stage::Features)?;

    let mut state = SchemaState::new(settings, features.horizon, cfg.tree.params(), cps.clone())
        .stage(Stage::Config)?;
    let records = run_stream(&instances, &mut state, eval_start).stage(Stage::Stream)?;
    let errors = error_report(&records).stage(Stage::Stream)?;

    let mut traces: Vec<CollectionTrace> = state
        .collections()
        .iter()
        .enumerate()
        .map(|(index, c)| CollectionTrace {
            index,
            id: c.id.clone(),
            forecasts: 0,
            weight: 0.0,
            trained: c.trained(),
            leaves: c.models().iter().map(|m| m.n_leaves()).sum(),
            splits: c.models().iter().map(|m| m.n_splits()).sum(),
        })
        .collect();
    for r in &records {
        for (c, w) in r.trace.collections().into_iter().zip(r.trace.weights()) {
            traces[c].forecasts += 1;
            traces[c].weight += w;
        }
    }

    let report = RunReport {
        label: cfg.label.clone(),
        schema: settings.kind.label().into(),
        eval_start: eval_start.map(|t| t.format("%Y-%m-%d %H:%M:%S").to_string()),
        instances: records.len(),
        included: records.iter().filter(|r| r.included).count(),
        feature_width: layout.width(),
        change_points: cps
            .as_ref()
            .map(|c| c.positions().to_vec())
            .unwrap_or_default(),
        overall: errors.overall,
        yearly: errors.yearly,
        monthly: errors.monthly,
        collections: traces,
        notes: NOTES.iter().map(|s| s.to_string()).collect(),
    };

    let mut files = vec![
        (output::RECORDS_FILE, output::records_csv(&records)?),
        (
            output::REPORT_FILE,
            serde_json::to_vec_pretty(&report).stage(Stage::Output)?,
        ),
        (output::CONFIG_FILE, cfg.to_toml().into_bytes()),
        (output::YEARLY_FILE, output::yearly_csv(&report.yearly)?),
        (output::MONTHLY_FILE, output::monthly_csv(&report.monthly)?),
    ];
    if let Some(c) = &cps {
        files.push((output::CHANGE_POINTS_FILE, c.to_string().into_bytes()));
    }
    output::write_all(&cfg.output_dir, &files)?;
    Ok(RunOutcome {
        report,
        records,
        output_dir: cfg.output_dir.clone(),
    })
}
