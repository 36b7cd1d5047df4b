//! Pairwise Diebold-Mariano comparison of finished runs.

use std::path::{Path, PathBuf};

use cpdcast::evaluation::{diebold_mariano_with, origin_losses, DmLoss, ForecastRecord};
use serde::Serialize;

use crate::error::{CliError, Stage, StageExt};
use crate::output::load_records;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub n: usize,
    pub mean_loss_a: f64,
    pub mean_loss_b: f64,
    pub statistic: f64,
    pub p_value: f64,
}

fn run_name(path: &Path) -> String {
    let dir = if path.is_dir() {
        Some(path)
    } else {
        path.parent()
    };
    dir.and_then(|d| d.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn check_aligned(
    a: &[ForecastRecord],
    b: &[ForecastRecord],
    names: (&str, &str),
) -> Result<(), CliError> {
    let oa: Vec<_> = a.iter().filter(|r| r.included).map(|r| r.origin).collect();
    let ob: Vec<_> = b.iter().filter(|r| r.included).map(|r| r.origin).collect();
    if let Some((x, y)) = oa.iter().zip(&ob).find(|(x, y)| x != y) {
        return Err(CliError::new(
            Stage::Compare,
            format!(
                "{} and {} are not aligned: origin {x} vs {y}",
                names.0, names.1
            ),
        ));
    }
    if oa.len() != ob.len() {
        return Err(CliError::new(
            Stage::Compare,
            format!(
                "{} has {} evaluated origins, {} has {}",
                names.0,
                oa.len(),
                names.1,
                ob.len()
            ),
        ));
    }
    Ok(())
}

/// DM test for every pair of runs, in argument order.
pub fn compare(
    paths: &[PathBuf],
    h: usize,
    loss: DmLoss,
    harvey: bool,
) -> Result<Vec<Comparison>, CliError> {
    if paths.len() < 2 {
        return Err(CliError::new(
            Stage::Config,
            "compare needs at least two runs",
        ));
    }
    let runs: Vec<(String, Vec<ForecastRecord>)> = paths
        .iter()
        .map(|p| Ok((run_name(p), load_records(p)?)))
        .collect::<Result<_, CliError>>()?;
    let mut out = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (na, ra) = &runs[i];
            let (nb, rb) = &runs[j];
            check_aligned(ra, rb, (na, nb))?;
            let la = origin_losses(ra, loss);
            let lb = origin_losses(rb, loss);
            let r = diebold_mariano_with(&la, &lb, h, harvey).stage(Stage::Compare)?;
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            out.push(Comparison {
                a: na.clone(),
                b: nb.clone(),
                n: r.n,
                mean_loss_a: mean(&la),
                mean_loss_b: mean(&lb),
                statistic: r.statistic,
                p_value: r.p_value,
            });
        }
    }
    Ok(out)
}

pub fn to_csv(rows: &[Comparison]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).stage(Stage::Output)?;
    }
    w.into_inner().stage(Stage::Output)
}
