use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ContributionTrace, RepresentativeCurve};
use crate::error::Result;
use crate::task::Phase;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportFiles {
    pub representative_steps: PathBuf,
    pub performance: PathBuf,
    pub contribution: PathBuf,
    pub summary: PathBuf,
}

#[derive(Serialize)]
struct StepRow {
    errors: u32,
    phase: &'static str,
    index: u32,
    n_problems: usize,
    performance_mean: f64,
    performance_sem: f64,
    rt_centered_mean: Option<f64>,
    rt_sem: Option<f64>,
}

#[derive(Serialize)]
struct PerformanceRow {
    errors: u32,
    n_problems: usize,
    density: f64,
    repetition: u32,
    mean: f64,
    sem: f64,
}

#[derive(Serialize)]
struct TraceRow {
    errors: u32,
    phase: &'static str,
    index: u32,
    retrieved_mean: f64,
    retrieved_sem: f64,
    weight_mean: Option<f64>,
    update_probability: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    curve: &'a RepresentativeCurve,
    trace: &'a ContributionTrace,
    rt_center: Option<f64>,
}

/// Mean reaction time over every representative position of the curve.
pub fn rt_center(curve: &RepresentativeCurve) -> Option<f64> {
    let pts = curve.rt_points();
    (!pts.is_empty()).then(|| pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64)
}

/// Write the curve, the performance table and the contribution trace as CSV
/// files plus a JSON summary into `dir`. Reaction times are centered on the
/// curve's mean.
pub fn write_reports(dir: impl AsRef<Path>, curve: &RepresentativeCurve, trace: &ContributionTrace) -> Result<ReportFiles> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        representative_steps: dir.join("representative_steps.csv"),
        performance: dir.join("performance_by_error_count.csv"),
        contribution: dir.join("contribution_trace.csv"),
        summary: dir.join("summary.json"),
    };
    let center = rt_center(curve);

    let mut w = csv::Writer::from_path(&files.representative_steps)?;
    for g in &curve.groups {
        for p in &g.points {
            w.serialize(StepRow {
                errors: g.errors,
                phase: p.position.phase.code(),
                index: p.position.index,
                n_problems: g.n_problems,
                performance_mean: p.performance.mean,
                performance_sem: p.performance.sem,
                rt_centered_mean: p.rt.zip(center).map(|(rt, c)| rt.mean - c),
                rt_sem: p.rt.map(|rt| rt.sem),
            })?;
        }
    }
    w.flush()?;

    let densities = curve.densities();
    let mut w = csv::Writer::from_path(&files.performance)?;
    for (g, (_, density)) in curve.groups.iter().zip(densities) {
        for p in g.points.iter().filter(|p| p.position.phase == Phase::Repetition) {
            w.serialize(PerformanceRow {
                errors: g.errors,
                n_problems: g.n_problems,
                density,
                repetition: p.position.index + 1,
                mean: p.performance.mean,
                sem: p.performance.sem,
            })?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(&files.contribution)?;
    for g in &trace.groups {
        for p in &g.points {
            w.serialize(TraceRow {
                errors: g.errors,
                phase: p.position.phase.code(),
                index: p.position.index,
                retrieved_mean: p.retrieved.mean,
                retrieved_sem: p.retrieved.sem,
                weight_mean: p.weight.map(|x| x.mean),
                update_probability: p.update_probability.mean,
            })?;
        }
    }
    w.flush()?;

    serde_json::to_writer_pretty(File::create(&files.summary)?, &Summary { curve, trace, rt_center: center })?;
    Ok(files)
}
